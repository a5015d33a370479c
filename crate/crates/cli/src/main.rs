//! `unclab`: exact computations on resolutions, norms, constants, Elton
//! layouts and finite Ramsey witnesses, reported as sorted JSON.

mod error;
mod input;
mod report;
mod verbs;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "unclab", version, about = "Exact finite-scale certificates", propagate_version = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Debug)]
struct Global {
    /// write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// print an aligned text table on stdout
    #[arg(long, global = true)]
    table: bool,
    /// include wall-clock milliseconds in the report
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Directed bracket [r,s] of two resolution files
    Bracket(verbs::BracketArgs),
    /// Rademacher family R_{n k0^{m-l}, l}, l = 1..m, with its pairwise bracket table
    Rademacher(verbs::RademacherArgs),
    /// Longest embedding chain in a list of patterns
    Chain(verbs::ChainArgs),
    /// Norm of a vector with a dual certificate
    Norm(verbs::NormArgs),
    /// A constant query on a norm instance
    Constant(verbs::ConstantArgs),
    /// Certified lower bound for the Elton layout
    Elton(verbs::EltonArgs),
    /// Quasi-greedy variant of the Elton certificate
    Quasi(verbs::QuasiArgs),
    /// Exploratory coded-norm probe (seeded)
    MrDemo(verbs::MrArgs),
    /// Matching witnesses: validate, pure condition, or search
    Match(verbs::MatchArgs),
    /// Heredity of a colour family restricted to a set
    Hereditary(verbs::HereditaryArgs),
}

fn dispatch(verb: &Verb, caps: &unclab_core::Caps) -> CliResult<(&'static str, report::Outcome)> {
    Ok(match verb {
        Verb::Bracket(a) => ("bracket", verbs::bracket(a, caps)?),
        Verb::Rademacher(a) => ("rademacher", verbs::rademacher(a, caps)?),
        Verb::Chain(a) => ("chain", verbs::chain(a)?),
        Verb::Norm(a) => ("norm", verbs::norm(a, caps)?),
        Verb::Constant(a) => ("constant", verbs::constant(a, caps)?),
        Verb::Elton(a) => ("elton", verbs::elton(a, caps)?),
        Verb::Quasi(a) => ("quasi", verbs::quasi(a, caps)?),
        Verb::MrDemo(a) => ("mr-demo", verbs::mr(a, caps)?),
        Verb::Match(a) => ("match", verbs::matching(a, caps)?),
        Verb::Hereditary(a) => ("hereditary", verbs::hereditary(a, caps)?),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let caps = unclab_core::Caps::from_env().map_err(|e| CliError::Schema(format!("{}: {e}", unclab_core::Caps::ENV)))?;
    let start = Instant::now();
    let (verb, outcome) = dispatch(&cli.verb, &caps)?;
    let elapsed = cli.global.timing.then(|| start.elapsed().as_millis());
    let rep = report::assemble(verb, outcome, elapsed);
    let json = report::canonical(&rep);
    if let Some(path) = &cli.global.out {
        std::fs::write(path, &json).map_err(|e| CliError::MissingFile(format!("{}: {e}", path.display())))?;
    }
    if cli.global.table {
        print!("{}", report::text_table(&rep));
    } else if cli.global.out.is_none() {
        print!("{json}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("unclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
