use clap::{Args, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::PathBuf;
use unclab_constants::{compute_constant, ConstantQuery, Method};
use unclab_core::norm::{build_pointcloud, build_standard, dual_certificate, eval_norm, NormInstance, SparseVector, StandardNorm};
use unclab_core::rational::{fmt_q, Q};
use unclab_core::resolution::{
    bracket as bracket_of, bracket_witness, choose_multiplicities, longest_chain, mutual_bracket, rademacher_bound,
    rademacher_family, ris_sum, BracketMethod, Pattern, RademacherParams, Resolution,
};
use unclab_core::Caps;
use unclab_elton::certificate::{default_alpha_window, k_lower_certificate, quasi_certificate};
use unclab_elton::mr::mr_demo;
use unclab_elton::params::EltonParams;
use unclab_ramsey::hereditary::{remark_counterexample, remark_family, weakly_hereditary, ColourFamily, HeredityMode};
use unclab_ramsey::maps::{adversarial_two_colour, constant_one, first_blocks, PrefixContinuousMap};
use unclab_ramsey::matching::{validate_matching, validate_pure_matching, MatchingWitness, Set};
use unclab_ramsey::search::{search_matching, SearchMode};

use crate::error::{CliError, CliResult};
use crate::input::{index_set, integers, rational, read_json, require};
use crate::report::{to_value, Outcome};

fn s(x: &Q) -> String {
    fmt_q(x)
}

fn path_str(p: &std::path::Path) -> String {
    p.display().to_string()
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BracketMethodArg {
    Dp,
    Brute,
}

#[derive(Args, Debug)]
pub struct BracketArgs {
    /// resolution file for r
    r: PathBuf,
    /// resolution file for s
    s: PathBuf,
    #[arg(long, value_enum, default_value = "dp")]
    method: BracketMethodArg,
}

pub fn bracket(a: &BracketArgs, caps: &Caps) -> CliResult<Outcome> {
    let r: Resolution = read_json(&a.r)?;
    let t: Resolution = read_json(&a.s)?;
    let method = match a.method {
        BracketMethodArg::Dp => BracketMethod::Dp,
        BracketMethodArg::Brute => BracketMethod::Brute,
    };
    let value = bracket_of(&r, &t, method, caps)?;
    let (dp_value, matching) = bracket_witness(&r, &t)?;
    if dp_value != value {
        return Err(CliError::Schema("bracket methods disagree".into()));
    }
    let witness_value = matching.value(&r, &t);
    Ok(Outcome {
        inputs: json!({"r": path_str(&a.r), "s": path_str(&a.s), "resolution_r": to_value(&r)?, "resolution_s": to_value(&t)?}),
        method: format!("{:?}", method).to_lowercase(),
        result: json!({
            "value": s(&value),
            "reverse": s(&bracket_of(&t, &r, BracketMethod::Dp, caps)?),
            "mutual": s(&mutual_bracket(&r, &t)?),
            "witness": {"pairs": matching.pairs.iter().map(|&(u, v)| json!([u + 1, v + 1])).collect::<Vec<_>>(), "value": s(&witness_value)},
        }),
    })
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long)]
    k0: Option<u32>,
    /// comma separated multiplicities n_1 < … < n_k0
    #[arg(long, conflicts_with = "auto_ns")]
    ns: Option<String>,
    /// use the smallest greedy multiplicities
    #[arg(long)]
    auto_ns: bool,
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// number of levels
    #[arg(long)]
    m: Option<u32>,
}

impl FamilyArgs {
    fn ns(&self, k0: u32) -> CliResult<Vec<BigInt>> {
        match (&self.ns, self.auto_ns) {
            (Some(x), _) => integers("ns", x),
            (None, true) => Ok(choose_multiplicities(k0)?),
            (None, false) => Err(CliError::Schema("give --ns or --auto-ns".into())),
        }
    }

    fn inputs(&self, k0: u32, m: u32, ns: &[BigInt]) -> Value {
        json!({"k0": k0, "m": m, "n": self.n, "ns": ns.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "auto_ns": self.auto_ns})
    }
}

#[derive(Args, Debug)]
pub struct RademacherArgs {
    #[command(flatten)]
    family: FamilyArgs,
}

pub fn rademacher(a: &RademacherArgs, caps: &Caps) -> CliResult<Outcome> {
    let f = &a.family;
    let k0 = require("k0", f.k0)?;
    let m = require("m", f.m)?;
    let ns = f.ns(k0)?;
    let fam = rademacher_family(k0, &ns, f.n, m, caps)?;
    let params = RademacherParams { k0, ns: ns.clone(), n: f.n, l: 1, m };
    let size = fam.len();
    let mut brackets = vec![vec![Q::default(); size]; size];
    for i in 0..size {
        for j in i..size {
            let b = mutual_bracket(&fam[i], &fam[j])?;
            brackets[i][j] = b.clone();
            brackets[j][i] = b;
        }
    }
    let diag_bound = rademacher_bound(&params, 1, 1)?;
    let off_bound = if m >= 2 { Some(rademacher_bound(&params, 1, 2)?) } else { None };
    let five = Q::new(5.into(), k0.into());
    let off: Vec<&Q> = (0..size).flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| &brackets[i][j]).collect();
    let max_off = off.iter().max().map(|x| (*x).clone());
    let max_diag = (0..size).map(|i| brackets[i][i].clone()).max();
    let mut table = vec![std::iter::once(String::from("l")).chain((1..=size).map(|l| l.to_string())).collect::<Vec<_>>()];
    for (i, row) in brackets.iter().enumerate() {
        table.push(std::iter::once((i + 1).to_string()).chain(row.iter().map(s)).collect());
    }
    Ok(Outcome {
        inputs: f.inputs(k0, m, &ns),
        method: "dp".into(),
        result: json!({
            "lengths": fam.iter().map(|r| r.len()).collect::<Vec<_>>(),
            "ris_sum": s(&ris_sum(&ns)),
            "ris_satisfied": params.ris_satisfied(),
            "mutual_brackets": brackets.iter().map(|r| r.iter().map(s).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "table": table,
            "diagonal_bound": s(&diag_bound),
            "off_diagonal_bound": off_bound.as_ref().map(s),
            "max_diagonal": max_diag.as_ref().map(s),
            "max_off_diagonal": max_off.as_ref().map(s),
            "diagonal_within_bound": max_diag.as_ref().is_none_or(|x| *x <= diag_bound),
            "off_diagonal_within_bound": match (&max_off, &off_bound) { (Some(x), Some(b)) => *x <= *b, _ => true },
            "off_diagonal_within_five_over_k0": max_off.as_ref().is_none_or(|x| *x <= five),
        }),
    })
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    /// JSON array of patterns {"k", "colours"}
    patterns: PathBuf,
}

pub fn chain(a: &ChainArgs) -> CliResult<Outcome> {
    let ps: Vec<Pattern> = read_json(&a.patterns)?;
    let idx = longest_chain(&ps)?;
    Ok(Outcome {
        inputs: json!({"patterns": path_str(&a.patterns), "count": ps.len()}),
        method: "embedding DAG longest path".into(),
        result: json!({"indices": idx, "length": idx.len()}),
    })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StandardArg {
    L1,
    Linf,
    Summing,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    /// norm instance file
    #[arg(conflicts_with_all = ["standard", "points"])]
    instance: Option<PathBuf>,
    /// built-in instance instead of a file
    #[arg(long, value_enum, requires = "dim")]
    standard: Option<StandardArg>,
    #[arg(long)]
    dim: Option<usize>,
    /// point-cloud instance: JSON array of rows of rationals
    #[arg(long)]
    points: Option<PathBuf>,
    /// sparse vector file [{"i", "v"}]
    #[arg(long, conflicts_with = "dense")]
    vector: Option<PathBuf>,
    /// comma separated entries a_1, a_2, …
    #[arg(long)]
    dense: Option<String>,
}

#[derive(Deserialize)]
struct Points(#[serde(with = "rows")] Vec<Vec<Q>>);

mod rows {
    use serde::{Deserialize, Deserializer};
    use unclab_core::rational::{parse_q, Q};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        use serde::de::Error as _;
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter().map(|r| r.iter().map(|x| parse_q(x).map_err(D::Error::custom)).collect()).collect()
    }
}

pub fn norm(a: &NormArgs, caps: &Caps) -> CliResult<Outcome> {
    let (inst, source): (NormInstance, Value) = match (&a.instance, a.standard, &a.points) {
        (Some(p), _, _) => (read_json(p)?, json!(path_str(p))),
        (None, Some(k), _) => {
            let kind = match k {
                StandardArg::L1 => StandardNorm::L1,
                StandardArg::Linf => StandardNorm::Linf,
                StandardArg::Summing => StandardNorm::Summing,
            };
            let n = require("dim", a.dim)?;
            (build_standard(kind, n)?, json!({"standard": format!("{kind:?}").to_lowercase(), "dim": n}))
        }
        (None, None, Some(p)) => {
            let Points(rows) = read_json(p)?;
            (build_pointcloud(&rows)?, json!({"points": path_str(p)}))
        }
        _ => return Err(CliError::Schema("give an instance file, --standard or --points".into())),
    };
    inst.check_caps(caps)?;
    let v: SparseVector = match (&a.vector, &a.dense) {
        (Some(p), _) => read_json(p)?,
        (None, Some(d)) => {
            let xs: Vec<Q> = d.split(',').map(|x| rational("dense", x)).collect::<CliResult<_>>()?;
            SparseVector::from_dense(&xs)
        }
        _ => return Err(CliError::Schema("give --vector or --dense".into())),
    };
    let value = eval_norm(&inst, &v)?;
    let cert = dual_certificate(&inst, &v)?;
    Ok(Outcome {
        inputs: json!({"instance": source, "vector": to_value(&v)?}),
        method: "max over functionals and projections".into(),
        result: json!({
            "value": s(&value),
            "certificate": to_value(&cert)?,
            "certificate_reproduces": cert.recompute(&v) == value,
        }),
    })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConstantMethodArg {
    Grid,
    Lp,
}

#[derive(Args, Debug)]
pub struct ConstantArgs {
    /// query file {"instance", "delta", "mode", "params"}
    query: PathBuf,
    /// defaults to the LP where the mode supports it
    #[arg(long, value_enum)]
    method: Option<ConstantMethodArg>,
    /// grid step
    #[arg(long)]
    step: Option<String>,
}

pub fn constant(a: &ConstantArgs, caps: &Caps) -> CliResult<Outcome> {
    let q: ConstantQuery = read_json(&a.query)?;
    let method = match a.method {
        Some(ConstantMethodArg::Lp) => Method::FractionalLp,
        Some(ConstantMethodArg::Grid) => match &a.step {
            Some(st) => Method::Grid { step: rational("step", st)? },
            None => Method::grid_default(),
        },
        None if q.mode.lp_supported() && a.step.is_none() => Method::FractionalLp,
        None => match &a.step {
            Some(st) => Method::Grid { step: rational("step", st)? },
            None => Method::grid_default(),
        },
    };
    let rep = compute_constant(&q, &method, caps)?;
    Ok(Outcome {
        inputs: json!({"query": path_str(&a.query), "mode": to_value(&q.mode)?, "delta": s(&q.delta), "params": to_value(&q.params)?}),
        method: to_value(&method)?["kind"].as_str().unwrap_or("").to_string(),
        result: to_value(&rep)?,
    })
}

#[derive(Args, Debug)]
pub struct EltonArgs {
    /// parameter file {"n1", "n2", "K", "eps", "m1", "m2"}
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    n1: Option<u64>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long = "K")]
    k: Option<u32>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    m1: Option<u64>,
    #[arg(long)]
    m2: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ParamFile {
    #[serde(flatten)]
    params: EltonParams,
    #[serde(default)]
    m1: Option<u64>,
    #[serde(default)]
    m2: Option<u64>,
}

impl EltonArgs {
    fn resolve(&self) -> CliResult<(EltonParams, u64, u64)> {
        let (mut p, mut m1, mut m2) = match &self.params {
            Some(path) => {
                let f: ParamFile = read_json(path)?;
                (Some(f.params), f.m1, f.m2)
            }
            None => (None, None, None),
        };
        if let Some(p) = &mut p {
            p.n1 = self.n1.unwrap_or(p.n1);
            p.n2 = self.n2.unwrap_or(p.n2);
            p.k = self.k.unwrap_or(p.k);
            if let Some(e) = &self.eps {
                p.eps = rational("eps", e)?;
            }
        }
        let p = match p {
            Some(p) => p,
            None => EltonParams::new(
                require("n1", self.n1)?,
                require("n2", self.n2)?,
                require("K", self.k)?,
                rational("eps", &require("eps", self.eps.clone())?)?,
            ),
        };
        m1 = self.m1.or(m1);
        m2 = self.m2.or(m2);
        Ok((p, m1.unwrap_or(1), m2.unwrap_or(2)))
    }
}

fn elton_inputs(p: &EltonParams, m1: u64, m2: u64) -> CliResult<Value> {
    let mut v = to_value(p)?;
    v["m1"] = json!(m1);
    v["m2"] = json!(m2);
    Ok(v)
}

pub fn elton(a: &EltonArgs, caps: &Caps) -> CliResult<Outcome> {
    let (p, m1, m2) = a.resolve()?;
    let c = k_lower_certificate(&p, m1, m2, caps)?;
    let mut result = to_value(&c)?;
    // x*(x⁺) over the largest case bound for ‖x‖
    result["analytic_ratio_bound"] = json!(s(&(&c.x_star_on_plus / &c.case_bounds.max)));
    Ok(Outcome { inputs: elton_inputs(&p, m1, m2)?, method: "structured_dp".into(), result })
}

#[derive(Args, Debug)]
pub struct QuasiArgs {
    #[command(flatten)]
    elton: EltonArgs,
    #[arg(long)]
    alpha: String,
    /// admissible alpha window, default 1/2..1
    #[arg(long)]
    alpha_min: Option<String>,
    #[arg(long)]
    alpha_max: Option<String>,
}

pub fn quasi(a: &QuasiArgs, caps: &Caps) -> CliResult<Outcome> {
    let (p, m1, m2) = a.elton.resolve()?;
    let alpha = rational("alpha", &a.alpha)?;
    let (mut lo, mut hi) = default_alpha_window();
    if let Some(x) = &a.alpha_min {
        lo = rational("alpha-min", x)?;
    }
    if let Some(x) = &a.alpha_max {
        hi = rational("alpha-max", x)?;
    }
    let c = quasi_certificate(&p, &alpha, m1, m2, &(lo.clone(), hi.clone()), caps)?;
    let mut inputs = elton_inputs(&p, m1, m2)?;
    inputs["alpha"] = json!(s(&alpha));
    inputs["alpha_window"] = json!([s(&lo), s(&hi)]);
    Ok(Outcome { inputs, method: "structured_dp".into(), result: to_value(&c)? })
}

#[derive(Args, Debug)]
pub struct MrArgs {
    /// JSON array of resolutions; otherwise a Rademacher family from the flags
    #[arg(long)]
    family: Option<PathBuf>,
    #[command(flatten)]
    rademacher: FamilyArgs,
    /// length of the special sequence
    #[arg(long)]
    k: usize,
    #[arg(long, required = true)]
    seed: u64,
}

pub fn mr(a: &MrArgs, caps: &Caps) -> CliResult<Outcome> {
    let (family, source) = match &a.family {
        Some(p) => (read_json::<Vec<Resolution>>(p)?, json!(path_str(p))),
        None => {
            let f = &a.rademacher;
            let k0 = require("k0", f.k0)?;
            let m = require("m", f.m)?;
            let ns = f.ns(k0)?;
            (rademacher_family(k0, &ns, f.n, m, caps)?, f.inputs(k0, m, &ns))
        }
    };
    let r = mr_demo(&family, a.k, a.seed, caps)?;
    Ok(Outcome {
        inputs: json!({"family": source, "k": a.k, "seed": a.seed}),
        method: "relaxed coded norm DP (exploratory)".into(),
        result: to_value(&r)?,
    })
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[command(subcommand)]
    cmd: MatchCmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Builtin {
    /// F^M = first two elements of M
    FirstTwo,
    /// F^M = {1} for M containing 1
    Constant,
    /// F_1 = {m_1}, F_2 = the next m_1 elements
    Adversarial,
}

#[derive(Subcommand, Debug)]
pub enum MatchCmd {
    /// Check a witness {"L", "M", "F_L", "F_M"}
    Validate { witness: PathBuf },
    /// Check the pure-matching condition {"F_L", "F_M", "L", "M", "J", "p", "c"}
    Pure { file: PathBuf },
    /// Search for a witness
    Search {
        /// map file {"depth", "entries": [{"prefix", "F"}], "cover_min_size"}
        #[arg(long, conflicts_with = "builtin")]
        map: Option<PathBuf>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long)]
        universe: u64,
        /// least size of the sets standing in for infinite ones
        #[arg(long)]
        horizon: usize,
        /// sample pairs instead of enumerating
        #[arg(long, requires = "seed")]
        randomized: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Deserialize)]
struct PureFile {
    #[serde(rename = "F_L")]
    f_l: Vec<Set>,
    #[serde(rename = "F_M")]
    f_m: Vec<Set>,
    #[serde(rename = "L")]
    l: Set,
    #[serde(rename = "M")]
    m: Set,
    #[serde(rename = "J")]
    j: Vec<usize>,
    #[serde(with = "unclab_core::rational::qvec")]
    p: Vec<Q>,
    #[serde(with = "unclab_core::rational::qser")]
    c: Q,
}

pub fn matching(a: &MatchArgs, caps: &Caps) -> CliResult<Outcome> {
    match &a.cmd {
        MatchCmd::Validate { witness } => {
            let w: MatchingWitness = read_json(witness)?;
            Ok(Outcome { inputs: json!({"witness": to_value(&w)?}), method: "validate".into(), result: to_value(&validate_matching(&w))? })
        }
        MatchCmd::Pure { file } => {
            let f: PureFile = read_json(file)?;
            let r = validate_pure_matching(&f.f_l, &f.f_m, &f.l, &f.m, &f.j, &f.p, &f.c)?;
            Ok(Outcome { inputs: json!({"file": path_str(file)}), method: "pure".into(), result: to_value(&r)? })
        }
        MatchCmd::Search { map, builtin, universe, horizon, randomized, samples, seed } => {
            let (m, source): (PrefixContinuousMap, Value) = match (map, builtin) {
                (Some(p), _) => (PrefixContinuousMap::from_json(&read_text(p)?)?, json!(path_str(p))),
                (None, Some(b)) => {
                    let m = match b {
                        Builtin::FirstTwo => first_blocks(*universe, &[2])?,
                        Builtin::Constant => constant_one(),
                        Builtin::Adversarial => adversarial_two_colour(*universe)?,
                    };
                    (m, json!(format!("{b:?}").to_lowercase()))
                }
                _ => return Err(CliError::Schema("give --map or --builtin".into())),
            };
            let mode = if *randomized {
                SearchMode::Randomized { seed: require("seed", *seed)?, samples: *samples }
            } else {
                SearchMode::Exhaustive
            };
            let o = search_matching(&m, *universe, *horizon, mode, caps)?;
            Ok(Outcome {
                inputs: json!({"map": source, "universe": universe, "horizon": horizon}),
                method: if *randomized { "randomized" } else { "exhaustive" }.into(),
                result: to_value(&o)?,
            })
        }
    }
}

fn read_text(p: &std::path::Path) -> CliResult<String> {
    std::fs::read_to_string(p).map_err(|e| CliError::MissingFile(format!("{}: {e}", p.display())))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Hereditary,
    Weakly,
}

#[derive(Args, Debug)]
pub struct HereditaryArgs {
    /// colour family file {"k", "universe", "members"}
    #[arg(conflicts_with = "remark")]
    family: Option<PathBuf>,
    /// use the truncated counterexample family on 1..U
    #[arg(long)]
    remark: Option<u64>,
    /// restriction set, e.g. 1..12 or 1,3,5
    #[arg(long)]
    set: String,
    #[arg(long, value_enum, default_value = "weakly")]
    mode: ModeArg,
}

pub fn hereditary(a: &HereditaryArgs, caps: &Caps) -> CliResult<Outcome> {
    let set = index_set("set", &a.set)?;
    let (fam, source) = match (&a.family, a.remark) {
        (Some(p), _) => (read_json::<ColourFamily>(p)?, json!(path_str(p))),
        (None, Some(u)) => (remark_family(u, caps)?, json!({"remark_universe": u})),
        _ => return Err(CliError::Schema("give a family file or --remark".into())),
    };
    let mode = match a.mode {
        ModeArg::Hereditary => HeredityMode::Hereditary,
        ModeArg::Weakly => HeredityMode::Weakly,
    };
    let check = weakly_hereditary(&fam, &set, mode);
    let mut result = json!({"check": to_value(&check)?, "family_size": fam.len(), "k": fam.k(), "universe": fam.universe()});
    if let Some(u) = a.remark {
        if set.len() >= 2 {
            result["remark_pair"] = to_value(&remark_counterexample(&set, u, caps)?)?;
        }
    }
    Ok(Outcome { inputs: json!({"family": source, "set": set}), method: format!("{:?}", mode).to_lowercase(), result })
}
