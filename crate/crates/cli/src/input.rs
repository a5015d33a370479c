use serde::de::DeserializeOwned;
use std::path::Path;
use unclab_core::rational::{parse_q, Q};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::MissingFile(format!("{shown}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::from_json(&shown, e))
}

pub fn rational(flag: &str, s: &str) -> CliResult<Q> {
    parse_q(s).map_err(|_| CliError::MalformedRational(format!("--{flag} {s:?}")))
}

/// `1,3,5`, `1..12` or a mix such as `1..4,9`.
pub fn index_set(flag: &str, s: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Schema(format!("--{flag}: expected a list like 1,3,5 or 1..12, got {s:?}"));
    let mut out = vec![];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.contains(&0) {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn integers(flag: &str, s: &str) -> CliResult<Vec<num_bigint::BigInt>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Schema(format!("--{flag}: bad integer {x:?}"))))
        .collect()
}

pub fn require<T>(flag: &str, v: Option<T>) -> CliResult<T> {
    v.ok_or_else(|| CliError::Schema(format!("--{flag} is required")))
}
