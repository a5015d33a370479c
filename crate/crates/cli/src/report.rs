use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub struct Outcome {
    pub inputs: Value,
    pub method: String,
    pub result: Value,
}

pub fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Schema(format!("cannot serialise report: {e}")))
}

pub fn assemble(verb: &str, out: Outcome, wall_clock_ms: Option<u128>) -> Value {
    let mut r = json!({
        "verb": verb,
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": out.inputs,
        "method": out.method,
        "result": out.result,
    });
    if let Some(ms) = wall_clock_ms {
        r["wall_clock_ms"] = json!(ms as u64);
    }
    r
}

/// Pretty JSON with keys sorted (serde_json maps are ordered by key).
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialise");
    s.push('\n');
    s
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, rows);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let cells: Vec<String> = xs.iter().map(scalar).collect();
            rows.push((prefix.to_string(), format!("[{}]", cells.join(", "))));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

const MAX_ROWS: usize = 60;

/// Key/value rows for the verb's result; a `table` field of string rows
/// is drawn as a grid instead.
pub fn text_table(report: &Value) -> String {
    let result = &report["result"];
    let mut out = String::new();
    if let Some(grid) = result.get("table").and_then(Value::as_array) {
        let cells: Vec<Vec<String>> = grid.iter().map(|r| r.as_array().map_or(vec![], |r| r.iter().map(scalar).collect())).collect();
        let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> =
            (0..cols).map(|c| cells.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
        for row in &cells {
            let line: Vec<String> = row.iter().enumerate().map(|(c, s)| format!("{s:>w$}", w = widths[c])).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out.push('\n');
    }
    let mut rows = vec![("verb".to_string(), scalar(&report["verb"])), ("method".to_string(), scalar(&report["method"]))];
    flatten("", result, &mut rows);
    rows.retain(|(k, _)| !k.starts_with("table"));
    let extra = rows.len().saturating_sub(MAX_ROWS);
    rows.truncate(MAX_ROWS);
    let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        out.push_str(&format!("{k:<w$}  {v}\n"));
    }
    if extra > 0 {
        out.push_str(&format!("… {extra} more rows in the JSON report\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_tabulated() {
        let r = assemble(
            "x",
            Outcome { inputs: json!({"b": 1, "a": 2}), method: "m".into(), result: json!({"z": "1/2", "a": [1, 2], "table": [["", "1"], ["1", "5/4"]]}) },
            None,
        );
        let s = canonical(&r);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(!s.contains("wall_clock"));
        let t = text_table(&r);
        assert!(t.contains("\n1  5/4") && t.contains("z       1/2") && t.contains("a       [1, 2]"), "{t}");
    }
}
