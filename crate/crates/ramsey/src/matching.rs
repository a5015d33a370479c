//! Finite checks of matching conclusions.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use unclab_core::error::{domain, Result};
use unclab_core::rational::{fmt_q, Q};

/// Finite set of positive integers, kept sorted.
pub type Set = Vec<u64>;

pub fn normalise(s: &[u64]) -> Set {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// `a ≺ b`: `a` is an initial segment of `b`.
pub fn is_initial_segment(a: &[u64], b: &[u64]) -> bool {
    let (a, b) = (normalise(a), normalise(b));
    a.len() <= b.len() && b[..a.len()] == a[..]
}

fn as_set(s: &[u64]) -> BTreeSet<u64> {
    s.iter().copied().collect()
}

fn show(s: &BTreeSet<u64>) -> String {
    format!("{:?}", s.iter().collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingWitness {
    #[serde(rename = "L")]
    pub l: Set,
    #[serde(rename = "M")]
    pub m: Set,
    #[serde(rename = "F_L")]
    pub f_l: Vec<Set>,
    #[serde(rename = "F_M")]
    pub f_m: Vec<Set>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingCheck {
    pub valid: bool,
    /// `F_j^L ⊆ L`, `F_j^M ⊆ M` and equal colour counts
    pub well_formed: bool,
    /// `F_j^L ≺ F_j^M` or `F_j^M ≺ F_j^L` for every `j`
    pub comparable: bool,
    /// `L ∩ M = ⋃_j F_j^L ∩ F_j^M`
    pub intersection: bool,
    pub diagnostics: Vec<String>,
}

pub fn validate_matching(w: &MatchingWitness) -> MatchingCheck {
    let mut diagnostics = vec![];
    let (l, m) = (as_set(&w.l), as_set(&w.m));
    let mut well_formed = w.f_l.len() == w.f_m.len();
    if !well_formed {
        diagnostics.push(format!("{} colours for L but {} for M", w.f_l.len(), w.f_m.len()));
    }
    for (name, fs, x) in [("L", &w.f_l, &l), ("M", &w.f_m, &m)] {
        for (j, f) in fs.iter().enumerate() {
            if !as_set(f).is_subset(x) {
                well_formed = false;
                diagnostics.push(format!("F_{}^{name} is not contained in {name}", j + 1));
            }
        }
    }
    let mut comparable = true;
    let mut union = BTreeSet::new();
    for (j, (a, b)) in w.f_l.iter().zip(&w.f_m).enumerate() {
        let ok = is_initial_segment(a, b) || is_initial_segment(b, a);
        if !ok {
            comparable = false;
            diagnostics.push(format!("colour {}: {:?} and {:?} are not initial segments of one another", j + 1, normalise(a), normalise(b)));
        }
        union.extend(as_set(a).intersection(&as_set(b)).copied());
    }
    let meet: BTreeSet<u64> = l.intersection(&m).copied().collect();
    let intersection = meet == union;
    if !intersection {
        diagnostics.push(format!("L ∩ M = {} but the colour-wise intersections give {}", show(&meet), show(&union)));
    }
    MatchingCheck { valid: well_formed && comparable && intersection, well_formed, comparable, intersection, diagnostics }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureMatchingCheck {
    pub valid: bool,
    #[serde(with = "unclab_core::rational::qser")]
    pub weight: Q,
    pub weight_ok: bool,
    /// `F_j^L ⊆ F_j^M` for `j ∈ J`
    pub nested: bool,
    /// `L ∩ M ⊆ F_L ∩ F_M`
    pub intersection: bool,
    pub diagnostics: Vec<String>,
}

/// `j` are 1-based colours; `p` must be positive and sum to 1.
pub fn validate_pure_matching(
    f_l: &[Set],
    f_m: &[Set],
    l: &[u64],
    m: &[u64],
    j: &[usize],
    p: &[Q],
    c: &Q,
) -> Result<PureMatchingCheck> {
    if p.is_empty() || p.iter().any(|x| *x <= Q::zero()) {
        return domain("weights must be positive");
    }
    if p.iter().sum::<Q>() != Q::one() {
        return domain("weights must sum to 1");
    }
    if f_l.len() != p.len() || f_m.len() != p.len() {
        return domain(format!("expected {} colours on both sides", p.len()));
    }
    if let Some(bad) = j.iter().find(|&&x| x == 0 || x > p.len()) {
        return domain(format!("colour {bad} outside 1..{}", p.len()));
    }
    let js: BTreeSet<usize> = j.iter().copied().collect();
    let mut diagnostics = vec![];
    let weight: Q = js.iter().map(|&x| p[x - 1].clone()).sum();
    let weight_ok = weight >= *c;
    diagnostics.push(format!("Σ_J p_j = {} {} c = {}", fmt_q(&weight), if weight_ok { ">=" } else { "<" }, fmt_q(c)));
    let mut nested = true;
    for &x in &js {
        if !as_set(&f_l[x - 1]).is_subset(&as_set(&f_m[x - 1])) {
            nested = false;
            diagnostics.push(format!("F_{x}^L is not contained in F_{x}^M"));
        }
    }
    let fl: BTreeSet<u64> = f_l.iter().flatten().copied().collect();
    let fm: BTreeSet<u64> = f_m.iter().flatten().copied().collect();
    let meet: BTreeSet<u64> = as_set(l).intersection(&as_set(m)).copied().collect();
    let cover: BTreeSet<u64> = fl.intersection(&fm).copied().collect();
    let intersection = meet.is_subset(&cover);
    if !intersection {
        let escaped: BTreeSet<u64> = meet.difference(&cover).copied().collect();
        diagnostics.push(format!("L ∩ M has {} outside F_L ∩ F_M", show(&escaped)));
    }
    Ok(PureMatchingCheck { valid: weight_ok && nested && intersection, weight, weight_ok, nested, intersection, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::{q, qi};

    fn w(l: &[u64], m: &[u64], fl: &[&[u64]], fm: &[&[u64]]) -> MatchingWitness {
        MatchingWitness {
            l: l.to_vec(),
            m: m.to_vec(),
            f_l: fl.iter().map(|s| s.to_vec()).collect(),
            f_m: fm.iter().map(|s| s.to_vec()).collect(),
        }
    }

    #[test]
    fn matching_examples() {
        assert!(validate_matching(&w(&[3, 5, 9, 11], &[3, 5, 8, 12], &[&[3, 5]], &[&[3, 5, 8]])).valid);
        let c = validate_matching(&w(&[3, 5, 9, 12], &[3, 5, 8, 12], &[&[3, 5]], &[&[3, 5, 8]]));
        assert!(!c.valid && !c.intersection && c.comparable);
        let c = validate_matching(&w(&[1, 2, 3, 4], &[1, 3, 4, 5], &[&[1, 2], &[4]], &[&[1, 3], &[4]]));
        assert!(!c.comparable);
        assert!(is_initial_segment(&[], &[4]));
        assert!(!is_initial_segment(&[2], &[1, 2]));
    }

    #[test]
    fn pure_examples() {
        let (fl, fm): (Vec<Set>, Vec<Set>) = (vec![vec![1], vec![3]], vec![vec![1, 2], vec![4]]);
        let half = vec![q(1, 2), q(1, 2)];
        let r = validate_pure_matching(&fl, &fm, &[1, 3], &[1, 2, 4], &[1], &half, &q(1, 2)).unwrap();
        assert!(r.valid);
        assert!(validate_pure_matching(&fl, &fm, &[1, 3], &[1, 2, 4], &[], &half, &qi(0)).unwrap().valid);
        assert!(!validate_pure_matching(&fl, &fm, &[1, 3], &[1, 2, 4], &[], &half, &q(1, 100)).unwrap().valid);
        let r = validate_pure_matching(&fl, &fm, &[1, 3, 5], &[1, 2, 4, 5], &[1], &half, &q(1, 2)).unwrap();
        assert!(!r.intersection);
        assert!(validate_pure_matching(&fl, &fm, &[1], &[1], &[1], &[q(1, 2), q(1, 3)], &qi(0)).is_err());
        assert!(validate_pure_matching(&fl, &fm, &[1], &[1], &[3], &half, &qi(0)).is_err());
    }
}
