//! Oscillation, Schreier sets and decompositions, dyadic level splitting.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, Error, Result};
use unclab_core::norm::SparseVector;
use unclab_core::rational::{floor_log2, pow2, qi, Q};

fn normalise(e: &[usize]) -> Vec<usize> {
    let mut e = e.to_vec();
    e.sort_unstable();
    e.dedup();
    e
}

/// `max |a_i| / min |a_j|` over `E` with `a_j ≠ 0`; 1 when `a` vanishes on `E`.
pub fn oscillation(a: &SparseVector, e: &[usize]) -> Q {
    let vals: Vec<Q> = e.iter().map(|&i| a.get(i).abs()).filter(|v| !v.is_zero()).collect();
    match (vals.iter().max(), vals.iter().min()) {
        (Some(hi), Some(lo)) => hi / lo,
        _ => qi(1),
    }
}

/// Greedy partition of a sorted set into maximal successive blocks, each a
/// Schreier set.
fn schreier_blocks(e: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![];
    for &i in e {
        match out.last_mut() {
            Some(b) if b.len() < b[0] => b.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Membership in `S_1` (`|E| ≤ min E`) or `S_2`. The empty set belongs to both.
pub fn schreier_member(order: u32, e: &[usize]) -> Result<bool> {
    let e = normalise(e);
    if e.first() == Some(&0) {
        return domain("indices start at 1");
    }
    let Some(&min) = e.first() else { return Ok(true) };
    match order {
        1 => Ok(e.len() <= min),
        2 => Ok(schreier_blocks(&e).len() <= min),
        _ => domain(format!("unsupported Schreier order {order}")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierDecomposition {
    pub blocks: Vec<Vec<usize>>,
}

/// Greedy maximal blocks with oscillation at most `d`, kept only when the
/// block count is at most `min E`.
pub fn schreier_decompose(a: &SparseVector, e: &[usize], d: &Q) -> Result<Option<SchreierDecomposition>> {
    if *d < qi(1) {
        return Err(Error::Precondition("d must be at least 1".into()));
    }
    let e = normalise(e);
    let Some(&min) = e.first() else {
        return Ok(Some(SchreierDecomposition { blocks: vec![] }));
    };
    let blocks = greedy_osc_blocks(a, &e, d);
    Ok((blocks.len() <= min).then_some(SchreierDecomposition { blocks }))
}

/// Left-to-right maximal blocks of oscillation at most `d`.
pub fn greedy_osc_blocks(a: &SparseVector, e: &[usize], d: &Q) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![];
    for &i in e {
        if let Some(b) = out.last_mut() {
            b.push(i);
            if oscillation(a, b) <= *d {
                continue;
            }
            b.pop();
        }
        out.push(vec![i]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSplit {
    pub k: u32,
    pub e: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

/// `k = ⌊log2(1/δ)⌋ + 1`.
pub fn level_count(delta: &Q) -> Result<u32> {
    if *delta <= Q::zero() || *delta > qi(1) {
        return domain("delta must lie in (0, 1]");
    }
    Ok((floor_log2(&delta.recip()) + 1) as u32)
}

/// `E = {|a_i| ≥ δ}` split into the bands `2^{-j} < |a_i| ≤ 2^{-(j-1)}`.
pub fn level_split(a: &SparseVector, delta: &Q) -> Result<LevelSplit> {
    let k = level_count(delta)?;
    if a.sup() > qi(1) {
        return Err(Error::Precondition("level split needs sup |a_i| <= 1".into()));
    }
    let e: Vec<usize> = a.iter().filter(|(_, v)| v.abs() >= *delta).map(|(i, _)| i).collect();
    let mut blocks = vec![vec![]; k as usize];
    for &i in &e {
        let v = a.get(i).abs();
        // 2^{-j} < v ≤ 2^{-(j-1)}  ⇔  j = 1 - floor(log2 v) unless v is a power of two
        let m = floor_log2(&v);
        let j = if pow2(m) == v { 1 - m } else { -m };
        blocks[(j - 1) as usize].push(i);
    }
    Ok(LevelSplit { k, e, blocks })
}

/// Closed dyadic intervals `[2^{-j}, 2^{-j+1}]`, `j = 1..k`.
pub fn interval_ladder(delta: &Q) -> Result<Vec<(Q, Q)>> {
    let k = level_count(delta)?;
    Ok((1..=k as i64).map(|j| (pow2(-j), pow2(1 - j))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::q;

    fn v(xs: &[Q]) -> SparseVector {
        SparseVector::from_dense(xs)
    }

    #[test]
    fn oscillation_examples() {
        assert_eq!(oscillation(&v(&[qi(4), qi(1), qi(1)]), &[1, 2, 3]), qi(4));
        assert_eq!(oscillation(&v(&[qi(2), qi(2)]), &[1, 2]), qi(1));
        assert_eq!(oscillation(&v(&[qi(2), qi(2)]), &[3, 4]), qi(1));
    }

    #[test]
    fn schreier_examples() {
        assert!(schreier_member(1, &[2, 5]).unwrap());
        assert!(!schreier_member(1, &[1, 2]).unwrap());
        assert!(schreier_member(2, &[2, 3, 10, 11, 12]).unwrap());
        assert!(schreier_member(1, &[]).unwrap());
        assert!(schreier_member(3, &[4]).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let a = SparseVector::from_pairs([(2, qi(4)), (3, qi(1)), (4, qi(1))]);
        let d = schreier_decompose(&a, &[2, 3, 4], &qi(2)).unwrap().unwrap();
        assert_eq!(d.blocks, vec![vec![2], vec![3, 4]]);
        let a = v(&[qi(1), qi(4)]);
        assert!(schreier_decompose(&a, &[1, 2], &qi(2)).unwrap().is_none());
        let a = v(&[qi(1), qi(-1), qi(1), qi(-1)]);
        assert_eq!(schreier_decompose(&a, &[1, 3], &qi(1)).unwrap().unwrap().blocks, vec![vec![1, 3]]);
        assert!(schreier_decompose(&a, &[1], &q(1, 2)).is_err());
    }

    #[test]
    fn level_examples() {
        let a = v(&[qi(1), q(3, 5), q(3, 10), q(1, 10)]);
        let s = level_split(&a, &q(1, 4)).unwrap();
        assert_eq!(s.k, 3);
        assert_eq!(s.e, vec![1, 2, 3]);
        assert_eq!(s.blocks, vec![vec![1, 2], vec![3], vec![]]);
        let s = level_split(&v(&[qi(1), q(1, 2), qi(-1)]), &qi(1)).unwrap();
        assert_eq!((s.k, s.e.clone()), (1, vec![1, 3]));
        assert_eq!(s.blocks, vec![vec![1, 3]]);
        assert!(matches!(level_split(&v(&[qi(2)]), &q(1, 2)), Err(Error::Precondition(_))));
        assert_eq!(
            interval_ladder(&q(1, 4)).unwrap(),
            vec![(q(1, 2), qi(1)), (q(1, 4), q(1, 2)), (q(1, 8), q(1, 4))]
        );
        assert!(interval_ladder(&qi(0)).is_err());
    }
}
