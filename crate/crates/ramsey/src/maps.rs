//! Finite-depth models of continuous maps `M ↦ (F_1^M < … < F_n^M)`.
//!
//! A map of depth `d` decides `F^M` from `M ∩ [1..d]` alone: an entry key
//! applies to `M` when it is an initial segment of `M ∩ [1..d]`. Keys are
//! prefix-free, so at most one applies. Sets matched by no key are outside
//! the map's domain; `cover_min_size`, when given, asserts that every
//! `S ⊆ [1..d]` with at least that many elements is matched.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use unclab_core::error::{domain, size, Result};

use crate::matching::Set;

/// Largest depth supported (sets are packed into `u64`).
pub const MAX_DEPTH: u64 = 63;
/// Largest depth for which totality is checked by enumeration.
pub const MAX_TOTALITY_DEPTH: u64 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEntry {
    pub prefix: Set,
    #[serde(rename = "F")]
    pub f: Vec<Set>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSpec {
    pub depth: u64,
    pub entries: Vec<MapEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_min_size: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PrefixContinuousMap {
    pub depth: u64,
    /// number of colours
    pub n: usize,
    pub cover_min_size: Option<usize>,
    entries: Vec<MapEntry>,
    keys: HashMap<u64, usize>,
}

pub fn mask(s: &[u64]) -> u64 {
    s.iter().fold(0, |m, &x| m | 1 << (x - 1))
}

pub fn unmask(m: u64) -> Set {
    (1..=64).filter(|i| m >> (i - 1) & 1 == 1).collect()
}

/// Bits `1..=i` set.
pub fn low(i: u64) -> u64 {
    if i >= 64 {
        u64::MAX
    } else {
        (1u64 << i) - 1
    }
}

impl PrefixContinuousMap {
    /// Validates every entry; totality is checked when `cover_min_size` is set.
    pub fn new(spec: MapSpec) -> Result<Self> {
        let MapSpec { depth, entries, cover_min_size } = spec;
        if depth > MAX_DEPTH {
            return size(format!("depth {depth} exceeds {MAX_DEPTH}"));
        }
        let n = entries.first().map_or(0, |e| e.f.len());
        if n == 0 {
            return domain("a map needs at least one entry with at least one colour");
        }
        let mut keys = HashMap::new();
        let mut normalised = Vec::with_capacity(entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            let prefix = crate::matching::normalise(&e.prefix);
            if prefix.len() != e.prefix.len() || prefix.iter().any(|&x| x == 0 || x > depth) {
                return domain(format!("entry {i}: prefix must be distinct elements of 1..{depth}"));
            }
            if e.f.len() != n {
                return domain(format!("entry {i}: {} colours, expected {n}", e.f.len()));
            }
            let pm = mask(&prefix);
            let mut last = 0;
            let mut f = Vec::with_capacity(n);
            for (j, fj) in e.f.iter().enumerate() {
                let fj = crate::matching::normalise(fj);
                if fj.is_empty() || fj.len() != e.f[j].len() {
                    return domain(format!("entry {i}: F_{} must be non-empty without repeats", j + 1));
                }
                if fj[0] <= last {
                    return domain(format!("entry {i}: F_{} does not follow F_{}", j + 1, j));
                }
                if fj.iter().any(|&x| x > depth || pm >> (x - 1) & 1 == 0) {
                    return domain(format!("entry {i}: F_{} is not contained in the prefix", j + 1));
                }
                last = *fj.last().unwrap();
                f.push(fj);
            }
            if keys.insert(pm, i).is_some() {
                return domain(format!("entry {i}: duplicate prefix"));
            }
            normalised.push(MapEntry { prefix, f });
        }
        for e in &normalised {
            let pm = mask(&e.prefix);
            for k in 0..e.prefix.len() {
                if keys.contains_key(&(pm & low(e.prefix[k] - 1))) {
                    return domain(format!("prefix {:?} extends another prefix", e.prefix));
                }
            }
        }
        let map = PrefixContinuousMap { depth, n, cover_min_size, entries: normalised, keys };
        if let Some(min) = cover_min_size {
            if depth > MAX_TOTALITY_DEPTH {
                return size(format!("totality check limited to depth {MAX_TOTALITY_DEPTH}"));
            }
            for s in 0u64..1 << depth {
                if s.count_ones() as usize >= min && map.lookup_mask(s).is_none() {
                    return domain(format!("no entry covers {:?}", unmask(s)));
                }
            }
        }
        Ok(map)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MapSpec = serde_json::from_str(text).map_err(|e| unclab_core::error::Error::Domain(format!("map JSON: {e}")))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> MapSpec {
        MapSpec { depth: self.depth, entries: self.entries.clone(), cover_min_size: self.cover_min_size }
    }

    pub fn entries(&self) -> &[MapEntry] {
        &self.entries
    }

    /// Entry for the set with bit `i-1` set for each element `i`.
    pub fn lookup_mask(&self, m: u64) -> Option<&MapEntry> {
        let d = m & low(self.depth);
        let mut pre = 0u64;
        if let Some(&i) = self.keys.get(&pre) {
            return Some(&self.entries[i]);
        }
        let mut rest = d;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            pre |= bit;
            rest ^= bit;
            if let Some(&i) = self.keys.get(&pre) {
                return Some(&self.entries[i]);
            }
        }
        None
    }

    pub fn lookup(&self, m: &[u64]) -> Option<&[Set]> {
        if m.iter().any(|&x| x == 0 || x > 64) {
            return None;
        }
        self.lookup_mask(mask(m)).map(|e| e.f.as_slice())
    }
}

/// Subsets of `[1..depth]` of size `k`, in lex order of their sorted elements.
fn combinations(depth: u64, k: usize) -> Vec<Set> {
    let mut out = vec![];
    let mut cur = vec![];
    fn go(start: u64, depth: u64, k: usize, cur: &mut Set, out: &mut Vec<Set>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=depth {
            cur.push(x);
            go(x + 1, depth, k, cur, out);
            cur.pop();
        }
    }
    go(1, depth, k, &mut cur, &mut out);
    out
}

/// `F_j^M` = the `j`-th consecutive block of `M`'s elements, of size `sizes[j]`.
pub fn first_blocks(depth: u64, sizes: &[usize]) -> Result<PrefixContinuousMap> {
    if sizes.is_empty() || sizes.contains(&0) {
        return domain("block sizes must be positive");
    }
    let total: usize = sizes.iter().sum();
    if total as u64 > depth.min(MAX_TOTALITY_DEPTH) {
        return size(format!("blocks of total size {total} need depth at least that, at most {MAX_TOTALITY_DEPTH}"));
    }
    let entries = combinations(depth, total)
        .into_iter()
        .map(|prefix| {
            let mut f = vec![];
            let mut at = 0;
            for &s in sizes {
                f.push(prefix[at..at + s].to_vec());
                at += s;
            }
            MapEntry { prefix, f }
        })
        .collect();
    PrefixContinuousMap::new(MapSpec { depth, entries, cover_min_size: Some(total) })
}

/// `F^M = {1}` on sets containing `1`; undefined elsewhere.
pub fn constant_one() -> PrefixContinuousMap {
    PrefixContinuousMap::new(MapSpec { depth: 1, entries: vec![MapEntry { prefix: vec![1], f: vec![vec![1]] }], cover_min_size: None })
        .expect("constant map is well formed")
}

/// Two colours: `F_1^M = {m_1}` and `F_2^M` the next `m_1` elements of `M`.
/// The second block grows with the first element.
pub fn adversarial_two_colour(depth: u64) -> Result<PrefixContinuousMap> {
    if depth > MAX_TOTALITY_DEPTH {
        return size(format!("depth {depth} exceeds {MAX_TOTALITY_DEPTH}"));
    }
    let mut entries = vec![];
    for m1 in 1..depth {
        for rest in combinations(depth - m1, m1 as usize) {
            let rest: Set = rest.iter().map(|x| x + m1).collect();
            let mut prefix = vec![m1];
            prefix.extend(&rest);
            entries.push(MapEntry { prefix, f: vec![vec![m1], rest] });
        }
    }
    PrefixContinuousMap::new(MapSpec { depth, entries, cover_min_size: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        let m = first_blocks(12, &[2]).unwrap();
        assert_eq!(m.entries().len(), 66);
        assert_eq!(m.lookup(&[3, 5, 9]).unwrap(), &[vec![3, 5]]);
        assert!(m.lookup(&[4]).is_none());
        let m = adversarial_two_colour(12).unwrap();
        assert_eq!(m.lookup(&[2, 3, 7, 8, 9]).unwrap(), &[vec![2], vec![3, 7]]);
        assert!(m.lookup(&[3, 4, 5]).is_none());
        assert_eq!(constant_one().lookup(&[1, 9]).unwrap(), &[vec![1]]);
        assert!(constant_one().lookup(&[2, 9]).is_none());
    }

    #[test]
    fn rejects_malformed_tables() {
        let bad = |depth, entries: Vec<(Set, Vec<Set>)>, cover| {
            let entries = entries.into_iter().map(|(prefix, f)| MapEntry { prefix, f }).collect();
            PrefixContinuousMap::new(MapSpec { depth, entries, cover_min_size: cover }).is_err()
        };
        assert!(bad(4, vec![(vec![1, 2], vec![vec![3]])], None));
        assert!(bad(4, vec![(vec![1, 2], vec![vec![2], vec![1]])], None));
        assert!(bad(4, vec![(vec![1, 2], vec![vec![]])], None));
        assert!(bad(4, vec![(vec![1], vec![vec![1]]), (vec![1, 2], vec![vec![1]])], None));
        assert!(bad(4, vec![(vec![1, 5], vec![vec![1]])], None));
        assert!(bad(3, vec![(vec![1], vec![vec![1]])], Some(1)));
        assert!(!bad(1, vec![(vec![1], vec![vec![1]])], Some(1)));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"depth": 3, "entries": [{"prefix": [1], "F": [[1]]}, {"prefix": [2], "F": [[2]]}, {"prefix": [3], "F": [[3]]}], "cover_min_size": 1}"#;
        let m = PrefixContinuousMap::from_json(text).unwrap();
        assert_eq!(m.n, 1);
        let again = PrefixContinuousMap::from_json(&serde_json::to_string(&m.spec()).unwrap()).unwrap();
        assert_eq!(again.spec(), m.spec());
    }
}
