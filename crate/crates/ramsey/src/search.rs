//! Brute-force search for matching witnesses on a finite universe.
//!
//! An infinite set is modelled by a subset of `[1..universe]` with at least
//! `horizon` elements. Finding nothing proves nothing: the outcome is then
//! flagged inconclusive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, size, Result};
use unclab_core::Caps;

use crate::maps::{low, unmask, PrefixContinuousMap};
use crate::matching::{validate_matching, MatchingWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Randomized { seed: u64, samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub witness: Option<MatchingWitness>,
    pub mode: SearchMode,
    pub universe: u64,
    pub horizon: usize,
    pub depth: u64,
    /// sets of size `≥ horizon` in the map's domain
    pub candidate_sets: u64,
    /// sets of size `≥ horizon` outside the map's domain, skipped
    pub uncovered_sets: u64,
    /// pairs tried, in search order, up to and including the witness
    pub pairs_examined: u64,
    pub inconclusive: bool,
    pub continuity_model: String,
}

/// A covered set with its colour blocks as masks.
struct Cand {
    set: u64,
    f: Vec<u64>,
}

/// `a ≺ b`: the elements of `b` up to `max a` are exactly `a`.
fn prefix_of(a: u64, b: u64) -> bool {
    b & low(64 - a.leading_zeros() as u64) == a
}

fn comparable(a: u64, b: u64) -> bool {
    prefix_of(a, b) || prefix_of(b, a)
}

fn is_witness(l: &Cand, m: &Cand) -> bool {
    let mut union = 0;
    for j in 0..l.f.len() {
        if !comparable(l.f[j], m.f[j]) {
            return false;
        }
        union |= l.f[j] & m.f[j];
    }
    l.set & m.set == union
}

fn candidates(map: &PrefixContinuousMap, universe: u64, horizon: usize) -> (Vec<Cand>, u64) {
    let mut sets: Vec<u64> = (0u64..1 << universe).filter(|s| s.count_ones() as usize >= horizon).collect();
    // size first, then lex order of the sorted elements
    sets.sort_by_cached_key(|&s| (s.count_ones(), unmask(s)));
    let mut out = vec![];
    let mut uncovered = 0;
    for s in sets {
        match map.lookup_mask(s) {
            Some(e) => {
                let f: Vec<u64> = e.f.iter().map(|x| crate::maps::mask(x)).collect();
                out.push(Cand { set: s, f });
            }
            None => uncovered += 1,
        }
    }
    (out, uncovered)
}

fn witness(l: &Cand, m: &Cand) -> MatchingWitness {
    MatchingWitness {
        l: unmask(l.set),
        m: unmask(m.set),
        f_l: l.f.iter().map(|&x| unmask(x)).collect(),
        f_m: m.f.iter().map(|&x| unmask(x)).collect(),
    }
}

pub fn search_matching(map: &PrefixContinuousMap, universe: u64, horizon: usize, mode: SearchMode, caps: &Caps) -> Result<SearchOutcome> {
    let cap = (caps.search_universe as u64).min(32);
    if universe > cap {
        return size(format!("universe {universe} exceeds the search cap {cap}"));
    }
    if horizon == 0 {
        return domain("horizon must be positive");
    }
    let (cands, uncovered) = candidates(map, universe, horizon);
    let n = cands.len() as u64;
    let (found, examined) = match mode {
        SearchMode::Exhaustive => {
            let hit = cands
                .par_iter()
                .enumerate()
                .find_map_first(|(i, l)| cands.iter().position(|m| is_witness(l, m)).map(|j| (i, j)));
            match hit {
                Some((i, j)) => (Some(witness(&cands[i], &cands[j])), i as u64 * n + j as u64 + 1),
                None => (None, n * n),
            }
        }
        SearchMode::Randomized { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = (None, 0);
            if n > 0 {
                for t in 0..samples {
                    let (l, m) = (&cands[rng.gen_range(0..cands.len())], &cands[rng.gen_range(0..cands.len())]);
                    if is_witness(l, m) {
                        out = (Some(witness(l, m)), t + 1);
                        break;
                    }
                    out.1 = t + 1;
                }
            }
            out
        }
    };
    if let Some(w) = &found {
        let check = validate_matching(w);
        assert!(check.valid, "search produced an invalid witness: {:?}", check.diagnostics);
    }
    Ok(SearchOutcome {
        inconclusive: found.is_none(),
        witness: found,
        mode,
        universe,
        horizon,
        depth: map.depth,
        candidate_sets: n,
        uncovered_sets: uncovered,
        pairs_examined: examined,
        continuity_model: format!("fixed depth {}: F^M depends only on M ∩ [1..{}]", map.depth, map.depth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{constant_one, first_blocks};

    #[test]
    fn comparability_masks() {
        let m = crate::maps::mask;
        assert!(comparable(m(&[3, 5]), m(&[3, 5, 8])));
        assert!(comparable(0, m(&[2])));
        assert!(!comparable(m(&[3, 6]), m(&[3, 5, 8])));
        assert!(!comparable(m(&[2]), m(&[1, 2])));
    }

    #[test]
    fn small_searches() {
        let caps = Caps::default();
        let o = search_matching(&first_blocks(6, &[2]).unwrap(), 6, 3, SearchMode::Exhaustive, &caps).unwrap();
        let w = o.witness.unwrap();
        assert_eq!((w.l, w.m), (vec![1, 2, 3], vec![1, 2, 4]));
        let o = search_matching(&constant_one(), 5, 5, SearchMode::Exhaustive, &caps).unwrap();
        assert!(o.inconclusive && o.witness.is_none());
        assert_eq!(o.pairs_examined, 1);
        assert!(search_matching(&constant_one(), 17, 2, SearchMode::Exhaustive, &caps).is_err());
    }
}
