//! Finite probe of a coded norm built from special sequences of
//! resolution representations.
//!
//! The special sequence `(x_j, x*_j)_{j≤k}` represents `r_{l_j}` on
//! consecutive blocks. Codes come from a seeded enumeration of the family:
//! the prefix of length `j-1` of our sequence gets code `π[j-1]`. A special
//! functional agreeing with ours on its first `i` pieces continues with a
//! representation of `r_{l_{i+1}}` anywhere to the right; later pieces carry
//! foreign codes. The norm evaluated here is a relaxation of the coded norm:
//! foreign codes may be any member outside our codes (distinct within one
//! functional), and room for pieces cut at the start is not checked.

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use unclab_core::error::{size, Error, Result};
use unclab_core::rational::{pow2, qmax, Q};
use unclab_core::resolution::{mutual_bracket, Resolution};
use unclab_core::Caps;

/// Most family members outside the chosen codes the relaxed norm tracks.
pub const MAX_FOREIGN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrReport {
    pub k: usize,
    pub seed: u64,
    /// 0-based family indices `l_1..l_k`
    pub codes: Vec<usize>,
    pub universe: usize,
    #[serde(with = "unclab_core::rational::qser")]
    pub alternating_norm: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub odd_norm: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub even_norm: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub split_sum: Q,
    /// `split_sum / alternating_norm`
    #[serde(with = "unclab_core::rational::qser")]
    pub ratio: Q,
    /// `Σ_j x*_j(Σ_j x_j)`
    #[serde(with = "unclab_core::rational::qser")]
    pub special_value: Q,
    /// largest `⟨r, r⟩` over the family
    #[serde(with = "unclab_core::rational::qser")]
    pub c_self: Q,
    /// largest `⟨r, s⟩` over distinct members; 0 for a single member
    #[serde(with = "unclab_core::rational::qser")]
    pub eta: Q,
    /// `1 + C + 2kη`
    #[serde(with = "unclab_core::rational::qser")]
    pub bound: Q,
    pub within_bound: bool,
    pub exploratory: bool,
}

/// `x` entries `2^{-c}` and `x*` entries `2^{c} α`.
fn representation(r: &Resolution) -> (Vec<Q>, Vec<Q>) {
    let c = &r.pattern.colours;
    let x = c.iter().map(|&c| pow2(-(c as i64))).collect();
    let xs = c.iter().zip(&r.alpha).map(|(&c, a)| pow2(c as i64) * a).collect();
    (x, xs)
}

struct Coded<'a> {
    stars: Vec<Vec<Q>>,
    codes: &'a [usize],
    foreign: Vec<usize>,
    /// `x*` of our sequence, position by position
    fixed: Vec<Q>,
    /// end (exclusive) of block `j`, `ends[0] = 0`
    ends: Vec<usize>,
}

type State = (u32, usize, usize);

impl Coded<'_> {
    fn norm(&self, v: &[Q]) -> Q {
        let mut best = v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero);
        for sign in [1, -1] {
            let sv: Vec<Q> = v.iter().map(|x| if sign > 0 { x.clone() } else { -x }).collect();
            for i in 0..=self.codes.len() {
                best = qmax(best, self.agreeing(&sv, i));
            }
        }
        best
    }

    fn put(map: &mut HashMap<State, Q>, s: State, val: Q) {
        match map.get_mut(&s) {
            Some(old) if *old >= val => {}
            Some(old) => *old = val,
            None => {
                map.insert(s, val);
            }
        }
    }

    /// Functionals equal to ours on the first `i` pieces.
    fn agreeing(&self, sv: &[Q], i: usize) -> Q {
        let end = self.ends[i];
        let terms: Vec<Q> = (0..end).map(|p| &self.fixed[p] * &sv[p]).collect();
        // E inside the agreeing part
        let (mut best, mut run) = (Q::zero(), Q::zero());
        for t in &terms {
            run = qmax(run + t, Q::zero());
            best = qmax(best, run.clone());
        }
        let mut suffix = Q::zero();
        let mut best_suffix = Q::zero();
        for t in terms.iter().rev() {
            suffix += t;
            best_suffix = qmax(best_suffix, suffix.clone());
        }
        let first = self.codes.get(i).copied();
        let bit = |m: usize| -> u32 { 1 << self.foreign.iter().position(|&f| f == m).unwrap() };
        let mut cur: HashMap<State, Q> = HashMap::new();
        match first {
            Some(m) => Self::put(&mut cur, (0, m, 0), best_suffix.clone()),
            None => {
                for &m in &self.foreign {
                    Self::put(&mut cur, (bit(m), m, 0), best_suffix.clone());
                }
            }
        }
        best = qmax(best, best_suffix);
        for p in end..sv.len() {
            // E may start here, cutting the piece it meets
            for m in first.into_iter().chain(self.foreign.iter().copied()) {
                let mask = if Some(m) == first { 0 } else { bit(m) };
                for idx in 0..self.stars[m].len() {
                    Self::put(&mut cur, (mask, m, idx), Q::zero());
                }
            }
            // finished pieces hand over to an unused foreign member
            let done: Vec<(State, Q)> =
                cur.iter().filter(|((_, m, idx), _)| *idx == self.stars[*m].len()).map(|(s, v)| (*s, v.clone())).collect();
            for ((mask, _, _), val) in done {
                for &m in &self.foreign {
                    if mask & bit(m) == 0 {
                        Self::put(&mut cur, (mask | bit(m), m, 0), val.clone());
                    }
                }
            }
            let mut next = cur.clone();
            for (&(mask, m, idx), val) in &cur {
                if idx < self.stars[m].len() {
                    Self::put(&mut next, (mask, m, idx + 1), val + &self.stars[m][idx] * &sv[p]);
                }
            }
            cur = next;
            for val in cur.values() {
                if *val > best {
                    best = val.clone();
                }
            }
        }
        best
    }
}

pub fn mr_demo(family: &[Resolution], k: usize, seed: u64, caps: &Caps) -> Result<MrReport> {
    for (a, r) in family.iter().enumerate() {
        if family[..a].contains(r) {
            return Err(Error::Precondition(format!("family members {a} and an earlier one coincide")));
        }
    }
    if k == 0 || k > family.len() {
        return size(format!("k = {k} needs 1 <= k <= family size {}", family.len()));
    }
    if family.len() - k > MAX_FOREIGN {
        return size(format!("at most {MAX_FOREIGN} members beyond the k codes are supported"));
    }
    let mut perm: Vec<usize> = (0..family.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let codes: Vec<usize> = perm[..k].to_vec();
    let foreign: Vec<usize> = perm[k..].to_vec();
    let universe: usize = codes.iter().map(|&c| family[c].len()).sum();
    if universe > caps.pattern_len {
        return size(format!("special sequence spans {universe} coordinates, cap {}", caps.pattern_len));
    }

    let reps: Vec<(Vec<Q>, Vec<Q>)> = family.iter().map(representation).collect();
    let mut fixed = vec![];
    let mut ends = vec![0];
    let mut xs: Vec<Vec<Q>> = vec![];
    for &c in &codes {
        fixed.extend(reps[c].1.iter().cloned());
        ends.push(fixed.len());
        xs.push(reps[c].0.clone());
    }
    let coded = Coded { stars: reps.iter().map(|r| r.1.clone()).collect(), codes: &codes, foreign, fixed, ends };
    let combine = |sel: &dyn Fn(usize) -> Option<bool>| -> Vec<Q> {
        let mut v = vec![];
        for (j, x) in xs.iter().enumerate() {
            match sel(j + 1) {
                Some(pos) => v.extend(x.iter().map(|a| if pos { a.clone() } else { -a })),
                None => v.extend(x.iter().map(|_| Q::zero())),
            }
        }
        v
    };
    let alternating = coded.norm(&combine(&|j| Some(j % 2 == 0)));
    let odd = coded.norm(&combine(&|j| (j % 2 == 1).then_some(true)));
    let even = coded.norm(&combine(&|j| (j % 2 == 0).then_some(true)));
    let all = combine(&|_| Some(true));
    let special_value: Q = coded.fixed.iter().zip(&all).map(|(a, b)| a * b).sum();

    let mut c_self = Q::zero();
    let mut eta = Q::zero();
    for (a, r) in family.iter().enumerate() {
        c_self = qmax(c_self, mutual_bracket(r, r)?);
        for s in &family[a + 1..] {
            eta = qmax(eta, mutual_bracket(r, s)?);
        }
    }
    let bound = Q::from_integer(1.into()) + &c_self + Q::from_integer((2 * k).into()) * &eta;
    let split = &odd + &even;
    Ok(MrReport {
        k,
        seed,
        codes,
        universe,
        ratio: &split / &alternating,
        within_bound: alternating <= bound,
        alternating_norm: alternating,
        odd_norm: odd,
        even_norm: even,
        split_sum: split,
        special_value,
        c_self,
        eta,
        bound,
        exploratory: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use unclab_core::rational::{q, qi};
    use unclab_core::resolution::{rademacher_family, Pattern};

    fn res(k: u32, c: Vec<u32>, a: Vec<Q>) -> Resolution {
        Resolution::new(Pattern::new(k, c).unwrap(), a).unwrap()
    }

    #[test]
    fn single_term() {
        let fam = vec![res(2, vec![1, 2], vec![q(1, 2), q(1, 2)]), res(2, vec![2, 1], vec![q(1, 2), q(1, 2)])];
        let r = mr_demo(&fam, 1, 5, &Caps::default()).unwrap();
        assert_eq!(r.alternating_norm, r.odd_norm);
        assert_eq!(r.split_sum, r.odd_norm);
        assert_eq!(r.even_norm, qi(0));
        assert_eq!(r.special_value, qi(1));
    }

    #[test]
    fn two_rademacher_levels() {
        let fam = rademacher_family(2, &[BigInt::from(1), BigInt::from(17)], 1, 2, &Caps::default()).unwrap();
        let r = mr_demo(&fam, 2, 1, &Caps::default()).unwrap();
        assert!(r.split_sum >= qi(2));
        assert_eq!(r.special_value, qi(2));
        assert!(r.within_bound, "{r:?}");
        assert_eq!(r.bound, qi(1) + &r.c_self + qi(4) * &r.eta);
    }

    #[test]
    fn preconditions() {
        let a = res(1, vec![1], vec![qi(1)]);
        assert!(matches!(mr_demo(&[a.clone(), a.clone()], 1, 0, &Caps::default()), Err(Error::Precondition(_))));
        assert!(matches!(mr_demo(&[a], 2, 0, &Caps::default()), Err(Error::Size(_))));
    }
}
