//! Families of `{0,…,k}`-valued sequences, their restrictions and heredity.
//!
//! Members are packed two bits per coordinate, so `k ≤ 3` and the universe is
//! at most 32 coordinates.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use unclab_core::error::{domain, size, Result};
use unclab_core::Caps;

use crate::matching::Set;

pub const MAX_K: u8 = 3;
pub const MAX_UNIVERSE: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct FamilyRepr {
    k: u8,
    universe: u64,
    members: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct ColourFamily {
    k: u8,
    universe: u64,
    /// sorted, distinct
    members: Vec<u64>,
}

impl TryFrom<FamilyRepr> for ColourFamily {
    type Error = String;
    fn try_from(r: FamilyRepr) -> std::result::Result<Self, String> {
        ColourFamily::new(r.k, r.universe, &r.members).map_err(|e| e.to_string())
    }
}

impl From<ColourFamily> for FamilyRepr {
    fn from(f: ColourFamily) -> Self {
        FamilyRepr { k: f.k, universe: f.universe, members: f.members.iter().map(|&a| f.unpack(a)).collect() }
    }
}

fn get(a: u64, i: u64) -> u8 {
    (a >> (2 * (i - 1)) & 3) as u8
}

fn clear(a: u64, i: u64) -> u64 {
    a & !(3 << (2 * (i - 1)))
}

fn coords(m: &[u64]) -> u64 {
    m.iter().fold(0, |acc, &i| acc | 3 << (2 * (i - 1)))
}

impl ColourFamily {
    /// Sequences shorter than the universe are padded with zeros.
    pub fn new(k: u8, universe: u64, members: &[Vec<u8>]) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return domain(format!("k must lie in 1..={MAX_K}"));
        }
        if universe > MAX_UNIVERSE {
            return size(format!("universe {universe} exceeds {MAX_UNIVERSE}"));
        }
        let mut packed = Vec::with_capacity(members.len());
        for (n, a) in members.iter().enumerate() {
            let mut p = 0u64;
            for (i, &v) in a.iter().enumerate() {
                if v > k {
                    return domain(format!("member {n} has entry {v} > k = {k}"));
                }
                if v != 0 {
                    if i as u64 >= universe {
                        return domain(format!("member {n} has support beyond the universe {universe}"));
                    }
                    p |= (v as u64) << (2 * i);
                }
            }
            packed.push(p);
        }
        Ok(Self::from_packed(k, universe, packed))
    }

    fn from_packed(k: u8, universe: u64, mut members: Vec<u64>) -> Self {
        members.sort_unstable();
        members.dedup();
        ColourFamily { k, universe, members }
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn unpack(&self, a: u64) -> Vec<u8> {
        (1..=self.universe).map(|i| get(a, i)).collect()
    }

    pub fn members(&self) -> Vec<Vec<u8>> {
        self.members.iter().map(|&a| self.unpack(a)).collect()
    }

    pub fn contains(&self, a: &[u8]) -> bool {
        match Self::new(self.k, self.universe, &[a.to_vec()]) {
            Ok(f) => self.members.binary_search(&f.members[0]).is_ok(),
            Err(_) => false,
        }
    }

    /// `F_M`: every member with the coordinates outside `M` set to zero.
    pub fn restrict(&self, m: &[u64]) -> ColourFamily {
        let keep = coords(&restrict_coords(m, self.universe));
        Self::from_packed(self.k, self.universe, self.members.iter().map(|a| a & keep).collect())
    }
}

fn restrict_coords(m: &[u64], universe: u64) -> Set {
    crate::matching::normalise(m).into_iter().filter(|&i| i >= 1 && i <= universe).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeredityMode {
    Hereditary,
    Weakly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// missing from the family
    pub a: Vec<u8>,
    /// present, with `a ⊂ b` (or `a ⊂_j b`)
    pub b: Vec<u8>,
    /// colour of the relation; absent for plain heredity
    pub j: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeredityCheck {
    pub mode: HeredityMode,
    pub restricted_to: Set,
    pub restricted_size: usize,
    pub holds: bool,
    pub counterexample: Option<Violation>,
}

/// Only single-coordinate removals need checking: every `a ⊂ b` is reached
/// from `b` by removals through members of the same kind.
pub fn weakly_hereditary(f: &ColourFamily, m: &[u64], mode: HeredityMode) -> HeredityCheck {
    let m = restrict_coords(m, f.universe);
    let fm = f.restrict(&m);
    let set: HashSet<u64> = fm.members.iter().copied().collect();
    let missing = |a: u64| !set.contains(&a);
    let viol = |a: u64, b: u64, j: Option<u8>| Violation { a: fm.unpack(a), b: fm.unpack(b), j };
    let mut counterexample = None;
    'outer: for &b in &fm.members {
        let support: Vec<u64> = m.iter().copied().filter(|&i| get(b, i) != 0).collect();
        match mode {
            HeredityMode::Hereditary => {
                for &i in &support {
                    let a = clear(b, i);
                    if missing(a) {
                        counterexample = Some(viol(a, b, None));
                        break 'outer;
                    }
                }
            }
            HeredityMode::Weakly => {
                let colours: Vec<u8> = (1..=f.k).filter(|&j| support.iter().any(|&i| get(b, i) == j)).collect();
                for j in 1..=f.k {
                    let a = support.iter().filter(|&&i| get(b, i) != j).fold(b, |a, &i| clear(a, i));
                    if missing(a) {
                        counterexample = Some(viol(a, b, Some(j)));
                        break 'outer;
                    }
                }
                if colours.len() == 1 {
                    for &i in &support {
                        let a = clear(b, i);
                        if missing(a) {
                            counterexample = Some(viol(a, b, Some(colours[0])));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    HeredityCheck { mode, restricted_to: m, restricted_size: fm.len(), holds: counterexample.is_none(), counterexample }
}

/// `c_M` on `[1..universe]` for finite `M`; only the first two elements and
/// the ranks of the others matter, so this is `c_{M'}` for any infinite `M'`
/// agreeing with `M` below `universe + 1`.
fn c_m(m: &[u64]) -> u64 {
    let mut c = 0u64;
    for (idx, &x) in m.iter().enumerate() {
        let i = idx as u64 + 1;
        let v = if i == 1 {
            2
        } else if i <= m[0] + 1 {
            1
        } else if m.len() > 1 && i <= m[1] + 1 {
            2
        } else {
            0
        };
        c |= v << (2 * (x - 1));
    }
    c
}

/// `c_M` as a full sequence on `[1..universe]`.
pub fn c_sequence(m: &[u64], universe: u64) -> Vec<u8> {
    let c = c_m(&restrict_coords(m, universe));
    (1..=universe).map(|i| get(c, i)).collect()
}

/// Every truncation `c_{M,n}` restricted to `[1..universe]`, over all `M ⊆ [1..universe]`.
pub fn remark_family(universe: u64, caps: &Caps) -> Result<ColourFamily> {
    let cap = (caps.remark_universe as u64).min(MAX_UNIVERSE);
    if universe > cap {
        return size(format!("universe {universe} exceeds the cap {cap}"));
    }
    let mut out = vec![0u64];
    for mask in 1u64..1 << universe {
        let m: Set = (1..=universe).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let c = c_m(&m);
        // truncations only change at support points
        let mut t = 0u64;
        for i in 1..=universe {
            let v = get(c, i);
            if v != 0 {
                t |= (v as u64) << (2 * (i - 1));
                out.push(t);
            }
        }
    }
    Ok(ColourFamily::from_packed(2, universe, out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkCounterexample {
    pub l: Set,
    pub universe: u64,
    /// `c_L` restricted to `L`
    pub c: Vec<u8>,
    /// `c` with the first coordinate of `L` cleared
    pub c_prime: Vec<u8>,
    pub c_in_family: bool,
    pub c_prime_in_family: bool,
    /// `c ∈ F_L`, `c' ⊂ c` and `c' ∉ F_L`
    pub refutes_heredity: bool,
}

pub fn remark_counterexample(l: &[u64], universe: u64, caps: &Caps) -> Result<RemarkCounterexample> {
    let l = crate::matching::normalise(l);
    if l.len() < 2 || l.iter().any(|&x| x == 0 || x > universe) {
        return domain(format!("L needs at least two elements of 1..{universe}"));
    }
    let f = remark_family(universe, caps)?.restrict(&l);
    let c = c_sequence(&l, universe);
    let mut c_prime = c.clone();
    c_prime[l[0] as usize - 1] = 0;
    let (c_in, cp_in) = (f.contains(&c), f.contains(&c_prime));
    Ok(RemarkCounterexample {
        l,
        universe,
        refutes_heredity: c_in && !cp_in,
        c,
        c_prime,
        c_in_family: c_in,
        c_prime_in_family: cp_in,
    })
}
