//! Block layout of `E_M` and the test vectors built on it.
//!
//! Positions are the natural numbers themselves: `M = {m1, m2, m2+1, …}`
//! and `E_M` fills `m2+1 ..= m2+n_M`, so with `m1 = 1, m2 = 2` the universe
//! is `{1..n_M+2}`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, size, Error, Result};
use unclab_core::rational::{qmin, Q};
use unclab_core::Caps;

use crate::params::EltonParams;
use crate::runvec::{Run, RunVector};

fn qu(x: u64) -> Q {
    Q::from_integer(x.into())
}

fn pow2z(e: u64) -> BigInt {
    BigInt::one() << e
}

/// The functional family depends only on `(n1, n2, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub n1: u64,
    pub n2: u64,
    #[serde(rename = "K")]
    pub k: u32,
}

impl Family {
    /// `|I^L_j|`, `|J^L_j|` for `L` starting `l1 < l2`.
    pub fn block_sizes(&self, l1: u64, l2: u64) -> (BigInt, BigInt) {
        let s = pow2z(self.k as u64 * (l2 - l1));
        (&s * self.n1, s * self.n2)
    }

    /// Number of `I` blocks (equal to the number of `J` blocks).
    pub fn pairs(&self, l1: u64) -> BigInt {
        pow2z(self.k as u64 * l1 - 1)
    }

    /// `n_L = (n1+n2)·2^{K l2 - 1}`.
    pub fn pattern_len(&self, l2: u64) -> BigInt {
        pow2z(self.k as u64 * l2 - 1) * (self.n1 + self.n2)
    }

    /// `1/|E^L_1|`, `1/|E^L_2|`.
    pub fn weights(&self, l2: u64) -> (Q, Q) {
        let s = pow2z(self.k as u64 * l2 - 1);
        (Q::new(BigInt::one(), &s * self.n1), Q::new(BigInt::one(), s * self.n2))
    }

    /// Upper bound on `1/|E^L_1|` with the exponent clamped, cheap for huge `l2`.
    pub fn w1_upper(&self, l2: u64) -> Q {
        let e = (self.k as u64).saturating_mul(l2).saturating_sub(1).min(4096);
        Q::new(BigInt::one(), pow2z(e) * self.n1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    I,
    J,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EltonLayout {
    pub family: Family,
    pub m1: u64,
    pub m2: u64,
    pub n_m: u64,
    pub universe: u64,
    pub block_i: u64,
    pub block_j: u64,
    /// blocks of each kind
    pub pairs: u64,
}

/// Structural requirements only; the miniature layouts used for
/// cross-checking deliberately violate the smallness inequalities.
pub fn build_layout(p: &EltonParams, m1: u64, m2: u64, caps: &Caps) -> Result<EltonLayout> {
    if p.n1 == 0 || p.k == 0 || p.n1 >= p.n2 {
        return domain("layout needs 0 < n1 < n2 and K > 0");
    }
    if m1 == 0 || m1 >= m2 {
        return Err(Error::Precondition(format!("need 1 <= m1 < m2, got {m1}, {m2}")));
    }
    let family = Family { n1: p.n1, n2: p.n2, k: p.k };
    let kk = p.k as u64;
    let too_big = || size::<EltonLayout>(format!("layout for m1={m1}, m2={m2} exceeds the coordinate cap {}", caps.elton_coords));
    let Some(e_pairs) = (kk.checked_mul(m1)).filter(|e| *e < 63) else { return too_big() };
    let pairs = 1u64 << (e_pairs - 1);
    if 2 * pairs + 2 > caps.elton_coords {
        return too_big();
    }
    let n_m = family.pattern_len(m2);
    let (bi, bj) = family.block_sizes(m1, m2);
    let limit = BigInt::from(1u64 << 62);
    if n_m > limit {
        return too_big();
    }
    let n_m = n_m.to_u64().unwrap();
    Ok(EltonLayout {
        family,
        m1,
        m2,
        n_m,
        universe: m2 + n_m,
        block_i: bi.to_u64().unwrap(),
        block_j: bj.to_u64().unwrap(),
        pairs,
    })
}

impl EltonLayout {
    /// `(kind, start, len)` in order, starting right after `m2`.
    pub fn blocks(&self) -> Vec<(BlockKind, u64, u64)> {
        let mut out = Vec::with_capacity(2 * self.pairs as usize);
        let mut pos = self.m2 + 1;
        for _ in 0..self.pairs {
            out.push((BlockKind::I, pos, self.block_i));
            pos += self.block_i;
            out.push((BlockKind::J, pos, self.block_j));
            pos += self.block_j;
        }
        out
    }

    pub fn e1_size(&self) -> u64 {
        self.pairs * self.block_i
    }

    pub fn e2_size(&self) -> u64 {
        self.pairs * self.block_j
    }

    /// Re-derives the size identities from the block list.
    pub fn check_identities(&self) -> Result<()> {
        let f = &self.family;
        let blocks = self.blocks();
        let sum = |k: BlockKind| -> u64 { blocks.iter().filter(|b| b.0 == k).map(|b| b.2).sum() };
        let base = pow2z(f.k as u64 * self.m2 - 1);
        let mut ok = BigInt::from(sum(BlockKind::I)) == &base * f.n1
            && BigInt::from(sum(BlockKind::J)) == &base * f.n2
            && BigInt::from(self.n_m) == f.pattern_len(self.m2);
        let mut pos = self.m2 + 1;
        for (i, (kind, start, len)) in blocks.iter().enumerate() {
            let expect = if i % 2 == 0 { BlockKind::I } else { BlockKind::J };
            ok &= *kind == expect && *start == pos && *len > 0;
            pos += len;
        }
        ok &= pos == self.universe + 1;
        if ok {
            Ok(())
        } else {
            domain("layout identities fail")
        }
    }

    fn vector(&self, at_m1: Q, at_m2: Q, on_e1: Q, on_e2: Q) -> RunVector {
        let mut runs = vec![
            Run { start: self.m1, len: 1, value: at_m1 },
            Run { start: self.m2, len: 1, value: at_m2 },
        ];
        for (kind, start, len) in self.blocks() {
            let value = match kind {
                BlockKind::I => on_e1.clone(),
                BlockKind::J => on_e2.clone(),
            };
            runs.push(Run { start, len, value });
        }
        RunVector::new(self.universe, runs).expect("layout runs are well formed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Quasi {
        #[serde(with = "unclab_core::rational::qser")]
        alpha: Q,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EltonVectors {
    pub x: RunVector,
    pub x_plus: RunVector,
    pub x_star: RunVector,
    #[serde(with = "unclab_core::rational::qser")]
    pub x_star_on_x: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub x_star_on_plus: Q,
}

/// `x_plus` is `x` with the `m1` coordinate removed.
pub fn build_vectors(layout: &EltonLayout, variant: &Variant) -> Result<EltonVectors> {
    let half = Q::new(1.into(), 2.into());
    let (a1, a2, e1, e2) = match variant {
        Variant::Standard => (-half.clone(), half.clone(), half.clone(), Q::new(1.into(), 4.into())),
        Variant::Quasi { alpha } => {
            if *alpha <= Q::zero() || *alpha > Q::one() {
                return domain("alpha must lie in (0, 1]");
            }
            (-alpha.clone(), Q::one(), Q::one(), Q::new(2.into(), 3.into()))
        }
    };
    let x = layout.vector(a1, a2.clone(), e1.clone(), e2.clone());
    let x_plus = layout.vector(Q::zero(), a2, e1, e2);
    let x_star = layout.vector(
        half,
        Q::one(),
        Q::one() / qu(layout.e1_size()),
        Q::one() / qu(layout.e2_size()),
    );
    Ok(EltonVectors { x_star_on_x: x_star.dot(&x), x_star_on_plus: x_star.dot(&x_plus), x, x_plus, x_star })
}

/// Whether `x_plus` is the projection of `x` onto `{i : |x_i| ≥ level}`.
pub fn is_threshold_projection(x: &RunVector, x_plus: &RunVector, level: &Q) -> bool {
    let kept = x.runs.iter().filter(|r| qmin(r.value.clone(), -r.value.clone()) <= -level.clone()).cloned().collect();
    RunVector::new(x.universe, kept).is_ok_and(|v| v == *x_plus)
}

/// Every layout with `universe ≤ max_universe`, ordered by `(K, m1, m2, n1, n2)`.
pub fn miniature_layouts(max_universe: u64) -> Vec<EltonLayout> {
    let caps = Caps::default();
    let mut out = vec![];
    for k in 1u32..=4 {
        for m2 in 2..max_universe {
            for m1 in 1..m2 {
                for n2 in 2..max_universe {
                    for n1 in 1..n2 {
                        let p = EltonParams::new(n1, n2, k, Q::one());
                        if let Ok(l) = build_layout(&p, m1, m2, &caps) {
                            if l.universe <= max_universe {
                                out.push(l);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::{q, qi};

    fn layout(n1: u64, n2: u64, k: u32) -> EltonLayout {
        build_layout(&EltonParams::new(n1, n2, k, q(1, 2)), 1, 2, &Caps::default()).unwrap()
    }

    #[test]
    fn small_layout_sizes() {
        let l = layout(1, 8, 4);
        assert_eq!((l.n_m, l.block_i, l.block_j, l.pairs), (1152, 16, 128, 8));
        assert_eq!((l.e1_size(), l.e2_size()), (128, 1024));
        assert_eq!(l.universe, 1154);
        l.check_identities().unwrap();
        let l = layout(1, 64, 8);
        assert_eq!((l.pairs, l.block_i, l.block_j), (128, 256, 16384));
        assert_eq!(l.n_m, 65 << 15);
        l.check_identities().unwrap();
        let caps = Caps { elton_coords: 100, ..Caps::default() };
        assert!(matches!(
            build_layout(&EltonParams::new(1, 64, 8, q(1, 2)), 1, 2, &caps),
            Err(Error::Size(_))
        ));
        assert!(build_layout(&EltonParams::new(1, 8, 4, q(1, 2)), 2, 2, &Caps::default()).is_err());
    }

    #[test]
    fn vector_pairings() {
        for l in [layout(1, 8, 4), layout(1, 64, 8), layout(2, 3, 1)] {
            let v = build_vectors(&l, &Variant::Standard).unwrap();
            assert_eq!(v.x_star_on_plus, q(5, 4));
            assert_eq!(v.x_star_on_x, qi(1));
            let y = build_vectors(&l, &Variant::Quasi { alpha: q(2, 3) }).unwrap();
            assert_eq!(y.x_star_on_plus, q(8, 3));
            assert_eq!(y.x_star_on_x, q(7, 3));
            assert!(!is_threshold_projection(&y.x, &y.x_plus, &q(2, 3)));
            let y = build_vectors(&l, &Variant::Quasi { alpha: q(2, 3) - q(1, 1000) }).unwrap();
            assert!(is_threshold_projection(&y.x, &y.x_plus, &q(2, 3)));
        }
        assert!(build_vectors(&layout(1, 2, 1), &Variant::Quasi { alpha: qi(0) }).is_err());
    }
}
