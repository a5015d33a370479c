//! Exact `sup_{L, E} |x*_L(E v)|` for run-length vectors.
//!
//! A functional is fixed by `l1 < l2` and the positions of the remaining
//! elements of `L` inside the truncation `E = {1..t}`; elements beyond `t`
//! contribute nothing. Slot `s` (the `s`-th element after `l2`) carries
//! weight `1/|E^L_1|` or `1/|E^L_2|` according to the alternating blocks,
//! and 0 past `n_L`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, size, Error, Result};
use unclab_core::norm::SparseVector;
use unclab_core::rational::{qmax, Q};
use unclab_core::Caps;

use crate::layout::{EltonLayout, Family};
use crate::pl::{tail_max, Slots};
use crate::runvec::{Run, RunVector};

/// Guard on the number of slot-block boundaries a single tail DP may touch.
const MAX_SLOT_BREAKPOINTS: u64 = 2_000_000;

fn qu(x: u64) -> Q {
    Q::from_integer(x.into())
}

fn half() -> Q {
    Q::new(1.into(), 2.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxMethod {
    BruteMiniature,
    StructuredDp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub start: u64,
    pub len: u64,
}

/// `sign · x*_L(E v)` with `E = {1..truncation}`. `l1 = None` is the zero
/// functional; `l2 = None` puts `l2` past the universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredWitness {
    pub sign: i8,
    pub l1: Option<u64>,
    pub l2: Option<u64>,
    pub truncation: u64,
    pub placement: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalMax {
    #[serde(with = "unclab_core::rational::qser")]
    pub value: Q,
    pub witness: StructuredWitness,
}

impl FunctionalMax {
    fn zero() -> FunctionalMax {
        FunctionalMax {
            value: Q::zero(),
            witness: StructuredWitness { sign: 1, l1: None, l2: None, truncation: 0, placement: vec![] },
        }
    }

    fn offer(&mut self, value: Q, witness: impl FnOnce() -> StructuredWitness) {
        if value > self.value {
            self.value = value;
            self.witness = witness();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EltonNorm {
    #[serde(with = "unclab_core::rational::qser")]
    pub value: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub sup: Q,
    pub functional: FunctionalMax,
}

/// Slot-weight profile of `L` with given `l1 < l2`, clipped to `t_max` slots.
fn slots_for(f: &Family, l1: u64, l2: u64, t_max: u64) -> Slots {
    let (a, b) = f.block_sizes(l1, l2);
    let (w1, w2) = f.weights(l2);
    let p = f.pattern_len(l2);
    let t_max = if p < BigInt::from(t_max) { p.to_u64().unwrap() } else { t_max };
    Slots::new(&a, &b, w1, w2, t_max)
}

/// Smallest `d ≥ 1` with `n1·2^{K d} ≥ avail`: from there on every slot in
/// the universe is an `I` slot.
fn far_gap(f: &Family, avail: u64) -> u64 {
    let mut d = 1u64;
    while (f.n1 as u128) << (f.k as u64 * d).min(100) < avail as u128 {
        d += 1;
    }
    d
}

/// Prefix maxima over zones, with the first position attaining them.
struct Prefix {
    zones: Vec<Run>,
    /// best over positions strictly before each zone
    before: Vec<Option<(Q, u64)>>,
    /// Σ max(v, 0) over positions strictly after each zone
    pos_after: Vec<Q>,
}

impl Prefix {
    fn new(v: &RunVector) -> Prefix {
        let zones = v.zones_from(1);
        let mut before = Vec::with_capacity(zones.len());
        let mut best: Option<(Q, u64)> = None;
        for z in &zones {
            before.push(best.clone());
            if best.as_ref().is_none_or(|(b, _)| z.value > *b) {
                best = Some((z.value.clone(), z.start));
            }
        }
        let mut pos_after = vec![Q::zero(); zones.len()];
        let mut acc = Q::zero();
        for (i, z) in zones.iter().enumerate().rev() {
            pos_after[i] = acc.clone();
            if z.value.is_positive() {
                acc += &z.value * qu(z.len);
            }
        }
        Prefix { zones, before, pos_after }
    }

    fn zone_of(&self, p: u64) -> usize {
        self.zones.partition_point(|z| z.end() < p)
    }

    /// Best value over `1..=p` and its first position.
    fn best_upto(&self, p: u64) -> (Q, u64) {
        let i = self.zone_of(p);
        let z = &self.zones[i];
        match &self.before[i] {
            Some((b, at)) if *b >= z.value => (b.clone(), *at),
            _ => (z.value.clone(), z.start),
        }
    }

    /// `Σ_{i > p} max(v_i, 0)`.
    fn pos_sum_after(&self, p: u64) -> Q {
        let i = self.zone_of(p);
        let z = &self.zones[i];
        &self.pos_after[i] + qmax(z.value.clone(), Q::zero()) * qu(z.end() - p)
    }
}

fn structured_signed(f: &Family, v: &RunVector, sign: i8, best: &mut FunctionalMax) -> Result<()> {
    let u = v.universe;
    let pre = Prefix::new(v);
    let (top, top_at) = pre.best_upto(u);
    best.offer(half() * top, || StructuredWitness { sign, l1: Some(top_at), l2: None, truncation: top_at, placement: vec![] });

    for (zi, z) in pre.zones.iter().enumerate() {
        let first = z.start.max(2);
        if first > z.end() {
            continue;
        }
        let l1_bound = match &pre.before[zi] {
            Some((b, _)) => qmax(b.clone(), z.value.clone()),
            None => z.value.clone(),
        };
        let zone_ub = half() * &l1_bound + &z.value + f.w1_upper(first) * pre.pos_sum_after(first);
        if zone_ub <= best.value {
            continue;
        }
        for l2 in first..=z.end() {
            let s_plus = pre.pos_sum_after(l2);
            let ub = half() * pre.best_upto(l2 - 1).0 + &z.value + f.w1_upper(l2) * &s_plus;
            if ub <= best.value {
                if l2 > z.start {
                    break;
                }
                continue;
            }
            let avail = u - l2;
            let d_far = far_gap(f, avail);
            for d in 1..d_far.min(l2) {
                let l1 = l2 - d;
                let v1 = v.get(l1);
                if half() * &v1 + &z.value + f.w1_upper(l2) * &s_plus <= best.value {
                    continue;
                }
                let slots = slots_for(f, l1, l2, avail);
                if slots.breakpoint_count(slots.t_max) > MAX_SLOT_BREAKPOINTS {
                    return size(format!("tail for (l1, l2) = ({l1}, {l2}) has too many slot blocks"));
                }
                let tail = v.zones_from(l2 + 1);
                let zones: Vec<(Q, u64)> = tail.iter().map(|r| (r.value.clone(), r.len)).collect();
                let plan = tail_max(&zones, &slots);
                let value = half() * &v1 + &z.value + &plan.value;
                best.offer(value, || {
                    let placement: Vec<Placement> = tail
                        .iter()
                        .zip(&plan.counts)
                        .filter(|(_, c)| **c > 0)
                        .map(|(r, c)| Placement { start: r.start, len: *c })
                        .collect();
                    let truncation = placement.last().map_or(l2, |p| p.start + p.len - 1);
                    StructuredWitness { sign, l1: Some(l1), l2: Some(l2), truncation, placement }
                });
            }
            if l2 > d_far {
                let (v1, l1) = pre.best_upto(l2 - d_far);
                let value = half() * v1 + &z.value + f.weights(l2).0 * &s_plus;
                best.offer(value, || {
                    let placement: Vec<Placement> = v
                        .zones_from(l2 + 1)
                        .into_iter()
                        .filter(|r| r.value.is_positive())
                        .map(|r| Placement { start: r.start, len: r.len })
                        .collect();
                    let truncation = placement.last().map_or(l2, |p| p.start + p.len - 1);
                    StructuredWitness { sign, l1: Some(l1), l2: Some(l2), truncation, placement }
                });
            }
        }
    }
    Ok(())
}

/// Exact maximum through the zone-by-zone tail DP.
pub fn structured_dp(f: &Family, v: &RunVector) -> Result<FunctionalMax> {
    let mut best = FunctionalMax::zero();
    structured_signed(f, v, 1, &mut best)?;
    structured_signed(f, &v.neg(), -1, &mut best)?;
    Ok(best)
}

/// Exhaustive search over `l1 < l2` and every subset of later positions,
/// with all truncations. Integer arithmetic after a common scaling.
pub fn brute_miniature(f: &Family, v: &RunVector, caps: &Caps) -> Result<FunctionalMax> {
    let u = v.universe;
    if u > caps.elton_miniature {
        return size(format!("brute force limited to universe {}", caps.elton_miniature));
    }
    let dense = v.to_dense();
    let den = dense.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut best = FunctionalMax::zero();
    for sign in [1i8, -1] {
        let sv: Vec<BigInt> = dense.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer() * sign).collect();
        for l1 in 1..=u {
            let a1 = Q::new(sv[l1 as usize - 1].clone(), den.clone() * 2);
            best.offer(a1, || StructuredWitness { sign, l1: Some(l1), l2: None, truncation: l1, placement: vec![] });
            for l2 in l1 + 1..=u {
                brute_pair(f, &sv, &den, sign, l1, l2, &mut best)?;
            }
        }
    }
    Ok(best)
}

fn brute_pair(f: &Family, sv: &[BigInt], den: &BigInt, sign: i8, l1: u64, l2: u64, best: &mut FunctionalMax) -> Result<()> {
    let u = sv.len() as u64;
    let e = f.k as u64 * l2 - 1;
    if e > 40 {
        return domain("miniature family exponent too large for the brute force");
    }
    // scale = 2·n1·n2·2^e·den; every term becomes an integer
    let p2 = 1i128 << e;
    let (n1, n2) = (f.n1 as i128, f.n2 as i128);
    let scale = BigInt::from(2 * n1 * n2 * p2) * den;
    let val = |p: u64| sv[p as usize - 1].to_i128().expect("miniature values are small");
    let head = val(l1) * n1 * n2 * p2 + 2 * val(l2) * n1 * n2 * p2;
    let (a, b) = f.block_sizes(l1, l2);
    let cyc = &a + &b;
    let pat = f.pattern_len(l2);
    let rest: Vec<u64> = (l2 + 1..=u).collect();
    // scaled weight of slot s, index s - 1
    let slot_w: Vec<i128> = (1..=rest.len() as u64)
        .map(|s| {
            let s = BigInt::from(s);
            if s > pat {
                0
            } else if (s - 1u32) % &cyc < a {
                2 * n2
            } else {
                2 * n1
            }
        })
        .collect();
    let mut top = (i128::MIN, 0u32);
    for mask in 0u32..1 << rest.len() {
        let mut acc = head;
        let mut local = (acc, 0u32);
        let mut slot = 0usize;
        for (j, &p) in rest.iter().enumerate() {
            if mask >> j & 1 == 0 {
                continue;
            }
            acc += val(p) * slot_w[slot];
            slot += 1;
            if acc > local.0 {
                local = (acc, mask & ((2u32 << j) - 1));
            }
        }
        if local.0 > top.0 {
            top = local;
        }
    }
    let value = Q::new(BigInt::from(top.0), scale);
    best.offer(value, || {
        let positions: Vec<u64> = rest.iter().enumerate().filter(|(j, _)| top.1 >> j & 1 == 1).map(|(_, &p)| p).collect();
        let placement = runs_of(&positions);
        let truncation = positions.last().copied().unwrap_or(l2);
        StructuredWitness { sign, l1: Some(l1), l2: Some(l2), truncation, placement }
    });
    Ok(())
}

fn runs_of(positions: &[u64]) -> Vec<Placement> {
    let mut out: Vec<Placement> = vec![];
    for &p in positions {
        match out.last_mut() {
            Some(r) if r.start + r.len == p => r.len += 1,
            _ => out.push(Placement { start: p, len: 1 }),
        }
    }
    out
}

pub fn maximize(f: &Family, v: &RunVector, method: MaxMethod, caps: &Caps) -> Result<FunctionalMax> {
    match method {
        MaxMethod::BruteMiniature => brute_miniature(f, v, caps),
        MaxMethod::StructuredDp => structured_dp(f, v),
    }
}

/// Maximum over the family attached to `layout`; `v` lives on its universe.
pub fn max_over_functionals(layout: &EltonLayout, v: &RunVector, method: MaxMethod, caps: &Caps) -> Result<FunctionalMax> {
    if v.universe != layout.universe {
        return domain(format!("vector universe {} differs from layout universe {}", v.universe, layout.universe));
    }
    maximize(&layout.family, v, method, caps)
}

/// `max(‖v‖_∞, sup |x*_L(E v)|)`.
pub fn elton_norm(f: &Family, v: &RunVector, method: MaxMethod, caps: &Caps) -> Result<EltonNorm> {
    let functional = maximize(f, v, method, caps)?;
    let sup = v.sup();
    Ok(EltonNorm { value: qmax(sup.clone(), functional.value.clone()), sup, functional })
}

/// I and J slots among slots `1..=n`, past-the-pattern slots excluded.
fn slot_counts(a: &BigInt, b: &BigInt, pattern: &BigInt, n: u64) -> (BigInt, BigInt) {
    let n = qmin_z(BigInt::from(n), pattern.clone());
    let cyc = a + b;
    let (q, r) = n.div_rem(&cyc);
    let ni = q * a + qmin_z(r, a.clone());
    let nj = n - &ni;
    (ni, nj)
}

fn qmin_z(x: BigInt, y: BigInt) -> BigInt {
    if x <= y {
        x
    } else {
        y
    }
}

fn check_shape(w: &StructuredWitness, universe: u64) -> Result<()> {
    let bad = |m: &str| Err(Error::Domain(format!("malformed witness: {m}")));
    if w.sign != 1 && w.sign != -1 {
        return bad("sign must be 1 or -1");
    }
    if w.truncation > universe {
        return bad("truncation past the universe");
    }
    match (w.l1, w.l2) {
        (None, Some(_)) => return bad("l2 without l1"),
        (Some(0), _) => return bad("positions start at 1"),
        (Some(l1), Some(l2)) if l2 <= l1 => return bad("l1 < l2 fails"),
        _ => {}
    }
    let mut last = match w.l2 {
        Some(l2) => l2,
        None if w.placement.is_empty() => return Ok(()),
        None => return bad("placements need l2"),
    };
    for p in &w.placement {
        if p.len == 0 || p.start <= last {
            return bad("placements must be increasing and after l2");
        }
        last = p.start + p.len - 1;
    }
    if last > w.truncation && !w.placement.is_empty() {
        return bad("placement past the truncation");
    }
    Ok(())
}

/// Recomputes the witness value by direct slot counting.
pub fn reverify(f: &Family, v: &RunVector, w: &StructuredWitness) -> Result<Q> {
    check_shape(w, v.universe)?;
    let t = w.truncation;
    let mut acc = Q::zero();
    if let Some(l1) = w.l1.filter(|&l| l <= t) {
        acc += v.get(l1) / Q::from_integer(2.into());
    }
    if let (Some(l1), Some(l2)) = (w.l1, w.l2) {
        if l2 <= t {
            acc += v.get(l2);
        }
        let (a, b) = f.block_sizes(l1, l2);
        let (w1, w2) = f.weights(l2);
        let pat = f.pattern_len(l2);
        let mut before = 0u64;
        for p in &w.placement {
            let end = p.start + p.len - 1;
            for r in v.runs.iter().filter(|r| r.start <= end && r.end() >= p.start) {
                let lo = r.start.max(p.start) - p.start + before;
                let hi = r.end().min(end) - p.start + before + 1;
                let (i_hi, j_hi) = slot_counts(&a, &b, &pat, hi);
                let (i_lo, j_lo) = slot_counts(&a, &b, &pat, lo);
                acc += &r.value * (Q::from_integer(i_hi - i_lo) * &w1 + Q::from_integer(j_hi - j_lo) * &w2);
            }
            before += p.len;
        }
    }
    Ok(if w.sign < 0 { -acc } else { acc })
}

/// `E x*_L` as an explicit sparse functional; refuses more than `limit` terms.
pub fn witness_functional(f: &Family, w: &StructuredWitness, limit: u64) -> Result<SparseVector> {
    let mut out = SparseVector::new();
    let sign = if w.sign < 0 { -Q::one() } else { Q::one() };
    let Some(l1) = w.l1 else { return Ok(out) };
    let t = w.truncation;
    if l1 <= t {
        out.set(l1 as usize, &sign / Q::from_integer(2.into()));
    }
    let Some(l2) = w.l2 else { return Ok(out) };
    if l2 <= t {
        out.set(l2 as usize, sign.clone());
    }
    let total: u64 = w.placement.iter().map(|p| p.len).sum();
    if total + 2 > limit {
        return size(format!("witness has {} terms, limit {limit}", total + 2));
    }
    let (a, b) = f.block_sizes(l1, l2);
    let (w1, w2) = f.weights(l2);
    let pat = f.pattern_len(l2);
    let cyc = &a + &b;
    let mut slot = BigInt::zero();
    for p in &w.placement {
        for pos in p.start..p.start + p.len {
            slot += 1;
            if slot > pat {
                continue;
            }
            let wt = if (&slot - 1u32) % &cyc < a { &w1 } else { &w2 };
            out.set(pos as usize, wt * &sign);
        }
    }
    Ok(out)
}
