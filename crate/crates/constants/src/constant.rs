//! Partial-unconditionality constants of a finite norm instance.
//!
//! Every mode maximises a ratio `num(a, E) / ‖a‖` over admissible `(a, E)`.
//! The grid method scans a coefficient lattice in scaled integer
//! arithmetic; the LP method solves each (E, sign pattern, numerator piece)
//! subproblem exactly with Dinkelbach iterations.

use crate::lp::{Lp, LpOutcome, Solver};
use crate::schreier::schreier_member;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use unclab_core::error::{domain, size, Error, Result};
use unclab_core::norm::{dual_certificate, eval_norm, Certificate, NormInstance, ProjectionClass, SparseVector};
use unclab_core::rational::{qi, Q};
use unclab_core::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    K,
    Kprime,
    L,
    Lprime,
    A,
    #[serde(rename = "C_uncond")]
    CUncond,
    #[serde(rename = "quasi_greedy")]
    QuasiGreedy,
    #[serde(rename = "BOU")]
    Bou,
    Kstar,
    #[serde(rename = "schreier")]
    Schreier,
}

impl Mode {
    pub const ALL: [Mode; 10] = [
        Mode::K,
        Mode::Kprime,
        Mode::L,
        Mode::Lprime,
        Mode::A,
        Mode::CUncond,
        Mode::QuasiGreedy,
        Mode::Bou,
        Mode::Kstar,
        Mode::Schreier,
    ];

    pub fn lp_supported(self) -> bool {
        !matches!(self, Mode::QuasiGreedy | Mode::Bou)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeParams {
    #[serde(rename = "D", default, with = "unclab_core::rational::qopt", skip_serializing_if = "Option::is_none")]
    pub big_d: Option<Q>,
    #[serde(default, with = "unclab_core::rational::qopt", skip_serializing_if = "Option::is_none")]
    pub d: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantQuery {
    pub instance: NormInstance,
    #[serde(with = "unclab_core::rational::qser")]
    pub delta: Q,
    pub mode: Mode,
    #[serde(default)]
    pub params: ModeParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Grid {
        #[serde(with = "unclab_core::rational::qser")]
        step: Q,
    },
    FractionalLp,
}

impl Method {
    pub fn grid_default() -> Method {
        Method::Grid { step: Q::new(BigInt::one(), BigInt::from(8)) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessFunctional {
    /// certificate for `‖P_E a‖`
    Norm { certificate: Certificate },
    /// a point functional `g` with `g(P_E a) = |Σ_{i∈E} a_i g_i|`
    Point { functional_index: usize, functional: SparseVector },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub a: SparseVector,
    #[serde(rename = "E")]
    pub e: Vec<usize>,
    pub functional: WitnessFunctional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub mode: Mode,
    #[serde(with = "unclab_core::rational::qser")]
    pub delta: Q,
    pub method: Method,
    #[serde(with = "unclab_core::rational::qser")]
    pub value_lower: Q,
    #[serde(with = "unclab_core::rational::qopt")]
    pub value_upper: Option<Q>,
    pub witness: Witness,
}

/// Validated numeric parameters shared by both methods.
struct Setup {
    delta: Q,
    big_d: Q,
    d: Q,
    order: u32,
}

fn setup(q: &ConstantQuery) -> Result<Setup> {
    if q.delta <= Q::zero() || q.delta > qi(1) {
        return domain("delta must lie in (0, 1]");
    }
    let (mut big_d, mut d) = (qi(1), qi(1));
    if q.mode == Mode::Bou {
        big_d = q.params.big_d.clone().ok_or_else(|| Error::Domain("BOU needs D".into()))?;
        d = q.params.d.clone().ok_or_else(|| Error::Domain("BOU needs d".into()))?;
        if big_d < qi(1) || d < qi(1) {
            return domain("BOU needs D >= 1 and d >= 1");
        }
    }
    let order = q.params.order.unwrap_or(1);
    if q.mode == Mode::Schreier && !(1..=2).contains(&order) {
        return domain("Schreier order must be 1 or 2");
    }
    Ok(Setup { delta: q.delta.clone(), big_d, d, order })
}

pub fn compute_constant(q: &ConstantQuery, method: &Method, caps: &Caps) -> Result<ConstantReport> {
    let s = setup(q)?;
    q.instance.check_caps(caps)?;
    let n = q.instance.dim;
    let (value, a, e, point, upper) = match method {
        Method::Grid { step } => {
            if n > caps.grid_dim {
                return size(format!("grid method limited to dim {}", caps.grid_dim));
            }
            let r = grid(q, &s, step)?;
            (r.0, r.1, r.2, r.3, None)
        }
        Method::FractionalLp => {
            if !q.mode.lp_supported() {
                return domain("quasi_greedy and BOU are available with the grid method only");
            }
            if n > caps.lp_dim {
                return size(format!("fractional_lp method limited to dim {}", caps.lp_dim));
            }
            let r = lp_method(q, &s)?;
            (r.0.clone(), r.1, r.2, r.3, Some(r.0))
        }
    };
    let functional = match point {
        Some(idx) => WitnessFunctional::Point { functional_index: idx, functional: q.instance.functionals[idx].clone() },
        None => WitnessFunctional::Norm { certificate: dual_certificate(&q.instance, &a.restrict(&e))? },
    };
    Ok(ConstantReport {
        mode: q.mode,
        delta: q.delta.clone(),
        method: method.clone(),
        value_lower: value,
        value_upper: upper,
        witness: Witness { a, e, functional },
    })
}

/// Re-evaluates a witness through the norm engine.
pub fn witness_ratio(inst: &NormInstance, w: &Witness) -> Result<Q> {
    let den = eval_norm(inst, &w.a)?;
    if den.is_zero() {
        return domain("witness vector has zero norm");
    }
    let pe = w.a.restrict(&w.e);
    let num = match &w.functional {
        WitnessFunctional::Point { functional, .. } => functional.dot(&pe).abs(),
        WitnessFunctional::Norm { .. } => eval_norm(inst, &pe)?,
    };
    Ok(num / den)
}

/// Checks the admissibility constraints of `mode` for a witness.
pub fn witness_admissible(q: &ConstantQuery, w: &Witness) -> Result<bool> {
    let s = setup(q)?;
    let inst = &q.instance;
    let a = &w.a;
    let norm = eval_norm(inst, a)?;
    let abs = |i: usize| a.get(i).abs();
    let in_thresh = w.e.iter().all(|&i| abs(i) >= s.delta);
    let supp_ok = a.iter().all(|(_, v)| v.abs() >= s.delta);
    let sup_ok = a.sup() <= qi(1);
    let ball = norm <= qi(1);
    Ok(match q.mode {
        Mode::CUncond => true,
        Mode::K => sup_ok && in_thresh,
        Mode::Kprime => ball && in_thresh,
        Mode::L => sup_ok && supp_ok,
        Mode::Lprime => ball && supp_ok,
        Mode::QuasiGreedy => {
            let t: Vec<usize> = a.iter().filter(|(_, v)| v.abs() >= s.delta).map(|(i, _)| i).collect();
            sup_ok && a.restrict(&w.e) == a.restrict(&t)
        }
        Mode::A => {
            let mass: Q = w.e.iter().map(|&i| abs(i)).sum();
            &s.delta * mass <= eval_norm(inst, &a.restrict(&w.e))?
        }
        Mode::Bou => {
            crate::schreier::oscillation(a, &w.e) <= s.big_d
                && crate::schreier::schreier_decompose(a, &w.e, &s.d)?.is_some()
        }
        Mode::Kstar => match &w.functional {
            WitnessFunctional::Point { functional, .. } => w.e.iter().all(|&i| functional.get(i).abs() >= s.delta),
            _ => false,
        },
        Mode::Schreier => schreier_member(s.order, &w.e)?,
    })
}

fn mask_indices(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

// ---------------------------------------------------------------------------
// grid method

struct Compiled {
    n: usize,
    dg: i128,
    funcs: Vec<Vec<i128>>,
    class: ProjectionClass,
    include_sup: bool,
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

fn compile(inst: &NormInstance, qs: i128) -> Result<Compiled> {
    let mut den = BigInt::one();
    for f in &inst.functionals {
        for (_, v) in f.iter() {
            den = lcm(&den, v.denom());
        }
    }
    let too_big = || Error::Size("coefficients too large for the grid method".into());
    let dg = den.to_i128().ok_or_else(too_big)?;
    let mut funcs = vec![];
    let mut fmax: i128 = dg;
    for f in &inst.functionals {
        let mut row = vec![0i128; inst.dim];
        for (i, v) in f.iter() {
            let x = (v * Q::from_integer(den.clone())).to_integer().to_i128().ok_or_else(too_big)?;
            fmax = fmax.max(x.abs());
            row[i - 1] = x;
        }
        funcs.push(row);
    }
    let bound = (inst.dim as i128 + 1).checked_mul(fmax).and_then(|x| x.checked_mul(qs)).ok_or_else(too_big)?;
    if bound >= 1i128 << 60 {
        return Err(too_big());
    }
    Ok(Compiled { n: inst.dim, dg, funcs, class: inst.projection_class, include_sup: inst.include_sup })
}

impl Compiled {
    fn class_value(&self, f: &[i128], a: &[i64], mask: u32) -> i128 {
        let term = |i: usize| if mask >> i & 1 == 1 { f[i] * a[i] as i128 } else { 0 };
        match self.class {
            ProjectionClass::InitialSegments => {
                let (mut best, mut run) = (0, 0);
                for i in 0..self.n {
                    run += term(i);
                    best = best.max(run);
                }
                best
            }
            ProjectionClass::Intervals => {
                let (mut best, mut run) = (0, 0i128);
                for i in 0..self.n {
                    run = (run + term(i)).max(0);
                    best = best.max(run);
                }
                best
            }
            ProjectionClass::AllSubsets => (0..self.n).map(|i| term(i).max(0)).sum(),
        }
    }

    /// `‖P_E a‖` scaled by `dg / step`.
    fn norm(&self, a: &[i64], mask: u32) -> i128 {
        let mut best = 0;
        if self.include_sup {
            for i in 0..self.n {
                if mask >> i & 1 == 1 {
                    best = best.max(self.dg * (a[i] as i128).abs());
                }
            }
        }
        for f in &self.funcs {
            best = best.max(self.class_value(f, a, mask));
        }
        best
    }

    /// `max_{E ⊂ T} ‖P_E a‖` with the attaining `E`.
    fn best_subset(&self, a: &[i64], t: u32) -> (i128, u32) {
        let mut best = (0, 0u32);
        if self.include_sup {
            for i in 0..self.n {
                let v = self.dg * (a[i] as i128).abs();
                if t >> i & 1 == 1 && v > best.0 {
                    best = (v, 1 << i);
                }
            }
        }
        for f in &self.funcs {
            let (mut v, mut e) = (0, 0u32);
            for i in 0..self.n {
                let x = f[i] * a[i] as i128;
                if t >> i & 1 == 1 && x > 0 {
                    v += x;
                    e |= 1 << i;
                }
            }
            if v > best.0 {
                best = (v, e);
            }
        }
        best
    }
}

#[derive(Clone, Copy)]
struct Cand {
    num: i128,
    den: i128,
    idx: u64,
    mask: u32,
    point: Option<usize>,
}

fn better(x: &Cand, y: &Option<Cand>) -> bool {
    match y {
        None => true,
        Some(y) => {
            let l = x.num * y.den;
            let r = y.num * x.den;
            l > r || (l == r && x.idx < y.idx)
        }
    }
}

/// `a ≥ p/q` in scaled units: `|A| / qs ≥ p/q`.
fn ge_scaled(abs_a: i128, qs: i128, x: &Q) -> bool {
    let (p, d) = (x.numer().to_i128().unwrap(), x.denom().to_i128().unwrap());
    abs_a * d >= p * qs
}

type Found = (Q, SparseVector, Vec<usize>, Option<usize>);

fn grid(q: &ConstantQuery, s: &Setup, step: &Q) -> Result<Found> {
    if !step.is_positive() || !step.numer().is_one() {
        return domain("grid step must be 1/q for a positive integer q");
    }
    let qs = step.denom().to_i128().filter(|&x| x <= 1 << 20).ok_or_else(|| Error::Size("grid step too fine".into()))?;
    let c = compile(&q.instance, qs)?;
    let n = c.n;
    let base = 2 * qs as u64 + 1;
    let total = base.checked_pow(n as u32).ok_or_else(|| Error::Size("lattice too large".into()))?;
    for x in [&s.delta, &s.big_d, &s.d] {
        if x.numer().to_i128().is_none() || x.denom().to_i128().is_none() {
            return size("parameters too large for the grid method");
        }
    }
    // Schreier sets inside [1..n], and Kstar thresholds per functional
    let schreier_masks: Vec<u32> = (1u32..1 << n)
        .filter(|&m| schreier_member(s.order, &mask_indices(m, n)).unwrap_or(false))
        .collect();
    let point_masks: Vec<u32> = q
        .instance
        .functionals
        .iter()
        .map(|f| (0..n).filter(|&i| f.get(i + 1).abs() >= s.delta).fold(0u32, |m, i| m | 1 << i))
        .collect();
    let one = c.dg * qs;

    let eval = |a: &[i64], idx: u64| -> Option<Cand> {
        let den = c.norm(a, (1u32 << n) - 1);
        let absa: Vec<i128> = a.iter().map(|&x| (x as i128).abs()).collect();
        let supp = (0..n).filter(|&i| a[i] != 0).fold(0u32, |m, i| m | 1 << i);
        let thresh = (0..n).filter(|&i| ge_scaled(absa[i], qs, &s.delta)).fold(0u32, |m, i| m | 1 << i);
        let all_big = thresh & supp == supp;
        let mk = |num: i128, mask: u32, point: Option<usize>| Some(Cand { num, den, idx, mask, point });
        match q.mode {
            Mode::CUncond => {
                let (v, e) = c.best_subset(a, supp);
                mk(v, e, None)
            }
            Mode::K | Mode::Kprime => {
                if q.mode == Mode::Kprime && den > one {
                    return None;
                }
                let (v, e) = c.best_subset(a, thresh);
                mk(v, e, None)
            }
            Mode::L | Mode::Lprime => {
                if !all_big || (q.mode == Mode::Lprime && den > one) {
                    return None;
                }
                let (v, e) = c.best_subset(a, supp);
                mk(v, e, None)
            }
            Mode::QuasiGreedy => mk(c.norm(a, thresh), thresh, None),
            Mode::A | Mode::Bou | Mode::Schreier => {
                let mut best: Option<(i128, u32)> = None;
                let mut sub = supp;
                loop {
                    let e = sub;
                    let ok = e == 0
                        || match q.mode {
                            Mode::A => {
                                let mass: i128 = (0..n).filter(|&i| e >> i & 1 == 1).map(|i| absa[i]).sum();
                                let num = c.norm(a, e);
                                let (p, d) = (s.delta.numer().to_i128().unwrap(), s.delta.denom().to_i128().unwrap());
                                p * mass * c.dg <= num * d
                            }
                            Mode::Bou => bou_ok(&absa, e, n, &s.big_d, &s.d),
                            _ => schreier_masks.binary_search(&e).is_ok(),
                        };
                    if ok {
                        let v = c.norm(a, e);
                        if best.is_none_or(|b| v > b.0) {
                            best = Some((v, e));
                        }
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & supp;
                }
                best.and_then(|(v, e)| mk(v, e, None))
            }
            Mode::Kstar => {
                let mut best: Option<(i128, u32, usize)> = None;
                for (fi, f) in c.funcs.iter().enumerate() {
                    let t = point_masks[fi];
                    let (mut v, mut e) = (0, 0u32);
                    for i in 0..n {
                        let x = f[i] * a[i] as i128;
                        if t >> i & 1 == 1 && x > 0 {
                            v += x;
                            e |= 1 << i;
                        }
                    }
                    if best.is_none_or(|b| v > b.0) {
                        best = Some((v, e, fi));
                    }
                }
                best.and_then(|(v, e, fi)| mk(v, e, Some(fi)))
            }
        }
    };

    let chunks = 256u64.min(total);
    let per = total.div_ceil(chunks);
    let best = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut best: Option<Cand> = None;
            let mut a = vec![0i64; n];
            for idx in ch * per..((ch + 1) * per).min(total) {
                let mut r = idx;
                for x in a.iter_mut() {
                    *x = (r % base) as i64 - qs as i64;
                    r /= base;
                }
                // a and -a give the same ratio; keep the one whose first non-zero entry is positive
                match a.iter().find(|&&x| x != 0) {
                    Some(&x) if x > 0 => {}
                    _ => continue,
                }
                if let Some(cand) = eval(&a, idx) {
                    if better(&cand, &best) {
                        best = Some(cand);
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None, |acc: Option<Cand>, x| match x {
            Some(x) if better(&x, &acc) => Some(x),
            _ => acc,
        });
    let best = best.ok_or_else(|| Error::Domain("no admissible point on the lattice".into()))?;
    let mut r = best.idx;
    let mut a = SparseVector::new();
    for i in 0..n {
        let v = (r % base) as i64 - qs as i64;
        r /= base;
        a.set(i + 1, Q::new(BigInt::from(v), BigInt::from(qs)));
    }
    let mut point = best.point;
    if let Some(fi) = point {
        // use the family member with a positive value on P_E a
        let f = &q.instance.functionals[fi];
        let e = mask_indices(best.mask, n);
        if f.dot(&a.restrict(&e)).is_negative() {
            point = q.instance.functionals.iter().position(|g| *g == f.neg());
        }
    }
    let value = if best.num == 0 { Q::zero() } else { Q::new(BigInt::from(best.num), BigInt::from(best.den)) };
    Ok((value, a, mask_indices(best.mask, n), point))
}

fn bou_ok(absa: &[i128], e: u32, n: usize, big_d: &Q, d: &Q) -> bool {
    let idx: Vec<usize> = (0..n).filter(|&i| e >> i & 1 == 1).collect();
    let osc_le = |ids: &[usize], bound: &Q| {
        let hi = ids.iter().map(|&i| absa[i]).max().unwrap_or(0);
        let lo = ids.iter().map(|&i| absa[i]).filter(|&x| x > 0).min();
        match lo {
            None => true,
            Some(lo) => hi * bound.denom().to_i128().unwrap() <= bound.numer().to_i128().unwrap() * lo,
        }
    };
    if !osc_le(&idx, big_d) {
        return false;
    }
    let mut blocks: Vec<Vec<usize>> = vec![];
    for &i in &idx {
        if let Some(b) = blocks.last_mut() {
            b.push(i);
            if osc_le(b, d) {
                continue;
            }
            b.pop();
        }
        blocks.push(vec![i]);
    }
    blocks.len() <= idx[0] + 1
}

// ---------------------------------------------------------------------------
// fractional LP method

/// Distinct non-zero linear pieces `h` with `‖a‖ = max(0, max_h h(a))`.
fn norm_pieces(inst: &NormInstance) -> Vec<Vec<Q>> {
    let n = inst.dim;
    let mut seen = HashSet::new();
    let mut out = vec![];
    let mut push = |v: Vec<Q>| {
        if v.iter().any(|x| !x.is_zero()) && seen.insert(v.clone()) {
            out.push(v);
        }
    };
    let sets: Vec<Vec<bool>> = match inst.projection_class {
        ProjectionClass::InitialSegments => (1..=n).map(|t| (0..n).map(|i| i < t).collect()).collect(),
        ProjectionClass::Intervals => {
            let mut v = vec![];
            for s in 0..n {
                for t in s..n {
                    v.push((0..n).map(|i| s <= i && i <= t).collect());
                }
            }
            v
        }
        ProjectionClass::AllSubsets => (1u32..1 << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect(),
    };
    for f in &inst.functionals {
        let dense = f.to_dense(n);
        for e in &sets {
            push(dense.iter().zip(e).map(|(x, &keep)| if keep { x.clone() } else { Q::zero() }).collect());
        }
    }
    if inst.include_sup {
        for i in 0..n {
            for s in [1, -1] {
                let mut v = vec![Q::zero(); n];
                v[i] = qi(s);
                push(v);
            }
        }
    }
    out
}

fn restrict(h: &[Q], mask: u32) -> Vec<Q> {
    h.iter().enumerate().map(|(i, x)| if mask >> i & 1 == 1 { x.clone() } else { Q::zero() }).collect()
}

fn dot(h: &[Q], a: &[Q]) -> Q {
    h.iter().zip(a).filter(|(x, _)| !x.is_zero()).map(|(x, y)| x * y).sum()
}

/// Distinct restrictions `h|E`; with a sign pattern, drop pieces dominated
/// on the orthant `σ_i a_i ≥ 0`.
/// With `free`, `E` ranges over subsets of each mask and only the
/// sign-matched part of each piece is kept.
fn numerators(pieces: &[Vec<Q>], masks: &[u32], sigma: Option<&[i8]>, free: bool) -> Vec<(Vec<Q>, u32)> {
    let mut seen = HashSet::new();
    let mut out: Vec<(Vec<Q>, u32)> = vec![];
    for &m in masks {
        for h in pieces {
            let m = match sigma {
                Some(sg) if free => (0..h.len())
                    .filter(|&i| m >> i & 1 == 1 && (qi(sg[i] as i64) * &h[i]).is_positive())
                    .fold(0u32, |acc, i| acc | 1 << i),
                _ => m,
            };
            let p = restrict(h, m);
            if p.iter().any(|x| !x.is_zero()) && seen.insert(p.clone()) {
                out.push((p, m));
            }
        }
    }
    let Some(sigma) = sigma else { return out };
    let key = |p: &[Q]| -> Vec<Q> { p.iter().zip(sigma).map(|(x, &s)| if s < 0 { -x } else { x.clone() }).collect() };
    let keyed: Vec<Vec<Q>> = out.iter().map(|(p, _)| key(p)).collect();
    let dominated = |i: usize| {
        keyed.iter().enumerate().any(|(j, k)| {
            j != i && k.iter().zip(&keyed[i]).all(|(x, y)| x >= y) && (k != &keyed[i] || j < i)
        })
    };
    out.into_iter().enumerate().filter(|(i, _)| !dominated(*i)).map(|(_, x)| x).collect()
}

/// Subproblems sharing one feasible region; each numerator carries the
/// projection mask and, for point functionals, the functional index.
struct Group {
    region: Vec<(Vec<Q>, Q)>,
    numers: Vec<(Vec<Q>, u32, Option<usize>)>,
}

const GROUP_CHUNK: usize = 8;

fn push_group(groups: &mut Vec<Group>, region: Vec<(Vec<Q>, Q)>, numers: Vec<(Vec<Q>, u32, Option<usize>)>) {
    for c in numers.chunks(GROUP_CHUNK) {
        groups.push(Group { region: region.clone(), numers: c.to_vec() });
    }
}

fn solve_group(g: &Group, pieces: &[Vec<Q>]) -> Result<Vec<Option<(Q, Vec<Q>)>>> {
    let n = pieces.first().map_or(0, |h| h.len());
    let mut lp = Lp::new(n + 1);
    for (c, r) in &g.region {
        let mut row = c.clone();
        row.push(Q::zero());
        lp.le(row, r.clone());
    }
    for h in pieces {
        let mut row = h.clone();
        row.push(-Q::one());
        lp.le(row, Q::zero());
    }
    let mut srow = vec![Q::zero(); n];
    srow.push(-Q::one());
    lp.le(srow, Q::zero());
    let Some(mut solver) = lp.feasible() else { return Ok(vec![None; g.numers.len()]) };
    g.numers.iter().map(|(p, _, _)| dinkelbach(p, &mut solver, pieces)).collect()
}

/// Dinkelbach iterations for `max numer(a) / ‖a‖`; the solver holds the
/// region plus the epigraph rows `h(a) ≤ s`.
fn dinkelbach(numer: &[Q], lp: &mut Solver, pieces: &[Vec<Q>]) -> Result<Option<(Q, Vec<Q>)>> {
    let n = numer.len();
    let norm = |a: &[Q]| pieces.iter().map(|h| dot(h, a)).fold(Q::zero(), |m, x| if x > m { x } else { m });
    let mut t = Q::zero();
    let mut current: Option<Vec<Q>> = None;
    for _ in 0..200 {
        let mut c = numer.to_vec();
        c.push(-t.clone());
        match lp.maximize(&c) {
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return domain("unbounded ratio: the instance is not a norm on this region"),
            LpOutcome::Optimal { x, value } => {
                if !value.is_positive() {
                    return Ok(current.map(|a| (t, a)));
                }
                let a = x[..n].to_vec();
                let na = norm(&a);
                if na.is_zero() {
                    return domain("degenerate norm: positive numerator on a null vector");
                }
                t = dot(numer, &a) / na;
                current = Some(a);
            }
        }
    }
    Err(Error::Size("Dinkelbach iteration limit reached".into()))
}

fn signs(mask: u32, n: usize) -> Vec<Vec<i8>> {
    let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
    (0u32..1 << idx.len())
        .map(|bits| {
            let mut s = vec![0i8; n];
            for (k, &i) in idx.iter().enumerate() {
                s[i] = if bits >> k & 1 == 1 { -1 } else { 1 };
            }
            s
        })
        .collect()
}

fn lp_method(q: &ConstantQuery, s: &Setup) -> Result<Found> {
    let inst = &q.instance;
    let n = inst.dim;
    let pieces = norm_pieces(inst);
    let unit = |i: usize, v: i64| -> Vec<Q> {
        let mut r = vec![Q::zero(); n];
        r[i] = qi(v);
        r
    };
    let ball: Vec<(Vec<Q>, Q)> = pieces.iter().map(|h| (h.clone(), qi(1))).collect();
    let boxed: Vec<(Vec<Q>, Q)> = (0..n).flat_map(|i| [(unit(i, 1), qi(1)), (unit(i, -1), qi(1))]).collect();
    let full = (1u32 << n) - 1;
    let all_masks: Vec<u32> = (1..=full).collect();
    let mut groups: Vec<Group> = vec![];
    match q.mode {
        Mode::CUncond | Mode::Schreier => {
            let masks: Vec<u32> = if q.mode == Mode::Schreier {
                all_masks.iter().copied().filter(|&m| schreier_member(s.order, &mask_indices(m, n)).unwrap_or(false)).collect()
            } else {
                all_masks.clone()
            };
            let nums = numerators(&pieces, &masks, None, false).into_iter().map(|(p, m)| (p, m, None)).collect();
            push_group(&mut groups, ball.clone(), nums);
        }
        Mode::Kstar => {
            let mut seen = HashSet::new();
            let mut nums = vec![];
            for (fi, f) in inst.functionals.iter().enumerate() {
                let dense = f.to_dense(n);
                let t = (0..n).filter(|&i| dense[i].abs() >= s.delta).fold(0u32, |m, i| m | 1 << i);
                let mut sub = t;
                while sub != 0 {
                    let p = restrict(&dense, sub);
                    if p.iter().any(|x| !x.is_zero()) && seen.insert(p.clone()) {
                        nums.push((p, sub, Some(fi)));
                    }
                    sub = (sub - 1) & t;
                }
            }
            push_group(&mut groups, ball.clone(), nums);
        }
        Mode::K | Mode::Kprime => {
            for &m in &all_masks {
                for sigma in signs(m, n) {
                    let mut region = if q.mode == Mode::K { boxed.clone() } else { ball.clone() };
                    for i in 0..n {
                        if sigma[i] != 0 {
                            region.push((unit(i, -sigma[i] as i64), -s.delta.clone()));
                        }
                    }
                    let nums = numerators(&pieces, &[m], Some(&sigma), false).into_iter().map(|(p, m)| (p, m, None)).collect();
                    push_group(&mut groups, region, nums);
                }
            }
        }
        Mode::L | Mode::Lprime => {
            for &supp in &all_masks {
                for sigma in signs(supp, n) {
                    let mut region = if q.mode == Mode::L { boxed.clone() } else { ball.clone() };
                    for i in 0..n {
                        if sigma[i] != 0 {
                            region.push((unit(i, -sigma[i] as i64), -s.delta.clone()));
                        } else {
                            region.push((unit(i, 1), Q::zero()));
                            region.push((unit(i, -1), Q::zero()));
                        }
                    }
                    let nums = numerators(&pieces, &[supp], Some(&sigma), true).into_iter().map(|(p, m)| (p, m, None)).collect();
                    push_group(&mut groups, region, nums);
                }
            }
        }
        Mode::A => {
            for &m in &all_masks {
                for sigma in signs(m, n) {
                    let nums = numerators(&pieces, &[m], Some(&sigma), false);
                    let mut region = ball.clone();
                    for i in 0..n {
                        if sigma[i] != 0 {
                            region.push((unit(i, -sigma[i] as i64), Q::zero()));
                        }
                    }
                    for (g, _) in &nums {
                        // δ Σ σ_i a_i − g(a) ≤ 0
                        let row: Vec<Q> = (0..n).map(|i| &s.delta * qi(sigma[i] as i64) - &g[i]).collect();
                        let mut r = region.clone();
                        r.push((row, Q::zero()));
                        push_group(&mut groups, r, nums.iter().map(|(p, m)| (p.clone(), *m, None)).collect());
                    }
                }
            }
        }
        Mode::QuasiGreedy | Mode::Bou => unreachable!("rejected before dispatch"),
    }
    let results: Vec<Vec<Option<(Q, Vec<Q>)>>> =
        groups.par_iter().map(|g| solve_group(g, &pieces)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<(Q, Vec<Q>, u32, Option<usize>)> = None;
    for (g, rs) in groups.iter().zip(results) {
        for ((_, mask, point), r) in g.numers.iter().zip(rs) {
            if let Some((v, a)) = r {
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, a, *mask, *point));
                }
            }
        }
    }
    match best {
        Some((value, a, mask, point)) => Ok((value, SparseVector::from_dense(&a), mask_indices(mask, n), point)),
        // L and L' regions encode every admissible vector; elsewhere E = ∅ stays admissible
        None if matches!(q.mode, Mode::L | Mode::Lprime) => domain("no admissible point"),
        None => empty_set_witness(inst).map(|a| (Q::zero(), a, vec![], None)),
    }
}

/// A unit coordinate vector scaled into both the unit box and the unit ball.
fn empty_set_witness(inst: &NormInstance) -> Result<SparseVector> {
    for i in 1..=inst.dim {
        let e = SparseVector::from_pairs([(i, qi(1))]);
        let norm = eval_norm(inst, &e)?;
        if !norm.is_zero() {
            let scale = if norm > qi(1) { norm.recip() } else { qi(1) };
            return Ok(SparseVector::from_pairs([(i, scale)]));
        }
    }
    domain("degenerate norm: every coordinate vector is null")
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::norm::{build_standard, StandardNorm};
    use unclab_core::rational::q;

    fn query(inst: NormInstance, mode: Mode, delta: Q) -> ConstantQuery {
        ConstantQuery { instance: inst, delta, mode, params: ModeParams::default() }
    }

    #[test]
    fn summing_two_basics() {
        let inst = build_standard(StandardNorm::Summing, 2).unwrap();
        let caps = Caps::default();
        let r = compute_constant(&query(inst.clone(), Mode::CUncond, qi(1)), &Method::grid_default(), &caps).unwrap();
        let l = compute_constant(&query(inst, Mode::CUncond, qi(1)), &Method::FractionalLp, &caps).unwrap();
        assert!(r.value_lower <= l.value_lower);
        assert_eq!(l.value_upper, Some(l.value_lower.clone()));
    }

    #[test]
    fn rejects_bad_queries() {
        let inst = build_standard(StandardNorm::Summing, 2).unwrap();
        let caps = Caps::default();
        let bad = query(inst.clone(), Mode::K, q(3, 2));
        assert!(matches!(compute_constant(&bad, &Method::grid_default(), &caps), Err(Error::Domain(_))));
        let bou = query(inst.clone(), Mode::Bou, qi(1));
        assert!(compute_constant(&bou, &Method::grid_default(), &caps).is_err());
        let qg = query(inst, Mode::QuasiGreedy, qi(1));
        assert!(compute_constant(&qg, &Method::FractionalLp, &caps).is_err());
        let big = query(build_standard(StandardNorm::Linf, 11).unwrap(), Mode::K, qi(1));
        assert!(matches!(compute_constant(&big, &Method::grid_default(), &caps), Err(Error::Size(_))));
    }
}
