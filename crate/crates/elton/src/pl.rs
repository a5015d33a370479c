//! Continuous piecewise-linear functions with exact rational breakpoints,
//! and the slot-weight profile of a structured functional.

use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::VecDeque;
use unclab_core::rational::{floor, qmax, qmin, Q};

fn qu(x: u64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Breakpoints `(x, y)` with strictly increasing `x`; linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Pl {
    pub pts: Vec<(Q, Q)>,
}

fn interp(p: &(Q, Q), r: &(Q, Q), x: &Q) -> Q {
    if p.0 == r.0 {
        return p.1.clone();
    }
    &p.1 + (&r.1 - &p.1) * (x - &p.0) / (&r.0 - &p.0)
}

impl Pl {
    pub fn point(x: Q, y: Q) -> Pl {
        Pl { pts: vec![(x, y)] }
    }

    pub fn lo(&self) -> &Q {
        &self.pts[0].0
    }

    pub fn hi(&self) -> &Q {
        &self.pts.last().unwrap().0
    }

    /// Value at `x`, which must lie in the domain.
    pub fn eval(&self, x: &Q) -> Q {
        let i = self.pts.partition_point(|(px, _)| px < x);
        if i < self.pts.len() && self.pts[i].0 == *x {
            return self.pts[i].1.clone();
        }
        debug_assert!(i > 0 && i < self.pts.len(), "evaluation outside the domain");
        interp(&self.pts[i - 1], &self.pts[i], x)
    }

    pub fn max(&self) -> Q {
        self.pts.iter().map(|p| p.1.clone()).max().unwrap()
    }

    /// Drops repeated and collinear interior breakpoints.
    pub fn simplify(&mut self) {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.pts.len());
        for p in self.pts.drain(..) {
            if out.last().is_some_and(|l| l.0 == p.0) {
                continue;
            }
            while out.len() >= 2 {
                let (a, b) = (&out[out.len() - 2], &out[out.len() - 1]);
                if (&b.1 - &a.1) * (&p.0 - &a.0) == (&p.1 - &a.1) * (&b.0 - &a.0) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        self.pts = out;
    }
}

/// Prefix weight `S(t)` of a slot sequence made of alternating blocks
/// `I` (length `a`, weight `w1`) and `J` (length `b`, weight `w2`), only
/// ever evaluated on `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct Slots {
    pub a: u64,
    pub b: u64,
    pub w1: Q,
    pub w2: Q,
    pub t_max: u64,
}

impl Slots {
    /// Block lengths beyond `t_max` behave the same as `t_max + 1`.
    pub fn new(a: &BigInt, b: &BigInt, w1: Q, w2: Q, t_max: u64) -> Slots {
        let cap = BigInt::from(t_max) + 1;
        let sat = |x: &BigInt| -> u64 { u64::try_from(if *x > cap { cap.clone() } else { x.clone() }).unwrap() };
        Slots { a: sat(a), b: sat(b), w1, w2, t_max }
    }

    fn cycle(&self) -> u64 {
        self.a + self.b
    }

    pub fn s_at(&self, x: &Q) -> Q {
        let cyc = qu(self.cycle());
        let n = Q::from_integer(floor(&(x / &cyc)));
        let rem = x - &n * &cyc;
        let a = qu(self.a);
        let full = &a * &self.w1 + qu(self.b) * &self.w2;
        n * full + qmin(rem.clone(), a.clone()) * &self.w1 + qmax(rem - a, Q::zero()) * &self.w2
    }

    /// Integer version: total weight of slots `1..=t`.
    pub fn s_int(&self, t: u64) -> Q {
        let cyc = self.cycle();
        let (n, rem) = (t / cyc, t % cyc);
        qu(n) * (qu(self.a) * &self.w1 + qu(self.b) * &self.w2)
            + qu(rem.min(self.a)) * &self.w1
            + qu(rem.saturating_sub(self.a)) * &self.w2
    }

    /// Weight of slot `s` (1-based).
    pub fn weight(&self, s: u64) -> &Q {
        if (s - 1) % self.cycle() < self.a {
            &self.w1
        } else {
            &self.w2
        }
    }

    /// Block boundaries in `[lo, hi]`.
    pub fn breakpoints(&self, lo: u64, hi: u64) -> Vec<u64> {
        let cyc = self.cycle();
        let mut out = vec![];
        let mut base = lo / cyc * cyc;
        while base <= hi {
            for x in [base, base + self.a] {
                if x >= lo && x <= hi {
                    out.push(x);
                }
            }
            base += cyc;
        }
        out
    }

    pub fn breakpoint_count(&self, hi: u64) -> u64 {
        2 * (hi / self.cycle() + 1)
    }
}

fn sorted_union(a: impl IntoIterator<Item = Q>, b: impl IntoIterator<Item = Q>) -> Vec<Q> {
    let mut v: Vec<Q> = a.into_iter().chain(b).collect();
    v.sort();
    v.dedup();
    v
}

/// One zone of constant value `val` and `len` positions:
/// `F'(t) = max_{t-len ≤ u ≤ t} F(u) + val·(S(t) - S(u))` on `[0, min(hi F + len, t_max)]`.
pub fn zone_step(f: &Pl, val: &Q, len: u64, slots: &Slots) -> Pl {
    let d = f.hi().clone();
    let d_int = u64::try_from(floor(&d)).unwrap();
    let t_hi = (d_int + len).min(slots.t_max);
    let t_hi_q = qu(t_hi);
    let lenq = qu(len);

    let gx = sorted_union(f.pts.iter().map(|p| p.0.clone()), slots.breakpoints(0, d_int).into_iter().map(qu));
    let g: Vec<(Q, Q)> = gx.iter().map(|x| (x.clone(), f.eval(x) - val * slots.s_at(x))).collect();
    let g_pl = Pl { pts: g.clone() };
    let g_at = |x: &Q| g_pl.eval(x);

    let ev: Vec<Q> = sorted_union(
        gx.iter().flat_map(|x| [x.clone(), x + &lenq]),
        [Q::zero(), t_hi_q.clone()],
    )
    .into_iter()
    .filter(|x| *x <= t_hi_q)
    .collect();

    let mut w: Vec<(Q, Q)> = vec![];
    if ev.len() == 1 {
        w.push((Q::zero(), g[0].1.clone()));
    }
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for k in 0..ev.len().saturating_sub(1) {
        let (tl, tr) = (&ev[k], &ev[k + 1]);
        while next < g.len() && g[next].0 <= *tl {
            while dq.back().is_some_and(|&j| g[j].1 <= g[next].1) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        let left = tr - &lenq;
        while dq.front().is_some_and(|&j| g[j].0 < left) {
            dq.pop_front();
        }
        // each term as (value at tl, value at tr)
        let mut terms: Vec<(Q, Q)> = vec![];
        if *tr <= d {
            terms.push((g_at(tl), g_at(tr)));
        }
        if *tl >= lenq {
            terms.push((g_at(&(tl - &lenq)), g_at(&left)));
        }
        if let Some(&j) = dq.front() {
            terms.push((g[j].1.clone(), g[j].1.clone()));
        }
        debug_assert!(!terms.is_empty());
        let mut xs = vec![tl.clone(), tr.clone()];
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                let dl = &terms[i].0 - &terms[j].0;
                let dr = &terms[i].1 - &terms[j].1;
                if (dl.is_zero() || dr.is_zero()) || (dl > Q::zero()) == (dr > Q::zero()) {
                    continue;
                }
                xs.push(tl + (tr - tl) * &dl / (&dl - &dr));
            }
        }
        xs.sort();
        xs.dedup();
        let span = tr - tl;
        for x in xs {
            let s = (&x - tl) / &span;
            let y = terms.iter().map(|(a, b)| a + (b - a) * &s).max().unwrap();
            if w.last().is_none_or(|p| p.0 < x) {
                w.push((x, y));
            }
        }
    }
    let w = Pl { pts: w };
    let xs = sorted_union(w.pts.iter().map(|p| p.0.clone()), slots.breakpoints(0, t_hi).into_iter().map(qu));
    let mut out = Pl { pts: xs.into_iter().map(|x| { let y = w.eval(&x) + val * slots.s_at(&x); (x, y) }).collect() };
    out.simplify();
    out
}

/// Integer points worth testing for a maximiser of `f` on `[lo, hi]`.
pub fn integer_candidates(f: &Pl, extra: &[Q], lo: u64, hi: u64) -> Vec<u64> {
    let mut c = vec![lo, hi];
    for x in f.pts.iter().map(|p| &p.0).chain(extra) {
        let fl = floor(x);
        for y in [fl.clone(), fl + 1] {
            if let Ok(y) = u64::try_from(y) {
                if y >= lo && y <= hi {
                    c.push(y);
                }
            }
        }
    }
    c.sort_unstable();
    c.dedup();
    c
}

/// Result of the tail maximisation for one `(l1, l2)`: optimal value and
/// per-zone counts of occupied positions.
pub struct TailPlan {
    pub value: Q,
    pub counts: Vec<u64>,
}

/// `max Σ_k w_{slot k} v_{p_k}` over increasing positions in the given zones,
/// slots consumed in order from slot 1.
pub fn tail_max(zones: &[(Q, u64)], slots: &Slots) -> TailPlan {
    let mut fs = vec![Pl::point(Q::zero(), Q::zero())];
    for (val, len) in zones {
        let next = zone_step(fs.last().unwrap(), val, *len, slots);
        fs.push(next);
    }
    let last = fs.last().unwrap();
    let value = last.max();
    let hi = u64::try_from(floor(last.hi())).unwrap();
    let mut t = integer_candidates(last, &[], 0, hi)
        .into_iter()
        .find(|&t| last.eval(&qu(t)) == value)
        .expect("an integral maximiser exists");
    let mut counts = vec![0; zones.len()];
    for j in (0..zones.len()).rev() {
        let (val, len) = &zones[j];
        let prev = &fs[j];
        let target = fs[j + 1].eval(&qu(t));
        let st = slots.s_int(t);
        let lo = t.saturating_sub(*len);
        let hi = t.min(u64::try_from(floor(prev.hi())).unwrap());
        let extra: Vec<Q> = slots.breakpoints(lo, hi).into_iter().map(qu).collect();
        let u = integer_candidates(prev, &extra, lo, hi)
            .into_iter()
            .rev()
            .find(|&u| prev.eval(&qu(u)) + val * (&st - slots.s_int(u)) == target)
            .expect("an integral predecessor exists");
        counts[j] = t - u;
        t = u;
    }
    TailPlan { value, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::{q, qi};

    /// Exhaustive oracle on explicit positions.
    fn brute(vals: &[Q], slots: &Slots) -> Q {
        let n = vals.len();
        let mut best = Q::zero();
        for m in 0u32..1 << n {
            let mut s = 0u64;
            let mut acc = Q::zero();
            for (i, v) in vals.iter().enumerate() {
                if m >> i & 1 == 1 {
                    s += 1;
                    if s > slots.t_max {
                        acc = Q::from_integer((-1000).into());
                        break;
                    }
                    acc += v * slots.weight(s);
                }
            }
            best = qmax(best, acc);
        }
        best
    }

    #[test]
    fn tail_matches_brute_force() {
        let cases: Vec<Vec<i64>> = vec![
            vec![1, 1, 2, 2, 2, 1],
            vec![2, -1, 3, 0, 3, 3, 1],
            vec![0, 0, 5, 5, -2, 4, 4, 4],
            vec![3, 1, 1, 1, 3, 3, 0, 3, 1],
        ];
        for vals in cases {
            let vq: Vec<Q> = vals.iter().map(|&x| qi(x)).collect();
            for (a, b, tm) in [(1u64, 2u64, 9u64), (2, 3, 9), (1, 1, 4), (2, 5, 6), (3, 1, 9)] {
                let slots = Slots::new(&a.into(), &b.into(), q(1, 2), q(1, 5), tm.min(vals.len() as u64));
                let mut zones: Vec<(Q, u64)> = vec![];
                for v in &vq {
                    match zones.last_mut() {
                        Some((z, l)) if z == v => *l += 1,
                        _ => zones.push((v.clone(), 1)),
                    }
                }
                let plan = tail_max(&zones, &slots);
                assert_eq!(plan.value, brute(&vq, &slots), "{vals:?} {a} {b} {tm}");
                // the plan re-evaluates to the value
                let mut s = 0;
                let mut acc = Q::zero();
                for ((v, _), c) in zones.iter().zip(&plan.counts) {
                    acc += v * (slots.s_int(s + c) - slots.s_int(s));
                    s += c;
                }
                assert_eq!(acc, plan.value);
            }
        }
    }

    #[test]
    fn simplify_drops_collinear() {
        let mut f = Pl { pts: vec![(qi(0), qi(0)), (qi(1), qi(1)), (qi(2), qi(2)), (qi(3), qi(2))] };
        f.simplify();
        assert_eq!(f.pts.len(), 3);
        assert_eq!(f.eval(&q(5, 2)), qi(2));
        assert_eq!(f.eval(&q(1, 2)), q(1, 2));
    }
}
