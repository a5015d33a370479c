//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `max c·x` subject to `A x ≤ b` with `x` free; small problems only.

use num_traits::{One, Signed, Zero};
use unclab_core::rational::Q;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub n: usize,
    pub rows: Vec<(Vec<Q>, Q)>,
}

impl Lp {
    pub fn new(n: usize) -> Lp {
        Lp { n, rows: vec![] }
    }

    /// `coeffs · x ≤ rhs`
    pub fn le(&mut self, coeffs: Vec<Q>, rhs: Q) {
        debug_assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs, rhs));
    }

    /// `coeffs · x ≥ rhs`
    pub fn ge(&mut self, coeffs: Vec<Q>, rhs: Q) {
        self.le(coeffs.into_iter().map(|c| -c).collect(), -rhs);
    }

    pub fn maximize(&self, c: &[Q]) -> LpOutcome {
        match self.feasible() {
            Some(mut s) => s.maximize(c),
            None => LpOutcome::Infeasible,
        }
    }

    /// Runs phase 1 once; the returned solver re-optimises any number of
    /// objectives from the current feasible basis.
    pub fn feasible(&self) -> Option<Solver> {
        let mut t = Tableau::build(self);
        t.phase_one().then_some(Solver(t))
    }
}

pub struct Solver(Tableau);

impl Solver {
    pub fn maximize(&mut self, c: &[Q]) -> LpOutcome {
        self.0.phase_two(c)
    }
}

/// Columns: `x⁺` (n), `x⁻` (n), slacks (m), artificials (one per row with
/// negative right-hand side).
struct Tableau {
    n: usize,
    a: Vec<Vec<Q>>,
    b: Vec<Q>,
    basis: Vec<usize>,
    n_cols: usize,
    first_art: usize,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let (n, m) = (lp.n, lp.rows.len());
        let n_arts = lp.rows.iter().filter(|(_, r)| r.is_negative()).count();
        let first_art = 2 * n + m;
        let n_cols = first_art + n_arts;
        let mut a = vec![vec![Q::zero(); n_cols]; m];
        let mut b = vec![Q::zero(); m];
        let mut basis = vec![0; m];
        let mut art = first_art;
        for (r, (coeffs, rhs)) in lp.rows.iter().enumerate() {
            let flip = rhs.is_negative();
            let s = if flip { -Q::one() } else { Q::one() };
            for j in 0..n {
                a[r][j] = &coeffs[j] * &s;
                a[r][n + j] = -&coeffs[j] * &s;
            }
            a[r][2 * n + r] = s.clone();
            b[r] = rhs * &s;
            if flip {
                a[r][art] = Q::one();
                basis[r] = art;
                art += 1;
            } else {
                basis[r] = 2 * n + r;
            }
        }
        Tableau { n, a, b, basis, n_cols, first_art }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for x in self.a[r].iter_mut() {
                *x /= &p;
            }
            self.b[r] /= &p;
        }
        let prow = self.a[r].clone();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (x, y) in self.a[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.b[i] -= &f * &pb;
        }
        self.basis[r] = c;
    }

    /// Maximises `cost · columns` over the current basis; `allowed` bounds
    /// the entering columns. Returns false when unbounded.
    fn run(&mut self, cost: &[Q], allowed: usize) -> bool {
        loop {
            // reduced costs r_j = c_j - c_B B^{-1} A_j
            let cb: Vec<Q> = self.basis.iter().map(|&j| cost[j].clone()).collect();
            let mut enter = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rj = cost[j].clone();
                for (i, c) in cb.iter().enumerate() {
                    if !c.is_zero() && !self.a[i][j].is_zero() {
                        rj -= c * &self.a[i][j];
                    }
                }
                if rj.is_positive() {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.a.len() {
                if self.a[i][c].is_positive() {
                    let ratio = &self.b[i] / &self.a[i][c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }

    fn phase_one(&mut self) -> bool {
        if self.first_art < self.n_cols {
            let mut cost = vec![Q::zero(); self.n_cols];
            for x in cost.iter_mut().skip(self.first_art) {
                *x = -Q::one();
            }
            self.run(&cost, self.n_cols);
            let infeas: Q = (0..self.a.len()).filter(|&i| self.basis[i] >= self.first_art).map(|i| self.b[i].clone()).sum();
            if infeas.is_positive() {
                return false;
            }
            // drive remaining zero-level artificials out of the basis
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_art {
                    if let Some(j) = (0..self.first_art).find(|&j| !self.a[i][j].is_zero()) {
                        self.pivot(i, j);
                    } else {
                        self.a.remove(i);
                        self.b.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
                i += 1;
            }
        }
        true
    }

    fn phase_two(&mut self, c: &[Q]) -> LpOutcome {
        let n = self.n;
        let mut cost = vec![Q::zero(); self.n_cols];
        for j in 0..n {
            cost[j] = c[j].clone();
            cost[n + j] = -c[j].clone();
        }
        if !self.run(&cost, self.first_art) {
            return LpOutcome::Unbounded;
        }
        let mut col = vec![Q::zero(); self.n_cols];
        for (i, &j) in self.basis.iter().enumerate() {
            col[j] = self.b[i].clone();
        }
        let x: Vec<Q> = (0..n).map(|j| &col[j] - &col[n + j]).collect();
        let value = x.iter().zip(c).map(|(x, c)| x * c).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::{q, qi};

    #[test]
    fn small_programs() {
        // max x + y, x + 2y <= 4, 3x + y <= 6, x, y >= 0  → (8/5, 6/5), 14/5
        let mut lp = Lp::new(2);
        lp.le(vec![qi(1), qi(2)], qi(4));
        lp.le(vec![qi(3), qi(1)], qi(6));
        lp.ge(vec![qi(1), qi(0)], qi(0));
        lp.ge(vec![qi(0), qi(1)], qi(0));
        assert_eq!(lp.maximize(&[qi(1), qi(1)]), LpOutcome::Optimal { x: vec![q(8, 5), q(6, 5)], value: q(14, 5) });
        // free variables and a lower bound: max -x s.t. x >= 3/2
        let mut lp = Lp::new(1);
        lp.ge(vec![qi(1)], q(3, 2));
        assert_eq!(lp.maximize(&[qi(-1)]), LpOutcome::Optimal { x: vec![q(3, 2)], value: q(-3, 2) });
        assert_eq!(lp.maximize(&[qi(1)]), LpOutcome::Unbounded);
        lp.le(vec![qi(1)], qi(1));
        assert_eq!(lp.maximize(&[qi(1)]), LpOutcome::Infeasible);
    }

    #[test]
    fn degenerate_program_terminates() {
        // classic cycling example under the textbook rule
        let mut lp = Lp::new(4);
        lp.le(vec![q(1, 2), q(-11, 2), q(-5, 2), qi(9)], qi(0));
        lp.le(vec![q(1, 2), q(-3, 2), q(-1, 2), qi(1)], qi(0));
        lp.le(vec![qi(1), qi(0), qi(0), qi(0)], qi(1));
        for j in 0..4 {
            let mut e = vec![qi(0); 4];
            e[j] = qi(1);
            lp.ge(e, qi(0));
        }
        match lp.maximize(&[qi(10), qi(-57), qi(-9), qi(-24)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, qi(1)),
            o => panic!("{o:?}"),
        }
    }
}
