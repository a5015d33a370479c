//! Parameters `(n1, n2, K, eps)` of the Elton-type construction.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use unclab_core::error::{Error, Result};
use unclab_core::rational::{fmt_q, pow2, qmax, Q};

fn qu(x: u64) -> Q {
    Q::from_integer(x.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EltonParams {
    pub n1: u64,
    pub n2: u64,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(with = "unclab_core::rational::qser")]
    pub eps: Q,
}

impl EltonParams {
    pub fn new(n1: u64, n2: u64, k: u32, eps: Q) -> EltonParams {
        EltonParams { n1, n2, k, eps }
    }

    /// `n1/(2 n2) + 2^{-K}`, the least admissible `eps`.
    pub fn smallness(&self) -> Q {
        Q::new(self.n1.into(), (2 * self.n2).into()) + pow2(-(self.k as i64))
    }

    /// `(2 n1 + n2) / (n1 2^K)`.
    pub fn growth(&self) -> Q {
        qu(2 * self.n1 + self.n2) / (qu(self.n1) * pow2(self.k as i64))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCheck {
    pub valid: bool,
    #[serde(with = "unclab_core::rational::qser")]
    pub smallness: Q,
    pub smallness_ok: bool,
    #[serde(with = "unclab_core::rational::qser")]
    pub growth: Q,
    pub growth_ok: bool,
    pub diagnostics: Vec<String>,
}

pub fn validate_params(p: &EltonParams) -> ParamCheck {
    let mut diagnostics = vec![];
    let mut structural = true;
    if p.n1 == 0 || p.n2 == 0 || p.k == 0 {
        diagnostics.push("n1, n2 and K must be positive".to_string());
        return ParamCheck {
            valid: false,
            smallness: Q::zero(),
            smallness_ok: false,
            growth: Q::zero(),
            growth_ok: false,
            diagnostics,
        };
    }
    if p.n1 >= p.n2 {
        structural = false;
        diagnostics.push(format!("n1 < n2 fails: {} >= {}", p.n1, p.n2));
    }
    if p.eps <= Q::zero() || p.eps >= Q::one() {
        structural = false;
        diagnostics.push(format!("eps = {} is not in (0, 1)", fmt_q(&p.eps)));
    }
    let smallness = p.smallness();
    let smallness_ok = smallness < p.eps;
    diagnostics.push(format!(
        "n1/(2 n2) + 2^-K = {} {} eps = {}",
        fmt_q(&smallness),
        if smallness_ok { "<" } else { ">=" },
        fmt_q(&p.eps)
    ));
    let growth = p.growth();
    let growth_ok = growth < Q::one();
    diagnostics.push(format!("(2 n1 + n2)/(n1 2^K) = {} {} 1", fmt_q(&growth), if growth_ok { "<" } else { ">=" }));
    ParamCheck { valid: structural && smallness_ok && growth_ok, smallness, smallness_ok, growth, growth_ok, diagnostics }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseBounds {
    #[serde(with = "unclab_core::rational::qvec")]
    pub cases: Vec<Q>,
    #[serde(with = "unclab_core::rational::qser")]
    pub max: Q,
}

/// Upper bounds for `‖x‖` over the four position cases of `(l1, l2)`.
pub fn case_bounds(p: &EltonParams) -> Result<CaseBounds> {
    let check = validate_params(p);
    if !check.valid {
        return Err(Error::Precondition(format!("invalid parameters: {}", check.diagnostics.join("; "))));
    }
    let ratio = Q::new(p.n1.into(), (2 * p.n2).into());
    let cases = vec![
        Q::one() + &ratio,
        Q::one(),
        Q::new(3.into(), 4.into()) + qu(2 * p.n1 + p.n2) / (qu(4 * p.n1) * pow2(p.k as i64)),
        Q::one() + ratio + pow2(-(p.k as i64)),
    ];
    let max = cases.iter().cloned().fold(Q::zero(), qmax);
    Ok(CaseBounds { cases, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use unclab_core::rational::{q, qi};

    #[test]
    fn validation_examples() {
        let c = validate_params(&EltonParams::new(1, 8, 4, q(13, 100)));
        assert!(c.valid);
        assert_eq!((c.smallness, c.growth), (q(1, 8), q(10, 16)));
        let c = validate_params(&EltonParams::new(1, 1, 1, q(1, 2)));
        assert!(!c.valid);
        assert_eq!(c.smallness, qi(1));
        assert!(!c.smallness_ok);
        let c = validate_params(&EltonParams::new(1, 64, 8, q(1, 50)));
        assert!(c.valid);
        assert_eq!(c.smallness, q(3, 256));
        assert!(!validate_params(&EltonParams::new(0, 8, 4, q(1, 2))).valid);
    }

    #[test]
    fn case_examples() {
        let b = case_bounds(&EltonParams::new(1, 8, 4, q(13, 100))).unwrap();
        assert_eq!(b.cases, vec![q(17, 16), qi(1), q(3, 4) + q(10, 64), q(9, 8)]);
        assert_eq!(b.max, q(9, 8));
        let b = case_bounds(&EltonParams::new(1, 64, 8, q(1, 50))).unwrap();
        assert_eq!(b.cases[3], q(259, 256));
        assert_eq!(b.cases[1], qi(1));
        assert!(case_bounds(&EltonParams::new(1, 1, 1, q(1, 2))).is_err());
    }
}
