//! Certified lower bounds `‖x⁺‖/‖x‖` on concrete layouts.

use num_traits::One;
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, Error, Result};
use unclab_core::rational::{fmt_q, q, Q};
use unclab_core::Caps;

use crate::layout::{build_layout, build_vectors, is_threshold_projection, EltonLayout, Variant};
use crate::maximize::{elton_norm, reverify, witness_functional, EltonNorm, MaxMethod};
use crate::params::{case_bounds, validate_params, CaseBounds, EltonParams, ParamCheck};
use crate::runvec::RunVector;

/// Universes up to this size are also re-checked against an explicit sparse functional.
const SPARSE_RECHECK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KCertificate {
    pub params: EltonParams,
    pub check: ParamCheck,
    pub layout: EltonLayout,
    pub case_bounds: CaseBounds,
    #[serde(with = "unclab_core::rational::qser")]
    pub x_star_on_plus: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub x_star_on_x: Q,
    pub norm_plus: EltonNorm,
    pub norm_x: EltonNorm,
    #[serde(with = "unclab_core::rational::qser")]
    pub ratio: Q,
    pub within_case_bound: bool,
    pub reverified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiCertificate {
    pub params: EltonParams,
    #[serde(with = "unclab_core::rational::qser")]
    pub alpha: Q,
    pub layout: EltonLayout,
    #[serde(with = "unclab_core::rational::qser")]
    pub y_star_on_plus: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub y_star_on_y: Q,
    pub norm_plus: EltonNorm,
    pub norm_y: EltonNorm,
    #[serde(with = "unclab_core::rational::qser")]
    pub ratio: Q,
    /// `n1/(2 n2) + 2^{-K}`
    #[serde(with = "unclab_core::rational::qser")]
    pub eps: Q,
    #[serde(with = "unclab_core::rational::qser")]
    pub target: Q,
    pub exceeds_target: bool,
    /// `y⁺` is the projection of `y` onto `{|y_i| ≥ 2/3}`; needs `alpha < 2/3`
    pub threshold_identity: bool,
    pub reverified: bool,
}

fn require_valid(p: &EltonParams) -> Result<ParamCheck> {
    let check = validate_params(p);
    if !check.valid {
        return Err(Error::Precondition(format!("invalid parameters: {}", check.diagnostics.join("; "))));
    }
    Ok(check)
}

/// Both the run-count arithmetic and, for small universes, an explicit
/// sparse functional reproduce the reported value.
pub fn norm_reverifies(layout: &EltonLayout, v: &RunVector, n: &EltonNorm) -> Result<bool> {
    let w = &n.functional.witness;
    let mut ok = reverify(&layout.family, v, w)? == n.functional.value && n.sup == v.sup();
    if v.universe <= SPARSE_RECHECK {
        let f = witness_functional(&layout.family, w, SPARSE_RECHECK)?;
        ok &= f.dot(&v.to_sparse(SPARSE_RECHECK)?) == n.functional.value;
    }
    Ok(ok)
}

pub fn k_lower_certificate(p: &EltonParams, m1: u64, m2: u64, caps: &Caps) -> Result<KCertificate> {
    let check = require_valid(p)?;
    let layout = build_layout(p, m1, m2, caps)?;
    let vs = build_vectors(&layout, &Variant::Standard)?;
    let f = &layout.family;
    let norm_plus = elton_norm(f, &vs.x_plus, MaxMethod::StructuredDp, caps)?;
    let norm_x = elton_norm(f, &vs.x, MaxMethod::StructuredDp, caps)?;
    let bounds = case_bounds(p)?;
    let reverified = norm_reverifies(&layout, &vs.x_plus, &norm_plus)? && norm_reverifies(&layout, &vs.x, &norm_x)?;
    Ok(KCertificate {
        params: p.clone(),
        check,
        ratio: &norm_plus.value / &norm_x.value,
        within_case_bound: norm_x.value <= bounds.max,
        case_bounds: bounds,
        x_star_on_plus: vs.x_star_on_plus,
        x_star_on_x: vs.x_star_on_x,
        layout,
        norm_plus,
        norm_x,
        reverified,
    })
}

/// Admissible `alpha` range for the quasi-greedy variant.
pub fn default_alpha_window() -> (Q, Q) {
    (q(1, 2), Q::one())
}

pub fn quasi_certificate(p: &EltonParams, alpha: &Q, m1: u64, m2: u64, window: &(Q, Q), caps: &Caps) -> Result<QuasiCertificate> {
    require_valid(p)?;
    if *alpha < window.0 || *alpha > window.1 {
        return domain(format!("alpha = {} outside [{}, {}]", fmt_q(alpha), fmt_q(&window.0), fmt_q(&window.1)));
    }
    let layout = build_layout(p, m1, m2, caps)?;
    let vs = build_vectors(&layout, &Variant::Quasi { alpha: alpha.clone() })?;
    let f = &layout.family;
    let norm_plus = elton_norm(f, &vs.x_plus, MaxMethod::StructuredDp, caps)?;
    let norm_y = elton_norm(f, &vs.x, MaxMethod::StructuredDp, caps)?;
    let reverified = norm_reverifies(&layout, &vs.x_plus, &norm_plus)? && norm_reverifies(&layout, &vs.x, &norm_y)?;
    let ratio = &norm_plus.value / &norm_y.value;
    let eps = p.smallness();
    let target = q(8, 7) - &eps;
    Ok(QuasiCertificate {
        params: p.clone(),
        alpha: alpha.clone(),
        threshold_identity: is_threshold_projection(&vs.x, &vs.x_plus, &q(2, 3)),
        exceeds_target: ratio > target,
        y_star_on_plus: vs.x_star_on_plus,
        y_star_on_y: vs.x_star_on_x,
        layout,
        norm_plus,
        norm_y,
        ratio,
        eps,
        target,
        reverified,
    })
}

/// Valid parameter sets with `n2` and `K` increasing, each `eps` twice its floor.
pub fn parameter_ladder() -> Vec<EltonParams> {
    [(1, 8, 4), (1, 16, 5), (1, 32, 6), (1, 64, 7), (1, 64, 8)]
        .into_iter()
        .map(|(n1, n2, k)| {
            let mut p = EltonParams::new(n1, n2, k, Q::one());
            p.eps = p.smallness() * Q::from_integer(2.into());
            p
        })
        .collect()
}
