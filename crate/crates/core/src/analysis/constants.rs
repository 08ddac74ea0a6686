//! Constants of the absorbing-ball estimate.

use crate::error::{Error, Result};
use crate::model::{MaterialLaw, ProblemSpec};
use crate::poincare::poincare_constant;

use super::inequalities::ghidaglia_envelope;

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryConstants {
    /// Discrete Poincare constant of `W^{1,m}_0`.
    pub c13: f64,
    /// Bound on the source term against `int |alpha(v)|^{p+1}`.
    pub c14: f64,
    /// `min(lambda c13 / l1, lambda)`.
    pub c15: f64,
    pub lambda: f64,
    pub l1: f64,
    pub m: f64,
    /// Time at which the decaying part of the radius envelope drops to its
    /// stationary part; `NaN` when `m <= 2` or `c14 = 0`.
    pub eta: f64,
    /// Empirical contraction exponent, filled in by the uniqueness runs.
    pub fitted_k: Option<f64>,
}

impl TheoryConstants {
    /// `(name, value, formula)` rows for reporting.
    pub fn rows(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("lambda", self.lambda, "inf alpha'"),
            ("L1", self.l1, "sup alpha'"),
            ("C13", self.c13, "min over v of int|grad v|^m / int|v|^m (discrete)"),
            ("C14", self.c14, "kappa f_max / (sigma |Omega|)^2 * max(1, |Omega|^(1/2))"),
            ("C15", self.c15, "min(lambda C13 / L1, lambda)"),
            (
                "eta",
                self.eta,
                "s with (C15 (m-2) s)^(-1/(m-2)) = (C14/C15)^(1/(m-1))",
            ),
            ("fitted_K", self.fitted_k.unwrap_or(f64::NAN), "max_s ln(d(s)/d(0)) / s"),
        ]
    }
}

pub fn compute_theory_constants(spec: &ProblemSpec) -> Result<TheoryConstants> {
    spec.validate()?;
    let grid = spec.grid()?;
    let c13 = poincare_constant(&grid, spec.m)?;
    let lambda = spec.material.lambda_low();
    let l1 = spec.material.lip_l1();
    let c15 = (lambda * c13 / l1).min(lambda);
    let omega = grid.measure();
    let sigma = spec.source.sigma();
    let c14 = spec.kappa * spec.source.f_max() / (sigma * omega).powi(2) * omega.sqrt().max(1.0);
    let m = spec.m;
    let eta = if m > 2.0 && c14 > 0.0 {
        (c15 / c14).powf((m - 2.0) / (m - 1.0)) / (c15 * (m - 2.0))
    } else {
        f64::NAN
    };
    Ok(TheoryConstants {
        c13,
        c14,
        c15,
        lambda,
        l1,
        m,
        eta,
        fitted_k: None,
    })
}

/// `(C14/C15)^{1/(m-1)} + (C15 (m-2) s)^{-1/(m-2)}`.
pub fn absorbing_radius_rho_s(consts: &TheoryConstants, m: f64, s: f64) -> Result<f64> {
    if !(m > 2.0) {
        return Err(Error::InvalidExponent(m));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidSpec(format!("time must be positive, got {s}")));
    }
    Ok(ghidaglia_envelope(consts.c15, consts.c14, m - 1.0, s))
}

/// Radius of the `L^inf` ball containing `v` once `|alpha(v)| <= bound`.
pub fn absorbing_radius(law: &MaterialLaw, bound: f64) -> f64 {
    law.inverse(bound).abs().max(law.inverse(-bound).abs())
}
