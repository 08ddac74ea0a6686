//! Verifiers for the a priori inequalities and estimators for the long-time
//! objects (absorbing ball, omega-limit set) of the dissipative dynamics.

mod attractor;
mod constants;
mod inequalities;
pub mod ode;

pub use attractor::{
    contraction_estimate, hausdorff_semidistance, omega_limit_estimate, ContractionOutcome,
    SetNorm, SnapshotSet,
};
pub use constants::{
    absorbing_radius, absorbing_radius_rho_s, compute_theory_constants, TheoryConstants,
};
pub use inequalities::{
    ghidaglia_envelope, ghidaglia_violation, gronwall_check, tartar_check, tartar_constant,
    GronwallOutcome, TartarOutcome,
};

/// One pass/fail row of a verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub parameters: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for `<=` checks, `lhs - rhs` for `>=` checks.
    pub margin: f64,
    pub pass: bool,
}

impl Verdict {
    /// Passes when `lhs <= rhs`.
    pub fn le(check: impl Into<String>, parameters: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            check: check.into(),
            parameters: parameters.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0 && lhs.is_finite() && rhs.is_finite(),
        }
    }

    /// Passes when `lhs >= rhs`.
    pub fn ge(check: impl Into<String>, parameters: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            check: check.into(),
            parameters: parameters.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0 && lhs.is_finite() && rhs.is_finite(),
        }
    }
}
