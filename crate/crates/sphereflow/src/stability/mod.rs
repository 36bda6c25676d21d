//! Linear and nonlinear stability analyses of zonal and travelling-wave flows.

mod modal;
mod quintic;
mod zonal;

pub use modal::{
    default_perturbation, instability_separation_bound, rh2_modal_experiment, separation_experiment,
    separation_sup_corrected, Rh2Config, Rh2Report, Rh2Sample, SeparationConfig, SeparationReport,
};
pub use quintic::{
    fit_quintic_profile, fit_quintic_profile_f64, theorem42_check, theorem42_check_exact, ExactQuintic, Quadratic,
    QuinticConstraints, QuinticFit, QuinticZonalProfile, Rational, QuadraticTestReport, ZonalVerdict,
};
pub use zonal::{
    critical_amplitude, fjortoft_criterion, rayleigh_criterion, zonal_operator_spectrum, CriterionVerdict,
    CriticalAmplitude, EigenReport, FjortoftReport, RayleighReport, ZonalProfile,
};

use serde::{Deserialize, Serialize};

/// Second eigenvalue of the Laplacian on the unit sphere with its sign, `−l(l+1)` at `l = 2`.
pub const ARNOLD_THRESHOLD: f64 = -6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArnoldVerdict {
    Stable,
    Critical,
    Inconclusive,
}

/// Verdict for a flow whose vorticity function has `min ≤ F′ ≤ max` along the flow.
pub fn arnold_theorem_check(min: f64, max: f64) -> ArnoldVerdict {
    let tol = 1e-9 * ARNOLD_THRESHOLD.abs();
    if (min - ARNOLD_THRESHOLD).abs() <= tol {
        ArnoldVerdict::Critical
    } else if min > ARNOLD_THRESHOLD && max < 0.0 {
        ArnoldVerdict::Stable
    } else {
        ArnoldVerdict::Inconclusive
    }
}
