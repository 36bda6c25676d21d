//! Explicit stationary and travelling solutions and their verifiers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{add_planetary_vorticity, FlowOps};
use crate::sht::{sin_lat_coefficient, GridField, SpectralField, Transform, TruncationSpec};
use crate::stability::{arnold_theorem_check, ArnoldVerdict};

/// The nonlinearity `F` of `Δψ + 2ω sinθ = F(ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VorticityFunction {
    /// `F(ψ) = slope ψ`.
    Linear { slope: f64 },
    /// `F(ψ) = −((1−ε²)/2)(2 sinh ψ + sinh 2ψ)`.
    LogFamily { epsilon: f64 },
    /// `F(ψ) = ε²(1+ψ) − (1+ψ) ln²(1+ψ) − 2(1+ψ) ln(1+ψ)`, for `ψ > −1`.
    ExpFamily { epsilon: f64 },
}

impl VorticityFunction {
    pub fn value(&self, psi: f64) -> f64 {
        match *self {
            Self::Linear { slope } => slope * psi,
            Self::LogFamily { epsilon } => -0.5 * (1.0 - epsilon * epsilon) * (2.0 * psi.sinh() + (2.0 * psi).sinh()),
            Self::ExpFamily { epsilon } => {
                let w = 1.0 + psi;
                let l = w.ln();
                epsilon * epsilon * w - w * l * l - 2.0 * w * l
            }
        }
    }

    pub fn derivative(&self, psi: f64) -> f64 {
        match *self {
            Self::Linear { slope } => slope,
            Self::LogFamily { epsilon } => -(1.0 - epsilon * epsilon) * (psi.cosh() + (2.0 * psi).cosh()),
            Self::ExpFamily { epsilon } => {
                let l = (1.0 + psi).ln();
                epsilon * epsilon - l * l - 4.0 * l - 2.0
            }
        }
    }

    /// A primitive `𝓕` with `𝓕′ = F`.
    pub fn primitive(&self, psi: f64) -> f64 {
        match *self {
            Self::Linear { slope } => 0.5 * slope * psi * psi,
            Self::LogFamily { epsilon } => {
                -0.5 * (1.0 - epsilon * epsilon) * (2.0 * psi.cosh() + 0.5 * (2.0 * psi).cosh())
            }
            Self::ExpFamily { epsilon } => {
                let w = 1.0 + psi;
                let l = w.ln();
                let w2 = w * w;
                0.5 * epsilon * epsilon * w2 - 0.5 * w2 * l * l - 0.5 * w2 * l + 0.25 * w2
            }
        }
    }

    /// Largest deviation of `F′` from centred differences of `F` on `[lo, hi]`.
    pub fn derivative_defect(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let h = 1e-5;
        (0..=samples)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / samples as f64;
                let fd = (self.value(x + h) - self.value(x - h)) / (2.0 * h);
                (fd - self.derivative(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `c = 2ω/(j(j+1)) + α (j(j+1) − 2)/(j(j+1))`.
pub fn rossby_haurwitz_speed(j: usize, alpha: f64, omega: f64) -> f64 {
    let n = (j * (j + 1)) as f64;
    2.0 * omega / n + alpha * (n - 2.0) / n
}

/// `α = 2ω / (2 − j(j+1))`, the value making the wave stationary (`j >= 2`).
pub fn stationary_alpha(j: usize, omega: f64) -> Result<f64> {
    if j < 2 {
        return Err(Error::Parameter("stationary waves need j >= 2".into()));
    }
    Ok(2.0 * omega / (2.0 - (j * (j + 1)) as f64))
}

/// `ψ = α sinθ + Y` with `Y` of pure degree `j`, and its azimuthal speed.
pub fn make_rossby_haurwitz(j: usize, alpha: f64, y: &SpectralField, omega: f64) -> Result<(SpectralField, f64)> {
    if j == 0 || j > y.lmax() {
        return Err(Error::Parameter(format!("degree {j} unavailable at lmax {}", y.lmax())));
    }
    if !y.is_real_valued() || y.reality_defect() > 1e-14 {
        return Err(Error::Parameter("Y must be real-valued".into()));
    }
    let off = y.band(j, j);
    let mixing = (y - &off).l2_norm();
    if mixing > 1e-14 * y.l2_norm().max(1.0) {
        return Err(Error::Parameter(format!("Y mixes degrees other than {j} (norm {mixing:e})")));
    }
    let mut psi = off;
    psi.coeffs_mut()[crate::sht::index(1, 0)] += Complex64::new(alpha * sin_lat_coefficient(), 0.0);
    Ok((psi, rossby_haurwitz_speed(j, alpha, omega)))
}

/// The travelling wave `α sinθ + Y(φ + ct, θ)` at time `t`; positive `c` drifts westward.
pub fn rossby_haurwitz_at(psi0: &SpectralField, speed: f64, t: f64) -> SpectralField {
    let mut out = psi0.clone();
    for l in 0..=psi0.lmax() {
        for m in -(l as i64)..=l as i64 {
            out.coeffs_mut()[crate::sht::index(l, m)] *= Complex64::from_polar(1.0, m as f64 * speed * t);
        }
    }
    out
}

/// A solution materialized on a grid and projected, with the power it loses beyond `lmax`.
#[derive(Debug, Clone)]
pub struct ExplicitSolution {
    pub psi: SpectralField,
    pub vf: VorticityFunction,
    pub omega: f64,
    /// Squared L² norm of the degrees `lmax+1 ..= lmax+16` of the exact function.
    pub tail_power: f64,
}

/// `ln((1 + εx)/(1 − εx))`, `x = cosθ sin(φ − φ0)`.
pub fn log_solution_value(epsilon: f64, phi0: f64, phi: f64, theta: f64) -> f64 {
    let x = epsilon * theta.cos() * (phi - phi0).sin();
    ((1.0 + x) / (1.0 - x)).ln()
}

/// `exp(ε cosθ sin(φ − φ0)) − 1`.
pub fn exp_solution_value(epsilon: f64, phi0: f64, phi: f64, theta: f64) -> f64 {
    (epsilon * theta.cos() * (phi - phi0).sin()).exp_m1()
}

fn project(lmax: usize, f: impl Fn(f64, f64) -> f64 + Copy) -> Result<(SpectralField, f64)> {
    let wide = lmax + 16;
    let tr = Transform::new(TruncationSpec::dealiased(wide))?;
    let full = tr.analysis(&tr.sample(f))?;
    let tail = full.band(lmax + 1, wide).norm_sqr();
    Ok((full.resized(lmax), tail))
}

/// The non-zonal solution of the logarithmic family (the rotated zonal profile
/// `ln((1 + ε sinθ)/(1 − ε sinθ))`), `0 < ε < 1`.
pub fn make_log_solution(epsilon: f64, phi0: f64, lmax: usize) -> Result<ExplicitSolution> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let (psi, tail_power) = project(lmax, move |p, t| log_solution_value(epsilon, phi0, p, t))?;
    Ok(ExplicitSolution { psi, vf: VorticityFunction::LogFamily { epsilon }, omega: 0.0, tail_power })
}

/// The non-zonal solution of the exponential family, `ε > 0`.
pub fn make_exp_solution(epsilon: f64, phi0: f64, lmax: usize) -> Result<ExplicitSolution> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let (psi, tail_power) = project(lmax, move |p, t| exp_solution_value(epsilon, phi0, p, t))?;
    Ok(ExplicitSolution { psi, vf: VorticityFunction::ExpFamily { epsilon }, omega: 0.0, tail_power })
}

/// Zonal profile `Σ a_l Y_l^0`, `a[0]` multiplying `Y_1^0`.
pub fn make_zonal(lmax: usize, a: &[f64]) -> Result<SpectralField> {
    if a.len() > lmax {
        return Err(Error::Parameter(format!("{} degrees exceed lmax {lmax}", a.len())));
    }
    let mut psi = SpectralField::zeros(lmax, true);
    for (k, &v) in a.iter().enumerate() {
        psi.set(k + 1, 0, Complex64::new(v, 0.0));
    }
    Ok(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub l2: f64,
    pub linf: f64,
}

/// Norms of `J(ψ, Δψ + 2ω sinθ)` on the dealiased grid; stationary means both below `tol`.
pub fn verify_stationary(ops: &FlowOps, psi: &SpectralField, omega: f64) -> Result<ResidualNorms> {
    let mut q = psi.laplacian();
    add_planetary_vorticity(&mut q, omega);
    let j = ops.bracket_grid(psi, &q)?;
    Ok(grid_norms(ops.transform(), &j))
}

/// Norms of `Δψ + 2ω sinθ − F(ψ)` on the transform's grid.
pub fn elliptic_residual(tr: &Transform, psi: &SpectralField, vf: &VorticityFunction, omega: f64) -> Result<ResidualNorms> {
    let mut q = psi.laplacian();
    add_planetary_vorticity(&mut q, omega);
    let qg = tr.synthesis(&q)?;
    let pg = tr.synthesis(psi)?;
    let r = qg.zip_map(&pg, |q, p| q - vf.value(p));
    Ok(grid_norms(tr, &r))
}

fn grid_norms(tr: &Transform, g: &GridField<f64>) -> ResidualNorms {
    ResidualNorms { l2: tr.integrate(&g.map(|x| x * x)).sqrt(), linf: g.max_abs() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArnoldRange {
    pub min: f64,
    pub max: f64,
    pub verdict: ArnoldVerdict,
}

/// Extremes of `F′(ψ)` over the grid values of `ψ`, with the Arnold verdict.
pub fn arnold_range(tr: &Transform, vf: &VorticityFunction, psi: &SpectralField) -> Result<ArnoldRange> {
    let g = tr.synthesis(psi)?;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in &g.values {
        let d = vf.derivative(p);
        min = min.min(d);
        max = max.max(d);
    }
    Ok(ArnoldRange { min, max, verdict: arnold_theorem_check(min, max) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speeds() {
        assert!(rossby_haurwitz_speed(2, -0.5 * 1.7, 1.7).abs() < 1e-15);
        assert!((rossby_haurwitz_speed(1, 2.3, 2.3) - 2.3).abs() < 1e-15);
        assert!((rossby_haurwitz_speed(3, 0.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((stationary_alpha(2, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert!(stationary_alpha(1, 1.0).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        for vf in [
            VorticityFunction::Linear { slope: -6.0 },
            VorticityFunction::LogFamily { epsilon: 0.3 },
            VorticityFunction::ExpFamily { epsilon: 0.2 },
        ] {
            assert!(vf.derivative_defect(-0.5, 0.5, 50) < 1e-6);
            let h = 1e-5;
            for x in [-0.4, 0.0, 0.3] {
                let fd = (vf.primitive(x + h) - vf.primitive(x - h)) / (2.0 * h);
                assert!((fd - vf.value(x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn small_epsilon_slopes() {
        let vf = VorticityFunction::LogFamily { epsilon: 0.3 };
        assert!((vf.derivative(0.0) + 2.0 * (1.0 - 0.09)).abs() < 1e-15);
        let vf = VorticityFunction::ExpFamily { epsilon: 1e-4 };
        assert!((vf.derivative(0.0) + 2.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_mixed_degrees() {
        let mut y = SpectralField::real_harmonic(5, 2, 1).unwrap();
        y.add_real_harmonic(3, 0, 0.1);
        assert!(make_rossby_haurwitz(2, 0.0, &y, 1.0).is_err());
        assert!(make_log_solution(1.2, 0.0, 8).is_err());
        assert!(make_exp_solution(0.0, 0.0, 8).is_err());
    }

    #[test]
    fn stationary_wave_has_vanishing_bracket() {
        let omega = 1.3;
        let alpha = stationary_alpha(2, omega).unwrap();
        let mut y = SpectralField::real_harmonic(10, 2, 1).unwrap();
        y.add_real_harmonic(2, -2, 0.4);
        let (psi, c) = make_rossby_haurwitz(2, alpha, &y, omega).unwrap();
        assert!(c.abs() < 1e-15);
        let ops = FlowOps::new(10).unwrap();
        let r = verify_stationary(&ops, &psi, omega).unwrap();
        assert!(r.linf < 1e-12, "{r:?}");
    }
}
