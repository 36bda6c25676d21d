use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use sphereflow::dynamics::tendency;
use sphereflow::fields::FlowOps;
use sphereflow::sht::{index, Snapshot, SpectralField, Transform, TruncationSpec};
use sphereflow::solutions::{
    arnold_range, elliptic_residual, make_exp_solution, make_log_solution, make_rossby_haurwitz, make_zonal,
    verify_stationary, ArnoldRange, ExplicitSolution, ResidualNorms,
};

use crate::output::Outputs;
use crate::{Cli, CliError};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Logarithmic family, `0 < ε < 1`.
    Log,
    /// Exponential family, `ε > 0`.
    Exp,
    /// Travelling wave `α sinθ + Σ a_m R_j^m`.
    RossbyHaurwitz,
    /// `Σ a_l Y_l^0`.
    Zonal,
}

#[derive(Debug, Args, Serialize)]
pub struct MakeSolutionArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 31)]
    pub lmax: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0: f64,
    #[arg(long, default_value_t = 2)]
    pub j: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega: f64,
    /// `m:amplitude` pairs of the wave part.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "2:1")]
    pub terms: Vec<String>,
    /// Zonal coefficients of `Y_1^0, Y_2^0, ...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<f64>,
}

#[derive(Serialize)]
struct SolutionReport {
    family: Family,
    lmax: usize,
    /// Grid residual of the defining equation.
    residual: ResidualNorms,
    arnold: Option<ArnoldRange>,
    tail_power: Option<f64>,
    speed: Option<f64>,
}

fn parse_terms(terms: &[String]) -> Result<Vec<(i64, f64)>, CliError> {
    terms
        .iter()
        .map(|t| {
            let (m, a) = t.split_once(':').ok_or_else(|| CliError::config(format!("--terms: '{t}' is not m:amplitude")))?;
            let m = m.trim().parse().map_err(|_| CliError::config(format!("--terms: bad order in '{t}'")))?;
            let a = a.trim().parse().map_err(|_| CliError::config(format!("--terms: bad amplitude in '{t}'")))?;
            Ok((m, a))
        })
        .collect()
}

/// `‖tendency − c ∂_φ Δψ‖∞` over coefficients: the wave moves as `ψ(φ + ct)`.
fn travelling_residual(psi: &SpectralField, omega: f64, speed: f64) -> Result<ResidualNorms, CliError> {
    let ops = FlowOps::new(psi.lmax())?;
    let q = psi.laplacian();
    let t = tendency(&ops, &q, omega)?;
    let (mut l2, mut linf) = (0.0f64, 0.0f64);
    for l in 0..=psi.lmax() {
        for m in -(l as i64)..=l as i64 {
            let k = index(l, m);
            let expected = q.coeffs()[k] * Complex64::new(0.0, m as f64 * speed);
            let d = (t.coeffs()[k] - expected).norm();
            l2 += d * d;
            linf = linf.max(d);
        }
    }
    Ok(ResidualNorms { l2: l2.sqrt(), linf })
}

pub fn run(cli: &Cli, a: &MakeSolutionArgs) -> Result<(), CliError> {
    if a.lmax == 0 {
        return Err(CliError::config("--lmax must be positive"));
    }
    let tr = Transform::new(TruncationSpec::dealiased(a.lmax))?;
    let explicit = |s: ExplicitSolution| -> Result<(SpectralField, SolutionReport), CliError> {
        let residual = elliptic_residual(&tr, &s.psi, &s.vf, s.omega)?;
        let arnold = Some(arnold_range(&tr, &s.vf, &s.psi)?);
        let rep = SolutionReport { family: a.family, lmax: a.lmax, residual, arnold, tail_power: Some(s.tail_power), speed: None };
        Ok((s.psi, rep))
    };
    let (psi, report) = match a.family {
        Family::Log => explicit(make_log_solution(a.epsilon, a.phi0, a.lmax)?)?,
        Family::Exp => explicit(make_exp_solution(a.epsilon, a.phi0, a.lmax)?)?,
        Family::RossbyHaurwitz => {
            let mut y = SpectralField::zeros(a.lmax, true);
            for (m, amp) in parse_terms(&a.terms)? {
                if a.j == 0 || a.j > a.lmax || m.unsigned_abs() as usize > a.j {
                    return Err(CliError::config(format!("--terms: order {m} is invalid for degree {}", a.j)));
                }
                y.add_real_harmonic(a.j, m, amp);
            }
            let (psi, speed) = make_rossby_haurwitz(a.j, a.alpha, &y, a.omega)?;
            let residual = travelling_residual(&psi, a.omega, speed)?;
            (psi, SolutionReport { family: a.family, lmax: a.lmax, residual, arnold: None, tail_power: None, speed: Some(speed) })
        }
        Family::Zonal => {
            if a.coeffs.is_empty() {
                return Err(CliError::config("--coeffs is required for the zonal family"));
            }
            let psi = make_zonal(a.lmax, &a.coeffs)?;
            let residual = verify_stationary(&FlowOps::new(a.lmax)?, &psi, a.omega)?;
            (psi, SolutionReport { family: a.family, lmax: a.lmax, residual, arnold: None, tail_power: None, speed: Some(0.0) })
        }
    };
    let mut out = Outputs::new(&cli.out, "make-solution")?;
    out.config(a)?;
    let snap = Snapshot::new(0.0, psi);
    out.write("solution.bin", &snap.to_bytes())?;
    out.write("solution.json", (snap.to_json()? + "\n").as_bytes())?;
    out.write_json("solution_report.json", &report)?;
    out.finish()?;
    Ok(())
}
