use clap::{Args, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sphereflow::sht::SpectralField;
use sphereflow::stability::{
    default_perturbation, fit_quintic_profile, fjortoft_criterion, instability_separation_bound, rayleigh_criterion,
    rh2_modal_experiment, separation_experiment, theorem42_check_exact, zonal_operator_spectrum, EigenReport, FjortoftReport,
    QuinticConstraints, RayleighReport, Rational, Rh2Config, Rh2Report, SeparationConfig, SeparationReport, QuadraticTestReport,
    ZonalProfile,
};
use sphereflow::stratosphere::planet;

use crate::output::Outputs;
use crate::{Cli, CliError};

#[derive(Debug, Subcommand)]
pub enum StabilityCommand {
    /// Rayleigh and Fjørtoft criteria and the Galerkin spectrum of a zonal flow.
    Zonal(ZonalArgs),
    /// Perturbation experiment around `α sinθ + β Y_2^0`.
    Rh2(Rh2Args),
    /// Quintic wind fit of a planet and the resulting stability verdict.
    Planet(PlanetArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("profile").required(true).args(["sin_lat", "coeffs"])))]
pub struct ZonalArgs {
    /// Profile `α sinθ`.
    #[arg(long)]
    pub sin_lat: Option<f64>,
    /// Coefficients of `Y_1^0, Y_2^0, ...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega: f64,
    /// Zonal wavenumbers of the spectra.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub k: Vec<i64>,
    /// Galerkin basis size.
    #[arg(long, default_value_t = 64)]
    pub basis: usize,
    /// Extra values of γ at which to report the Fjørtoft quantity.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub gamma: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Rh2Args {
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    pub lmax: usize,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Seed for a random perturbation; without it a fixed deterministic one is used.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Values of `n` for the separation experiment on `α sinθ + β R_2^2`.
    #[arg(long, value_delimiter = ',')]
    pub separation: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub separation_lmax: usize,
    #[arg(long, default_value_t = 0.05)]
    pub separation_dt: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beat_periods: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanetArgs {
    #[arg(long)]
    pub name: String,
    /// Rotation parameter as an exact fraction `p/q`; defaults to the planet's printed value.
    #[arg(long)]
    pub omega: Option<String>,
}

pub fn run(cli: &Cli, cmd: &StabilityCommand) -> Result<(), CliError> {
    match cmd {
        StabilityCommand::Zonal(a) => zonal(cli, a),
        StabilityCommand::Rh2(a) => rh2(cli, a),
        StabilityCommand::Planet(a) => planet_cmd(cli, a),
    }
}

#[derive(Serialize)]
struct ZonalReport {
    rayleigh: RayleighReport,
    fjortoft: FjortoftReport,
    spectra: Vec<EigenReport>,
    unstable_wavenumbers: Vec<i64>,
}

fn zonal(cli: &Cli, a: &ZonalArgs) -> Result<(), CliError> {
    let zp = match (&a.sin_lat, &a.coeffs) {
        (Some(alpha), _) => ZonalProfile::sin_lat(*alpha),
        (None, Some(c)) => {
            let mut v = vec![0.0];
            v.extend_from_slice(c);
            ZonalProfile::from_legendre(v)
        }
        (None, None) => return Err(CliError::config("give --sin-lat or --coeffs")),
    };
    if a.k.contains(&0) {
        return Err(CliError::config("--k: wavenumbers must be non-zero"));
    }
    let mut out = Outputs::new(&cli.out, "stability-zonal")?;
    out.config(a)?;
    let spectra = a.k.iter().map(|&k| zonal_operator_spectrum(&zp, a.omega, k, a.basis)).collect::<Result<Vec<_>, _>>()?;
    let report = ZonalReport {
        rayleigh: rayleigh_criterion(&zp, a.omega),
        fjortoft: fjortoft_criterion(&zp, a.omega, &a.gamma)?,
        unstable_wavenumbers: spectra.iter().filter(|s| s.unstable).map(|s| s.k).collect(),
        spectra,
    };
    out.write_json("stability_zonal.json", &report)?;
    out.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct Rh2Run {
    epsilon: f64,
    report: Rh2Report,
}

#[derive(Serialize)]
struct SeparationRun {
    n: f64,
    report: SeparationReport,
    ratio_to_bound: f64,
}

#[derive(Serialize)]
struct Rh2Output {
    runs: Vec<Rh2Run>,
    /// Least-squares slopes on log–log axes against ε.
    degree2_slope: Option<f64>,
    high_degree_slope: Option<f64>,
    separation: Vec<SeparationRun>,
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn seeded_perturbation(lmax: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SpectralField::zeros(lmax, true);
    for l in 1..=lmax {
        let scale = (l as f64).powi(-3);
        for m in 0..=l as i64 {
            let re = rng.gen_range(-1.0..1.0) * scale;
            let im = if m == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) * scale };
            p.set(l, m, Complex64::new(re, im));
        }
    }
    p.symmetrize();
    p
}

fn rh2(cli: &Cli, a: &Rh2Args) -> Result<(), CliError> {
    if a.epsilon.is_empty() || a.epsilon.iter().any(|e| !(*e > 0.0)) {
        return Err(CliError::config("--epsilon: values must be positive"));
    }
    let mut out = Outputs::new(&cli.out, "stability-rh2")?;
    out.set_seed(a.seed);
    out.config(a)?;
    let pert = match a.seed {
        Some(s) => seeded_perturbation(a.lmax, s),
        None => default_perturbation(a.lmax),
    };
    let mut runs = Vec::new();
    for &epsilon in &a.epsilon {
        let cfg = Rh2Config {
            alpha: a.alpha,
            beta: a.beta,
            omega: a.omega,
            epsilon,
            lmax: a.lmax,
            dt: a.dt,
            t_end: a.t_end,
            sample_stride: a.stride,
        };
        runs.push(Rh2Run { epsilon, report: rh2_modal_experiment(&cfg, &pert)? });
    }
    let eps: Vec<f64> = runs.iter().map(|r| r.epsilon).collect();
    let d2: Vec<f64> = runs.iter().map(|r| r.report.max_degree2_deviation).collect();
    let hi: Vec<f64> = runs.iter().map(|r| r.report.max_high_degree_excess).collect();
    let mut separation = Vec::new();
    for &n in &a.separation {
        let y = SpectralField::real_harmonic(a.separation_lmax, 2, 2)?;
        let cfg = SeparationConfig {
            j: 2,
            alpha: a.alpha,
            beta: a.beta,
            omega: a.omega,
            n,
            lmax: a.separation_lmax,
            dt: a.separation_dt,
            beat_periods: a.beat_periods,
        };
        let report = separation_experiment(&cfg, &y)?;
        let bound = instability_separation_bound(2, a.beta, &y, n)?;
        separation.push(SeparationRun { n, ratio_to_bound: report.simulated_sup / bound, report });
    }
    let output = Rh2Output { degree2_slope: loglog_slope(&eps, &d2), high_degree_slope: loglog_slope(&eps, &hi), runs, separation };
    out.write_json("stability_rh2.json", &output)?;
    out.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct ExactFit {
    alpha: String,
    beta: String,
    gamma: String,
    omega: String,
}

#[derive(Serialize)]
struct PlanetOutput {
    planet: String,
    cos_critical: String,
    min_value: String,
    max_value: String,
    exact: ExactFit,
    alpha: f64,
    beta: f64,
    gamma: f64,
    report: QuadraticTestReport,
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::config(format!("--omega: '{s}' is not an integer or fraction p/q"));
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i128, i128) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn planet_cmd(cli: &Cli, a: &PlanetArgs) -> Result<(), CliError> {
    let name = a.name.to_ascii_lowercase();
    let cons = match name.as_str() {
        "uranus" => QuinticConstraints::uranus(),
        "neptune" => QuinticConstraints::neptune(),
        other => return Err(CliError::config(format!("--name: no wind constraints for '{other}' (uranus, neptune)"))),
    };
    let omega = match &a.omega {
        Some(s) => parse_rational(s)?,
        None => parse_rational(&planet(&name)?.printed.omega)?,
    };
    let mut out = Outputs::new(&cli.out, "stability-planet")?;
    out.config(a)?;
    let fit = fit_quintic_profile(&cons, omega)?;
    let report = theorem42_check_exact(&fit.exact)?;
    let e = fit.exact;
    let output = PlanetOutput {
        planet: name,
        cos_critical: cons.cos_critical.to_string(),
        min_value: cons.min_value.to_string(),
        max_value: cons.max_value.to_string(),
        exact: ExactFit { alpha: e.alpha.to_string(), beta: e.beta.to_string(), gamma: e.gamma.to_string(), omega: e.omega.to_string() },
        alpha: fit.profile.alpha,
        beta: fit.profile.beta,
        gamma: fit.profile.gamma,
        report,
    };
    out.write_json("stability_planet.json", &output)?;
    out.finish()?;
    Ok(())
}
