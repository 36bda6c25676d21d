use clap::{Args, ValueEnum};
use serde::Serialize;
use sphereflow::solutions::VorticityFunction;
use sphereflow::stratosphere::{
    eel_residuals, hydrostatic_defect, lift_solution, particle_paths, planet, sample_points, temperature_field, Base2D,
    DensityProfile, EelResiduals, LiftOptions, TemperatureReport,
};

use crate::output::{f, Csv, Outputs};
use crate::{Cli, CliError};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFamily {
    Log,
    Exp,
}

#[derive(Debug, Args, Serialize)]
pub struct LiftArgs {
    #[arg(long, value_enum, default_value = "log")]
    pub family: BaseFamily,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0: f64,
    /// Density at the tropopause.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Density decay rate.
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Takes ω and g from the planet registry unless given explicitly.
    #[arg(long)]
    pub planet: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Sample points per axis.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub z_top: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 4)]
    pub seeds: usize,
    /// RK4 steps per rotation period `2π/ω`.
    #[arg(long, default_value_t = 10000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Step of the finite-difference residual oracle.
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,
}

#[derive(Serialize)]
struct LiftReport {
    omega: f64,
    g: f64,
    base_residual: f64,
    eel: EelResiduals,
    hydrostatic_defect: f64,
    temperature: Option<TemperatureReport>,
    max_level_set_drift: f64,
    warnings: Vec<String>,
}

pub fn run(cli: &Cli, a: &LiftArgs) -> Result<(), CliError> {
    let reg = a.planet.as_deref().map(planet).transpose()?.map(|p| p.parameters()).transpose()?;
    let omega = a.omega.or(reg.map(|p| p.omega)).ok_or_else(|| CliError::config("give --omega or --planet"))?;
    let g = a.g.or(reg.map(|p| p.g)).ok_or_else(|| CliError::config("give --g or --planet"))?;
    if a.n == 0 || a.seeds == 0 || a.steps == 0 || !(a.periods > 0.0) || !(a.z_top >= 0.0) || !(a.fd_step > 0.0) {
        return Err(CliError::config("--n, --seeds, --steps, --periods and --fd-step must be positive"));
    }
    if omega == 0.0 {
        return Err(CliError::config("--omega must be non-zero to define a rotation period"));
    }
    let density = DensityProfile::new(a.a, a.b)?;
    let (base, vf) = match a.family {
        BaseFamily::Log => (Base2D::Log { epsilon: a.epsilon, phi0: a.phi0 }, VorticityFunction::LogFamily { epsilon: a.epsilon }),
        BaseFamily::Exp => (Base2D::Exp { epsilon: a.epsilon, phi0: a.phi0 }, VorticityFunction::ExpFamily { epsilon: a.epsilon }),
    };
    if matches!(a.family, BaseFamily::Log) && !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(CliError::config("--epsilon must lie in (0, 1) for the log family"));
    }
    let mut warnings = Vec::new();
    if !density.is_typical() {
        warnings.push(format!("density decay rate b = {} is outside the solar-system range b > 2", a.b));
    }
    let mut out = Outputs::new(&cli.out, "lift3d")?;
    out.config(a)?;
    let field = lift_solution(base, vf, density, omega, g, &LiftOptions::default())?;
    let with_t = a.b != 0.0;
    if !with_t {
        warnings.push("temperature omitted: it needs a decaying density".into());
    }
    let mut csv = Csv::new(if with_t { &["phi", "theta", "z", "psi", "p", "T"] } else { &["phi", "theta", "z", "psi", "p"] });
    for (phi, theta, z) in sample_points(a.n, a.z_top) {
        let s = field.sample(phi, theta, z, a.t);
        let mut row = vec![f(phi), f(theta), f(z), f(s.psi), f(s.p)];
        if with_t {
            row.push(f(field.temperature(phi, theta, z, a.t)?));
        }
        csv.row(&row);
    }
    out.write("field.csv", &csv.into_bytes())?;
    let seeds: Vec<(f64, f64, f64)> = (0..a.seeds)
        .map(|i| {
            let u = (i as f64 + 0.5) / a.seeds as f64;
            (2.0 * std::f64::consts::PI * u, 1.2 * (u - 0.5) * 2.0, a.z_top * u)
        })
        .collect();
    let period = 2.0 * std::f64::consts::PI / omega.abs();
    let steps = (a.steps as f64 * a.periods).round().max(1.0) as usize;
    let paths = particle_paths(&field, &seeds, period * a.periods, steps, a.stride)?;
    let mut tcsv = Csv::new(&["seed", "t", "phi", "theta", "z", "level_set_value"]);
    for (i, p) in paths.iter().enumerate() {
        for &(t, phi, theta) in &p.samples {
            tcsv.row(&[i.to_string(), f(t), f(phi), f(theta), f(p.seed.2), f(p.conserved)]);
        }
    }
    out.write("trajectories.csv", &tcsv.into_bytes())?;
    let report = LiftReport {
        omega,
        g,
        base_residual: field.base_residual,
        eel: eel_residuals(&field, a.n, a.z_top, a.t, a.fd_step),
        hydrostatic_defect: (0..=a.n).map(|k| hydrostatic_defect(&field, a.z_top * k as f64 / a.n as f64)).fold(0.0, f64::max),
        temperature: if with_t { Some(temperature_field(&field, a.n, a.z_top, a.t)?) } else { None },
        max_level_set_drift: paths.iter().map(|p| p.drift).fold(0.0, f64::max),
        warnings,
    };
    out.write_json("lift3d.json", &report)?;
    out.finish()?;
    Ok(())
}
