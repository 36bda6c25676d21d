use std::path::Path;

use serde::{Deserialize, Serialize};
use sphereflow::dynamics::{run as run_dynamics, SimulationConfig};
use sphereflow::fields::DiagnosticRecord;
use sphereflow::sht::{Snapshot, SpectralField, TruncationSpec};
use sphereflow::solutions::{make_exp_solution, make_log_solution, make_rossby_haurwitz};

use crate::output::{Csv, Outputs};
use crate::svg::{line_plot, Series};
use crate::{config, Cli, CliError};

/// Starting stream function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// Sum of `amplitude · R_l^m` over real harmonics `[l, m, amplitude]`.
    Coefficients { terms: Vec<(usize, i64, f64)> },
    /// `α sinθ + Σ amplitude · R_j^m` over `[m, amplitude]`.
    RossbyHaurwitz { j: usize, alpha: f64, terms: Vec<(i64, f64)> },
    Log { epsilon: f64, #[serde(default)] phi0: f64 },
    Exp { epsilon: f64, #[serde(default)] phi0: f64 },
    /// Binary or JSON coefficient snapshot.
    Snapshot { path: String },
}

impl InitialCondition {
    pub fn build(&self, lmax: usize, omega: f64) -> Result<SpectralField, CliError> {
        Ok(match self {
            InitialCondition::Zero => SpectralField::zeros(lmax, true),
            InitialCondition::Coefficients { terms } => {
                let mut f = SpectralField::zeros(lmax, true);
                for &(l, m, a) in terms {
                    check_term(l, m, lmax)?;
                    f.add_real_harmonic(l, m, a);
                }
                f
            }
            InitialCondition::RossbyHaurwitz { j, alpha, terms } => {
                let mut y = SpectralField::zeros(lmax, true);
                for &(m, a) in terms {
                    check_term(*j, m, lmax)?;
                    y.add_real_harmonic(*j, m, a);
                }
                make_rossby_haurwitz(*j, *alpha, &y, omega)?.0
            }
            InitialCondition::Log { epsilon, phi0 } => make_log_solution(*epsilon, *phi0, lmax)?.psi,
            InitialCondition::Exp { epsilon, phi0 } => make_exp_solution(*epsilon, *phi0, lmax)?.psi,
            InitialCondition::Snapshot { path } => {
                let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("cannot read snapshot {path}: {e}")))?;
                let snap = if path.ends_with(".json") {
                    Snapshot::from_json(&String::from_utf8_lossy(&bytes))?
                } else {
                    Snapshot::from_bytes(&bytes)?
                };
                snap.field.resized(lmax)
            }
        })
    }
}

fn check_term(l: usize, m: i64, lmax: usize) -> Result<(), CliError> {
    if l == 0 || l > lmax || m.unsigned_abs() as usize > l {
        return Err(CliError::config(format!("initial.terms: harmonic ({l}, {m}) is outside 1 ≤ l ≤ {lmax}, |m| ≤ l")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub omega: f64,
    pub dt: f64,
    pub t_end: f64,
    pub lmax: usize,
    pub diag_stride: usize,
    #[serde(default)]
    pub filter_strength: f64,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
    pub initial: InitialCondition,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    #[default]
    Binary,
    Json,
    None,
}

#[derive(Serialize)]
struct Summary {
    steps: usize,
    final_time: f64,
    energy_rel_drift: f64,
    enstrophy_rel_drift: f64,
    c1_modulated_drift: f64,
    c1_abs_drift: f64,
    snapshots: usize,
}

pub fn write_snapshot(out: &mut Outputs, stem: &str, snap: &Snapshot, format: SnapshotFormat) -> Result<(), CliError> {
    match format {
        SnapshotFormat::Binary => out.write(&format!("{stem}.bin"), &snap.to_bytes()),
        SnapshotFormat::Json => out.write(&format!("{stem}.json"), (snap.to_json()? + "\n").as_bytes()),
        SnapshotFormat::None => Ok(()),
    }
}

pub fn run(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let cfg: SimulateConfig = config::load(path)?;
    let truncation = TruncationSpec::dealiased(cfg.lmax);
    let sim = SimulationConfig {
        omega: cfg.omega,
        dt: cfg.dt,
        t_end: cfg.t_end,
        truncation,
        diag_stride: cfg.diag_stride,
        filter_strength: cfg.filter_strength,
    };
    sim.validate()?;
    let psi0 = cfg.initial.build(cfg.lmax, cfg.omega)?;
    let mut out = Outputs::new(&cli.out, "simulate")?;
    out.config(&cfg)?;
    let res = run_dynamics(&psi0, &sim)?;
    if res.diagnostics.iter().any(|d| !d.energy.is_finite() || !d.enstrophy.is_finite()) {
        return Err(CliError::numerical("integration produced non-finite invariants"));
    }
    let mut csv = Csv::with_header_line(&DiagnosticRecord::csv_header(cfg.lmax));
    for d in &res.diagnostics {
        csv.raw_row(&d.csv_row());
    }
    out.write("diagnostics.csv", &csv.into_bytes())?;
    for (i, s) in res.snapshots.iter().enumerate() {
        write_snapshot(&mut out, &format!("snapshot_{i:05}"), &Snapshot::new(s.time, s.psi()), cfg.snapshot_format)?;
    }
    let summary = Summary {
        steps: sim.steps(),
        final_time: res.final_state.time,
        energy_rel_drift: res.drift.energy_rel,
        enstrophy_rel_drift: res.drift.enstrophy_rel,
        c1_modulated_drift: res.drift.c1_modulated,
        c1_abs_drift: res.drift.c1_abs,
        snapshots: res.snapshots.len(),
    };
    out.write_json("simulate.summary.json", &summary)?;
    if cli.svg {
        let e0 = res.diagnostics[0].energy;
        let z0 = res.diagnostics[0].enstrophy;
        let rel = |x: f64, x0: f64| if x0 != 0.0 { x / x0 - 1.0 } else { x };
        let plot = line_plot("invariant drift", "t", "relative change", &[
            Series { label: "energy", points: res.diagnostics.iter().map(|d| (d.time, rel(d.energy, e0))).collect() },
            Series { label: "enstrophy", points: res.diagnostics.iter().map(|d| (d.time, rel(d.enstrophy, z0))).collect() },
        ]);
        out.write("invariants.svg", plot.as_bytes())?;
    }
    out.finish()?;
    Ok(())
}
