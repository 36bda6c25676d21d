use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sphereflow::bifurcation::{
    build_subspace, continue_branch, detect_bifurcation_points, omega_branch, AprioriBounds, BranchStatus,
    ContinuationBranch, ContinuationOptions, ContinuationProblem, DetectionReport, GroupId, Nonlinearity, SymmetryGroup,
};
use sphereflow::sht::{sin_lat_coefficient, Snapshot};

use crate::output::{f, Csv, Outputs};
use crate::simulate::{write_snapshot, SnapshotFormat};
use crate::svg::{line_plot, Series};
use crate::{config, Cli, CliError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationProblem {
    pub group: GroupId,
    pub nonlinearity: Nonlinearity,
    /// Subspace truncation; defaults to `2l + 6`.
    #[serde(default)]
    pub lmax: Option<usize>,
    /// Search interval for `λ*` (ignored for the rotating family).
    #[serde(default = "default_range")]
    pub lambda_range: [f64; 2],
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub options: Option<ContinuationOptions>,
    /// Branch point indices written as snapshots.
    #[serde(default)]
    pub snapshot_points: Vec<usize>,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
}

fn default_range() -> [f64; 2] {
    [-5.0, 5.0]
}

fn default_steps() -> usize {
    50
}

#[derive(Serialize)]
struct BranchSummary {
    file: String,
    degree: usize,
    lambda_star: f64,
    direction: f64,
    status: BranchStatus,
    points: usize,
    bounds_hold: bool,
    max_residual: f64,
    max_full_residual: f64,
}

#[derive(Serialize)]
struct BifurcateOutput {
    subspace_dims: Vec<usize>,
    admissible_degrees: Vec<usize>,
    bounds: Option<AprioriBounds>,
    detection: DetectionReport,
    branches: Vec<BranchSummary>,
}

fn group(id: GroupId) -> Result<SymmetryGroup, CliError> {
    match id {
        GroupId::Tetrahedral => Ok(SymmetryGroup::tetrahedral()),
        GroupId::D4d => Ok(SymmetryGroup::d4d()),
        GroupId::Trivial => Ok(SymmetryGroup::trivial()),
        GroupId::Custom => Err(CliError::config("group: 'custom' groups are only available through the library")),
    }
}

fn branch_csv(b: &ContinuationBranch) -> Vec<u8> {
    let mut csv = Csv::new(&[
        "point", "arclength", "lambda", "amplitude", "sup_psi", "sup_lap_psi", "residual", "full_residual", "bounds_ok", "linear_regime",
    ]);
    for (i, p) in b.points.iter().enumerate() {
        let amp = p.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
        csv.row(&[
            i.to_string(),
            f(p.arclength),
            f(p.lambda),
            f(amp),
            f(p.sup_psi),
            f(p.sup_lap),
            f(p.residual),
            f(p.full_residual),
            p.bounds_ok.to_string(),
            p.linear_regime.map_or(String::new(), |v| v.to_string()),
        ]);
    }
    csv.into_bytes()
}

pub fn run(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let prob: BifurcationProblem = config::load(path)?;
    prob.nonlinearity.validate()?;
    let l = match prob.nonlinearity {
        Nonlinearity::Cubic { l, .. } | Nonlinearity::Linear { l } | Nonlinearity::Rotating { l, .. } => l,
    };
    let lmax = prob.lmax.unwrap_or(2 * l + 6);
    if lmax < l {
        return Err(CliError::config(format!("lmax: {lmax} is below the degree {l}")));
    }
    if !(prob.lambda_range[1] > prob.lambda_range[0]) {
        return Err(CliError::config("lambda_range: upper end must exceed lower end"));
    }
    let opts = prob.options.unwrap_or_default();
    let mut out = Outputs::new(&cli.out, "bifurcate")?;
    out.config(&prob)?;
    let sub = build_subspace(&group(prob.group)?, lmax)?;
    let problem = ContinuationProblem::new(prob.nonlinearity, sub)?;
    let detection = detect_bifurcation_points(&problem, prob.lambda_range[0], prob.lambda_range[1])?;
    let mut branches = Vec::new();
    if prob.nonlinearity.is_rotating() {
        branches.push((1.0, omega_branch(&problem, prob.steps, &opts)?));
    } else if !matches!(prob.nonlinearity, Nonlinearity::Linear { .. }) {
        for p in &detection.points {
            for dir in [1.0, -1.0] {
                branches.push((dir, continue_branch(&problem, p, dir, prob.steps, &opts)?));
            }
        }
    }
    let mut summaries = Vec::new();
    let mut series = Vec::new();
    for (i, (dir, b)) in branches.iter().enumerate() {
        let stem = format!("branch_{i:02}");
        let file = format!("{stem}.csv");
        out.write(&file, &branch_csv(b))?;
        for &k in &prob.snapshot_points {
            if let Some(p) = b.points.get(k) {
                let mut psi = problem.subspace.field(&p.coeffs);
                if let Nonlinearity::Rotating { mu, .. } = prob.nonlinearity {
                    let c = psi.get(1, 0) - Complex64::new(mu / (1.0 + p.lambda * p.lambda) * sin_lat_coefficient(), 0.0);
                    psi.set(1, 0, c);
                }
                write_snapshot(&mut out, &format!("{stem}_point_{k:04}"), &Snapshot::new(p.lambda, psi), prob.snapshot_format)?;
            }
        }
        summaries.push(BranchSummary {
            file,
            degree: b.origin.degree,
            lambda_star: b.origin.lambda,
            direction: *dir,
            status: b.status,
            points: b.points.len(),
            bounds_hold: b.points.iter().all(|p| p.bounds_ok),
            max_residual: b.points.iter().map(|p| p.residual).fold(0.0, f64::max),
            max_full_residual: b.points.iter().map(|p| p.full_residual).fold(0.0, f64::max),
        });
        series.push((
            format!("branch {i}"),
            b.points.iter().map(|p| (p.lambda, p.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt())).collect::<Vec<_>>(),
        ));
    }
    let output = BifurcateOutput {
        subspace_dims: problem.subspace.dims.clone(),
        admissible_degrees: problem.subspace.admissible_degrees.clone(),
        bounds: prob.nonlinearity.apriori_bounds(),
        detection,
        branches: summaries,
    };
    out.write_json("bifurcate.json", &output)?;
    if cli.svg {
        let s: Vec<Series> = series.iter().map(|(label, pts)| Series { label, points: pts.clone() }).collect();
        out.write("branches.svg", line_plot("bifurcation branches", "lambda", "amplitude", &s).as_bytes())?;
    }
    out.finish()?;
    Ok(())
}
