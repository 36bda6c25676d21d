//! Time stepping of `∂_t Ω = −J(ψ, Ω + 2ω sinθ)`, `Ω = Δψ`, with classical RK4.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{add_planetary_vorticity, DiagnosticRecord, FlowOps};
use crate::sht::{SpectralField, TruncationSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub omega: f64,
    pub dt: f64,
    pub t_end: f64,
    pub truncation: TruncationSpec,
    pub diag_stride: usize,
    /// Strength of the exponential filter `exp(−s (l/lmax)^8)` applied once per step.
    #[serde(default)]
    pub filter_strength: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.diag_stride == 0 {
            return Err(Error::Parameter("diag_stride must be at least 1".into()));
        }
        if !(self.filter_strength >= 0.0) {
            return Err(Error::Parameter("filter_strength must be non-negative".into()));
        }
        if !self.omega.is_finite() {
            return Err(Error::Parameter("omega must be finite".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub time: f64,
    pub vorticity: SpectralField,
}

impl SimulationState {
    pub fn from_stream(time: f64, psi: &SpectralField) -> Self {
        let mut vorticity = psi.laplacian();
        vorticity.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        vorticity.symmetrize();
        Self { time, vorticity }
    }

    pub fn from_vorticity(time: f64, vorticity: SpectralField) -> Result<Self> {
        if !vorticity.is_real_valued() {
            return Err(Error::Parameter("vorticity must be real-valued".into()));
        }
        vorticity.invert_laplacian()?;
        Ok(Self { time, vorticity })
    }

    pub fn psi(&self) -> SpectralField {
        self.vorticity.invert_laplacian_unchecked()
    }
}

/// `∂_t Ω` at the given vorticity.
pub fn tendency(ops: &FlowOps, vorticity: &SpectralField, omega: f64) -> Result<SpectralField> {
    let psi = vorticity.invert_laplacian_unchecked();
    let mut q = vorticity.clone();
    add_planetary_vorticity(&mut q, omega);
    Ok(ops.advection(&psi, &q)?.scaled(-1.0))
}

/// Classical four-stage Runge–Kutta integrator bound to one truncation.
#[derive(Debug)]
pub struct Integrator {
    pub ops: FlowOps,
    pub omega: f64,
    pub dt: f64,
    pub filter_strength: f64,
}

impl Integrator {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            ops: FlowOps::new(config.truncation.lmax)?,
            omega: config.omega,
            dt: config.dt,
            filter_strength: config.filter_strength,
        })
    }

    pub fn with_ops(ops: FlowOps, omega: f64, dt: f64) -> Self {
        Self { ops, omega, dt, filter_strength: 0.0 }
    }

    pub fn step(&self, state: &SimulationState) -> Result<SimulationState> {
        self.step_by(state, self.dt)
    }

    pub fn step_by(&self, state: &SimulationState, dt: f64) -> Result<SimulationState> {
        let w0 = &state.vorticity;
        let k1 = tendency(&self.ops, w0, self.omega)?;
        let mut w = w0.clone();
        w.axpy(0.5 * dt, &k1);
        let k2 = tendency(&self.ops, &w, self.omega)?;
        let mut w = w0.clone();
        w.axpy(0.5 * dt, &k2);
        let k3 = tendency(&self.ops, &w, self.omega)?;
        let mut w = w0.clone();
        w.axpy(dt, &k3);
        let k4 = tendency(&self.ops, &w, self.omega)?;
        let mut next = w0.clone();
        next.axpy(dt / 6.0, &k1);
        next.axpy(dt / 3.0, &k2);
        next.axpy(dt / 3.0, &k3);
        next.axpy(dt / 6.0, &k4);
        next.symmetrize();
        next.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        if self.filter_strength > 0.0 {
            apply_filter(&mut next, self.filter_strength);
        }
        if next.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite vorticity at t = {}; last finite enstrophy {:.6e}",
                state.time + dt,
                state.vorticity.norm_sqr()
            )));
        }
        Ok(SimulationState { time: state.time + dt, vorticity: next })
    }

    /// Advances `steps` steps of size `dt`.
    pub fn advance(&self, state: &SimulationState, steps: usize) -> Result<SimulationState> {
        let mut s = state.clone();
        for _ in 0..steps {
            s = self.step(&s)?;
        }
        Ok(s)
    }
}

/// Multiplies degree `l` by `exp(−s (l/lmax)^8)`.
pub fn apply_filter(field: &mut SpectralField, strength: f64) {
    let lmax = field.lmax();
    for l in 0..=lmax {
        let f = (-strength * (l as f64 / lmax as f64).powi(8)).exp();
        for m in -(l as i64)..=l as i64 {
            field.coeffs_mut()[crate::sht::index(l, m)] *= f;
        }
    }
}

/// Drift of the invariants relative to their initial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub energy_rel: f64,
    pub enstrophy_rel: f64,
    /// `max |e^{−imωt} c_1^m(t) − c_1^m(0)|` over `m = -1, 0, 1`.
    pub c1_modulated: f64,
    pub c1_abs: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<SimulationState>,
    pub diagnostics: Vec<DiagnosticRecord>,
    pub final_state: SimulationState,
    pub drift: DriftReport,
}

/// Runs `config` from a stream function; diagnostics and snapshots every `diag_stride` steps.
pub fn run(initial_psi: &SpectralField, config: &SimulationConfig) -> Result<RunOutput> {
    if !initial_psi.is_real_valued() {
        return Err(Error::Parameter("initial stream function must be real-valued".into()));
    }
    let integ = Integrator::new(config)?;
    let psi0 = initial_psi.resized(config.truncation.lmax);
    let mut state = SimulationState::from_stream(0.0, &psi0);
    let steps = config.steps();
    let mut snapshots = vec![state.clone()];
    let mut diagnostics = vec![integ.ops.diagnostics(0.0, &state.psi())?];
    let first = diagnostics[0].clone();
    let mut drift = DriftReport { energy_rel: 0.0, enstrophy_rel: 0.0, c1_modulated: 0.0, c1_abs: 0.0 };
    for n in 1..=steps {
        let dt = if n == steps { config.t_end - state.time } else { config.dt };
        state = integ.step_by(&state, dt)?;
        if n % config.diag_stride == 0 || n == steps {
            let rec = integ.ops.diagnostics(state.time, &state.psi())?;
            update_drift(&mut drift, &first, &rec, config.omega);
            diagnostics.push(rec);
            snapshots.push(state.clone());
        }
    }
    Ok(RunOutput { snapshots, diagnostics, final_state: state, drift })
}

fn update_drift(d: &mut DriftReport, a: &DiagnosticRecord, b: &DiagnosticRecord, omega: f64) {
    let rel = |x: f64, y: f64| if x.abs() > 0.0 { ((y - x) / x).abs() } else { y.abs() };
    d.energy_rel = d.energy_rel.max(rel(a.energy, b.energy));
    d.enstrophy_rel = d.enstrophy_rel.max(rel(a.enstrophy, b.enstrophy));
    for (k, m) in [-1i32, 0, 1].iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -(*m as f64) * omega * b.time);
        d.c1_modulated = d.c1_modulated.max((b.c1[k] * phase - a.c1[k]).norm());
        d.c1_abs = d.c1_abs.max((b.c1[k].norm() - a.c1[k].norm()).abs());
    }
}
