//! Perturbation experiments around degree-2 Rossby–Haurwitz flows.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Integrator, SimulationState};
use crate::error::{Error, Result};
use crate::fields::{first_modes, FlowOps};
use crate::sht::legendre::{legendre_table, tri};
use crate::sht::{gauss_legendre, sin_lat_coefficient, SpectralField};
use crate::solutions::rossby_haurwitz_speed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rh2Config {
    /// Coefficient of `sinθ` in the base flow.
    pub alpha: f64,
    /// Coefficient of `Y_2^0` in the base flow.
    pub beta: f64,
    pub omega: f64,
    /// Size of the perturbation measured by the L² norm of its vorticity.
    pub epsilon: f64,
    pub lmax: usize,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rh2Sample {
    pub time: f64,
    /// `[c_2^0]² + 2|c_2^1|² + 2|c_2^2|² − β²`.
    pub degree2_deviation: f64,
    /// `|c_2^2|² − 15|c_2^1|²`.
    pub sectoral_balance: f64,
    /// `c_1^m`, `m = −1, 0, 1`, as `[re, im]`.
    pub degree1: [[f64; 2]; 3],
    /// `Σ_{l≥3} [l²(l+1)² − 6l(l+1)] Σ_m |c_l^m|²`.
    pub high_degree_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rh2Report {
    pub samples: Vec<Rh2Sample>,
    pub max_degree2_deviation: f64,
    pub max_sectoral_balance: f64,
    pub max_high_degree_excess: f64,
    /// `max_t |e^{−imωt} c_1^m(t) − c_1^m(0)|`.
    pub degree1_drift: f64,
}

/// Deterministic real perturbation spread over degrees `1..=lmax` with `|c_l^m| ~ l^{-3}`.
pub fn default_perturbation(lmax: usize) -> SpectralField {
    let mut p = SpectralField::zeros(lmax, true);
    for l in 1..=lmax {
        for m in 0..=l as i64 {
            let a = (1.3 * l as f64 + 0.7 * m as f64 + 0.1).sin() / (l as f64).powi(3);
            let b = if m == 0 { 0.0 } else { (0.9 * l as f64 - 1.1 * m as f64 + 0.4).cos() / (l as f64).powi(3) };
            p.set(l, m, Complex64::new(a, b));
        }
    }
    p
}

fn modal_sample(time: f64, psi: &SpectralField, beta: f64) -> Rh2Sample {
    let c20 = psi.get(2, 0).re;
    let c21 = psi.get(2, 1).norm_sqr();
    let c22 = psi.get(2, 2).norm_sqr();
    let c1 = first_modes(psi);
    let power = psi.degree_power();
    let high_degree_excess = power
        .iter()
        .enumerate()
        .skip(3)
        .map(|(l, p)| {
            let ev = (l * (l + 1)) as f64;
            (ev * ev - 6.0 * ev) * p
        })
        .sum();
    Rh2Sample {
        time,
        degree2_deviation: c20 * c20 + 2.0 * c21 + 2.0 * c22 - beta * beta,
        sectoral_balance: c22 - 15.0 * c21,
        degree1: [[c1[0].re, c1[0].im], [c1[1].re, c1[1].im], [c1[2].re, c1[2].im]],
        high_degree_excess,
    }
}

/// Evolves `α sinθ + β Y_2^0 + ε p/‖Δp‖` and records the modal quantities.
pub fn rh2_modal_experiment(cfg: &Rh2Config, perturbation: &SpectralField) -> Result<Rh2Report> {
    if cfg.lmax < 3 || cfg.sample_stride == 0 || !(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) {
        return Err(Error::Parameter("rh2 experiment needs lmax ≥ 3, dt > 0, t_end ≥ 0, stride ≥ 1".into()));
    }
    if !perturbation.is_real_valued() {
        return Err(Error::Parameter("perturbation must be real-valued".into()));
    }
    let mut psi = SpectralField::zeros(cfg.lmax, true);
    psi.set(1, 0, Complex64::new(cfg.alpha * sin_lat_coefficient(), 0.0));
    psi.set(2, 0, Complex64::new(cfg.beta, 0.0));
    let p = perturbation.resized(cfg.lmax);
    let size = p.laplacian().l2_norm();
    if cfg.epsilon != 0.0 {
        if size == 0.0 {
            return Err(Error::Parameter("perturbation has zero vorticity".into()));
        }
        psi.axpy(cfg.epsilon / size, &p);
    }
    let integ = Integrator::with_ops(FlowOps::new(cfg.lmax)?, cfg.omega, cfg.dt);
    let mut state = SimulationState::from_stream(0.0, &psi);
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let c1_start = first_modes(&psi);
    let mut samples = vec![modal_sample(0.0, &psi, cfg.beta)];
    let mut degree1_drift: f64 = 0.0;
    for n in 1..=steps {
        state = integ.step(&state)?;
        if n % cfg.sample_stride == 0 || n == steps {
            let psi = state.psi();
            let c1 = first_modes(&psi);
            for (k, m) in [-1.0, 0.0, 1.0].iter().enumerate() {
                let ph = Complex64::from_polar(1.0, -m * cfg.omega * state.time);
                degree1_drift = degree1_drift.max((c1[k] * ph - c1_start[k]).norm());
            }
            samples.push(modal_sample(state.time, &psi, cfg.beta));
        }
    }
    let max_of = |f: fn(&Rh2Sample) -> f64| samples.iter().map(|s| f(s).abs()).fold(0.0, f64::max);
    Ok(Rh2Report {
        max_degree2_deviation: max_of(|s| s.degree2_deviation),
        max_sectoral_balance: max_of(|s| s.sectoral_balance),
        max_high_degree_excess: max_of(|s| s.high_degree_excess),
        degree1_drift,
        samples,
    })
}

fn nonzonal_weights(j: usize, y: &SpectralField) -> Result<Vec<(i64, f64)>> {
    if y.lmax() < j {
        return Err(Error::Truncation(format!("degree {j} exceeds lmax {}", y.lmax())));
    }
    let w: Vec<(i64, f64)> = (-(j as i64)..=j as i64)
        .filter(|&m| m != 0)
        .map(|m| (m, y.get(j, m).norm_sqr()))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    if w.is_empty() {
        return Err(Error::Parameter("the wave profile has no non-zonal component".into()));
    }
    Ok(w)
}

/// `∫ |P̄_j^m(sinθ)|² cosθ dθ` by Gauss quadrature in `s`.
fn latitude_integral(j: usize, m: usize) -> f64 {
    let (x, w) = gauss_legendre(j + 4);
    x.iter().zip(&w).map(|(&s, &wi)| wi * legendre_table(j, s)[tri(j, m)].powi(2)).sum()
}

/// `4π/(3n) + 4πβ² Σ_{0<|m|≤j} |c_m|² ∫|P̄_j^m|² cosθ dθ` for `Y = Σ c_m Y_j^m`.
pub fn instability_separation_bound(j: usize, beta: f64, y: &SpectralField, n: f64) -> Result<f64> {
    let w = nonzonal_weights(j, y)?;
    let sum: f64 = w.iter().map(|&(m, p)| p * latitude_integral(j, m.unsigned_abs() as usize)).sum();
    Ok(4.0 * PI / (3.0 * n) + 4.0 * PI * beta * beta * sum)
}

/// `sup_t ‖ψ̂ⁿ(t) − ψ(t)‖²` for the two exact travelling waves with `α` and `α + 1/n`:
/// `4π/(3n²) + 4πβ² Σ |c_m|² ∫|P̄_j^m|² cosθ dθ · 2(1 − cos(m Δc t))`, maximized over one period.
pub fn separation_sup_corrected(j: usize, beta: f64, y: &SpectralField, n: f64) -> Result<f64> {
    let w = nonzonal_weights(j, y)?;
    let g = w.iter().fold(0u64, |a, &(m, _)| gcd(a, m.unsigned_abs()));
    let terms: Vec<(f64, f64)> = w
        .iter()
        .map(|&(m, p)| (m as f64 / g as f64, 4.0 * PI * beta * beta * p * latitude_integral(j, m.unsigned_abs() as usize)))
        .collect();
    let samples = 20000;
    let best = (0..=samples)
        .map(|i| {
            let phase = 2.0 * PI * i as f64 / samples as f64;
            terms.iter().map(|&(m, a)| 2.0 * a * (1.0 - (m * phase).cos())).sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(4.0 * PI / (3.0 * n * n) + best)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationConfig {
    pub j: usize,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub n: f64,
    pub lmax: usize,
    pub dt: f64,
    /// Run length in beat periods `2π/(m_min Δc)`.
    pub beat_periods: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub beat_period: f64,
    pub simulated_sup: f64,
    pub time_of_sup: f64,
    pub stated_bound: f64,
    pub corrected_sup: f64,
}

/// Integrates `α sinθ + βY` and `(α + 1/n) sinθ + βY` side by side and records the largest
/// squared L² distance between them.
pub fn separation_experiment(cfg: &SeparationConfig, y: &SpectralField) -> Result<SeparationReport> {
    if cfg.j < 2 || cfg.lmax < cfg.j || !(cfg.n > 0.0) || !(cfg.dt > 0.0) {
        return Err(Error::Parameter("separation experiment needs j ≥ 2, lmax ≥ j, n > 0, dt > 0".into()));
    }
    if !y.is_real_valued() {
        return Err(Error::Parameter("the wave profile must be real-valued".into()));
    }
    let w = nonzonal_weights(cfg.j, y)?;
    let m_min = w.iter().map(|&(m, _)| m.unsigned_abs()).min().unwrap_or(1) as f64;
    let e = (cfg.j * (cfg.j + 1)) as f64;
    let dc = rossby_haurwitz_speed(cfg.j, cfg.alpha + 1.0 / cfg.n, cfg.omega)
        - rossby_haurwitz_speed(cfg.j, cfg.alpha, cfg.omega);
    debug_assert!((dc - (e - 2.0) / (e * cfg.n)).abs() < 1e-12);
    let beat_period = 2.0 * PI / (m_min * dc.abs());

    let wave = y.band(cfg.j, cfg.j).resized(cfg.lmax).scaled(cfg.beta);
    let mut psi = wave.clone();
    psi.set(1, 0, Complex64::new(cfg.alpha * sin_lat_coefficient(), 0.0));
    let mut psi_hat = wave;
    psi_hat.set(1, 0, Complex64::new((cfg.alpha + 1.0 / cfg.n) * sin_lat_coefficient(), 0.0));

    let integ = Integrator::with_ops(FlowOps::new(cfg.lmax)?, cfg.omega, cfg.dt);
    let mut a = SimulationState::from_stream(0.0, &psi);
    let mut b = SimulationState::from_stream(0.0, &psi_hat);
    let steps = (cfg.beat_periods * beat_period / cfg.dt).ceil() as usize;
    let mut simulated_sup = (&psi_hat - &psi).norm_sqr();
    let mut time_of_sup = 0.0;
    for _ in 0..steps {
        a = integ.step(&a)?;
        b = integ.step(&b)?;
        let d = (&b.psi() - &a.psi()).norm_sqr();
        if d > simulated_sup {
            simulated_sup = d;
            time_of_sup = a.time;
        }
    }
    Ok(SeparationReport {
        beat_period,
        simulated_sup,
        time_of_sup,
        stated_bound: instability_separation_bound(cfg.j, cfg.beta, y, cfg.n)?,
        corrected_sup: separation_sup_corrected(cfg.j, cfg.beta, y, cfg.n)?,
    })
}
