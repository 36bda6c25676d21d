//! Zonal flows `ψ0(s)`, `s = sinθ`: Rayleigh and Fjørtoft criteria and the spectrum of the
//! linearized operator `𝓛 = Ψ0′ − (Υ0′ + 2ω) Δ_k^{-1}` acting on longitudinal wavenumber `k`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sht::legendre::{legendre_table, tri};
use crate::sht::{gauss_legendre, SpectralField};

type Profile1d = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// `a[l]` multiplies `Y_l^0`.
    Legendre(Vec<f64>),
    Callable { psi: Profile1d, dpsi: Profile1d, upsilon: Profile1d, dupsilon: Profile1d },
}

/// Latitude-only stream function with its derivative, vorticity and vorticity derivative in `s`.
#[derive(Clone)]
pub struct ZonalProfile {
    repr: Repr,
}

impl fmt::Debug for ZonalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Legendre(a) => f.debug_tuple("ZonalProfile::Legendre").field(a).finish(),
            Repr::Callable { .. } => f.write_str("ZonalProfile::Callable"),
        }
    }
}

/// `P_l(s)` and `P_l′(s)` for `l ≤ lmax` (unnormalized).
fn legendre_p(lmax: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; lmax + 1];
    let mut dp = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = s;
        dp[1] = 1.0;
    }
    for l in 2..=lmax {
        let lf = l as f64;
        p[l] = ((2.0 * lf - 1.0) * s * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
        dp[l] = dp[l - 2] + (2.0 * lf - 1.0) * p[l - 1];
    }
    (p, dp)
}

impl ZonalProfile {
    pub fn from_legendre(a: Vec<f64>) -> Self {
        Self { repr: Repr::Legendre(a) }
    }

    /// Zonal part of `psi`; rejects fields carrying non-zonal power.
    pub fn from_field(psi: &SpectralField) -> Result<Self> {
        let mut a = vec![0.0; psi.lmax() + 1];
        let mut off = 0.0;
        for l in 0..=psi.lmax() {
            for m in -(l as i64)..=l as i64 {
                let c = psi.get(l, m);
                if m == 0 {
                    a[l] = c.re;
                    off += c.im * c.im;
                } else {
                    off += c.norm_sqr();
                }
            }
        }
        if off.sqrt() > 1e-12 * (1.0 + psi.l2_norm()) {
            return Err(Error::Parameter("profile is not zonal and real".into()));
        }
        Ok(Self::from_legendre(a))
    }

    /// `ψ0 = α sinθ`.
    pub fn sin_lat(alpha: f64) -> Self {
        Self::from_legendre(vec![0.0, alpha * 2.0 * (PI / 3.0).sqrt()])
    }

    pub fn from_functions(
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dpsi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        upsilon: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dupsilon: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr::Callable {
                psi: Arc::new(psi),
                dpsi: Arc::new(dpsi),
                upsilon: Arc::new(upsilon),
                dupsilon: Arc::new(dupsilon),
            },
        }
    }

    /// `[Ψ0, Ψ0′, Υ0, Υ0′]` at `s`.
    pub fn eval(&self, s: f64) -> [f64; 4] {
        match &self.repr {
            Repr::Legendre(a) => {
                let lmax = a.len().saturating_sub(1);
                let (p, dp) = legendre_p(lmax, s);
                let mut out = [0.0; 4];
                for (l, &al) in a.iter().enumerate() {
                    let lf = l as f64;
                    let n = al * ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt();
                    let ev = -lf * (lf + 1.0);
                    out[0] += n * p[l];
                    out[1] += n * dp[l];
                    out[2] += ev * n * p[l];
                    out[3] += ev * n * dp[l];
                }
                out
            }
            Repr::Callable { psi, dpsi, upsilon, dupsilon } => [psi(s), dpsi(s), upsilon(s), dupsilon(s)],
        }
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.eval(s)[0]
    }

    pub fn dpsi(&self, s: f64) -> f64 {
        self.eval(s)[1]
    }

    pub fn upsilon(&self, s: f64) -> f64 {
        self.eval(s)[2]
    }

    pub fn dupsilon(&self, s: f64) -> f64 {
        self.eval(s)[3]
    }

    /// `max |Υ0 − ((1−s²)Ψ0″ − 2sΨ0′)|` over interior samples, `Ψ0″` by central differences.
    pub fn consistency_defect(&self, samples: usize) -> f64 {
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let s = -0.99 + 1.98 * (i as f64 + 0.5) / samples as f64;
            let d2 = (self.dpsi(s + h) - self.dpsi(s - h)) / (2.0 * h);
            let v = self.eval(s);
            worst = worst.max((v[2] - ((1.0 - s * s) * d2 - 2.0 * s * v[1])).abs());
        }
        worst
    }

    /// Meridional gradient of total vorticity per unit `cosθ`: `Υ0′(s) + 2ω`.
    pub fn total_gradient(&self, s: f64, omega: f64) -> f64 {
        self.dupsilon(s) + 2.0 * omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    Met,
    NotMet,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    /// Sign changes of `Υ0′ + 2ω` in `(−1, 1)`.
    pub roots: Vec<f64>,
    pub verdict: CriterionVerdict,
}

const SAMPLES: usize = 4000;

fn sample_points() -> Vec<f64> {
    (0..SAMPLES).map(|i| -(PI * (i as f64 + 0.5) / SAMPLES as f64).cos()).collect()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn gradient_is_degenerate(zp: &ZonalProfile, omega: f64, pts: &[f64]) -> (Vec<f64>, bool) {
    let g: Vec<f64> = pts.iter().map(|&s| zp.total_gradient(s, omega)).collect();
    let scale = 1.0 + 2.0 * omega.abs() + pts.iter().map(|&s| zp.dupsilon(s).abs()).fold(0.0, f64::max);
    let degenerate = g.iter().all(|v| v.abs() <= 1e-12 * scale);
    (g, degenerate)
}

pub fn rayleigh_criterion(zp: &ZonalProfile, omega: f64) -> RayleighReport {
    let pts = sample_points();
    let (g, degenerate) = gradient_is_degenerate(zp, omega, &pts);
    if degenerate {
        return RayleighReport { roots: vec![], verdict: CriterionVerdict::Degenerate };
    }
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut roots = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in g.iter().enumerate() {
        if v.abs() <= 1e-14 * scale {
            continue;
        }
        if let Some(j) = last {
            if (g[j] > 0.0) != (v > 0.0) {
                roots.push(bisect(|s| zp.total_gradient(s, omega), pts[j], pts[i]));
            }
        }
        last = Some(i);
    }
    let verdict = if roots.is_empty() { CriterionVerdict::NotMet } else { CriterionVerdict::Met };
    RayleighReport { roots, verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjortoftReport {
    /// `(γ, max_s (Υ0′+2ω)(−Ψ0′ − γ))` for each supplied γ.
    pub sampled: Vec<[f64; 2]>,
    /// Same quantity at `γ = −Ψ0′(s_r)` for each Rayleigh root `s_r`.
    pub critical: Vec<[f64; 2]>,
    /// Minimum over all γ of the (convex) maximum, located by ternary search.
    pub minimum: [f64; 2],
    pub verdict: CriterionVerdict,
}

pub fn fjortoft_criterion(zp: &ZonalProfile, omega: f64, gamma_samples: &[f64]) -> Result<FjortoftReport> {
    if gamma_samples.is_empty() {
        return Err(Error::Parameter("at least one gamma sample is required".into()));
    }
    let pts = sample_points();
    let (g, degenerate) = gradient_is_degenerate(zp, omega, &pts);
    let u: Vec<f64> = pts.iter().map(|&s| -zp.dpsi(s)).collect();
    let h = |gamma: f64| g.iter().zip(&u).map(|(gi, ui)| gi * (ui - gamma)).fold(f64::NEG_INFINITY, f64::max);
    let sampled: Vec<[f64; 2]> = gamma_samples.iter().map(|&gm| [gm, h(gm)]).collect();
    let critical: Vec<[f64; 2]> = rayleigh_criterion(zp, omega)
        .roots
        .iter()
        .map(|&s| {
            let gm = -zp.dpsi(s);
            [gm, h(gm)]
        })
        .collect();
    let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1.0 + (umax - umin);
    let (mut a, mut b) = (umin - pad, umax + pad);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if h(m1) <= h(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let gm = 0.5 * (a + b);
    let mut minimum = [gm, h(gm)];
    for c in critical.iter().chain(sampled.iter()) {
        if c[1] < minimum[1] {
            minimum = *c;
        }
    }
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max) * (1.0 + umax.abs().max(umin.abs()));
    let verdict = if degenerate {
        CriterionVerdict::Degenerate
    } else if minimum[1] > 1e-12 * scale {
        CriterionVerdict::Met
    } else {
        CriterionVerdict::NotMet
    };
    Ok(FjortoftReport { sampled, critical, minimum, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub k: i64,
    pub basis_size: usize,
    /// `[min Ψ0′, max Ψ0′]` over `[−1, 1]`.
    pub essential_interval: [f64; 2],
    /// All Galerkin eigenvalues `[re, im]`, sorted by real then imaginary part.
    pub eigenvalues: Vec<[f64; 2]>,
    /// Eigenvalues off the essential interval or off the real axis.
    pub discrete_eigenvalues: Vec<[f64; 2]>,
    pub spectral_radius: f64,
    /// Largest real part of `i k λ`.
    pub max_growth_rate: f64,
    pub pairing_defect: f64,
    pub unstable: bool,
}

/// Galerkin spectrum of `𝓛` in the orthonormal basis `√(2π) P̄_n^{|k|}(s)`, `n = |k| .. |k|+N−1`.
pub fn zonal_operator_spectrum(zp: &ZonalProfile, omega: f64, k: i64, basis_size: usize) -> Result<EigenReport> {
    if k == 0 {
        return Err(Error::Parameter("zonal wavenumber k must be non-zero".into()));
    }
    if basis_size == 0 {
        return Err(Error::Parameter("basis size must be positive".into()));
    }
    let ka = k.unsigned_abs() as usize;
    let nmax = ka + basis_size - 1;
    let nq = 2 * (nmax + 1) + 64;
    let (nodes, weights) = gauss_legendre(nq);
    let norm = (2.0 * PI).sqrt();
    let mut q = DMatrix::<f64>::zeros(basis_size, nq);
    let mut dpsi = vec![0.0; nq];
    let mut grad = vec![0.0; nq];
    for (i, &s) in nodes.iter().enumerate() {
        let table = legendre_table(nmax, s);
        for a in 0..basis_size {
            q[(a, i)] = norm * table[tri(ka + a, ka)];
        }
        let v = zp.eval(s);
        dpsi[i] = v[1];
        grad[i] = v[3] + 2.0 * omega;
    }
    let quad = |f: &dyn Fn(usize) -> f64, a: usize, b: usize| -> f64 {
        (0..nq).map(|i| weights[i] * q[(a, i)] * f(i) * q[(b, i)]).sum()
    };
    let mat = DMatrix::<f64>::from_fn(basis_size, basis_size, |a, b| {
        let n = (ka + b) as f64;
        quad(&|i| dpsi[i] + grad[i] / (n * (n + 1.0)), a, b)
    });
    let ev = mat.complex_eigenvalues();
    let mut eigenvalues: Vec<[f64; 2]> = ev.iter().map(|z| [z.re, z.im]).collect();
    eigenvalues.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=2000 {
        let d = zp.dpsi(-1.0 + 2.0 * i as f64 / 2000.0);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let spectral_radius = eigenvalues.iter().map(|z| z[0].hypot(z[1])).fold(0.0, f64::max);
    let imag_tol = 1e-6 * spectral_radius.max(f64::MIN_POSITIVE);
    let real_tol = 1e-9 * (1.0 + spectral_radius);
    let discrete_eigenvalues: Vec<[f64; 2]> = eigenvalues
        .iter()
        .filter(|z| z[1].abs() > imag_tol || z[0] < lo - real_tol || z[0] > hi + real_tol)
        .cloned()
        .collect();
    let mut pairing_defect: f64 = 0.0;
    for z in &eigenvalues {
        if z[1].abs() > imag_tol {
            let best = eigenvalues
                .iter()
                .map(|w| (w[0] - z[0]).hypot(w[1] + z[1]))
                .fold(f64::INFINITY, f64::min);
            pairing_defect = pairing_defect.max(best);
        }
    }
    let kf = k as f64;
    let max_growth_rate = eigenvalues.iter().map(|z| -kf * z[1]).fold(f64::NEG_INFINITY, f64::max);
    let unstable = max_growth_rate > imag_tol * kf.abs();
    Ok(EigenReport {
        k,
        basis_size,
        essential_interval: [lo, hi],
        eigenvalues,
        discrete_eigenvalues,
        spectral_radius,
        max_growth_rate,
        pairing_defect,
        unstable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAmplitude {
    /// Largest amplitude found stable.
    pub lower: f64,
    /// Smallest amplitude found unstable.
    pub upper: f64,
}

/// Brackets the smallest amplitude `β > 0` at which `make(β)` becomes linearly unstable:
/// geometric scan from `start` by factors of `1.25` up to `stop`, then bisection to relative width `rel_tol`.
pub fn critical_amplitude(
    make: impl Fn(f64) -> ZonalProfile,
    omega: f64,
    k: i64,
    basis_size: usize,
    start: f64,
    stop: f64,
    rel_tol: f64,
) -> Result<CriticalAmplitude> {
    let unstable = |b: f64| zonal_operator_spectrum(&make(b), omega, k, basis_size).map(|r| r.unstable);
    if unstable(start)? {
        return Err(Error::Parameter(format!("already unstable at the starting amplitude {start}")));
    }
    let mut lo = start;
    let mut hi = start * 1.25;
    while !unstable(hi)? {
        lo = hi;
        hi *= 1.25;
        if hi > stop {
            return Err(Error::Numerical(format!("no instability found below amplitude {stop}")));
        }
    }
    while (hi - lo) / hi > rel_tol {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalAmplitude { lower: lo, upper: hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_profile_matches_closed_form() {
        // ψ0 = Y_2^0 = √(5/4π)(3s²−1)/2
        let zp = ZonalProfile::from_legendre(vec![0.0, 0.0, 1.0]);
        let n = (5.0 / (4.0 * PI)).sqrt();
        let s: f64 = 0.3;
        let v = zp.eval(s);
        assert!((v[0] - n * (3.0 * s * s - 1.0) / 2.0).abs() < 1e-15);
        assert!((v[1] - n * 3.0 * s).abs() < 1e-15);
        assert!((v[2] + 6.0 * v[0]).abs() < 1e-15);
        assert!(zp.consistency_defect(50) < 1e-8);
    }

    #[test]
    fn sin_lat_rayleigh_fails() {
        let r = rayleigh_criterion(&ZonalProfile::sin_lat(0.4), 1.0);
        assert_eq!(r.verdict, CriterionVerdict::NotMet);
        let r = rayleigh_criterion(&ZonalProfile::sin_lat(1.0), 1.0);
        assert_eq!(r.verdict, CriterionVerdict::Degenerate);
    }

    #[test]
    fn sin_squared_profile_meets_both() {
        let omega = 1.5;
        let w = omega;
        let zp = ZonalProfile::from_functions(
            move |s| w / 3.0 * s * s,
            move |s| 2.0 * w / 3.0 * s,
            move |s| 2.0 * w / 3.0 * (1.0 - 3.0 * s * s),
            move |s| -4.0 * w * s,
        );
        assert!(zp.consistency_defect(100) < 1e-8);
        let r = rayleigh_criterion(&zp, omega);
        assert_eq!(r.verdict, CriterionVerdict::Met);
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - 0.5).abs() < 1e-12);
        let f = fjortoft_criterion(&zp, omega, &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.verdict, CriterionVerdict::Met);
        assert!((f.critical[0][0] + omega / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sin_lat_fjortoft_fails() {
        let f = fjortoft_criterion(&ZonalProfile::sin_lat(0.4), 1.0, &[0.0]).unwrap();
        assert_eq!(f.verdict, CriterionVerdict::NotMet);
        assert!(fjortoft_criterion(&ZonalProfile::sin_lat(0.4), 1.0, &[]).is_err());
    }

    #[test]
    fn sin_lat_spectrum_is_explicit() {
        let (alpha, omega) = (1.0, 2.0);
        let rep = zonal_operator_spectrum(&ZonalProfile::sin_lat(alpha), omega, 2, 16).unwrap();
        assert!(!rep.unstable);
        for (i, z) in rep.eigenvalues.iter().rev().enumerate() {
            let n = (2 + i) as f64;
            assert!((z[0] - (alpha - 2.0 * (alpha - omega) / (n * (n + 1.0)))).abs() < 1e-12);
            assert!(z[1].abs() < 1e-12);
        }
        assert!(zonal_operator_spectrum(&ZonalProfile::sin_lat(alpha), omega, 0, 16).is_err());
    }
}
