//! Kinematics and integral diagnostics of a stream function.
//!
//! Velocity is `u = -∂_θψ` (eastward) and `v = ∂_φψ / cosθ` (northward); vorticity is `Ω = Δψ`.
//! The advection bracket `J(ψ, q) = (−∂_θψ ∂_φq + ∂_φψ ∂_θq) / cosθ` is evaluated on a
//! grid that resolves quadratic products and truncated back.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sht::legendre::{legendre_table, tri};
use crate::sht::{gauss_grid, GridField, SpectralField, Transform, TruncationSpec};

#[derive(Debug, Clone)]
pub struct VelocityField {
    pub u: GridField<f64>,
    pub v: GridField<f64>,
}

/// `u = −∂_θψ`, `v = ∂_φψ / cosθ` on the transform's grid.
pub fn velocity_from_stream(tr: &Transform, psi: &SpectralField) -> Result<VelocityField> {
    let (dt, dp) = tr.synthesis_gradient(psi)?;
    let cos = &tr.grid().cos_lat;
    let nlon = tr.spec().nlon;
    let u = dt.map(|x| -x);
    let mut v = dp;
    for (k, x) in v.values.iter_mut().enumerate() {
        *x /= cos[k / nlon];
    }
    Ok(VelocityField { u, v })
}

fn times_cos(tr: &Transform, f: &GridField<f64>, power: i32) -> GridField<f64> {
    let nlon = tr.spec().nlon;
    let cos = &tr.grid().cos_lat;
    let mut out = f.clone();
    for (k, x) in out.values.iter_mut().enumerate() {
        *x *= cos[k / nlon].powi(power);
    }
    out
}

/// Curl and divergence of a grid velocity, both analysed to degree `lmax_out`.
///
/// Goes through `u cosθ` and `v cosθ`, which are band-limited to `lmax_out + 1` for a
/// velocity derived from a degree-`lmax_out` stream function.
pub fn curl_and_divergence(tr: &Transform, vel: &VelocityField, lmax_out: usize) -> Result<(SpectralField, SpectralField)> {
    if tr.lmax() < lmax_out + 1 {
        return Err(Error::Dimension { expected: lmax_out + 1, got: tr.lmax() });
    }
    let a = tr.analysis_to(&times_cos(tr, &vel.u, 1), lmax_out + 1)?;
    let b = tr.analysis_to(&times_cos(tr, &vel.v, 1), lmax_out + 1)?;
    let (a_t, a_p) = tr.synthesis_gradient(&a)?;
    let (b_t, b_p) = tr.synthesis_gradient(&b)?;
    let curl = times_cos(tr, &b_p, -2).zip_map(&times_cos(tr, &a_t, -1), |x, y| x - y);
    let div = times_cos(tr, &a_p, -2).zip_map(&times_cos(tr, &b_t, -1), |x, y| x + y);
    Ok((tr.analysis_to(&curl, lmax_out)?, tr.analysis_to(&div, lmax_out)?))
}

/// Transforms shared by the nonlinear term and the diagnostics at one truncation.
pub struct FlowOps {
    lmax: usize,
    dealiased: Transform,
    products: [OnceLock<Transform>; 4],
}

impl std::fmt::Debug for FlowOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowOps").field("lmax", &self.lmax).finish()
    }
}

impl FlowOps {
    pub fn new(lmax: usize) -> Result<Self> {
        Ok(Self {
            lmax,
            dealiased: Transform::new(TruncationSpec::dealiased(lmax))?,
            products: Default::default(),
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn transform(&self) -> &Transform {
        &self.dealiased
    }

    /// Grid exact for products of `k` degree-`lmax` fields, `2 <= k <= 5`.
    pub fn product_transform(&self, k: usize) -> Result<&Transform> {
        if !(2..=5).contains(&k) {
            return Err(Error::Parameter(format!("moment order {k} not in 2..=5")));
        }
        let cell = &self.products[k - 2];
        if let Some(t) = cell.get() {
            return Ok(t);
        }
        let t = Transform::new(TruncationSpec::for_products(self.lmax, k))?;
        Ok(cell.get_or_init(|| t))
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.lmax() != self.lmax {
            return Err(Error::Dimension { expected: self.lmax, got: f.lmax() });
        }
        Ok(())
    }

    pub fn velocity(&self, psi: &SpectralField) -> Result<VelocityField> {
        self.check(psi)?;
        velocity_from_stream(&self.dealiased, psi)
    }

    /// Dealiased `J(ψ, q)` with the mean coefficient set to zero.
    pub fn advection(&self, psi: &SpectralField, q: &SpectralField) -> Result<SpectralField> {
        let j = self.bracket_grid(psi, q)?;
        let mut out = self.dealiased.analysis(&j)?;
        out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        Ok(out)
    }

    /// `J(ψ, q)` sampled on the dealiased grid, before truncation.
    pub fn bracket_grid(&self, psi: &SpectralField, q: &SpectralField) -> Result<GridField<f64>> {
        self.check(psi)?;
        self.check(q)?;
        let tr = &self.dealiased;
        let (pt, pp) = tr.synthesis_gradient(psi)?;
        let (qt, qp) = tr.synthesis_gradient(q)?;
        let nlon = tr.spec().nlon;
        let cos = &tr.grid().cos_lat;
        let mut j = GridField::zeros(tr.spec().nlat, nlon);
        for k in 0..j.values.len() {
            j.values[k] = (-pt.values[k] * qp.values[k] + pp.values[k] * qt.values[k]) / cos[k / nlon];
        }
        Ok(j)
    }

    /// `∫ (Δψ)^k dσ` by exact quadrature.
    pub fn casimir_moment(&self, psi: &SpectralField, k: usize) -> Result<f64> {
        self.vorticity_moment(&psi.laplacian(), k)
    }

    /// `∫ (Δψ + 2ω sinθ)^k dσ`, the moment conserved on a rotating sphere.
    pub fn potential_vorticity_moment(&self, psi: &SpectralField, omega: f64, k: usize) -> Result<f64> {
        let mut q = psi.laplacian();
        add_planetary_vorticity(&mut q, omega);
        self.vorticity_moment(&q, k)
    }

    /// `∫ q^k dσ` by exact quadrature.
    pub fn vorticity_moment(&self, q: &SpectralField, k: usize) -> Result<f64> {
        self.check(q)?;
        let tr = self.product_transform(k)?;
        let g = tr.synthesis(q)?;
        Ok(tr.integrate(&g.map(|x| x.powi(k as i32))))
    }

    pub fn diagnostics(&self, time: f64, psi: &SpectralField) -> Result<DiagnosticRecord> {
        let mut casimir = [0.0; 4];
        for k in 2..=5 {
            casimir[k - 2] = self.casimir_moment(psi, k)?;
        }
        Ok(DiagnosticRecord {
            time,
            energy: energy(psi),
            enstrophy: enstrophy(psi),
            casimir,
            c1: first_modes(psi),
            modal_energy_by_degree: modal_energy(psi),
        })
    }
}

/// Adds `2ω sinθ` through its exact `Y_1^0` coefficient.
pub fn add_planetary_vorticity(q: &mut SpectralField, omega: f64) {
    let c = q.get(1, 0) + 2.0 * omega * crate::sht::sin_lat_coefficient();
    q.coeffs_mut()[crate::sht::index(1, 0)] = c;
}

/// `½ ∫ |U|^2 dσ = ½ Σ l(l+1) |c_l^m|^2`.
pub fn energy(psi: &SpectralField) -> f64 {
    modal_energy(psi).iter().sum()
}

/// `∫ (Δψ)^2 dσ = Σ l^2 (l+1)^2 |c_l^m|^2`.
pub fn enstrophy(psi: &SpectralField) -> f64 {
    psi.degree_power().iter().enumerate().map(|(l, p)| ((l * (l + 1)) as f64).powi(2) * p).sum()
}

/// Kinetic energy carried by each degree.
pub fn modal_energy(psi: &SpectralField) -> Vec<f64> {
    psi.degree_power().iter().enumerate().map(|(l, p)| 0.5 * (l * (l + 1)) as f64 * p).collect()
}

/// `(c_1^{-1}, c_1^0, c_1^1)`.
pub fn first_modes(psi: &SpectralField) -> [Complex64; 3] {
    if psi.lmax() == 0 {
        return [Complex64::default(); 3];
    }
    [psi.get(1, -1), psi.get(1, 0), psi.get(1, 1)]
}

/// One factor `(Y_l^m)^power` of a harmonic product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicPower {
    pub l: usize,
    pub m: i64,
    pub power: u32,
}

impl HarmonicPower {
    pub fn new(l: usize, m: i64, power: u32) -> Self {
        Self { l, m, power }
    }
}

/// `∫ Π (Y_l^m)^power dσ` by Gauss quadrature, confirmed on a second, larger grid.
pub fn harmonic_product_integral(factors: &[HarmonicPower]) -> Result<f64> {
    for f in factors {
        if f.m.unsigned_abs() as usize > f.l {
            return Err(Error::Parameter(format!("order {} exceeds degree {}", f.m, f.l)));
        }
    }
    let degree: usize = factors.iter().map(|f| f.l * f.power as usize).sum();
    let nlat = degree / 2 + 1;
    let a = product_quadrature(factors, nlat, degree + 1);
    let b = product_quadrature(factors, nlat + 3, degree + 7);
    let scale = a.norm().max(b.norm()).max(1.0);
    if (a - b).norm() > 1e-12 * scale {
        return Err(Error::Quadrature(format!("estimates {a} and {b} disagree")));
    }
    Ok(b.re)
}

fn product_quadrature(factors: &[HarmonicPower], nlat: usize, nlon: usize) -> Complex64 {
    let grid = gauss_grid(nlat, nlon);
    let lmax = factors.iter().map(|f| f.l).max().unwrap_or(0);
    let dphi = 2.0 * PI / nlon as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &s) in grid.nodes.iter().enumerate() {
        let p = legendre_table(lmax, s);
        let mut row = Complex64::new(0.0, 0.0);
        for &phi in &grid.longitudes {
            let mut v = Complex64::new(1.0, 0.0);
            for f in factors {
                let k = f.m.unsigned_abs() as usize;
                let sign = if f.m < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
                let y = Complex64::from_polar(sign * p[tri(f.l, k)], f.m as f64 * phi);
                v *= y.powu(f.power);
            }
            row += v;
        }
        total += row * grid.weights[i];
    }
    total * dphi
}

/// Poincaré check for `ψ` with degrees `0..=n` removed: returns `(∫|Δψ|², (n+1)(n+2)∫|∇ψ|², holds)`.
pub fn poincare_check(psi: &SpectralField, n: usize) -> (f64, f64, bool) {
    let tail = psi.band(n + 1, psi.lmax());
    let lhs = enstrophy(&tail);
    let rhs = ((n + 1) * (n + 2)) as f64 * 2.0 * energy(&tail);
    (lhs, rhs, lhs >= rhs * (1.0 - 1e-12))
}

/// Invariants sampled along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub energy: f64,
    pub enstrophy: f64,
    /// `I_2 .. I_5`.
    pub casimir: [f64; 4],
    pub c1: [Complex64; 3],
    pub modal_energy_by_degree: Vec<f64>,
}

impl DiagnosticRecord {
    /// Columns: `time,energy,enstrophy,I2,I3,I4,I5`, real and imaginary parts of
    /// `c_1^{-1}, c_1^0, c_1^1`, then `E_0 .. E_lmax`.
    pub fn csv_header(lmax: usize) -> String {
        let mut h = String::from("time,energy,enstrophy,I2,I3,I4,I5,c1m1_re,c1m1_im,c10_re,c10_im,c1p1_re,c1p1_im");
        for l in 0..=lmax {
            h.push_str(&format!(",E{l}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = vec![fmt(self.time), fmt(self.energy), fmt(self.enstrophy)];
        cols.extend(self.casimir.iter().map(|&x| fmt(x)));
        for c in &self.c1 {
            cols.push(fmt(c.re));
            cols.push(fmt(c.im));
        }
        cols.extend(self.modal_energy_by_degree.iter().map(|&x| fmt(x)));
        cols.join(",")
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sht::sin_lat_coefficient;

    #[test]
    fn unit_y20_energy_and_enstrophy() {
        let psi = SpectralField::harmonic(4, 2, 0).unwrap();
        assert!((enstrophy(&psi) - 36.0).abs() < 1e-13);
        assert!((energy(&psi) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn sin_lat_velocity() {
        let ops = FlowOps::new(6).unwrap();
        let mut psi = SpectralField::zeros(6, true);
        psi.set(1, 0, Complex64::new(sin_lat_coefficient(), 0.0));
        let vel = ops.velocity(&psi).unwrap();
        let g = ops.transform().grid();
        for i in 0..g.nlat() {
            for j in 0..g.nlon() {
                assert!((vel.u.at(i, j) + g.cos_lat[i]).abs() < 1e-13);
                assert!(vel.v.at(i, j).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zonal_flows_commute() {
        let ops = FlowOps::new(10).unwrap();
        let mut a = SpectralField::zeros(10, true);
        let mut b = SpectralField::zeros(10, true);
        for l in 1..=10 {
            a.set(l, 0, Complex64::new(1.0 / l as f64, 0.0));
            b.set(l, 0, Complex64::new((l as f64).sin(), 0.0));
        }
        assert!(ops.advection(&a, &b).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn casimir_of_zero_vanishes() {
        let ops = FlowOps::new(5).unwrap();
        assert_eq!(ops.casimir_moment(&SpectralField::zeros(5, true), 2).unwrap(), 0.0);
        assert!(ops.casimir_moment(&SpectralField::zeros(5, true), 6).is_err());
    }

    #[test]
    fn poincare_sharp_and_strict() {
        let n = 3;
        let psi = SpectralField::harmonic(8, n + 1, 0).unwrap();
        let (lhs, rhs, ok) = poincare_check(&psi, n);
        assert!(ok && (lhs - rhs).abs() < 1e-10 * lhs);
        let psi = SpectralField::harmonic(8, n + 2, 0).unwrap();
        let (lhs, rhs, ok) = poincare_check(&psi, n);
        assert!(ok && lhs > rhs * (1.0 + 1e-3));
    }

    #[test]
    fn csv_row_matches_header() {
        let ops = FlowOps::new(4).unwrap();
        let psi = SpectralField::real_harmonic(4, 3, -2).unwrap();
        let rec = ops.diagnostics(0.5, &psi).unwrap();
        let ncols = DiagnosticRecord::csv_header(4).split(',').count();
        assert_eq!(rec.csv_row().split(',').count(), ncols);
    }
}
