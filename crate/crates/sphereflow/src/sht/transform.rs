//! Analysis and synthesis between Gauss grids and harmonic coefficients.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{index, SpectralField};
use super::grid::{build_grid, GaussGrid, TruncationSpec};
use super::legendre::{legendre_table_with_derivative, tri, tri_len};
use crate::error::{Error, Result};

/// Values on a Gauss grid, row-major by latitude node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T = f64> {
    pub nlat: usize,
    pub nlon: usize,
    pub values: Vec<T>,
}

impl<T: Copy + Default> GridField<T> {
    pub fn zeros(nlat: usize, nlon: usize) -> Self {
        Self { nlat, nlon, values: vec![T::default(); nlat * nlon] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.nlon + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.nlon..(i + 1) * self.nlon]
    }
}

impl GridField<f64> {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { nlat: self.nlat, nlon: self.nlon, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { nlat: self.nlat, nlon: self.nlon, values }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Derivative {
    None,
    Theta,
    Phi,
}

/// Precomputed Legendre tables and FFT plans for one grid.
///
/// Tables are stored per latitude in order-major layout: entry `(l, m)` sits at
/// `moff[m] + l - m`, so the inner degree loops run over contiguous memory.
#[derive(Clone)]
pub struct Transform {
    spec: TruncationSpec,
    grid: GaussGrid,
    moff: Vec<usize>,
    p: Vec<f64>,
    dp: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: usize,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("spec", &self.spec).finish()
    }
}

impl Transform {
    pub fn new(spec: TruncationSpec) -> Result<Self> {
        let grid = build_grid(&spec)?;
        let lmax = spec.lmax;
        let nt = tri_len(lmax);
        let moff: Vec<usize> = (0..=lmax).map(|m| m * (2 * lmax + 3 - m) / 2).collect();
        let mut p = vec![0.0; spec.nlat * nt];
        let mut dp = vec![0.0; spec.nlat * nt];
        for (i, &s) in grid.nodes.iter().enumerate() {
            let (a, b) = legendre_table_with_derivative(lmax, s);
            for m in 0..=lmax {
                for l in m..=lmax {
                    p[i * nt + moff[m] + l - m] = a[tri(l, m)];
                    dp[i * nt + moff[m] + l - m] = b[tri(l, m)];
                }
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(spec.nlon);
        let inv = planner.plan_fft_inverse(spec.nlon);
        let scratch = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Ok(Self { spec, grid, moff, p, dp, fwd, inv, scratch })
    }

    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GaussGrid {
        &self.grid
    }

    pub fn lmax(&self) -> usize {
        self.spec.lmax
    }

    /// `Y_l^m` sampled on the grid.
    pub fn harmonic(&self, l: usize, m: i64) -> Result<GridField<Complex64>> {
        if l > self.spec.lmax {
            return Err(Error::Parameter(format!("degree {l} exceeds lmax {}", self.spec.lmax)));
        }
        let f = SpectralField::harmonic(self.spec.lmax, l, m)?;
        self.synthesis_complex(&f)
    }

    /// Synthesis of a real-valued field (only orders `m >= 0` are read).
    pub fn synthesis(&self, c: &SpectralField) -> Result<GridField<f64>> {
        self.synth_real(c, Derivative::None)
    }

    pub fn synthesis_dtheta(&self, c: &SpectralField) -> Result<GridField<f64>> {
        self.synth_real(c, Derivative::Theta)
    }

    pub fn synthesis_dphi(&self, c: &SpectralField) -> Result<GridField<f64>> {
        self.synth_real(c, Derivative::Phi)
    }

    /// `(∂_θ f, ∂_φ f)` of a real field.
    pub fn synthesis_gradient(&self, c: &SpectralField) -> Result<(GridField<f64>, GridField<f64>)> {
        Ok((self.synth_real(c, Derivative::Theta)?, self.synth_real(c, Derivative::Phi)?))
    }

    fn check_field(&self, c: &SpectralField) -> Result<()> {
        if c.lmax() > self.spec.lmax {
            return Err(Error::Dimension { expected: self.spec.lmax, got: c.lmax() });
        }
        Ok(())
    }

    /// Coefficients of orders `sign * m`, `m >= 0`, gathered into the table layout.
    fn gather(&self, c: &SpectralField, negative: bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); tri_len(self.spec.lmax)];
        let coeffs = c.coeffs();
        for m in 0..=c.lmax() {
            let o = self.moff[m];
            let mi = if negative { -(m as i64) } else { m as i64 };
            for l in m..=c.lmax() {
                out[o + l - m] = coeffs[index(l, mi)];
            }
        }
        out
    }

    #[inline]
    fn dot(&self, row: &[f64], cm: &[Complex64], m: usize, lc: usize) -> Complex64 {
        let o = self.moff[m];
        let n = lc + 1 - m;
        let (mut re, mut im) = (0.0, 0.0);
        for (c, r) in cm[o..o + n].iter().zip(&row[o..o + n]) {
            re += c.re * r;
            im += c.im * r;
        }
        Complex64::new(re, im)
    }

    fn synth_real(&self, c: &SpectralField, d: Derivative) -> Result<GridField<f64>> {
        self.check_field(c)?;
        let (nlat, nlon) = (self.spec.nlat, self.spec.nlon);
        let lc = c.lmax();
        let nt = tri_len(self.spec.lmax);
        let table = if d == Derivative::Theta { &self.dp } else { &self.p };
        let cm = self.gather(c, false);
        let mut out = GridField::zeros(nlat, nlon);
        let mut buf = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch];
        for i in 0..nlat {
            let row = &table[i * nt..(i + 1) * nt];
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for m in 0..=lc {
                let mut g = self.dot(row, &cm, m, lc);
                if d == Derivative::Phi {
                    g *= Complex64::new(0.0, m as f64);
                }
                if m == 0 {
                    buf[0] = Complex64::new(g.re, 0.0);
                } else {
                    buf[m] += g;
                    buf[nlon - m] += g.conj();
                }
            }
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            for (o, b) in out.values[i * nlon..(i + 1) * nlon].iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        Ok(out)
    }

    /// Synthesis of a general complex field.
    pub fn synthesis_complex(&self, c: &SpectralField) -> Result<GridField<Complex64>> {
        self.check_field(c)?;
        let (nlat, nlon) = (self.spec.nlat, self.spec.nlon);
        let lc = c.lmax();
        let nt = tri_len(self.spec.lmax);
        let cp = self.gather(c, false);
        let cn = self.gather(c, true);
        let mut out = GridField::zeros(nlat, nlon);
        let mut buf = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch];
        for i in 0..nlat {
            let row = &self.p[i * nt..(i + 1) * nt];
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for m in 0..=lc {
                buf[m % nlon] += self.dot(row, &cp, m, lc);
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    buf[nlon - m] += self.dot(row, &cn, m, lc) * sign;
                }
            }
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            out.values[i * nlon..(i + 1) * nlon].copy_from_slice(&buf);
        }
        Ok(out)
    }

    fn check_grid<T>(&self, f: &GridField<T>) -> Result<()> {
        if f.nlat != self.spec.nlat || f.nlon != self.spec.nlon {
            return Err(Error::Dimension { expected: self.spec.nlat * self.spec.nlon, got: f.nlat * f.nlon });
        }
        Ok(())
    }

    /// Real-field analysis truncated at the transform's `lmax`.
    pub fn analysis(&self, f: &GridField<f64>) -> Result<SpectralField> {
        self.analysis_to(f, self.spec.lmax)
    }

    #[inline]
    fn accumulate(&self, acc: &mut [Complex64], row: &[f64], fm: Complex64, m: usize, lout: usize) {
        let o = self.moff[m];
        let n = lout + 1 - m;
        for (a, r) in acc[o..o + n].iter_mut().zip(&row[o..o + n]) {
            a.re += fm.re * r;
            a.im += fm.im * r;
        }
    }

    /// Real-field analysis truncated at `lmax_out <= lmax`.
    pub fn analysis_to(&self, f: &GridField<f64>, lmax_out: usize) -> Result<SpectralField> {
        self.check_grid(f)?;
        if lmax_out > self.spec.lmax {
            return Err(Error::Dimension { expected: self.spec.lmax, got: lmax_out });
        }
        let (nlat, nlon) = (self.spec.nlat, self.spec.nlon);
        let nt = tri_len(self.spec.lmax);
        let scale = 2.0 * PI / nlon as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch];
        let mut acc = vec![Complex64::new(0.0, 0.0); nt];
        for i in 0..nlat {
            for (b, v) in buf.iter_mut().zip(f.row(i)) {
                *b = Complex64::new(*v, 0.0);
            }
            self.fwd.process_with_scratch(&mut buf, &mut scratch);
            let w = self.grid.weights[i] * scale;
            let row = &self.p[i * nt..(i + 1) * nt];
            for m in 0..=lmax_out {
                self.accumulate(&mut acc, row, buf[m] * w, m, lmax_out);
            }
        }
        let mut out = SpectralField::zeros(lmax_out, true);
        let coeffs = out.coeffs_mut();
        for m in 0..=lmax_out {
            let o = self.moff[m];
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for l in m..=lmax_out {
                let c = acc[o + l - m];
                if m == 0 {
                    coeffs[index(l, 0)] = Complex64::new(c.re, 0.0);
                } else {
                    coeffs[index(l, m as i64)] = c;
                    coeffs[index(l, -(m as i64))] = c.conj() * sign;
                }
            }
        }
        Ok(out)
    }

    /// Analysis of a complex grid field.
    pub fn analysis_complex(&self, f: &GridField<Complex64>) -> Result<SpectralField> {
        self.check_grid(f)?;
        let (nlat, nlon) = (self.spec.nlat, self.spec.nlon);
        let lmax = self.spec.lmax;
        let nt = tri_len(lmax);
        let scale = 2.0 * PI / nlon as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch];
        let mut ap = vec![Complex64::new(0.0, 0.0); nt];
        let mut an = vec![Complex64::new(0.0, 0.0); nt];
        for i in 0..nlat {
            buf.copy_from_slice(f.row(i));
            self.fwd.process_with_scratch(&mut buf, &mut scratch);
            let w = self.grid.weights[i] * scale;
            let row = &self.p[i * nt..(i + 1) * nt];
            for m in 0..=lmax {
                self.accumulate(&mut ap, row, buf[m] * w, m, lmax);
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    self.accumulate(&mut an, row, buf[(nlon - m) % nlon] * (w * sign), m, lmax);
                }
            }
        }
        let mut out = SpectralField::zeros(lmax, false);
        let coeffs = out.coeffs_mut();
        for m in 0..=lmax {
            let o = self.moff[m];
            for l in m..=lmax {
                coeffs[index(l, m as i64)] = ap[o + l - m];
                if m > 0 {
                    coeffs[index(l, -(m as i64))] = an[o + l - m];
                }
            }
        }
        Ok(out)
    }

    /// Quadrature of a real grid field over the sphere.
    pub fn integrate(&self, f: &GridField<f64>) -> f64 {
        self.grid.integrate(&f.values)
    }

    /// Grid field of `g(phi, theta)`.
    pub fn sample(&self, g: impl Fn(f64, f64) -> f64) -> GridField<f64> {
        let (nlat, nlon) = (self.spec.nlat, self.spec.nlon);
        let mut out = GridField::zeros(nlat, nlon);
        for i in 0..nlat {
            let th = self.grid.latitude(i);
            for j in 0..nlon {
                out.values[i * nlon + j] = g(self.grid.longitudes[j], th);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lmax: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(lmax, true);
        for l in 0..=lmax {
            for m in 0..=l as i64 {
                f.set(l, m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        f
    }

    #[test]
    fn basis_round_trip() {
        let t = Transform::new(TruncationSpec::minimal(8)).unwrap();
        let mut f = SpectralField::zeros(8, true);
        f.set(1, 0, Complex64::new(1.0, 0.0));
        let back = t.analysis(&t.synthesis(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-13);
        let zero = t.analysis(&GridField::zeros(9, 18)).unwrap();
        assert_eq!(zero.norm_sqr(), 0.0);
    }

    #[test]
    fn random_round_trip_lmax31() {
        let t = Transform::new(TruncationSpec::minimal(31)).unwrap();
        let f = random_field(31, 7);
        let back = t.analysis(&t.synthesis(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn complex_round_trip() {
        let t = Transform::new(TruncationSpec::minimal(12)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs = (0..169).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = SpectralField::from_coeffs(12, coeffs, false).unwrap();
        let back = t.analysis_complex(&t.synthesis_complex(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn harmonics_orthonormal_under_quadrature() {
        let lmax = 10;
        let t = Transform::new(TruncationSpec::minimal(lmax)).unwrap();
        let mut ys = Vec::new();
        for l in 0..=lmax {
            for m in -(l as i64)..=l as i64 {
                ys.push(t.harmonic(l, m).unwrap());
            }
        }
        let g = t.grid();
        let nlon = g.nlon();
        for (a, ya) in ys.iter().enumerate() {
            for (b, yb) in ys.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..g.nlat() {
                    for j in 0..nlon {
                        acc += ya.at(i, j) * yb.at(i, j).conj() * g.weights[i];
                    }
                }
                acc *= 2.0 * PI / nlon as f64;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn real_grid_gives_real_coefficients() {
        let t = Transform::new(TruncationSpec::minimal(9)).unwrap();
        let g = t.sample(|p, th| (th.sin() * 3.0).exp() * (p.cos() + 0.2 * (3.0 * p).sin()));
        let c = t.analysis(&g).unwrap();
        assert!(c.reality_defect() == 0.0);
        let cc = t.analysis_complex(&GridField { nlat: g.nlat, nlon: g.nlon, values: g.values.iter().map(|v| Complex64::new(*v, 0.0)).collect() }).unwrap();
        let mut d = cc.clone();
        d.set_real_valued(true);
        assert!(cc.reality_defect() < 1e-14);
        assert!(cc.max_abs_diff(&c) < 1e-14);
    }

    #[test]
    fn spectral_derivatives_match_closed_forms() {
        let t = Transform::new(TruncationSpec::minimal(6)).unwrap();
        let mut f = SpectralField::zeros(6, true);
        f.add_real_harmonic(2, 1, 1.0);
        // R_2^1 = -(1/2) sqrt(15/pi) s c cos(phi)
        let k = -0.5 * (15.0 / PI).sqrt();
        let dt = t.synthesis_dtheta(&f).unwrap();
        let dp = t.synthesis_dphi(&f).unwrap();
        let et = t.sample(|p, th| k * (2.0 * th).cos() * p.cos());
        let ep = t.sample(|p, th| -k * th.sin() * th.cos() * p.sin());
        assert!(dt.zip_map(&et, |a, b| a - b).max_abs() < 1e-13);
        assert!(dp.zip_map(&ep, |a, b| a - b).max_abs() < 1e-13);
    }
}
