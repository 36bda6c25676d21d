//! Spherical-harmonic coefficient vectors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::legendre::{legendre_table, legendre_table_with_derivative, tri};
use crate::error::{Error, Result};

/// Position of `c_l^m` in the coefficient vector: degree ascending, order from `-l` to `l`.
#[inline]
pub fn index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

#[inline]
pub fn field_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Coefficients `c_l^m` of `f = Σ c_l^m Y_l^m`, `0 <= l <= lmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    lmax: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl SpectralField {
    pub fn zeros(lmax: usize, real_valued: bool) -> Self {
        Self { lmax, coeffs: vec![Complex64::new(0.0, 0.0); field_len(lmax)], real_valued }
    }

    pub fn from_coeffs(lmax: usize, coeffs: Vec<Complex64>, real_valued: bool) -> Result<Self> {
        if coeffs.len() != field_len(lmax) {
            return Err(Error::Dimension { expected: field_len(lmax), got: coeffs.len() });
        }
        Ok(Self { lmax, coeffs, real_valued })
    }

    /// A single harmonic `Y_l^m` (complex-valued unless `m == 0`).
    pub fn harmonic(lmax: usize, l: usize, m: i64) -> Result<Self> {
        check_order(l, m)?;
        if l > lmax {
            return Err(Error::Parameter(format!("degree {l} exceeds lmax {lmax}")));
        }
        let mut f = Self::zeros(lmax, m == 0);
        f.coeffs[index(l, m)] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    /// The real basis function `R_l^m` (sine type for `m < 0`, cosine type for `m > 0`).
    pub fn real_harmonic(lmax: usize, l: usize, m: i64) -> Result<Self> {
        check_order(l, m)?;
        if l > lmax {
            return Err(Error::Parameter(format!("degree {l} exceeds lmax {lmax}")));
        }
        let mut f = Self::zeros(lmax, true);
        f.add_real_harmonic(l, m, 1.0);
        Ok(f)
    }

    /// Adds `a * R_l^m`.
    pub fn add_real_harmonic(&mut self, l: usize, m: i64, a: f64) {
        let k = m.unsigned_abs() as i64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let r = a * FRAC_1_SQRT_2;
        if m == 0 {
            self.coeffs[index(l, 0)] += Complex64::new(a, 0.0);
        } else if m > 0 {
            self.coeffs[index(l, k)] += Complex64::new(r, 0.0);
            self.coeffs[index(l, -k)] += Complex64::new(sign * r, 0.0);
        } else {
            self.coeffs[index(l, -k)] += Complex64::new(0.0, r);
            self.coeffs[index(l, k)] += Complex64::new(0.0, -sign * r);
        }
    }

    /// Coordinate of a real field along `R_l^m`.
    pub fn real_coefficient(&self, l: usize, m: i64) -> f64 {
        let k = m.unsigned_abs() as i64;
        let c = self.coeffs[index(l, k)];
        if m == 0 {
            c.re
        } else if m > 0 {
            std::f64::consts::SQRT_2 * c.re
        } else {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            -sign * std::f64::consts::SQRT_2 * c.im
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn set_real_valued(&mut self, flag: bool) {
        self.real_valued = flag;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[index(l, m)]
    }

    /// Sets `c_l^m`; on a real-valued field the partner `c_l^{-m}` is set as well.
    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        if self.real_valued && m == 0 {
            self.coeffs[index(l, 0)] = Complex64::new(v.re, 0.0);
            return;
        }
        self.coeffs[index(l, m)] = v;
        if self.real_valued {
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            self.coeffs[index(l, -m)] = v.conj() * sign;
        }
    }

    /// Largest violation of `c_l^{-m} = (-1)^m conj(c_l^m)`.
    pub fn reality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for l in 0..=self.lmax {
            d = d.max(self.coeffs[index(l, 0)].im.abs());
            for m in 1..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                d = d.max((self.coeffs[index(l, -m)] - self.coeffs[index(l, m)].conj() * sign).norm());
            }
        }
        d
    }

    /// Projects onto real-valued fields by averaging each `(m, -m)` pair.
    pub fn symmetrize(&mut self) {
        for l in 0..=self.lmax {
            let c0 = self.coeffs[index(l, 0)];
            self.coeffs[index(l, 0)] = Complex64::new(c0.re, 0.0);
            for m in 1..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let avg = (self.coeffs[index(l, m)] + self.coeffs[index(l, -m)].conj() * sign) * 0.5;
                self.coeffs[index(l, m)] = avg;
                self.coeffs[index(l, -m)] = avg.conj() * sign;
            }
        }
        self.real_valued = true;
    }

    /// Copy with a different truncation (zero-padded or cut).
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax, self.real_valued);
        let n = field_len(lmax.min(self.lmax));
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let f = -((l * (l + 1)) as f64);
            for m in -(l as i64)..=l as i64 {
                out.coeffs[index(l, m)] *= f;
            }
        }
        out
    }

    /// Zero-mean solution of `Δψ = self`; the mean coefficient must vanish to `1e-10` (relative).
    pub fn invert_laplacian(&self) -> Result<Self> {
        let c00 = self.coeffs[0].norm();
        let scale = self.l2_norm().max(1.0);
        if c00 > 1e-10 * scale {
            return Err(Error::NonZeroMean(c00));
        }
        Ok(self.invert_laplacian_unchecked())
    }

    /// As [`invert_laplacian`](Self::invert_laplacian) but silently drops the mean.
    pub fn invert_laplacian_unchecked(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        for l in 1..=self.lmax {
            let f = -1.0 / ((l * (l + 1)) as f64);
            for m in -(l as i64)..=l as i64 {
                out.coeffs[index(l, m)] *= f;
            }
        }
        out
    }

    /// `Σ |c_l^m|^2`, the squared L² norm on the sphere.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `Σ_m |c_l^m|^2` for each degree.
    pub fn degree_power(&self) -> Vec<f64> {
        (0..=self.lmax)
            .map(|l| (-(l as i64)..=l as i64).map(|m| self.coeffs[index(l, m)].norm_sqr()).sum())
            .collect()
    }

    /// `<self, other>` in L²(S²): `Σ c_l^m conj(d_l^m)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// `self += a * other` (truncations must agree).
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.lmax, other.lmax);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real_valued &= other.real_valued;
    }

    /// Keeps degrees `lo..=hi` only.
    pub fn band(&self, lo: usize, hi: usize) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            if l < lo || l > hi {
                for m in -(l as i64)..=l as i64 {
                    out.coeffs[index(l, m)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or_default();
                let b = other.coeffs.get(i).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Point value at longitude `phi` and `s = sin(theta)`.
    pub fn eval(&self, phi: f64, s: f64) -> Complex64 {
        let p = legendre_table(self.lmax, s);
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..=self.lmax {
            acc += self.coeffs[index(l, 0)] * p[tri(l, 0)];
            for m in 1..=l {
                let e = Complex64::from_polar(1.0, m as f64 * phi);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                acc += self.coeffs[index(l, m as i64)] * p[tri(l, m)] * e;
                acc += self.coeffs[index(l, -(m as i64))] * (sign * p[tri(l, m)]) * e.conj();
            }
        }
        acc
    }

    /// Value with `∂_θ` and `∂_φ` at an interior point (`|s| < 1`).
    pub fn eval_with_gradient(&self, phi: f64, s: f64) -> [Complex64; 3] {
        let (p, dp) = legendre_table_with_derivative(self.lmax, s);
        let mut v = Complex64::new(0.0, 0.0);
        let mut dt = v;
        let mut dph = v;
        for l in 0..=self.lmax {
            let c = self.coeffs[index(l, 0)];
            v += c * p[tri(l, 0)];
            dt += c * dp[tri(l, 0)];
            for m in 1..=l {
                let e = Complex64::from_polar(1.0, m as f64 * phi);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let cp = self.coeffs[index(l, m as i64)] * e;
                let cm = self.coeffs[index(l, -(m as i64))] * e.conj() * sign;
                let i = Complex64::new(0.0, m as f64);
                v += (cp + cm) * p[tri(l, m)];
                dt += (cp + cm) * dp[tri(l, m)];
                dph += (cp - cm) * i * p[tri(l, m)];
            }
        }
        [v, dt, dph]
    }
}

fn check_order(l: usize, m: i64) -> Result<()> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Parameter(format!("order {m} exceeds degree {l}")));
    }
    Ok(())
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

/// Coefficient of `sin(theta)` on `Y_1^0`: `sin(theta) = 2 sqrt(pi/3) Y_1^0`.
pub fn sin_lat_coefficient() -> f64 {
    2.0 * (PI / 3.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        assert_eq!(index(0, 0), 0);
        assert_eq!(index(1, -1), 1);
        assert_eq!(index(1, 1), 3);
        assert_eq!(index(2, -2), 4);
        assert_eq!(field_len(3), 16);
    }

    #[test]
    fn laplacian_pair() {
        let y = SpectralField::harmonic(4, 2, 1).unwrap();
        assert_eq!(y.laplacian().get(2, 1), Complex64::new(-6.0, 0.0));
        let mut psi = SpectralField::zeros(4, true);
        psi.set(3, 2, Complex64::new(0.3, -0.7));
        psi.set(1, 0, Complex64::new(1.1, 0.0));
        let back = psi.laplacian().invert_laplacian().unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-15);
        let mut bad = psi.clone();
        bad.set(0, 0, Complex64::new(1.0, 0.0));
        assert!(bad.invert_laplacian().is_err());
    }

    #[test]
    fn real_basis_matches_closed_forms() {
        let (phi, th) = (0.7f64, 0.3f64);
        let (s, c) = (th.sin(), th.cos());
        let r = |l, m| SpectralField::real_harmonic(2, l, m).unwrap().eval(phi, s);
        let k = (15.0 / PI).sqrt();
        assert!((r(2, -2).re - 0.25 * k * c * c * (2.0 * phi).sin()).abs() < 1e-14);
        assert!((r(2, -1).re - 0.5 * k * s * c * phi.sin()).abs() < 1e-14);
        assert!((r(2, 1).re + 0.5 * k * s * c * phi.cos()).abs() < 1e-14);
        assert!((r(1, -1).re - 0.5 * (3.0 / PI).sqrt() * c * phi.sin()).abs() < 1e-14);
        assert!((r(1, 1).re + 0.5 * (3.0 / PI).sqrt() * c * phi.cos()).abs() < 1e-14);
        for (l, m) in [(2, -2), (2, -1), (2, 1), (1, 1)] {
            let f = SpectralField::real_harmonic(2, l, m).unwrap();
            assert!(f.reality_defect() < 1e-16);
            assert!((f.l2_norm() - 1.0).abs() < 1e-15);
            assert!((f.real_coefficient(l, m) - 1.0).abs() < 1e-15);
            assert!(r(l, m).im.abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_point_evaluation() {
        let mut f = SpectralField::zeros(5, true);
        f.set(3, 2, Complex64::new(0.4, 0.1));
        f.set(5, 1, Complex64::new(-0.2, 0.3));
        f.set(2, 0, Complex64::new(0.5, 0.0));
        let (phi, th, h) = (1.1f64, -0.4f64, 1e-5);
        let [_, dt, dp] = f.eval_with_gradient(phi, th.sin());
        let fdt = (f.eval(phi, (th + h).sin()) - f.eval(phi, (th - h).sin())) / (2.0 * h);
        let fdp = (f.eval(phi + h, th.sin()) - f.eval(phi - h, th.sin())) / (2.0 * h);
        assert!((dt - fdt).norm() < 1e-8);
        assert!((dp - fdp).norm() < 1e-8);
    }
}
