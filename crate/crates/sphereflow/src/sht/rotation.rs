//! Rotations (and reflections) of fields through degree-preserving unitary blocks.
//!
//! For `g = R_z(gamma) R_y(beta) R_z(alpha)` acting on points, the transported field
//! `(Λ_g f)(x) = f(g^{-1} x)` has coefficients
//! `c'_l^k = Σ_m exp(-i k gamma) d^l_{km}(beta) exp(-i m alpha) c_l^m`.
//! The small-d matrix is taken from the closed form in generalized Legendre
//! polynomials for `l <= CLOSED_FORM_MAX_DEGREE` and from a three-term recurrence in
//! the degree above it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{index, SpectralField};

pub const CLOSED_FORM_MAX_DEGREE: usize = 10;

/// Euler angles for `g = R_z(gamma) R_y(beta) R_z(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RotationSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_apply(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for i in 0..3 {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2];
    }
    y
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn rz(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn ry(b: f64) -> Mat3 {
    let (s, c) = b.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

impl RotationSpec {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn matrix(&self) -> Mat3 {
        mat_mul(&mat_mul(&rz(self.gamma), &ry(self.beta)), &rz(self.alpha))
    }

    /// Euler angles of a proper rotation matrix.
    pub fn from_matrix(r: &Mat3) -> Self {
        let cb = r[2][2].clamp(-1.0, 1.0);
        let beta = cb.acos();
        let sb = beta.sin();
        if sb > 1e-12 {
            let gamma = r[1][2].atan2(r[0][2]);
            let alpha = r[2][1].atan2(-r[2][0]);
            Self { alpha, beta, gamma }
        } else if cb > 0.0 {
            Self { alpha: r[1][0].atan2(r[0][0]), beta: 0.0, gamma: 0.0 }
        } else {
            Self { alpha: r[0][1].atan2(r[1][1]), beta: std::f64::consts::PI, gamma: 0.0 }
        }
    }
}

/// Element of O(3): a rotation optionally composed with the antipodal map `x -> -x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct OrthogonalMap {
    pub rotation: RotationSpec,
    pub parity: bool,
}

impl OrthogonalMap {
    pub fn proper(rotation: RotationSpec) -> Self {
        Self { rotation, parity: false }
    }

    pub fn matrix(&self) -> Mat3 {
        let mut m = self.rotation.matrix();
        if self.parity {
            m.iter_mut().flatten().for_each(|v| *v = -*v);
        }
        m
    }

    pub fn from_matrix(m: &Mat3) -> Self {
        if det(m) < 0.0 {
            let mut r = *m;
            r.iter_mut().flatten().for_each(|v| *v = -*v);
            Self { rotation: RotationSpec::from_matrix(&r), parity: true }
        } else {
            Self { rotation: RotationSpec::from_matrix(m), parity: false }
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Generalized associated Legendre polynomial `P_l^{mk}(cos beta)`, equal to `d^l_{km}(beta)`.
pub fn generalized_legendre(l: usize, m: i64, k: i64, beta: f64) -> f64 {
    let j = l as i64;
    let n = (j - m) as usize;
    let a = (j - k) as usize;
    let b = (j + k) as usize;
    let norm = (factorial((j + m) as usize) / (factorial(a) * factorial(b) * factorial(n))).sqrt();
    let (sh, ch) = (0.5 * beta).sin_cos();
    let mut sum = 0.0;
    for r in 0..=n {
        if r > a || n - r > b {
            continue;
        }
        let e_s = 2 * j - 2 * r as i64 - k - m;
        let e_c = 2 * r as i64 + m + k;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let term = binomial(n, r) * sign * factorial(a) / factorial(a - r) * factorial(b) / factorial(b + r - n)
            * sh.powi(e_s as i32)
            * ch.powi(e_c as i32);
        sum += term;
    }
    let lead = if (j - m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    lead * norm * sum
}

/// `d^l_{km}(beta)` from the closed form, `(2l+1)^2` entries row-major in `(k, m)`.
pub fn small_d_closed_form(l: usize, beta: f64) -> Vec<f64> {
    let n = 2 * l + 1;
    let li = l as i64;
    let mut d = vec![0.0; n * n];
    for k in -li..=li {
        for m in -li..=li {
            d[((k + li) * n as i64 + m + li) as usize] = generalized_legendre(l, m, k, beta);
        }
    }
    d
}

fn seed_top(j: i64, k: i64, sh: f64, ch: f64) -> f64 {
    // d^j_{j,k}
    let lnb = 0.5 * (ln_factorial((2 * j) as usize) - ln_factorial((j + k) as usize) - ln_factorial((j - k) as usize));
    let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
    sign * lnb.exp() * ch.powi((j + k) as i32) * sh.powi((j - k) as i32)
}

fn seed(j0: i64, k: i64, m: i64, sh: f64, ch: f64) -> f64 {
    // d^{j0}_{km} with j0 = max(|k|, |m|)
    if k.abs() >= m.abs() {
        if k == j0 {
            seed_top(j0, m, sh, ch)
        } else {
            let sign = if (j0 + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sign * seed_top(j0, -m, sh, ch)
        }
    } else {
        let sign = if (k - m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * seed(j0, m, k, sh, ch)
    }
}

/// `d^l_{km}(beta)` for all `l <= lmax` by the degree recurrence.
pub fn small_d_recurrence(lmax: usize, beta: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)]).collect();
    let (sh, ch) = (0.5 * beta).sin_cos();
    let cb = beta.cos();
    let lm = lmax as i64;
    for k in -lm..=lm {
        for m in -lm..=lm {
            let j0 = k.abs().max(m.abs());
            let mut prev2 = 0.0;
            let mut prev1 = seed(j0, k, m, sh, ch);
            let put = |out: &mut Vec<Vec<f64>>, j: i64, v: f64| {
                let n = 2 * j + 1;
                out[j as usize][((k + j) * n + m + j) as usize] = v;
            };
            put(&mut out, j0, prev1);
            for j in (j0 + 1)..=lm {
                let jf = j as f64;
                let (kf, mf) = (k as f64, m as f64);
                let pre = jf * (2.0 * jf - 1.0) / ((jf * jf - kf * kf) * (jf * jf - mf * mf)).sqrt();
                let mixed = if j > 1 { kf * mf / (jf * (jf - 1.0)) } else { 0.0 };
                let mut v = (cb - mixed) * prev1;
                if j - 1 > j0 {
                    let j1 = jf - 1.0;
                    let c2 = ((j1 * j1 - kf * kf) * (j1 * j1 - mf * mf)).sqrt() / (j1 * (2.0 * jf - 1.0));
                    v -= c2 * prev2;
                }
                v *= pre;
                prev2 = prev1;
                prev1 = v;
                put(&mut out, j, v);
            }
        }
    }
    out
}

/// Precomputed per-degree blocks for one element of O(3).
#[derive(Debug, Clone)]
pub struct Rotator {
    lmax: usize,
    blocks: Vec<Vec<Complex64>>,
}

impl Rotator {
    pub fn new(lmax: usize, g: &OrthogonalMap) -> Self {
        let r = g.rotation;
        let rec = if lmax > CLOSED_FORM_MAX_DEGREE { Some(small_d_recurrence(lmax, r.beta)) } else { None };
        let mut blocks = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            let d = if l <= CLOSED_FORM_MAX_DEGREE {
                small_d_closed_form(l, r.beta)
            } else {
                rec.as_ref().map(|v| v[l].clone()).unwrap_or_default()
            };
            let n = 2 * l + 1;
            let li = l as i64;
            let par = if g.parity && l % 2 == 1 { -1.0 } else { 1.0 };
            let mut u = vec![Complex64::new(0.0, 0.0); n * n];
            for k in -li..=li {
                for m in -li..=li {
                    let idx = ((k + li) * n as i64 + m + li) as usize;
                    let phase = Complex64::from_polar(1.0, -(k as f64) * r.gamma - (m as f64) * r.alpha);
                    u[idx] = phase * d[idx] * par;
                }
            }
            blocks.push(u);
        }
        Self { lmax, blocks }
    }

    /// Block for degree `l`, row-major in `(k, m)`.
    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.blocks[l]
    }

    pub fn apply(&self, c: &SpectralField) -> SpectralField {
        let lmax = c.lmax().min(self.lmax);
        let mut out = SpectralField::zeros(c.lmax(), c.is_real_valued());
        for l in 0..=lmax {
            let n = 2 * l + 1;
            let li = l as i64;
            let u = &self.blocks[l];
            for k in -li..=li {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in -li..=li {
                    acc += u[((k + li) * n as i64 + m + li) as usize] * c.get(l, m);
                }
                out.coeffs_mut()[index(l, k)] = acc;
            }
        }
        out
    }

    /// Largest entry of `U U^H - I` over all blocks.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, u) in self.blocks.iter().enumerate() {
            let n = 2 * l + 1;
            for a in 0..n {
                for b in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        s += u[a * n + k] * u[b * n + k].conj();
                    }
                    let e = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s - e).norm());
                }
            }
        }
        worst
    }
}

/// Coefficients of `x -> f(g^{-1} x)` for `g = R_z(gamma) R_y(beta) R_z(alpha)`.
pub fn rotate(c: &SpectralField, r: &RotationSpec) -> SpectralField {
    Rotator::new(c.lmax(), &OrthogonalMap::proper(*r)).apply(c)
}

/// As [`rotate`] for a general element of O(3).
pub fn transform_by(c: &SpectralField, g: &OrthogonalMap) -> SpectralField {
    Rotator::new(c.lmax(), g).apply(c)
}
