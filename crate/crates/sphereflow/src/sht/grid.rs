//! Gauss–Legendre latitude nodes and uniform longitudes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triangular truncation degree together with the quadrature grid that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub lmax: usize,
    pub nlat: usize,
    pub nlon: usize,
}

impl TruncationSpec {
    pub fn new(lmax: usize, nlat: usize, nlon: usize) -> Result<Self> {
        let spec = Self { lmax, nlat, nlon };
        spec.validate()?;
        Ok(spec)
    }

    /// Smallest grid on which analysis of a degree-`lmax` field is exact.
    pub fn minimal(lmax: usize) -> Self {
        Self { lmax, nlat: lmax + 1, nlon: 2 * lmax + 2 }
    }

    /// Grid on which products of two degree-`lmax` fields are resolved before
    /// truncating back to `lmax` (the 2/3 rule).
    pub fn dealiased(lmax: usize) -> Self {
        Self { lmax, nlat: (3 * lmax + 2) / 2 + 1, nlon: 3 * lmax + 2 }
    }

    /// Grid that integrates products of `k` degree-`lmax` fields exactly.
    pub fn for_products(lmax: usize, k: usize) -> Self {
        let nlat = (k * lmax + 2).div_ceil(2);
        Self { lmax, nlat: nlat.max(lmax + 1), nlon: (k * lmax + 2).max(2 * lmax + 2) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lmax < 1 {
            return Err(Error::Truncation("lmax must be at least 1".into()));
        }
        if self.nlat < self.lmax + 1 {
            return Err(Error::Truncation(format!(
                "nlat = {} is below lmax + 1 = {}",
                self.nlat,
                self.lmax + 1
            )));
        }
        if self.nlon < 2 * self.lmax + 1 {
            return Err(Error::Truncation(format!(
                "nlon = {} is below 2 lmax + 1 = {}",
                self.nlon,
                2 * self.lmax + 1
            )));
        }
        Ok(())
    }
}

/// Gauss nodes `s_i = sin(theta_i)` (ascending), their weights, and `nlon` equispaced longitudes.
#[derive(Debug, Clone)]
pub struct GaussGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub longitudes: Vec<f64>,
    /// `cos(theta_i) = sqrt(1 - s_i^2)`, strictly positive.
    pub cos_lat: Vec<f64>,
}

impl GaussGrid {
    pub fn nlat(&self) -> usize {
        self.nodes.len()
    }

    pub fn nlon(&self) -> usize {
        self.longitudes.len()
    }

    pub fn latitude(&self, i: usize) -> f64 {
        self.nodes[i].asin()
    }

    /// Quadrature of a grid function against the area element.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let nlon = self.nlon();
        let dphi = 2.0 * PI / nlon as f64;
        let mut total = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let row: f64 = values[i * nlon..(i + 1) * nlon].iter().sum();
            total += w * row;
        }
        total * dphi
    }
}

pub fn build_grid(spec: &TruncationSpec) -> Result<GaussGrid> {
    spec.validate()?;
    Ok(gauss_grid(spec.nlat, spec.nlon))
}

/// Grid without truncation checks; `nlat >= 1`, `nlon >= 1`.
pub fn gauss_grid(nlat: usize, nlon: usize) -> GaussGrid {
    let (nodes, weights) = gauss_legendre(nlat);
    let longitudes = (0..nlon).map(|j| 2.0 * PI * j as f64 / nlon as f64).collect();
    let cos_lat = nodes.iter().map(|s: &f64| (1.0 - s * s).sqrt()).collect();
    GaussGrid { nodes, weights, longitudes, cos_lat }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root, refined by Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
