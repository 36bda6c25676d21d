//! Symmetric Galerkin–Newton continuation of non-trivial solutions branching off `ψ = 0`.
//!
//! The unknown `f` lives in the span of an orthonormal basis of real harmonics invariant under a
//! finite subgroup of O(3). Two problems are covered:
//!
//! * `ω = 0`: `𝔽(λ, f) = f − Δ^{-1}{F(λ, f) − ⟨F⟩}` with `F(λ, f) = P(λ + f) − P(λ)`;
//! * `ω > 0`: `𝔽(λ, f) = f − Δ^{-1}{G − ⟨G⟩}`, `G = P((1+λ²) f − μ z) − 2ν z`, recovering
//!   `ψ = f − μ z/(1+λ²)`.
//!
//! `⟨·⟩` is the mean over the sphere.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sht::rotation::{det, mat_mul, Mat3};
use crate::sht::{GridField, OrthogonalMap, Rotator, SpectralField, Transform, TruncationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupId {
    /// Full tetrahedral group `T_d`, order 24.
    Tetrahedral,
    /// Dihedral group generated by the improper fourfold rotation about `z` and a half-turn
    /// about `x` (order 8).
    D4d,
    Trivial,
    Custom,
}

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub id: GroupId,
    pub elements: Vec<Mat3>,
}

fn same(a: &Mat3, b: &Mat3) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).abs() < 1e-9)
}

impl SymmetryGroup {
    /// Closure of the generators under composition; fails for infinite or huge groups.
    pub fn from_generators(id: GroupId, generators: &[Mat3]) -> Result<Self> {
        for g in generators {
            let gt = crate::sht::rotation::transpose(g);
            let gg = mat_mul(&gt, g);
            let id3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            if !same(&gg, &id3) {
                return Err(Error::Parameter("generator is not orthogonal".into()));
            }
        }
        let mut elements: Vec<Mat3> = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        let mut queue: VecDeque<Mat3> = elements.iter().cloned().collect();
        while let Some(e) = queue.pop_front() {
            for g in generators {
                let p = mat_mul(g, &e);
                if !elements.iter().any(|x| same(x, &p)) {
                    if elements.len() >= 240 {
                        return Err(Error::Parameter("generators do not close to a small finite group".into()));
                    }
                    elements.push(p);
                    queue.push_back(p);
                }
            }
        }
        Ok(Self { id, elements })
    }

    pub fn tetrahedral() -> Self {
        let c3 = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let c2 = [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let mirror = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        Self::from_generators(GroupId::Tetrahedral, &[c3, c2, mirror]).expect("tetrahedral group closes")
    }

    pub fn d4d() -> Self {
        let s4 = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]];
        let c2x = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        Self::from_generators(GroupId::D4d, &[s4, c2x]).expect("dihedral group closes")
    }

    pub fn trivial() -> Self {
        Self::from_generators(GroupId::Trivial, &[]).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn maps(&self) -> Vec<OrthogonalMap> {
        self.elements.iter().map(OrthogonalMap::from_matrix).collect()
    }

    pub fn improper_count(&self) -> usize {
        self.elements.iter().filter(|m| det(m) < 0.0).count()
    }
}

/// Orthonormal real basis of the invariant harmonics of degrees `1..=lmax`.
#[derive(Debug, Clone)]
pub struct SymmetrySubspace {
    pub group: GroupId,
    pub lmax: usize,
    pub basis: Vec<SpectralField>,
    /// Degree of each basis element.
    pub degrees: Vec<usize>,
    /// Invariant dimension per degree, index `l`.
    pub dims: Vec<usize>,
    /// Degrees whose invariant space is one-dimensional and non-zonal.
    pub admissible_degrees: Vec<usize>,
}

impl SymmetrySubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Index of the (unique) basis element of degree `l`.
    pub fn generator(&self, l: usize) -> Option<usize> {
        if self.dims.get(l) == Some(&1) {
            self.degrees.iter().position(|&d| d == l)
        } else {
            None
        }
    }

    pub fn field(&self, coeffs: &[f64]) -> SpectralField {
        let mut f = SpectralField::zeros(self.lmax, true);
        for (b, &a) in self.basis.iter().zip(coeffs) {
            f.axpy(a, b);
        }
        f
    }

    /// Coordinates of the orthogonal projection of a real field.
    pub fn coordinates(&self, f: &SpectralField) -> Vec<f64> {
        self.basis.iter().map(|b| b.inner(f).re).collect()
    }
}

/// Group-averaging projector on degree `l` in the real basis `R_l^m`, `m = −l..l`.
fn degree_projector(l: usize, rotators: &[Rotator]) -> DMatrix<f64> {
    let n = 2 * l + 1;
    let mut p = DMatrix::zeros(n, n);
    for (j, m) in (-(l as i64)..=l as i64).enumerate() {
        let r = SpectralField::real_harmonic(l, l, m).expect("valid degree");
        let mut avg = SpectralField::zeros(l, true);
        for rot in rotators {
            avg.axpy(1.0, &rot.apply(&r));
        }
        let avg = avg.scaled(1.0 / rotators.len() as f64);
        for (i, k) in (-(l as i64)..=l as i64).enumerate() {
            p[(i, j)] = avg.real_coefficient(l, k);
        }
    }
    p
}

pub fn build_subspace(group: &SymmetryGroup, lmax: usize) -> Result<SymmetrySubspace> {
    let rotators: Vec<Rotator> = group.maps().iter().map(|g| Rotator::new(lmax, g)).collect();
    let mut basis = Vec::new();
    let mut degrees = Vec::new();
    let mut dims = vec![0; lmax + 1];
    let mut admissible_degrees = Vec::new();
    for l in 1..=lmax {
        let p = degree_projector(l, &rotators);
        let sym = (&p + p.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vecs: Vec<DVector<f64>> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        // canonical orientation: for one-dimensional spaces make the largest component positive
        for v in vecs {
            let mut v = v;
            let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 + 1e-12 { (i, x.abs()) } else { acc });
            if v[imax] < 0.0 {
                v = -v;
            }
            let mut f = SpectralField::zeros(lmax, true);
            for (i, m) in (-(l as i64)..=l as i64).enumerate() {
                f.add_real_harmonic(l, m, v[i]);
            }
            basis.push(f);
            degrees.push(l);
        }
        dims[l] = idx.len();
        if idx.len() == 1 {
            let b = basis.last().expect("just pushed");
            let zonal = (b.get(l, 0).norm_sqr() - 1.0).abs() < 1e-12;
            if !zonal {
                admissible_degrees.push(l);
            }
        }
    }
    if basis.is_empty() {
        return Err(Error::Parameter(format!("no invariant harmonics up to degree {lmax}")));
    }
    Ok(SymmetrySubspace { group: group.id, lmax, basis, degrees, dims, admissible_degrees })
}

/// Nonlinearities of the two problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `F(λ,f) = P(λ+f) − P(λ)`, `P(x) = μ1 x³ − (μ + l(l+1)) x`.
    Cubic { mu: f64, mu1: f64, l: usize },
    /// `F(λ,f) = −l(l+1) f`.
    Linear { l: usize },
    /// Rotating problem with `P(x) = −(2ν/μ) x` on `|x| ≤ 2μ`, continued by
    /// `±κ (|x| − 2μ)³` outside, `ν = β l(l+1)/(l(l+1) − 2)`.
    Rotating { mu: f64, beta: f64, l: usize, kappa: f64 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Cubic { mu, mu1, .. } if !(mu > 0.0 && mu1 > 0.0) => {
                Err(Error::Parameter("cubic family needs μ > 0 and μ1 > 0".into()))
            }
            Nonlinearity::Rotating { mu, beta, l, kappa } => {
                if l < 2 || !(beta > 0.0) || !(kappa > 0.0) {
                    return Err(Error::Parameter("rotating family needs l ≥ 2, β > 0, κ > 0".into()));
                }
                let nu = self.nu().unwrap_or(0.0);
                let e = (l * (l + 1)) as f64;
                if !(mu > 2.0 * nu / e) {
                    return Err(Error::Parameter(format!("μ = {mu} must exceed 2ν/(l(l+1)) = {}", 2.0 * nu / e)));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_rotating(&self) -> bool {
        matches!(self, Nonlinearity::Rotating { .. })
    }

    /// `ν` of the rotating family.
    pub fn nu(&self) -> Option<f64> {
        match *self {
            Nonlinearity::Rotating { beta, l, .. } => {
                let e = (l * (l + 1)) as f64;
                Some(beta * e / (e - 2.0))
            }
            _ => None,
        }
    }

    /// The scalar polynomial/profile `P` and its first two derivatives.
    pub fn p(&self, x: f64) -> [f64; 3] {
        match *self {
            Nonlinearity::Cubic { mu, mu1, l } => {
                let c = mu + (l * (l + 1)) as f64;
                [mu1 * x * x * x - c * x, 3.0 * mu1 * x * x - c, 6.0 * mu1 * x]
            }
            Nonlinearity::Linear { l } => {
                let e = (l * (l + 1)) as f64;
                [-e * x, -e, 0.0]
            }
            Nonlinearity::Rotating { mu, kappa, .. } => {
                let k = 2.0 * self.nu().unwrap_or(0.0) / mu;
                let excess = x.abs() - 2.0 * mu;
                if excess <= 0.0 {
                    [-k * x, -k, 0.0]
                } else {
                    let sg = x.signum();
                    [-k * x + sg * kappa * excess.powi(3), -k + 3.0 * kappa * excess * excess, sg * 6.0 * kappa * excess]
                }
            }
        }
    }

    /// `(G, ∂_f G, ∂_λ G)` at one point with latitude sine `z`.
    fn pointwise(&self, lambda: f64, f: f64, z: f64) -> [f64; 3] {
        match *self {
            Nonlinearity::Cubic { .. } => {
                let a = self.p(lambda + f);
                let b = self.p(lambda);
                [a[0] - b[0], a[1], a[1] - b[1]]
            }
            Nonlinearity::Linear { l } => {
                let e = (l * (l + 1)) as f64;
                [-e * f, -e, 0.0]
            }
            Nonlinearity::Rotating { mu, .. } => {
                let nu = self.nu().unwrap_or(0.0);
                let q = 1.0 + lambda * lambda;
                let p = self.p(q * f - mu * z);
                [p[0] - 2.0 * nu * z, q * p[1], 2.0 * lambda * f * p[1]]
            }
        }
    }

    /// `F_f(λ, 0)` (constant over the sphere for all families).
    pub fn linear_coefficient(&self, lambda: f64) -> f64 {
        match *self {
            Nonlinearity::Cubic { .. } => self.p(lambda)[1],
            Nonlinearity::Linear { l } => -((l * (l + 1)) as f64),
            Nonlinearity::Rotating { mu, .. } => -(1.0 + lambda * lambda) * 2.0 * self.nu().unwrap_or(0.0) / mu,
        }
    }

    /// `∂_λ F_f(λ, 0)`.
    pub fn linear_coefficient_slope(&self, lambda: f64) -> f64 {
        match *self {
            Nonlinearity::Cubic { .. } => self.p(lambda)[2],
            Nonlinearity::Linear { .. } => 0.0,
            Nonlinearity::Rotating { mu, .. } => -4.0 * lambda * self.nu().unwrap_or(0.0) / mu,
        }
    }
}

/// Constants of the a-priori estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriBounds {
    pub a_plus: f64,
    pub a_minus: f64,
    pub big_a: f64,
    /// `sup|ψ| + |λ|` bound, `2(a₊ − a₋)` (ω = 0) or `μ + b` for `sup|ψ|` (ω > 0).
    pub sup_bound: f64,
    /// `sup|Δψ|` bound `2A` (ω = 0 only).
    pub lap_bound: Option<f64>,
}

impl Nonlinearity {
    pub fn apriori_bounds(&self) -> Option<AprioriBounds> {
        match *self {
            Nonlinearity::Cubic { mu, mu1, l } => {
                let c = mu + (l * (l + 1)) as f64;
                let lc = (c / (3.0 * mu1)).sqrt();
                let big_a = 2.0 * c / 3.0 * lc;
                Some(AprioriBounds {
                    a_plus: 2.0 * lc,
                    a_minus: -2.0 * lc,
                    big_a,
                    sup_bound: 8.0 * lc,
                    lap_bound: Some(2.0 * big_a),
                })
            }
            Nonlinearity::Linear { .. } => None,
            Nonlinearity::Rotating { mu, .. } => {
                // a: P > 0 beyond a (P is odd); b: P(b) dominates |P| on [−a, a]
                let f = |x: f64| self.p(x)[0];
                let mut hi = 2.0 * mu + 1.0;
                while f(hi) <= 0.0 {
                    hi *= 2.0;
                }
                let a = bisect_root(f, 2.0 * mu, hi);
                let m = (0..=4000).map(|i| f(a * i as f64 / 4000.0).abs()).fold(0.0, f64::max);
                let mut hb = a + 1.0;
                while f(hb) < m {
                    hb *= 2.0;
                }
                let b = bisect_root(|x| f(x) - m, a, hb) * (1.0 + 1e-12) + 1e-12;
                Some(AprioriBounds { a_plus: a, a_minus: -a, big_a: m, sup_bound: mu + b, lap_bound: None })
            }
        }
    }
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..300 {
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

/// A nonlinearity restricted to an invariant subspace, with the grid used for products.
#[derive(Debug)]
pub struct ContinuationProblem {
    pub nonlinearity: Nonlinearity,
    pub subspace: SymmetrySubspace,
    transform: Transform,
    basis_grid: Vec<GridField<f64>>,
    z: Vec<f64>,
}

impl ContinuationProblem {
    pub fn new(nonlinearity: Nonlinearity, subspace: SymmetrySubspace) -> Result<Self> {
        nonlinearity.validate()?;
        let transform = Transform::new(TruncationSpec::for_products(subspace.lmax, 4))?;
        let basis_grid = subspace.basis.iter().map(|b| transform.synthesis(b)).collect::<Result<Vec<_>>>()?;
        let nlon = transform.spec().nlon;
        let z = (0..transform.spec().nlat * nlon).map(|k| transform.grid().nodes[k / nlon]).collect();
        Ok(Self { nonlinearity, subspace, transform, basis_grid, z })
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    fn grid_of(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.z.len()];
        for (b, &a) in self.basis_grid.iter().zip(coeffs) {
            for (gi, bi) in g.iter_mut().zip(&b.values) {
                *gi += a * bi;
            }
        }
        g
    }

    /// `Δ^{-1}(v − ⟨v⟩)` as a full spectral field up to the subspace cap.
    fn inverse_laplacian_of(&self, values: Vec<f64>) -> Result<SpectralField> {
        let spec = self.transform.spec();
        let grid = GridField { nlat: spec.nlat, nlon: spec.nlon, values };
        let mut c = self.transform.analysis_to(&grid, self.subspace.lmax)?;
        c.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        Ok(c.invert_laplacian_unchecked())
    }

    /// Galerkin residual in subspace coordinates.
    pub fn residual(&self, lambda: f64, coeffs: &[f64]) -> Result<Vec<f64>> {
        let full = self.full_residual(lambda, coeffs)?;
        Ok(self.subspace.coordinates(&full))
    }

    /// Residual before projection: `f − Δ^{-1}{G − ⟨G⟩}` over all harmonics up to the cap.
    pub fn full_residual(&self, lambda: f64, coeffs: &[f64]) -> Result<SpectralField> {
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: coeffs.len() });
        }
        let f = self.grid_of(coeffs);
        let g: Vec<f64> = f.iter().zip(&self.z).map(|(&fi, &zi)| self.nonlinearity.pointwise(lambda, fi, zi)[0]).collect();
        let h = self.inverse_laplacian_of(g)?;
        Ok(&self.subspace.field(coeffs) - &h)
    }

    /// `(∂_a 𝔽, ∂_λ 𝔽)` in subspace coordinates.
    pub fn jacobian(&self, lambda: f64, coeffs: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let n = self.dim();
        let f = self.grid_of(coeffs);
        let d: Vec<[f64; 3]> = f.iter().zip(&self.z).map(|(&fi, &zi)| self.nonlinearity.pointwise(lambda, fi, zi)).collect();
        let mut ja = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            let v: Vec<f64> = d.iter().zip(&self.basis_grid[j].values).map(|(dk, b)| dk[1] * b).collect();
            let col = self.subspace.coordinates(&self.inverse_laplacian_of(v)?);
            for i in 0..n {
                ja[(i, j)] -= col[i];
            }
        }
        let vl: Vec<f64> = d.iter().map(|dk| dk[2]).collect();
        let jl = -DVector::from_vec(self.subspace.coordinates(&self.inverse_laplacian_of(vl)?));
        Ok((ja, jl))
    }

    /// `(sup|ψ|, sup|Δψ|)` on the product grid, `ψ = f` (ω = 0) or `f − μz/(1+λ²)` (ω > 0).
    pub fn sup_norms(&self, lambda: f64, coeffs: &[f64]) -> Result<(f64, f64)> {
        let mut psi = self.subspace.field(coeffs);
        if let Nonlinearity::Rotating { mu, .. } = self.nonlinearity {
            let c = psi.get(1, 0) - Complex64::new(mu / (1.0 + lambda * lambda) * crate::sht::sin_lat_coefficient(), 0.0);
            psi.set(1, 0, c);
        }
        let g = self.transform.synthesis(&psi)?;
        let lap = self.transform.synthesis(&psi.laplacian())?;
        Ok((g.max_abs(), lap.max_abs()))
    }

    /// `max |(1+λ²) f − μ z|` on the grid (ω > 0 only).
    pub fn linear_regime_measure(&self, lambda: f64, coeffs: &[f64]) -> Option<f64> {
        match self.nonlinearity {
            Nonlinearity::Rotating { mu, .. } => {
                let q = 1.0 + lambda * lambda;
                let f = self.grid_of(coeffs);
                Some(f.iter().zip(&self.z).map(|(fi, zi)| (q * fi - mu * zi).abs()).fold(0.0, f64::max))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub lambda: f64,
    pub degree: usize,
    /// `∂_λ F_f(λ*, 0)`.
    pub transversality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub points: Vec<BifurcationPoint>,
    /// Crossings dropped because the transversality coefficient vanishes.
    pub rejected: Vec<BifurcationPoint>,
    /// Degrees for which `F_f(λ,0) + l(l+1)` vanishes identically on the range.
    pub degenerate_degrees: Vec<usize>,
}

/// Roots of `F_f(λ, 0) + l(l+1)` on `[lo, hi]` for every admissible degree.
pub fn detect_bifurcation_points(problem: &ContinuationProblem, lo: f64, hi: f64) -> Result<DetectionReport> {
    if !(hi > lo) {
        return Err(Error::Parameter("empty lambda range".into()));
    }
    let nl = problem.nonlinearity;
    let samples = 4000;
    let mut points = Vec::new();
    let mut rejected = Vec::new();
    let mut degenerate_degrees = Vec::new();
    for &l in &problem.subspace.admissible_degrees {
        let e = (l * (l + 1)) as f64;
        let h = |x: f64| nl.linear_coefficient(x) + e;
        let xs: Vec<f64> = (0..=samples).map(|i| lo + (hi - lo) * i as f64 / samples as f64).collect();
        let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
        let scale = 1.0 + e + hs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if hs.iter().all(|v| v.abs() <= 1e-13 * scale) {
            degenerate_degrees.push(l);
            continue;
        }
        let mut roots = Vec::new();
        for i in 0..samples {
            if hs[i] == 0.0 {
                roots.push(xs[i]);
            } else if hs[i] * hs[i + 1] < 0.0 {
                roots.push(bisect_root(h, xs[i], xs[i + 1]));
            }
        }
        if hs[samples] == 0.0 {
            roots.push(xs[samples]);
        }
        for lambda in roots {
            let t = nl.linear_coefficient_slope(lambda);
            let p = BifurcationPoint { lambda, degree: l, transversality: t };
            if t.abs() > 1e-9 * scale {
                points.push(p);
            } else {
                rejected.push(p);
            }
        }
    }
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(DetectionReport { points, rejected, degenerate_degrees })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { initial_step: 0.05, min_step: 1e-4, max_step: 0.2, newton_tol: 1e-10, max_newton: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub full_residual: f64,
    pub sup_psi: f64,
    pub sup_lap: f64,
    pub arclength: f64,
    pub bounds_ok: bool,
    /// `max |(1+λ²) f − μ z| ≤ 2μ` (ω > 0 only).
    pub linear_regime: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Completed,
    ReturnedToTrivial,
    BoundViolation,
    NewtonFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationBranch {
    pub origin: BifurcationPoint,
    pub bounds: Option<AprioriBounds>,
    pub points: Vec<BranchPoint>,
    pub status: BranchStatus,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ContinuationProblem {
    fn make_point(&self, lambda: f64, coeffs: Vec<f64>, arclength: f64, bounds: &Option<AprioriBounds>) -> Result<BranchPoint> {
        let residual = norm(&self.residual(lambda, &coeffs)?);
        let full_residual = self.full_residual(lambda, &coeffs)?.l2_norm();
        let (sup_psi, sup_lap) = self.sup_norms(lambda, &coeffs)?;
        let trivial = norm(&coeffs) == 0.0;
        let bounds_ok = match (bounds, self.nonlinearity.is_rotating()) {
            _ if trivial => true,
            (Some(b), false) => sup_psi + lambda.abs() <= b.sup_bound && b.lap_bound.is_none_or(|lb| sup_lap <= lb),
            (Some(b), true) => sup_psi <= b.sup_bound,
            (None, _) => true,
        };
        let linear_regime = match self.nonlinearity {
            Nonlinearity::Rotating { mu, .. } => self.linear_regime_measure(lambda, &coeffs).map(|m| m <= 2.0 * mu),
            _ => None,
        };
        Ok(BranchPoint { lambda, coeffs, residual, full_residual, sup_psi, sup_lap, arclength, bounds_ok, linear_regime })
    }

    /// One Newton corrector on the pseudo-arclength system; returns the point and iteration count.
    fn correct(&self, pred: &DVector<f64>, tangent: &DVector<f64>, opts: &ContinuationOptions) -> Option<(DVector<f64>, usize)> {
        let n = self.dim();
        let mut x = pred.clone();
        for it in 1..=opts.max_newton {
            let lambda = x[n];
            let coeffs: Vec<f64> = x.rows(0, n).iter().cloned().collect();
            let r = self.residual(lambda, &coeffs).ok()?;
            let (ja, jl) = self.jacobian(lambda, &coeffs).ok()?;
            let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
            m.view_mut((0, 0), (n, n)).copy_from(&ja);
            m.view_mut((0, n), (n, 1)).copy_from(&jl);
            m.view_mut((n, 0), (1, n + 1)).copy_from(&tangent.transpose());
            let mut rhs = DVector::<f64>::zeros(n + 1);
            for i in 0..n {
                rhs[i] = -r[i];
            }
            rhs[n] = -tangent.dot(&(&x - pred));
            let dx = m.lu().solve(&rhs)?;
            x += &dx;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            let coeffs: Vec<f64> = x.rows(0, n).iter().cloned().collect();
            let rn = norm(&self.residual(x[n], &coeffs).ok()?);
            if rn < opts.newton_tol && dx.norm() < 1e-6 {
                return Some((x, it));
            }
        }
        None
    }

    fn tangent_at(&self, x: &DVector<f64>, prev: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.dim();
        let coeffs: Vec<f64> = x.rows(0, n).iter().cloned().collect();
        let (ja, jl) = self.jacobian(x[n], &coeffs).ok()?;
        let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&ja);
        m.view_mut((0, n), (n, 1)).copy_from(&jl);
        m.view_mut((n, 0), (1, n + 1)).copy_from(&prev.transpose());
        let mut rhs = DVector::<f64>::zeros(n + 1);
        rhs[n] = 1.0;
        let t = m.lu().solve(&rhs)?;
        Some(t.normalize())
    }
}

/// Pseudo-arclength continuation from `(λ*, 0)` along `direction · f*`.
pub fn continue_branch(
    problem: &ContinuationProblem,
    origin: &BifurcationPoint,
    direction: f64,
    steps: usize,
    opts: &ContinuationOptions,
) -> Result<ContinuationBranch> {
    let n = problem.dim();
    let gi = problem
        .subspace
        .generator(origin.degree)
        .ok_or_else(|| Error::Parameter(format!("degree {} is not one-dimensional in the subspace", origin.degree)))?;
    let bounds = problem.nonlinearity.apriori_bounds();
    let mut points = vec![problem.make_point(origin.lambda, vec![0.0; n], 0.0, &bounds)?];
    let mut x = DVector::<f64>::zeros(n + 1);
    x[n] = origin.lambda;
    let mut tangent = DVector::<f64>::zeros(n + 1);
    tangent[gi] = if direction < 0.0 { -1.0 } else { 1.0 };
    let mut h = opts.initial_step;
    let mut arclength = 0.0;
    let mut failures = 0;
    let mut status = BranchStatus::Completed;
    let mut accepted = 0;
    while accepted < steps {
        let pred = &x + &tangent * h;
        match problem.correct(&pred, &tangent, opts) {
            Some((xn, iters)) => {
                failures = 0;
                let ds = (&xn - &x).norm();
                arclength += ds;
                let new_t = problem.tangent_at(&xn, &tangent).unwrap_or_else(|| tangent.clone());
                let new_t = if new_t.dot(&tangent) < 0.0 { -new_t } else { new_t };
                let coeffs: Vec<f64> = xn.rows(0, n).iter().cloned().collect();
                let p = problem.make_point(xn[n], coeffs, arclength, &bounds)?;
                let violated = !p.bounds_ok;
                let back = norm(&p.coeffs) < 1e-6 && (p.lambda - origin.lambda).abs() > 1e-3;
                points.push(p);
                x = xn;
                tangent = new_t;
                accepted += 1;
                if violated {
                    status = BranchStatus::BoundViolation;
                    break;
                }
                if back {
                    status = BranchStatus::ReturnedToTrivial;
                    break;
                }
                if iters <= 3 {
                    h = (h * 1.5).min(opts.max_step);
                }
            }
            None => {
                failures += 1;
                h *= 0.5;
                if failures >= 6 || h < opts.min_step {
                    status = BranchStatus::NewtonFailure;
                    break;
                }
            }
        }
    }
    Ok(ContinuationBranch { origin: origin.clone(), bounds, points, status })
}

/// Continuation of the rotating problem from its positive bifurcation point.
pub fn omega_branch(problem: &ContinuationProblem, steps: usize, opts: &ContinuationOptions) -> Result<ContinuationBranch> {
    let l = match problem.nonlinearity {
        Nonlinearity::Rotating { l, .. } => l,
        _ => return Err(Error::Parameter("omega_branch needs the rotating family".into())),
    };
    let e = (l * (l + 1)) as f64;
    let nl = problem.nonlinearity;
    let lambda_star = match nl {
        Nonlinearity::Rotating { mu, .. } => (mu * e / (2.0 * nl.nu().unwrap_or(1.0)) - 1.0).sqrt(),
        _ => unreachable!(),
    };
    let origin = BifurcationPoint { lambda: lambda_star, degree: l, transversality: nl.linear_coefficient_slope(lambda_star) };
    continue_branch(problem, &origin, 1.0, steps, opts)
}
