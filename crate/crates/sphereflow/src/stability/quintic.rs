//! Quintic zonal wind profiles `U0 = α c⁵ + β c³ + γ c`, `c = cosθ`, their fit to observed
//! extremes, and the sufficient stability condition phrased through two quadratics in `x = c²`.

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticZonalProfile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub omega: f64,
}

impl QuinticZonalProfile {
    pub fn wind(&self, theta: f64) -> f64 {
        let c = theta.cos();
        c * (self.gamma + c * c * (self.beta + c * c * self.alpha))
    }
}

/// Minimum at the equator, maximum at the critical latitude with cosine `cos_critical`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticConstraints {
    pub cos_critical: Rational,
    pub min_value: Rational,
    pub max_value: Rational,
}

impl QuinticConstraints {
    pub fn uranus() -> Self {
        Self {
            cos_critical: Rational::new(1, 2),
            min_value: Rational::new(-8, 15),
            max_value: Rational::new(4, 3),
        }
    }

    pub fn neptune() -> Self {
        Self {
            cos_critical: Rational::new(1, 4),
            min_value: Rational::from_integer(-2),
            max_value: Rational::from_integer(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactQuintic {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub omega: Rational,
}

impl ExactQuintic {
    pub fn to_profile(&self) -> QuinticZonalProfile {
        let f = |r: Rational| r.to_f64().unwrap_or(f64::NAN);
        QuinticZonalProfile { alpha: f(self.alpha), beta: f(self.beta), gamma: f(self.gamma), omega: f(self.omega) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticFit {
    pub exact: ExactQuintic,
    pub profile: QuinticZonalProfile,
}

fn constraint_rows<T: Num + Copy>(c: T, min: T, max: T) -> ([[T; 3]; 3], [T; 3]) {
    let one = T::one();
    let c2 = c * c;
    let three = one + one + one;
    let five = three + one + one;
    (
        [[one, one, one], [five * c2 * c2, three * c2, one], [c2 * c2 * c, c2 * c, c]],
        [min, T::zero(), max],
    )
}

fn det3<T: Num + Copy>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cramer<T: Num + Copy>(m: [[T; 3]; 3], rhs: [T; 3], singular: impl Fn(T) -> bool) -> Result<[T; 3]> {
    let d = det3(&m);
    if singular(d) {
        return Err(Error::Singular);
    }
    let mut out = [T::zero(); 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = rhs[i];
        }
        *o = det3(&mj) / d;
    }
    Ok(out)
}

/// Exact solve of the 3×3 system fixing `U0(0)`, `U0′ = 0` and `U0` at the critical latitude.
pub fn fit_quintic_profile(cons: &QuinticConstraints, omega: Rational) -> Result<QuinticFit> {
    let (m, rhs) = constraint_rows(cons.cos_critical, cons.min_value, cons.max_value);
    let [alpha, beta, gamma] = cramer(m, rhs, |d: Rational| d.is_zero())?;
    let exact = ExactQuintic { alpha, beta, gamma, omega };
    Ok(QuinticFit { exact, profile: exact.to_profile() })
}

/// Floating-point variant for arbitrary real inputs.
pub fn fit_quintic_profile_f64(cos_critical: f64, min: f64, max: f64, omega: f64) -> Result<QuinticZonalProfile> {
    let (m, rhs) = constraint_rows(cos_critical, min, max);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let [alpha, beta, gamma] = cramer(m, rhs, |d: f64| d.abs() <= 1e-13 * scale.powi(3))?;
    Ok(QuinticZonalProfile { alpha, beta, gamma, omega })
}

/// `x² + b x + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub b: f64,
    pub c: f64,
    pub b_exact: Option<String>,
    pub c_exact: Option<String>,
    pub discriminant: f64,
    pub discriminant_exact: Option<String>,
    /// Real roots in `(0, 1]`.
    pub roots_in_unit: Vec<f64>,
}

impl Quadratic {
    fn from_f64(b: f64, c: f64) -> Self {
        let discriminant = b * b - 4.0 * c;
        let mut roots_in_unit = Vec::new();
        if discriminant >= 0.0 {
            let r = discriminant.sqrt();
            let q = -0.5 * (b + b.signum() * r);
            let mut rs = if q != 0.0 { vec![q, c / q] } else { vec![0.0, 0.0] };
            if discriminant == 0.0 {
                rs = vec![-0.5 * b];
            }
            rs.sort_by(f64::total_cmp);
            roots_in_unit = rs.into_iter().filter(|&x| x > 0.0 && x <= 1.0).collect();
        }
        Self { b, c, b_exact: None, c_exact: None, discriminant, discriminant_exact: None, roots_in_unit }
    }

    fn from_exact(b: Rational, c: Rational) -> Self {
        let f = |r: Rational| r.to_f64().unwrap_or(f64::NAN);
        let d = b * b - Rational::from_integer(4) * c;
        let mut q = Self::from_f64(f(b), f(c));
        if d.is_negative() {
            q.roots_in_unit.clear();
        }
        q.discriminant = f(d);
        q.b_exact = Some(b.to_string());
        q.c_exact = Some(c.to_string());
        q.discriminant_exact = Some(d.to_string());
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZonalVerdict {
    Stable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTestReport {
    /// Linear coefficient `β/α` of the first quadratic; its constant term is set by `A`.
    pub first_linear: f64,
    /// `x² + 2(β−2α)/(5α) x + (γ−ω−8β)/(15α)`.
    pub second: Quadratic,
    /// Constant term chosen for the first quadratic, when one works.
    pub first_constant: Option<f64>,
    /// `A` such that `(γ − ω + A)/α` equals `first_constant`.
    pub a_value: Option<f64>,
    pub verdict: ZonalVerdict,
    /// Second quadratic recomputed from `g′` with `g` the vorticity of `−U0 − ω cosθ`:
    /// constant term `(γ+ω−4β)/(15α)`.
    pub derived_second: Quadratic,
    pub derived_verdict: ZonalVerdict,
}

/// Searches a constant term for `x² + b1 x + c1` vanishing in `(0,1]` exactly where `second` does
/// and nowhere else on `[0,1]`.
fn admissible_constant(b1: f64, second: &Quadratic) -> Option<f64> {
    let tol = 1e-12 * (1.0 + b1.abs() + second.b.abs());
    match second.roots_in_unit.as_slice() {
        [] => {
            let vertex = -0.5 * b1;
            let mut worst = (-1.0 - b1).max(0.0);
            if vertex > 0.0 && vertex < 1.0 {
                worst = worst.max(0.25 * b1 * b1);
            }
            Some(worst + 1.0)
        }
        [r] if second.discriminant > 0.0 => {
            let c1 = -(r * r + b1 * r);
            let other = -b1 - r;
            if (0.0..=1.0).contains(&other) {
                None
            } else {
                Some(c1)
            }
        }
        _ => {
            if (b1 - second.b).abs() <= tol {
                Some(second.c)
            } else {
                None
            }
        }
    }
}

fn verdict(first_constant: Option<f64>) -> ZonalVerdict {
    if first_constant.is_some() {
        ZonalVerdict::Stable
    } else {
        ZonalVerdict::Inconclusive
    }
}

fn report(
    q: &QuinticZonalProfile,
    second: Quadratic,
    derived_second: Quadratic,
) -> QuadraticTestReport {
    let first_linear = q.beta / q.alpha;
    let first_constant = admissible_constant(first_linear, &second);
    let derived_constant = admissible_constant(first_linear, &derived_second);
    QuadraticTestReport {
        first_linear,
        a_value: first_constant.map(|c1| q.alpha * c1 - q.gamma + q.omega),
        verdict: verdict(first_constant),
        derived_verdict: verdict(derived_constant),
        first_constant,
        second,
        derived_second,
    }
}

pub fn theorem42_check(q: &QuinticZonalProfile) -> Result<QuadraticTestReport> {
    if q.alpha == 0.0 || !q.alpha.is_finite() {
        return Err(Error::Parameter("alpha must be non-zero".into()));
    }
    let (a, b, g, w) = (q.alpha, q.beta, q.gamma, q.omega);
    let lin = 2.0 * (b - 2.0 * a) / (5.0 * a);
    let second = Quadratic::from_f64(lin, (g - w - 8.0 * b) / (15.0 * a));
    let derived = Quadratic::from_f64(lin, (g + w - 4.0 * b) / (15.0 * a));
    Ok(report(q, second, derived))
}

/// Same check with the quadratic coefficients and discriminants computed exactly.
pub fn theorem42_check_exact(q: &ExactQuintic) -> Result<QuadraticTestReport> {
    if q.alpha.is_zero() {
        return Err(Error::Parameter("alpha must be non-zero".into()));
    }
    let r = |n: i128| Rational::from_integer(n);
    let (a, b, g, w) = (q.alpha, q.beta, q.gamma, q.omega);
    let lin = r(2) * (b - r(2) * a) / (r(5) * a);
    let second = Quadratic::from_exact(lin, (g - w - r(8) * b) / (r(15) * a));
    let derived = Quadratic::from_exact(lin, (g + w - r(4) * b) / (r(15) * a));
    Ok(report(&q.to_profile(), second, derived))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uranus_fit_is_exact() {
        let fit = fit_quintic_profile(&QuinticConstraints::uranus(), Rational::from_integer(18)).unwrap();
        assert_eq!(fit.exact.alpha, Rational::new(64, 45));
        assert_eq!(fit.exact.beta, Rational::new(-272, 45));
        assert_eq!(fit.exact.gamma, Rational::new(184, 45));
        let p = fit.profile;
        assert!((p.wind(0.0) + 8.0 / 15.0).abs() < 1e-14);
        assert!((p.wind(std::f64::consts::FRAC_PI_3) - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_data_gives_zero_profile() {
        let c = QuinticConstraints { cos_critical: Rational::new(1, 3), min_value: r0(), max_value: r0() };
        let fit = fit_quintic_profile(&c, r0()).unwrap();
        assert!(fit.exact.alpha.is_zero() && fit.exact.beta.is_zero() && fit.exact.gamma.is_zero());
    }

    fn r0() -> Rational {
        Rational::zero()
    }

    #[test]
    fn singular_system_rejected() {
        let c = QuinticConstraints { cos_critical: Rational::from_integer(1), min_value: r0(), max_value: r0() };
        assert!(fit_quintic_profile(&c, r0()).is_err());
        assert!(fit_quintic_profile_f64(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn float_fit_agrees_with_exact() {
        let p = fit_quintic_profile_f64(0.25, -2.0, 1.0, 13.0).unwrap();
        assert!((p.alpha - 2048.0 / 75.0).abs() < 1e-11);
        assert!((p.beta + 2656.0 / 75.0).abs() < 1e-11);
        assert!((p.gamma - 458.0 / 75.0).abs() < 1e-11);
    }

    #[test]
    fn chosen_roots_make_it_inconclusive() {
        // second quadratic (x − 0.3)(x − 0.7) while β/α = −1/2 differs from −1
        let (alpha, omega) = (1.0, 2.0);
        let beta = -0.5 * alpha;
        let gamma = omega - 0.85 * alpha;
        let rep = theorem42_check(&QuinticZonalProfile { alpha, beta, gamma, omega }).unwrap();
        assert_eq!(rep.second.roots_in_unit.len(), 2);
        assert!((rep.second.roots_in_unit[0] - 0.3).abs() < 1e-12);
        assert_eq!(rep.verdict, ZonalVerdict::Inconclusive);
    }

    #[test]
    fn rootless_second_quadratic_admits_a() {
        let rep = theorem42_check(&QuinticZonalProfile { alpha: 1.0, beta: 0.0, gamma: 100.0, omega: 0.0 }).unwrap();
        assert_eq!(rep.verdict, ZonalVerdict::Stable);
        let c1 = rep.first_constant.unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!(x * x + rep.first_linear * x + c1 > 0.5);
        }
        assert!(theorem42_check(&QuinticZonalProfile { alpha: 0.0, beta: 1.0, gamma: 1.0, omega: 1.0 }).is_err());
    }
}
