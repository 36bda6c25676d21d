//! Orthonormal associated Legendre functions in the latitude variable `s = sin(theta)`.
//!
//! `plm(l, m)` holds the factor such that `Y_l^m(phi, theta) = plm(l, m) * exp(i m phi)`
//! for `m >= 0`; the Condon–Shortley sign is included. Negative orders follow from
//! `Y_l^{-m} = (-1)^m conj(Y_l^m)`.

use std::f64::consts::PI;

/// Offset of `(l, m)`, `0 <= m <= l`, in a triangular table.
#[inline]
pub fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

pub fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

const BIG: f64 = 1.0e150;
const TINY: f64 = 1.0e-150;

/// All `P̄_l^m(s)` for `0 <= m <= l <= lmax`, triangular layout.
pub fn legendre_table(lmax: usize, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; tri_len(lmax)];
    fill(lmax, s, &mut out, None);
    out
}

/// Values and latitude derivatives `d/dtheta P̄_l^m(sin theta)`; requires `|s| < 1`.
pub fn legendre_table_with_derivative(lmax: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; tri_len(lmax)];
    let mut dp = vec![0.0; tri_len(lmax)];
    fill(lmax, s, &mut p, Some(&mut dp));
    (p, dp)
}

fn fill(lmax: usize, s: f64, out: &mut [f64], deriv: Option<&mut [f64]>) {
    let c = (1.0 - s * s).max(0.0).sqrt();
    // sectoral seed carried as mantissa * BIG^(-scale) to survive c^m underflow
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    let mut scale = 0i32;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -c * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            if pmm != 0.0 && pmm.abs() < TINY {
                pmm *= BIG;
                scale += 1;
            }
        }
        let mut sc = scale;
        let mut p_prev = 0.0;
        let mut p_cur = pmm;
        out[tri(m, m)] = unscale(p_cur, sc);
        for l in (m + 1)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (s * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            if sc > 0 && p_cur.abs() > 1.0 {
                p_cur /= BIG;
                p_prev /= BIG;
                sc -= 1;
            }
            out[tri(l, m)] = unscale(p_cur, sc);
        }
    }
    if let Some(dp) = deriv {
        for m in 0..=lmax {
            for l in m..=lmax {
                let lf = l as f64;
                let mf = m as f64;
                let mut v = -lf * s * out[tri(l, m)];
                if l > m {
                    let e = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
                    v += e * out[tri(l - 1, m)];
                }
                dp[tri(l, m)] = v / c;
            }
        }
    }
}

#[inline]
fn unscale(v: f64, scale: i32) -> f64 {
    let mut v = v;
    for _ in 0..scale {
        v *= TINY;
        if v == 0.0 {
            break;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let s = 0.37f64;
        let c = (1.0 - s * s).sqrt();
        let p = legendre_table(3, s);
        let pi = PI;
        assert!((p[tri(0, 0)] - 0.5 / pi.sqrt()).abs() < 1e-15);
        assert!((p[tri(1, 0)] - 0.5 * (3.0 / pi).sqrt() * s).abs() < 1e-15);
        assert!((p[tri(1, 1)] + 0.5 * (3.0 / (2.0 * pi)).sqrt() * c).abs() < 1e-15);
        assert!((p[tri(2, 0)] - 0.25 * (5.0 / pi).sqrt() * (3.0 * s * s - 1.0)).abs() < 1e-15);
        assert!((p[tri(2, 1)] + 0.5 * (15.0 / (2.0 * pi)).sqrt() * s * c).abs() < 1e-15);
        assert!((p[tri(2, 2)] - 0.25 * (15.0 / (2.0 * pi)).sqrt() * c * c).abs() < 1e-15);
        assert!((p[tri(3, 0)] - 0.25 * (7.0 / pi).sqrt() * (5.0 * s.powi(3) - 3.0 * s)).abs() < 1e-15);
    }

    #[test]
    fn spec_point_values() {
        let p = legendre_table(2, 1.0);
        assert!((p[tri(1, 0)] - 0.5 * (3.0 / PI).sqrt()).abs() < 1e-15);
        let p = legendre_table(2, 0.0);
        assert!((p[tri(2, 0)] + 0.25 * (5.0 / PI).sqrt()).abs() < 1e-15);
        assert!((p[tri(1, 1)] + 0.5 * (3.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let lmax = 20;
        let th = 0.4f64;
        let h = 1e-5;
        let (_, dp) = legendre_table_with_derivative(lmax, th.sin());
        let pp = legendre_table(lmax, (th + h).sin());
        let pm = legendre_table(lmax, (th - h).sin());
        for l in 0..=lmax {
            for m in 0..=l {
                let fd = (pp[tri(l, m)] - pm[tri(l, m)]) / (2.0 * h);
                assert!((fd - dp[tri(l, m)]).abs() < 1e-6 * (1.0 + fd.abs()), "l={l} m={m}");
            }
        }
    }

    #[test]
    fn high_order_near_pole_stays_finite() {
        let p = legendre_table(127, 0.99999);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!(p[tri(127, 0)].abs() > 0.0);
    }
}
