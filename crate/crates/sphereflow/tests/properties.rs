use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use sphereflow::dynamics::{Integrator, SimulationState};
use sphereflow::fields::{energy, enstrophy, harmonic_product_integral, FlowOps, HarmonicPower};
use sphereflow::sht::{transform_by, OrthogonalMap, RotationSpec, SpectralField, Transform, TruncationSpec};
use sphereflow::solutions::{make_rossby_haurwitz, rossby_haurwitz_at};
use sphereflow::stability::{zonal_operator_spectrum, ZonalProfile};

fn field_from(lmax: usize, raw: &[(f64, f64)]) -> SpectralField {
    let mut c = SpectralField::zeros(lmax, true);
    let mut it = raw.iter().cycle();
    for l in 0..=lmax {
        for m in 0..=l as i64 {
            let &(a, b) = it.next().unwrap();
            c.set(l, m, Complex64::new(a, if m == 0 { 0.0 } else { b }));
        }
    }
    c.symmetrize();
    c
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
}

fn rotation() -> impl Strategy<Value = RotationSpec> {
    (0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, c)| RotationSpec::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesis_is_linear(f in coeffs(), g in coeffs(), a in -3.0..3.0f64) {
        let tr = Transform::new(TruncationSpec::minimal(10)).unwrap();
        let (f, g) = (field_from(10, &f), field_from(10, &g));
        let mut h = f.clone();
        h.axpy(a, &g);
        let (sf, sg, sh) = (tr.synthesis(&f).unwrap(), tr.synthesis(&g).unwrap(), tr.synthesis(&h).unwrap());
        for i in 0..sh.values.len() {
            prop_assert!((sh.values[i] - sf.values[i] - a * sg.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn analysis_inverts_synthesis(f in coeffs()) {
        let tr = Transform::new(TruncationSpec::minimal(12)).unwrap();
        let f = field_from(12, &f);
        prop_assert!(tr.analysis(&tr.synthesis(&f).unwrap()).unwrap().max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn orthogonal_maps_preserve_degree_power(f in coeffs(), r in rotation(), parity in any::<bool>()) {
        let f = field_from(9, &f);
        let g = OrthogonalMap { rotation: r, parity };
        let out = transform_by(&f, &g);
        for (a, b) in f.degree_power().iter().zip(out.degree_power()) {
            prop_assert!((a - b).abs() < 1e-11 * (1.0 + a));
        }
        prop_assert!(out.reality_defect() < 1e-12);
    }

    #[test]
    fn rotation_then_inverse_is_identity(f in coeffs(), r in rotation()) {
        let f = field_from(8, &f);
        let g = OrthogonalMap::proper(r);
        let inv = OrthogonalMap::from_matrix(&sphereflow::sht::rotation::transpose(&g.matrix()));
        prop_assert!(transform_by(&transform_by(&f, &g), &inv).max_abs_diff(&f) < 1e-11);
    }

    #[test]
    fn laplacian_inverse_round_trip(f in coeffs()) {
        let mut f = field_from(10, &f);
        f.set(0, 0, Complex64::new(0.0, 0.0));
        prop_assert!(f.laplacian().invert_laplacian().unwrap().max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn product_integrals_vanish_unless_orders_balance(l1 in 1usize..4, m1 in -3i64..4, l2 in 1usize..4, m2 in -3i64..4) {
        prop_assume!(m1.unsigned_abs() as usize <= l1 && m2.unsigned_abs() as usize <= l2);
        let v = harmonic_product_integral(&[HarmonicPower::new(l1, m1, 1), HarmonicPower::new(l2, m2, 1)]).unwrap();
        let expect = if l1 == l2 && m1 == -m2 { if m1 % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 };
        prop_assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn product_integrals_ignore_factor_order(m in 0i64..3, p in 1u32..3) {
        let a = [HarmonicPower::new(2, m, p), HarmonicPower::new(1, 0, 2), HarmonicPower::new(2, -m, p)];
        let b = [HarmonicPower::new(1, 0, 2), HarmonicPower::new(2, -m, p), HarmonicPower::new(2, m, p)];
        let (x, y) = (harmonic_product_integral(&a).unwrap(), harmonic_product_integral(&b).unwrap());
        prop_assert!((x - y).abs() < 1e-13);
    }

    #[test]
    fn sin_lat_zonal_spectrum(alpha in 0.2..3.0f64, omega in -3.0..3.0f64, k in 1i64..4) {
        prop_assume!((alpha - omega).abs() > 0.05);
        let rep = zonal_operator_spectrum(&ZonalProfile::sin_lat(alpha), omega, k, 24).unwrap();
        let mut got: Vec<f64> = rep.discrete_eigenvalues.iter().map(|e| e[0]).collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (k as usize..k as usize + 24).map(|n| alpha - 2.0 * (alpha - omega) / (n * (n + 1)) as f64).collect();
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn euler_step_conserves_energy_and_enstrophy(f in coeffs(), omega in -2.0..2.0f64) {
        let lmax = 8;
        let f = field_from(lmax, &f).scaled(0.3);
        let integ = Integrator::with_ops(FlowOps::new(lmax).unwrap(), omega, 1e-3);
        let s = integ.advance(&SimulationState::from_stream(0.0, &f), 20).unwrap().psi();
        let (e0, z0) = (energy(&f), enstrophy(&f));
        prop_assert!((energy(&s) - e0).abs() <= 1e-9 * e0.max(1e-12));
        prop_assert!((enstrophy(&s) - z0).abs() <= 1e-9 * z0.max(1e-12));
    }
}

#[test]
fn rossby_haurwitz_wave_tracks_exact_solution() {
    let lmax = 15;
    let mut y = SpectralField::zeros(lmax, true);
    y.add_real_harmonic(3, 2, 1.0);
    y.add_real_harmonic(3, -1, 0.4);
    let (psi0, c) = make_rossby_haurwitz(3, 0.5, &y, 1.3).unwrap();
    let integ = Integrator::with_ops(FlowOps::new(lmax).unwrap(), 1.3, 0.005);
    let s = integ.advance(&SimulationState::from_stream(0.0, &psi0), 400).unwrap();
    let err = s.psi().max_abs_diff(&rossby_haurwitz_at(&psi0, c, s.time));
    assert!(err < 1e-8, "{err}");
}
