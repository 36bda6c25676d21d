//! End-to-end acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use sphereflow::bifurcation::{
    build_subspace, continue_branch, detect_bifurcation_points, omega_branch, ContinuationOptions, ContinuationProblem,
    Nonlinearity, SymmetryGroup,
};
use sphereflow::dynamics::{Integrator, SimulationState};
use sphereflow::fields::{curl_and_divergence, energy, enstrophy, harmonic_product_integral, velocity_from_stream, FlowOps, HarmonicPower};
use sphereflow::sht::{OrthogonalMap, RotationSpec, Rotator, SpectralField, Transform, TruncationSpec};
use sphereflow::solutions::{arnold_range, elliptic_residual, make_exp_solution, make_log_solution, make_rossby_haurwitz, rossby_haurwitz_at};
use sphereflow::stability::{instability_separation_bound, rh2_modal_experiment, default_perturbation, separation_experiment, Rh2Config, SeparationConfig};
use sphereflow::stability::{fit_quintic_profile, theorem42_check_exact, QuinticConstraints, Rational, ZonalVerdict};
use sphereflow::stability::{zonal_operator_spectrum, ZonalProfile};
use sphereflow::stability::ArnoldVerdict;
use sphereflow::stratosphere::{eel_residuals, hydrostatic_defect, lift_solution, particle_paths, planet, Base2D, DensityProfile, LiftOptions};
use sphereflow::solutions::VorticityFunction;

/// Collects named checks; the criterion passes when all of them do.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    /// Records only a failure; used inside large loops.
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

type Q = Ratio<i128>;

/// Polynomial in `s`, lowest power first.
fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::from_integer(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[Q], k: u32) -> Vec<Q> {
    (0..k).fold(vec![Q::from_integer(1)], |acc, _| poly_mul(&acc, a))
}

fn poly_diff(a: &[Q]) -> Vec<Q> {
    if a.len() <= 1 {
        return vec![Q::from_integer(0)];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(i as i128)).collect()
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

/// `d^k/ds^k P_l(s)` from Rodrigues' formula.
fn legendre_derivative(l: usize, k: usize) -> Vec<Q> {
    let mut p = poly_pow(&[Q::from_integer(-1), Q::from_integer(0), Q::from_integer(1)], l as u32);
    for _ in 0..l + k {
        p = poly_diff(&p);
    }
    let scale = Q::new(1, (1i128 << l) * factorial(l));
    p.iter().map(|c| c * scale).collect()
}

/// `∫ Π (Y_l^m)^p dσ` in exact rational arithmetic up to one square root and a power of π.
fn exact_product_integral(factors: &[(usize, i64, u32)]) -> f64 {
    if factors.iter().map(|&(_, m, p)| m * p as i64).sum::<i64>() != 0 {
        return 0.0;
    }
    let mut poly = vec![Q::from_integer(1)];
    let mut norm = Q::from_integer(1);
    let mut sign = 1.0;
    let mut sine_power = 0usize;
    let mut total_power = 0u32;
    for &(l, m, p) in factors {
        let k = m.unsigned_abs() as usize;
        poly = poly_mul(&poly, &poly_pow(&legendre_derivative(l, k), p));
        let n2 = Q::new((2 * l as i128 + 1) * factorial(l - k), 4 * factorial(l + k));
        for _ in 0..p {
            norm *= n2;
        }
        if m > 0 && (k * p as usize) % 2 == 1 {
            sign = -sign;
        }
        sine_power += k * p as usize;
        total_power += p;
    }
    poly = poly_mul(&poly, &poly_pow(&[Q::from_integer(1), Q::from_integer(0), Q::from_integer(-1)], (sine_power / 2) as u32));
    let integral: Q = poly
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(i, c)| c * Q::new(2, i as i128 + 1))
        .fold(Q::from_integer(0), |a, b| a + b);
    let to_f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
    2.0 * PI * sign * to_f(norm).sqrt() * PI.powf(-(total_power as f64) / 2.0) * to_f(integral)
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::default();
    let start = Instant::now();
    let sp = PI.sqrt();
    let s5 = 5f64.sqrt();
    // Values as printed in the source tables; `true` marks entries whose printed value is a misprint.
    let printed: Vec<(Vec<(usize, i64, u32)>, f64, bool)> = vec![
        (vec![(2, 0, 2)], 1.0, false),
        (vec![(2, -1, 1), (2, 1, 1)], -1.0, false),
        (vec![(2, -2, 1), (2, 2, 1)], 1.0, false),
        (vec![(2, 0, 3)], s5 / (7.0 * sp), false),
        (vec![(2, 0, 1), (2, -1, 1), (2, 1, 1)], -s5 / (14.0 * sp), false),
        (vec![(2, 0, 1), (2, -2, 1), (2, 2, 1)], -s5 / (7.0 * sp), false),
        (vec![(2, 2, 1), (2, -1, 2)], 15f64.sqrt() / (7.0 * (2.0 * PI).sqrt()), false),
        (vec![(2, -2, 1), (2, 1, 2)], 15f64.sqrt() / (7.0 * (2.0 * PI).sqrt()), false),
        (vec![(2, 0, 4)], 15.0 / (28.0 * PI), false),
        (vec![(2, 0, 2), (2, -2, 1), (2, 2, 1)], 5.0 / (28.0 * PI), false),
        (vec![(2, 0, 2), (2, -1, 1), (2, 1, 1)], -5.0 / (28.0 * PI), false),
        (vec![(2, 0, 1), (2, 2, 1), (2, -1, 2)], 0.0, false),
        (vec![(2, 0, 1), (2, -2, 1), (2, 1, 2)], 0.0, false),
        (vec![(2, 2, 2), (2, -2, 2)], 5.0 / (14.0 * PI), false),
        (vec![(2, 1, 2), (2, -1, 2)], 5.0 / (14.0 * PI), false),
        (vec![(2, -2, 1), (2, 2, 1), (2, -1, 1), (2, 1, 1)], -5.0 / (28.0 * PI), false),
        (vec![(2, 0, 5)], 25.0 * 199.0 * s5 / (154.0 * PI * sp), true),
        (vec![(2, 0, 3), (2, -2, 1), (2, 2, 1)], -5.0 * s5 / (154.0 * PI * sp), false),
        (vec![(2, 0, 3), (2, -1, 1), (2, 1, 1)], -25.0 * s5 / (4.0 * 154.0 * PI * sp), false),
        (vec![(1, 0, 2), (2, 0, 1)], 1.0 / (5.0 * PI).sqrt(), false),
        (vec![(1, 0, 4)], 9.0 / (20.0 * PI), false),
        (vec![(1, 0, 1), (2, 0, 3)], 0.0, false),
        (vec![(1, 0, 2), (2, 0, 2)], 11.0 / (28.0 * PI), false),
        (vec![(1, 0, 2), (2, 2, 1), (2, -2, 1)], 3.0 / (14.0 * PI), true),
        (vec![(1, 0, 2), (2, 1, 1), (2, -1, 1)], 9.0 / (28.0 * PI), true),
    ];
    let mut worst: f64 = 0.0;
    for (factors, value, misprint) in &printed {
        let hp: Vec<_> = factors.iter().map(|&(l, m, p)| HarmonicPower::new(l, m, p)).collect();
        let quad = match harmonic_product_integral(&hp) {
            Ok(v) => v,
            Err(e) => {
                o.check(false, format!("{factors:?}: {e}"));
                continue;
            }
        };
        let exact = exact_product_integral(factors);
        worst = worst.max((quad - exact).abs());
        o.require((quad - exact).abs() < 1e-10, || format!("{factors:?} quadrature {quad:.15} vs exact {exact:.15}"));
        if *misprint {
            o.check((value - exact).abs() > 1e-3, format!("misprint {factors:?}: printed {value:.6}, exact {exact:.6}"));
        } else {
            o.require((value - exact).abs() < 1e-12, || format!("{factors:?} printed {value} vs exact {exact}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    o.check(secs < 10.0, format!("runtime {secs:.2} s"));
    o.note(format!("{} integrals, max |quadrature - exact| = {worst:.1e}", printed.len()));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::default();
    let lmax = 31;
    let tr = Transform::new(TruncationSpec::dealiased(lmax + 1)).unwrap();
    let mut worst: f64 = 0.0;
    for l in 1..=lmax {
        for m in -(l as i64)..=l as i64 {
            let y = SpectralField::real_harmonic(lmax, l, m).unwrap();
            let (curl, div) = curl_and_divergence(&tr, &velocity_from_stream(&tr, &y).unwrap(), lmax).unwrap();
            let ev = (l * (l + 1)) as f64;
            worst = worst.max(curl.max_abs_diff(&y.scaled(-ev)) / ev).max(div.l2_norm() / ev);
        }
    }
    o.check(worst < 1e-12, format!("eigenrelation l<=31 relative defect {worst:.1e}"));

    let t63 = Transform::new(TruncationSpec::minimal(63)).unwrap();
    let mut c = SpectralField::zeros(63, true);
    for l in 0..=63usize {
        for m in 0..=l as i64 {
            let a = ((l * 31 + m as usize * 17) as f64).sin();
            let b = if m == 0 { 0.0 } else { ((l * 7 + m as usize * 29) as f64).cos() };
            c.set(l, m, Complex64::new(a, b));
        }
    }
    c.symmetrize();
    let rt = t63.analysis(&t63.synthesis(&c).unwrap()).unwrap().max_abs_diff(&c);
    o.check(rt < 1e-12, format!("round trip lmax=63 {rt:.1e}"));

    let mut unit: f64 = 0.0;
    for (k, parity) in [(0.3, false), (1.9, true)] {
        let g = OrthogonalMap { rotation: RotationSpec::new(k, 1.1 * k, 0.7 - k), parity };
        unit = unit.max(Rotator::new(63, &g).unitarity_defect());
    }
    o.check(unit < 1e-12, format!("rotation unitarity lmax=63 {unit:.1e}"));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::default();
    let (alpha, omega) = (1.0, 2.0);
    let zp = ZonalProfile::sin_lat(alpha);
    for k in 1..=4i64 {
        let rep = zonal_operator_spectrum(&zp, omega, k, 64).unwrap();
        let mut expected: Vec<f64> = (k as usize..k as usize + 64).map(|n| alpha - 2.0 * (alpha - omega) / (n * (n + 1)) as f64).collect();
        expected.sort_by(f64::total_cmp);
        let mut got: Vec<[f64; 2]> = rep.discrete_eigenvalues.clone();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut err: f64 = if got.len() == expected.len() { 0.0 } else { f64::INFINITY };
        for (g, e) in got.iter().zip(&expected) {
            err = err.max((g[0] - e).abs()).max(g[1].abs());
        }
        o.check(err < 1e-8, format!("sinθ k={k}: {} discrete eigenvalues, max error {err:.1e}", got.len()));
    }
    for (a, b) in [(1.0, 0.5), (-0.7, 2.0)] {
        let zp = ZonalProfile::from_legendre(vec![0.0, a, b]);
        let mut worst: f64 = 0.0;
        for k in 1..=4 {
            let rep = zonal_operator_spectrum(&zp, omega, k, 64).unwrap();
            worst = rep.eigenvalues.iter().map(|e| e[1].abs()).fold(worst, f64::max);
        }
        o.check(worst < 1e-8, format!("{a}·Y10 + {b}·Y20: max |Im λ| {worst:.1e}"));
    }
    o
}

fn run_cli(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sphereflow")).arg("--out").arg(out).args(args).output().expect("launch sphereflow")
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::default();
    let start = Instant::now();
    let cases = [
        ("uranus", QuinticConstraints::uranus(), 18, [(64, 45), (-272, 45), (184, 45)], (Q::new(-5, 2), Q::new(155, 96))),
        ("neptune", QuinticConstraints::neptune(), 13, [(2048, 75), (-2656, 75), (458, 75)], (Q::new(-211, 160), Q::new(20731, 30720))),
    ];
    for (name, cons, omega, abc, (b, c)) in &cases {
        let fit = fit_quintic_profile(cons, Rational::from_integer(*omega)).unwrap();
        let e = fit.exact;
        let want: Vec<Rational> = abc.iter().map(|&(p, q)| Rational::new(p, q)).collect();
        o.check([e.alpha, e.beta, e.gamma] == want[..], format!("{name} fit ({}, {}, {})", e.alpha, e.beta, e.gamma));
        let disc = b * b - Q::from_integer(4) * c;
        o.check(disc < Q::from_integer(0), format!("{name} printed quadratic discriminant {disc}"));
        let rep = theorem42_check_exact(&e).unwrap();
        let (qb, qc) = (rep.second.b_exact.clone().unwrap_or_default(), rep.second.c_exact.clone().unwrap_or_default());
        o.check(qb == b.to_string() && qc == c.to_string(), format!("{name} quadratic x² + ({qb}) x + {qc}"));
        o.check(rep.verdict == ZonalVerdict::Stable, format!("{name} verdict {:?}", rep.verdict));
    }
    let secs = start.elapsed().as_secs_f64();
    o.check(secs < 1.0, format!("runtime {secs:.3} s"));
    let dir = tempfile::tempdir().unwrap();
    for (name, _, _, abc, _) in &cases {
        let r = run_cli(dir.path(), &["stability", "planet", "--name", name]);
        let text = std::fs::read_to_string(dir.path().join("stability_planet.json")).unwrap_or_default();
        let fractions = abc.iter().all(|&(p, q)| text.contains(&format!("\"{p}/{q}\"")));
        o.check(r.status.success() && fractions && text.contains("\"verdict\": \"stable\""), format!("CLI {name} report"));
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::default();
    let (alpha, omega, lmax) = (0.3, 1.0, 31);
    let y = SpectralField::real_harmonic(lmax, 2, 2).unwrap();
    let (psi0, c) = make_rossby_haurwitz(2, alpha, &y, omega).unwrap();
    let period = PI / c.abs();
    let dt = period / 2000.0;
    let steps = 20_000;

    let run = |psi: SpectralField| {
        let integ = Integrator::with_ops(FlowOps::new(lmax).unwrap(), omega, dt);
        let mut s = SimulationState::from_stream(0.0, &psi);
        let (e0, z0) = (energy(&psi), enstrophy(&psi));
        let (c11, cm1) = (psi.get(1, 1).norm(), psi.get(1, -1).norm());
        let mut prev = psi.get(2, 2);
        let (mut phase, mut de, mut dz, mut dc) = (0.0, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..steps {
            s = integ.step(&s).unwrap();
            let p = s.psi();
            let z = p.get(2, 2);
            phase += (z / prev).arg();
            prev = z;
            de = de.max((energy(&p) / e0 - 1.0).abs());
            dz = dz.max((enstrophy(&p) / z0 - 1.0).abs());
            dc = dc.max((p.get(1, 1).norm() - c11).abs()).max((p.get(1, -1).norm() - cm1).abs());
        }
        (phase / (2.0 * s.time), de, dz, dc)
    };
    let mut tilted = psi0.clone();
    tilted.add_real_harmonic(1, 1, 0.4);
    tilted.add_real_harmonic(1, -1, -0.25);
    let ((speed, de, dz, _), (_, de2, dz2, dc)) = std::thread::scope(|s| {
        let a = s.spawn(|| run(psi0.clone()));
        let b = s.spawn(|| run(tilted.clone()));
        (a.join().unwrap(), b.join().unwrap())
    });
    let rel = (speed - c).abs() / c.abs();
    o.check(rel < 1e-3, format!("phase speed {speed:.12} vs {c:.12}, relative error {rel:.1e}"));
    o.check(de < 1e-6 && dz < 1e-6, format!("energy drift {de:.1e}, enstrophy drift {dz:.1e}"));
    o.check(de2 < 1e-6 && dz2 < 1e-6 && dc < 1e-8, format!("with degree-1 tilt: |c_1^±1| drift {dc:.1e}"));

    let mut pts = Vec::new();
    for n in [200usize, 400, 800, 1600] {
        let h = 2.0 * period / n as f64;
        let integ = Integrator::with_ops(FlowOps::new(lmax).unwrap(), omega, h);
        let s = integ.advance(&SimulationState::from_stream(0.0, &psi0), n).unwrap();
        let err = s.psi().max_abs_diff(&rossby_haurwitz_at(&psi0, c, s.time));
        pts.push((h.ln(), err.ln()));
    }
    let slope = loglog(&pts);
    o.check((3.7..=4.3).contains(&slope), format!("RK4 error slope {slope:.3}"));
    o
}

fn loglog(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::default();
    let pert = default_perturbation(12);
    let eps = [1e-2, 1e-3, 1e-4];
    let reports: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = eps
            .iter()
            .map(|&epsilon| {
                let pert = &pert;
                s.spawn(move || {
                    let cfg = Rh2Config { alpha: 0.3, beta: 1.0, omega: 1.0, epsilon, lmax: 12, dt: 0.02, t_end: 20.0, sample_stride: 10 };
                    rh2_modal_experiment(&cfg, pert).unwrap()
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let d2: Vec<_> = eps.iter().zip(&reports).map(|(e, r)| (e.ln(), r.max_degree2_deviation.ln())).collect();
    let hi: Vec<_> = eps.iter().zip(&reports).map(|(e, r)| (e.ln(), r.max_high_degree_excess.ln())).collect();
    let (s1, s2) = (loglog(&d2), loglog(&hi));
    o.check((s1 - 1.0).abs() <= 0.2, format!("degree-2 relation deviation slope {s1:.3}"));
    o.check((s2 - 2.0).abs() <= 0.2, format!("degree>=3 weighted energy slope {s2:.3}"));

    let y = SpectralField::real_harmonic(6, 2, 2).unwrap();
    for n in [10.0, 100.0] {
        let cfg = SeparationConfig { j: 2, alpha: 0.3, beta: 1.0, omega: 1.0, n, lmax: 6, dt: 0.05, beat_periods: 2.0 };
        let rep = separation_experiment(&cfg, &y).unwrap();
        let bound = instability_separation_bound(2, 1.0, &y, n).unwrap();
        let ratio = rep.simulated_sup / bound;
        o.check(ratio >= 0.9, format!("n={n}: simulated sup {:.4} vs bound {bound:.4} (ratio {ratio:.3})", rep.simulated_sup));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::default();
    let tr = Transform::new(TruncationSpec::dealiased(63)).unwrap();
    for (name, sol) in [("log ε=0.3", make_log_solution(0.3, 0.0, 63).unwrap()), ("exp ε=0.2", make_exp_solution(0.2, 0.0, 63).unwrap())] {
        let r = elliptic_residual(&tr, &sol.psi, &sol.vf, sol.omega).unwrap();
        o.check(r.linf < 1e-8, format!("{name} residual {:.1e}", r.linf));
    }
    let t31 = Transform::new(TruncationSpec::dealiased(31)).unwrap();
    for (name, sol) in [("log ε=0.1", make_log_solution(0.1, 0.0, 31).unwrap()), ("exp ε=0.1", make_exp_solution(0.1, 0.0, 31).unwrap())] {
        let a = arnold_range(&t31, &sol.vf, &sol.psi).unwrap();
        let ok = a.min > -6.0 && a.max < 0.0 && a.verdict == ArnoldVerdict::Stable;
        o.check(ok, format!("{name} F' range [{:.4}, {:.4}] {:?}", a.min, a.max, a.verdict));
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::default();
    let group = SymmetryGroup::tetrahedral();
    let sub = build_subspace(&group, 12).unwrap();
    let problem = ContinuationProblem::new(Nonlinearity::Cubic { mu: 1.0, mu1: 1.0, l: 3 }, sub).unwrap();
    let det = detect_bifurcation_points(&problem, -5.0, 5.0).unwrap();
    let crit = 1.0 / 3f64.sqrt();
    let deg3: Vec<_> = det.points.iter().filter(|p| p.degree == 3).collect();
    let err = if deg3.len() == 2 { (deg3[0].lambda + crit).abs().max((deg3[1].lambda - crit).abs()) } else { f64::INFINITY };
    o.check(err < 1e-10, format!("cubic λ* at degree 3: {:?} (error {err:.1e})", deg3.iter().map(|p| p.lambda).collect::<Vec<_>>()));
    let gi = problem.subspace.generator(3).unwrap();
    let opts = ContinuationOptions::default();
    for p in &deg3 {
        for dir in [1.0, -1.0] {
            let b = continue_branch(&problem, p, dir, 50, &opts).unwrap();
            let first = &b.points[1].coeffs;
            let cos = first[gi].abs() / first.iter().map(|x| x * x).sum::<f64>().sqrt();
            let hold = b.points.iter().all(|q| q.bounds_ok);
            o.check(cos > 0.99, format!("λ*={:+.4} dir {dir:+}: first-point cosine {cos:.6}", p.lambda));
            o.check(b.points.len() == 51 && hold, format!("λ*={:+.4} dir {dir:+}: {} points, bounds hold: {hold}", p.lambda, b.points.len() - 1));
        }
    }

    let sub = build_subspace(&group, 12).unwrap();
    let rot = ContinuationProblem::new(Nonlinearity::Rotating { mu: 1.0, beta: 1.0, l: 3, kappa: 1.0 }, sub).unwrap();
    let det = detect_bifurcation_points(&rot, 0.0, 5.0).unwrap();
    let found = det.points.iter().find(|p| p.degree == 3).map(|p| p.lambda);
    let err = found.map_or(f64::INFINITY, |l| (l - 2.0).abs());
    o.check(err < 1e-10, format!("rotating family λ* = {found:?} (error {err:.1e})"));
    let b = omega_branch(&rot, 5, &opts).unwrap();
    o.check((b.origin.lambda - 2.0).abs() < 1e-10, format!("rotating branch starts at {}", b.origin.lambda));
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::default();
    let g = planet("uranus").unwrap().parameters().unwrap().g;
    let omega = 18.0;
    let field = lift_solution(
        Base2D::Log { epsilon: 0.3, phi0: 0.0 },
        VorticityFunction::LogFamily { epsilon: 0.3 },
        DensityProfile::new(1.0, 3.0).unwrap(),
        omega,
        g,
        &LiftOptions::default(),
    )
    .unwrap();
    let r = eel_residuals(&field, 32, 1.0, 0.3, 1e-3);
    o.check(r.max() < 1e-7, format!("leading-order residuals on 32³ max {:.1e}", r.max()));
    let hyd = (0..=20).map(|k| hydrostatic_defect(&field, k as f64 / 20.0)).fold(0.0, f64::max);
    o.check(hyd < 1e-12, format!("hydrostatic defect {hyd:.1e}"));
    let seeds = [(0.3, 0.2, 0.5), (1.0, -0.7, 0.0), (4.0, 1.1, 0.9)];
    let paths = particle_paths(&field, &seeds, 2.0 * PI / omega, 4000, 1000).unwrap();
    let drift = paths.iter().map(|p| p.drift).fold(0.0, f64::max);
    o.check(drift < 1e-6, format!("level-set drift {drift:.1e}"));
    for (name, om, gg) in [("earth", "9", "157"), ("jupiter", "82", "297")] {
        let entry = planet(name).unwrap();
        let rows: BTreeMap<String, (f64, String, bool)> =
            entry.printed_comparison().unwrap().into_iter().map(|(k, v, s, ok)| (k, (v, s, ok))).collect();
        let ok = rows["omega"].2 && rows["g"].2 && rows["omega"].1 == om && rows["g"].1 == gg;
        o.check(ok, format!("{name}: ω {:.3} ~ {om}, g {:.2} ~ {gg}", rows["omega"].0, rows["g"].0));
    }
    o
}

fn strip_times(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"start_time\"") && !l.contains("\"end_time\"")).collect::<Vec<_>>().join("\n")
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::default();
    let base = tempfile::tempdir().unwrap();
    let sim = base.path().join("sim.toml");
    std::fs::write(&sim, "omega = 1.0\ndt = 0.02\nt_end = 0.4\nlmax = 12\ndiag_stride = 5\n[initial]\nkind = \"rossby_haurwitz\"\nj = 3\nalpha = 0.2\nterms = [[2, 1.0], [-1, 0.3]]\n").unwrap();
    let bif = base.path().join("bif.json");
    std::fs::write(&bif, r#"{"group":"tetrahedral","nonlinearity":{"family":"cubic","mu":1.0,"mu1":1.0,"l":3},"steps":8,"snapshot_points":[4]}"#).unwrap();
    let (sim, bif) = (sim.to_str().unwrap().to_string(), bif.to_str().unwrap().to_string());
    let commands: Vec<Vec<&str>> = vec![
        vec!["--svg", "simulate", &sim],
        vec!["stability", "zonal", "--coeffs", "0,1,0.4", "--omega", "1"],
        vec!["stability", "rh2", "--t-end", "2", "--seed", "7", "--separation", "10", "--beat-periods", "0.2"],
        vec!["stability", "planet", "--name", "neptune"],
        vec!["make-solution", "--family", "exp", "--lmax", "15"],
        vec!["--svg", "bifurcate", &bif],
        vec!["lift3d", "--omega", "13", "--g", "40", "--n", "6", "--steps", "400"],
        vec!["sht-selftest"],
    ];
    for args in &commands {
        let dirs = [base.path().join("a"), base.path().join("b")];
        let mut listings = Vec::new();
        for d in &dirs {
            let _ = std::fs::remove_dir_all(d);
            std::fs::create_dir_all(d).unwrap();
            let r = run_cli(d, args);
            if !r.status.success() {
                o.check(false, format!("{args:?} failed: {}", String::from_utf8_lossy(&r.stderr)));
            }
            let mut files: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
            files.sort();
            listings.push(files);
        }
        let mut same = listings[0] == listings[1] && !listings[0].is_empty();
        for f in &listings[0] {
            let (a, b) = (std::fs::read(dirs[0].join(f)).unwrap(), std::fs::read(dirs[1].join(f)).unwrap_or_default());
            same &= if f.ends_with(".manifest.json") {
                strip_times(&String::from_utf8_lossy(&a)) == strip_times(&String::from_utf8_lossy(&b))
            } else {
                a == b
            };
        }
        o.check(same, format!("{} ({} files) identical", args.iter().filter(|a| !a.starts_with("--")).take(2).copied().collect::<Vec<_>>().join(" "), listings[0].len()));
    }
    o
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("harmonic product integrals", criterion_1),
        ("eigenrelation, round trip, rotations", criterion_2),
        ("zonal operator spectrum", criterion_3),
        ("planetary quintic fits", criterion_4),
        ("travelling-wave dynamics", criterion_5),
        ("modal stability mechanics", criterion_6),
        ("explicit solutions", criterion_7),
        ("bifurcation", criterion_8),
        ("stratospheric lift", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let hs: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        let mut o = Outcome::default();
                        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                        o.check(false, format!("panicked: {}", msg.unwrap_or_default()));
                        o
                    });
                    (out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (out, secs))) in criteria.iter().zip(&results).enumerate() {
        let pass = out.failures.is_empty();
        failed += usize::from(!pass);
        println!("criterion {:>2} {:<40} {}  ({secs:.1} s)", i + 1, name, if pass { "PASS" } else { "FAIL" });
        for f in &out.failures {
            println!("      failed: {f}");
        }
        for n in &out.notes {
            println!("      {n}");
        }
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
