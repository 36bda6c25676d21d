use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphereflow::fields::{curl_and_divergence, harmonic_product_integral, velocity_from_stream, HarmonicPower};
use sphereflow::sht::rotation::{mat_apply, transpose};
use sphereflow::sht::{OrthogonalMap, RotationSpec, Rotator, SpectralField, Transform, TruncationSpec};

use crate::output::{f, Csv, Outputs};
use crate::{Cli, CliError};

const SEED: u64 = 20_240_611;

struct Check {
    name: String,
    error: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.error < self.tolerance
    }
}

/// `(factors, exact value)` with factors written `(l, m, power)`.
pub fn product_table() -> Vec<(Vec<(usize, i64, u32)>, f64)> {
    let sp = PI.sqrt();
    let s5 = 5f64.sqrt();
    vec![
        (vec![(2, 0, 2)], 1.0),
        (vec![(2, -1, 1), (2, 1, 1)], -1.0),
        (vec![(2, -2, 1), (2, 2, 1)], 1.0),
        (vec![(2, 0, 3)], s5 / (7.0 * sp)),
        (vec![(2, 0, 1), (2, -1, 1), (2, 1, 1)], -s5 / (14.0 * sp)),
        (vec![(2, 0, 1), (2, -2, 1), (2, 2, 1)], -s5 / (7.0 * sp)),
        (vec![(2, 2, 1), (2, -1, 2)], 15f64.sqrt() / (7.0 * (2.0 * PI).sqrt())),
        (vec![(2, -2, 1), (2, 1, 2)], 15f64.sqrt() / (7.0 * (2.0 * PI).sqrt())),
        (vec![(2, 0, 4)], 15.0 / (28.0 * PI)),
        (vec![(2, 0, 2), (2, -2, 1), (2, 2, 1)], 5.0 / (28.0 * PI)),
        (vec![(2, 0, 2), (2, -1, 1), (2, 1, 1)], -5.0 / (28.0 * PI)),
        (vec![(2, 0, 1), (2, 2, 1), (2, -1, 2)], 0.0),
        (vec![(2, 0, 1), (2, -2, 1), (2, 1, 2)], 0.0),
        (vec![(2, 2, 2), (2, -2, 2)], 5.0 / (14.0 * PI)),
        (vec![(2, 1, 2), (2, -1, 2)], 5.0 / (14.0 * PI)),
        (vec![(2, -2, 1), (2, 2, 1), (2, -1, 1), (2, 1, 1)], -5.0 / (28.0 * PI)),
        (vec![(2, 0, 5)], 25.0 * s5 / (154.0 * PI * sp)),
        (vec![(2, 0, 3), (2, -2, 1), (2, 2, 1)], -5.0 * s5 / (154.0 * PI * sp)),
        (vec![(2, 0, 3), (2, -1, 1), (2, 1, 1)], -25.0 * s5 / (4.0 * 154.0 * PI * sp)),
        (vec![(1, 0, 2), (2, 0, 1)], 1.0 / (5.0 * PI).sqrt()),
        (vec![(1, 0, 4)], 9.0 / (20.0 * PI)),
        (vec![(1, 0, 1), (2, 0, 3)], 0.0),
        (vec![(1, 0, 2), (2, 0, 2)], 11.0 / (28.0 * PI)),
        (vec![(1, 0, 2), (2, 2, 1), (2, -2, 1)], 3.0 / (28.0 * PI)),
        (vec![(1, 0, 2), (2, 1, 1), (2, -1, 1)], -9.0 / (28.0 * PI)),
    ]
}

fn label(factors: &[(usize, i64, u32)]) -> String {
    factors.iter().map(|(l, m, p)| format!("Y{l}^{m}^{p}")).collect::<Vec<_>>().join("*")
}

fn random_field(lmax: usize, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut c = SpectralField::zeros(lmax, true);
    for l in 0..=lmax {
        for m in 0..=l as i64 {
            let im = if m == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
            c.set(l, m, Complex64::new(rng.gen_range(-1.0..1.0), im));
        }
    }
    c.symmetrize();
    c
}

fn checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    for (factors, exact) in product_table() {
        let hp: Vec<_> = factors.iter().map(|&(l, m, p)| HarmonicPower::new(l, m, p)).collect();
        let v = harmonic_product_integral(&hp)?;
        out.push(Check { name: format!("integral {}", label(&factors)), error: (v - exact).abs(), tolerance: 1e-10 });
    }

    let lmax = 31;
    let tr = Transform::new(TruncationSpec::dealiased(lmax + 1))?;
    let (mut curl_err, mut div_err) = (0.0f64, 0.0f64);
    for l in 1..=lmax {
        for m in -(l as i64)..=l as i64 {
            let y = SpectralField::real_harmonic(lmax, l, m)?;
            let (curl, div) = curl_and_divergence(&tr, &velocity_from_stream(&tr, &y)?, lmax)?;
            let ev = (l * (l + 1)) as f64;
            curl_err = curl_err.max(curl.max_abs_diff(&y.scaled(-ev)) / ev);
            curl_err = curl_err.max(y.laplacian().max_abs_diff(&curl) / ev);
            div_err = div_err.max(div.l2_norm() / ev);
        }
    }
    out.push(Check { name: "eigenrelation l<=31 (per l(l+1))".into(), error: curl_err, tolerance: 1e-12 });
    out.push(Check { name: "velocity divergence l<=31 (per l(l+1))".into(), error: div_err, tolerance: 1e-12 });

    let big = 63;
    let t63 = Transform::new(TruncationSpec::minimal(big))?;
    let c = random_field(big, &mut rng);
    let back = t63.analysis(&t63.synthesis(&c)?)?;
    out.push(Check { name: "round trip lmax=63".into(), error: back.max_abs_diff(&c), tolerance: 1e-12 });
    let grid = t63.synthesis(&c)?;
    let again = t63.synthesis(&t63.analysis(&grid)?)?;
    let grid_err = grid.values.iter().zip(&again.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(Check { name: "grid round trip lmax=63 (relative)".into(), error: grid_err / grid.max_abs(), tolerance: 1e-12 });

    let mut unit = 0.0f64;
    let mut pointwise = 0.0f64;
    let small = random_field(12, &mut rng);
    for parity in [false, true] {
        let r = RotationSpec::new(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let g = OrthogonalMap { rotation: r, parity };
        unit = unit.max(Rotator::new(big, &g).unitarity_defect());
        let rotated = Rotator::new(12, &g).apply(&small);
        let inv = transpose(&g.matrix());
        for _ in 0..16 {
            let (phi, s) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(-1.0..1.0f64));
            let c = (1.0 - s * s).sqrt();
            let p = mat_apply(&inv, [c * phi.cos(), c * phi.sin(), s]);
            let expect = small.eval(p[1].atan2(p[0]), p[2].clamp(-1.0, 1.0));
            pointwise = pointwise.max((rotated.eval(phi, s) - expect).norm());
        }
    }
    out.push(Check { name: "rotation unitarity lmax=63".into(), error: unit, tolerance: 1e-12 });
    out.push(Check { name: "rotation pointwise lmax=12".into(), error: pointwise, tolerance: 1e-11 });
    Ok(out)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let mut out = Outputs::new(&cli.out, "sht-selftest")?;
    out.set_seed(Some(SEED));
    let results = checks()?;
    let mut csv = Csv::new(&["check", "error", "tolerance", "status"]);
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &results {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{:<width$}  {:>10.3e}  < {:>8.1e}  {status}", c.name, c.error, c.tolerance);
        csv.row(&[c.name.clone(), f(c.error), f(c.tolerance), status.into()]);
    }
    out.write("selftest.csv", &csv.into_bytes())?;
    out.finish()?;
    let failed = results.iter().filter(|c| !c.passed()).count();
    eprintln!("{} checks, {failed} failed, {:.2} s", results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        return Err(CliError::acceptance(format!("{failed} self-test checks failed")));
    }
    Ok(())
}
