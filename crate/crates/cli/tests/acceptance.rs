//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them). The criteria
//! serialize through a global lock so the stated runtime budgets are
//! measured on a quiet machine.

use std::path::PathBuf;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use fptlab_core::boundary::{parse_boundary, uniform_grid, Boundary};
use fptlab_core::kernels::{level_density, BoundaryIntegrals};
use fptlab_core::montecarlo::{
    direct_hitting_density, girsanov_density_curve, sample_bessel_bridge,
    sample_bessel_bridge_euler, McParams, RngStream,
};
use fptlab_core::quadrature::{fpt_cdf, fpt_density, GaussianHint, QuadratureSpec};
use fptlab_core::validation::{
    chain_reconstruction_check, delta_limit_error, residual_backward_schrodinger,
    residual_forward_fundamental, KernelTerm, CORPUS_BOUNDARIES, RESIDUAL_STEPS,
};
use fptlab_core::EvalPoint;
use rand::Rng as _;
use rand::SeedableRng as _;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poison| poison.into_inner())
}

fn boundary(text: &str, s_max: f64) -> std::sync::Arc<Boundary> {
    let grid = uniform_grid(0.0, s_max, 1024);
    std::sync::Arc::new(Boundary::build(parse_boundary(text).unwrap(), &grid).unwrap())
}

fn integrals(text: &str, s_max: f64) -> BoundaryIntegrals {
    BoundaryIntegrals::new(boundary(text, s_max))
}

/// Drifted-level hitting density a/sqrt(2 pi s^3) e^{-(a + mu s)^2 / 2s}.
fn drifted_level_density(a: f64, mu: f64, s: f64) -> f64 {
    a / (2.0 * std::f64::consts::PI * s.powi(3)).sqrt()
        * (-(a + mu * s) * (a + mu * s) / (2.0 * s)).exp()
}

#[test]
fn criterion_01_linear_boundary_closed_form() {
    let _g = serial();
    let start = Instant::now();
    let bi = integrals("1 + t", 5.0);
    let spec = QuadratureSpec::default();
    let s_grid = [0.5, 1.0, 2.0, 5.0];
    let out = fpt_density(&s_grid, &bi, &spec).unwrap();
    assert!(out.all_converged(), "every grid point must converge");
    let mut worst = 0.0f64;
    for (s, v) in s_grid.iter().zip(&out.curve.value) {
        let reference = drifted_level_density(1.0, 1.0, *s);
        let rel = (v - reference).abs() / reference;
        worst = worst.max(rel);
        assert!(rel <= 1e-3, "s={s}: {v} vs {reference} (rel {rel:e})");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?} exceeds 30 s");
    println!("criterion 1: PASS — linear closed form, worst rel {worst:.2e}, {elapsed:?}");
}

#[test]
fn criterion_02_constant_boundary_exactness() {
    let _g = serial();
    let bi = integrals("1", 4.0);
    let spec = QuadratureSpec::default();
    let s_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let out = fpt_density(&s_grid, &bi, &spec).unwrap();
    for (s, v) in s_grid.iter().zip(&out.curve.value) {
        let reference = level_density(1.0, *s).unwrap();
        assert!(
            (v - reference).abs() <= 1e-6,
            "s={s}: {v} vs fixed-level density {reference}"
        );
    }
    let cdf = fpt_cdf(1.0, &bi, &spec).unwrap();
    // 2 (1 - Phi(1)), frozen from a 50-digit evaluation
    assert!(
        (cdf - 0.3173105078629141).abs() <= 1e-6,
        "cdf(1) = {cdf}"
    );
    println!("criterion 2: PASS — constant boundary pointwise + cdf(1) = {cdf:.9}");
}

#[test]
fn criterion_03_girsanov_vs_direct_monte_carlo() {
    let _g = serial();
    let start = Instant::now();
    let bd = boundary("1 + 0.5*t^2", 2.5);
    let bi = BoundaryIntegrals::new(std::sync::Arc::clone(&bd));
    let s_grid = [0.5, 1.0, 2.0];
    let mc = McParams::new(1_000_000, 2048, 20260810);
    let girsanov = girsanov_density_curve(&bi, &s_grid, &mc).unwrap();
    let direct = direct_hitting_density(&bd, &s_grid, &mc, None).unwrap();
    for i in 0..s_grid.len() {
        let diff = girsanov.value[i] - direct.curve.value[i];
        let combined = (girsanov.stderr[i].powi(2) + direct.curve.stderr[i].powi(2)).sqrt();
        assert!(
            diff.abs() <= 3.0 * combined,
            "s={}: girsanov {} vs direct {} (z = {:.2})",
            s_grid[i],
            girsanov.value[i],
            direct.curve.value[i],
            diff / combined
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?} exceeds 5 min");
    println!("criterion 3: PASS — two Monte Carlo routes agree at 3 sigma, {elapsed:?}");
}

#[test]
fn criterion_04_total_mass_identity() {
    let _g = serial();
    let bi = integrals("1 + t", 51.0);
    let spec = QuadratureSpec::default();
    let total = fpt_cdf(50.0, &bi, &spec).unwrap();
    let expected = 0.13533528323661269; // e^{-2}
    assert!(
        (total - expected).abs() <= 1e-3,
        "closed-form mass {total} vs {expected}"
    );

    let bd = boundary("1 + t", 51.0);
    let mc = McParams::new(400_000, 2048, 8);
    let out = direct_hitting_density(&bd, &[50.0], &mc, None).unwrap();
    assert!(
        (out.hit_fraction - expected).abs() <= 3.0 * out.hit_fraction_stderr,
        "direct mass {} vs {expected} (3 sigma {})",
        out.hit_fraction,
        3.0 * out.hit_fraction_stderr
    );
    println!(
        "criterion 4: PASS — total mass closed {total:.6}, direct {:.6} ± {:.1e}",
        out.hit_fraction, out.hit_fraction_stderr
    );
}

#[test]
fn criterion_05_pde_residual_suite() {
    let _g = serial();
    let start = Instant::now();
    for text in CORPUS_BOUNDARIES {
        let bi = integrals(text, 2.0);
        let a = bi.boundary().initial_level();
        let points = [
            EvalPoint::new(0.30, a, 0.80, 1.2 * a, 2.0).unwrap(),
            EvalPoint::new(0.15, 0.8 * a, 0.55, 0.9 * a, 2.0).unwrap(),
        ];
        for p in &points {
            // backward equation on the direct term: order-2 decay to zero
            let row: Vec<f64> = RESIDUAL_STEPS
                .iter()
                .map(|&h| {
                    residual_backward_schrodinger(KernelTerm::Direct, p, &bi, h, h).unwrap()
                })
                .collect();
            for w in row.windows(2) {
                let ratio = w[0] / w[1];
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "{text}: backward direct ratio {ratio} at {p:?}"
                );
            }
            // forward equation on the Gaussian fundamental solution
            let row: Vec<f64> = RESIDUAL_STEPS
                .iter()
                .map(|&h| residual_forward_fundamental(p.tau, p.b, &bi, h, h).unwrap())
                .collect();
            for w in row.windows(2) {
                let ratio = w[0] / w[1];
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "{text}: fundamental ratio {ratio} at {p:?}"
                );
            }
        }
    }
    // the full kernel passes only on the slope-free sub-corpus
    let bi = integrals("1", 2.0);
    let p = EvalPoint::new(0.30, 1.0, 0.80, 1.2, 2.0).unwrap();
    let row: Vec<f64> = RESIDUAL_STEPS
        .iter()
        .map(|&h| residual_backward_schrodinger(KernelTerm::Full, &p, &bi, h, h).unwrap())
        .collect();
    for w in row.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "full kernel ratio {ratio}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?} exceeds 1 min");
    println!("criterion 5: PASS — residual suite order-2 where required, {elapsed:?}");
}

#[test]
fn criterion_06_chain_reconstruction() {
    let _g = serial();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(60606);
    let mut worst = 0.0f64;
    for text in CORPUS_BOUNDARIES {
        let bi = integrals(text, 2.0);
        for _ in 0..20 {
            let t = rng.gen_range(0.0..0.4);
            let tau = rng.gen_range(t + 0.1..0.9);
            let a = rng.gen_range(0.3..2.0);
            let b = rng.gen_range(0.3..2.0);
            let p = EvalPoint::new(t, a, tau, b, 1.0).unwrap();
            let dev = chain_reconstruction_check(&p, &bi).unwrap();
            worst = worst.max(dev);
            assert!(dev <= 1e-12, "{text}: deviation {dev:e} at {p:?}");
        }
    }
    println!("criterion 6: PASS — gauge-chain reconstruction, worst rel {worst:.2e}");
}

#[test]
fn criterion_07_delta_property() {
    let _g = serial();
    let eps = [1e-2, 1e-3, 1e-4];
    let spec = QuadratureSpec::default();
    for text in CORPUS_BOUNDARIES {
        let bi = integrals(text, 2.0);
        let a = bi.boundary().initial_level();
        let bump = move |b: f64| {
            let z: f64 = (b - a) / 0.3;
            (-0.5 * z * z).exp()
        };
        let errs = delta_limit_error(
            &bi,
            a,
            0.5,
            1.0,
            bump,
            GaussianHint {
                center: a,
                width: 0.3,
            },
            &eps,
            &spec,
        )
        .unwrap();
        assert!(
            errs[0] > errs[1] && errs[1] > errs[2],
            "{text}: delta errors not strictly decreasing: {errs:?}"
        );
    }
    println!("criterion 7: PASS — terminal delta errors strictly decreasing on the corpus");
}

#[test]
fn criterion_08_bridge_sampler() {
    let _g = serial();
    // endpoint invariants, exactly, on 1e5 paths
    for i in 0..100_000u64 {
        let path = sample_bessel_bridge(1.0, 1.0, 64, RngStream::new(88, i));
        assert_eq!(path.values[0], 1.0);
        assert_eq!(*path.values.last().unwrap(), 0.0);
    }

    // mid-time mean: modulus construction vs the Euler integrator
    let n = 20_000u64;
    let (m_mod, m_euler) = (256usize, 4096usize);
    let mean_std = |xs: &[f64]| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let mods: Vec<f64> = (0..n)
        .map(|i| sample_bessel_bridge(1.0, 1.0, m_mod, RngStream::new(89, i)).values[m_mod / 2])
        .collect();
    let eulers: Vec<f64> = (0..n)
        .map(|i| {
            sample_bessel_bridge_euler(1.0, 1.0, m_euler, RngStream::new(90, i)).values
                [m_euler / 2]
        })
        .collect();
    let (m1, s1) = mean_std(&mods);
    let (m2, s2) = mean_std(&eulers);
    let combined = (s1 * s1 + s2 * s2).sqrt();
    assert!(
        (m1 - m2).abs() <= 3.0 * combined,
        "midtime means {m1} vs {m2} (3 sigma {})",
        3.0 * combined
    );
    println!(
        "criterion 8: PASS — endpoints exact on 1e5 paths; midtime means {m1:.4} vs {m2:.4}"
    );
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fptlab"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("fptlab-acc-{}-{name}", std::process::id()));
    p
}

#[test]
fn criterion_09_byte_identical_reruns() {
    let _g = serial();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        (
            "density",
            vec![
                "density", "--boundary", "1+t", "--s-start", "0.5", "--s-stop", "2.0",
                "--s-count", "3", "--n-paths", "4000", "--steps", "64", "--seed", "42",
            ],
        ),
        (
            "cdf",
            vec![
                "cdf", "--boundary", "1", "--s-start", "0.5", "--s-stop", "2.0", "--s-count",
                "3",
            ],
        ),
        (
            "bridge-expectation",
            vec![
                "bridge-expectation", "--boundary", "1 + 0.5*t^2", "--s-start", "1.0",
                "--s-stop", "1.0", "--s-count", "1", "--n-paths", "4000", "--steps", "64",
                "--seed", "7",
            ],
        ),
        (
            "residual-report",
            vec![
                "residual-report", "--boundary", "1 + 0.5*t^2", "--s-start", "1.0", "--s-stop",
                "1.0", "--s-count", "1",
            ],
        ),
        (
            "cross-validate",
            vec![
                "cross-validate", "--boundary", "1+t", "--s-start", "0.5", "--s-stop", "2.0",
                "--s-count", "3", "--n-paths", "4000", "--steps", "64", "--seed", "42",
            ],
        ),
    ];
    for (name, args) in &cases {
        let mut outputs = Vec::new();
        for (run, threads) in [("a", "1"), ("b", "2"), ("c", "2")] {
            let path = tmp(&format!("{name}-{run}.csv"));
            let status = bin()
                .args(args)
                .arg("--out")
                .arg(&path)
                .env("FPT_THREADS", threads)
                .output()
                .expect("binary runs");
            assert!(
                status.status.code() == Some(0) || status.status.code() == Some(4),
                "{name}: unexpected exit {:?}",
                status.status.code()
            );
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}: 1 worker vs 2 workers differ");
        assert_eq!(outputs[1], outputs[2], "{name}: rerun differs");
    }
    println!("criterion 9: PASS — byte-identical outputs across reruns and worker counts");
}

#[test]
fn criterion_10_horizon_limit_status_report() {
    let _g = serial();
    // reference densities for the zero-curvature corpus members
    let reference: [(&str, fn(f64) -> f64); 2] = [
        ("1", |s| level_density(1.0, s).unwrap()),
        ("1+t", |s| drifted_level_density(1.0, 1.0, s)),
    ];
    let s_values = [0.5, 1.0, 2.0];

    for text in CORPUS_BOUNDARIES {
        let flat = text == "1" || text == "1 + t";
        let path = tmp(&format!("cross-{}.csv", text.replace(['*', ' ', '^', '.'], "")));
        let out = bin()
            .args([
                "cross-validate",
                "--boundary",
                text,
                "--s-start",
                "0.5",
                "--s-stop",
                "2.0",
                "--s-count",
                "3",
                "--n-paths",
                "20000",
                "--steps",
                "256",
                "--seed",
                "1010",
                "--out",
            ])
            .arg(&path)
            .output()
            .expect("binary runs");
        let code = out.status.code();
        if flat {
            assert_eq!(code, Some(0), "{text}: expected clean convergence");
        } else {
            assert_eq!(code, Some(4), "{text}: curved boundaries report nonconvergence");
        }

        let body = std::fs::read_to_string(&path).unwrap();
        let mut lines = body.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let vi = header.iter().position(|h| *h == "verdict").unwrap();
        let ci = header.iter().position(|h| *h == "phi_closed").unwrap();
        let gi = header.iter().position(|h| *h == "agree_closed_girsanov").unwrap();
        for (row, s) in lines.zip(s_values) {
            let cells: Vec<&str> = row.split(',').collect();
            let verdict = cells[vi];
            assert!(
                ["converged", "diverging", "oscillating"].contains(&verdict),
                "{text}: indefinite verdict {verdict}"
            );
            if flat {
                assert_eq!(verdict, "converged", "{text} at s={s}");
                assert_eq!(cells[gi], "agree", "{text} at s={s}");
                let got: f64 = cells[ci].parse().unwrap();
                let want = if text == "1" {
                    reference[0].1(s)
                } else {
                    reference[1].1(s)
                };
                assert!(
                    (got - want).abs() <= 1e-6 * want,
                    "{text} at s={s}: {got} vs {want}"
                );
            }
        }
    }
    println!("criterion 10: PASS — definite horizon-limit verdicts for the whole corpus");
}
