//! Cross-module properties of the analytic kernels: semigroup composition of
//! the absorbing heat kernel, the terminal delta behavior of the two-Gaussian
//! kernel, and the closed-form density against the drifted-level family.

use std::sync::Arc;

use fptlab_core::boundary::{parse_boundary, uniform_grid, Boundary};
use fptlab_core::kernels::{heat_image_kernel, kernel_h, BoundaryIntegrals, EvalPoint};
use fptlab_core::quadrature::{fpt_density, integrate_semi_infinite, GaussianHint, QuadratureSpec};

fn integrals(text: &str) -> BoundaryIntegrals {
    let grid = uniform_grid(0.0, 8.0, 1024);
    let bd = Arc::new(Boundary::build(parse_boundary(text).unwrap(), &grid).unwrap());
    BoundaryIntegrals::new(bd)
}

#[test]
fn heat_image_kernel_composes_over_intermediate_times() {
    let spec = QuadratureSpec::default();
    let cases: [(f64, f64, f64, f64, f64); 3] = [
        (0.0, 1.0, 0.4, 1.0, 0.8),
        (0.1, 0.5, 0.5, 0.9, 1.6),
        (0.0, 2.0, 0.3, 0.7, 0.4),
    ];
    for (t, y, r, tau, z) in cases {
        let hints = [
            GaussianHint {
                center: y,
                width: (r - t).sqrt(),
            },
            GaussianHint {
                center: z,
                width: (tau - r).sqrt(),
            },
        ];
        let composed = integrate_semi_infinite(
            |w| {
                heat_image_kernel(t, y, r, w).unwrap() * heat_image_kernel(r, w, tau, z).unwrap()
            },
            &hints,
            &spec,
        )
        .unwrap()
        .value;
        let direct = heat_image_kernel(t, y, tau, z).unwrap();
        assert!(
            (composed - direct).abs() <= 1e-8,
            "composition failed at ({t},{y},{r},{tau},{z}): {composed} vs {direct}"
        );
    }
}

#[test]
fn kernel_h_concentrates_on_its_source_as_times_merge() {
    // int H(t, a; tau, b) f(b) db -> f(a) as tau - t shrinks
    let bi = integrals("1 + 0.5*t^2");
    let spec = QuadratureSpec::default();
    let a = 1.1;
    let bump = |b: f64| {
        let z: f64 = (b - a) / 0.4;
        (-0.5 * z * z).exp()
    };
    let mut last = f64::INFINITY;
    for eps in [1e-2_f64, 1e-3, 1e-4] {
        let t = 0.5 - eps;
        let hints = [
            GaussianHint {
                center: a,
                width: 0.4,
            },
            GaussianHint {
                center: a,
                width: eps.sqrt(),
            },
        ];
        let integral = integrate_semi_infinite(
            |b| {
                let p = EvalPoint::new(t, a, 0.5, b, 1.0).unwrap();
                kernel_h(&p, &bi).unwrap() * bump(b)
            },
            &hints,
            &spec,
        )
        .unwrap()
        .value;
        let err = (integral - bump(a)).abs();
        assert!(err < last, "delta error must decrease: {err} after {last}");
        last = err;
    }
    assert!(last <= 1e-4, "final delta error {last}");
}

#[test]
fn closed_form_matches_drifted_level_density_family() {
    let spec = QuadratureSpec::default();
    let a = 1.0;
    let s_grid = uniform_grid(0.1, 5.0, 12);
    for slope in [0.0, 0.5, 1.0, 2.0] {
        let text = format!("1 + {slope}*t");
        let bi = integrals(&text);
        let out = fpt_density(&s_grid, &bi, &spec).unwrap();
        assert!(out.all_converged(), "slope {slope} must converge");
        for (s, v) in s_grid.iter().zip(&out.curve.value) {
            let reference = a / (2.0 * std::f64::consts::PI * s.powi(3)).sqrt()
                * (-(a + slope * s) * (a + slope * s) / (2.0 * s)).exp();
            assert!(
                (v - reference).abs() <= 1e-3 * reference,
                "slope {slope}, s {s}: {v} vs {reference}"
            );
        }
    }
}
