//! Closed-form analytic kernels: the fixed-level hitting density, the heat
//! image kernel, the gauge-dressed two-Gaussian kernel `H`, the Green's
//! function `G`, the measure-change prefactor, and the direct/image Gaussian
//! terms exposed separately for PDE residual checks.
//!
//! All exponentials are combined before exponentiation, and the image
//! difference is recombined by a signed log-sum-exp, so the bracket survives
//! even when the two exponents are large and nearly equal.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::boundary::Boundary;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failure integrating {what} over [{lo}, {hi}]: {detail}")]
    Quadrature {
        what: &'static str,
        lo: f64,
        hi: f64,
        detail: String,
    },
}

/// The tuple of backward variables (t, a), forward variables (tau, b) and
/// horizon s that every kernel consumes. Requires 0 <= t < tau <= s and
/// a, b > 0; the Green's function additionally requires tau < s.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EvalPoint {
    pub t: f64,
    pub a: f64,
    pub tau: f64,
    pub b: f64,
    pub s: f64,
}

impl EvalPoint {
    pub fn new(t: f64, a: f64, tau: f64, b: f64, s: f64) -> Result<Self, KernelError> {
        if !(t >= 0.0 && t < tau && tau <= s) {
            return Err(KernelError::Domain(format!(
                "need 0 <= t < tau <= s, got t={t}, tau={tau}, s={s}"
            )));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(KernelError::Domain(format!(
                "space variables must be positive, got a={a}, b={b}"
            )));
        }
        Ok(EvalPoint { t, a, tau, b, s })
    }
}

/// Memoized integrals of f' and (f')^2 over [t, tau], computed by adaptive
/// Simpson. Kernels are evaluated densely on grids that share (t, tau) pairs,
/// so results are cached behind a read-mostly lock keyed by the raw bits.
pub struct BoundaryIntegrals {
    boundary: Arc<Boundary>,
    abs_tol: f64,
    cache: RwLock<HashMap<(u64, u64), (f64, f64)>>,
}

impl BoundaryIntegrals {
    pub fn new(boundary: Arc<Boundary>) -> Self {
        Self::with_tolerance(boundary, 1e-12)
    }

    pub fn with_tolerance(boundary: Arc<Boundary>, abs_tol: f64) -> Self {
        BoundaryIntegrals {
            boundary,
            abs_tol,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn boundary_arc(&self) -> Arc<Boundary> {
        Arc::clone(&self.boundary)
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    fn both(&self, t: f64, tau: f64) -> Result<(f64, f64), KernelError> {
        if tau < t {
            return Err(KernelError::Domain(format!(
                "integral bounds reversed: t={t} > tau={tau}"
            )));
        }
        if tau == t {
            return Ok((0.0, 0.0));
        }
        let key = (t.to_bits(), tau.to_bits());
        if let Some(hit) = self.cache.read().unwrap().get(&key) {
            return Ok(*hit);
        }
        let bd = &self.boundary;
        let slope = adaptive_simpson(&|u| bd.slope(u), t, tau, self.abs_tol, "f'")?;
        let slope_sq = adaptive_simpson(
            &|u| {
                let v = bd.slope(u);
                v * v
            },
            t,
            tau,
            self.abs_tol,
            "(f')^2",
        )?;
        self.cache.write().unwrap().insert(key, (slope, slope_sq));
        Ok((slope, slope_sq))
    }

    /// Integral of f' over [t, tau]; equals f(tau) - f(t) up to the tolerance.
    pub fn slope_integral(&self, t: f64, tau: f64) -> Result<f64, KernelError> {
        Ok(self.both(t, tau)?.0)
    }

    /// Integral of (f')^2 over [t, tau]; always nonnegative.
    pub fn slope_sq_integral(&self, t: f64, tau: f64) -> Result<f64, KernelError> {
        Ok(self.both(t, tau)?.1)
    }
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    what: &'static str,
) -> Result<f64, KernelError> {
    fn simpson(fl: f64, fm: f64, fr: f64, h: f64) -> f64 {
        (fl + 4.0 * fm + fr) * h / 6.0
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        fl: f64,
        fm: f64,
        fr: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        what: &'static str,
    ) -> Result<f64, KernelError> {
        let m = 0.5 * (lo + hi);
        let lm = 0.5 * (lo + m);
        let rm = 0.5 * (m + hi);
        let flm = f(lm);
        let frm = f(rm);
        if !(flm.is_finite() && frm.is_finite()) {
            return Err(KernelError::Quadrature {
                what,
                lo,
                hi,
                detail: "non-finite integrand sample".to_string(),
            });
        }
        let left = simpson(fl, flm, fm, m - lo);
        let right = simpson(fm, frm, fr, hi - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth >= 48 {
            if depth >= 48 && delta.abs() > 15.0 * tol {
                return Err(KernelError::Quadrature {
                    what,
                    lo,
                    hi,
                    detail: format!("max refinement depth reached, error est {:e}", delta.abs()),
                });
            }
            return Ok(left + right + delta / 15.0);
        }
        let a = recurse(f, lo, m, fl, flm, fm, left, 0.5 * tol, depth + 1, what)?;
        let b = recurse(f, m, hi, fm, frm, fr, right, 0.5 * tol, depth + 1, what)?;
        Ok(a + b)
    }

    let fl = f(lo);
    let fm = f(0.5 * (lo + hi));
    let fr = f(hi);
    if !(fl.is_finite() && fm.is_finite() && fr.is_finite()) {
        return Err(KernelError::Quadrature {
            what,
            lo,
            hi,
            detail: "non-finite integrand sample".to_string(),
        });
    }
    let whole = simpson(fl, fm, fr, hi - lo);
    recurse(f, lo, hi, fl, fm, fr, whole, tol, 0, what)
}

/// Density of the first time standard Brownian motion reaches a fixed level
/// a > 0: a / sqrt(2 pi t^3) * exp(-a^2 / 2t). Defined as 0 at t = 0 (the
/// continuous extension), which keeps limit studies free of NaN.
pub fn level_density(a: f64, t: f64) -> Result<f64, KernelError> {
    check_level_args(a, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(a / (2.0 * PI * t * t * t).sqrt() * (-a * a / (2.0 * t)).exp())
}

/// Natural log of [`level_density`]; -inf at t = 0.
pub fn level_density_ln(a: f64, t: f64) -> Result<f64, KernelError> {
    check_level_args(a, t)?;
    if t == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(a.ln() - 0.5 * (2.0 * PI * t * t * t).ln() - a * a / (2.0 * t))
}

fn check_level_args(a: f64, t: f64) -> Result<(), KernelError> {
    if !(a > 0.0) {
        return Err(KernelError::Domain(format!("level must be positive, got {a}")));
    }
    if !(t >= 0.0) {
        return Err(KernelError::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Signed difference of two Gaussian exponential terms scaled by the heat
/// normalization: (e^{l1} - e^{l2}) / sqrt(2 pi delta). The larger exponent is
/// factored out first so the difference of near-equal exponentials keeps full
/// relative precision, and exponents beyond +-700 are recombined in log space.
fn gauss_pair_diff(delta: f64, l1: f64, l2: f64) -> f64 {
    let norm_ln = -0.5 * (2.0 * PI * delta).ln();
    let (m, d, sign) = if l1 >= l2 {
        (l1, l1 - l2, 1.0)
    } else {
        (l2, l2 - l1, -1.0)
    };
    let frac = -(-d).exp_m1(); // 1 - e^{-d}, exact for small d
    if frac == 0.0 {
        return 0.0;
    }
    if m + norm_ln > 700.0 || m + norm_ln < -700.0 {
        sign * (m + norm_ln + frac.ln()).exp()
    } else {
        sign * (m + norm_ln).exp() * frac
    }
}

/// Absorbing heat kernel on the half line by the method of images:
/// (1/sqrt(2 pi (tau-t))) [exp(-(z-y)^2/2(tau-t)) - exp(-(z+y)^2/2(tau-t))].
pub fn heat_image_kernel(t: f64, y: f64, tau: f64, z: f64) -> Result<f64, KernelError> {
    if !(tau > t) {
        return Err(KernelError::Domain(format!(
            "need tau > t, got t={t}, tau={tau}"
        )));
    }
    let delta = tau - t;
    let q1 = (z - y) * (z - y) / (2.0 * delta);
    let q2 = (z + y) * (z + y) / (2.0 * delta);
    Ok(gauss_pair_diff(delta, -q1, -q2))
}

struct HParts {
    delta: f64,
    /// gauge exponent: (1/2) int (f')^2 - f'(tau) b + f'(t) a
    gauge: f64,
    /// (b - a - int f')^2 / (2 delta)
    q_direct: f64,
    /// (b + a - int f')^2 / (2 delta)
    q_image: f64,
}

fn h_parts(p: &EvalPoint, bi: &BoundaryIntegrals) -> Result<HParts, KernelError> {
    let bd = bi.boundary();
    let delta = p.tau - p.t;
    let slope_int = bi.slope_integral(p.t, p.tau)?;
    let slope_sq_int = bi.slope_sq_integral(p.t, p.tau)?;
    let gauge = 0.5 * slope_sq_int - bd.slope(p.tau) * p.b + bd.slope(p.t) * p.a;
    let u_direct = p.b - p.a - slope_int;
    let u_image = p.b + p.a - slope_int;
    Ok(HParts {
        delta,
        gauge,
        q_direct: u_direct * u_direct / (2.0 * delta),
        q_image: u_image * u_image / (2.0 * delta),
    })
}

/// The gauge-dressed two-Gaussian kernel H(t,a;tau,b): the product of the
/// exponential gauge and the image bracket with centers a + int f' and
/// -a + int f', normalized by sqrt(2 pi (tau - t)).
///
/// Sign law: for a, b > 0, sign(H) = sign(b - int_t^tau f'(u) du); H is not
/// clamped to be nonnegative.
pub fn kernel_h(p: &EvalPoint, bi: &BoundaryIntegrals) -> Result<f64, KernelError> {
    let parts = h_parts(p, bi)?;
    Ok(gauss_pair_diff(
        parts.delta,
        parts.gauge - parts.q_direct,
        parts.gauge - parts.q_image,
    ))
}

/// Only the direct Gaussian term of H (center a + int f') with the full gauge
/// prefactor. Exposed separately because it satisfies both Schroedinger
/// equations exactly, which the residual suite verifies.
pub fn schrodinger_direct_term(p: &EvalPoint, bi: &BoundaryIntegrals) -> Result<f64, KernelError> {
    let parts = h_parts(p, bi)?;
    let l = parts.gauge - parts.q_direct - 0.5 * (2.0 * PI * parts.delta).ln();
    Ok(l.exp())
}

/// The image Gaussian term of H (center -a + int f') with the gauge
/// prefactor; H = direct - image.
pub fn schrodinger_image_term(p: &EvalPoint, bi: &BoundaryIntegrals) -> Result<f64, KernelError> {
    let parts = h_parts(p, bi)?;
    let l = parts.gauge - parts.q_image - 0.5 * (2.0 * PI * parts.delta).ln();
    Ok(l.exp())
}

/// Green's function G(t,a;tau,b) = (phi_b(s-tau) / phi_a(s-t)) * H(t,a;tau,b),
/// assembled in log space. Requires tau < s; the tau = s evaluation is
/// degenerate and handled by the horizon-limit machinery in the quadrature
/// module.
pub fn green_g(p: &EvalPoint, bi: &BoundaryIntegrals) -> Result<f64, KernelError> {
    if !(p.tau < p.s) {
        return Err(KernelError::Domain(format!(
            "green_g needs tau < s, got tau={}, s={}",
            p.tau, p.s
        )));
    }
    let parts = h_parts(p, bi)?;
    let ratio_ln = level_density_ln(p.b, p.s - p.tau)? - level_density_ln(p.a, p.s - p.t)?;

    let l1 = parts.gauge - parts.q_direct;
    let l2 = parts.gauge - parts.q_image;
    let norm_ln = -0.5 * (2.0 * PI * parts.delta).ln();
    let (m, d, sign) = if l1 >= l2 {
        (l1, l1 - l2, 1.0)
    } else {
        (l2, l2 - l1, -1.0)
    };
    let frac = -(-d).exp_m1();
    if frac == 0.0 {
        return Ok(0.0);
    }
    let ln_abs = ratio_ln + norm_ln + m + frac.ln();
    Ok(sign * ln_abs.exp())
}

/// Deterministic factor exp{-(1/2) int_0^s (f')^2 du - f'(0) a} multiplying
/// the fixed-level density in the hitting-time identity.
pub fn girsanov_prefactor(bi: &BoundaryIntegrals, s: f64) -> Result<f64, KernelError> {
    if !(s > 0.0) {
        return Err(KernelError::Domain(format!("horizon must be positive, got {s}")));
    }
    let bd = bi.boundary();
    let a = bd.initial_level();
    let slope_sq = bi.slope_sq_integral(0.0, s)?;
    Ok((-0.5 * slope_sq - bd.slope(0.0) * a).exp())
}

/// Gaussian fundamental solution of the forward equation
/// psi_tau = (1/2) psi_bb - b f''(tau) psi:
/// (1/sqrt(2 pi tau)) exp{-(b - f(tau))^2 / 2 tau + (1/2) int_0^tau (f')^2 - f'(tau) b}.
pub fn forward_fundamental(tau: f64, b: f64, bi: &BoundaryIntegrals) -> Result<f64, KernelError> {
    if !(tau > 0.0) {
        return Err(KernelError::Domain(format!(
            "forward fundamental solution needs tau > 0, got {tau}"
        )));
    }
    let bd = bi.boundary();
    let z = b - bd.f(tau);
    let l = -z * z / (2.0 * tau) + 0.5 * bi.slope_sq_integral(0.0, tau)? - bd.slope(tau) * b
        - 0.5 * (2.0 * PI * tau).ln();
    Ok(l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{parse_boundary, uniform_grid, Boundary};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(value: f64, expected: f64, tol: f64) {
        assert!(
            (value - expected).abs() <= tol,
            "value {value} differed from {expected} (tol {tol})"
        );
    }

    fn assert_rel(value: f64, expected: f64, rel: f64) {
        assert!(
            (value - expected).abs() <= rel * expected.abs().max(1e-300),
            "value {value} differed from {expected} (rel {rel})"
        );
    }

    fn boundary(text: &str) -> Arc<Boundary> {
        let grid = uniform_grid(0.0, 6.0, 1024);
        Arc::new(Boundary::build(parse_boundary(text).unwrap(), &grid).unwrap())
    }

    fn integrals(text: &str) -> BoundaryIntegrals {
        BoundaryIntegrals::new(boundary(text))
    }

    #[test]
    fn level_density_matches_frozen_values() {
        // frozen from a 50-digit evaluation of a/sqrt(2 pi t^3) e^{-a^2/2t}
        assert_rel(level_density(1.0, 1.0).unwrap(), 0.24197072451914335, 1e-14);
        assert_rel(level_density(2.0, 1.0).unwrap(), 0.1079819330263761, 1e-14);
        assert_eq!(level_density(1.0, 0.0).unwrap(), 0.0);
        assert!(level_density(-1.0, 1.0).is_err());
        assert!(level_density(0.0, 1.0).is_err());
        assert!(level_density(1.0, -0.5).is_err());
    }

    #[test]
    fn level_density_scaling_identity() {
        for &a in &[0.5, 1.0, 2.0] {
            for &t in &[0.5, 1.0, 2.0] {
                let lhs = level_density(a, t).unwrap();
                let rhs = level_density(1.0, t / (a * a)).unwrap() / (a * a);
                assert_rel(lhs, rhs, 1e-13);
            }
        }
    }

    #[test]
    fn heat_image_kernel_values() {
        // (1 - e^{-2}) / sqrt(2 pi), frozen in high precision
        assert_rel(
            heat_image_kernel(0.0, 1.0, 1.0, 1.0).unwrap(),
            0.34495131388824463,
            1e-14,
        );
        assert_eq!(heat_image_kernel(0.2, 1.7, 0.9, 0.0).unwrap(), 0.0);
        assert!(heat_image_kernel(0.0, 1.0, 0.5, 2.0).unwrap() > 0.0);
        assert!(heat_image_kernel(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_boundary_collapses_to_heat_image_kernel() {
        let bi = integrals("1");
        for &(t, a, tau, b) in &[
            (0.0, 1.0, 1.0, 1.0),
            (0.1, 0.7, 0.9, 2.3),
            (0.5, 2.0, 0.75, 0.01),
            (0.0, 0.3, 2.0, 4.0),
        ] {
            let p = EvalPoint::new(t, a, tau, b, 3.0).unwrap();
            let h = kernel_h(&p, &bi).unwrap();
            let g = heat_image_kernel(t, a, tau, b).unwrap();
            assert_eq!(h, g, "collapse must be exact at ({t},{a},{tau},{b})");
        }
        let p = EvalPoint::new(0.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_rel(kernel_h(&p, &bi).unwrap(), 0.34495131388824463, 1e-14);
    }

    #[test]
    fn kernel_h_sign_law() {
        let bi = integrals("1 + t");
        // int f' over [0,1] is 1
        let below = EvalPoint::new(0.0, 1.0, 1.0, 0.5, 2.0).unwrap();
        let above = EvalPoint::new(0.0, 1.0, 1.0, 1.5, 2.0).unwrap();
        assert!(kernel_h(&below, &bi).unwrap() < 0.0);
        assert!(kernel_h(&above, &bi).unwrap() > 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let t = rng.gen_range(0.0..0.5);
            let tau = t + rng.gen_range(0.05..1.0);
            let a = rng.gen_range(0.05..3.0);
            let b = rng.gen_range(0.05..3.0);
            let p = EvalPoint::new(t, a, tau, b, 2.0).unwrap();
            let h = kernel_h(&p, &bi).unwrap();
            let gap = b - (tau - t);
            if gap.abs() > 1e-12 {
                assert_eq!(
                    h.signum(),
                    gap.signum(),
                    "sign law violated at ({t},{a},{tau},{b})"
                );
            }
        }
    }

    #[test]
    fn kernel_h_linear_boundary_matches_completed_square_form() {
        // independent algebraic route: f = 1 + mu t gives
        // H = (1/sqrt(2 pi d)) [e^{-(b-a)^2/2d} - e^{2 mu a} e^{-(b+a)^2/2d}]
        let bi = integrals("1 + t");
        let mu = 1.0;
        let (t, tau, a, b) = (0.0, 1.0, 1.0, 2.0);
        let d: f64 = tau - t;
        let p = EvalPoint::new(t, a, tau, b, 2.0).unwrap();
        let h = kernel_h(&p, &bi).unwrap();
        let direct = (-(b - a) * (b - a) / (2.0 * d)).exp();
        let image = (2.0 * mu * a).exp() * (-(b + a) * (b + a) / (2.0 * d)).exp();
        let reference = (direct - image) / (2.0 * PI * d).sqrt();
        assert_rel(h, reference, 1e-12);
    }

    #[test]
    fn direct_and_image_terms_decompose_h() {
        let bi = integrals("1 + 0.5*t^2");
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..20 {
            let t = rng.gen_range(0.0..0.6);
            let tau = t + rng.gen_range(0.05..0.9);
            let a = rng.gen_range(0.2..2.0);
            let b = rng.gen_range(0.2..2.0);
            let p = EvalPoint::new(t, a, tau, b, 2.0).unwrap();
            let h = kernel_h(&p, &bi).unwrap();
            let d = schrodinger_direct_term(&p, &bi).unwrap();
            let im = schrodinger_image_term(&p, &bi).unwrap();
            assert_rel(h + im, d, 1e-14);
        }
    }

    #[test]
    fn direct_term_frozen_values() {
        let bi = integrals("1");
        let p = EvalPoint::new(0.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_rel(
            schrodinger_direct_term(&p, &bi).unwrap(),
            0.39894228040143268,
            1e-14,
        );
        let bi = integrals("1 + t");
        let p = EvalPoint::new(0.0, 1.0, 1.0, 2.0, 2.0).unwrap();
        assert_rel(
            schrodinger_direct_term(&p, &bi).unwrap(),
            0.24197072451914335,
            1e-13,
        );
    }

    #[test]
    fn green_g_frozen_value_and_limits() {
        let bi = integrals("1");
        let p = EvalPoint::new(0.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        // (phi_1(0.5)/phi_1(1)) * (1/sqrt(pi))(1 - e^{-4}), frozen in high precision
        assert_rel(green_g(&p, &bi).unwrap(), 0.95015550442882137, 1e-13);

        let p = EvalPoint::new(0.0, 1.0, 0.5, 1e-10, 1.0).unwrap();
        assert!(green_g(&p, &bi).unwrap() < 1e-9);

        let p = EvalPoint::new(0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(green_g(&p, &bi).is_err(), "tau = s must be rejected");
    }

    #[test]
    fn green_g_nonnegative_above_slope_integral() {
        let bi = integrals("1 + 0.5*t^2");
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..0.4);
            let tau = t + rng.gen_range(0.05..0.5);
            let a = rng.gen_range(0.2..2.0);
            let slope_int = bi.slope_integral(t, tau).unwrap();
            let b = slope_int.max(0.0) + rng.gen_range(1e-6..2.0);
            let p = EvalPoint::new(t, a, tau, b, 1.0).unwrap();
            assert!(green_g(&p, &bi).unwrap() >= 0.0);
        }
    }

    #[test]
    fn girsanov_prefactor_values() {
        let bi = integrals("1");
        for &s in &[0.3, 1.0, 5.0] {
            assert_eq!(girsanov_prefactor(&bi, s).unwrap(), 1.0);
        }
        let bi = integrals("1 + t");
        assert_rel(girsanov_prefactor(&bi, 1.0).unwrap(), 0.22313016014842983, 1e-13);
        let bi = integrals("1 + 0.5*t^2");
        assert_rel(girsanov_prefactor(&bi, 2.0).unwrap(), 0.26359713811572677, 1e-12);
    }

    #[test]
    fn slope_integral_matches_fundamental_theorem() {
        for text in ["1", "1 + t", "2 + 0.25*t^2", "1 + 0.5*t^2", "cosh(t)"] {
            let bi = integrals(text);
            let bd = bi.boundary();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..25 {
                let t = rng.gen_range(0.0..2.0);
                let tau = t + rng.gen_range(0.01..2.0);
                let quad = bi.slope_integral(t, tau).unwrap();
                let ftc = bd.f(tau) - bd.f(t);
                assert_close(quad, ftc, 1e-10);
                assert!(bi.slope_sq_integral(t, tau).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn forward_fundamental_matches_direct_formula() {
        let bi = integrals("1 + 0.5*t^2");
        let bd = bi.boundary();
        let (tau, b) = (0.8_f64, 1.2_f64);
        let z = b - bd.f(tau);
        let expected = (-z * z / (2.0 * tau) + 0.5 * (tau * tau * tau) / 3.0 - tau * b).exp()
            / (2.0 * PI * tau).sqrt();
        assert_rel(forward_fundamental(tau, b, &bi).unwrap(), expected, 1e-12);
        assert!(forward_fundamental(0.0, 1.0, &bi).is_err());
    }

    #[test]
    fn large_exponents_recombine_without_overflow() {
        // exponents of order 1e5 on both sides of the bracket
        let v = gauss_pair_diff(1.0, 1000.0, 999.0);
        assert!(v.is_infinite() && v > 0.0);
        let v = gauss_pair_diff(1.0, -1000.0, -999.0);
        assert!(v <= 0.0 && v.abs() < 1e-300, "deep underflow stays signed-zeroish");
        let v = gauss_pair_diff(1.0, 500.0, 500.0);
        assert_eq!(v, 0.0);
    }
}
