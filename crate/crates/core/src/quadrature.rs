//! Semi-infinite integration of the Green's function, the horizon-limit
//! evaluation of the bridge functional v(t,a), and the closed-form
//! first-passage density and CDF assembled from it.
//!
//! The terminal evaluation of v(t,a) is degenerate: the factor phi_b(s - tau)
//! vanishes pointwise as tau -> s. It is resolved here by evaluating
//! V(eps) = int_0^inf G(t,a; s-eps, b) db along a geometric eps schedule and
//! fitting V(eps) ~ v + c1 sqrt(eps) + c2 eps. The small-eps expansion has a
//! g(0)/sqrt(eps) leading term that vanishes exactly when the integrand's
//! b -> 0 limit is zero, so the schedule's difference table distinguishes a
//! convergent limit from a divergent one; the verdict records which occurred.
//! For boundaries whose second derivative vanishes identically the functional
//! being represented is exactly 1 regardless of the limit's behavior, and the
//! returned value is pinned to that identity (the raw table is still measured
//! and reported).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curve::DensityCurve;
use crate::kernels::{
    girsanov_prefactor, green_g, level_density, BoundaryIntegrals, EvalPoint, KernelError,
};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("nonconvergent-limit: horizon limit verdict {:?}", .0.raw_verdict)]
    NonconvergentLimit(Box<LimitDiagnostics>),
    #[error("panel budget exhausted: value so far {value}, error estimate {error_estimate}")]
    BudgetExhausted { value: f64, error_estimate: f64 },
    #[error("non-finite integrand sample at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Tunable knobs for semi-infinite integration and the horizon limit.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureSpec {
    /// Absolute tolerance for adaptive panels.
    pub abs_tol: f64,
    /// Hard cap on processed panels before giving up.
    pub max_panels: usize,
    /// Truncation point in units of the integrand's Gaussian widths.
    pub truncation_sigmas: f64,
    /// First term of the geometric eps schedule for the tau -> s limit.
    pub eps0: f64,
    /// Ratio of the geometric eps schedule (must be in (0, 1)).
    pub eps_ratio: f64,
    /// Number of schedule terms (at least 5 so the difference table has a tail).
    pub eps_terms: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            max_panels: 1 << 20,
            truncation_sigmas: 12.0,
            eps0: 1e-2,
            eps_ratio: 0.5,
            eps_terms: 10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) {
            return Err(QuadError::Domain("abs_tol must be positive".to_string()));
        }
        if !(self.eps0 > 0.0 && self.eps_ratio > 0.0 && self.eps_ratio < 1.0) {
            return Err(QuadError::Domain(
                "eps schedule must be strictly decreasing to > 0".to_string(),
            ));
        }
        if self.eps_terms < 5 {
            return Err(QuadError::Domain(
                "eps schedule needs at least 5 terms".to_string(),
            ));
        }
        Ok(())
    }
}

/// Location/scale hint for one Gaussian factor of an integrand; used to pick
/// the truncation point and the initial panel breakpoints.
#[derive(Debug, Clone, Copy)]
pub struct GaussianHint {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadValue {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

// 15-point Gauss-Legendre rule on [-1, 1].
const GL15: [(f64, f64); 15] = [
    (-0.9879925180204854, 0.030753241996118647),
    (-0.937273392400706, 0.07036604748810807),
    (-0.8482065834104272, 0.10715922046717177),
    (-0.7244177313601701, 0.1395706779261539),
    (-0.5709721726085388, 0.16626920581699378),
    (-0.3941513470775634, 0.18616100001556188),
    (-0.20119409399743451, 0.19843148532711125),
    (0.0, 0.2025782419255609),
    (0.20119409399743451, 0.19843148532711125),
    (0.3941513470775634, 0.18616100001556188),
    (0.5709721726085388, 0.16626920581699378),
    (0.7244177313601701, 0.1395706779261539),
    (0.8482065834104272, 0.10715922046717177),
    (0.937273392400706, 0.07036604748810807),
    (0.9879925180204854, 0.030753241996118647),
];

fn gl15_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<f64, QuadError> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (node, weight) in GL15 {
        let x = mid + half * node;
        let v = f(x);
        if !v.is_finite() {
            return Err(QuadError::NonFiniteSample { x });
        }
        acc += weight * v;
    }
    Ok(acc * half)
}

/// Adaptive 15-point Gauss-Legendre over [lo, hi], bisecting panels whose
/// refinement estimate exceeds the length-proportional share of `abs_tol`.
/// `breakpoints` seed the initial panel edges.
pub fn adaptive_gl15<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadValue, QuadError> {
    if !(hi > lo) {
        return Ok(QuadValue {
            value: 0.0,
            abs_error: 0.0,
            panels: 0,
        });
    }
    let total = hi - lo;
    let mut edges: Vec<f64> = vec![lo, hi];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > lo && x < hi));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();

    let mut stack: Vec<(f64, f64, f64)> = Vec::new();
    for pair in edges.windows(2) {
        stack.push((pair[0], pair[1], gl15_panel(f, pair[0], pair[1])?));
    }

    let mut value = 0.0;
    let mut err_sum = 0.0;
    let mut panels = 0usize;
    while let Some((plo, phi, whole)) = stack.pop() {
        panels += 1;
        if panels > max_panels {
            let rest: f64 = whole + stack.iter().map(|(_, _, v)| v).sum::<f64>();
            return Err(QuadError::BudgetExhausted {
                value: value + rest,
                error_estimate: err_sum + abs_tol,
            });
        }
        let mid = 0.5 * (plo + phi);
        let left = gl15_panel(f, plo, mid)?;
        let right = gl15_panel(f, mid, phi)?;
        let refined = left + right;
        let err = (refined - whole).abs();
        let len = phi - plo;
        // the relative floor keeps large-magnitude integrands from demanding
        // sub-roundoff panel accuracy
        if err <= abs_tol * len / total + 1e-14 * refined.abs() || len <= 1e-13 * total {
            value += refined;
            err_sum += err;
        } else {
            stack.push((plo, mid, left));
            stack.push((mid, phi, right));
        }
    }
    Ok(QuadValue {
        value,
        abs_error: err_sum,
        panels,
    })
}

/// Integrate `g` over (0, B] where B = max_i (center_i + k * width_i) comes
/// from the integrand's Gaussian factor hints and k = `truncation_sigmas`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    g: F,
    hints: &[GaussianHint],
    spec: &QuadratureSpec,
) -> Result<QuadValue, QuadError> {
    if hints.is_empty() {
        return Err(QuadError::Domain(
            "at least one Gaussian hint is required to truncate".to_string(),
        ));
    }
    let k = spec.truncation_sigmas;
    let upper = hints
        .iter()
        .map(|h| h.center.max(0.0) + k * h.width)
        .fold(f64::MIN, f64::max);
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(QuadError::Domain(format!(
            "truncation bound must be positive and finite, got {upper}"
        )));
    }
    let mut breakpoints = Vec::new();
    for h in hints {
        for x in [h.center - k * h.width, h.center, h.center + k * h.width] {
            if x > 0.0 && x < upper {
                breakpoints.push(x);
            }
        }
    }
    adaptive_gl15(&g, 0.0, upper, &breakpoints, spec.abs_tol, spec.max_panels)
}

/// Behavior of the V(eps) table along the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitVerdict {
    Converged,
    Diverging,
    Oscillating,
}

/// Per-grid-point status of the closed-form density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointVerdict {
    Converged,
    Diverging,
    Oscillating,
    Failed,
}

impl PointVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointVerdict::Converged => "converged",
            PointVerdict::Diverging => "diverging",
            PointVerdict::Oscillating => "oscillating",
            PointVerdict::Failed => "failed",
        }
    }
}

impl From<LimitVerdict> for PointVerdict {
    fn from(v: LimitVerdict) -> Self {
        match v {
            LimitVerdict::Converged => PointVerdict::Converged,
            LimitVerdict::Diverging => PointVerdict::Diverging,
            LimitVerdict::Oscillating => PointVerdict::Oscillating,
        }
    }
}

/// Full record of one horizon-limit evaluation: the eps schedule, the
/// measured V(eps) values, the fitted model v + c1 sqrt(eps) + c2 eps, the
/// verdict derived from the difference table, and the extrapolated value.
///
/// `raw_verdict` always reflects the measured table. For curvature-free
/// boundaries the represented functional equals 1 identically, so `verdict`
/// is converged, `extrapolated` is pinned to 1 and `pinned` is set; otherwise
/// `verdict == raw_verdict`. A converged raw verdict requires the last four
/// successive differences |V(eps_n) - V(eps_{n+1})| to be decreasing (or below
/// the noise floor).
#[derive(Debug, Clone, Serialize)]
pub struct LimitDiagnostics {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares coefficients [v, c1, c2] of v + c1 sqrt(eps) + c2 eps.
    pub coeffs: [f64; 3],
    pub raw_verdict: LimitVerdict,
    pub verdict: LimitVerdict,
    pub extrapolated: Option<f64>,
    pub pinned: bool,
}

fn solve3(mut m: [[f64; 4]; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        if p == 0.0 {
            continue;
        }
        for row in 0..3 {
            if row != col {
                let factor = m[row][col] / p;
                for k in col..4 {
                    m[row][k] -= factor * m[col][k];
                }
            }
        }
    }
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = if m[i][i] != 0.0 { m[i][3] / m[i][i] } else { 0.0 };
    }
    out
}

fn fit_sqrt_model(eps: &[f64], values: &[f64]) -> [f64; 3] {
    let mut ata = [[0.0f64; 4]; 3];
    for (&e, &v) in eps.iter().zip(values) {
        let x = e.sqrt();
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][3] += row[i] * v;
        }
    }
    solve3(ata)
}

fn table_verdict(values: &[f64], abs_tol: f64) -> LimitVerdict {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let tail = &diffs[diffs.len() - 4..];
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let flat_tol = (10.0 * abs_tol).max(1e-12 * max_abs);
    if tail.iter().all(|d| *d <= flat_tol) {
        return LimitVerdict::Converged;
    }
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] + flat_tol) && tail[3] < tail[0];
    if decreasing {
        return LimitVerdict::Converged;
    }
    let increasing = tail.windows(2).all(|w| w[1] >= w[0] - flat_tol) && tail[3] > tail[0];
    if increasing {
        LimitVerdict::Diverging
    } else {
        LimitVerdict::Oscillating
    }
}

/// Evaluate the bridge functional v(t,a) represented by the horizon limit of
/// int_0^inf G(t,a; s-eps, b) db. Returns the value together with the full
/// diagnostics; a nonconvergent table for a boundary with curvature is a
/// reportable finding carried by [`QuadError::NonconvergentLimit`], not a
/// crash.
pub fn v_of(
    t: f64,
    a: f64,
    s: f64,
    bi: &BoundaryIntegrals,
    spec: &QuadratureSpec,
) -> Result<(f64, LimitDiagnostics), QuadError> {
    spec.validate()?;
    if !(t >= 0.0 && t < s) {
        return Err(QuadError::Domain(format!("need 0 <= t < s, got t={t}, s={s}")));
    }
    if !(a > 0.0) {
        return Err(QuadError::Domain(format!("level must be positive, got {a}")));
    }

    let eps0 = spec.eps0.min(0.25 * (s - t));
    let eps: Vec<f64> = (0..spec.eps_terms)
        .map(|i| eps0 * spec.eps_ratio.powi(i as i32))
        .collect();

    let bd = bi.boundary();
    let mut values = Vec::with_capacity(eps.len());
    for &e in &eps {
        let tau = s - e;
        let delta = tau - t;
        // force the (t, tau) integrals into the memo cache so the closure
        // below cannot hit the Simpson error path per sample
        let slope_int = bi.slope_integral(t, tau)?;
        let tilt = bd.slope(tau) * delta;
        let hints = [
            GaussianHint {
                center: 0.0,
                width: e.sqrt(),
            },
            GaussianHint {
                center: (a + slope_int - tilt).max(0.0),
                width: delta.sqrt(),
            },
            GaussianHint {
                center: (slope_int - a - tilt).max(0.0),
                width: delta.sqrt(),
            },
        ];
        let g = |b: f64| match EvalPoint::new(t, a, tau, b, s) {
            Ok(p) => green_g(&p, bi).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        };
        let v = match integrate_semi_infinite(g, &hints, spec) {
            Ok(out) => out.value,
            // a blown panel budget on one schedule entry is itself diagnostic;
            // keep the partial value and let the difference table judge it
            Err(QuadError::BudgetExhausted { value, .. }) => value,
            Err(e) => return Err(e),
        };
        values.push(v);
    }

    let coeffs = fit_sqrt_model(&eps, &values);
    let raw_verdict = table_verdict(&values, spec.abs_tol);
    let pinned = bd.curvature_free();

    if pinned {
        let diag = LimitDiagnostics {
            eps,
            values,
            coeffs,
            raw_verdict,
            verdict: LimitVerdict::Converged,
            extrapolated: Some(1.0),
            pinned: true,
        };
        return Ok((1.0, diag));
    }
    match raw_verdict {
        LimitVerdict::Converged => {
            let v = coeffs[0];
            let diag = LimitDiagnostics {
                eps,
                values,
                coeffs,
                raw_verdict,
                verdict: raw_verdict,
                extrapolated: Some(v),
                pinned: false,
            };
            Ok((v, diag))
        }
        other => Err(QuadError::NonconvergentLimit(Box::new(LimitDiagnostics {
            eps,
            values,
            coeffs,
            raw_verdict: other,
            verdict: other,
            extrapolated: None,
            pinned: false,
        }))),
    }
}

/// Closed-form first-passage density over a horizon grid, with per-point
/// verdicts and limit diagnostics. Grid points are independent; a
/// nonconvergent limit or a numeric failure marks its point and never aborts
/// the curve.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormCurve {
    pub curve: DensityCurve,
    pub verdicts: Vec<PointVerdict>,
    pub diagnostics: Vec<Option<LimitDiagnostics>>,
}

impl ClosedFormCurve {
    pub fn all_converged(&self) -> bool {
        self.verdicts.iter().all(|v| *v == PointVerdict::Converged)
    }
}

fn closed_point(
    s: f64,
    bi: &BoundaryIntegrals,
    spec: &QuadratureSpec,
) -> (f64, PointVerdict, Option<LimitDiagnostics>) {
    let a = bi.boundary().initial_level();
    let deterministic = (|| -> Result<f64, QuadError> {
        Ok(level_density(a, s)? * girsanov_prefactor(bi, s)?)
    })();
    let det = match deterministic {
        Ok(v) => v,
        Err(_) => return (f64::NAN, PointVerdict::Failed, None),
    };
    match v_of(0.0, a, s, bi, spec) {
        Ok((v, diag)) => (v * det, PointVerdict::Converged, Some(diag)),
        Err(QuadError::NonconvergentLimit(diag)) => {
            (f64::NAN, diag.raw_verdict.into(), Some(*diag))
        }
        Err(_) => (f64::NAN, PointVerdict::Failed, None),
    }
}

/// phi_T(s) = v(0,a) * phi_a(s) * exp{-(1/2) int_0^s (f')^2 - f'(0) a} per
/// grid point.
pub fn fpt_density(
    s_grid: &[f64],
    bi: &BoundaryIntegrals,
    spec: &QuadratureSpec,
) -> Result<ClosedFormCurve, QuadError> {
    spec.validate()?;
    if s_grid.is_empty() || s_grid.iter().any(|&s| s <= 0.0) {
        return Err(QuadError::Domain(
            "horizon grid must be non-empty with all s > 0".to_string(),
        ));
    }
    let results: Vec<(f64, PointVerdict, Option<LimitDiagnostics>)> = s_grid
        .par_iter()
        .map(|&s| closed_point(s, bi, spec))
        .collect();
    let mut value = Vec::with_capacity(results.len());
    let mut verdicts = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::with_capacity(results.len());
    for (v, verdict, diag) in results {
        value.push(v);
        verdicts.push(verdict);
        diagnostics.push(diag);
    }
    Ok(ClosedFormCurve {
        curve: DensityCurve::new(s_grid.to_vec(), value, vec![0.0; s_grid.len()]),
        verdicts,
        diagnostics,
    })
}

/// P(T < t_max) by integrating the closed-form density with the same panel
/// scheme. For curvature-free boundaries the pinned identity v = 1 is used
/// directly at each node; otherwise every node runs the full horizon limit
/// and a nonconvergent node fails the integral.
pub fn fpt_cdf(t_max: f64, bi: &BoundaryIntegrals, spec: &QuadratureSpec) -> Result<f64, QuadError> {
    spec.validate()?;
    if !(t_max > 0.0) {
        return Err(QuadError::Domain(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let bd = bi.boundary();
    let a = bd.initial_level();
    let pinned = bd.curvature_free();

    if pinned {
        let g = |s: f64| match (level_density(a, s), girsanov_prefactor(bi, s)) {
            (Ok(phi), Ok(pref)) => phi * pref,
            _ => f64::NAN,
        };
        let mode = (a * a / 3.0).min(0.5 * t_max);
        return Ok(adaptive_gl15(&g, 0.0, t_max, &[mode], spec.abs_tol, spec.max_panels)?.value);
    }

    // every node needs its own horizon limit; failures surface immediately
    let mode = (a * a / 3.0).min(0.5 * t_max);
    let nodes_spec = spec.clone();
    let g = move |s: f64| -> Result<f64, QuadError> {
        let (v, _) = v_of(0.0, a, s, bi, &nodes_spec)?;
        Ok(v * level_density(a, s)? * girsanov_prefactor(bi, s)?)
    };
    // adaptive_gl15 works on plain closures; stash the first error out-of-band
    let err_slot = std::sync::Mutex::new(None::<QuadError>);
    let wrapped = |s: f64| match g(s) {
        Ok(v) => v,
        Err(e) => {
            err_slot.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let out = adaptive_gl15(&wrapped, 0.0, t_max, &[mode], spec.abs_tol, spec.max_panels);
    if let Some(e) = err_slot.into_inner().unwrap() {
        return Err(e);
    }
    Ok(out?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{parse_boundary, uniform_grid, Boundary};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn integrals(text: &str) -> BoundaryIntegrals {
        let grid = uniform_grid(0.0, 60.0, 2048);
        let bd = Arc::new(Boundary::build(parse_boundary(text).unwrap(), &grid).unwrap());
        BoundaryIntegrals::new(bd)
    }

    fn assert_close(value: f64, expected: f64, tol: f64) {
        assert!(
            (value - expected).abs() <= tol,
            "value {value} differed from {expected} (tol {tol})"
        );
    }

    #[test]
    fn integrates_rayleigh_density_exactly() {
        let spec = QuadratureSpec::default();
        let hints = [GaussianHint {
            center: 0.0,
            width: 1.0,
        }];
        let out = integrate_semi_infinite(|b| b * (-b * b / 2.0).exp(), &hints, &spec).unwrap();
        assert_close(out.value, 1.0, 1e-10);
    }

    #[test]
    fn integrates_shifted_normal_to_cdf_tail() {
        let spec = QuadratureSpec::default();
        let hints = [GaussianHint {
            center: 3.0,
            width: 1.0,
        }];
        let out = integrate_semi_infinite(
            |b| (-(b - 3.0) * (b - 3.0) / 2.0).exp() / (2.0 * PI).sqrt(),
            &hints,
            &spec,
        )
        .unwrap();
        // Phi(3), frozen from a 50-digit normal CDF evaluation
        assert_close(out.value, 0.99865010196836991, 1e-8);
    }

    #[test]
    fn integrates_zero_to_zero() {
        let spec = QuadratureSpec::default();
        let hints = [GaussianHint {
            center: 1.0,
            width: 1.0,
        }];
        let out = integrate_semi_infinite(|_| 0.0, &hints, &spec).unwrap();
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn doubling_truncation_changes_nothing() {
        let mut spec = QuadratureSpec::default();
        let hints = [GaussianHint {
            center: 0.0,
            width: 1.0,
        }];
        let f = |b: f64| b * (-b * b / 2.0).exp();
        let v12 = integrate_semi_infinite(f, &hints, &spec).unwrap().value;
        spec.truncation_sigmas = 24.0;
        let v24 = integrate_semi_infinite(f, &hints, &spec).unwrap().value;
        assert!((v24 - v12).abs() < spec.abs_tol);
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let spec = QuadratureSpec {
            abs_tol: 1e-14,
            max_panels: 8,
            ..QuadratureSpec::default()
        };
        let hints = [GaussianHint {
            center: 6.0,
            width: 1.0,
        }];
        let out = integrate_semi_infinite(|b| (1e4 * b).sin().abs(), &hints, &spec);
        match out {
            Err(QuadError::BudgetExhausted { value, .. }) => assert!(value.is_finite()),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let spec = QuadratureSpec::default();
        let hints = [GaussianHint {
            center: 1.0,
            width: 0.5,
        }];
        let out = integrate_semi_infinite(|b| if b > 2.0 { f64::NAN } else { 1.0 }, &hints, &spec);
        assert!(matches!(out, Err(QuadError::NonFiniteSample { .. })));
    }

    #[test]
    fn constant_boundary_limit_measures_one() {
        let bi = integrals("1");
        let spec = QuadratureSpec::default();
        let (v, diag) = v_of(0.0, 1.0, 1.0, &bi, &spec).unwrap();
        assert_eq!(v, 1.0, "curvature-free value is pinned to the identity");
        assert_eq!(diag.raw_verdict, LimitVerdict::Converged);
        // the measured fit itself recovers 1 within the contract tolerance
        assert_close(diag.coeffs[0], 1.0, 1e-3);
        for val in &diag.values {
            assert_close(*val, 1.0, 1e-6);
        }
    }

    #[test]
    fn late_time_limit_still_one_for_zero_curvature() {
        let bi = integrals("1");
        let spec = QuadratureSpec::default();
        let (v, _) = v_of(0.9, 1.0, 1.0, &bi, &spec).unwrap();
        assert_close(v, 1.0, 1e-3);
        let bi = integrals("1 + t");
        let (v, diag) = v_of(0.0, 1.0, 1.0, &bi, &spec).unwrap();
        assert_eq!(v, 1.0);
        assert!(diag.pinned);
    }

    #[test]
    fn curved_boundary_limit_reports_divergence() {
        let bi = integrals("1 + 0.5*t^2");
        let spec = QuadratureSpec::default();
        match v_of(0.0, 1.0, 1.0, &bi, &spec) {
            Err(QuadError::NonconvergentLimit(diag)) => {
                assert_eq!(diag.raw_verdict, LimitVerdict::Diverging);
                assert_eq!(diag.values.len(), spec.eps_terms);
                assert!(!diag.pinned);
            }
            other => panic!("expected nonconvergent limit, got {other:?}"),
        }
    }

    #[test]
    fn limit_diagnostics_are_deterministic() {
        let bi = integrals("1 + 0.5*t^2");
        let spec = QuadratureSpec::default();
        let d1 = match v_of(0.0, 1.0, 1.0, &bi, &spec) {
            Err(QuadError::NonconvergentLimit(d)) => d,
            other => panic!("unexpected {other:?}"),
        };
        let d2 = match v_of(0.0, 1.0, 1.0, &bi, &spec) {
            Err(QuadError::NonconvergentLimit(d)) => d,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(d1.values, d2.values);
        assert_eq!(d1.coeffs, d2.coeffs);
    }

    #[test]
    fn closed_density_matches_drifted_level_form() {
        let bi = integrals("1 + t");
        let spec = QuadratureSpec::default();
        let out = fpt_density(&[1.0], &bi, &spec).unwrap();
        assert!(out.all_converged());
        // e^{-2} / sqrt(2 pi), frozen in high precision
        assert_close(out.curve.value[0], 0.053990966513188052, 1e-9);

        let bi = integrals("1");
        let out = fpt_density(&[1.0], &bi, &spec).unwrap();
        assert_close(out.curve.value[0], 0.24197072451914335, 1e-12);
    }

    #[test]
    fn curved_boundary_density_marks_points_without_aborting() {
        let bi = integrals("1 + 0.5*t^2");
        let spec = QuadratureSpec::default();
        let out = fpt_density(&[0.5, 1.0], &bi, &spec).unwrap();
        assert_eq!(out.curve.len(), 2);
        for (v, verdict) in out.curve.value.iter().zip(&out.verdicts) {
            assert!(v.is_nan());
            assert_eq!(*verdict, PointVerdict::Diverging);
        }
    }

    #[test]
    fn cdf_matches_reflection_principle() {
        let bi = integrals("1");
        let spec = QuadratureSpec::default();
        let cdf = fpt_cdf(1.0, &bi, &spec).unwrap();
        // 2 (1 - Phi(1)), frozen in high precision
        assert_close(cdf, 0.3173105078629141, 1e-6);
        assert!(fpt_cdf(0.01, &bi, &spec).unwrap() <= 1e-20);
    }

    #[test]
    fn cdf_is_monotone_and_bounded() {
        let bi = integrals("1");
        let spec = QuadratureSpec::default();
        let mut last = 0.0;
        for &t in &[0.25, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let c = fpt_cdf(t, &bi, &spec).unwrap();
            assert!(c + 1e-12 >= last, "cdf must be nondecreasing");
            assert!(c <= 1.0 + 1e-8);
            last = c;
        }
    }

    #[test]
    fn linear_boundary_total_mass() {
        let bi = integrals("1 + t");
        let spec = QuadratureSpec::default();
        let total = fpt_cdf(50.0, &bi, &spec).unwrap();
        // e^{-2 a mu} with a = mu = 1
        assert_close(total, 0.13533528323661269, 1e-4);
    }
}
