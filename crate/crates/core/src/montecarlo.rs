//! Two independent stochastic oracles for the hitting-time density: exact
//! radial-bridge sampling of the conditioned process (for the bridge
//! functional and the measure-change route), and direct path simulation
//! against the boundary with a per-step bridge-crossing correction.
//!
//! Reproducibility contract: every sample unit draws from its own
//! counter-seeded stream `(seed, stream_id)`, and aggregation is a
//! fixed-order pairwise reduction over stream ids, so results are
//! bit-identical regardless of worker count.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boundary::Boundary;
use crate::curve::DensityCurve;
use crate::kernels::{girsanov_prefactor, level_density, BoundaryIntegrals, KernelError};

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid Monte Carlo parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A deterministic stream address: `(seed, stream_id)` fully determines every
/// draw. Distinct stream ids give statistically independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Sampling parameters shared by the Monte Carlo routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McParams {
    pub n_paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl McParams {
    pub fn new(n_paths: usize, steps: usize, seed: u64) -> Self {
        McParams {
            n_paths,
            steps,
            seed,
            antithetic: true,
        }
    }

    fn validate(&self) -> Result<(), McError> {
        if self.n_paths == 0 {
            return Err(McError::Params("n_paths must be at least 1".to_string()));
        }
        if self.steps < 2 {
            return Err(McError::Params("steps must be at least 2".to_string()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(McError::Params(
                "antithetic pairing needs an even n_paths".to_string(),
            ));
        }
        Ok(())
    }
}

/// One sampled path of the conditioned radial process on a uniform grid,
/// starting at `a` and pinned to 0 at the horizon.
#[derive(Debug, Clone)]
pub struct BridgePath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// A Monte Carlo result. `stderr` is sample-std / sqrt(#independent units);
/// with antithetic pairing the independent unit is the pair average.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Fixed-order pairwise summation; deterministic for a given slice.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        let mut acc = 0.0;
        for x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = pairwise_sum(samples) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sequential conditional step of a standard Brownian bridge on [0, s] from 0
/// to 0: given the value at u, the value at u + delta is Gaussian with mean
/// value * (s-u-delta)/(s-u) and variance delta (s-u-delta)/(s-u).
#[inline]
fn bridge_step(value: f64, s: f64, u: f64, delta: f64, z: f64) -> f64 {
    let remain = s - u;
    let next_remain = remain - delta;
    if next_remain <= 0.0 {
        return 0.0;
    }
    let shrink = next_remain / remain;
    value * shrink + (delta * shrink).sqrt() * z
}

/// Exact-in-law sampling of the conditioned radial process via the modulus of
/// a three-component Brownian bridge: X(u) = |(a(1-u/s) + b1(u), b2(u), b3(u))|
/// with independent standard bridges b_i from 0 to 0.
pub fn sample_bessel_bridge(a: f64, s: f64, m: usize, stream: RngStream) -> BridgePath {
    assert!(a > 0.0 && s > 0.0 && m >= 2);
    let mut rng = stream.rng();
    let delta = s / m as f64;
    let mut comps = [0.0f64; 3];
    let mut grid = Vec::with_capacity(m + 1);
    let mut values = Vec::with_capacity(m + 1);
    grid.push(0.0);
    values.push(a);
    for j in 0..m {
        let u = j as f64 * delta;
        for c in comps.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c = bridge_step(*c, s, u, delta, z);
        }
        let uj = (j + 1) as f64 * delta;
        let line = a * (1.0 - uj / s);
        let x0 = line + comps[0];
        let r = (x0 * x0 + comps[1] * comps[1] + comps[2] * comps[2]).sqrt();
        grid.push(uj);
        values.push(r);
    }
    BridgePath { grid, values }
}

/// Euler discretization of the conditioned process's singular SDE
/// dX = dW + (1/X - X/(s-u)) du with reflection at zero and the final value
/// pinned to 0. A cross-check oracle only; the drift is singular at both
/// X = 0 and u = s, so this route is never trusted alone.
pub fn sample_bessel_bridge_euler(a: f64, s: f64, m: usize, stream: RngStream) -> BridgePath {
    assert!(a > 0.0 && s > 0.0 && m >= 2);
    let mut rng = stream.rng();
    let delta = s / m as f64;
    let sqrt_delta = delta.sqrt();
    let mut grid = Vec::with_capacity(m + 1);
    let mut values = Vec::with_capacity(m + 1);
    grid.push(0.0);
    values.push(a);
    let mut x = a;
    for j in 0..m {
        let u = j as f64 * delta;
        if j + 1 == m {
            x = 0.0;
        } else {
            let z: f64 = rng.sample(StandardNormal);
            let drift = 1.0 / x.max(1e-12) - x / (s - u);
            x = (x + drift * delta + sqrt_delta * z).abs();
        }
        grid.push((j + 1) as f64 * delta);
        values.push(x);
    }
    BridgePath { grid, values }
}

/// Trapezoid of curv[j] * X[j] on a uniform grid for the pair of antithetic
/// paths from one stream. Negating every Gaussian draw negates each bridge
/// component, so the partner path only flips the sign of the first component
/// against the deterministic line; both functionals come from one sweep.
fn bridge_pair_exponents(
    a: f64,
    s: f64,
    curv: &[f64],
    m: usize,
    stream: RngStream,
) -> (f64, f64) {
    let mut rng = stream.rng();
    let delta = s / m as f64;
    let mut comps = [0.0f64; 3];
    let mut w_plus = 0.5 * curv[0] * a;
    let mut w_minus = w_plus;
    for j in 0..m {
        let u = j as f64 * delta;
        for c in comps.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c = bridge_step(*c, s, u, delta, z);
        }
        let uj = (j + 1) as f64 * delta;
        let line = a * (1.0 - uj / s);
        let cross = comps[1] * comps[1] + comps[2] * comps[2];
        let xp = line + comps[0];
        let xm = line - comps[0];
        let r_plus = (xp * xp + cross).sqrt();
        let r_minus = (xm * xm + cross).sqrt();
        let weight = if j + 1 == m { 0.5 } else { 1.0 };
        w_plus += weight * curv[j + 1] * r_plus;
        w_minus += weight * curv[j + 1] * r_minus;
    }
    (w_plus * delta, w_minus * delta)
}

/// Mean over paths of exp{- trapezoid(f''(u) X(u))} for the conditioned
/// radial process from `a = f(0)` to 0 over [0, s]. Estimates a quantity in
/// (0, 1]. When f'' vanishes on the whole grid the integrand is identically
/// one and no paths are drawn.
pub fn bridge_functional_estimate(
    bd: &Boundary,
    s: f64,
    params: &McParams,
) -> Result<McEstimate, McError> {
    params.validate()?;
    if !(s > 0.0) {
        return Err(McError::Params(format!("horizon must be positive, got {s}")));
    }
    let start = Instant::now();
    let m = params.steps;
    let a = bd.initial_level();
    let delta = s / m as f64;
    let curv: Vec<f64> = (0..=m).map(|j| bd.curvature(j as f64 * delta)).collect();

    if curv.iter().all(|&c| c == 0.0) {
        return Ok(McEstimate {
            mean: 1.0,
            stderr: 0.0,
            n_paths: params.n_paths,
            n_steps: m,
            seed: params.seed,
            wall_time: start.elapsed(),
        });
    }

    let samples: Vec<f64> = if params.antithetic {
        let n_pairs = params.n_paths / 2;
        (0..n_pairs as u64)
            .into_par_iter()
            .map(|pair| {
                let (wp, wm) =
                    bridge_pair_exponents(a, s, &curv, m, RngStream::new(params.seed, pair));
                0.5 * ((-wp).exp() + (-wm).exp())
            })
            .collect()
    } else {
        (0..params.n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let (wp, _) =
                    bridge_pair_exponents(a, s, &curv, m, RngStream::new(params.seed, i));
                (-wp).exp()
            })
            .collect()
    };

    let (mean, stderr) = mean_and_stderr(&samples);
    Ok(McEstimate {
        mean,
        stderr,
        n_paths: params.n_paths,
        n_steps: m,
        seed: params.seed,
        wall_time: start.elapsed(),
    })
}

/// Measure-change route: per horizon s the density is
/// bridge functional x exp{-(1/2) int_0^s (f')^2 - f'(0) a} x phi_a(s),
/// with the statistical error scaled by the deterministic factors.
pub fn girsanov_density_curve(
    bi: &BoundaryIntegrals,
    s_grid: &[f64],
    params: &McParams,
) -> Result<DensityCurve, McError> {
    params.validate()?;
    let bd = bi.boundary();
    let a = bd.initial_level();
    let mut value = Vec::with_capacity(s_grid.len());
    let mut stderr = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let est = bridge_functional_estimate(bd, s, params)?;
        let factor = girsanov_prefactor(bi, s)? * level_density(a, s)?;
        value.push(est.mean * factor);
        stderr.push(est.stderr * factor);
    }
    Ok(DensityCurve::new(s_grid.to_vec(), value, stderr))
}

/// First-crossing simulation of one path on a uniform grid of `m` steps over
/// [0, horizon]. Between grid points a crossing of the linearized boundary is
/// declared with probability exp{-2 g_i g_{i+1} / delta} when both gaps are
/// positive, and with certainty when a gap closes; the recorded time is the
/// step midpoint.
fn first_crossing(f_grid: &[f64], delta: f64, m: usize, stream: RngStream) -> Option<f64> {
    let mut rng = stream.rng();
    let sqrt_delta = delta.sqrt();
    let mut x = 0.0f64;
    let mut gap = f_grid[0]; // f(0) - B_0 = a > 0
    for j in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        let x_next = x + sqrt_delta * z;
        let gap_next = f_grid[j + 1] - x_next;
        let midpoint = (j as f64 + 0.5) * delta;
        if gap_next <= 0.0 {
            return Some(midpoint);
        }
        let p = (-2.0 * gap * gap_next / delta).exp().clamp(0.0, 1.0);
        let u: f64 = rng.gen();
        if u < p {
            return Some(midpoint);
        }
        x = x_next;
        gap = gap_next;
    }
    None
}

/// Crossing times of `n_paths` simulated paths against the boundary over
/// [0, horizon]; `None` marks paths that never crossed.
pub fn simulate_crossing_times(
    bd: &Boundary,
    horizon: f64,
    params: &McParams,
) -> Result<Vec<Option<f64>>, McError> {
    params.validate()?;
    if !(horizon > 0.0) {
        return Err(McError::Params(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let m = params.steps;
    let delta = horizon / m as f64;
    let f_grid: Vec<f64> = (0..=m).map(|j| bd.f(j as f64 * delta)).collect();
    Ok((0..params.n_paths as u64)
        .into_par_iter()
        .map(|i| first_crossing(&f_grid, delta, m, RngStream::new(params.seed, i)))
        .collect())
}

/// Direct-simulation density estimate plus the total hit fraction over the
/// simulated horizon.
#[derive(Debug, Clone, Serialize)]
pub struct DirectHittingOutcome {
    pub curve: DensityCurve,
    pub hit_fraction: f64,
    pub hit_fraction_stderr: f64,
    /// Width of the histogram bin centered on each grid point.
    pub bin_width: f64,
}

/// Histogram-based density on bins centered at the grid points. A crossing
/// recorded in simulation step [j delta, (j+1) delta] contributes the
/// fractional overlap of that step with the bin, which removes the
/// quantization bias of whole-step counting when the bin width is not a
/// multiple of the step; for aligned bins the weights are 0/1 and the
/// standard error reduces to the binomial one. The simulation horizon is
/// max(s_grid) plus half a bin so the last bin is complete. Default bin
/// width divides the grid span into 64 bins (or max(s_grid)/64 for a
/// single-point grid).
pub fn direct_hitting_density(
    bd: &Boundary,
    s_grid: &[f64],
    params: &McParams,
    bin_width: Option<f64>,
) -> Result<DirectHittingOutcome, McError> {
    if s_grid.is_empty() || s_grid.iter().any(|&s| s <= 0.0) {
        return Err(McError::Params(
            "horizon grid must be non-empty with all s > 0".to_string(),
        ));
    }
    let lo = s_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = s_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = bin_width.unwrap_or(if hi > lo { (hi - lo) / 64.0 } else { hi / 64.0 });
    if !(width > 0.0) {
        return Err(McError::Params(format!(
            "bin width must be positive, got {width}"
        )));
    }
    let horizon = hi + 0.5 * width;
    let times = simulate_crossing_times(bd, horizon, params)?;
    let delta = horizon / params.steps as f64;

    let n = params.n_paths as f64;
    let hits = times.iter().filter(|t| t.is_some()).count() as f64;
    let p_hit = hits / n;
    let hit_fraction_stderr = (p_hit * (1.0 - p_hit) / n).sqrt();

    let mut value = Vec::with_capacity(s_grid.len());
    let mut stderr = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let lo_edge = s - 0.5 * width;
        let hi_edge = s + 0.5 * width;
        let mut weight_sum = 0.0;
        let mut weight_sq_sum = 0.0;
        for t in times.iter().flatten() {
            // recover the step interval from the midpoint-recorded time
            let j = (t / delta - 0.5).round();
            let step_lo = j * delta;
            let step_hi = step_lo + delta;
            let overlap = (step_hi.min(hi_edge) - step_lo.max(lo_edge)).max(0.0) / delta;
            weight_sum += overlap;
            weight_sq_sum += overlap * overlap;
        }
        let mean_w = weight_sum / n;
        let var_w = ((weight_sq_sum - n * mean_w * mean_w) / (n - 1.0)).max(0.0);
        value.push(mean_w / width);
        stderr.push((var_w / n).sqrt() / width);
    }
    Ok(DirectHittingOutcome {
        curve: DensityCurve::new(s_grid.to_vec(), value, stderr),
        hit_fraction: p_hit,
        hit_fraction_stderr,
        bin_width: width,
    })
}
