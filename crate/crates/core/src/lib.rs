//! First-passage-time laboratory for one-dimensional Brownian motion against
//! convex, twice continuously differentiable moving boundaries.
//!
//! The crate provides three independent routes to the hitting-time density
//! and the machinery to compare them:
//!
//! * [`boundary`] — a small differentiation-closed expression language for
//!   boundaries, with symbolic first and second derivatives and grid-certified
//!   convexity.
//! * [`kernels`] — the closed-form analytic objects: fixed-level hitting
//!   density, heat image kernel, the gauge-dressed kernel `H`, the Green's
//!   function `G`, and the measure-change prefactor.
//! * [`quadrature`] — semi-infinite integration of `G`, the horizon-limit
//!   evaluation of the bridge functional with convergence diagnostics, and
//!   the closed-form density/CDF.
//! * [`montecarlo`] — two stochastic oracles: exact radial-bridge sampling of
//!   the conditioned process, and direct path simulation with a
//!   bridge-crossing correction.
//! * [`validation`] — finite-difference PDE residual measurements, delta
//!   tests, the gauge-chain reconstruction identity, and the cross-route
//!   comparison report.

pub mod boundary;
pub mod curve;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod validation;

pub use boundary::{parse_boundary, Boundary, BoundaryError, BoundaryExpr};
pub use curve::DensityCurve;
pub use kernels::{BoundaryIntegrals, EvalPoint, KernelError};
pub use quadrature::{LimitDiagnostics, LimitVerdict, PointVerdict, QuadError, QuadratureSpec};
