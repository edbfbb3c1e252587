//! The five subcommands. Each resolves its configuration, builds and
//! validates the boundary, computes its table, writes the output file, and
//! prints a short summary to stdout. Exit codes: 0 success, 2 config/parse,
//! 3 boundary validation, 4 nonconvergent closed form (files still written),
//! 5 internal numeric failure.

use std::sync::Arc;

use fptlab_core::boundary::{parse_boundary, uniform_grid, Boundary, BoundaryError};
use fptlab_core::kernels::BoundaryIntegrals;
use fptlab_core::montecarlo::{bridge_functional_estimate, direct_hitting_density};
use fptlab_core::quadrature::{fpt_cdf, fpt_density, PointVerdict, QuadError};
use fptlab_core::validation::{cross_route_report, standard_residual_suite};

use crate::config::{ConfigError, OutputFormat, RunConfig};
use crate::output::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("boundary validation failed: {0}")]
    Boundary(BoundaryError),
    #[error("boundary expression: {0}")]
    Parse(BoundaryError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) | CmdError::Parse(_) => 2,
            CmdError::Boundary(_) => 3,
            CmdError::Numeric(_) | CmdError::Io(_) => 5,
        }
    }
}

/// Exit status carried back to `main`. Nonconvergent closed-form points are
/// reported through the exit code after files are written.
pub struct CmdOutcome {
    pub nonconvergent: bool,
}

fn build_boundary(config: &RunConfig) -> Result<Arc<Boundary>, CmdError> {
    let expr = parse_boundary(&config.boundary).map_err(CmdError::Parse)?;
    let grid = uniform_grid(0.0, config.s_max.max(1e-6), 1024);
    Boundary::build(expr, &grid)
        .map(Arc::new)
        .map_err(CmdError::Boundary)
}

fn numeric<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Numeric(e.to_string())
}

fn write_table(table: &Table, config: &RunConfig) -> Result<(), CmdError> {
    table.write(&config.out, config.format == OutputFormat::Json)?;
    Ok(())
}

pub fn cmd_density(config: &RunConfig) -> Result<CmdOutcome, CmdError> {
    let bd = build_boundary(config)?;
    let bi = BoundaryIntegrals::new(Arc::clone(&bd));
    let mc = config.mc_params()?;

    let closed = fpt_density(&config.s_grid, &bi, &config.quadrature).map_err(numeric)?;
    let girsanov =
        fptlab_core::montecarlo::girsanov_density_curve(&bi, &config.s_grid, &mc).map_err(numeric)?;
    let direct =
        direct_hitting_density(&bd, &config.s_grid, &mc, config.bin_width).map_err(numeric)?;

    let mut table = Table::new(
        "density",
        bd.source(),
        vec![
            "s",
            "phi_closed",
            "verdict",
            "phi_girsanov_mc",
            "stderr_g",
            "phi_direct_mc",
            "stderr_d",
        ],
    );
    for i in 0..config.s_grid.len() {
        table.push(vec![
            Cell::Float(config.s_grid[i]),
            Cell::Float(closed.curve.value[i]),
            Cell::Text(closed.verdicts[i].as_str().to_string()),
            Cell::Float(girsanov.value[i]),
            Cell::Float(girsanov.stderr[i]),
            Cell::Float(direct.curve.value[i]),
            Cell::Float(direct.curve.stderr[i]),
        ]);
    }
    write_table(&table, config)?;

    let nonconvergent = !closed.all_converged();
    println!(
        "density: {} grid points for boundary {} -> {}",
        config.s_grid.len(),
        bd.source(),
        config.out.display()
    );
    if nonconvergent {
        println!("density: closed-form horizon limit did not converge at every point");
    }
    Ok(CmdOutcome { nonconvergent })
}

pub fn cmd_cdf(config: &RunConfig) -> Result<CmdOutcome, CmdError> {
    let bd = build_boundary(config)?;
    let bi = BoundaryIntegrals::new(Arc::clone(&bd));

    let mut table = Table::new("cdf", bd.source(), vec!["t_max", "cdf", "verdict"]);
    let mut nonconvergent = false;
    for &t in &config.s_grid {
        match fpt_cdf(t, &bi, &config.quadrature) {
            Ok(v) => table.push(vec![
                Cell::Float(t),
                Cell::Float(v),
                Cell::Text(PointVerdict::Converged.as_str().to_string()),
            ]),
            Err(QuadError::NonconvergentLimit(diag)) => {
                nonconvergent = true;
                let verdict: PointVerdict = diag.raw_verdict.into();
                table.push(vec![
                    Cell::Float(t),
                    Cell::Float(f64::NAN),
                    Cell::Text(verdict.as_str().to_string()),
                ]);
            }
            Err(e) => return Err(numeric(e)),
        }
    }
    write_table(&table, config)?;
    println!(
        "cdf: {} horizons for boundary {} -> {}",
        config.s_grid.len(),
        bd.source(),
        config.out.display()
    );
    Ok(CmdOutcome { nonconvergent })
}

pub fn cmd_bridge_expectation(config: &RunConfig) -> Result<CmdOutcome, CmdError> {
    let bd = build_boundary(config)?;
    let mc = config.mc_params()?;

    let mut table = Table::new(
        "bridge-expectation",
        bd.source(),
        vec!["s", "mean", "stderr", "n_paths", "steps", "seed"],
    );
    for &s in &config.s_grid {
        let est = bridge_functional_estimate(&bd, s, &mc).map_err(numeric)?;
        table.push(vec![
            Cell::Float(s),
            Cell::Float(est.mean),
            Cell::Float(est.stderr),
            Cell::Int(est.n_paths as u64),
            Cell::Int(est.n_steps as u64),
            Cell::Int(est.seed),
        ]);
    }
    write_table(&table, config)?;
    println!(
        "bridge-expectation: {} horizons for boundary {} -> {}",
        config.s_grid.len(),
        bd.source(),
        config.out.display()
    );
    Ok(CmdOutcome {
        nonconvergent: false,
    })
}

pub fn cmd_residual_report(config: &RunConfig) -> Result<CmdOutcome, CmdError> {
    let bd = build_boundary(config)?;
    let bi = BoundaryIntegrals::new(Arc::clone(&bd));

    let suite = standard_residual_suite(&bi, config.s_max).map_err(numeric)?;
    let mut table = Table::new(
        "residual-report",
        bd.source(),
        vec![
            "operator",
            "term",
            "point",
            "t",
            "a",
            "tau",
            "b",
            "s",
            "h",
            "residual",
            "fitted_order",
            "verdict",
        ],
    );
    for report in &suite {
        for (pi, point) in report.points.iter().enumerate() {
            for (hi, &h) in report.step_sizes.iter().enumerate() {
                table.push(vec![
                    Cell::Text(report.operator.clone()),
                    Cell::Text(report.term.clone()),
                    Cell::Int(pi as u64),
                    Cell::Float(point.t),
                    Cell::Float(point.a),
                    Cell::Float(point.tau),
                    Cell::Float(point.b),
                    Cell::Float(point.s),
                    Cell::Float(h),
                    Cell::Float(report.residuals[pi][hi]),
                    Cell::Float(report.fitted_order[pi]),
                    Cell::Text(report.verdict[pi].as_str().to_string()),
                ]);
            }
        }
    }
    write_table(&table, config)?;

    println!(
        "residual-report: boundary {} at horizon {} -> {}",
        bd.source(),
        config.s_max,
        config.out.display()
    );
    for report in &suite {
        for (pi, order) in report.fitted_order.iter().enumerate() {
            println!(
                "  {} [{}] point {}: order {:.2} ({})",
                report.operator,
                report.term,
                pi,
                order,
                report.verdict[pi].as_str()
            );
        }
    }
    Ok(CmdOutcome {
        nonconvergent: false,
    })
}

pub fn cmd_cross_validate(config: &RunConfig) -> Result<CmdOutcome, CmdError> {
    let bd = build_boundary(config)?;
    let bi = BoundaryIntegrals::new(Arc::clone(&bd));
    let mc = config.mc_params()?;

    let report = cross_route_report(&bi, &config.s_grid, &config.quadrature, &mc, config.bin_width)
        .map_err(numeric)?;

    let mut table = Table::new(
        "cross-validate",
        bd.source(),
        vec![
            "s",
            "phi_closed",
            "verdict",
            "phi_girsanov_mc",
            "stderr_g",
            "phi_direct_mc",
            "stderr_d",
            "z_closed_girsanov",
            "z_closed_direct",
            "z_girsanov_direct",
            "agree_closed_girsanov",
            "agree_closed_direct",
            "agree_girsanov_direct",
        ],
    );
    for p in &report.points {
        table.push(vec![
            Cell::Float(p.s),
            Cell::Float(p.phi_closed),
            Cell::Text(p.verdict.as_str().to_string()),
            Cell::Float(p.phi_girsanov),
            Cell::Float(p.stderr_girsanov),
            Cell::Float(p.phi_direct),
            Cell::Float(p.stderr_direct),
            Cell::Float(p.z_closed_girsanov),
            Cell::Float(p.z_closed_direct),
            Cell::Float(p.z_girsanov_direct),
            Cell::Text(p.agree_closed_girsanov.as_str().to_string()),
            Cell::Text(p.agree_closed_direct.as_str().to_string()),
            Cell::Text(p.agree_girsanov_direct.as_str().to_string()),
        ]);
    }
    write_table(&table, config)?;

    println!("cross-validate: boundary {}", report.boundary);
    for (p, diag) in report.points.iter().zip(&report.diagnostics) {
        let limit_note = match diag {
            Some(d) if d.pinned => format!(
                "limit pinned by zero curvature (raw table: {:?})",
                d.raw_verdict
            ),
            Some(d) => format!("limit {:?}", d.raw_verdict),
            None => "limit not evaluated".to_string(),
        };
        println!(
            "  s={}: closed={} [{}], girsanov-mc={} (se {}), direct-mc={} (se {}), \
             z(g,d)={:.2}, {}",
            p.s,
            p.phi_closed,
            p.verdict.as_str(),
            p.phi_girsanov,
            p.stderr_girsanov,
            p.phi_direct,
            p.stderr_direct,
            p.z_girsanov_direct,
            limit_note
        );
    }
    println!(
        "  negative kernel mass fraction near horizon: {}",
        report.negative_mass_fraction
    );
    println!("  -> {}", config.out.display());

    Ok(CmdOutcome {
        nonconvergent: report.any_nonconverged(),
    })
}
