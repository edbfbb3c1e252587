//! Run configuration: a single JSON document, with command-line flags
//! overriding file values so experiment sweeps can be scripted.

use std::path::PathBuf;

use serde::Deserialize;

use fptlab_core::montecarlo::McParams;
use fptlab_core::quadrature::QuadratureSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path}: {detail}")]
    File { path: String, detail: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("missing required setting: {0}")]
    Missing(String),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, ConfigError> {
        if self.count < 1 {
            return Err(ConfigError::Invalid("grid count must be >= 1".to_string()));
        }
        if !(self.start > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "grid start must be > 0, got {}",
                self.start
            )));
        }
        if self.stop < self.start {
            return Err(ConfigError::Invalid(format!(
                "grid stop {} below start {}",
                self.stop, self.start
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = self.count;
        Ok((0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    pub abs_tol: Option<f64>,
    pub max_panels: Option<usize>,
    pub truncation_sigmas: Option<f64>,
    pub eps0: Option<f64>,
    pub eps_ratio: Option<f64>,
    pub eps_terms: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct McOverrides {
    pub n_paths: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub antithetic: Option<bool>,
    pub bin_width: Option<f64>,
}

/// The on-disk JSON document. Every field is optional; flags fill the rest.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub boundary: Option<String>,
    pub s_grid: Option<GridSpec>,
    #[serde(default)]
    pub quadrature: QuadOverrides,
    #[serde(default)]
    pub mc: McOverrides,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        match text {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError::Invalid(format!(
                "format must be csv or json, got {other:?}"
            ))),
        }
    }
}

/// Fully resolved configuration for one command run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub boundary: String,
    pub s_grid: Vec<f64>,
    pub s_max: f64,
    pub quadrature: QuadratureSpec,
    pub n_paths: usize,
    pub steps: usize,
    pub seed: Option<u64>,
    pub antithetic: bool,
    pub bin_width: Option<f64>,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Monte Carlo parameters; commands that sample must have a seed — there
    /// is no entropy default because reproducibility is mandatory.
    pub fn mc_params(&self) -> Result<McParams, ConfigError> {
        let seed = self
            .seed
            .ok_or_else(|| ConfigError::Missing("seed (sampling commands take --seed)".into()))?;
        if self.n_paths < 1 {
            return Err(ConfigError::Invalid("n_paths must be >= 1".to_string()));
        }
        Ok(McParams {
            n_paths: self.n_paths,
            steps: self.steps,
            seed,
            antithetic: self.antithetic,
        })
    }
}

/// Flag values collected by the argument parser; `None` defers to the file.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub boundary: Option<String>,
    pub s_start: Option<f64>,
    pub s_stop: Option<f64>,
    pub s_count: Option<usize>,
    pub n_paths: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub eps0: Option<f64>,
    pub eps_terms: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

pub fn load_file(path: &PathBuf) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Merge flags over the file document and validate.
pub fn resolve(file: FileConfig, flags: FlagOverrides) -> Result<RunConfig, ConfigError> {
    let boundary = flags
        .boundary
        .or(file.boundary)
        .ok_or_else(|| ConfigError::Missing("boundary expression".into()))?;

    let grid_spec = match (flags.s_start, flags.s_stop, flags.s_count) {
        (None, None, None) => file
            .s_grid
            .ok_or_else(|| ConfigError::Missing("s grid (--s-start/--s-stop/--s-count)".into()))?,
        (start, stop, count) => {
            let base = file.s_grid;
            GridSpec {
                start: start
                    .or(base.map(|g| g.start))
                    .ok_or_else(|| ConfigError::Missing("--s-start".into()))?,
                stop: stop
                    .or(base.map(|g| g.stop))
                    .or(start)
                    .ok_or_else(|| ConfigError::Missing("--s-stop".into()))?,
                count: count.or(base.map(|g| g.count)).unwrap_or(1),
            }
        }
    };
    let s_grid = grid_spec.points()?;
    let s_max = *s_grid.last().unwrap();

    let mut quadrature = QuadratureSpec::default();
    let q = file.quadrature;
    if let Some(v) = q.abs_tol {
        quadrature.abs_tol = v;
    }
    if let Some(v) = q.max_panels {
        quadrature.max_panels = v;
    }
    if let Some(v) = q.truncation_sigmas {
        quadrature.truncation_sigmas = v;
    }
    if let Some(v) = flags.eps0.or(q.eps0) {
        quadrature.eps0 = v;
    }
    if let Some(v) = q.eps_ratio {
        quadrature.eps_ratio = v;
    }
    if let Some(v) = flags.eps_terms.or(q.eps_terms) {
        quadrature.eps_terms = v;
    }
    quadrature
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let out = flags
        .out
        .or(file.out)
        .ok_or_else(|| ConfigError::Missing("output path (--out)".into()))?;
    let format = OutputFormat::parse(
        flags
            .format
            .or(file.format)
            .unwrap_or_else(|| "csv".to_string())
            .as_str(),
    )?;

    Ok(RunConfig {
        boundary,
        s_grid,
        s_max,
        quadrature,
        n_paths: flags.n_paths.or(file.mc.n_paths).unwrap_or(200_000),
        steps: flags.steps.or(file.mc.steps).unwrap_or(1024),
        seed: flags.seed.or(file.mc.seed),
        antithetic: file.mc.antithetic.unwrap_or(true),
        bin_width: file.mc.bin_width,
        out,
        format,
    })
}
