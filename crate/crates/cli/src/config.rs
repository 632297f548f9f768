//! Versioned run configuration and its resolution into solver inputs.

use std::fs;
use std::path::{Path, PathBuf};

use glvortex::diagnostics::VerifyTolerances;
use glvortex::model::{bec_to_gl, normalize_degrees, BecParams, ConjugationFlags};
use glvortex::{
    build_grid, validate, CouplingParams, DegreePair, FarField, GridSpec, RadialGrid, SolveOptions,
};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub params: Option<CouplingParams>,
    #[serde(default, alias = "bec-params")]
    pub bec_params: Option<BecParams>,
    /// Signed winding numbers; negative ones are conjugated away.
    pub degrees: [i64; 2],
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub sweep: Option<SweepRange>,
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default)]
    pub verify: VerifyTolerances,
    /// Output path used when `--out` is absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Inclusive coupling range `B_start, B_start + B_step, …, B_stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    #[serde(rename = "B_start")]
    pub start: f64,
    #[serde(rename = "B_stop")]
    pub stop: f64,
    #[serde(rename = "B_step")]
    pub step: f64,
}

impl SweepRange {
    /// Sweep points, rounded to 12 decimals so that e.g. `-0.9 + 0.1k` lands
    /// on the intended values.
    pub fn points(&self) -> Result<Vec<f64>, Failure> {
        let SweepRange { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
            return Err(Failure::config(
                "sweep range must be finite with a nonzero step",
            ));
        }
        let span = (stop - start) / step;
        if span < -1e-9 {
            return Err(Failure::config("B_step points away from B_stop"));
        }
        let count = (span + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| {
                let b = start + k as f64 * step;
                (b * 1e12).round() / 1e12
            })
            .collect())
    }
}

/// Command-line values that override the configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub r_max: Option<f64>,
    pub tol: Option<f64>,
    pub far_field: Option<FarField>,
}

/// A validated configuration ready to solve.
#[derive(Debug, Clone)]
pub struct Run {
    pub params: CouplingParams,
    /// Length scale of the condensate mapping, when the input was physical.
    pub epsilon: Option<f64>,
    pub degrees: DegreePair,
    pub conjugated: ConjugationFlags,
    pub grid: RadialGrid,
    pub options: SolveOptions,
    pub sweep: Option<SweepRange>,
    pub fit_window: Option<(f64, f64)>,
    pub tolerances: VerifyTolerances,
    pub out: Option<PathBuf>,
}

pub fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config_kind("Io", format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::config_kind("Json", format!("{}: {e}", path.display())))?;
    if cfg.version != CONFIG_VERSION {
        return Err(Failure::config(format!(
            "unsupported config version {} (expected {CONFIG_VERSION})",
            cfg.version
        )));
    }
    Ok(cfg)
}

pub fn resolve(cfg: RunConfig, over: Overrides) -> Result<Run, Failure> {
    let (params, epsilon) = match (cfg.params, cfg.bec_params) {
        (Some(p), None) => (validate(p)?, None),
        (None, Some(bec)) => {
            let (p, eps) = bec_to_gl(&bec)?;
            (p, Some(eps))
        }
        _ => {
            return Err(Failure::config(
                "exactly one of params / bec_params is required",
            ))
        }
    };
    let (degrees, conjugated) = normalize_degrees(cfg.degrees[0], cfg.degrees[1]);
    let mut spec = cfg.grid;
    if let Some(n) = over.grid_n {
        spec.n = n;
    }
    if let Some(r) = over.r_max {
        spec.r_max = r;
    }
    let grid = build_grid(spec)?;
    let mut options = cfg.solve;
    if let Some(t) = over.tol {
        options.tolerance = t;
    }
    if let Some(f) = over.far_field {
        options.far_field = f;
    }
    let fit_window = match cfg.fit_window {
        Some([lo, hi]) if !(lo > 0.0 && hi > lo && hi <= grid.r_max()) => {
            return Err(Failure::config(format!(
                "fit window [{lo}, {hi}] must lie inside (0, R_max]"
            )))
        }
        Some([lo, hi]) => Some((lo, hi)),
        None => None,
    };
    if let Some(range) = cfg.sweep {
        for b in range.points()? {
            validate(params.with_coupling(b))?;
        }
    }
    Ok(Run {
        params,
        epsilon,
        degrees,
        conjugated,
        grid,
        options,
        sweep: cfg.sweep,
        fit_window,
        tolerances: cfg.verify,
        out: cfg.out,
    })
}

pub fn load(path: &Path, over: Overrides) -> Result<Run, Failure> {
    resolve(read_config(path)?, over)
}
