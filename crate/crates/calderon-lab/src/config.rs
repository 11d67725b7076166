//! Flat key=value experiment configuration: defaults, a TOML file, then
//! command-line `--set key=value` overrides, merged in that order and
//! validated once.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Nodes per axis of the cube grid.
    pub grid_n: usize,
    /// Radius of the ball domain for trace pairings.
    pub ball_radius: f64,
    /// Half-width of the cube; nodes span [-extent, extent] per axis.
    pub extent: f64,
    pub cg_tol: f64,
    pub cg_maxiter: usize,
    /// Linearization step for the boundary-data route.
    pub epsilon: f64,
    /// Spectrum lattice cutoff: modes run over {-K..K}^3.
    #[serde(rename = "K")]
    pub k_cut: i32,
    /// Spectrum period; 4.0 puts the perturbation support well inside one cell.
    #[serde(rename = "L")]
    pub period: f64,
    /// Probe growth budget: modes with a larger exponent bound are dropped.
    pub exp_cap: f64,
    pub seed: u64,
    /// Deterministic reductions are only implemented at width 1.
    pub threads: usize,
    /// "volume", "dtn", or "both".
    pub route: String,
    /// "gaussian" or a path to a scalar grid dump with the perturbation.
    pub scenario: String,
    /// Report directory; falls back to $CALDERON_LAB_OUT, then "./out".
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid_n: 48,
            ball_radius: 1.0,
            extent: 1.0,
            cg_tol: 1e-10,
            cg_maxiter: 20000,
            epsilon: 1e-3,
            k_cut: 8,
            period: 4.0,
            exp_cap: 12.0,
            seed: 1,
            threads: 1,
            route: "both".into(),
            scenario: "gaussian".into(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults, overlaid by the file at `path` (if any), overlaid by
    /// `key=value` pairs. Unknown keys are rejected at the final merge.
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(ExperimentConfig::default())
            .map_err(|e| Error::Config(format!("defaults did not serialize: {e}")))?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            let file: toml::Table = text
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            for (k, v) in file {
                table.insert(k, v);
            }
        }
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got {s:?}")))?;
            let value = match format!("v = {raw}").parse::<toml::Table>() {
                Ok(t) => t["v"].clone(),
                // bare words (route=dtn) read as strings
                Err(_) => toml::Value::String(raw.to_string()),
            };
            table.insert(key.trim().to_string(), value);
        }
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e| Error::Config(format!("bad configuration: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 6] = [
            ("ball_radius", self.ball_radius),
            ("extent", self.extent),
            ("cg_tol", self.cg_tol),
            ("epsilon", self.epsilon),
            ("L", self.period),
            ("exp_cap", self.exp_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if self.grid_n < 5 {
            return Err(Error::Config(format!("grid_n = {} is below the stencil minimum 5", self.grid_n)));
        }
        if self.cg_maxiter == 0 {
            return Err(Error::Config("cg_maxiter must be positive".into()));
        }
        if self.k_cut < 1 {
            return Err(Error::Config(format!("K = {} gives a degenerate spectrum lattice", self.k_cut)));
        }
        if self.ball_radius > self.extent {
            return Err(Error::Config(format!(
                "ball_radius = {} does not fit in extent = {}",
                self.ball_radius, self.extent
            )));
        }
        if self.threads != 1 {
            return Err(Error::Config(format!(
                "threads = {}: only the deterministic single-thread mode is implemented",
                self.threads
            )));
        }
        match self.route.as_str() {
            "volume" | "dtn" | "both" => {}
            other => {
                return Err(Error::Config(format!(
                    "route = {other:?} (expected volume, dtn, or both)"
                )))
            }
        }
        Ok(())
    }

    /// Output directory with env fallback.
    pub fn resolve_out_dir(&self) -> std::path::PathBuf {
        if let Some(d) = &self.out_dir {
            return d.into();
        }
        if let Ok(d) = std::env::var("CALDERON_LAB_OUT") {
            if !d.is_empty() {
                return d.into();
            }
        }
        "out".into()
    }
}
