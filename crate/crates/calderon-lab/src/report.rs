//! Plot-ready CSV reports and the run summary JSON. Formatting is fixed so
//! identical runs produce byte-identical files.

use crate::error::Result;
use crate::recon::{ModeStatus, SpectrumGrid};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct ReportRow {
    /// Name of the identity or check the row verifies.
    pub operation: String,
    /// Nodes per axis, 0 for grid-free checks.
    pub grid: usize,
    pub h: f64,
    pub residual_l2: f64,
    pub residual_max: f64,
    pub order_estimate: Option<f64>,
}

#[derive(Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn add(
        &mut self,
        operation: impl Into<String>,
        grid: usize,
        h: f64,
        residual_l2: f64,
        residual_max: f64,
        order_estimate: Option<f64>,
    ) {
        self.rows.push(ReportRow {
            operation: operation.into(),
            grid,
            h,
            residual_l2,
            residual_max,
            order_estimate,
        });
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("operation,grid,h,residual_l2,residual_max,order_estimate\n");
        for r in &self.rows {
            let order = match r.order_estimate {
                Some(o) => format!("{o:.6}"),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{:.12e},{:.12e},{:.12e},{}\n",
                r.operation, r.grid, r.h, r.residual_l2, r.residual_max, order
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Write any serializable summary with stable field order (declaration
/// order) and a trailing newline.
pub fn write_summary<T: Serialize>(path: &Path, summary: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| crate::error::Error::Config(format!("summary serialization: {e}")))?;
    writeln!(f, "{text}")?;
    Ok(())
}

/// Per-command pass/fail summary.
#[derive(Serialize)]
pub struct CheckSummary {
    pub command: String,
    pub rows: usize,
    pub pass: bool,
    pub worst_residual: f64,
}

/// Reconstruction summary; `error_l2_rel` is the error of the route that
/// ran (the boundary-data route when both did).
#[derive(Serialize)]
pub struct LinreconSummary {
    #[serde(rename = "K")]
    pub k_cut: i32,
    #[serde(rename = "L")]
    pub period: f64,
    pub eps: f64,
    #[serde(rename = "error_L2_rel")]
    pub error_l2_rel: f64,
    pub dropped_k_count: usize,
    #[serde(rename = "error_L2_rel_volume", skip_serializing_if = "Option::is_none")]
    pub error_volume: Option<f64>,
    #[serde(rename = "error_L2_rel_dtn", skip_serializing_if = "Option::is_none")]
    pub error_dtn: Option<f64>,
}

/// Spectrum CSV: one row per lattice mode, flat lattice order.
pub fn write_spectrum_csv(path: &Path, sg: &SpectrumGrid, route: &str) -> Result<()> {
    let mut out = String::from("k1,k2,k3,re,im,route,cond\n");
    for flat in 0..sg.data.len() {
        let m = sg.mode_of(flat);
        let kappa = sg.kappa_of(m);
        let v = sg.data[flat];
        let tag = match sg.status[flat] {
            ModeStatus::Sampled => route,
            ModeStatus::DroppedCap => "dropped",
            ModeStatus::DcFilled => "dc-fill",
        };
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.16e},{:.16e},{},{:.6e}\n",
            kappa[0], kappa[1], kappa[2], v.re, v.im, tag, sg.cond[flat]
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
