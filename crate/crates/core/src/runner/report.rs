//! The structured per-run report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvio::Table;
use super::pipeline::Timescales;
use crate::error::{Error, Result};
use crate::spectral::Pole;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSummary {
    pub n_max: usize,
    pub base: Pole,
}

/// Magnitudes of the repairs applied along the way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    /// Largest trace moved onto `|0><0|` in `rho_S`.
    pub max_vacuum_deposit: Option<f64>,
    pub max_hermitian_correction: Option<f64>,
    pub max_trace_correction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub pole: Pole,
    pub ladder: LadderSummary,
    pub timescales: Option<Timescales>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    pub corrections: Corrections,
    /// Pooled width separating slow from fast modes in the preferred state.
    pub preferred_gamma_eff: Option<f64>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn write(&self, out: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(out.join(REPORT_FILE), text + "\n").map_err(|e| Error::Io(format!("{REPORT_FILE}: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Every listed artifact exists and parses with its reader.
    pub fn check_artifacts(&self, out: &Path) -> Result<()> {
        for name in &self.artifacts {
            let path = out.join(name);
            if name.ends_with(".csv") {
                Table::read(&path)?;
            } else if name.ends_with(".json") {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<Timescales>(&text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            } else {
                return Err(Error::Parse(format!("unknown artifact type '{name}'")));
            }
        }
        let back = Self::read(&out.join(REPORT_FILE))?;
        if back.artifacts != self.artifacts {
            return Err(Error::Parse("report on disk lists different artifacts".into()));
        }
        Ok(())
    }
}
