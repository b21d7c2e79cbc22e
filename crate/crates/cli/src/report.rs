//! Output files: every file starts with a provenance comment line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Code version, run-file hash and thread count of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
    pub threads: usize,
}

impl Provenance {
    pub fn new(config_text: &str, threads: usize) -> Self {
        Provenance {
            version: VERSION.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            threads,
        }
    }

    /// Provenance text without the comment marker.
    pub fn tag(&self) -> String {
        format!("loopbie {} config-sha256 {} threads {}", self.version, self.config_sha256, self.threads)
    }

    pub fn comment(&self) -> String {
        format!("# {}\n", self.tag())
    }
}

/// One solve: the deterministic columns of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub frequency_hz: f64,
    /// Bounding-box diagonal in wavelengths.
    pub electrical_size: f64,
    pub vertices: usize,
    /// Unknowns of the solved system.
    pub dof: usize,
    pub iterations: usize,
    pub gram_iterations: usize,
    pub final_residual: f64,
    /// Far-field error against the Mie series.
    pub eps_mie: Option<f64>,
    /// Far-field error against the Loop solve of the same run.
    pub eps_loop: Option<f64>,
    pub wall_time: f64,
}

pub const SUMMARY_HEADER: &str = "label,frequency_hz,electrical_size,vertices,dof,iterations,gram_iterations,final_residual,eps_mie,eps_loop";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Summary table; wall times go to a separate timing table so that reruns
/// reproduce the summary byte for byte.
pub fn emit_summary(rows: &[SummaryRow], prov: &Provenance) -> String {
    let mut s = prov.comment();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{:.6},{:.6},{},{},{},{},{:.6e},{},{}",
            r.label,
            r.frequency_hz,
            r.electrical_size,
            r.vertices,
            r.dof,
            r.iterations,
            r.gram_iterations,
            r.final_residual,
            opt(r.eps_mie),
            opt(r.eps_loop)
        )
        .expect("string write");
    }
    s
}

pub fn emit_timing(rows: &[SummaryRow], prov: &Provenance) -> String {
    let mut s = prov.comment();
    s.push_str("label,wall_time_s\n");
    for r in rows {
        writeln!(s, "{},{:.3}", r.label, r.wall_time).expect("string write");
    }
    s
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let io = |source| CliError::Output { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(&path, contents).map_err(io)?;
    Ok(path)
}
