//! Run manifests and the CSV artifacts derived from them.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Passed,
    Failed,
    Error,
}

/// Generator coordinates of one replicate; every stream it uses is derived
/// from this pair and a fixed purpose tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSeed {
    pub replicate: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: usize,
    pub monte_carlo: f64,
    /// Exact value as a fraction when known.
    pub exact: String,
    pub exact_value: f64,
    pub rel_err: f64,
    pub std_err: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub name: String,
    pub rows: Vec<MomentRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub name: String,
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

/// A histogram of a spectrum next to a reference density at bin centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRecord {
    pub name: String,
    pub x: Vec<f64>,
    pub empirical: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomScanSummary {
    pub points: usize,
    pub flagged: Vec<f64>,
    pub max_candidate_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub status: RunStatus,
    pub version: String,
    pub config: ScenarioConfig,
    pub seeds: Vec<ReplicateSeed>,
    /// Free-form numeric facts such as the sampler period or grid bounds.
    pub facts: Vec<(String, f64)>,
    pub moment_tables: Vec<MomentTable>,
    pub ks: Vec<KsRecord>,
    pub criteria: Vec<CriterionResult>,
    pub timings: Vec<Timing>,
    pub histograms: Vec<HistogramRecord>,
    pub overlays: Vec<OverlayRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_scan: Option<AtomScanSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ManifestError>,
}

impl RunManifest {
    pub fn new(config: ScenarioConfig) -> Self {
        RunManifest {
            status: RunStatus::Running,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seeds: Vec::new(),
            facts: Vec::new(),
            moment_tables: Vec::new(),
            ks: Vec::new(),
            criteria: Vec::new(),
            timings: Vec::new(),
            histograms: Vec::new(),
            overlays: Vec::new(),
            atom_scan: None,
            error: None,
        }
    }

    /// Process exit code: 0 pass, 1 tolerance failure, 2 validation
    /// failure, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.status) {
            (Some(e), _) => e.code,
            (None, RunStatus::Passed) => 0,
            (None, RunStatus::Failed) => 1,
            (None, _) => 3,
        }
    }

    pub fn passed(&self) -> bool {
        self.exit_code() == 0
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn fact(&self, name: &str) -> Option<f64> {
        self.facts.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Drops wall-clock data, leaving only what a re-run must reproduce.
    pub fn without_timings(&self) -> RunManifest {
        RunManifest { timings: Vec::new(), ..self.clone() }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| RunError::Io(e.to_string()))?;
        // write then rename so a reader never sees a torn manifest
        let tmp = dir.join("manifest.json.tmp");
        fs::write(&tmp, text).map_err(|e| RunError::Io(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<RunManifest, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))
    }
}

/// The CSV views of a manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Histogram,
    DensityOverlay,
    MomentTable,
}

impl PlotKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            PlotKind::Histogram => "histogram",
            PlotKind::DensityOverlay => "density_overlay",
            PlotKind::MomentTable => "moment_table",
        }
    }
}

fn csv_file(dir: &Path, name: &str) -> Result<(PathBuf, fs::File), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    Ok((path, file))
}

/// Writes the first artifact of `kind` from the manifest as CSV in `dir`.
///
/// Columns: `bin_left,bin_right,mass` for histograms;
/// `x,empirical_hist,subordination_density` for overlays;
/// `k,monte_carlo,exact,rel_err,std_err` for moment tables.
pub fn emit_plot_data(manifest: &RunManifest, kind: PlotKind, dir: &Path) -> Result<PathBuf, RunError> {
    let missing = || RunError::NotFound(format!("manifest has no {} artifact", kind.file_stem()));
    let io = |e: std::io::Error| RunError::Io(e.to_string());
    let name = format!("{}.csv", kind.file_stem());
    match kind {
        PlotKind::Histogram => {
            let h = manifest.histograms.first().ok_or_else(missing)?;
            let (path, mut f) = csv_file(dir, &name)?;
            writeln!(f, "bin_left,bin_right,mass").map_err(io)?;
            for (e, d) in h.edges.windows(2).zip(&h.density) {
                writeln!(f, "{},{},{}", e[0], e[1], d * (e[1] - e[0])).map_err(io)?;
            }
            Ok(path)
        }
        PlotKind::DensityOverlay => {
            let o = manifest.overlays.first().ok_or_else(missing)?;
            let (path, mut f) = csv_file(dir, &name)?;
            writeln!(f, "x,empirical_hist,subordination_density").map_err(io)?;
            for ((x, e), d) in o.x.iter().zip(&o.empirical).zip(&o.density) {
                writeln!(f, "{x},{e},{d}").map_err(io)?;
            }
            Ok(path)
        }
        PlotKind::MomentTable => {
            let t = manifest.moment_tables.first().ok_or_else(missing)?;
            let (path, mut f) = csv_file(dir, &name)?;
            writeln!(f, "k,monte_carlo,exact,rel_err,std_err").map_err(io)?;
            for r in &t.rows {
                writeln!(f, "{},{},{},{},{}", r.k, r.monte_carlo, r.exact, r.rel_err, r.std_err).map_err(io)?;
            }
            Ok(path)
        }
    }
}
