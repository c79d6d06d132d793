use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::sweep::Skipped;
use super::{ExperimentConfig, Family, Status, VerificationRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 16] = [
    "domain_id",
    "family",
    "n_vertices",
    "area",
    "perimeter",
    "inradius",
    "sigma1",
    "sigma1_budget",
    "alpha",
    "tau_alpha",
    "tau_alpha_budget",
    "tau_ball",
    "tau_dirichlet",
    "lemma_margin",
    "theorem_margin",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// From the file extension, if it names a format.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub mesh_h: f64,
    pub levels: usize,
    pub config: ExperimentConfig,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

impl RunMetadata {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            mesh_h: config.mesh_h,
            levels: config.levels,
            config: config.clone(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub metadata: RunMetadata,
    pub records: Vec<VerificationRecord>,
    #[serde(default)]
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub domain_id: String,
    pub family: Family,
    pub n_vertices: usize,
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub sigma1: f64,
    pub sigma1_budget: f64,
    pub alpha: f64,
    pub tau_alpha: f64,
    pub tau_alpha_budget: f64,
    pub tau_ball: f64,
    pub tau_dirichlet: f64,
    pub lemma_margin: f64,
    pub theorem_margin: f64,
    pub status: Status,
}

impl From<&VerificationRecord> for CsvRow {
    fn from(r: &VerificationRecord) -> Self {
        CsvRow {
            domain_id: r.domain_id.clone(),
            family: r.family,
            n_vertices: r.n_vertices,
            area: r.area,
            perimeter: r.perimeter,
            inradius: r.inradius,
            sigma1: r.sigma1,
            sigma1_budget: r.sigma1_budget,
            alpha: r.alpha,
            tau_alpha: r.tau_alpha,
            tau_alpha_budget: r.tau_alpha_budget,
            tau_ball: r.tau_ball,
            tau_dirichlet: r.tau_dirichlet,
            lemma_margin: r.lemma_margin,
            theorem_margin: r.theorem_margin,
            status: r.status,
        }
    }
}

/// Writes `records` to `path`. Nothing is created for an empty list.
pub fn emit_report(
    records: &[VerificationRecord],
    skipped: &[Skipped],
    metadata: &RunMetadata,
    format: ReportFormat,
    path: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to report".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            let report = JsonReport {
                metadata: metadata.clone(),
                records: records.to_vec(),
                skipped: skipped.to_vec(),
            };
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in records {
                w.serialize(CsvRow::from(r))
                    .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json_report(path: &Path) -> Result<JsonReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_csv_rows(path: &Path) -> Result<Vec<CsvRow>> {
    let parse = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| parse(e.to_string()))?;
    let header = r.headers().map_err(|e| parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(parse(format!("unexpected header {header:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| parse(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Normalization;

    fn record(id: &str, alpha: f64) -> VerificationRecord {
        VerificationRecord {
            domain_id: id.into(),
            family: Family::RandomConvex,
            n_vertices: 7,
            area: 1.0 / 3.0,
            perimeter: 2.0_f64.sqrt(),
            inradius: 0.1,
            sigma1: 1.2345678901234567,
            sigma1_budget: 1e-5,
            alpha_fraction: 0.5,
            alpha,
            tau_alpha: -0.7,
            tau_alpha_budget: 3e-4,
            tau_ball: -0.75,
            tau_dirichlet: 0.1,
            tau_dirichlet_budget: 1e-4,
            lemma_margin: 0.01,
            lemma_budget: 1e-3,
            lemma_status: Status::Pass,
            theorem_margin: 0.05,
            theorem_budget: 3e-4,
            theorem_status: Status::Pass,
            flagged: false,
            status: Status::Pass,
        }
    }

    fn meta() -> RunMetadata {
        RunMetadata::new(&ExperimentConfig::new(
            Family::RandomConvex,
            2,
            9,
            Normalization::Area(1.0),
        ))
    }

    #[test]
    fn empty_list_creates_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        assert!(emit_report(&[], &[], &meta(), ReportFormat::Csv, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let recs = vec![record("a", -0.3), record("b", -0.1)];
        let m = meta();
        emit_report(&recs, &[], &m, ReportFormat::Json, &path).unwrap();
        let back = read_json_report(&path).unwrap();
        assert_eq!(back.records, recs);
        assert_eq!(back.metadata, m);
    }

    #[test]
    fn csv_rows_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = vec![record("a", -0.3), record("b", -0.1), record("c", -0.2)];
        emit_report(&recs, &[], &meta(), ReportFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), recs.len() + 1);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let rows = read_csv_rows(&path).unwrap();
        assert_eq!(rows, recs.iter().map(CsvRow::from).collect::<Vec<_>>());
    }

    #[test]
    fn unwritable_path_is_echoed() {
        let err = emit_report(
            &[record("a", -0.1)],
            &[],
            &meta(),
            ReportFormat::Json,
            Path::new("/nonexistent-dir/x/r.json"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/r.json"), "{err}");
    }

    #[test]
    fn format_names() {
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!(ReportFormat::from_path(Path::new("a/b.json")), Some(ReportFormat::Json));
        assert_eq!(ReportFormat::from_path(Path::new("a/b.txt")), None);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
