//! File formats: joint matrices (CSV / JSON), sample sets (CSV), sweep
//! tables (CSV, loss-free round-trip) and run manifests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lagrangian::UFamily;
use crate::prob::{JointDistribution, ProbError, ValidatedJoint};
use crate::solver::SolveResult;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Serialize, Deserialize)]
struct JointJson {
    pxy: Vec<Vec<f64>>,
}

/// Loads and validates a joint from CSV (numeric matrix, rows = x) or JSON
/// (`{"pxy": [[...]]}`), chosen by extension.
pub fn load_joint(path: &Path) -> Result<ValidatedJoint, IoError> {
    let raw = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str::<JointJson>(&text)?.pxy
    } else {
        read_numeric_csv(path)?
    };
    Ok(JointDistribution::validate(&raw)?)
}

fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row: Result<Vec<f64>, _> = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| IoError::Parse(format!("not a number: `{f}`")))
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(IoError::Parse("empty file".into()));
    }
    Ok(rows)
}

pub fn save_joint_csv(path: &Path, j: &JointDistribution) -> Result<(), IoError> {
    let mut out = String::new();
    for row in j.matrix() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a sample set: one row per sample, d columns of means.
pub fn load_samples(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    read_numeric_csv(path)
}

/// One emitted sweep row; the CSV schema is fixed for downstream plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: UFamily,
    pub beta_u: f64,
    pub i_xt_bits: f64,
    pub i_ty_bits: f64,
    pub objective: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub support_t: usize,
}

impl SweepRow {
    pub fn from_result(family: &UFamily, r: &SolveResult) -> Self {
        SweepRow {
            family: *family,
            beta_u: r.beta_u,
            i_xt_bits: r.i_xt_bits,
            i_ty_bits: r.i_ty_bits,
            objective: r.objective,
            outer_iters: r.outer_iterations,
            converged: r.converged,
            support_t: r.support_t,
        }
    }
}

pub const SWEEP_HEADER: &str =
    "family,param1,param2,beta_u,i_xt_bits,i_ty_bits,objective,outer_iters,converged,support_t";

fn family_columns(f: &UFamily) -> (&'static str, String, String) {
    match *f {
        UFamily::Identity => ("identity", String::new(), String::new()),
        UFamily::Power { alpha } => ("pow", format!("{alpha}"), String::new()),
        UFamily::Exponential { eta } => ("exp", format!("{eta}"), String::new()),
        UFamily::ShiftedExponential { eta, r_star } => {
            ("shexp", format!("{eta}"), format!("{r_star}"))
        }
    }
}

fn family_from_columns(name: &str, p1: &str, p2: &str) -> Result<UFamily, IoError> {
    let spec = match name {
        "identity" => "identity".to_string(),
        "shexp" => format!("{name}:{p1}:{p2}"),
        _ => format!("{name}:{p1}"),
    };
    spec.parse::<UFamily>()
        .map_err(|e| IoError::Parse(e.to_string()))
}

/// Writes the sweep table; all floats use shortest round-trip decimals.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), IoError> {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let (name, p1, p2) = family_columns(&r.family);
        out.push_str(&format!(
            "{name},{p1},{p2},{},{},{},{},{},{},{}\n",
            r.beta_u,
            r.i_xt_bits,
            r.i_ty_bits,
            r.objective,
            r.outer_iters,
            r.converged,
            r.support_t
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let parse_f = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| IoError::Parse(format!("not a number: `{s}`")))
    };
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record?;
        if r.len() != 10 {
            return Err(IoError::Parse(format!("expected 10 columns, got {}", r.len())));
        }
        rows.push(SweepRow {
            family: family_from_columns(&r[0], &r[1], &r[2])?,
            beta_u: parse_f(&r[3])?,
            i_xt_bits: parse_f(&r[4])?,
            i_ty_bits: parse_f(&r[5])?,
            objective: parse_f(&r[6])?,
            outer_iters: r[7]
                .parse()
                .map_err(|_| IoError::Parse(format!("not an integer: `{}`", &r[7])))?,
            converged: r[8]
                .parse()
                .map_err(|_| IoError::Parse(format!("not a bool: `{}`", &r[8])))?,
            support_t: r[9]
                .parse()
                .map_err(|_| IoError::Parse(format!("not an integer: `{}`", &r[9])))?,
        });
    }
    Ok(rows)
}

/// Provenance record accompanying every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: 0,
        }
    }

    /// Sidecar path: `<out>.manifest.json`.
    pub fn sidecar_path(out: &Path) -> std::path::PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write_sidecar(&self, out: &Path) -> Result<(), IoError> {
        let path = Self::sidecar_path(out);
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn joint_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("j.csv");
        let j = JointDistribution::identity(3);
        save_joint_csv(&path, &j).unwrap();
        let loaded = load_joint(&path).unwrap();
        assert_eq!(loaded.joint.matrix(), j.matrix());
    }

    #[test]
    fn joint_json_load() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("j.json");
        std::fs::write(&path, r#"{"pxy": [[0.5, 0.0], [0.0, 0.5]]}"#).unwrap();
        let loaded = load_joint(&path).unwrap();
        assert_eq!(loaded.joint.nx(), 2);
        assert_eq!(loaded.joint.p(0, 0), 0.5);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let rows = vec![
            SweepRow {
                family: UFamily::Power { alpha: 1.0 },
                beta_u: 0.3333333333333333,
                i_xt_bits: 1.5000000000000002,
                i_ty_bits: 1.5,
                objective: 0.75,
                outer_iters: 12,
                converged: true,
                support_t: 3,
            },
            SweepRow {
                family: UFamily::ShiftedExponential {
                    eta: 200.0,
                    r_star: 2.0,
                },
                beta_u: 1.0,
                i_xt_bits: 1.9735,
                i_ty_bits: 1.97,
                objective: 0.9,
                outer_iters: 40,
                converged: false,
                support_t: 4,
            },
        ];
        write_sweep_csv(&path, &rows).unwrap();
        let back = read_sweep_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn manifest_sidecar_path() {
        let p = RunManifest::sidecar_path(Path::new("/tmp/out/sweep.csv"));
        assert_eq!(p, Path::new("/tmp/out/sweep.csv.manifest.json"));
    }
}
