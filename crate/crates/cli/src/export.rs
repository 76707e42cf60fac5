//! CSV and manifest output.
//!
//! Numbers use Rust's shortest round-trip formatting, so files are
//! byte-identical for identical inputs. Lines end in LF.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gmab::analysis::{BoundCurve, BoundKind, OptimalityPartition, BOUNDARY_TOL};
use gmab::simulator::{AggregateResult, ExperimentConfig, LemmaSummary};

pub const RESULTS_CSV: &str = "results.csv";
pub const BOUNDS_CSV: &str = "bounds.csv";
pub const PARTITION_CSV: &str = "partition.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce and audit one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<u64>,
    pub elapsed_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmaSummary>,
    pub files: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes a CSV file and returns its manifest entry.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<OutputFile> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    fs::write(dir.join(name), &bytes)?;
    Ok(OutputFile {
        path: name.to_string(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_JSON), text)
}

/// One row per (checkpoint, statistic): `t, mean, stderr, bound_overlay, kind`.
///
/// Regret is overlaid with the three-regime envelope (or the Bayesian risk
/// envelope under a prior, or the cumulative envelope when neither applies),
/// step regret with the one-step envelope and the suboptimal-pull probability
/// with its capped envelope.
pub fn results_rows(agg: &AggregateResult) -> Vec<Vec<String>> {
    let curve = |kind: BoundKind| agg.bounds.iter().find(|b| b.kind == kind);
    let regret_curve = curve(BoundKind::ThreeRegime)
        .or_else(|| curve(BoundKind::BayesRisk))
        .or_else(|| curve(BoundKind::Cumulative));
    let step_curve = curve(BoundKind::OneStep);
    let prob_curve = curve(BoundKind::SuboptProb);
    let overlay = |c: Option<&BoundCurve>, t: u64| opt_num(c.and_then(|c| c.at(t)));

    let mut rows = Vec::new();
    for s in &agg.checkpoints {
        let t = s.t.to_string();
        rows.push(vec![
            t.clone(),
            num(s.regret_mean),
            num(s.regret_se),
            overlay(regret_curve, s.t),
            "regret".into(),
        ]);
        rows.push(vec![
            t.clone(),
            num(s.step_regret_mean),
            num(s.step_regret_se),
            overlay(step_curve, s.t),
            "step_regret".into(),
        ]);
        rows.push(vec![
            t.clone(),
            num(s.subopt_prob),
            num(s.subopt_prob_se),
            overlay(prob_curve, s.t),
            "subopt_prob".into(),
        ]);
        rows.push(vec![
            t.clone(),
            num(s.subopt_pulls_mean),
            String::new(),
            String::new(),
            "subopt_pulls".into(),
        ]);
        rows.push(vec![
            t,
            opt_num(s.estimate_mean),
            String::new(),
            String::new(),
            "estimate".into(),
        ]);
    }
    rows
}

pub const RESULTS_HEADER: [&str; 5] = ["t", "mean", "stderr", "bound_overlay", "kind"];
pub const BOUNDS_HEADER: [&str; 4] = ["t", "value", "kind", "constants_hash"];
pub const PARTITION_HEADER: [&str; 4] = ["arm", "theta_lo", "theta_hi", "tie"];

pub fn bounds_rows(curves: &[BoundCurve]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in curves {
        let hash = c.constants.hash();
        for &(t, v) in &c.points {
            rows.push(vec![t.to_string(), num(v), c.kind.as_str().into(), hash.clone()]);
        }
    }
    rows
}

/// One row per (segment, optimal arm); boundary points are omitted.
pub fn partition_rows(partition: &OptimalityPartition) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for seg in partition.segments() {
        if seg.hi - seg.lo <= BOUNDARY_TOL {
            continue;
        }
        let tie = seg.arms.len() > 1;
        for &k in &seg.arms {
            rows.push(vec![k.to_string(), num(seg.lo), num(seg.hi), tie.to_string()]);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_plain_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec!["1".to_string(), num(0.00001), num(1234567.5)]];
        let f = write_csv(dir.path(), "x.csv", &["a", "b", "c"], &rows).unwrap();
        let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "a,b,c\n1,0.00001,1234567.5\n");
        assert_eq!(f.sha256, sha256_hex(text.as_bytes()));
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
