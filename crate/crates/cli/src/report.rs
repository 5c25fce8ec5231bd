//! Experiment reports and their flat-file renderings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tailcert::verify::{to_csv, EmpiricalTail, RateFit, Verdict};
use tailcert::TailCertificate;

use crate::config::ScenarioConfig;
use crate::error::ScenarioError;

pub const TOOL: &str = "tailcert";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRecord {
    pub digest: String,
    /// Key of the certificate the tail is checked against, if any.
    pub certificate: Option<String>,
    pub tail: EmpiricalTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRecord {
    pub digest: String,
    pub points: usize,
    pub epsilon: f64,
    pub strategy: String,
    pub cardinality_bound: Option<f64>,
    pub max_probe_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

/// Substream layout: replicate `i` of stream `tag` draws from
/// `ChaCha8(seed = splitmix(seed, tag), stream = i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub base: u64,
    pub scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub seeds: SeedRecord,
    pub certificates: BTreeMap<String, TailCertificate>,
    pub tails: BTreeMap<String, TailRecord>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub rate_fits: BTreeMap<String, RateFit>,
    pub nets: BTreeMap<String, NetRecord>,
    /// Scenario statistics; non-finite values serialize as null.
    pub statistics: BTreeMap<String, Value>,
    /// Named pass/fail checks beyond certificate verdicts.
    pub checks: BTreeMap<String, bool>,
    pub plots: Vec<PlotPoint>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(config: ScenarioConfig) -> Self {
        ExperimentReport {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: SeedRecord {
                base: config.seed,
                scheme: "chacha8: key splitmix64(seed, tag), stream = replicate index".into(),
            },
            config,
            certificates: BTreeMap::new(),
            tails: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            rate_fits: BTreeMap::new(),
            nets: BTreeMap::new(),
            statistics: BTreeMap::new(),
            checks: BTreeMap::new(),
            plots: Vec::new(),
            notes: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    /// All verdicts and named checks pass.
    pub fn pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass) && self.checks.values().all(|c| *c)
    }

    pub fn stat(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.statistics.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn stat_f64(&self, key: &str) -> Option<f64> {
        self.statistics.get(key).and_then(Value::as_f64)
    }

    pub fn check(&mut self, key: impl Into<String>, ok: bool) {
        self.checks.insert(key.into(), ok);
    }

    pub fn add_tail(&mut self, key: &str, tail: EmpiricalTail, certificate: Option<&str>) {
        let digest = tailcert_digest(&tail);
        self.tails.insert(key.to_string(), TailRecord { digest, certificate: certificate.map(str::to_string), tail });
    }

    pub fn plot(&mut self, series: &str, x: f64, y: f64) {
        self.plots.push(PlotPoint { series: series.to_string(), x, y });
    }

    /// Digest of everything except wall-clock time and the worker count, so
    /// that runs differing only in parallelism compare equal.
    pub fn content_digest(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock_seconds = 0.0;
        copy.config.workers = None;
        sha256_hex(serde_json::to_string(&copy).expect("report serializes").as_bytes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// One line per verdict and check.
    pub fn summary(&self) -> String {
        let mut out = format!("scenario {} seed {}\n", self.config.scenario, self.config.seed);
        for (k, v) in &self.verdicts {
            out.push_str(&format!(
                "  verdict {k}: {} (worst slack {:.4}, {} probes checked)\n",
                if v.pass { "pass" } else { "FAIL" },
                v.worst_slack,
                v.checked
            ));
        }
        for (k, c) in &self.checks {
            out.push_str(&format!("  check {k}: {}\n", if *c { "pass" } else { "FAIL" }));
        }
        out.push_str(&format!("  overall: {}\n", if self.pass() { "pass" } else { "FAIL" }));
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn tailcert_digest(tail: &EmpiricalTail) -> String {
    sha256_hex(serde_json::to_string(tail).expect("tail serializes").as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    StructuredText,
    Csv,
    PlotData,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structured-text" | "json" => Ok(Format::StructuredText),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::PlotData),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub report_digest: String,
    pub format: String,
    pub files: Vec<String>,
}

/// Rendered files for `format` as `(relative name, contents)`.
pub fn render(report: &ExperimentReport, format: Format) -> Vec<(String, String)> {
    match format {
        Format::StructuredText => vec![("report.json".into(), report.to_json())],
        Format::Csv => report
            .tails
            .iter()
            .map(|(k, rec)| {
                let cert = rec.certificate.as_ref().and_then(|c| report.certificates.get(c));
                (format!("{}.csv", k.replace('/', "_")), to_csv(&rec.tail, cert))
            })
            .collect(),
        Format::PlotData => {
            let mut out = String::from("series\tx\ty\n");
            for p in &report.plots {
                out.push_str(&format!("{}\t{:e}\t{:e}\n", p.series, p.x, p.y));
            }
            vec![("plot.tsv".into(), out)]
        }
    }
}

/// Write `format` under `dir` together with a manifest carrying the report digest.
pub fn emit(report: &ExperimentReport, format: Format, dir: &Path) -> Result<Manifest, ScenarioError> {
    std::fs::create_dir_all(dir)?;
    let files = render(report, format);
    for (name, text) in &files {
        std::fs::write(dir.join(name), text)?;
    }
    let label = match format {
        Format::StructuredText => "structured-text",
        Format::Csv => "csv",
        Format::PlotData => "plotdata",
    };
    let manifest = Manifest {
        report_digest: report.content_digest(),
        format: label.into(),
        files: files.into_iter().map(|(n, _)| n).collect(),
    };
    let path: PathBuf = dir.join(format!("manifest-{label}.json"));
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
