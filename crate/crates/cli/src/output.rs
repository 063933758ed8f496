use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use mqslab::{Sample, SweepCurve};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::Failure;

/// One emitted curve, either computed or from a closed form.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub id: String,
    pub family: String,
    pub parameter: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    pub mean_photons: f64,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

impl Table {
    pub fn from_curve(curve: SweepCurve) -> Self {
        let id = curve_id(
            curve.family.name(),
            curve.family.uses_gain(),
            curve.parameter,
            curve.threshold,
        );
        Self {
            id,
            family: curve.family.name().to_string(),
            parameter: curve.parameter,
            threshold: curve.threshold,
            cutoff: Some(curve.cutoff),
            tail_tol: Some(curve.tail_tol),
            mean_photons: curve.mean_photons,
            samples: curve.samples,
        }
    }

    pub fn has_success_prob(&self) -> bool {
        self.samples.iter().any(|s| s.success_prob.is_some())
    }
}

pub fn curve_id(family: &str, gain: bool, parameter: f64, threshold: Option<u32>) -> String {
    let mut id = format!("{family}_{}{parameter}", if gain { "g" } else { "a2-" });
    if let Some(k) = threshold {
        let _ = write!(id, "_k{k}");
    }
    id
}

/// Rounds to 9 significant digits and prints the shortest decimal that
/// reads back to the rounded value.
pub fn fmt_sig(v: f64) -> String {
    round_sig(v).to_string()
}

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.8e}").parse().unwrap()
}

pub fn to_csv(table: &Table) -> String {
    let prob = table.has_success_prob();
    let mut out = String::from(if prob { "x,r,d,success_prob\n" } else { "x,r,d\n" });
    for s in &table.samples {
        let _ = write!(out, "{},{},{}", fmt_sig(s.x), fmt_sig(s.r), fmt_sig(s.value));
        if prob {
            out.push(',');
            out.push_str(&s.success_prob.map(fmt_sig).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Columns {
    x: Vec<f64>,
    r: Vec<f64>,
    d: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_prob: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct JsonCurve<'a> {
    #[serde(flatten)]
    meta: &'a Table,
    columns: Columns,
}

#[derive(Serialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub table: Table,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

/// Deterministic description of a run: configuration, library version and
/// the resolved parameters of every curve.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub curves: Vec<ManifestEntry>,
}

#[derive(Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub curves: Vec<(String, f64)>,
}

fn rounded(v: impl Iterator<Item = f64>) -> Vec<f64> {
    v.map(round_sig).collect()
}

/// Writes the tables in the configured format, plus the manifest and the
/// timing file. Returns the paths written.
pub fn emit(cfg: &RunConfig, out: &Path, tables: &[Table], timing: &Timing) -> Result<Vec<PathBuf>, Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let prefix = format!("{:?}", cfg.command).to_lowercase();
    let mut written = Vec::new();
    let mut entries = Vec::new();

    match cfg.format {
        Format::Csv => {
            for t in tables {
                let name = format!("{prefix}_{}.csv", t.id);
                written.push(write_atomic(&out.join(&name), to_csv(t).as_bytes())?);
                entries.push(entry(t, Some(name)));
            }
            let manifest = Manifest {
                version: mqslab::VERSION,
                config: cfg,
                curves: entries,
            };
            written.push(write_atomic(
                &out.join(format!("{prefix}_manifest.json")),
                &json_bytes(&manifest),
            )?);
        }
        Format::Json => {
            let curves: Vec<JsonCurve> = tables
                .iter()
                .map(|t| JsonCurve {
                    meta: t,
                    columns: Columns {
                        x: rounded(t.samples.iter().map(|s| s.x)),
                        r: rounded(t.samples.iter().map(|s| s.r)),
                        d: rounded(t.samples.iter().map(|s| s.value)),
                        success_prob: t
                            .has_success_prob()
                            .then(|| rounded(t.samples.iter().map(|s| s.success_prob.unwrap_or(f64::NAN)))),
                    },
                })
                .collect();
            entries = tables.iter().map(|t| entry(t, None)).collect();
            let manifest = Manifest {
                version: mqslab::VERSION,
                config: cfg,
                curves: entries,
            };
            let doc = serde_json::json!({ "manifest": manifest, "curves": curves });
            written.push(write_atomic(&out.join(format!("{prefix}.json")), &json_bytes(&doc))?);
        }
    }
    written.push(write_atomic(
        &out.join(format!("{prefix}_timing.json")),
        &json_bytes(timing),
    )?);
    Ok(written)
}

fn entry(t: &Table, file: Option<String>) -> ManifestEntry {
    ManifestEntry {
        table: Table {
            samples: Vec::new(),
            ..t.clone()
        },
        points: t.samples.len(),
        file,
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

/// Writes to a sibling temporary file and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<PathBuf, Failure> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::io(path, e));
    }
    Ok(path.to_path_buf())
}
