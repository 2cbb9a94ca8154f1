//! Files on disk: curves, records, the resumable record store and the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use enaqt_core::ensemble::{NetworkResult, RecordStore};
use enaqt_core::{EfficiencyCurve, EnsembleRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunSpec;

pub const MANIFEST: &str = "manifest.json";
pub const SPEC_FILE: &str = "spec.toml";
pub const RECORDS_JSONL: &str = "state/records.jsonl";
pub const RECORDS_CSV: &str = "records.csv";

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn hash_line(spec_hash: &str) -> String {
    format!("# spec_hash={spec_hash}\n")
}

/// CSV text with the spec-hash comment line in front.
pub fn csv_text(spec_hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = String::from_utf8(w.into_inner().context("flushing csv")?)?;
    Ok(hash_line(spec_hash) + &body)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn curve_stem(network_index: usize, label: &str) -> String {
    format!("net_{network_index:05}__{label}")
}

pub fn curve_csv(spec_hash: &str, curve: &EfficiencyCurve) -> Result<String> {
    let levels = curve.populations.iter().flatten().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = vec!["gamma".into(), "eta".into(), "valid".into()];
    header.extend((0..levels).map(|k| format!("pop_{k}")));
    let rows: Vec<Vec<String>> = (0..curve.len())
        .map(|k| {
            let mut row = vec![
                fmt_f64(curve.gammas[k]),
                fmt_opt(curve.etas[k]),
                u8::from(curve.valid[k]).to_string(),
            ];
            match &curve.populations[k] {
                Some(p) => row.extend(p.iter().map(|&x| fmt_f64(x))),
                None => row.extend(std::iter::repeat(String::new()).take(levels)),
            }
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(spec_hash, &header, &rows)
}

pub const RECORD_HEADER: [&str; 16] = [
    "network_index",
    "seed",
    "environment",
    "class",
    "error",
    "valid_points",
    "peak_count",
    "peak_gammas",
    "peak_etas",
    "eta_low",
    "eta_high",
    "ratio",
    "eta_max",
    "gap_relative_std",
    "inj_ext_difference",
    "double_peaked_anywhere",
];

pub fn records_csv(spec_hash: &str, records: &[EnsembleRecord]) -> Result<String> {
    let anywhere: BTreeSet<usize> = records
        .iter()
        .filter(|r| r.is_multi())
        .map(|r| r.network_index)
        .collect();
    let join = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";");
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.network_index.to_string(),
                r.seed.to_string(),
                r.environment.clone(),
                serde_json::to_value(r.class())
                    .expect("class")
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                r.error.clone().unwrap_or_default(),
                r.valid_points.to_string(),
                r.peak_count.to_string(),
                join(&r.peak_gammas),
                join(&r.peak_etas),
                fmt_opt(r.eta_low),
                fmt_opt(r.eta_high),
                fmt_opt(r.ratio()),
                fmt_opt(r.eta_max),
                fmt_opt(r.gap_relative_std),
                r.inj_ext_difference.map(|d| d.to_string()).unwrap_or_default(),
                u8::from(anywhere.contains(&r.network_index)).to_string(),
            ]
        })
        .collect();
    csv_text(spec_hash, &RECORD_HEADER, &rows)
}

/// Append-only JSON-lines record store; one line per record, committed a
/// network at a time so an interrupted run resumes at network granularity.
pub struct JsonlStore {
    path: PathBuf,
    per_network: usize,
    records: BTreeMap<usize, Vec<EnsembleRecord>>,
}

impl JsonlStore {
    /// Loads any complete networks already in `path`; a torn trailing write
    /// is discarded and the file rewritten without it.
    pub fn open(path: &Path, per_network: usize) -> Result<Self> {
        let mut records: BTreeMap<usize, Vec<EnsembleRecord>> = BTreeMap::new();
        if path.exists() {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            for line in BufReader::new(file).lines() {
                let line = line?;
                match serde_json::from_str::<EnsembleRecord>(&line) {
                    Ok(r) => records.entry(r.network_index).or_default().push(r),
                    Err(e) => log::warn!("dropping unreadable record line in {}: {e}", path.display()),
                }
            }
        }
        records.retain(|_, v| v.len() == per_network);
        let store = Self {
            path: path.to_path_buf(),
            per_network,
            records,
        };
        store.rewrite()?;
        Ok(store)
    }

    fn rewrite(&self) -> Result<()> {
        let mut text = String::new();
        for r in self.records.values().flatten() {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        write_file(&self.path, &text)
    }
}

impl RecordStore for JsonlStore {
    fn completed(&self) -> BTreeSet<usize> {
        self.records.keys().copied().collect()
    }

    fn commit(&mut self, result: &NetworkResult) -> enaqt_core::Result<()> {
        debug_assert_eq!(result.records.len(), self.per_network);
        let mut text = String::new();
        for r in &result.records {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        let mut f = OpenOptions::new().append(true).create(true).open(&self.path)?;
        f.write_all(text.as_bytes())?;
        f.flush()?;
        self.records.insert(result.index, result.records.clone());
        Ok(())
    }

    fn records(&self) -> Vec<EnsembleRecord> {
        self.records.values().flatten().cloned().collect()
    }
}

pub fn read_records(path: &Path) -> Result<Vec<EnsembleRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(&line?).with_context(|| format!("{}:{}: bad record", path.display(), i + 1))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub spec_hash: String,
    pub spec: RunSpec,
    pub versions: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("enaqt-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("enaqt-core".to_string(), enaqt_core::VERSION.to_string()),
    ])
}

fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

fn list_files(root: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root)?.to_string_lossy().replace('\\', "/");
                if rel != MANIFEST {
                    out.push(rel);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Hashes every file under `root` and writes the manifest.
pub fn write_manifest(root: &Path, command: &str, spec: &RunSpec, seeds: Vec<u64>) -> Result<Manifest> {
    let files = list_files(root)?
        .into_iter()
        .map(|rel| {
            let (sha256, bytes) = sha256_file(&root.join(&rel))?;
            Ok(FileEntry {
                path: rel,
                sha256,
                bytes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        command: command.into(),
        spec_hash: spec.ensemble.hash(),
        spec: spec.clone(),
        versions: versions(),
        seeds,
        files,
    };
    write_file(&root.join(MANIFEST), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(manifest)
}

pub fn read_manifest(root: &Path) -> Result<Manifest> {
    let path = root.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub missing: Vec<String>,
    pub modified: Vec<String>,
    pub unlisted: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.missing.is_empty() && self.modified.is_empty() && self.unlisted.is_empty()
    }
}

pub fn verify(root: &Path) -> Result<VerifyReport> {
    let manifest = read_manifest(root)?;
    let mut report = VerifyReport::default();
    let listed: BTreeSet<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    for entry in &manifest.files {
        let path = root.join(&entry.path);
        if !path.exists() {
            report.missing.push(entry.path.clone());
            continue;
        }
        let (sha, bytes) = sha256_file(&path)?;
        if sha != entry.sha256 || bytes != entry.bytes {
            report.modified.push(entry.path.clone());
        }
        report.checked += 1;
    }
    report.unlisted = list_files(root)?
        .into_iter()
        .filter(|f| !listed.contains(f.as_str()))
        .collect();
    Ok(report)
}

/// Refuses to mix runs: an output directory belongs to one spec hash.
pub fn check_output_dir(root: &Path, spec_hash: &str, resume: bool) -> Result<()> {
    let spec_path = root.join(SPEC_FILE);
    if !spec_path.exists() {
        if root.exists() && fs::read_dir(root)?.next().is_some() {
            bail!("{} is not empty; choose a fresh directory", root.display());
        }
        return Ok(());
    }
    let text = fs::read_to_string(&spec_path)?;
    let existing = crate::config::parse_config_str(&text, &spec_path.display().to_string())?;
    let existing_hash = existing.ensemble.hash();
    if existing_hash != spec_hash {
        bail!(
            "{} holds a run with spec hash {existing_hash}, not {spec_hash}",
            root.display()
        );
    }
    if !resume {
        bail!(
            "{} already holds this run; pass --resume to continue it",
            root.display()
        );
    }
    Ok(())
}
