//! The five verbs. Each takes a materialised spec and writes into its output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use enaqt_core::ensemble::{evaluate_given, run_ensemble_with, EnsembleSummary, NetworkResult};
use enaqt_core::fixtures::showcase_network;
use enaqt_core::{generate_network, Network};
use rayon::prelude::*;

use crate::analysis::analysis_tables;
use crate::artifacts::{
    check_output_dir, csv_text, curve_csv, curve_stem, read_records, records_csv, write_file, write_manifest,
    JsonlStore, Manifest, VerifyReport, RECORDS_CSV, RECORDS_JSONL, SPEC_FILE,
};
use crate::config::{parse_config, parse_config_str, to_toml, RunSpec};

/// Name accepted by `sweep --network` for the bundled tabulated network.
pub const SHOWCASE: &str = "showcase";

/// Parses `config` (or takes the defaults) and applies command-line overrides.
pub fn load_spec(config: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> Result<RunSpec> {
    let mut spec = match config {
        Some(path) => parse_config(path)?,
        None => RunSpec::default(),
    };
    if let Some(out) = out {
        spec.outputs.directory = out.to_path_buf();
    }
    if let Some(seed) = seed {
        spec.ensemble.base_seed = seed;
    }
    Ok(spec)
}

fn seeds(spec: &RunSpec) -> Vec<u64> {
    (0..spec.ensemble.n_networks).map(|i| spec.ensemble.seed(i)).collect()
}

fn network_path(root: &Path, index: usize) -> PathBuf {
    root.join("networks").join(format!("net_{index:05}.json"))
}

fn write_curves(root: &Path, spec: &RunSpec, result: &NetworkResult) -> Result<()> {
    let hash = spec.ensemble.hash();
    if spec.format.networks {
        if let Some(net) = &result.network {
            write_file(&network_path(root, result.index), &net.to_json()?)?;
        }
    }
    if !spec.format.curves {
        return Ok(());
    }
    for curve in &result.curves {
        let stem = curve_stem(result.index, &curve.model.label());
        write_file(
            &root.join("curves").join(format!("{stem}.csv")),
            &curve_csv(&hash, curve)?,
        )?;
        if spec.format.curve_json {
            write_file(
                &root.join("curves").join(format!("{stem}.json")),
                &serde_json::to_string(curve)?,
            )?;
        }
    }
    Ok(())
}

fn write_aggregates(root: &Path, spec: &RunSpec, summary: &EnsembleSummary) -> Result<()> {
    let hash = spec.ensemble.hash();
    write_file(&root.join(RECORDS_CSV), &records_csv(&hash, &summary.records)?)?;
    for table in analysis_tables(summary, &spec.analyses)? {
        write_file(&root.join("analysis").join(&table.file), &table.text)?;
    }
    Ok(())
}

pub struct GenerateOutcome {
    pub generated: usize,
    pub failures: Vec<(usize, String)>,
    pub manifest: Manifest,
}

/// Samples the ensemble's networks without sweeping them.
pub fn generate(spec: &RunSpec) -> Result<GenerateOutcome> {
    spec.ensemble.validate()?;
    let root = &spec.outputs.directory;
    let results: Vec<(usize, enaqt_core::Result<Network>)> = (0..spec.ensemble.n_networks)
        .into_par_iter()
        .map(|i| (i, generate_network(&spec.ensemble.network, spec.ensemble.seed(i))))
        .collect();
    let mut failures = Vec::new();
    let mut generated = 0;
    for (i, result) in results {
        match result {
            Ok(net) => {
                write_file(&network_path(root, i), &net.to_json()?)?;
                generated += 1;
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    if !failures.is_empty() {
        let rows: Vec<Vec<String>> = failures.iter().map(|(i, e)| vec![i.to_string(), e.clone()]).collect();
        write_file(
            &root.join("generation_failures.csv"),
            &csv_text(&spec.ensemble.hash(), &["network_index", "error"], &rows)?,
        )?;
    }
    write_file(&root.join(SPEC_FILE), &to_toml(spec))?;
    let manifest = write_manifest(root, "generate", spec, seeds(spec))?;
    Ok(GenerateOutcome {
        generated,
        failures,
        manifest,
    })
}

pub fn load_network(source: &str) -> Result<Network> {
    if source == SHOWCASE {
        return Ok(showcase_network());
    }
    let text = std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    Network::from_json(&text).with_context(|| format!("importing {source}"))
}

pub struct SweepOutcome {
    pub result: NetworkResult,
    pub manifest: Manifest,
}

/// Sweeps one network under every configured environment. The network is
/// read from `network` (a JSON file or `showcase`) or sampled from the
/// spec with its base seed.
pub fn sweep(spec: &RunSpec, network: Option<&str>) -> Result<SweepOutcome> {
    spec.ensemble.validate()?;
    let root = &spec.outputs.directory;
    let seed = spec.ensemble.base_seed;
    let net = match network {
        Some(source) => load_network(source)?,
        None => generate_network(&spec.ensemble.network, seed)?,
    };
    let result = evaluate_given(&spec.ensemble, 0, seed, net);
    let forced = RunSpec {
        format: crate::config::FormatSpec {
            curves: true,
            networks: true,
            ..spec.format
        },
        ..spec.clone()
    };
    write_curves(root, &forced, &result)?;
    write_file(
        &root.join("peaks.csv"),
        &records_csv(&spec.ensemble.hash(), &result.records)?,
    )?;
    write_file(&root.join(SPEC_FILE), &to_toml(spec))?;
    let manifest = write_manifest(root, "sweep", spec, vec![seed])?;
    Ok(SweepOutcome { result, manifest })
}

pub struct EnsembleOutcome {
    pub summary: EnsembleSummary,
    pub computed: usize,
    pub manifest: Manifest,
}

/// Runs (or resumes) the full ensemble and writes every artifact.
pub fn ensemble(spec: &RunSpec, resume: bool) -> Result<EnsembleOutcome> {
    spec.ensemble.validate()?;
    let root = &spec.outputs.directory;
    check_output_dir(root, &spec.ensemble.hash(), resume)?;
    write_file(&root.join(SPEC_FILE), &to_toml(spec))?;
    let mut store = JsonlStore::open(&root.join(RECORDS_JSONL), spec.ensemble.environments.len())?;
    let mut computed = 0;
    let summary = run_ensemble_with(&spec.ensemble, &mut store, |result| {
        computed += 1;
        write_curves(root, spec, result).map_err(|e| enaqt_core::Error::Io(std::io::Error::other(format!("{e:#}"))))
    })?;
    write_aggregates(root, spec, &summary)?;
    let manifest = write_manifest(root, "ensemble", spec, seeds(spec))?;
    Ok(EnsembleOutcome {
        summary,
        computed,
        manifest,
    })
}

/// Recomputes the aggregate tables from the records stored under `root`.
/// A `config` may select different analyses but must describe the same run.
pub fn analyze(root: &Path, config: Option<&Path>) -> Result<EnsembleSummary> {
    let spec_path = root.join(SPEC_FILE);
    let text = std::fs::read_to_string(&spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let mut spec = parse_config_str(&text, &spec_path.display().to_string())?;
    if let Some(path) = config {
        let other = parse_config(path)?;
        if other.ensemble.hash() != spec.ensemble.hash() {
            bail!("{} describes a different run than {}", path.display(), root.display());
        }
        spec.analyses = other.analyses;
    }
    let records = read_records(&root.join(RECORDS_JSONL))?;
    let summary = EnsembleSummary::from_records(spec.ensemble.clone(), records);
    write_aggregates(root, &spec, &summary)?;
    if config.is_some() {
        write_file(&root.join(SPEC_FILE), &to_toml(&spec))?;
    }
    write_manifest(root, "analyze", &spec, seeds(&spec))?;
    Ok(summary)
}

pub fn verify(root: &Path) -> Result<VerifyReport> {
    crate::artifacts::verify(root)
}
