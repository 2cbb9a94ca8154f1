//! Network ensembles: sweeping every (network, environment) pair and the
//! aggregate statistics over the resulting peak reports.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, dominant_eigenindex, eigen_gap_relative_std, eigendecompose};
use crate::network::{generate_network, Network, NetworkConfig, EXTRACTION, INJECTION};
use crate::stats::{interquartile_range, mean, median, Histogram};
use crate::sweep::{
    find_peaks, peaks_below_reorg_cutoff, sweep_efficiency, EfficiencyCurve, NoiseModel, SweepConfig, TransportConfig,
    REORGANISATION_CUTOFF,
};

pub const DEFAULT_GAP_BINS: usize = 30;
/// log₂-ratio bins of unit width covering [−8, 8].
pub const RATIO_LOG2_HALF_RANGE: i32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub network: NetworkConfig,
    pub n_networks: usize,
    pub environments: Vec<NoiseModel>,
    pub sweep: SweepConfig,
    pub transport: TransportConfig,
    pub base_seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            n_networks: 1000,
            environments: default_environments(),
            sweep: SweepConfig::default(),
            transport: TransportConfig::default(),
            base_seed: 0,
        }
    }
}

/// Pure dephasing plus Drude-Lorentz baths at 30, 180, 300 K peaked at 0.01, 0.1, 1 eV.
pub fn default_environments() -> Vec<NoiseModel> {
    let mut envs = vec![NoiseModel::Lindblad];
    for kelvin in [30.0, 180.0, 300.0] {
        for peak in [0.01, 0.1, 1.0] {
            envs.push(NoiseModel::drude_lorentz(kelvin, peak));
        }
    }
    envs
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.sweep.validate()?;
        if self.n_networks == 0 {
            return Err(Error::invalid("n_networks", "must be at least 1"));
        }
        if self.environments.is_empty() {
            return Err(Error::invalid("environments", "need at least one environment"));
        }
        let mut labels = BTreeSet::new();
        for env in &self.environments {
            env.validate()?;
            if !labels.insert(env.label()) {
                return Err(Error::invalid(
                    "environments",
                    format!("duplicate environment {}", env.label()),
                ));
            }
        }
        if !(self.transport.gamma_inj >= 0.0 && self.transport.gamma_ext >= 0.0) {
            return Err(Error::invalid("transport", "rates must be non-negative"));
        }
        Ok(())
    }

    pub fn seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serialises");
        hex::encode(Sha256::digest(&json))
    }

    pub fn labels(&self) -> Vec<String> {
        self.environments.iter().map(NoiseModel::label).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakClass {
    Zero,
    Single,
    Multi,
    Failed,
}

/// One (network, environment) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub network_index: usize,
    pub seed: u64,
    pub environment: String,
    /// Set when the network or its sweep could not be computed.
    pub error: Option<String>,
    pub valid_points: usize,
    pub peak_count: usize,
    pub peak_gammas: Vec<f64>,
    pub peak_etas: Vec<f64>,
    pub eta_low: Option<f64>,
    pub eta_high: Option<f64>,
    pub eta_max: Option<f64>,
    pub gap_relative_std: Option<f64>,
    /// Dominant eigenstate index on the injection site minus that on the extraction site.
    pub inj_ext_difference: Option<i64>,
}

impl EnsembleRecord {
    pub fn class(&self) -> PeakClass {
        if self.error.is_some() || self.valid_points == 0 {
            PeakClass::Failed
        } else {
            match self.peak_count {
                0 => PeakClass::Zero,
                1 => PeakClass::Single,
                _ => PeakClass::Multi,
            }
        }
    }

    pub fn is_multi(&self) -> bool {
        self.class() == PeakClass::Multi
    }

    pub fn ratio(&self) -> Option<f64> {
        match (self.eta_low, self.eta_high) {
            (Some(l), Some(h)) if self.peak_count >= 2 => Some(l / h),
            _ => None,
        }
    }
}

/// Everything computed for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkResult {
    pub index: usize,
    pub network: Option<Network>,
    pub curves: Vec<EfficiencyCurve>,
    pub records: Vec<EnsembleRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Diagnostics {
    gap_relative_std: Option<f64>,
    inj_ext_difference: Option<i64>,
}

fn diagnostics(network: &Network) -> Diagnostics {
    let Ok(h) = build_hamiltonian(network) else {
        return Diagnostics {
            gap_relative_std: None,
            inj_ext_difference: None,
        };
    };
    let es = eigendecompose(&h);
    let inj = dominant_eigenindex(&es, INJECTION).ok();
    let ext = dominant_eigenindex(&es, EXTRACTION).ok();
    Diagnostics {
        gap_relative_std: eigen_gap_relative_std(&es).ok(),
        inj_ext_difference: inj.zip(ext).map(|(i, e)| i as i64 - e as i64),
    }
}

fn failed_record(
    index: usize,
    seed: u64,
    environment: String,
    error: String,
    diag: Option<Diagnostics>,
) -> EnsembleRecord {
    EnsembleRecord {
        network_index: index,
        seed,
        environment,
        error: Some(error),
        valid_points: 0,
        peak_count: 0,
        peak_gammas: Vec::new(),
        peak_etas: Vec::new(),
        eta_low: None,
        eta_high: None,
        eta_max: None,
        gap_relative_std: diag.and_then(|d| d.gap_relative_std),
        inj_ext_difference: diag.and_then(|d| d.inj_ext_difference),
    }
}

/// Sweeps one network of the ensemble under every environment.
pub fn evaluate_network(spec: &EnsembleSpec, index: usize) -> NetworkResult {
    let seed = spec.seed(index);
    let network = match generate_network(&spec.network, seed) {
        Ok(n) => n,
        Err(e) => {
            let records = spec
                .labels()
                .into_iter()
                .map(|label| failed_record(index, seed, label, e.to_string(), None))
                .collect();
            return NetworkResult {
                index,
                network: None,
                curves: Vec::new(),
                records,
            };
        }
    };
    evaluate_given(spec, index, seed, network)
}

/// Sweeps an explicit network under every environment of `spec`.
pub fn evaluate_given(spec: &EnsembleSpec, index: usize, seed: u64, network: Network) -> NetworkResult {
    let diag = diagnostics(&network);
    let mut curves = Vec::with_capacity(spec.environments.len());
    let mut records = Vec::with_capacity(spec.environments.len());
    for model in &spec.environments {
        match sweep_efficiency(&network, model, &spec.sweep, &spec.transport) {
            Ok(curve) => {
                let report = find_peaks(&curve);
                records.push(EnsembleRecord {
                    network_index: index,
                    seed,
                    environment: model.label(),
                    error: None,
                    valid_points: curve.valid_count(),
                    peak_count: report.count,
                    peak_gammas: report.peak_gammas,
                    peak_etas: report.peak_etas,
                    eta_low: report.eta_low,
                    eta_high: report.eta_high,
                    eta_max: curve.eta_max(),
                    gap_relative_std: diag.gap_relative_std,
                    inj_ext_difference: diag.inj_ext_difference,
                });
                curves.push(curve);
            }
            Err(e) => records.push(failed_record(index, seed, model.label(), e.to_string(), Some(diag))),
        }
    }
    NetworkResult {
        index,
        network: Some(network),
        curves,
        records,
    }
}

/// Persistence hook that lets an interrupted run resume.
pub trait RecordStore {
    /// Network indices already stored.
    fn completed(&self) -> BTreeSet<usize>;
    fn commit(&mut self, result: &NetworkResult) -> Result<()>;
    fn records(&self) -> Vec<EnsembleRecord>;
}

#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    records: BTreeMap<usize, Vec<EnsembleRecord>>,
}

impl RecordStore for MemoryStore {
    fn completed(&self) -> BTreeSet<usize> {
        self.records.keys().copied().collect()
    }

    fn commit(&mut self, result: &NetworkResult) -> Result<()> {
        self.records.insert(result.index, result.records.clone());
        Ok(())
    }

    fn records(&self) -> Vec<EnsembleRecord> {
        self.records.values().flatten().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub spec: EnsembleSpec,
    /// Sorted by network index, then environment order of the spec.
    pub records: Vec<EnsembleRecord>,
}

impl EnsembleSummary {
    pub fn from_records(spec: EnsembleSpec, mut records: Vec<EnsembleRecord>) -> Self {
        let order: BTreeMap<String, usize> = spec.labels().into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        records.sort_by_key(|r| {
            (
                r.network_index,
                order.get(&r.environment).copied().unwrap_or(usize::MAX),
            )
        });
        Self { spec, records }
    }

    pub fn for_environment<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a EnsembleRecord> + 'a {
        self.records.iter().filter(move |r| r.environment == label)
    }
}

/// Networks evaluated per commit, bounding the work lost on interruption.
pub const COMMIT_CHUNK: usize = 32;

/// Evaluates every network not already in `store`, committing in index order.
/// `on_result` sees each network's full output (curves included) before commit.
pub fn run_ensemble_with<S, F>(spec: &EnsembleSpec, store: &mut S, mut on_result: F) -> Result<EnsembleSummary>
where
    S: RecordStore + ?Sized,
    F: FnMut(&NetworkResult) -> Result<()>,
{
    spec.validate()?;
    let done = store.completed();
    let pending: Vec<usize> = (0..spec.n_networks).filter(|i| !done.contains(i)).collect();
    for chunk in pending.chunks(COMMIT_CHUNK) {
        let results: Vec<NetworkResult> = chunk.par_iter().map(|&i| evaluate_network(spec, i)).collect();
        for result in &results {
            on_result(result)?;
            store.commit(result)?;
        }
        log::info!("{} of {} networks complete", store.completed().len(), spec.n_networks);
    }
    let records = store
        .records()
        .into_iter()
        .filter(|r| r.network_index < spec.n_networks)
        .collect();
    Ok(EnsembleSummary::from_records(spec.clone(), records))
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleSummary> {
    run_ensemble_with(spec, &mut MemoryStore::default(), |_| Ok(()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub zero: usize,
    pub single: usize,
    pub multi: usize,
    pub failed: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.zero + self.single + self.multi + self.failed
    }

    pub fn valid(&self) -> usize {
        self.zero + self.single + self.multi
    }
}

pub fn class_counts<'a>(records: impl IntoIterator<Item = &'a EnsembleRecord>) -> ClassCounts {
    let mut c = ClassCounts::default();
    for r in records {
        match r.class() {
            PeakClass::Zero => c.zero += 1,
            PeakClass::Single => c.single += 1,
            PeakClass::Multi => c.multi += 1,
            PeakClass::Failed => c.failed += 1,
        }
    }
    c
}

/// Fraction of validly swept networks with two or more peaks.
pub fn double_peak_fraction<'a>(records: impl IntoIterator<Item = &'a EnsembleRecord>) -> Result<f64> {
    let c = class_counts(records);
    if c.valid() == 0 {
        return Err(Error::UndefinedStatistic("no validly swept networks"));
    }
    Ok(c.multi as f64 / c.valid() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassHistograms {
    pub single: Option<Histogram>,
    pub multi: Option<Histogram>,
    pub warnings: Vec<String>,
}

/// Single- and multi-peaked class histograms over shared edges. Classes with
/// fewer than two values are omitted with a warning.
fn class_histograms(single: &[f64], multi: &[f64], edges: Vec<f64>, what: &str) -> Result<ClassHistograms> {
    let mut warnings = Vec::new();
    let mut build = |values: &[f64], class: &str| -> Result<Option<Histogram>> {
        if values.len() < 2 {
            let msg = format!("{what}: {class}-peaked class has {} record(s); omitted", values.len());
            log::warn!("{msg}");
            warnings.push(msg);
            return Ok(None);
        }
        Histogram::with_edges(values, edges.clone()).map(Some)
    };
    let single = build(single, "single")?;
    let multi = build(multi, "multi")?;
    Ok(ClassHistograms {
        single,
        multi,
        warnings,
    })
}

fn split_by_class<'a, F>(records: impl IntoIterator<Item = &'a EnsembleRecord>, value: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&EnsembleRecord) -> Option<f64>,
{
    let mut single = Vec::new();
    let mut multi = Vec::new();
    for r in records {
        let Some(v) = value(r) else { continue };
        match r.class() {
            PeakClass::Single => single.push(v),
            PeakClass::Multi => multi.push(v),
            _ => {}
        }
    }
    (single, multi)
}

/// Relative spread of eigenvalue gaps, split into single/multi-peaked classes.
pub fn gap_disorder_histogram<'a>(
    records: impl IntoIterator<Item = &'a EnsembleRecord>,
    bins: usize,
) -> Result<ClassHistograms> {
    let (single, multi) = split_by_class(records, |r| r.gap_relative_std);
    let all: Vec<f64> = single.iter().chain(&multi).copied().collect();
    let edges = Histogram::uniform(&all, bins)?.edges;
    class_histograms(&single, &multi, edges, "gap disorder")
}

/// Integer-binned λ_inj − λ_ext per class, over [−(N−1), N−1].
pub fn injection_extraction_histogram<'a>(
    records: impl IntoIterator<Item = &'a EnsembleRecord>,
    n_sites: usize,
) -> Result<ClassHistograms> {
    let (single, multi) = split_by_class(records, |r| r.inj_ext_difference.map(|d| d as f64));
    let reach = n_sites.saturating_sub(1) as f64;
    let edges: Vec<f64> = (0..=2 * n_sites.saturating_sub(1) + 1)
        .map(|k| -reach - 0.5 + k as f64)
        .collect();
    class_histograms(&single, &multi, edges, "injection-extraction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    /// Histogram over log₂(η_low/η_high).
    pub log2_histogram: Histogram,
    /// Fraction with 0.5 < ratio < 2.
    pub central_fraction: f64,
    pub median_ratio: f64,
    pub count: usize,
}

pub fn peak_ratio_histogram(ratios: &[f64]) -> Result<RatioSummary> {
    if ratios.is_empty() {
        return Err(Error::UndefinedStatistic("no multi-peaked records"));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("ratio", "peak ratios must be positive and finite"));
    }
    let logs: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    let edges = (-RATIO_LOG2_HALF_RANGE..=RATIO_LOG2_HALF_RANGE)
        .map(f64::from)
        .collect();
    let central = ratios.iter().filter(|&&r| r > 0.5 && r < 2.0).count();
    Ok(RatioSummary {
        log2_histogram: Histogram::with_edges(&logs, edges)?,
        central_fraction: central as f64 / ratios.len() as f64,
        median_ratio: median(ratios)?,
        count: ratios.len(),
    })
}

/// η_low/η_high of every multi-peaked record.
pub fn peak_ratios<'a>(records: impl IntoIterator<Item = &'a EnsembleRecord>) -> Vec<f64> {
    records
        .into_iter()
        .filter(|r| r.is_multi())
        .filter_map(EnsembleRecord::ratio)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEfficiency {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub interquartile_range: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyComparison {
    pub single: Option<ClassEfficiency>,
    pub multi: Option<ClassEfficiency>,
    pub histograms: ClassHistograms,
}

fn class_efficiency(values: Vec<f64>) -> Result<Option<ClassEfficiency>> {
    if values.is_empty() {
        return Ok(None);
    }
    Ok(Some(ClassEfficiency {
        count: values.len(),
        mean: mean(&values)?,
        median: median(&values)?,
        interquartile_range: interquartile_range(&values)?,
        values,
    }))
}

/// η_max per network, taken over all environments present in `records`; a
/// network is multi-peaked if any of those environments gave it ≥ 2 peaks.
pub fn max_efficiency_comparison<'a>(
    records: impl IntoIterator<Item = &'a EnsembleRecord>,
    bins: usize,
) -> Result<EfficiencyComparison> {
    let mut per_network: BTreeMap<usize, (Option<f64>, bool)> = BTreeMap::new();
    for r in records {
        let entry = per_network.entry(r.network_index).or_insert((None, false));
        if let Some(eta) = r.eta_max {
            entry.0 = Some(entry.0.map_or(eta, |e: f64| e.max(eta)));
        }
        entry.1 |= r.is_multi();
    }
    let mut single = Vec::new();
    let mut multi = Vec::new();
    for (eta, is_multi) in per_network.into_values() {
        if let Some(eta) = eta {
            if is_multi {
                multi.push(eta);
            } else {
                single.push(eta);
            }
        }
    }
    let all: Vec<f64> = single.iter().chain(&multi).copied().collect();
    let edges = Histogram::uniform(&all, bins)?.edges;
    let histograms = class_histograms(&single, &multi, edges, "maximum efficiency")?;
    Ok(EfficiencyComparison {
        single: class_efficiency(single)?,
        multi: class_efficiency(multi)?,
        histograms,
    })
}

/// Share of multi-peaked networks whose peaks all sit below the
/// reorganisation-energy cutoff; `None` for pure dephasing or no multi-peaked records.
pub fn reorg_cutoff_fraction<'a>(
    records: impl IntoIterator<Item = &'a EnsembleRecord>,
    model: &NoiseModel,
    cutoff: f64,
) -> Result<Option<f64>> {
    if matches!(model, NoiseModel::Lindblad) {
        return Ok(None);
    }
    let mut total = 0usize;
    let mut below = 0usize;
    for r in records.into_iter().filter(|r| r.is_multi()) {
        let report = crate::sweep::PeakReport {
            peak_indices: Vec::new(),
            peak_gammas: r.peak_gammas.clone(),
            peak_etas: r.peak_etas.clone(),
            count: r.peak_count,
            eta_low: r.eta_low,
            eta_high: r.eta_high,
        };
        total += 1;
        if peaks_below_reorg_cutoff(&report, model, cutoff)? {
            below += 1;
        }
    }
    Ok((total > 0).then(|| below as f64 / total as f64))
}

/// Per-environment counts and fractions in spec order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRow {
    pub environment: String,
    pub counts: ClassCounts,
    pub double_peak_fraction: Option<f64>,
    pub reorg_fraction: Option<f64>,
}

pub fn environment_table(summary: &EnsembleSummary) -> Result<Vec<EnvironmentRow>> {
    summary
        .spec
        .environments
        .iter()
        .map(|model| {
            let label = model.label();
            let counts = class_counts(summary.for_environment(&label));
            Ok(EnvironmentRow {
                double_peak_fraction: double_peak_fraction(summary.for_environment(&label)).ok(),
                reorg_fraction: reorg_cutoff_fraction(summary.for_environment(&label), model, REORGANISATION_CUTOFF)?,
                environment: label,
                counts,
            })
        })
        .collect()
}
