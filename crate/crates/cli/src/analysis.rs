//! Aggregate tables written from stored records.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::Result;
use enaqt_core::ensemble::{
    class_counts, environment_table, gap_disorder_histogram, injection_extraction_histogram, max_efficiency_comparison,
    peak_ratio_histogram, peak_ratios, reorg_cutoff_fraction, ClassEfficiency, ClassHistograms, EnsembleSummary,
    DEFAULT_GAP_BINS,
};
use enaqt_core::sweep::{BathShape, REORGANISATION_CUTOFF};
use enaqt_core::{Histogram, NoiseModel, Temperature};

use crate::artifacts::{csv_text, fmt_f64};
use crate::config::Analysis;

pub struct Table {
    pub file: String,
    pub text: String,
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn histogram_rows(rows: &mut Vec<Vec<String>>, prefix: &[String], h: &Histogram) {
    for (k, w) in h.edges.windows(2).enumerate() {
        let mut row = prefix.to_vec();
        row.extend([
            fmt_f64(w[0]),
            fmt_f64(w[1]),
            h.counts[k].to_string(),
            fmt_f64(h.density[k]),
        ]);
        rows.push(row);
    }
}

fn class_rows(rows: &mut Vec<Vec<String>>, scope: &str, h: &ClassHistograms) {
    for (class, hist) in [("single", &h.single), ("multi", &h.multi)] {
        if let Some(hist) = hist {
            histogram_rows(rows, &[scope.to_string(), class.to_string()], hist);
        }
    }
}

/// Networks double-peaked in at least one environment, over networks with
/// at least one valid sweep.
pub fn anywhere_fraction(summary: &EnsembleSummary) -> Option<f64> {
    let valid: BTreeSet<usize> = summary
        .records
        .iter()
        .filter(|r| r.class() != enaqt_core::PeakClass::Failed)
        .map(|r| r.network_index)
        .collect();
    let multi: BTreeSet<usize> = summary
        .records
        .iter()
        .filter(|r| r.is_multi())
        .map(|r| r.network_index)
        .collect();
    (!valid.is_empty()).then(|| multi.len() as f64 / valid.len() as f64)
}

fn double_peak_bars(summary: &EnsembleSummary, hash: &str) -> Result<Table> {
    let mut rows = Vec::new();
    for row in environment_table(summary)? {
        let c = row.counts;
        rows.push(vec![
            row.environment,
            c.total().to_string(),
            c.valid().to_string(),
            c.zero.to_string(),
            c.single.to_string(),
            c.multi.to_string(),
            c.failed.to_string(),
            opt(row.double_peak_fraction),
        ]);
    }
    let networks: BTreeSet<usize> = summary.records.iter().map(|r| r.network_index).collect();
    rows.push(vec![
        "any".into(),
        networks.len().to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt(anywhere_fraction(summary)),
    ]);
    Ok(Table {
        file: "double_peak_bars.csv".into(),
        text: csv_text(
            hash,
            &[
                "environment",
                "networks",
                "valid",
                "zero",
                "single",
                "multi",
                "failed",
                "double_peak_fraction",
            ],
            &rows,
        )?,
    })
}

fn per_environment_histograms<F>(summary: &EnsembleSummary, hash: &str, file: &str, build: F) -> Result<Table>
where
    F: Fn(&EnsembleSummary, &str) -> enaqt_core::Result<ClassHistograms>,
{
    let mut rows = Vec::new();
    for label in summary.spec.labels() {
        match build(summary, &label) {
            Ok(h) => class_rows(&mut rows, &label, &h),
            Err(e) => log::warn!("{file}: {label} skipped: {e}"),
        }
    }
    Ok(Table {
        file: file.into(),
        text: csv_text(
            hash,
            &["environment", "class", "bin_low", "bin_high", "count", "density"],
            &rows,
        )?,
    })
}

fn ratio_tables(summary: &EnsembleSummary, hash: &str) -> Result<Vec<Table>> {
    let mut hist_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut scopes: Vec<(String, Vec<f64>)> = summary
        .spec
        .labels()
        .into_iter()
        .map(|l| {
            let r = peak_ratios(summary.for_environment(&l));
            (l, r)
        })
        .collect();
    scopes.push(("all".into(), peak_ratios(&summary.records)));
    for (scope, ratios) in scopes {
        match peak_ratio_histogram(&ratios) {
            Ok(s) => {
                histogram_rows(&mut hist_rows, std::slice::from_ref(&scope), &s.log2_histogram);
                summary_rows.push(vec![
                    scope,
                    s.count.to_string(),
                    fmt_f64(s.central_fraction),
                    fmt_f64(s.median_ratio),
                ]);
            }
            Err(_) => summary_rows.push(vec![scope, "0".into(), String::new(), String::new()]),
        }
    }
    Ok(vec![
        Table {
            file: "ratio_histogram.csv".into(),
            text: csv_text(
                hash,
                &["scope", "log2_low", "log2_high", "count", "density"],
                &hist_rows,
            )?,
        },
        Table {
            file: "ratio_summary.csv".into(),
            text: csv_text(
                hash,
                &["scope", "double_peaked", "central_fraction", "median_ratio"],
                &summary_rows,
            )?,
        },
    ])
}

fn reorg_table(summary: &EnsembleSummary, hash: &str) -> Result<Table> {
    let mut rows = Vec::new();
    for model in &summary.spec.environments {
        let NoiseModel::Redfield { bath, temperature } = model else {
            continue;
        };
        let label = model.label();
        let multi = class_counts(summary.for_environment(&label)).multi;
        let fraction = reorg_cutoff_fraction(summary.for_environment(&label), model, REORGANISATION_CUTOFF)?;
        let kelvin = match temperature {
            Temperature::Finite(k) => fmt_f64(*k),
            Temperature::Infinite => "inf".into(),
        };
        let peak = match bath {
            BathShape::DrudeLorentz { peak } | BathShape::PowerLaw { peak, .. } => fmt_f64(*peak),
            BathShape::Flat => String::new(),
        };
        rows.push(vec![label, kelvin, peak, multi.to_string(), opt(fraction)]);
    }
    Ok(Table {
        file: "reorg_fraction.csv".into(),
        text: csv_text(
            hash,
            &[
                "environment",
                "temperature_k",
                "peak_ev",
                "double_peaked",
                "fraction_below_cutoff",
            ],
            &rows,
        )?,
    })
}

fn efficiency_tables(summary: &EnsembleSummary, hash: &str) -> Result<Vec<Table>> {
    let mut stat_rows = Vec::new();
    let mut hist_rows = Vec::new();
    let mut scopes = vec!["all".to_string()];
    scopes.extend(summary.spec.labels());
    for scope in scopes {
        let result = if scope == "all" {
            max_efficiency_comparison(&summary.records, DEFAULT_GAP_BINS)
        } else {
            max_efficiency_comparison(summary.for_environment(&scope), DEFAULT_GAP_BINS)
        };
        let cmp = match result {
            Ok(c) => c,
            Err(e) => {
                log::warn!("efficiency comparison: {scope} skipped: {e}");
                continue;
            }
        };
        let stat = |class: &str, c: &Option<ClassEfficiency>| match c {
            Some(c) => vec![
                scope.clone(),
                class.into(),
                c.count.to_string(),
                fmt_f64(c.mean),
                fmt_f64(c.median),
                fmt_f64(c.interquartile_range),
            ],
            None => vec![
                scope.clone(),
                class.into(),
                "0".into(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        stat_rows.push(stat("single", &cmp.single));
        stat_rows.push(stat("multi", &cmp.multi));
        class_rows(&mut hist_rows, &scope, &cmp.histograms);
    }
    Ok(vec![
        Table {
            file: "efficiency_comparison.csv".into(),
            text: csv_text(
                hash,
                &["scope", "class", "count", "mean", "median", "interquartile_range"],
                &stat_rows,
            )?,
        },
        Table {
            file: "efficiency_histogram.csv".into(),
            text: csv_text(
                hash,
                &["scope", "class", "bin_low", "bin_high", "count", "density"],
                &hist_rows,
            )?,
        },
    ])
}

pub fn analysis_tables(summary: &EnsembleSummary, analyses: &[Analysis]) -> Result<Vec<Table>> {
    let hash = summary.spec.hash();
    let n_sites = summary.spec.network.n_sites;
    let mut tables = Vec::new();
    for a in analyses {
        match a {
            Analysis::DoublePeakBars => tables.push(double_peak_bars(summary, &hash)?),
            Analysis::GapHistogram => tables.push(per_environment_histograms(
                summary,
                &hash,
                "gap_histogram.csv",
                |s, l| gap_disorder_histogram(s.for_environment(l), DEFAULT_GAP_BINS),
            )?),
            Analysis::InjExtHistogram => tables.push(per_environment_histograms(
                summary,
                &hash,
                "inj_ext_histogram.csv",
                |s, l| injection_extraction_histogram(s.for_environment(l), n_sites),
            )?),
            Analysis::RatioHistogram => tables.extend(ratio_tables(summary, &hash)?),
            Analysis::ReorgFraction => tables.push(reorg_table(summary, &hash)?),
            Analysis::EfficiencyComparison => tables.extend(efficiency_tables(summary, &hash)?),
        }
    }
    Ok(tables)
}

/// Per-environment double-peak fractions laid out one bar per row.
pub fn summary_table(summary: &EnsembleSummary) -> Result<String> {
    let mut out = String::new();
    writeln!(
        out,
        "{:<16} {:>8} {:>8} {:>8} {:>8} {:>10}",
        "environment", "networks", "valid", "multi", "failed", "double-pk"
    )?;
    for row in environment_table(summary)? {
        let pct = row
            .double_peak_fraction
            .map_or_else(|| "-".into(), |f| format!("{:.2}%", 100.0 * f));
        writeln!(
            out,
            "{:<16} {:>8} {:>8} {:>8} {:>8} {:>10}",
            row.environment,
            row.counts.total(),
            row.counts.valid(),
            row.counts.multi,
            row.counts.failed,
            pct
        )?;
    }
    if summary.spec.environments.len() > 1 {
        let pct = anywhere_fraction(summary).map_or_else(|| "-".into(), |f| format!("{:.2}%", 100.0 * f));
        writeln!(out, "{:<16} {:>8} {:>8} {:>8} {:>8} {:>10}", "any", "", "", "", "", pct)?;
    }
    Ok(out)
}
