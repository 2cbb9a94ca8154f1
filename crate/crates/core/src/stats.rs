//! Density histograms and order statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// count / (total · width), so Σ density·width = 1.
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins on explicit edges; values outside are clamped into the end bins.
    pub fn with_edges(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::UndefinedStatistic("histogram of no values"));
        }
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("edges", "need at least two strictly ascending edges"));
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0usize; bins];
        for &v in values {
            // first edge strictly above v, minus one; the last bin is closed
            let k = edges.partition_point(|&e| e <= v).saturating_sub(1).min(bins - 1);
            counts[k] += 1;
        }
        let total = values.len() as f64;
        let density = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
            .collect();
        Ok(Self { edges, counts, density })
    }

    /// `bins` equal bins over the observed range. A zero-width range gives a
    /// single unit-width bin centred on the value.
    pub fn uniform(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins", "must be positive"));
        }
        let (lo, hi) = min_max(values)?;
        if lo == hi {
            return Self::with_edges(values, vec![lo - 0.5, lo + 0.5]);
        }
        let edges = (0..=bins)
            .map(|k| lo + (hi - lo) * k as f64 / bins as f64)
            .collect::<Vec<_>>();
        Self::with_edges(values, edges)
    }

    pub fn total_mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

fn min_max(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::UndefinedStatistic("range of no values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("values", "must be finite"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedStatistic("mean of no values"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedStatistic("quantile of no values"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", "must lie in [0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile(values, 0.5)
}

pub fn interquartile_range(values: &[f64]) -> Result<f64> {
    Ok(quantile(values, 0.75)? - quantile(values, 0.25)?)
}
