//! Efficiency sweeps over the noise strength Γ and peak analysis.

use serde::{Deserialize, Serialize};

use crate::dynamics::{BathCorrelation, GeneratorPencil, OpenSystem, DEFAULT_TRANSFER_RATE};
use crate::environment::{cutoff_from_peak, reorganisation_energy, Environment, SpectralDensity, Temperature};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::network::{Network, Provenance};
use crate::steady_state::{extraction_efficiency, solve_real, RealPencil};

/// Upper bound on reorganisation energy (eV) for physically plausible peaks.
pub const REORGANISATION_CUTOFF: f64 = 0.036;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma_min: 1e-7,
            gamma_max: 10.0,
            points: 64,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_min > 0.0 && self.gamma_min.is_finite()) {
            return Err(Error::invalid("gamma_min", "must be positive"));
        }
        if !(self.gamma_max > self.gamma_min && self.gamma_max.is_finite()) {
            return Err(Error::invalid("gamma_max", "must exceed gamma_min"));
        }
        if self.points < 2 {
            return Err(Error::invalid("points", "need at least 2 points"));
        }
        Ok(())
    }
}

/// Log-spaced grid with both endpoints included exactly.
pub fn gamma_grid(cfg: &SweepConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (lo, hi) = (cfg.gamma_min.ln(), cfg.gamma_max.ln());
    let last = cfg.points - 1;
    Ok((0..cfg.points)
        .map(|k| match k {
            0 => cfg.gamma_min,
            k if k == last => cfg.gamma_max,
            k => (lo + (hi - lo) * k as f64 / last as f64).exp(),
        })
        .collect())
}

/// Injection/extraction settings shared by every sweep of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub gamma_inj: f64,
    pub gamma_ext: f64,
    pub correlation: BathCorrelation,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            gamma_inj: DEFAULT_TRANSFER_RATE,
            gamma_ext: DEFAULT_TRANSFER_RATE,
            correlation: BathCorrelation::Independent,
        }
    }
}

/// Spectral-density shape with Γ left free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathShape {
    DrudeLorentz { peak: f64 },
    PowerLaw { peak: f64, power: u32 },
    Flat,
}

impl BathShape {
    pub fn density(&self, gamma: f64) -> Result<SpectralDensity> {
        Ok(match *self {
            BathShape::DrudeLorentz { peak } => {
                if !(peak > 0.0) {
                    return Err(Error::invalid("peak", "must be positive"));
                }
                SpectralDensity::drude_lorentz_peaked_at(gamma, peak)
            }
            BathShape::PowerLaw { peak, power } => SpectralDensity::PowerLaw {
                gamma,
                omega_c: cutoff_from_peak(peak, power)?,
                power,
            },
            BathShape::Flat => SpectralDensity::Flat { gamma },
        })
    }
}

/// How the environment acts: phenomenological dephasing or a Redfield bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Lindblad,
    Redfield { bath: BathShape, temperature: Temperature },
}

impl NoiseModel {
    pub fn drude_lorentz(kelvin: f64, peak: f64) -> Self {
        NoiseModel::Redfield {
            bath: BathShape::DrudeLorentz { peak },
            temperature: Temperature::Finite(kelvin),
        }
    }

    pub fn power_law(kelvin: f64, peak: f64, power: u32) -> Self {
        NoiseModel::Redfield {
            bath: BathShape::PowerLaw { peak, power },
            temperature: Temperature::Finite(kelvin),
        }
    }

    pub fn flat_infinite() -> Self {
        NoiseModel::Redfield {
            bath: BathShape::Flat,
            temperature: Temperature::Infinite,
        }
    }

    /// The Redfield environment at strength Γ; `None` for Lindblad.
    pub fn environment(&self, gamma: f64) -> Result<Option<Environment>> {
        match *self {
            NoiseModel::Lindblad => Ok(None),
            NoiseModel::Redfield { bath, temperature } => {
                let env = Environment {
                    density: bath.density(gamma)?,
                    temperature,
                };
                env.validate()?;
                Ok(Some(env))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.environment(1.0).map(|_| ())
    }

    /// Short file-name-safe identifier, e.g. `dl_T300_w0.1`.
    pub fn label(&self) -> String {
        match *self {
            NoiseModel::Lindblad => "lindblad".into(),
            NoiseModel::Redfield { bath, temperature } => {
                let t = match temperature {
                    Temperature::Finite(k) => format!("T{k}"),
                    Temperature::Infinite => "Tinf".into(),
                };
                match bath {
                    BathShape::DrudeLorentz { peak } => format!("dl_{t}_w{peak}"),
                    BathShape::PowerLaw { peak, power } => format!("pl{power}_{t}_w{peak}"),
                    BathShape::Flat => format!("flat_{t}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub gammas: Vec<f64>,
    /// η where the steady state passed every screen, `None` elsewhere.
    pub etas: Vec<Option<f64>>,
    pub valid: Vec<bool>,
    /// Site + shelf populations where valid.
    pub populations: Vec<Option<Vec<f64>>>,
    pub model: NoiseModel,
    pub provenance: Provenance,
}

impl EfficiencyCurve {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn eta_max(&self) -> Option<f64> {
        self.etas.iter().flatten().copied().reduce(f64::max)
    }
}

pub fn open_system(network: &Network, transport: &TransportConfig) -> Result<OpenSystem> {
    let h = build_hamiltonian(network)?;
    Ok(OpenSystem::new(h, transport.gamma_inj, transport.gamma_ext)?.with_correlation(transport.correlation))
}

/// Steady-state efficiency at every Γ of the grid. Failed or screened-out
/// points are marked invalid; the sweep itself only errors on bad inputs.
pub fn sweep_efficiency(
    network: &Network,
    model: &NoiseModel,
    cfg: &SweepConfig,
    transport: &TransportConfig,
) -> Result<EfficiencyCurve> {
    let gammas = gamma_grid(cfg)?;
    let sys = open_system(network, transport)?;
    let pencil = match model.environment(1.0)? {
        None => GeneratorPencil::lindblad(&sys),
        Some(env) => GeneratorPencil::redfield(&sys, &env)?,
    };
    let real = RealPencil::new(&pencil);

    let mut etas = Vec::with_capacity(gammas.len());
    let mut populations = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        match solve_real(&real.at(gamma)) {
            Ok(ss) if ss.usable() => {
                etas.push(Some(extraction_efficiency(&ss.rho)));
                populations.push(Some(ss.rho.populations()));
            }
            Ok(_) => {
                etas.push(None);
                populations.push(None);
            }
            Err(e) => {
                log::debug!("steady state failed at Γ = {gamma:e}: {e}");
                etas.push(None);
                populations.push(None);
            }
        }
    }
    let valid = etas.iter().map(Option::is_some).collect();
    Ok(EfficiencyCurve {
        gammas,
        etas,
        valid,
        populations,
        model: *model,
        provenance: network.provenance.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    /// Indices into the full Γ grid.
    pub peak_indices: Vec<usize>,
    pub peak_gammas: Vec<f64>,
    pub peak_etas: Vec<f64>,
    pub count: usize,
    pub eta_low: Option<f64>,
    pub eta_high: Option<f64>,
}

/// Interior strict local maxima. A run of equal values counts once, at its
/// first element, when both neighbours of the run are strictly smaller.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut k = 1;
    while k + 1 < n {
        if values[k - 1] < values[k] {
            let mut end = k;
            while end + 1 < n && values[end + 1] == values[k] {
                end += 1;
            }
            if end + 1 < n && values[end + 1] < values[k] {
                peaks.push(k);
            }
            k = end + 1;
        } else {
            k += 1;
        }
    }
    peaks
}

/// Peaks of the valid subsequence of a curve.
pub fn find_peaks(curve: &EfficiencyCurve) -> PeakReport {
    let (grid_index, values): (Vec<usize>, Vec<f64>) = curve
        .etas
        .iter()
        .enumerate()
        .filter_map(|(i, eta)| eta.map(|e| (i, e)))
        .unzip();
    let peak_indices: Vec<usize> = local_maxima(&values).into_iter().map(|k| grid_index[k]).collect();
    let peak_gammas: Vec<f64> = peak_indices.iter().map(|&i| curve.gammas[i]).collect();
    let peak_etas: Vec<f64> = peak_indices
        .iter()
        .map(|&i| curve.etas[i].expect("peaks lie on valid points"))
        .collect();
    let count = peak_indices.len();
    let (eta_low, eta_high) = if count >= 2 {
        (peak_etas.first().copied(), peak_etas.last().copied())
    } else {
        (None, None)
    };
    PeakReport {
        peak_indices,
        peak_gammas,
        peak_etas,
        count,
        eta_low,
        eta_high,
    }
}

/// η of the lowest-Γ peak over η of the highest-Γ peak.
pub fn peak_ratio(report: &PeakReport) -> Result<f64> {
    match (report.eta_low, report.eta_high) {
        (Some(low), Some(high)) if report.count >= 2 => Ok(low / high),
        _ => Err(Error::UndefinedStatistic("peak ratio needs at least two peaks")),
    }
}

/// Whether every peak sits at a Γ whose reorganisation energy is below `cutoff`.
pub fn peaks_below_reorg_cutoff(report: &PeakReport, model: &NoiseModel, cutoff: f64) -> Result<bool> {
    if matches!(model, NoiseModel::Lindblad) {
        return Err(Error::invalid(
            "model",
            "reorganisation energy is undefined for pure dephasing",
        ));
    }
    if report.count < 2 {
        return Err(Error::UndefinedStatistic(
            "reorganisation screen needs at least two peaks",
        ));
    }
    for &gamma in &report.peak_gammas {
        let env = model.environment(gamma)?.expect("redfield model");
        if reorganisation_energy(&env.density)? >= cutoff {
            return Ok(false);
        }
    }
    Ok(true)
}
