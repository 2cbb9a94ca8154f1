//! Phonon environments: spectral densities, thermal occupation and the
//! noise-power spectrum that sets Bloch-Redfield rates.
//!
//! Frequencies are energies in eV (ħ = 1). Positive ω denotes a downhill
//! transition (emission into the bath), negative ω an uphill one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralDensity {
    /// Γ·(2/π)·ω(1/τ)/(ω² + 1/τ²); peaks at ω = 1/τ.
    DrudeLorentz { gamma: f64, tau: f64 },
    /// Γ·(ω/ω_c)^S·exp(−(ω/ω_c)²); S = 1 is Ohmic, S = 3 superohmic.
    PowerLaw { gamma: f64, omega_c: f64, power: u32 },
    /// Γ at every frequency.
    Flat { gamma: f64 },
}

impl SpectralDensity {
    pub fn drude_lorentz_peaked_at(gamma: f64, peak: f64) -> Self {
        SpectralDensity::DrudeLorentz { gamma, tau: 1.0 / peak }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            SpectralDensity::DrudeLorentz { gamma, .. }
            | SpectralDensity::PowerLaw { gamma, .. }
            | SpectralDensity::Flat { gamma } => gamma,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        match self {
            SpectralDensity::DrudeLorentz { tau, .. } => SpectralDensity::DrudeLorentz { gamma, tau },
            SpectralDensity::PowerLaw { omega_c, power, .. } => SpectralDensity::PowerLaw { gamma, omega_c, power },
            SpectralDensity::Flat { .. } => SpectralDensity::Flat { gamma },
        }
    }

    /// Frequency at which J(ω) is maximal, if it has one.
    pub fn peak_frequency(&self) -> Option<f64> {
        match *self {
            SpectralDensity::DrudeLorentz { tau, .. } => Some(1.0 / tau),
            SpectralDensity::PowerLaw { omega_c, power, .. } => Some(omega_c * (power as f64 / 2.0).sqrt()),
            SpectralDensity::Flat { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gamma = self.gamma();
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be non-negative"));
        }
        match *self {
            SpectralDensity::DrudeLorentz { tau, .. } if !(tau > 0.0 && tau.is_finite()) => {
                Err(Error::invalid("tau", "must be positive"))
            }
            SpectralDensity::PowerLaw { omega_c, power, .. } => {
                if !(omega_c > 0.0 && omega_c.is_finite()) {
                    Err(Error::invalid("omega_c", "must be positive"))
                } else if power == 0 {
                    Err(Error::invalid("power", "must be at least 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Bath temperature; `Infinite` with a flat density is the pure-dephasing limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemperatureRepr", into = "TemperatureRepr")]
pub enum Temperature {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TemperatureRepr {
    Kelvin(f64),
    Word(String),
}

impl TryFrom<TemperatureRepr> for Temperature {
    type Error = String;

    fn try_from(repr: TemperatureRepr) -> std::result::Result<Self, String> {
        match repr {
            TemperatureRepr::Kelvin(k) if k > 0.0 && k.is_finite() => Ok(Temperature::Finite(k)),
            TemperatureRepr::Kelvin(k) => Err(format!("temperature must be positive, got {k}")),
            TemperatureRepr::Word(w) if w == "infinite" => Ok(Temperature::Infinite),
            TemperatureRepr::Word(w) => Err(format!("expected kelvin or \"infinite\", got {w:?}")),
        }
    }
}

impl From<Temperature> for TemperatureRepr {
    fn from(t: Temperature) -> Self {
        match t {
            Temperature::Finite(k) => TemperatureRepr::Kelvin(k),
            Temperature::Infinite => TemperatureRepr::Word("infinite".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub density: SpectralDensity,
    pub temperature: Temperature,
}

impl Environment {
    /// The flat, infinite-temperature bath that reproduces Lindblad dephasing.
    pub fn lindblad_limit(gamma: f64) -> Self {
        Self {
            density: SpectralDensity::Flat { gamma },
            temperature: Temperature::Infinite,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.density.validate()?;
        match (self.temperature, self.density) {
            (Temperature::Finite(k), _) if !(k > 0.0 && k.is_finite()) => {
                Err(Error::invalid("temperature", "must be positive"))
            }
            (Temperature::Infinite, SpectralDensity::Flat { .. }) => Ok(()),
            (Temperature::Infinite, _) => Err(Error::UndefinedRegime(
                "infinite temperature requires a flat spectral density".into(),
            )),
            (Temperature::Finite(_), SpectralDensity::Flat { .. }) => Err(Error::UndefinedRegime(
                "a flat density at finite temperature diverges at zero frequency".into(),
            )),
            _ => Ok(()),
        }
    }
}

pub fn spectral_density(sd: &SpectralDensity, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::invalid("omega", "spectral densities take ω ≥ 0"));
    }
    Ok(match *sd {
        SpectralDensity::DrudeLorentz { gamma, tau } => {
            let cutoff = 1.0 / tau;
            gamma * (2.0 / PI) * omega * cutoff / (omega * omega + cutoff * cutoff)
        }
        SpectralDensity::PowerLaw { gamma, omega_c, power } => {
            let x = omega / omega_c;
            gamma * x.powi(power as i32) * (-x * x).exp()
        }
        SpectralDensity::Flat { gamma } => gamma,
    })
}

/// ω_c such that a power-law density of exponent `power` peaks at `omega_peak`.
pub fn cutoff_from_peak(omega_peak: f64, power: u32) -> Result<f64> {
    if !(omega_peak > 0.0) || power == 0 {
        return Err(Error::invalid("omega_peak", "peak and power must be positive"));
    }
    Ok(omega_peak / (power as f64 / 2.0).sqrt())
}

/// Bose-Einstein occupation 1/(exp(|ω|/k_BT) − 1).
pub fn bose_einstein(omega: f64, kelvin: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::invalid("omega", "occupation diverges at ω = 0"));
    }
    if !(kelvin > 0.0) {
        return Err(Error::invalid("temperature", "must be positive"));
    }
    Ok(1.0 / (omega.abs() / (BOLTZMANN * kelvin)).exp_m1())
}

/// S(ω) = (N_BE(|ω|) + Θ(ω))·J(|ω|), with the analytic limit at ω = 0.
pub fn noise_power(env: &Environment, omega: f64) -> Result<f64> {
    match env.temperature {
        Temperature::Infinite => match env.density {
            SpectralDensity::Flat { gamma } => Ok(gamma),
            _ => Err(Error::UndefinedRegime(
                "infinite temperature requires a flat spectral density".into(),
            )),
        },
        Temperature::Finite(kelvin) => {
            if !(kelvin > 0.0) {
                return Err(Error::invalid("temperature", "must be positive"));
            }
            if omega == 0.0 {
                return zero_frequency_limit(&env.density, kelvin);
            }
            let j = spectral_density(&env.density, omega.abs())?;
            if j == 0.0 {
                return Ok(0.0);
            }
            let n = bose_einstein(omega, kelvin)?;
            let emission = if omega > 0.0 { 1.0 } else { 0.0 };
            Ok((n + emission) * j)
        }
    }
}

// lim_{ω→0} N_BE(ω)·J(ω) = k_BT · lim J(ω)/ω.
fn zero_frequency_limit(sd: &SpectralDensity, kelvin: f64) -> Result<f64> {
    let kt = BOLTZMANN * kelvin;
    match *sd {
        SpectralDensity::DrudeLorentz { gamma, tau } => Ok(gamma * (2.0 / PI) * tau * kt),
        SpectralDensity::PowerLaw { gamma, omega_c, power } => Ok(if power == 1 { gamma * kt / omega_c } else { 0.0 }),
        SpectralDensity::Flat { .. } => Err(Error::UndefinedRegime(
            "a flat density at finite temperature diverges at zero frequency".into(),
        )),
    }
}

/// Γ(s/2) for positive integer s.
fn gamma_half_integer(s: u32) -> f64 {
    let mut value = if s % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if s % 2 == 0 { 2 } else { 1 };
    while k < s {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// λ = (1/π)∫₀^∞ J(ω)/ω dω in closed form.
pub fn reorganisation_energy(sd: &SpectralDensity) -> Result<f64> {
    sd.validate()?;
    match *sd {
        SpectralDensity::DrudeLorentz { gamma, .. } => Ok(gamma / PI),
        SpectralDensity::PowerLaw { gamma, power, .. } => Ok(gamma * gamma_half_integer(power) / (2.0 * PI)),
        SpectralDensity::Flat { .. } => Err(Error::UndefinedRegime(
            "reorganisation energy of a flat density diverges".into(),
        )),
    }
}

/// The same integral by adaptive quadrature.
pub fn reorganisation_energy_numeric(sd: &SpectralDensity) -> Result<f64> {
    sd.validate()?;
    let scale = match *sd {
        SpectralDensity::DrudeLorentz { tau, .. } => 1.0 / tau,
        SpectralDensity::PowerLaw { omega_c, .. } => omega_c,
        SpectralDensity::Flat { .. } => {
            return Err(Error::UndefinedRegime(
                "reorganisation energy of a flat density diverges".into(),
            ))
        }
    };
    let integrand = |w: f64| {
        if w == 0.0 {
            0.0
        } else {
            spectral_density(sd, w).unwrap_or(0.0) / w
        }
    };
    Ok(quadrature::integrate_semi_infinite(integrand, scale, 1e-13) / PI)
}

/// Largest Drude-Lorentz Γ whose reorganisation energy stays below `lambda_max`.
pub fn drude_lorentz_gamma_for_reorganisation(lambda_max: f64) -> f64 {
    lambda_max * PI
}
