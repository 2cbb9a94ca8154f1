//! Physical constants in the nm / e / eV unit system.

/// Coulomb constant (4πε₀)⁻¹ in eV·nm·e⁻².
pub const COULOMB: f64 = 1.43996;

/// Boltzmann constant in eV·K⁻¹.
pub const BOLTZMANN: f64 = 8.617333262e-5;

/// Bundled view of the constants, for callers that want to pass them around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub coulomb: f64,
    pub boltzmann: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            coulomb: COULOMB,
            boltzmann: BOLTZMANN,
        }
    }
}

/// Thermal energy k_B·T in eV.
pub fn thermal_energy(kelvin: f64) -> f64 {
    BOLTZMANN * kelvin
}
