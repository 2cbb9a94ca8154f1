//! Steady-state transport through randomised dipole networks coupled to
//! vibrational environments.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod constants;
pub mod dynamics;
pub mod ensemble;
pub mod environment;
pub mod error;
pub mod fixtures;
pub mod hamiltonian;
pub mod network;
pub mod quadrature;
pub mod stats;
pub mod steady_state;
pub mod sweep;

pub use dynamics::{build_lindblad, build_redfield, BathCorrelation, GeneratorPencil, Liouvillian, Method, OpenSystem};
pub use ensemble::{
    evaluate_network, run_ensemble, run_ensemble_with, EnsembleRecord, EnsembleSpec, EnsembleSummary, MemoryStore,
    PeakClass, RecordStore,
};
pub use environment::{Environment, SpectralDensity, Temperature};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, eigendecompose, EigenSystem, Hamiltonian};
pub use network::{generate_network, DipoleSite, EnergyMode, Network, NetworkConfig, NetworkVariant, SiteRole};
pub use stats::Histogram;
pub use steady_state::{
    extraction_efficiency, solve_steady_state, validate_state, DensityMatrix, SteadyState, ValidityReport,
};
pub use sweep::{
    find_peaks, gamma_grid, sweep_efficiency, BathShape, EfficiencyCurve, NoiseModel, PeakReport, SweepConfig,
    TransportConfig,
};
