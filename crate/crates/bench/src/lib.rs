//! Shared inputs for the benchmarks.

use enaqt_core::{generate_network, Network, NetworkConfig, NoiseModel};

/// A default-ensemble network with a fixed seed.
pub fn sample_network(seed: u64) -> Network {
    generate_network(&NetworkConfig::default(), seed).expect("default config places sites")
}

pub fn models() -> Vec<(&'static str, NoiseModel)> {
    vec![
        ("lindblad", NoiseModel::Lindblad),
        ("drude_lorentz_300k", NoiseModel::drude_lorentz(300.0, 0.1)),
        ("power_law_300k", NoiseModel::power_law(300.0, 0.1, 3)),
    ]
}
