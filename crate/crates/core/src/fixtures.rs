//! Bundled reference data.

use crate::network::Network;

/// Eight-site network that shows two efficiency peaks under every bath
/// considered; positions, energies and moments are tabulated values.
pub const SHOWCASE_NETWORK_JSON: &str = include_str!("../fixtures/showcase_network.json");

pub fn showcase_network() -> Network {
    Network::from_json(SHOWCASE_NETWORK_JSON).expect("bundled fixture is valid")
}
