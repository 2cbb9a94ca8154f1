//! Randomised dipole networks.
//!
//! Every network has the injection site at index 0 and the extraction site at
//! index 1; all other sites are bulk sites. Sphere networks put the two
//! terminals on the poles of a ball and scatter the bulk sites through its
//! volume, subject to a minimum pairwise separation. Two-arm chains carry an
//! explicit nearest-neighbour coupling matrix instead of dipole couplings.
//!
//! All samplers are pure functions of their inputs and a `u64` seed.

use nalgebra::Vector3;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Attempts per bulk site before placement is declared infeasible.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Index of the injection terminal in every network.
pub const INJECTION: usize = 0;
/// Index of the extraction terminal in every network.
pub const EXTRACTION: usize = 1;

// Independent RNG streams so that changing one sampler never perturbs another.
const GEOMETRY_STREAM: u64 = 0;
const ENERGY_STREAM: u64 = 1;
const OFFSET_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteRole {
    Injection,
    Extraction,
    Bulk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSite {
    /// nm
    pub position: Vec3,
    /// e·nm
    pub moment: Vec3,
    /// eV
    pub energy: f64,
    pub role: SiteRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyMode {
    Uniform { mean: f64 },
    Normal { mean: f64, std: f64 },
}

impl EnergyMode {
    pub fn mean(&self) -> f64 {
        match *self {
            EnergyMode::Uniform { mean } | EnergyMode::Normal { mean, .. } => mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkVariant {
    Sphere,
    /// Sphere network with `n_offset` random bulk sites raised by `offset` eV.
    OffsetSphere {
        n_offset: usize,
        offset: f64,
    },
    /// Two three-site nearest-neighbour arms sharing the terminals.
    TwoArmChain {
        coupling: f64,
        arm_stds: [f64; 2],
    },
}

impl NetworkVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            NetworkVariant::Sphere => "sphere",
            NetworkVariant::OffsetSphere { .. } => "offset_sphere",
            NetworkVariant::TwoArmChain { .. } => "two_arm_chain",
        }
    }

    pub fn offset_default() -> Self {
        NetworkVariant::OffsetSphere {
            n_offset: 3,
            offset: 0.0155,
        }
    }

    pub fn two_arm_default() -> Self {
        NetworkVariant::TwoArmChain {
            coupling: 2.5e-3,
            arm_stds: [15.5e-3, 1.55e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// nm
    pub radius: f64,
    pub n_sites: usize,
    /// nm
    pub min_separation: f64,
    /// e·nm
    pub dipole_magnitude: f64,
    pub energy_mode: EnergyMode,
    pub variant: NetworkVariant,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            radius: 10.0,
            n_sites: 8,
            min_separation: 1.0,
            dipole_magnitude: 0.114033,
            energy_mode: EnergyMode::Normal {
                mean: 1.5498,
                std: 0.0155,
            },
            variant: NetworkVariant::Sphere,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    /// High-density variant: 2.5 nm ball with a 0.5 nm exclusion radius.
    pub fn dense() -> Self {
        Self {
            radius: 2.5,
            min_separation: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid("radius", "must be positive"));
        }
        if !(self.min_separation > 0.0 && self.min_separation.is_finite()) {
            return Err(Error::invalid("min_separation", "must be positive"));
        }
        if !(self.dipole_magnitude > 0.0 && self.dipole_magnitude.is_finite()) {
            return Err(Error::invalid("dipole_magnitude", "must be positive"));
        }
        if self.n_sites < 3 {
            return Err(Error::invalid(
                "n_sites",
                "need two terminals and at least one bulk site",
            ));
        }
        validate_energy_mode(&self.energy_mode)?;
        match self.variant {
            NetworkVariant::Sphere => {}
            NetworkVariant::OffsetSphere { n_offset, offset } => {
                if n_offset > self.n_sites - 2 {
                    return Err(Error::invalid("n_offset", "exceeds the number of bulk sites"));
                }
                if !offset.is_finite() {
                    return Err(Error::invalid("offset", "must be finite"));
                }
            }
            NetworkVariant::TwoArmChain { coupling, arm_stds } => {
                if self.n_sites != 8 {
                    return Err(Error::invalid("n_sites", "two-arm chains have exactly 8 sites"));
                }
                validate_two_arm(coupling, arm_stds)?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }
}

fn validate_energy_mode(mode: &EnergyMode) -> Result<()> {
    match *mode {
        EnergyMode::Uniform { mean } if mean.is_finite() => Ok(()),
        EnergyMode::Normal { mean, std } if mean.is_finite() && std >= 0.0 && std.is_finite() => Ok(()),
        _ => Err(Error::invalid(
            "energy_mode",
            "mean must be finite and std non-negative",
        )),
    }
}

fn validate_two_arm(coupling: f64, arm_stds: [f64; 2]) -> Result<()> {
    if !(coupling > 0.0 && coupling.is_finite()) {
        return Err(Error::invalid("coupling", "must be positive"));
    }
    if arm_stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid("arm_stds", "must be non-negative"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSource {
    DipoleDerived,
    /// Symmetric N×N coupling matrix in eV with zero diagonal, row-major.
    Explicit {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub sites: Vec<DipoleSite>,
    pub coupling: CouplingSource,
    pub provenance: Provenance,
}

impl Network {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.energy).collect()
    }

    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.sites.iter().enumerate() {
            for b in &self.sites[i + 1..] {
                best = best.min((a.position - b.position).norm());
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a network document. Errors carry the field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let network: Network = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        network.check_schema()?;
        Ok(network)
    }

    fn check_schema(&self) -> Result<()> {
        let schema = |path: String, message: &str| Error::Schema {
            path,
            message: message.to_string(),
        };
        let n = self.sites.len();
        if n < 2 {
            return Err(schema("sites".into(), "need at least the two terminals"));
        }
        for (i, site) in self.sites.iter().enumerate() {
            let expected = match i {
                INJECTION => SiteRole::Injection,
                EXTRACTION => SiteRole::Extraction,
                _ => SiteRole::Bulk,
            };
            if site.role != expected {
                return Err(schema(format!("sites[{i}].role"), "role does not match site index"));
            }
            let finite =
                site.position.iter().chain(site.moment.iter()).all(|x| x.is_finite()) && site.energy.is_finite();
            if !finite {
                return Err(schema(format!("sites[{i}]"), "non-finite value"));
            }
        }
        if let CouplingSource::Explicit { matrix } = &self.coupling {
            if matrix.len() != n {
                return Err(schema("coupling.matrix".into(), "row count differs from site count"));
            }
            for (i, row) in matrix.iter().enumerate() {
                if row.len() != n {
                    return Err(schema(format!("coupling.matrix[{i}]"), "wrong row length"));
                }
                if row[i] != 0.0 {
                    return Err(schema(format!("coupling.matrix[{i}][{i}]"), "diagonal must be zero"));
                }
                for (j, v) in row.iter().enumerate() {
                    if !v.is_finite() || *v != matrix[j][i] {
                        return Err(schema(format!("coupling.matrix[{i}][{j}]"), "matrix must be symmetric"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn random_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Uniform in the ball of the given radius (radial CDF ∝ r³).
fn random_in_ball<R: Rng>(rng: &mut R, radius: f64) -> Vec3 {
    let u: f64 = rng.random();
    random_unit_vector(rng) * (radius * u.cbrt())
}

/// Builds any configured variant from `config` with the given seed.
pub fn generate_network(config: &NetworkConfig, seed: u64) -> Result<Network> {
    match config.variant {
        NetworkVariant::Sphere | NetworkVariant::OffsetSphere { .. } => sample_sphere_network(config, seed),
        NetworkVariant::TwoArmChain { coupling, arm_stds } => {
            let mut net = build_two_arm_chain(coupling, arm_stds, config.energy_mode.mean(), seed)?;
            net.provenance.config_hash = config.hash();
            Ok(net)
        }
    }
}

pub fn sample_sphere_network(config: &NetworkConfig, seed: u64) -> Result<Network> {
    sample_sphere_network_with_limit(config, seed, MAX_PLACEMENT_ATTEMPTS)
}

pub fn sample_sphere_network_with_limit(config: &NetworkConfig, seed: u64, max_attempts: usize) -> Result<Network> {
    if !(config.radius > 0.0) || !(config.min_separation > 0.0) {
        return Err(Error::invalid("radius", "radius and min_separation must be positive"));
    }
    if config.n_sites < 2 {
        return Err(Error::invalid("n_sites", "need at least the two terminals"));
    }
    validate_energy_mode(&config.energy_mode)?;
    let magnitude = config.dipole_magnitude;
    let terminal_moment = Vec3::new(0.0, 0.0, magnitude);

    let mut positions = vec![Vec3::new(0.0, 0.0, -config.radius), Vec3::new(0.0, 0.0, config.radius)];
    let mut moments = vec![terminal_moment, terminal_moment];

    let mut rng = rng_for(seed, GEOMETRY_STREAM);
    for site in 2..config.n_sites {
        let mut placed = None;
        for _ in 0..max_attempts {
            let candidate = random_in_ball(&mut rng, config.radius);
            if positions
                .iter()
                .all(|p| (p - candidate).norm() >= config.min_separation)
            {
                placed = Some(candidate);
                break;
            }
        }
        let position = placed.ok_or(Error::PlacementExhausted {
            site,
            attempts: max_attempts,
        })?;
        positions.push(position);
        moments.push(random_unit_vector(&mut rng) * magnitude);
    }

    let energies = sample_onsite_energies(config.energy_mode, config.n_sites, seed)?;
    let sites = positions
        .into_iter()
        .zip(moments)
        .zip(energies)
        .enumerate()
        .map(|(i, ((position, moment), energy))| DipoleSite {
            position,
            moment,
            energy,
            role: role_of(i),
        })
        .collect();

    let network = Network {
        sites,
        coupling: CouplingSource::DipoleDerived,
        provenance: Provenance {
            config_hash: config.hash(),
            seed,
            variant: config.variant.tag().to_string(),
        },
    };
    match config.variant {
        NetworkVariant::OffsetSphere { n_offset, offset } => apply_energy_offset(&network, n_offset, offset, seed),
        _ => Ok(network),
    }
}

fn role_of(index: usize) -> SiteRole {
    match index {
        INJECTION => SiteRole::Injection,
        EXTRACTION => SiteRole::Extraction,
        _ => SiteRole::Bulk,
    }
}

pub fn sample_onsite_energies(mode: EnergyMode, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    validate_energy_mode(&mode)?;
    Ok(match mode {
        EnergyMode::Uniform { mean } => vec![mean; n],
        EnergyMode::Normal { mean, std } => {
            let normal = Normal::new(mean, std).map_err(|e| Error::invalid("std", e.to_string()))?;
            let mut rng = rng_for(seed, ENERGY_STREAM);
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        }
    })
}

/// Returns a copy with `n_offset` distinct bulk sites raised by `offset` eV.
pub fn apply_energy_offset(network: &Network, n_offset: usize, offset: f64, seed: u64) -> Result<Network> {
    let bulk: Vec<usize> = (0..network.len())
        .filter(|&i| network.sites[i].role == SiteRole::Bulk)
        .collect();
    if n_offset > bulk.len() {
        return Err(Error::invalid(
            "n_offset",
            format!("{n_offset} exceeds {} bulk sites", bulk.len()),
        ));
    }
    let mut out = network.clone();
    let mut rng = rng_for(seed, OFFSET_STREAM);
    for pick in index::sample(&mut rng, bulk.len(), n_offset) {
        out.sites[bulk[pick]].energy += offset;
    }
    out.provenance.variant = "offset_sphere".to_string();
    Ok(out)
}

/// Two three-site arms between the terminals: 0–2–3–4–1 and 0–5–6–7–1.
///
/// Arm A (sites 2..=4) draws energies with `arm_stds[0]`, arm B (5..=7) with
/// `arm_stds[1]`. Terminals sit at `mean`. Positions are a nominal planar
/// layout; the Hamiltonian uses only the explicit coupling matrix.
pub fn build_two_arm_chain(coupling: f64, arm_stds: [f64; 2], mean: f64, seed: u64) -> Result<Network> {
    validate_two_arm(coupling, arm_stds)?;
    if !mean.is_finite() {
        return Err(Error::invalid("mean", "must be finite"));
    }
    const N: usize = 8;
    let mut rng = rng_for(seed, ENERGY_STREAM);
    let arm_a = Normal::new(mean, arm_stds[0]).map_err(|e| Error::invalid("arm_stds", e.to_string()))?;
    let arm_b = Normal::new(mean, arm_stds[1]).map_err(|e| Error::invalid("arm_stds", e.to_string()))?;
    let mut energies = [mean; N];
    for e in &mut energies[2..5] {
        *e = arm_a.sample(&mut rng);
    }
    for e in &mut energies[5..8] {
        *e = arm_b.sample(&mut rng);
    }

    let positions = [
        Vec3::new(0.0, 0.0, -2.0),
        Vec3::new(0.0, 0.0, 2.0),
        Vec3::new(-1.0, 0.0, -1.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, -1.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 1.0),
    ];
    let moment = Vec3::new(0.0, 0.0, NetworkConfig::default().dipole_magnitude);

    let mut matrix = vec![vec![0.0; N]; N];
    for (a, b) in [(0, 2), (2, 3), (3, 4), (4, 1), (0, 5), (5, 6), (6, 7), (7, 1)] {
        matrix[a][b] = coupling;
        matrix[b][a] = coupling;
    }

    let sites = (0..N)
        .map(|i| DipoleSite {
            position: positions[i],
            moment,
            energy: energies[i],
            role: role_of(i),
        })
        .collect();
    let config_hash = {
        let key = serde_json::json!({ "coupling": coupling, "arm_stds": arm_stds, "mean": mean });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    };
    Ok(Network {
        sites,
        coupling: CouplingSource::Explicit { matrix },
        provenance: Provenance {
            config_hash,
            seed,
            variant: "two_arm_chain".to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_config() -> NetworkConfig {
        NetworkConfig::default()
    }

    #[test]
    fn sphere_network_matches_table_geometry() {
        for seed in 0..20 {
            let net = sample_sphere_network(&table_config(), seed).unwrap();
            assert_eq!(net.len(), 8);
            assert_eq!(net.sites[0].position, Vec3::new(0.0, 0.0, -10.0));
            assert_eq!(net.sites[1].position, Vec3::new(0.0, 0.0, 10.0));
            assert!(net.min_pair_distance() >= 1.0);
            for s in &net.sites[2..] {
                assert!(s.position.norm() <= 10.0);
                assert_eq!(s.role, SiteRole::Bulk);
            }
            for s in &net.sites {
                assert!(((s.moment.norm() - 0.114033) / 0.114033).abs() < 1e-12);
            }
            assert_eq!(net.sites[0].moment, Vec3::new(0.0, 0.0, 0.114033));
        }
    }

    #[test]
    fn two_site_network_is_just_the_terminals() {
        let cfg = NetworkConfig {
            n_sites: 2,
            ..table_config()
        };
        let net = sample_sphere_network(&cfg, 7).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!((net.sites[0].position - net.sites[1].position).norm(), 20.0);
    }

    #[test]
    fn dense_variant_respects_exclusion() {
        let cfg = NetworkConfig::dense();
        for seed in 0..20 {
            let net = sample_sphere_network(&cfg, seed).unwrap();
            assert!(net.min_pair_distance() >= 0.5);
            assert!(net.sites[2..].iter().all(|s| s.position.norm() <= 2.5));
        }
    }

    #[test]
    fn placement_exhaustion_is_reported() {
        let cfg = NetworkConfig {
            radius: 1.0,
            min_separation: 1.5,
            n_sites: 5,
            ..table_config()
        };
        let err = sample_sphere_network_with_limit(&cfg, 1, 1000).unwrap_err();
        assert!(matches!(
            err,
            Error::PlacementExhausted {
                site: 2,
                attempts: 1000
            }
        ));
    }

    #[test]
    fn uniform_and_zero_variance_energies() {
        let e = sample_onsite_energies(EnergyMode::Uniform { mean: 1.5498 }, 8, 3).unwrap();
        assert_eq!(e, vec![1.5498; 8]);
        let e = sample_onsite_energies(EnergyMode::Normal { mean: 1.5498, std: 0.0 }, 3, 3).unwrap();
        assert_eq!(e, vec![1.5498; 3]);
        assert!(sample_onsite_energies(EnergyMode::Uniform { mean: 1.0 }, 0, 3).is_err());
    }

    #[test]
    fn normal_energies_have_configured_moments() {
        let n = 100_000;
        let e = sample_onsite_energies(
            EnergyMode::Normal {
                mean: 1.5498,
                std: 0.0155,
            },
            n,
            11,
        )
        .unwrap();
        let mean = e.iter().sum::<f64>() / n as f64;
        let std = (e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((mean - 1.5498).abs() <= 3.0 * 0.0155 / (n as f64).sqrt());
        assert!((std / 0.0155 - 1.0).abs() < 0.02);
    }

    #[test]
    fn energy_offset_touches_only_bulk_sites() {
        let net = sample_sphere_network(&table_config(), 5).unwrap();
        let before: f64 = net.energies().iter().sum();

        let shifted = apply_energy_offset(&net, 3, 0.0155, 5).unwrap();
        let raised: Vec<usize> = (0..8)
            .filter(|&i| shifted.sites[i].energy != net.sites[i].energy)
            .collect();
        assert_eq!(raised.len(), 3);
        assert!(raised.iter().all(|&i| i >= 2));
        for &i in &raised {
            assert!((shifted.sites[i].energy - net.sites[i].energy - 0.0155).abs() < 1e-15);
        }
        let after: f64 = shifted.energies().iter().sum();
        assert!((after - before - 0.0465).abs() < 1e-12);

        assert_eq!(apply_energy_offset(&net, 0, 0.0155, 5).unwrap().sites, net.sites);

        let all = apply_energy_offset(&net, 6, 0.0155, 5).unwrap();
        let total: f64 = all.energies().iter().sum();
        assert!((total - before - 6.0 * 0.0155).abs() < 1e-12);

        assert!(apply_energy_offset(&net, 7, 0.0155, 5).is_err());
    }

    #[test]
    fn two_arm_chain_structure() {
        let net = build_two_arm_chain(2.5e-3, [15.5e-3, 1.55e-3], 1.5498, 0).unwrap();
        let CouplingSource::Explicit { matrix } = &net.coupling else {
            panic!("expected explicit couplings");
        };
        let upper: Vec<f64> = (0..8)
            .flat_map(|i| (i + 1..8).map(move |j| (i, j)))
            .map(|(i, j)| matrix[i][j])
            .filter(|v| *v != 0.0)
            .collect();
        assert_eq!(upper, vec![2.5e-3; 8]);
        assert_eq!(net.sites[0].energy, 1.5498);
        assert_eq!(net.sites[1].energy, 1.5498);

        let flat = build_two_arm_chain(2.5e-3, [0.0, 0.0], 1.5498, 0).unwrap();
        assert!(flat.sites.iter().all(|s| s.energy == 1.5498));
        assert!(build_two_arm_chain(0.0, [0.0, 0.0], 1.5498, 0).is_err());
    }

    #[test]
    fn two_arm_energy_statistics() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for seed in 0..1000 {
            let net = build_two_arm_chain(2.5e-3, [15.5e-3, 1.55e-3], 1.5498, seed).unwrap();
            a.extend(net.sites[2..5].iter().map(|s| s.energy));
            b.extend(net.sites[5..8].iter().map(|s| s.energy));
        }
        let std = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        assert!((std(&a) / 15.5e-3 - 1.0).abs() < 0.1);
        assert!((std(&b) / 1.55e-3 - 1.0).abs() < 0.1);
    }

    #[test]
    fn bulk_positions_fill_the_ball_uniformly() {
        // E[|r|³/R³] = 1/2 for a volume-uniform law, variance 1/12.
        let mut samples = Vec::new();
        for seed in 0..1700 {
            let net = sample_sphere_network(&table_config(), seed).unwrap();
            samples.extend(net.sites[2..].iter().map(|s| (s.position.norm() / 10.0).powi(3)));
        }
        assert!(samples.len() >= 10_000);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let se = (1.0f64 / 12.0).sqrt() / n.sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let net = sample_sphere_network(&table_config(), 99).unwrap();
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let net = sample_sphere_network(&table_config(), 1).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        value["sites"][3]["energy"] = serde_json::json!("high");
        match Network::from_json(&value.to_string()).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "sites[3].energy"),
            e => panic!("unexpected {e}"),
        }

        let mut value: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        value["sites"][4]["role"] = serde_json::json!("injection");
        match Network::from_json(&value.to_string()).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "sites[4].role"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(table_config().validate().is_ok());
        assert!(NetworkConfig {
            n_sites: 2,
            ..table_config()
        }
        .validate()
        .is_err());
        assert!(NetworkConfig {
            radius: 0.0,
            ..table_config()
        }
        .validate()
        .is_err());
        let two_arm = NetworkConfig {
            variant: NetworkVariant::two_arm_default(),
            ..table_config()
        };
        assert!(two_arm.validate().is_ok());
        assert!(NetworkConfig { n_sites: 9, ..two_arm }.validate().is_err());
    }
}
