//! Liouvillian generators for the network plus an appended shelf level.
//!
//! Density matrices are vectorised column-major, so `ρ_ij` sits at index
//! `i + j·D` and the map ρ ↦ XρY has superoperator `Yᵀ ⊗ X`.
//!
//! Population leaves the extraction site into the shelf at rate γ_ext and is
//! re-injected from the shelf onto the injection site at rate γ_inj, closing
//! the loop so that a unique steady state exists.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::environment::{noise_power, Environment};
use crate::error::{Error, Result};
use crate::hamiltonian::{eigendecompose, EigenSystem, Hamiltonian};
use crate::network::{EXTRACTION, INJECTION};

/// Eigenenergy splittings closer than this (eV) share a frequency bin.
pub const FREQUENCY_BIN_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_TRANSFER_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathCorrelation {
    /// One bath per site: S_mn = δ_mn·S.
    #[default]
    Independent,
    /// A single bath seen by every site: S_mn = S for all m, n.
    Correlated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystem {
    pub hamiltonian: Hamiltonian,
    pub gamma_inj: f64,
    pub gamma_ext: f64,
    pub correlation: BathCorrelation,
    sites: EigenSystem,
}

impl OpenSystem {
    pub fn new(hamiltonian: Hamiltonian, gamma_inj: f64, gamma_ext: f64) -> Result<Self> {
        if hamiltonian.dim() < 2 {
            return Err(Error::invalid("hamiltonian", "need the two terminal sites"));
        }
        if !(gamma_inj >= 0.0 && gamma_ext >= 0.0) {
            return Err(Error::invalid("gamma_inj", "transfer rates must be non-negative"));
        }
        let sites = eigendecompose(&hamiltonian);
        Ok(Self {
            hamiltonian,
            gamma_inj,
            gamma_ext,
            correlation: BathCorrelation::Independent,
            sites,
        })
    }

    pub fn with_correlation(mut self, correlation: BathCorrelation) -> Self {
        self.correlation = correlation;
        self
    }

    /// Number of physical sites N.
    pub fn n_sites(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn shelf(&self) -> usize {
        self.n_sites()
    }

    /// N + 1.
    pub fn dim(&self) -> usize {
        self.n_sites() + 1
    }

    pub fn site_eigensystem(&self) -> &EigenSystem {
        &self.sites
    }

    /// Hamiltonian on sites + shelf; the shelf has zero energy and no couplings.
    pub fn extended_hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut h = DMatrix::zeros(n + 1, n + 1);
        h.view_mut((0, 0), (n, n)).copy_from(&self.hamiltonian.matrix);
        h
    }

    /// Site eigenbasis with the shelf appended untouched: U = V ⊕ 1.
    pub fn extended_eigensystem(&self) -> EigenSystem {
        let n = self.n_sites();
        let mut values = self.sites.eigenvalues.clone().resize_vertically(n + 1, 0.0);
        values[n] = 0.0;
        let mut vectors = DMatrix::zeros(n + 1, n + 1);
        vectors.view_mut((0, 0), (n, n)).copy_from(&self.sites.eigenvectors);
        vectors[(n, n)] = 1.0;
        EigenSystem {
            eigenvalues: values,
            eigenvectors: vectors,
        }
    }

    pub fn dephasing_operators(&self) -> Vec<DMatrix<f64>> {
        (0..self.n_sites())
            .map(|i| dephasing_operator(i, self.dim()).expect("site index in range"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lindblad,
    Redfield,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    /// D²×D² generator acting on column-stacked density matrices.
    pub matrix: DMatrix<Complex64>,
    pub dim: usize,
    pub method: Method,
    /// Noise strength Γ this generator was built for.
    pub gamma: f64,
    pub environment: Option<Environment>,
}

impl Liouvillian {
    pub fn from_parts(
        coherent: &DMatrix<f64>,
        dissipative: &DMatrix<f64>,
        dim: usize,
        method: Method,
        gamma: f64,
        environment: Option<Environment>,
    ) -> Self {
        let matrix = dissipative.zip_map(coherent, Complex64::new);
        Self {
            matrix,
            dim,
            method,
            gamma,
            environment,
        }
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// ‖L†(𝕀)‖: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut acc = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let row = i + i * d;
            for (col, a) in acc.iter_mut().enumerate() {
                *a += self.matrix[(row, col)];
            }
        }
        acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.dim;
        let v = DMatrix::from_column_slice(d * d, 1, rho.as_slice());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(d, d, out.as_slice())
    }
}

/// 2|i⟩⟨i| − 𝕀 on the D-level space; `i` must be a physical site, not the shelf.
pub fn dephasing_operator(i: usize, dim: usize) -> Result<DMatrix<f64>> {
    if dim < 2 || i >= dim - 1 {
        return Err(Error::invalid(
            "site",
            format!("{i} is not a physical site of a {dim}-level system"),
        ));
    }
    let mut a = DMatrix::from_diagonal_element(dim, dim, -1.0);
    a[(i, i)] = 1.0;
    Ok(a)
}

/// Superoperator of ρ ↦ XρY.
fn sandwich(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    y.transpose().kronecker(x)
}

/// Superoperator of D[L]ρ = LρL† − ½{L†L, ρ} for real L.
fn dissipator(l: &DMatrix<f64>) -> DMatrix<f64> {
    let d = l.nrows();
    let id = DMatrix::identity(d, d);
    let ldl = l.transpose() * l;
    sandwich(l, &l.transpose()) - (sandwich(&ldl, &id) + sandwich(&id, &ldl)) * 0.5
}

fn transfer_operator(dim: usize, to: usize, from: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    a[(to, from)] = 1.0;
    a
}

/// −i[H, ρ] split as (imaginary part, real part = 0) and the injection /
/// extraction dissipators (real).
fn coherent_and_transfer(sys: &OpenSystem) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = sys.dim();
    let h = sys.extended_hamiltonian();
    let id = DMatrix::identity(d, d);
    // −i(Hρ − ρH): imaginary coefficient matrix.
    let commutator = (sandwich(&h, &id) - sandwich(&id, &h)) * -1.0;
    let a_inj = transfer_operator(d, INJECTION, sys.shelf());
    let a_ext = transfer_operator(d, sys.shelf(), EXTRACTION);
    let transfer = dissipator(&a_inj) * sys.gamma_inj + dissipator(&a_ext) * sys.gamma_ext;
    (commutator, transfer)
}

/// Σ_i D[A_deph,i] with unit rate.
pub fn lindblad_dephasing_superoperator(sys: &OpenSystem) -> DMatrix<f64> {
    let d = sys.dim();
    let mut total = DMatrix::zeros(d * d, d * d);
    for a in sys.dephasing_operators() {
        total += dissipator(&a);
    }
    total
}

pub fn build_lindblad(sys: &OpenSystem, gamma: f64) -> Result<Liouvillian> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be non-negative"));
    }
    let (coherent, transfer) = coherent_and_transfer(sys);
    let dissipative = transfer + lindblad_dephasing_superoperator(sys) * gamma;
    Ok(Liouvillian::from_parts(
        &coherent,
        &dissipative,
        sys.dim(),
        Method::Lindblad,
        gamma,
        None,
    ))
}

/// Signed transition frequencies between eigenstates, binned.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDecomposition {
    /// Distinct binned frequencies, ascending.
    pub frequencies: Vec<f64>,
    /// `pair_frequency[(a, b)]` = binned E_b − E_a (energy released going b → a).
    pub pair_frequency: DMatrix<f64>,
    pair_bin: DMatrix<usize>,
}

impl FrequencyDecomposition {
    pub fn new(es: &EigenSystem) -> Self {
        let d = es.dim();
        let energies = &es.eigenvalues;

        let mut magnitudes: Vec<f64> = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                magnitudes.push((energies[b] - energies[a]).abs());
            }
        }
        let mut sorted = magnitudes.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();

        // Greedy clustering from the smallest magnitude; each bin spans < tolerance.
        let mut bins: Vec<(f64, Vec<f64>)> = Vec::new();
        for &m in &sorted {
            match bins.last_mut() {
                Some((start, members)) if m - *start < FREQUENCY_BIN_TOLERANCE => members.push(m),
                _ => bins.push((m, vec![m])),
            }
        }
        let representatives: Vec<f64> = bins
            .iter()
            .map(|(start, members)| {
                if *start < FREQUENCY_BIN_TOLERANCE {
                    0.0
                } else {
                    members.iter().sum::<f64>() / members.len() as f64
                }
            })
            .collect();
        let representative = |m: f64| {
            let idx = bins.partition_point(|(start, _)| *start <= m) - 1;
            representatives[idx]
        };

        let mut pair_frequency = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let raw = energies[b] - energies[a];
                let rep = representative(raw.abs());
                pair_frequency[(a, b)] = if raw < 0.0 && rep > 0.0 { -rep } else { rep };
            }
        }

        let mut frequencies: Vec<f64> = pair_frequency.iter().cloned().collect();
        frequencies.sort_by(f64::total_cmp);
        frequencies.dedup();
        let pair_bin = pair_frequency.map(|w| {
            frequencies
                .binary_search_by(|f| f.total_cmp(&w))
                .expect("frequency present")
        });
        Self {
            frequencies,
            pair_frequency,
            pair_bin,
        }
    }

    /// The part of an eigenbasis operator that releases energy `frequencies[bin]`.
    pub fn component(&self, op_eigenbasis: &DMatrix<f64>, bin: usize) -> DMatrix<f64> {
        DMatrix::from_fn(op_eigenbasis.nrows(), op_eigenbasis.ncols(), |a, b| {
            if self.pair_bin[(a, b)] == bin {
                op_eigenbasis[(a, b)]
            } else {
                0.0
            }
        })
    }
}

/// Non-secular Bloch-Redfield phonon superoperator for coupling operators
/// `ops` (given in the site basis) with eigenbasis `es` of the full space.
///
/// D(ρ) = ½ Σ_m [Ã_m ρ A_m − A_m Ã_m ρ + A_m ρ Ã_m† − ρ Ã_m† A_m], with
/// Ã_m = Σ_ω S(ω) A_m(ω). Lamb shifts are dropped.
pub fn redfield_superoperator(
    es: &EigenSystem,
    ops: &[DMatrix<f64>],
    env: &Environment,
    correlation: BathCorrelation,
) -> Result<DMatrix<f64>> {
    env.validate()?;
    let d = es.dim();
    let u = &es.eigenvectors;
    let freqs = FrequencyDecomposition::new(es);

    let mut rates = Vec::with_capacity(freqs.frequencies.len());
    for &w in &freqs.frequencies {
        rates.push(noise_power(env, w)?);
    }
    let weight = DMatrix::from_fn(d, d, |a, b| rates[freqs.pair_bin[(a, b)]]);

    let filtered = |a_site: &DMatrix<f64>| {
        let a_eig = u.transpose() * a_site * u;
        let tilde_eig = a_eig.component_mul(&weight);
        u * tilde_eig * u.transpose()
    };

    let pairs: Vec<(DMatrix<f64>, DMatrix<f64>)> = match correlation {
        BathCorrelation::Independent => ops.iter().map(|a| (a.clone(), filtered(a))).collect(),
        BathCorrelation::Correlated => {
            let total = ops.iter().fold(DMatrix::zeros(d, d), |acc: DMatrix<f64>, a| acc + a);
            let tilde = filtered(&total);
            vec![(total, tilde)]
        }
    };

    let id = DMatrix::identity(d, d);
    let mut out = DMatrix::zeros(d * d, d * d);
    for (a, tilde) in &pairs {
        let a_tilde = a * tilde;
        let tilde_t_a = tilde.transpose() * a;
        out += sandwich(tilde, a);
        out -= sandwich(&a_tilde, &id);
        out += sandwich(a, &tilde.transpose());
        out -= sandwich(&id, &tilde_t_a);
    }
    Ok(out * 0.5)
}

pub fn build_redfield(sys: &OpenSystem, env: &Environment) -> Result<Liouvillian> {
    let (coherent, transfer) = coherent_and_transfer(sys);
    let phonon = redfield_superoperator(
        &sys.extended_eigensystem(),
        &sys.dephasing_operators(),
        env,
        sys.correlation,
    )?;
    Ok(Liouvillian::from_parts(
        &coherent,
        &(transfer + phonon),
        sys.dim(),
        Method::Redfield,
        env.density.gamma(),
        Some(*env),
    ))
}

/// Generator affine in the noise strength: L(Γ) = base + Γ·slope.
#[derive(Debug, Clone)]
pub struct GeneratorPencil {
    pub coherent: DMatrix<f64>,
    pub base: DMatrix<f64>,
    pub slope: DMatrix<f64>,
    pub dim: usize,
    pub method: Method,
    /// Environment at unit Γ, for Redfield pencils.
    pub environment: Option<Environment>,
}

impl GeneratorPencil {
    pub fn lindblad(sys: &OpenSystem) -> Self {
        let (coherent, transfer) = coherent_and_transfer(sys);
        Self {
            coherent,
            base: transfer,
            slope: lindblad_dephasing_superoperator(sys),
            dim: sys.dim(),
            method: Method::Lindblad,
            environment: None,
        }
    }

    /// Every noise-power spectrum here is linear in Γ, so one unit-Γ build suffices.
    pub fn redfield(sys: &OpenSystem, env: &Environment) -> Result<Self> {
        let unit = Environment {
            density: env.density.with_gamma(1.0),
            ..*env
        };
        let (coherent, transfer) = coherent_and_transfer(sys);
        let slope = redfield_superoperator(
            &sys.extended_eigensystem(),
            &sys.dephasing_operators(),
            &unit,
            sys.correlation,
        )?;
        Ok(Self {
            coherent,
            base: transfer,
            slope,
            dim: sys.dim(),
            method: Method::Redfield,
            environment: Some(unit),
        })
    }

    pub fn at(&self, gamma: f64) -> Liouvillian {
        let dissipative = &self.base + &self.slope * gamma;
        let environment = self.environment.map(|env| Environment {
            density: env.density.with_gamma(gamma),
            ..env
        });
        Liouvillian::from_parts(&self.coherent, &dissipative, self.dim, self.method, gamma, environment)
    }
}
