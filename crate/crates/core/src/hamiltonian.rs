//! Single-excitation Hamiltonian and its eigenstructure.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constants::COULOMB;
use crate::error::{Error, Result};
use crate::network::{CouplingSource, DipoleSite, Network};

/// Point-dipole interaction energy in eV between two sites.
pub fn dipole_coupling(site_i: &DipoleSite, site_j: &DipoleSite) -> Result<f64> {
    let r = site_j.position - site_i.position;
    let dist2 = r.norm_squared();
    if dist2 == 0.0 {
        return Err(Error::CoincidentSites(0, 1));
    }
    let dist = dist2.sqrt();
    let dist3 = dist2 * dist;
    let dist5 = dist3 * dist2;
    let di = &site_i.moment;
    let dj = &site_j.moment;
    Ok(COULOMB * (di.dot(dj) / dist3 - 3.0 * (r.dot(di) * r.dot(dj)) / dist5))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    /// Real symmetric, eV, indexed like `Network::sites`.
    pub matrix: DMatrix<f64>,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn build_hamiltonian(network: &Network) -> Result<Hamiltonian> {
    let n = network.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (i, site) in network.sites.iter().enumerate() {
        matrix[(i, i)] = site.energy;
    }
    match &network.coupling {
        CouplingSource::DipoleDerived => {
            for i in 0..n {
                for j in i + 1..n {
                    let v = dipole_coupling(&network.sites[i], &network.sites[j])
                        .map_err(|_| Error::CoincidentSites(i, j))?;
                    matrix[(i, j)] = v;
                    matrix[(j, i)] = v;
                }
            }
        }
        CouplingSource::Explicit { matrix: couplings } => {
            if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
                return Err(Error::invalid("coupling", "explicit matrix has wrong shape"));
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        matrix[(i, j)] = couplings[i][j];
                    }
                }
            }
        }
    }
    Ok(Hamiltonian { matrix })
}

/// Eigenpairs sorted by ascending energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    /// Column k is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// |⟨site|v_k⟩|² for every site (rows) and eigenstate (columns).
    pub fn site_support(&self) -> DMatrix<f64> {
        self.eigenvectors.map(|x| x * x)
    }
}

pub fn eigendecompose(h: &Hamiltonian) -> EigenSystem {
    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = SymmetricEigen::new(h.matrix.clone());
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eigenvectors.column(src).into_owned();
        // Sign convention: largest-magnitude component positive.
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    EigenSystem {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// Population standard deviation of consecutive eigenvalue gaps over their mean.
pub fn eigen_gap_relative_std(es: &EigenSystem) -> Result<f64> {
    let n = es.dim();
    if n < 3 {
        return Err(Error::invalid("eigensystem", "need at least three eigenvalues"));
    }
    let gaps: Vec<f64> = es.eigenvalues.as_slice().windows(2).map(|w| w[1] - w[0]).collect();
    let count = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / count;
    if mean == 0.0 {
        return Err(Error::UndefinedStatistic("mean eigenvalue gap is zero"));
    }
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / count;
    Ok(var.sqrt() / mean)
}

/// Overlaps within this of the maximum count as ties; ties go to the lowest index.
pub const DOMINANCE_TIE_TOLERANCE: f64 = 1e-9;

/// Ascending-energy index of the eigenstate with the largest weight on `site`.
pub fn dominant_eigenindex(es: &EigenSystem, site: usize) -> Result<usize> {
    if site >= es.dim() {
        return Err(Error::invalid("site", format!("{site} out of range")));
    }
    let weights: Vec<f64> = es.eigenvectors.row(site).iter().map(|x| x * x).collect();
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(weights
        .iter()
        .position(|&w| w >= max - DOMINANCE_TIE_TOLERANCE)
        .expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{SiteRole, Vec3};
    use proptest::prelude::*;

    fn site(position: [f64; 3], moment: [f64; 3]) -> DipoleSite {
        DipoleSite {
            position: Vec3::from(position),
            moment: Vec3::from(moment),
            energy: 0.0,
            role: SiteRole::Bulk,
        }
    }

    #[test]
    fn terminal_pair_coupling() {
        let a = site([0.0, 0.0, -10.0], [0.0, 0.0, 0.114033]);
        let b = site([0.0, 0.0, 10.0], [0.0, 0.0, 0.114033]);
        // Independent evaluation: collinear moments along r give −2k d²/r³.
        let expected = -2.0 * 1.43996 * 0.114033f64.powi(2) / 20.0f64.powi(3);
        let v = dipole_coupling(&a, &b).unwrap();
        assert!((v - expected).abs() < 1e-18);
        assert!((v - (-4.6811e-6)).abs() < 5e-11);
    }

    #[test]
    fn orthogonal_moments_decouple() {
        let a = site([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let b = site([0.0, 0.0, 2.0], [0.0, 1.0, 0.0]);
        assert_eq!(dipole_coupling(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn side_by_side_parallel_moments() {
        let a = site([0.0, 0.0, 0.0], [0.0, 0.0, 0.114033]);
        let b = site([1.0, 0.0, 0.0], [0.0, 0.0, 0.114033]);
        let v = dipole_coupling(&a, &b).unwrap();
        assert!((v - 1.43996 * 0.114033f64.powi(2)).abs() < 1e-15);
        assert!((v - 0.0187246).abs() < 1e-7);
    }

    #[test]
    fn coincident_sites_are_rejected() {
        let a = site([1.0, 1.0, 1.0], [0.0, 0.0, 0.1]);
        assert!(matches!(dipole_coupling(&a, &a), Err(Error::CoincidentSites(..))));
    }

    #[test]
    fn pauli_x_and_diagonal_spectra() {
        let h = Hamiltonian {
            matrix: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        };
        let es = eigendecompose(&h);
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-15);

        let h = Hamiltonian {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0])),
        };
        let es = eigendecompose(&h);
        assert_eq!(es.eigenvalues.as_slice(), &[1.0, 2.0, 3.0]);
        for site in 0..3 {
            let rank = [2, 0, 1][site];
            assert_eq!(dominant_eigenindex(&es, site).unwrap(), rank);
        }
    }

    #[test]
    fn injection_below_all_others_gives_negative_index_difference() {
        let h = Hamiltonian {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 2.0, 1.0, 3.0])),
        };
        let es = eigendecompose(&h);
        let diff = dominant_eigenindex(&es, 0).unwrap() as i64 - dominant_eigenindex(&es, 1).unwrap() as i64;
        assert!(diff < 0);
    }

    #[test]
    fn gap_statistics() {
        let es = |vals: &[f64]| EigenSystem {
            eigenvalues: DVector::from_column_slice(vals),
            eigenvectors: DMatrix::identity(vals.len(), vals.len()),
        };
        assert_eq!(eigen_gap_relative_std(&es(&[0.0, 1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert!((eigen_gap_relative_std(&es(&[0.0, 1.0, 3.0])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let base = eigen_gap_relative_std(&es(&[0.1, 0.4, 1.3, 1.7])).unwrap();
        let scaled = eigen_gap_relative_std(&es(&[0.25, 1.0, 3.25, 4.25])).unwrap();
        assert!((base - scaled).abs() < 1e-12);
        assert!(matches!(
            eigen_gap_relative_std(&es(&[1.0, 1.0, 1.0])),
            Err(Error::UndefinedStatistic(_))
        ));
        assert!(eigen_gap_relative_std(&es(&[1.0, 2.0])).is_err());
    }

    fn random_symmetric(values: &[f64], n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = values[k];
                m[(j, i)] = values[k];
                k += 1;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn eigendecomposition_reconstructs(values in proptest::collection::vec(-1.0f64..1.0, 36)) {
            let h = Hamiltonian { matrix: random_symmetric(&values, 8) };
            let es = eigendecompose(&h);
            let norm = h.matrix.norm();
            let v = &es.eigenvectors;
            let rebuilt = v * DMatrix::from_diagonal(&es.eigenvalues) * v.transpose();
            prop_assert!((rebuilt - &h.matrix).norm() <= 1e-10 * norm.max(1e-300));
            prop_assert!((v.transpose() * v - DMatrix::identity(8, 8)).norm() <= 1e-10);
            for k in 0..8 {
                let residual = &h.matrix * v.column(k) - v.column(k) * es.eigenvalues[k];
                prop_assert!(residual.norm() <= 1e-10 * norm);
            }
            prop_assert!(es.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn dominant_index_matches_exhaustive_scan(values in proptest::collection::vec(-1.0f64..1.0, 36)) {
            let h = Hamiltonian { matrix: random_symmetric(&values, 8) };
            let es = eigendecompose(&h);
            for site in 0..8 {
                let mut best = 0;
                let mut best_w = -1.0;
                for k in 0..8 {
                    let w = es.eigenvectors[(site, k)].powi(2);
                    if w > best_w + DOMINANCE_TIE_TOLERANCE {
                        best = k;
                        best_w = w;
                    }
                }
                prop_assert_eq!(dominant_eigenindex(&es, site).unwrap(), best);
            }
        }

        #[test]
        fn coupling_symmetry_and_scaling(
            p in proptest::array::uniform3(-5.0f64..5.0),
            q in proptest::array::uniform3(-5.0f64..5.0),
            m in proptest::array::uniform3(-1.0f64..1.0),
            n in proptest::array::uniform3(-1.0f64..1.0),
        ) {
            let a = site(p, m);
            let b = site(q, n);
            prop_assume!((a.position - b.position).norm() > 0.1);
            let v = dipole_coupling(&a, &b).unwrap();
            prop_assert_eq!(v, dipole_coupling(&b, &a).unwrap());

            let scale = |s: &DipoleSite, pos: f64, mom: f64| DipoleSite {
                position: s.position * pos,
                moment: s.moment * mom,
                ..s.clone()
            };
            let doubled = dipole_coupling(&scale(&a, 1.0, 2.0), &scale(&b, 1.0, 2.0)).unwrap();
            // cancellation between the two terms limits accuracy to this scale
            let magnitude = 1.43996 * a.moment.norm() * b.moment.norm()
                / (a.position - b.position).norm().powi(3);
            prop_assert!((doubled - 4.0 * v).abs() <= 1e-12 * 4.0 * magnitude);
            let far = dipole_coupling(&scale(&a, 2.0, 1.0), &scale(&b, 2.0, 1.0)).unwrap();
            prop_assert!((far - v / 8.0).abs() <= 1e-12 * magnitude / 8.0);
        }
    }

    #[test]
    fn hamiltonian_trace_and_symmetry() {
        let net = crate::network::sample_sphere_network(&Default::default(), 4).unwrap();
        let h = build_hamiltonian(&net).unwrap();
        assert_eq!(h.matrix, h.matrix.transpose());
        for i in 0..8 {
            assert_eq!(h.matrix[(i, i)], net.sites[i].energy);
        }
        let trace: f64 = (0..8).map(|i| h.matrix[(i, i)]).sum();
        assert_eq!(trace, net.energies().iter().sum::<f64>());
    }

    #[test]
    fn two_arm_hamiltonian_is_nearest_neighbour() {
        let net = crate::network::build_two_arm_chain(2.5e-3, [15.5e-3, 1.55e-3], 1.5498, 3).unwrap();
        let h = build_hamiltonian(&net).unwrap();
        let pairs = (0..8)
            .flat_map(|i| (i + 1..8).map(move |j| (i, j)))
            .filter(|&(i, j)| h.matrix[(i, j)] != 0.0)
            .count();
        assert_eq!(pairs, 8);
    }
}
