//! Steady states as normalised null vectors of the Liouvillian.
//!
//! Generators preserve Hermiticity, so they are solved in the real
//! orthonormal basis {E_ii, (E_ij + E_ji)/√2, i(E_ij − E_ji)/√2}. In that basis
//! the Frobenius norms of ρ and Lρ equal the Euclidean norms of their
//! coordinate vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GeneratorPencil, Liouvillian};
use crate::error::{Error, Result};
use crate::network::EXTRACTION;

pub const TRACE_TOLERANCE: f64 = 1e-5;
pub const POPULATION_TOLERANCE: f64 = 1e-5;
pub const EIGENVALUE_TOLERANCE: f64 = 1e-4;
/// Accepted ‖Lρ‖ relative to ‖L‖·‖ρ‖.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Singular values below this fraction of the largest span the null space.
/// Physical relaxation rates in sparse dipole networks reach 1e-13 of ‖L‖,
/// so this sits at the rounding floor of an 81×81 factorisation.
pub const NULL_SPACE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisElement {
    Diagonal(usize),
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

fn hermitian_basis(d: usize) -> Vec<BasisElement> {
    let mut basis: Vec<BasisElement> = (0..d).map(BasisElement::Diagonal).collect();
    for i in 0..d {
        for j in i + 1..d {
            basis.push(BasisElement::Symmetric(i, j));
            basis.push(BasisElement::Antisymmetric(i, j));
        }
    }
    basis
}

/// Column-stacked entries of a basis element: (index, coefficient).
fn basis_entries(e: BasisElement, d: usize) -> ([(usize, Complex64); 2], usize) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = (0, Complex64::new(0.0, 0.0));
    match e {
        BasisElement::Diagonal(i) => ([(i + i * d, Complex64::new(1.0, 0.0)), zero], 1),
        BasisElement::Symmetric(i, j) => (
            [(i + j * d, Complex64::new(s, 0.0)), (j + i * d, Complex64::new(s, 0.0))],
            2,
        ),
        BasisElement::Antisymmetric(i, j) => (
            [
                (i + j * d, Complex64::new(0.0, s)),
                (j + i * d, Complex64::new(0.0, -s)),
            ],
            2,
        ),
    }
}

/// A Hermiticity-preserving generator written in the real Hermitian basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLiouvillian {
    pub matrix: DMatrix<f64>,
    pub dim: usize,
}

impl RealLiouvillian {
    pub fn from_complex(matrix: &DMatrix<Complex64>, dim: usize) -> Self {
        let basis = hermitian_basis(dim);
        let n = basis.len();
        assert_eq!(matrix.nrows(), n, "superoperator size does not match dim²");
        let entries: Vec<_> = basis.iter().map(|&e| basis_entries(e, dim)).collect();

        // Column l: L applied to B_l.
        let mut applied = DMatrix::<Complex64>::zeros(n, n);
        for (l, (cols, count)) in entries.iter().enumerate() {
            for &(q, c) in &cols[..*count] {
                let mut target = applied.column_mut(l);
                target.axpy(c, &matrix.column(q), Complex64::new(1.0, 0.0));
            }
        }
        let mut real = DMatrix::zeros(n, n);
        for (k, (rows, count)) in entries.iter().enumerate() {
            for l in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(p, c) in &rows[..*count] {
                    acc += c.conj() * applied[(p, l)];
                }
                real[(k, l)] = acc.re;
            }
        }
        Self { matrix: real, dim }
    }

    pub fn from_liouvillian(l: &Liouvillian) -> Self {
        Self::from_complex(&l.matrix, l.dim)
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// `GeneratorPencil` converted to the real basis once, for fast Γ sweeps.
#[derive(Debug, Clone)]
pub struct RealPencil {
    base: DMatrix<f64>,
    slope: DMatrix<f64>,
    dim: usize,
}

impl RealPencil {
    pub fn new(pencil: &GeneratorPencil) -> Self {
        let base = pencil.base.zip_map(&pencil.coherent, Complex64::new);
        let slope = pencil.slope.map(|re| Complex64::new(re, 0.0));
        Self {
            base: RealLiouvillian::from_complex(&base, pencil.dim).matrix,
            slope: RealLiouvillian::from_complex(&slope, pencil.dim).matrix,
            dim: pencil.dim,
        }
    }

    pub fn at(&self, gamma: f64) -> RealLiouvillian {
        RealLiouvillian {
            matrix: &self.base + &self.slope * gamma,
            dim: self.dim,
        }
    }
}

/// Coordinates in the Hermitian basis → D×D matrix.
pub fn from_real_coordinates(x: &DVector<f64>, d: usize) -> DMatrix<Complex64> {
    let mut rho = DMatrix::zeros(d, d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (k, e) in hermitian_basis(d).into_iter().enumerate() {
        match e {
            BasisElement::Diagonal(i) => rho[(i, i)] += Complex64::new(x[k], 0.0),
            BasisElement::Symmetric(i, j) => {
                rho[(i, j)] += Complex64::new(s * x[k], 0.0);
                rho[(j, i)] += Complex64::new(s * x[k], 0.0);
            }
            BasisElement::Antisymmetric(i, j) => {
                rho[(i, j)] += Complex64::new(0.0, s * x[k]);
                rho[(j, i)] += Complex64::new(0.0, -s * x[k]);
            }
        }
    }
    rho
}

/// D×D matrix → coordinates of its Hermitian part.
pub fn to_real_coordinates(rho: &DMatrix<Complex64>) -> DVector<f64> {
    let d = rho.nrows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let basis = hermitian_basis(d);
    DVector::from_iterator(
        basis.len(),
        basis.into_iter().map(|e| match e {
            BasisElement::Diagonal(i) => rho[(i, i)].re,
            BasisElement::Symmetric(i, j) => s * (rho[(i, j)].re + rho[(j, i)].re),
            BasisElement::Antisymmetric(i, j) => s * (rho[(i, j)].im - rho[(j, i)].im),
        }),
    )
}

fn coordinate_trace(x: &DVector<f64>, d: usize) -> f64 {
    x.rows(0, d).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("matrix", "density matrix must be square"));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn pure_state(d: usize, level: usize) -> Self {
        let mut matrix = DMatrix::zeros(d, d);
        matrix[(level, level)] = Complex64::new(1.0, 0.0);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn population(&self, level: usize) -> f64 {
        self.matrix[(level, level)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub trace_ok: bool,
    pub populations_ok: bool,
    pub eigenvalues_ok: bool,
    /// ‖Lρ‖ when the state came from a solve.
    pub residual: Option<f64>,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.trace_ok && self.populations_ok && self.eigenvalues_ok
    }
}

pub fn validate_state(rho: &DensityMatrix) -> ValidityReport {
    let trace = rho.trace();
    let trace_ok = (trace - Complex64::new(1.0, 0.0)).norm() <= TRACE_TOLERANCE;
    let populations_ok = (0..rho.dim()).all(|i| rho.population(i) >= -POPULATION_TOLERANCE);
    let eigenvalues_ok = rho
        .eigenvalues()
        .iter()
        .all(|&v| (-EIGENVALUE_TOLERANCE..=1.0 + EIGENVALUE_TOLERANCE).contains(&v));
    ValidityReport {
        trace_ok,
        populations_ok,
        eigenvalues_ok,
        residual: None,
    }
}

/// ⟨extraction|ρ|extraction⟩.
pub fn extraction_efficiency(rho: &DensityMatrix) -> f64 {
    rho.population(EXTRACTION)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖Lρ‖ for the returned (normalised) state.
    pub residual: f64,
    pub null_dimension: usize,
}

impl SteadyState {
    pub fn degenerate(&self) -> bool {
        self.null_dimension > 1
    }

    pub fn report(&self) -> ValidityReport {
        ValidityReport {
            residual: Some(self.residual),
            ..validate_state(&self.rho)
        }
    }

    /// Valid for peak finding: passes every screen and is unique.
    pub fn usable(&self) -> bool {
        !self.degenerate() && self.report().valid()
    }
}

pub fn solve_steady_state(l: &Liouvillian) -> Result<SteadyState> {
    solve_real(&RealLiouvillian::from_liouvillian(l))
}

/// Solves with the trace condition replacing the first population balance
/// row, which is redundant for any trace-preserving generator. Falls back to
/// an SVD null-space extraction when that system is singular or its solution
/// cannot be a density matrix.
pub fn solve_real(l: &RealLiouvillian) -> Result<SteadyState> {
    let d = l.dim;
    let n = d * d;
    let norm = l.norm();
    if !norm.is_finite() {
        return Err(Error::SolverFailure {
            smallest: f64::NAN,
            norm,
        });
    }

    let mut a = l.matrix.clone();
    for k in 0..n {
        a[(0, k)] = if k < d { 1.0 } else { 0.0 };
    }
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    if let Some(x) = a.lu().solve(&rhs) {
        // A density matrix with unit trace has Frobenius norm at most one.
        if x.iter().all(|v| v.is_finite()) && x.norm() <= 1.0 + 1e-6 {
            let residual = (&l.matrix * &x).norm();
            if residual <= RESIDUAL_TOLERANCE * norm * x.norm() {
                return Ok(finish(x, d, residual, 1));
            }
        }
    }
    solve_by_svd(l)
}

/// Null space from singular vectors; picks the element of largest trace.
pub fn solve_by_svd(l: &RealLiouvillian) -> Result<SteadyState> {
    let d = l.dim;
    let n = d * d;
    let norm = l.norm();
    let svd = l.matrix.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let largest = sigma.max();
    let smallest = sigma.min();

    let mut null: Vec<DVector<f64>> = (0..n)
        .filter(|&k| sigma[k] <= NULL_SPACE_TOLERANCE * largest)
        .map(|k| v_t.row(k).transpose())
        .collect();
    if null.is_empty() {
        let k = sigma.imin();
        null.push(v_t.row(k).transpose());
    }
    let null_dimension = null.len();

    // Projection of the trace functional onto the (orthonormal) null space
    // maximises trace at fixed norm.
    let mut x = DVector::zeros(n);
    for v in &null {
        x += v * coordinate_trace(v, d);
    }
    let trace = coordinate_trace(&x, d);
    if !(trace.abs() > 1e-12 * x.norm()) {
        return Err(Error::SolverFailure { smallest, norm });
    }
    x /= trace;
    let residual = (&l.matrix * &x).norm();
    if residual > RESIDUAL_TOLERANCE * norm * x.norm() {
        return Err(Error::SolverFailure { smallest, norm });
    }
    Ok(finish(x, d, residual, null_dimension))
}

fn finish(x: DVector<f64>, d: usize, residual: f64, null_dimension: usize) -> SteadyState {
    // Real coordinates give a Hermitian matrix by construction.
    SteadyState {
        rho: DensityMatrix {
            matrix: from_real_coordinates(&x, d),
        },
        residual,
        null_dimension,
    }
}
