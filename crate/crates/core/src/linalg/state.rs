// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest density-operator dimension accepted (12 qubits).
pub const MAX_DIM: usize = 1 << 12;

const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Normalized pure state on `m >= 1` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "state dimension {dim} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Real two-component qubit state `a|0> + b|1>`.
    pub(crate) fn qubit(a: f64, b: f64) -> Self {
        Self {
            amps: vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} >= dim {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> u32 {
        self.amps.len().trailing_zeros()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Domain(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = DVector::from_column_slice(&self.amps);
        DensityMatrix {
            entries: &v * v.adjoint(),
        }
    }
}

/// Kronecker product of the factors, first factor most significant.
pub fn tensor(states: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::Domain("tensor product of an empty list".into()))?;
    let mut amps = first.amps.clone();
    for s in rest {
        amps = amps
            .iter()
            .flat_map(|a| s.amps.iter().map(move |b| a * b))
            .collect();
    }
    if amps.len() > MAX_DIM {
        return Err(Error::Capacity {
            what: "state dimension",
            value: amps.len(),
            limit: MAX_DIM,
        });
    }
    Ok(StateVector { amps })
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates `entries` as a density operator.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim == 0 {
            return Err(Error::Domain(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dim(dim)?;
        let herm_err = max_entry_norm(&(&entries - entries.adjoint()));
        if herm_err > NORM_TOL {
            return Err(Error::Domain(format!("matrix is not Hermitian (err {herm_err:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { entries })
    }

    /// Convex combination `sum w_i |psi_i><psi_i|` of pure states.
    pub fn mixture(components: &[(f64, &StateVector)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::Domain("mixture of no states".into()))?;
        let dim = first.dim();
        check_dim(dim)?;
        let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, psi) in components {
            if psi.dim() != dim {
                return Err(Error::Domain("mixture components differ in dimension".into()));
            }
            if *w < 0.0 {
                return Err(Error::Domain(format!("negative mixture weight {w}")));
            }
            let v = DVector::from_column_slice(psi.amps());
            entries += (&v * v.adjoint()) * Complex64::new(*w, 0.0);
        }
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Numerical rank with eigenvalue cutoff `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().into_iter().filter(|&l| l > tol).count()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_entry_norm(&(&self.entries - &other.entries))
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(dim_mismatch(self.dim(), psi.dim()));
        }
        let v = DVector::from_column_slice(psi.amps());
        Ok((v.adjoint() * &self.entries * &v)[(0, 0)].re)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::Capacity {
            what: "density matrix dimension",
            value: dim,
            limit: MAX_DIM,
        });
    }
    Ok(())
}

fn dim_mismatch(a: usize, b: usize) -> Error {
    Error::Domain(format!("dimension mismatch: {a} vs {b}"))
}

/// Largest modulus among the entries.
pub fn max_entry_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig
        .eigenvalues
        .map(|l| Complex64::new(if l < PSD_TOL { 0.0 } else { l }.sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Root fidelity `tr sqrt(sqrt(rho) sigma sqrt(rho))`; equals `|<psi|phi>|` on
/// pure states.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(dim_mismatch(rho.dim(), sigma.dim()));
    }
    let s = psd_sqrt(&rho.entries);
    let inner = &s * &sigma.entries * &s;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let f: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|l| if l < PSD_TOL { 0.0 } else { l.sqrt() })
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `1/2 sum |lambda_i(rho - sigma)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(dim_mismatch(rho.dim(), sigma.dim()));
    }
    let diff = &rho.entries - &sigma.entries;
    let d: f64 = hermitian_eigenvalues(&diff).into_iter().map(f64::abs).sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}
