//! Process tomography in the two-qubit Pauli product basis.
//!
//! ε(ρ) = Σ_mn χ_mn E_m ρ E_n†, with E_{4a+b} = σ_a ⊗ σ_b and σ = (I, X, Y, Z).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};

use super::state::{canonical_input_states, DensityMatrix, NUM_SETTINGS};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitize, max_abs_diff, min_eigenvalue, project_psd_unit_trace, trace,
    uhlmann_fidelity, C64, I, ONE, ZERO,
};

/// Dimension of the two-qubit operator basis.
pub const PAULI_DIM: usize = 16;

const PROCESS_PSD_TOLERANCE: f64 = 1e-6;

fn single_paulis() -> [Matrix2<C64>; 4] {
    [
        Matrix2::new(ONE, ZERO, ZERO, ONE),
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// The 16 Pauli products, I-major.
pub fn pauli_basis() -> &'static [Matrix4<C64>; PAULI_DIM] {
    static BASIS: OnceLock<[Matrix4<C64>; PAULI_DIM]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let p = single_paulis();
        std::array::from_fn(|k| {
            let (a, b) = (&p[k / 4], &p[k % 4]);
            Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
        })
    })
}

/// "II", "IX", ..., "ZZ".
pub fn pauli_label(index: usize) -> String {
    const NAMES: [char; 4] = ['I', 'X', 'Y', 'Z'];
    format!("{}{}", NAMES[index / 4], NAMES[index % 4])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix(DMatrix<C64>);

impl ChiMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.shape() != (PAULI_DIM, PAULI_DIM) {
            return Err(Error::domain(format!("chi matrix must be 16x16, got {:?}", matrix.shape())));
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.0[(m, n)]
    }

    /// Σ_mn χ_mn E_m ρ E_n†
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let basis = pauli_basis();
        let mut out = Matrix4::zeros();
        for m in 0..PAULI_DIM {
            let left = basis[m] * rho;
            for n in 0..PAULI_DIM {
                let c = self.0[(m, n)];
                if c != ZERO {
                    out += left * basis[n].adjoint() * c;
                }
            }
        }
        out
    }

    /// Largest entrywise deviation of Σ_mn χ_mn E_n† E_m from the identity.
    pub fn trace_preservation_defect(&self) -> f64 {
        let basis = pauli_basis();
        let mut acc = Matrix4::<C64>::zeros();
        for m in 0..PAULI_DIM {
            for n in 0..PAULI_DIM {
                acc += basis[n].adjoint() * basis[m] * self.0[(m, n)];
            }
        }
        (acc - Matrix4::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn rank(&self, tolerance: f64) -> usize {
        crate::linalg::hermitian_eigen(&self.0)
            .0
            .iter()
            .filter(|&&l| l > tolerance)
            .count()
    }

    pub fn max_abs_diff(&self, other: &ChiMatrix) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

/// χ of the unitary channel ρ ↦ U ρ U†: χ = u u† with u_m = Tr(E_m† U)/4.
pub fn chi_from_unitary(u: &Matrix4<C64>) -> ChiMatrix {
    let coeffs = DVector::from_iterator(
        PAULI_DIM,
        pauli_basis().iter().map(|e| (e.adjoint() * u).trace() / 4.0),
    );
    ChiMatrix(&coeffs * coeffs.adjoint())
}

/// Maps vec(χ) to the stacked outputs for the canonical inputs.
fn process_system() -> &'static nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn> {
    static LU: OnceLock<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>> = OnceLock::new();
    LU.get_or_init(|| {
        let basis = pauli_basis();
        let inputs = canonical_input_states();
        let n = PAULI_DIM * PAULI_DIM;
        let mut a = DMatrix::zeros(n, n);
        for (k, rho) in inputs.iter().enumerate() {
            for m in 0..PAULI_DIM {
                let left = basis[m] * rho.matrix();
                for nn in 0..PAULI_DIM {
                    let term = left * basis[nn].adjoint();
                    for i in 0..4 {
                        for j in 0..4 {
                            a[(16 * k + 4 * i + j, PAULI_DIM * m + nn)] = term[(i, j)];
                        }
                    }
                }
            }
        }
        a.lu()
    })
}

/// Unconstrained linear-inversion χ from the outputs of the 16 canonical inputs.
pub fn qpt_linear(outputs: &[DensityMatrix]) -> Result<ChiMatrix> {
    if outputs.len() != NUM_SETTINGS {
        return Err(Error::domain(format!(
            "process tomography needs {NUM_SETTINGS} output states, got {}",
            outputs.len()
        )));
    }
    let mut rhs = DVector::zeros(PAULI_DIM * PAULI_DIM);
    for (k, out) in outputs.iter().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                rhs[16 * k + 4 * i + j] = out.matrix()[(i, j)];
            }
        }
    }
    let x = process_system()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("process tomography system is singular"))?;
    let chi = DMatrix::from_fn(PAULI_DIM, PAULI_DIM, |m, n| x[PAULI_DIM * m + n]);
    Ok(ChiMatrix(hermitize(&chi)))
}

/// Linear inversion followed by projection onto unit-trace PSD matrices.
pub fn qpt(outputs: &[DensityMatrix]) -> Result<ChiMatrix> {
    let raw = qpt_linear(outputs)?;
    Ok(ChiMatrix(project_psd_unit_trace(&raw.0)?))
}

/// Uhlmann fidelity between two process matrices.
pub fn process_fidelity(chi_exp: &ChiMatrix, chi_ideal: &ChiMatrix) -> Result<f64> {
    for (name, chi) in [("experimental", chi_exp), ("ideal", chi_ideal)] {
        let lo = min_eigenvalue(&chi.0);
        if lo < -PROCESS_PSD_TOLERANCE {
            return Err(Error::domain(format!(
                "{name} chi matrix is not positive semidefinite (eigenvalue {lo:.3e})"
            )));
        }
    }
    uhlmann_fidelity(&chi_exp.0, &chi_ideal.0, PROCESS_PSD_TOLERANCE)
}
