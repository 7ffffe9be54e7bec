use nalgebra::Matrix4;

use super::state::DensityMatrix;
use crate::error::Result;
use crate::linalg::{
    hermitian_eigen, psd_sqrt, spectral_sqrt, to_dynamic, uhlmann_fidelity, C64, ONE, ZERO,
};

const PSD_TOLERANCE: f64 = 1e-8;

/// Uhlmann fidelity [Tr √(√ρ σ √ρ)]².
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    uhlmann_fidelity(&to_dynamic(rho.matrix()), &to_dynamic(sigma.matrix()), PSD_TOLERANCE)
}

/// Tr ρ²
pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho.matrix() * rho.matrix()).trace().re
}

/// (4/3)(1 − Tr ρ²): 0 for pure states, 1 for the maximally mixed state.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    (4.0 / 3.0) * (1.0 - purity(rho))
}

fn sigma_y_sigma_y() -> Matrix4<C64> {
    // σ_Y ⊗ σ_Y is real: anti-diagonal (-1, 1, 1, -1).
    let mut m = Matrix4::from_element(ZERO);
    m[(0, 3)] = -ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 0)] = -ONE;
    m
}

/// Wootters concurrence.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let yy = sigma_y_sigma_y();
    let m = rho.matrix();
    let flipped = yy * m.conjugate() * yy;
    // Eigenvalues of ρ ρ̃ equal those of the Hermitian √ρ ρ̃ √ρ.
    let root = psd_sqrt(&to_dynamic(m));
    let inner = &root * to_dynamic(&flipped) * &root;
    let (values, _) = hermitian_eigen(&inner);
    let mut lambdas = spectral_sqrt(&values);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Squared concurrence.
pub fn tangle(rho: &DensityMatrix) -> f64 {
    concurrence(rho).powi(2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomo::BellState;
    use nalgebra::Vector4;

    #[test]
    fn fidelity_examples() {
        let phi = BellState::PhiPlus.density();
        let psi = BellState::PsiMinus.density();
        let mixed = DensityMatrix::maximally_mixed();
        assert!((state_fidelity(&phi, &phi).unwrap() - 1.0).abs() < 1e-9);
        assert!(state_fidelity(&phi, &psi).unwrap().abs() < 1e-9);
        assert!((state_fidelity(&phi, &mixed).unwrap() - 0.25).abs() < 1e-9);
        assert!((state_fidelity(&mixed, &phi).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn fidelity_rejects_unphysical() {
        let mut m = *BellState::PhiPlus.density().matrix();
        m[(1, 1)] = C64::new(-0.1, 0.0);
        m[(0, 0)] += C64::new(0.1, 0.0);
        let bad = DensityMatrix::new(m).unwrap();
        assert!(state_fidelity(&bad, &DensityMatrix::maximally_mixed()).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(linear_entropy(&BellState::PsiPlus.density()).abs() < 1e-12);
        assert!((linear_entropy(&DensityMatrix::maximally_mixed()) - 1.0).abs() < 1e-12);
        let half = BellState::PhiPlus.density().mix(&BellState::PsiPlus.density(), 0.5);
        assert!((linear_entropy(&half) - 2.0 / 3.0).abs() < 1e-12);
        assert!((purity(&half) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tangle_examples() {
        for b in BellState::ALL {
            assert!((tangle(&b.density()) - 1.0).abs() < 1e-10, "{b:?}");
        }
        let product = DensityMatrix::pure(&Vector4::new(
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            ZERO,
            ZERO,
        ));
        assert!(tangle(&product) < 1e-10);
        assert!(tangle(&DensityMatrix::maximally_mixed()) < 1e-12);
    }

    #[test]
    fn werner_state_concurrence() {
        // C = max(0, (3p - 1)/2) for p|Φ+⟩⟨Φ+| + (1-p) I/4.
        for p in [0.2, 0.5, 0.8] {
            let w = BellState::PhiPlus.density().mix(&DensityMatrix::maximally_mixed(), p);
            let want = ((3.0 * p - 1.0) / 2.0f64).max(0.0);
            assert!((concurrence(&w) - want).abs() < 1e-10);
        }
    }
}
