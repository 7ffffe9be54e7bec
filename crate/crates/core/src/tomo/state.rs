use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, to_dynamic, to_static, C64, ONE, ZERO};

const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Number of projectors in the canonical tomography set.
pub const NUM_SETTINGS: usize = 16;

/// Two-qubit density matrix over |00⟩, |01⟩, |10⟩, |11⟩ (control major).
///
/// Construction only checks hermiticity; trace and positivity are properties
/// callers query, since linear reconstructions may violate them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix4<C64>);

impl DensityMatrix {
    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let defect = (matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::domain(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self((matrix + matrix.adjoint()).scale(0.5)))
    }

    /// |ψ⟩⟨ψ| for the normalized `psi`.
    pub fn pure(psi: &Vector4<C64>) -> Self {
        let psi = psi.normalize();
        Self(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity().scale(0.25))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= f64::MIN_POSITIVE {
            return Err(Error::numerical("cannot normalize a density matrix with zero trace"));
        }
        Ok(Self(self.0.unscale(tr)))
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let (v, _) = hermitian_eigen(&to_dynamic(&self.0));
        [v[0], v[1], v[2], v[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Positive semidefinite within `tolerance`.
    pub fn is_physical(&self, tolerance: f64) -> bool {
        self.min_eigenvalue() >= -tolerance
    }

    /// Nearest unit-trace PSD matrix by eigenvalue clipping.
    pub fn project_physical(&self) -> Result<Self> {
        let p = crate::linalg::project_psd_unit_trace(&to_dynamic(&self.0))?;
        Ok(Self(to_static(&p)))
    }

    /// `weight * self + (1 - weight) * other`
    pub fn mix(&self, other: &Self, weight: f64) -> Self {
        Self(self.0.scale(weight) + other.0.scale(1.0 - weight))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn vector(self) -> Vector4<C64> {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let (a, b, c, d) = match self {
            BellState::PhiPlus => (h, ZERO, ZERO, h),
            BellState::PhiMinus => (h, ZERO, ZERO, -h),
            BellState::PsiPlus => (ZERO, h, h, ZERO),
            BellState::PsiMinus => (ZERO, h, -h, ZERO),
        };
        Vector4::new(a, b, c, d)
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::pure(&self.vector())
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

/// Single-qubit projector choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QubitProjector {
    /// Projects onto |bit⟩.
    Computational(u8),
    /// Projects onto (|0⟩ + e^{iφ}|1⟩)/√2, φ in radians.
    Equatorial(f64),
}

impl QubitProjector {
    pub fn equatorial(phase: f64) -> Self {
        QubitProjector::Equatorial(phase.rem_euclid(TAU))
    }

    pub fn state(self) -> Vector2<C64> {
        match self {
            QubitProjector::Computational(0) => Vector2::new(ONE, ZERO),
            QubitProjector::Computational(_) => Vector2::new(ZERO, ONE),
            QubitProjector::Equatorial(phase) => Vector2::new(
                C64::new(FRAC_1_SQRT_2, 0.0),
                C64::from_polar(FRAC_1_SQRT_2, phase),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub control: QubitProjector,
    pub target: QubitProjector,
}

impl MeasurementSetting {
    pub fn new(control: QubitProjector, target: QubitProjector) -> Self {
        let wrap = |p: QubitProjector| match p {
            QubitProjector::Equatorial(phase) => QubitProjector::equatorial(phase),
            other => other,
        };
        Self {
            control: wrap(control),
            target: wrap(target),
        }
    }

    pub fn state(&self) -> Vector4<C64> {
        let c = self.control.state();
        let t = self.target.state();
        Vector4::new(c[0] * t[0], c[0] * t[1], c[1] * t[0], c[1] * t[1])
    }
}

/// The single-qubit informationally complete set |0⟩, |1⟩, |+⟩, |+i⟩.
const CANONICAL_QUBIT: [QubitProjector; 4] = [
    QubitProjector::Computational(0),
    QubitProjector::Computational(1),
    QubitProjector::Equatorial(0.0),
    QubitProjector::Equatorial(FRAC_PI_2),
];

/// Canonical tomography settings, control major: index `4 * c + t`.
pub fn canonical_settings() -> [MeasurementSetting; NUM_SETTINGS] {
    std::array::from_fn(|k| MeasurementSetting::new(CANONICAL_QUBIT[k / 4], CANONICAL_QUBIT[k % 4]))
}

/// Canonical single-qubit state `k` of |0⟩, |1⟩, |+⟩, |+i⟩.
pub fn single_qubit_state(k: usize) -> Vector2<C64> {
    CANONICAL_QUBIT[k].state()
}

/// The 16 product input states used for process tomography, in the same order
/// as [`canonical_settings`].
pub fn canonical_input_states() -> Vec<DensityMatrix> {
    canonical_settings()
        .iter()
        .map(|s| DensityMatrix::pure(&s.state()))
        .collect()
}

/// Rank-1 two-qubit projector for `setting`.
pub fn projector(setting: &MeasurementSetting) -> Matrix4<C64> {
    let v = setting.state();
    v * v.adjoint()
}

/// Re Tr(Π ρ), clamped to [0, 1].
pub fn born(rho: &DensityMatrix, projector: &Matrix4<C64>) -> f64 {
    (projector * rho.matrix()).trace().re.clamp(0.0, 1.0)
}

/// Maps vec(ρ) (row major) to the canonical probabilities.
fn measurement_matrix() -> &'static nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn> {
    static LU: OnceLock<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>> = OnceLock::new();
    LU.get_or_init(|| {
        let mut m = DMatrix::zeros(NUM_SETTINGS, 16);
        for (k, s) in canonical_settings().iter().enumerate() {
            let p = projector(s);
            for i in 0..4 {
                for j in 0..4 {
                    // Tr(Π ρ) = Σ_ij Π_ji ρ_ij
                    m[(k, 4 * i + j)] = p[(j, i)];
                }
            }
        }
        m.lu()
    })
}

/// Linear-inversion state tomography from the 16 canonical probabilities.
///
/// The result is Hermitian and trace one but may have negative eigenvalues for
/// noisy input; check [`DensityMatrix::is_physical`].
pub fn qst_linear(probabilities: &[f64; NUM_SETTINGS]) -> Result<DensityMatrix> {
    let rhs = DVector::from_iterator(NUM_SETTINGS, probabilities.iter().map(|&p| C64::new(p, 0.0)));
    let x = measurement_matrix()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("tomography measurement matrix is singular"))?;
    let m = Matrix4::from_fn(|i, j| x[4 * i + j]);
    let m = (m + m.adjoint()).scale(0.5);
    let tr = m.trace().re;
    if tr.abs() <= f64::MIN_POSITIVE {
        return Err(Error::numerical("reconstructed matrix has zero trace"));
    }
    Ok(DensityMatrix(m.unscale(tr)))
}

/// Linear inversion from raw counts, normalizing by the four computational-basis
/// counts (which form a complete measurement).
pub fn qst_linear_from_counts(counts: &[f64; NUM_SETTINGS]) -> Result<DensityMatrix> {
    let total: f64 = [0, 1, 4, 5].iter().map(|&k| counts[k]).sum();
    if total <= 0.0 {
        return Err(Error::domain("no counts in the computational-basis settings"));
    }
    let p: [f64; NUM_SETTINGS] = std::array::from_fn(|k| counts[k] / total);
    qst_linear(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(rho: &DensityMatrix) -> [f64; NUM_SETTINGS] {
        let s = canonical_settings();
        std::array::from_fn(|k| born(rho, &projector(&s[k])))
    }

    #[test]
    fn canonical_settings_ordering() {
        let s = canonical_settings();
        assert_eq!(s[0].control, QubitProjector::Computational(0));
        assert_eq!(s[1].target, QubitProjector::Computational(1));
        assert_eq!(s[4].control, QubitProjector::Computational(1));
        assert_eq!(s[15].control, QubitProjector::Equatorial(FRAC_PI_2));
    }

    #[test]
    fn projector_examples() {
        let zz = projector(&MeasurementSetting::new(
            QubitProjector::Computational(0),
            QubitProjector::Computational(0),
        ));
        assert!((zz[(0, 0)] - ONE).norm() < 1e-12);
        assert!(zz.iter().map(|z| z.norm()).sum::<f64>() - 1.0 < 1e-12);

        let pp = projector(&MeasurementSetting::new(
            QubitProjector::Equatorial(0.0),
            QubitProjector::Equatorial(0.0),
        ));
        for z in pp.iter() {
            assert!((z - C64::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn projectors_are_idempotent() {
        for phase in [0.0, 0.3, 2.0, 5.9] {
            let p = projector(&MeasurementSetting::new(
                QubitProjector::Equatorial(phase),
                QubitProjector::Computational(1),
            ));
            assert!((p * p - p).iter().all(|z| z.norm() < 1e-12));
            assert!((p.trace() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn phases_wrap_into_range() {
        let s = MeasurementSetting::new(QubitProjector::Equatorial(-FRAC_PI_2), QubitProjector::Equatorial(7.0));
        match (s.control, s.target) {
            (QubitProjector::Equatorial(a), QubitProjector::Equatorial(b)) => {
                assert!((0.0..TAU).contains(&a) && (0.0..TAU).contains(&b));
                assert!((a - 3.0 * FRAC_PI_2).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn born_examples() {
        let phi = BellState::PhiPlus.density();
        let zz = projector(&canonical_settings()[0]);
        assert!((born(&phi, &zz) - 0.5).abs() < 1e-12);
        assert!((born(&phi, phi.matrix()) - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed();
        for s in canonical_settings() {
            assert!((born(&mixed, &projector(&s)) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_inversion_roundtrips() {
        let zz = DensityMatrix::pure(&Vector4::new(ONE, ZERO, ZERO, ZERO));
        assert!(qst_linear(&probs(&zz)).unwrap().max_abs_diff(&zz) < 1e-10);
        let phi = BellState::PhiPlus.density();
        assert!(qst_linear(&probs(&phi)).unwrap().max_abs_diff(&phi) < 1e-10);
    }

    #[test]
    fn noisy_inversion_can_be_unphysical() {
        let mut p = probs(&BellState::PhiPlus.density());
        p[1] = 0.0;
        p[6] = 0.0;
        p[10] -= 0.2;
        let rho = qst_linear(&p).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(!rho.is_physical(1e-8));
        assert!(rho.project_physical().unwrap().is_physical(1e-12));
    }

    #[test]
    fn counts_are_normalized_by_computational_block() {
        let p = probs(&BellState::PsiMinus.density());
        let counts: [f64; NUM_SETTINGS] = std::array::from_fn(|k| 1000.0 * p[k]);
        let rho = qst_linear_from_counts(&counts).unwrap();
        assert!(rho.max_abs_diff(&BellState::PsiMinus.density()) < 1e-10);
        assert!(qst_linear_from_counts(&[0.0; NUM_SETTINGS]).is_err());
    }
}
