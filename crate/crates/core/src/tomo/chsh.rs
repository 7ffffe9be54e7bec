//! Correlation functions and the CHSH parameter.
//!
//! An analyzer angle θ (degrees) selects the equatorial projector pair at
//! phases (2θ, 2θ + π) on the control qubit and (−2θ, −2θ + π) on the target.
//! With this convention |Φ⁺⟩ gives E(θ_a, θ_b) = cos 2(θ_a − θ_b).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::state::{born, projector, BellState, DensityMatrix, MeasurementSetting, QubitProjector};

/// E = Σ ± P(Π_a^± ⊗ Π_b^±) for the projector pairs (φ, φ + π) on each qubit.
pub fn correlation(rho: &DensityMatrix, control_phase: f64, target_phase: f64) -> f64 {
    let mut e = 0.0;
    for (sa, da) in [(1.0, 0.0), (-1.0, PI)] {
        for (sb, db) in [(1.0, 0.0), (-1.0, PI)] {
            let setting = MeasurementSetting::new(
                QubitProjector::equatorial(control_phase + da),
                QubitProjector::equatorial(target_phase + db),
            );
            e += sa * sb * born(rho, &projector(&setting));
        }
    }
    e.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// Control {0°, 45°}, target {22.5°, 67.5°}.
    pub const STANDARD: ChshAngles = ChshAngles {
        a: 0.0,
        a_prime: 45.0,
        b: 22.5,
        b_prime: 67.5,
    };

    pub fn control_phase(angle_deg: f64) -> f64 {
        2.0 * angle_deg.to_radians()
    }

    pub fn target_phase(angle_deg: f64) -> f64 {
        -2.0 * angle_deg.to_radians()
    }

    /// (control angle, target angle) for the terms (a,b), (a,b′), (a′,b), (a′,b′).
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Coefficients of the four correlation terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSigns(pub [f64; 4]);

impl ChshSigns {
    /// E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)
    pub const STANDARD: ChshSigns = ChshSigns([1.0, -1.0, 1.0, 1.0]);

    /// Sign pattern whose ideal value is +2√2 for `state` at the standard angles.
    /// Each pattern has an odd number of minus signs, so the local bound stays 2.
    pub fn for_bell(state: BellState) -> ChshSigns {
        match state {
            BellState::PhiPlus => ChshSigns([1.0, -1.0, 1.0, 1.0]),
            BellState::PhiMinus => ChshSigns([-1.0, 1.0, -1.0, -1.0]),
            BellState::PsiPlus => ChshSigns([1.0, -1.0, -1.0, -1.0]),
            BellState::PsiMinus => ChshSigns([-1.0, 1.0, 1.0, 1.0]),
        }
    }

    pub fn combine(&self, terms: &[f64; 4]) -> f64 {
        self.0.iter().zip(terms).map(|(s, e)| s * e).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub s: f64,
    /// E(a,b), E(a,b′), E(a′,b), E(a′,b′)
    pub terms: [f64; 4],
    pub signs: ChshSigns,
}

pub fn chsh(rho: &DensityMatrix, angles: &ChshAngles) -> ChshResult {
    chsh_with_signs(rho, angles, ChshSigns::STANDARD)
}

pub fn chsh_with_signs(rho: &DensityMatrix, angles: &ChshAngles, signs: ChshSigns) -> ChshResult {
    let terms = angles.pairs().map(|(ta, tb)| {
        correlation(rho, ChshAngles::control_phase(ta), ChshAngles::target_phase(tb))
    });
    ChshResult {
        s: signs.combine(&terms),
        terms,
        signs,
    }
}
