//! Logical-qubit layer.
//!
//! The control qubit is stored directly in the transverse mode of the control
//! rail (|0⟩ = TE0, |1⟩ = TE1). The target qubit is stored in the Hadamard
//! basis of the target rail (|0⟩ = (TE0 + TE1)/√2, |1⟩ = (TE0 − TE1)/√2), so the
//! physical controlled-phase becomes a logical CNOT.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::modes::{cnot_circuit, coincidence_amplitudes, evolve_pair, postselect, NoiseModel, PostSelectedState};
use crate::tomo::{BellState, DensityMatrix};

const SUCCESS_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalQubitState {
    alpha: C64,
    beta: C64,
}

impl LogicalQubitState {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("qubit amplitudes have norm² {norm}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_vector(v: &Vector2<C64>) -> Result<Self> {
        Self::new(v[0], v[1])
    }

    pub fn zero() -> Self {
        Self { alpha: ONE, beta: ZERO }
    }

    pub fn one() -> Self {
        Self { alpha: ZERO, beta: ONE }
    }

    pub fn plus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: h }
    }

    pub fn minus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: -h }
    }

    pub fn plus_i() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: I * h }
    }

    pub fn basis(bit: usize) -> Self {
        if bit == 0 {
            Self::zero()
        } else {
            Self::one()
        }
    }

    pub fn vector(&self) -> Vector2<C64> {
        Vector2::new(self.alpha, self.beta)
    }
}

/// Control qubit onto the control rail: α·TE0 + β·TE1.
pub fn encode_control(q: &LogicalQubitState) -> Vector4<C64> {
    Vector4::new(q.alpha, q.beta, ZERO, ZERO)
}

/// Target qubit onto the target rail in the Hadamard basis.
pub fn encode_target(q: &LogicalQubitState) -> Vector4<C64> {
    let h = FRAC_1_SQRT_2;
    Vector4::new(ZERO, ZERO, (q.alpha + q.beta) * h, (q.alpha - q.beta) * h)
}

/// I ⊗ H with the real Hadamard on the target.
pub fn target_hadamard() -> Matrix4<C64> {
    *ideal_gate(IdealGate::HadamardOnTarget).matrix()
}

/// Physical (c mode, t mode) density to the logical basis, unnormalized.
pub fn decode_density(ps: &PostSelectedState) -> Matrix4<C64> {
    let h = target_hadamard();
    h * ps.rho * h.adjoint()
}

pub fn decode_density_normalized(ps: &PostSelectedState) -> Result<DensityMatrix> {
    let rho = decode_density(ps);
    let tr = rho.trace().re;
    if tr <= SUCCESS_FLOOR {
        return Err(Error::numerical("post-selected state has zero trace"));
    }
    DensityMatrix::new(rho.unscale(tr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdealGate {
    Cnot,
    CPhase,
    Identity,
    HadamardOnTarget,
}

/// 4×4 operator over |00⟩, |01⟩, |10⟩, |11⟩ (control major).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitOperator(Matrix4<C64>);

impl TwoQubitOperator {
    pub fn new(m: Matrix4<C64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// |Tr(G†R)|² / (Tr(G†G) Tr(R†R)), insensitive to global phase and scale.
    pub fn overlap(&self, reference: &TwoQubitOperator) -> f64 {
        let cross = (self.0.adjoint() * reference.0).trace().norm_sqr();
        let own = (self.0.adjoint() * self.0).trace().re;
        let other = (reference.0.adjoint() * reference.0).trace().re;
        if own <= 0.0 || other <= 0.0 {
            return 0.0;
        }
        cross / (own * other)
    }
}

pub fn ideal_gate(gate: IdealGate) -> TwoQubitOperator {
    let o = ZERO;
    let l = ONE;
    let m = match gate {
        IdealGate::Identity => Matrix4::identity(),
        IdealGate::Cnot => Matrix4::new(
            l, o, o, o, //
            o, l, o, o, //
            o, o, o, l, //
            o, o, l, o,
        ),
        IdealGate::CPhase => Matrix4::from_diagonal(&Vector4::new(l, l, l, -l)),
        IdealGate::HadamardOnTarget => Matrix4::new(
            l, l, o, o, //
            l, -l, o, o, //
            o, o, l, l, //
            o, o, l, -l,
        )
        .scale(FRAC_1_SQRT_2),
    };
    TwoQubitOperator(m)
}

/// Output of one run of the gate on a product input.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutput {
    pub physical: PostSelectedState,
    /// Logical-basis density matrix, unnormalized (trace = success probability).
    pub logical: Matrix4<C64>,
}

impl GateOutput {
    pub fn success_probability(&self) -> f64 {
        self.physical.success_probability
    }

    pub fn normalized(&self) -> Result<DensityMatrix> {
        decode_density_normalized(&self.physical)
    }
}

/// Encodes, propagates, post-selects and decodes a product input.
pub fn run_gate(
    noise: &NoiseModel,
    control: &LogicalQubitState,
    target: &LogicalQubitState,
) -> Result<GateOutput> {
    let circuit = cnot_circuit(noise)?;
    let amplitude = evolve_pair(&circuit, &encode_control(control), &encode_target(target))?;
    let physical = postselect(&amplitude, noise.indistinguishability)?;
    let logical = decode_density(&physical);
    Ok(GateOutput { physical, logical })
}

/// The linear map on logical amplitudes implemented by the post-selected gate.
/// Only defined for perfectly indistinguishable photons.
pub fn logical_map(noise: &NoiseModel) -> Result<TwoQubitOperator> {
    if noise.indistinguishability != 1.0 {
        return Err(Error::domain(
            "logical map requires indistinguishability = 1 (the output is mixed otherwise)",
        ));
    }
    let circuit = cnot_circuit(noise)?;
    let h = target_hadamard();
    let mut g = Matrix4::zeros();
    for input in 0..4 {
        let control = LogicalQubitState::basis(input / 2);
        let target = LogicalQubitState::basis(input % 2);
        let amplitude = evolve_pair(&circuit, &encode_control(&control), &encode_target(&target))?;
        let column = h * coincidence_amplitudes(&amplitude);
        g.set_column(input, &column);
    }
    Ok(TwoQubitOperator(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruthRow {
    /// Normalized outcome distribution over |00⟩, |01⟩, |10⟩, |11⟩.
    Defined([f64; 4]),
    /// The input never produces a coincidence.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub rows: [TruthRow; 4],
    pub success_probabilities: [f64; 4],
}

impl TruthTable {
    /// For every defined row, whether its most likely outcome matches `gate`.
    pub fn argmax_matches(&self, gate: &TwoQubitOperator) -> bool {
        self.rows.iter().enumerate().all(|(input, row)| match row {
            TruthRow::Undefined => true,
            TruthRow::Defined(p) => {
                let best = (0..4).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
                gate.matrix()[(best, input)].norm() > 0.5
            }
        })
    }
}

/// Conditional outcome probabilities for the four computational inputs.
pub fn truth_table(noise: &NoiseModel) -> Result<TruthTable> {
    let mut rows = [TruthRow::Undefined; 4];
    let mut success = [0.0; 4];
    for input in 0..4 {
        let out = run_gate(
            noise,
            &LogicalQubitState::basis(input / 2),
            &LogicalQubitState::basis(input % 2),
        )?;
        let p = out.success_probability();
        success[input] = p;
        if p > SUCCESS_FLOOR {
            let diag: [f64; 4] = std::array::from_fn(|k| out.logical[(k, k)].re.max(0.0) / p);
            rows[input] = TruthRow::Defined(diag);
        }
    }
    Ok(TruthTable {
        rows,
        success_probabilities: success,
    })
}

/// The four Bell-state preparations: control |±⟩, target |0⟩ or |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellInput {
    #[serde(rename = "+0")]
    PlusZero,
    #[serde(rename = "-0")]
    MinusZero,
    #[serde(rename = "+1")]
    PlusOne,
    #[serde(rename = "-1")]
    MinusOne,
}

impl BellInput {
    pub const ALL: [BellInput; 4] = [
        BellInput::PlusZero,
        BellInput::MinusZero,
        BellInput::PlusOne,
        BellInput::MinusOne,
    ];

    pub fn states(self) -> (LogicalQubitState, LogicalQubitState) {
        match self {
            BellInput::PlusZero => (LogicalQubitState::plus(), LogicalQubitState::zero()),
            BellInput::MinusZero => (LogicalQubitState::minus(), LogicalQubitState::zero()),
            BellInput::PlusOne => (LogicalQubitState::plus(), LogicalQubitState::one()),
            BellInput::MinusOne => (LogicalQubitState::minus(), LogicalQubitState::one()),
        }
    }

    /// The Bell state an ideal CNOT produces from this input.
    pub fn expected_bell_state(self) -> BellState {
        match self {
            BellInput::PlusZero => BellState::PhiPlus,
            BellInput::MinusZero => BellState::PhiMinus,
            BellInput::PlusOne => BellState::PsiPlus,
            BellInput::MinusOne => BellState::PsiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellInput::PlusZero => "+0",
            BellInput::MinusZero => "-0",
            BellInput::PlusOne => "+1",
            BellInput::MinusOne => "-1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.label() == s)
    }
}
