//! Measurement and reconstruction mathematics for two qubits.

mod chsh;
mod measures;
mod mle;
mod process;
mod state;

pub use chsh::{chsh, chsh_with_signs, correlation, ChshAngles, ChshResult, ChshSigns};
pub use measures::{concurrence, linear_entropy, purity, state_fidelity, tangle};
pub use mle::{log_likelihood, qst_mle, qst_mle_with, MleOptions, MleResult};
pub use process::{
    chi_from_unitary, pauli_basis, pauli_label, process_fidelity, qpt, qpt_linear,
    ChiMatrix, PAULI_DIM,
};
pub use state::{
    born, canonical_input_states, canonical_settings, projector, qst_linear, qst_linear_from_counts,
    single_qubit_state, BellState, DensityMatrix, MeasurementSetting, QubitProjector,
    NUM_SETTINGS,
};
