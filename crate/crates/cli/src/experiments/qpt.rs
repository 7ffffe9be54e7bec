use modegate::counts::derive_seed;
use modegate::logical::{ideal_gate, run_gate, IdealGate, LogicalQubitState};
use modegate::tomo::{
    chi_from_unitary, pauli_label, process_fidelity, qpt as reconstruct_chi, single_qubit_state, ChiMatrix,
    DensityMatrix, NUM_SETTINGS, PAULI_DIM,
};
use serde::Serialize;

use super::{reconstruct, spread, state_tomography, Block};
use crate::config::ExperimentConfig;
use crate::output::{complex_matrix, Complex, Measured};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct QptReport {
    /// Pauli operator labels indexing the rows and columns of `chi`.
    pub basis: Vec<String>,
    pub chi: Vec<Vec<Complex>>,
    pub process_fidelity: Measured,
    pub trace_preservation_defect: f64,
    /// Coincidence probability per pair for each of the 16 inputs.
    pub success_probabilities: Vec<f64>,
    /// 16 inputs × 16 projections.
    pub counts: Vec<Vec<f64>>,
}

fn chi_from_counts(blocks: &[&[f64]], exact: bool) -> modegate::Result<ChiMatrix> {
    let outputs = blocks
        .iter()
        .map(|c| reconstruct(c, exact))
        .collect::<modegate::Result<Vec<DensityMatrix>>>()?;
    reconstruct_chi(&outputs)
}

pub fn qpt(config: &ExperimentConfig) -> Result<QptReport, CliError> {
    let ideal = chi_from_unitary(ideal_gate(IdealGate::Cnot).matrix());
    let mut blocks: Vec<Block> = Vec::with_capacity(NUM_SETTINGS);
    let mut success = Vec::with_capacity(NUM_SETTINGS);
    for k in 0..NUM_SETTINGS {
        let control = LogicalQubitState::from_vector(&single_qubit_state(k / 4))?;
        let target = LogicalQubitState::from_vector(&single_qubit_state(k % 4))?;
        let out = run_gate(&config.noise, &control, &target)?;
        success.push(out.success_probability());
        blocks.push(state_tomography(config, &out.logical, k as u64)?);
    }
    let counts: Vec<&[f64]> = blocks.iter().map(|b| b.counts.as_slice()).collect();
    let chi = chi_from_counts(&counts, config.exact)?;
    let fidelity = process_fidelity(&chi, &ideal)?;

    let records: Vec<_> = blocks.iter().flat_map(|b| b.records.iter().copied()).collect();
    let mc = spread(config, &records, derive_seed(config.seed, NUM_SETTINGS as u64), |flat| {
        let parts: Vec<&[f64]> = flat.chunks(NUM_SETTINGS).collect();
        Ok(vec![process_fidelity(&chi_from_counts(&parts, false)?, &ideal)?])
    })?;

    Ok(QptReport {
        basis: (0..PAULI_DIM).map(pauli_label).collect(),
        chi: complex_matrix(chi.matrix()),
        process_fidelity: Measured::with(fidelity, mc.map(|v| v[0])),
        trace_preservation_defect: chi.trace_preservation_defect(),
        success_probabilities: success,
        counts: blocks.into_iter().map(|b| b.counts).collect(),
    })
}
