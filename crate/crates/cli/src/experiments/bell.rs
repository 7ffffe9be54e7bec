use modegate::logical::{run_gate, BellInput};
use modegate::tomo::{linear_entropy, state_fidelity, tangle, DensityMatrix};
use modegate::linalg::C64;
use nalgebra::Matrix4;
use serde::Serialize;

use super::{nth, reconstruct, spread, state_tomography};
use crate::config::ExperimentConfig;
use crate::output::{complex_matrix, Complex, Measured};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct BellRow {
    pub input: &'static str,
    pub target_state: &'static str,
    /// Reconstructed density matrix, logical basis, control major.
    pub rho: Vec<Vec<Complex>>,
    pub fidelity: Measured,
    pub linear_entropy: Measured,
    pub tangle: Measured,
    /// Post-selection probability per pair sent, from the model.
    pub success_probability: f64,
    /// Counts for the 16 tomography settings.
    pub counts: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellReport {
    pub results: Vec<BellRow>,
    pub mean_fidelity: Measured,
    pub mean_linear_entropy: Measured,
    pub mean_tangle: Measured,
}

fn metrics(rho: &DensityMatrix, ideal: &DensityMatrix) -> modegate::Result<[f64; 3]> {
    Ok([state_fidelity(rho, ideal)?, linear_entropy(rho), tangle(rho)])
}

pub(crate) fn bell_input_index(input: BellInput) -> u64 {
    BellInput::ALL.iter().position(|&b| b == input).unwrap_or(0) as u64
}

pub(crate) fn bell_output(config: &ExperimentConfig, input: BellInput) -> Result<Matrix4<C64>, CliError> {
    let (control, target) = input.states();
    Ok(run_gate(&config.noise, &control, &target)?.logical)
}

pub fn bell(config: &ExperimentConfig, inputs: &[BellInput]) -> Result<BellReport, CliError> {
    let mut results = Vec::with_capacity(inputs.len());
    for &input in inputs {
        let ideal = input.expected_bell_state().density();
        let logical = bell_output(config, input)?;
        let block = state_tomography(config, &logical, bell_input_index(input))?;
        let rho = reconstruct(&block.counts, config.exact)?;
        let values = metrics(&rho, &ideal)?;
        let mc = spread(config, &block.records, block.seed, |counts| {
            Ok(metrics(&reconstruct(counts, false)?, &ideal)?.to_vec())
        })?;
        results.push(BellRow {
            input: input.label(),
            target_state: input.expected_bell_state().name(),
            rho: complex_matrix(rho.matrix()),
            fidelity: Measured::with(values[0], nth(&mc, 0)),
            linear_entropy: Measured::with(values[1], nth(&mc, 1)),
            tangle: Measured::with(values[2], nth(&mc, 2)),
            success_probability: logical.trace().re,
            counts: block.counts,
        });
    }
    let collect = |f: fn(&BellRow) -> Measured| Measured::mean(&results.iter().map(f).collect::<Vec<_>>());
    Ok(BellReport {
        mean_fidelity: collect(|r| r.fidelity),
        mean_linear_entropy: collect(|r| r.linear_entropy),
        mean_tangle: collect(|r| r.tangle),
        results,
    })
}
