//! End-to-end experiment runners.

pub mod bell;
pub mod chsh;
pub mod hom;
pub mod qpt;
pub mod truth_table;

pub use bell::{bell, BellReport, BellRow};
pub use chsh::{chsh, chsh_settings, ChshReport, ChshRow};
pub use hom::{hom, HomReport, HomRow};
pub use qpt::{qpt, QptReport};
pub use truth_table::{truth_table, TruthReport, TruthTableRow};

use modegate::counts::{derive_seed, monte_carlo_many, sample_labelled, CountRecord, McSummary, RecordLabel};
use modegate::tomo::{
    canonical_settings, projector, qst_linear_from_counts, qst_mle, DensityMatrix, MeasurementSetting,
    NUM_SETTINGS,
};
use modegate::C64;
use nalgebra::Matrix4;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Probabilities of the rank-1 `settings` on an unnormalized state.
pub(crate) fn setting_probabilities(rho: &Matrix4<C64>, settings: &[MeasurementSetting]) -> Vec<f64> {
    settings
        .iter()
        .map(|s| (projector(s) * rho).trace().re.clamp(0.0, 1.0))
        .collect()
}

/// Simulated counts for one block of settings.
pub(crate) struct Block {
    pub counts: Vec<f64>,
    /// Sampled records, for resampling. Empty in exact mode.
    pub records: Vec<CountRecord>,
    pub seed: u64,
}

/// Expected counts `p · shots + background` in exact mode, sampled counts otherwise.
pub(crate) fn measure(
    config: &ExperimentConfig,
    settings: &[MeasurementSetting],
    probabilities: &[f64],
    block: u64,
) -> Result<Block, CliError> {
    let probabilities: Vec<f64> = probabilities.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let shots = config.resolved_shots();
    let background = config.noise.background;
    let seed = derive_seed(config.seed, block);
    if config.exact {
        return Ok(Block {
            counts: probabilities.iter().map(|p| p * shots as f64 + background).collect(),
            records: Vec::new(),
            seed,
        });
    }
    let labelled: Vec<(RecordLabel, f64)> = settings
        .iter()
        .zip(&probabilities)
        .map(|(s, &p)| (RecordLabel::Setting(*s), p))
        .collect();
    let records = sample_labelled(&labelled, shots, background, config.count_model, seed)?;
    Ok(Block {
        counts: records.iter().map(|r| r.counts as f64).collect(),
        records,
        seed,
    })
}

pub(crate) fn as_settings(counts: &[f64]) -> [f64; NUM_SETTINGS] {
    std::array::from_fn(|k| counts[k])
}

/// Linear inversion of expected counts in exact mode, maximum likelihood otherwise.
pub(crate) fn reconstruct(counts: &[f64], exact: bool) -> modegate::Result<DensityMatrix> {
    let counts = as_settings(counts);
    if exact {
        qst_linear_from_counts(&counts)?.project_physical()
    } else {
        Ok(qst_mle(&counts)?.rho)
    }
}

/// Coincidences below this per-pair probability count as none.
const SUCCESS_FLOOR: f64 = 1e-15;

/// The post-selected state normalized to unit trace: `shots` counts
/// post-selected events, so setting probabilities are conditional.
pub(crate) fn conditional(logical: &Matrix4<C64>) -> Result<Matrix4<C64>, CliError> {
    let p = logical.trace().re;
    if !(p > SUCCESS_FLOOR) {
        return Err(CliError::Runtime(format!(
            "input never yields a coincidence (success probability {p:.3e})"
        )));
    }
    Ok(logical.unscale(p))
}

pub(crate) fn state_tomography(
    config: &ExperimentConfig,
    logical: &Matrix4<C64>,
    block: u64,
) -> Result<Block, CliError> {
    let settings = canonical_settings();
    let probs = setting_probabilities(&conditional(logical)?, &settings);
    measure(config, &settings, &probs, block)
}

/// Monte Carlo spread of `estimator` in sampled mode; `None` in exact mode.
pub(crate) fn spread<F>(
    config: &ExperimentConfig,
    records: &[CountRecord],
    seed: u64,
    estimator: F,
) -> Result<Option<Vec<McSummary>>, CliError>
where
    F: Fn(&[f64]) -> modegate::Result<Vec<f64>> + Sync,
{
    if config.exact {
        return Ok(None);
    }
    let summaries = monte_carlo_many(
        |r| estimator(&r.iter().map(|c| c.counts as f64).collect::<Vec<_>>()),
        records,
        config.trials,
        config.resample_model,
        seed,
    )?;
    Ok(Some(summaries))
}

pub(crate) fn nth(mc: &Option<Vec<McSummary>>, k: usize) -> Option<McSummary> {
    mc.as_ref().map(|v| v[k])
}
