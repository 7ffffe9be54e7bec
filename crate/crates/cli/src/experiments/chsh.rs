use std::f64::consts::PI;

use modegate::logical::BellInput;
use modegate::tomo::{ChshAngles, ChshSigns, MeasurementSetting, QubitProjector};
use serde::Serialize;

use super::bell::{bell_input_index, bell_output};
use super::{conditional, measure, nth, setting_probabilities, spread};
use crate::config::ExperimentConfig;
use crate::output::Measured;
use crate::CliError;

/// Projector pairs (φ, φ) (φ, φ+π) (φ+π, φ) (φ+π, φ+π) with their signs.
const OUTCOMES: [(f64, f64, f64); 4] = [(0.0, 0.0, 1.0), (0.0, PI, -1.0), (PI, 0.0, -1.0), (PI, PI, 1.0)];

/// The 16 settings: four outcome pairs for each of the four angle pairs.
pub fn chsh_settings(angles: &ChshAngles) -> Vec<MeasurementSetting> {
    angles
        .pairs()
        .iter()
        .flat_map(|&(ta, tb)| {
            OUTCOMES.iter().map(move |&(da, db, _)| {
                MeasurementSetting::new(
                    QubitProjector::equatorial(ChshAngles::control_phase(ta) + da),
                    QubitProjector::equatorial(ChshAngles::target_phase(tb) + db),
                )
            })
        })
        .collect()
}

fn correlations(counts: &[f64]) -> modegate::Result<[f64; 4]> {
    let mut terms = [0.0; 4];
    for (t, e) in terms.iter_mut().enumerate() {
        let block = &counts[4 * t..4 * t + 4];
        let total: f64 = block.iter().sum();
        if total <= 0.0 {
            return Err(modegate::Error::Numerical(format!(
                "no coincidences for correlation term {t}"
            )));
        }
        *e = block.iter().zip(OUTCOMES).map(|(n, (_, _, s))| s * n).sum::<f64>() / total;
    }
    Ok(terms)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshRow {
    pub input: &'static str,
    pub target_state: &'static str,
    pub signs: [f64; 4],
    /// E(a,b), E(a,b′), E(a′,b), E(a′,b′)
    pub terms: Vec<Measured>,
    pub s: Measured,
    pub counts: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshReport {
    pub angles: ChshAngles,
    pub results: Vec<ChshRow>,
    pub mean_s: Measured,
}

pub fn chsh(config: &ExperimentConfig, inputs: &[BellInput]) -> Result<ChshReport, CliError> {
    let angles = ChshAngles::STANDARD;
    let settings = chsh_settings(&angles);
    let mut results = Vec::with_capacity(inputs.len());
    for &input in inputs {
        let signs = ChshSigns::for_bell(input.expected_bell_state());
        let logical = bell_output(config, input)?;
        let probs = setting_probabilities(&conditional(&logical)?, &settings);
        let block = measure(config, &settings, &probs, bell_input_index(input))?;
        let terms = correlations(&block.counts)?;
        let s = signs.combine(&terms);
        let mc = spread(config, &block.records, block.seed, |counts| {
            let e = correlations(counts)?;
            let mut v = e.to_vec();
            v.push(signs.combine(&e));
            Ok(v)
        })?;
        results.push(ChshRow {
            input: input.label(),
            target_state: input.expected_bell_state().name(),
            signs: signs.0,
            terms: (0..4).map(|k| Measured::with(terms[k], nth(&mc, k))).collect(),
            s: Measured::with(s, nth(&mc, 4)),
            counts: block.counts,
        });
    }
    Ok(ChshReport {
        angles,
        mean_s: Measured::mean(&results.iter().map(|r| r.s).collect::<Vec<_>>()),
        results,
    })
}
