use modegate::logical::{truth_table as model_table, TruthRow};
use modegate::tomo::{MeasurementSetting, QubitProjector};
use serde::Serialize;

use super::measure;
use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct TruthTableRow {
    /// Logical input, control bit first.
    pub input: String,
    /// Conditional probabilities of 00, 01, 10, 11; `None` when the input
    /// never yields a coincidence.
    pub probabilities: Option<[f64; 4]>,
    /// Post-selection probability per pair sent, from the model.
    pub success_probability: f64,
    /// Counts on the four computational outcomes; empty for undefined rows.
    pub counts: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthReport {
    pub rows: Vec<TruthTableRow>,
}

pub const UNDEFINED: &str = "undefined";
pub const CSV_HEADER: [&str; 5] = ["input", "p00", "p01", "p10", "p11"];

fn computational_settings() -> Vec<MeasurementSetting> {
    (0..4u8)
        .map(|k| MeasurementSetting::new(QubitProjector::Computational(k / 2), QubitProjector::Computational(k % 2)))
        .collect()
}

pub fn truth_table(config: &ExperimentConfig) -> Result<TruthReport, CliError> {
    let table = model_table(&config.noise)?;
    let settings = computational_settings();
    let mut rows = Vec::with_capacity(4);
    for (input, row) in table.rows.iter().enumerate() {
        let (probabilities, counts) = match row {
            TruthRow::Defined(p) => {
                let block = measure(config, &settings, p, input as u64)?;
                let total: f64 = block.counts.iter().sum();
                let probs = (total > 0.0).then(|| std::array::from_fn(|k| block.counts[k] / total));
                (probs, block.counts)
            }
            TruthRow::Undefined => (None, Vec::new()),
        };
        rows.push(TruthTableRow {
            input: format!("{}{}", input / 2, input % 2),
            probabilities,
            success_probability: table.success_probabilities[input],
            counts,
        });
    }
    Ok(TruthReport { rows })
}

impl TruthReport {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut out = vec![r.input.clone()];
                match r.probabilities {
                    Some(p) => out.extend(p.iter().map(|v| v.to_string())),
                    None => out.extend(std::iter::repeat_n(UNDEFINED.to_string(), 4)),
                }
                out
            })
            .collect()
    }
}
