use modegate::counts::{
    derive_seed, fit_hom, fit_hom_records, hom_probability, hom_scan, hom_scan_exact, monte_carlo, HomFit,
    HomPoint,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::Measured;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct HomRow {
    pub delay: f64,
    /// Sampled counts, or the expectation in exact mode.
    pub counts: f64,
    pub exact_probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomReport {
    pub fit: HomFit,
    pub visibility: Measured,
    pub c_max: f64,
    pub c_min: f64,
    /// Expected C(0)/C(∞) of the model, background included.
    pub model_dip_ratio: Option<f64>,
    pub points: usize,
    #[serde(skip)]
    pub rows: Vec<HomRow>,
}

pub const CSV_HEADER: [&str; 3] = ["delay", "counts", "exact_probability"];

pub fn hom(config: &ExperimentConfig) -> Result<HomReport, CliError> {
    let noise = &config.noise;
    let delays = config.resolved_delays();
    let seed = derive_seed(config.seed, 0);
    let points: Vec<HomPoint> = if config.exact {
        hom_scan_exact(noise, &delays)?
    } else {
        hom_scan(noise, &delays, config.count_model, seed)?
    };
    let data: Vec<(f64, f64)> = points.iter().map(|p| (p.delay, p.value())).collect();
    let fit = fit_hom(&data)?;
    let mc = if config.exact {
        None
    } else {
        let records: Vec<_> = points.iter().map(|p| p.record(noise.shots)).collect();
        Some(monte_carlo(
            |r| Ok(fit_hom_records(r)?.visibility),
            &records,
            config.trials,
            config.resample_model,
            seed,
        )?)
    };
    let shots = noise.shots as f64;
    let expected = |x: f64| -> Result<f64, CliError> { Ok(hom_probability(noise, x)? * shots + noise.background) };
    let far = expected(0.0)?;
    let model_dip_ratio = if far > 0.0 { Some(expected(noise.indistinguishability)? / far) } else { None };
    Ok(HomReport {
        visibility: Measured::with(fit.visibility, mc),
        c_max: fit.c_max(),
        c_min: fit.c_min(),
        model_dip_ratio,
        points: points.len(),
        rows: points
            .iter()
            .map(|p| HomRow {
                delay: p.delay,
                counts: p.value(),
                exact_probability: p.probability,
            })
            .collect(),
        fit,
    })
}

impl HomReport {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| vec![r.delay.to_string(), r.counts.to_string(), r.exact_probability.to_string()])
            .collect()
    }
}
