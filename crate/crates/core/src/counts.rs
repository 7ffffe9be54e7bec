//! Stochastic experiment layer: coincidence sampling, HOM delay scans and
//! fits, and Monte Carlo error propagation.
//!
//! All randomness comes from ChaCha8 streams derived from a user seed with
//! [`rng_for`]. Sampling uses stream [`streams::SAMPLE`]; Monte Carlo trial `k`
//! uses stream `streams::MONTE_CARLO + k`, so trials are independent of the
//! order in which they run.

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{
    basis_vector, cnot_circuit, coincidence_probability, evolve_pair, ModeId, NoiseModel, Rail,
    Transverse,
};
use crate::tomo::MeasurementSetting;

pub const DEFAULT_TRIALS: usize = 100;

pub mod streams {
    pub const SAMPLE: u64 = 0;
    pub const MONTE_CARLO: u64 = 1 << 32;
}

/// Seed for the `index`-th independent block of an experiment (one input
/// state, one tomography run), by a SplitMix64 finalizer over `seed + index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CountModel {
    #[default]
    Poisson,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RecordLabel {
    Index(usize),
    Setting(MeasurementSetting),
    Delay(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub label: RecordLabel,
    pub counts: u64,
    pub shots: u64,
}

/// One draw with the given mean. Gaussian draws are clamped at zero and rounded.
pub fn draw_count<R: Rng + ?Sized>(rng: &mut R, mean: f64, model: CountModel) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    match model {
        CountModel::Poisson => {
            let d = Poisson::new(mean).expect("positive finite Poisson mean");
            let v: f64 = d.sample(rng);
            v as u64
        }
        CountModel::Gaussian => {
            let d = Normal::new(mean, mean.sqrt()).expect("finite Gaussian parameters");
            d.sample(rng).max(0.0).round() as u64
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} is outside [0, 1]")))
    }
}

/// Counts with mean `p * shots + background`, labelled by position.
pub fn sample_counts(
    probabilities: &[f64],
    shots: u64,
    background: f64,
    model: CountModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    let labelled: Vec<(RecordLabel, f64)> = probabilities
        .iter()
        .enumerate()
        .map(|(k, &p)| (RecordLabel::Index(k), p))
        .collect();
    sample_labelled(&labelled, shots, background, model, seed)
}

pub fn sample_labelled(
    settings: &[(RecordLabel, f64)],
    shots: u64,
    background: f64,
    model: CountModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::domain("shots must be positive"));
    }
    if !(background >= 0.0 && background.is_finite()) {
        return Err(Error::domain(format!("background {background} must be >= 0")));
    }
    for (_, p) in settings {
        check_probability(*p)?;
    }
    let mut rng = rng_for(seed, streams::SAMPLE);
    Ok(settings
        .iter()
        .map(|&(label, p)| CountRecord {
            label,
            counts: draw_count(&mut rng, p * shots as f64 + background, model),
            shots,
        })
        .collect())
}

/// Gaussian wavepacket overlap exp(−τ²/2σ²).
pub fn indistinguishability_of_delay(delay: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("coherence width {sigma} must be > 0")));
    }
    Ok((-delay * delay / (2.0 * sigma * sigma)).exp())
}

/// Probability of a TE1/TE1 coincidence (one photon per rail) for two photons
/// launched in TE1 of both rails, at overlap `x`.
pub fn hom_probability(noise: &NoiseModel, x: f64) -> Result<f64> {
    let circuit = cnot_circuit(noise)?;
    let c1 = ModeId::new(Rail::Control, Transverse::TE1);
    let t1 = ModeId::new(Rail::Target, Transverse::TE1);
    let a = evolve_pair(&circuit, &basis_vector(c1), &basis_vector(t1))?;
    coincidence_probability(&a, c1, t1, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomPoint {
    pub delay: f64,
    pub indistinguishability: f64,
    pub probability: f64,
    /// `probability * shots + background`
    pub expected: f64,
    /// Sampled counts; `None` for exact scans.
    pub counts: Option<u64>,
}

impl HomPoint {
    /// Sampled counts, or the expectation for exact scans.
    pub fn value(&self) -> f64 {
        self.counts.map(|c| c as f64).unwrap_or(self.expected)
    }

    pub fn record(&self, shots: u64) -> CountRecord {
        CountRecord {
            label: RecordLabel::Delay(self.delay),
            counts: self.counts.unwrap_or(self.expected.round() as u64),
            shots,
        }
    }
}

/// Expected coincidences at each delay, without sampling. The overlap at delay
/// τ is `noise.indistinguishability · exp(−τ²/2σ²)`.
pub fn hom_scan_exact(noise: &NoiseModel, delays: &[f64]) -> Result<Vec<HomPoint>> {
    if delays.is_empty() {
        return Err(Error::domain("delay grid is empty"));
    }
    noise.validate()?;
    delays
        .iter()
        .map(|&delay| {
            let x = noise.indistinguishability
                * indistinguishability_of_delay(delay, noise.coherence_width)?;
            let probability = hom_probability(noise, x)?;
            Ok(HomPoint {
                delay,
                indistinguishability: x,
                probability,
                expected: probability * noise.shots as f64 + noise.background,
                counts: None,
            })
        })
        .collect()
}

/// HOM delay scan with sampled coincidence counts.
pub fn hom_scan(noise: &NoiseModel, delays: &[f64], model: CountModel, seed: u64) -> Result<Vec<HomPoint>> {
    let mut points = hom_scan_exact(noise, delays)?;
    let labelled: Vec<(RecordLabel, f64)> = points
        .iter()
        .map(|p| (RecordLabel::Delay(p.delay), p.probability))
        .collect();
    let records = sample_labelled(&labelled, noise.shots, noise.background, model, seed)?;
    for (p, r) in points.iter_mut().zip(records) {
        p.counts = Some(r.counts);
    }
    Ok(points)
}

/// Gaussian dip fit C(τ) = C_max (1 − V exp(−(τ − τ₀)²/2w²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomFit {
    pub amplitude: f64,
    pub visibility: f64,
    pub center: f64,
    pub width: f64,
    /// Residual sum of squares.
    pub residual: f64,
    /// Standard errors of (amplitude, visibility, center, width).
    pub standard_errors: [f64; 4],
    pub iterations: usize,
}

impl HomFit {
    pub fn c_max(&self) -> f64 {
        self.amplitude
    }

    pub fn c_min(&self) -> f64 {
        self.amplitude * (1.0 - self.visibility)
    }

    pub fn evaluate(&self, delay: f64) -> f64 {
        dip_model(&[self.amplitude, self.visibility, self.center, self.width], delay)
    }
}

const MAX_VISIBILITY: f64 = 1.0001;
const FIT_MAX_ITERATIONS: usize = 500;
const FIT_TOLERANCE: f64 = 1e-9;

fn dip_model(p: &[f64; 4], tau: f64) -> f64 {
    let [c, v, t0, w] = *p;
    let d = tau - t0;
    c * (1.0 - v * (-d * d / (2.0 * w * w)).exp())
}

fn dip_gradient(p: &[f64; 4], tau: f64) -> [f64; 4] {
    let [c, v, t0, w] = *p;
    let d = tau - t0;
    let g = (-d * d / (2.0 * w * w)).exp();
    [
        1.0 - v * g,
        -c * g,
        -c * v * g * d / (w * w),
        -c * v * g * d * d / (w * w * w),
    ]
}

fn sum_squares(points: &[(f64, f64)], p: &[f64; 4]) -> f64 {
    points
        .iter()
        .map(|&(t, y)| (y - dip_model(p, t)).powi(2))
        .sum()
}

fn clamp_parameters(p: [f64; 4], min_width: f64) -> [f64; 4] {
    [
        p[0].max(f64::MIN_POSITIVE),
        p[1].clamp(0.0, MAX_VISIBILITY),
        p[2],
        p[3].abs().max(min_width),
    ]
}

fn initial_guess(points: &[(f64, f64)]) -> [f64; 4] {
    let mut values: Vec<f64> = points.iter().map(|p| p.1).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let top = ((values.len() as f64 * 0.2).ceil() as usize).max(1);
    let c_max = values[..top].iter().sum::<f64>() / top as f64;
    let (t_min, y_min) = points
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let v = if c_max > 0.0 { (1.0 - y_min / c_max).clamp(0.0, 1.0) } else { 0.0 };
    [c_max, v, t_min, (hi - lo) / 4.0]
}

/// Levenberg–Marquardt fit of the Gaussian dip to `(delay, counts)` points.
pub fn fit_hom(points: &[(f64, f64)]) -> Result<HomFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::domain(format!(
            "HOM fit needs at least 5 distinct delays, got {}",
            distinct.len()
        )));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::domain("HOM data contains non-finite values"));
    }
    let span = distinct[distinct.len() - 1] - distinct[0];
    let min_width = span * 1e-6;

    let mut p = clamp_parameters(initial_guess(points), min_width);
    if p[0] <= f64::MIN_POSITIVE {
        return Err(Error::domain("HOM data has no positive counts"));
    }
    let mut cost = sum_squares(points, &p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let (mut jtj, mut jtr) = normal_equations(points, &p);

    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * (jtj[(i, i)] + 1e-12 * (1.0 + jtj.trace()));
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let candidate = clamp_parameters(
            [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]],
            min_width,
        );
        let candidate_cost = sum_squares(points, &candidate);
        if candidate_cost < cost {
            let scale = [p[0].abs(), p[1].abs().max(1.0), p[2].abs() + p[3], p[3].abs()];
            let change = (0..4)
                .map(|i| (candidate[i] - p[i]).abs() / scale[i].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            p = candidate;
            cost = candidate_cost;
            (jtj, jtr) = normal_equations(points, &p);
            lambda = (lambda / 10.0).max(1e-12);
            if change < FIT_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            // No damping level reduces the cost: the current point is a minimum
            // to working precision.
            if lambda > 1e16 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitDidNotConverge {
            iterations,
            residual: cost,
            parameters: p,
        });
    }

    let dof = (points.len() as f64 - 4.0).max(1.0);
    let s2 = cost / dof;
    let cov = jtj
        .pseudo_inverse(1e-12 * jtj.norm().max(f64::MIN_POSITIVE))
        .map_err(|e| Error::numerical(format!("covariance inversion failed: {e}")))?;
    let standard_errors = std::array::from_fn(|i| (s2 * cov[(i, i)]).max(0.0).sqrt());

    Ok(HomFit {
        amplitude: p[0],
        visibility: p[1],
        center: p[2],
        width: p[3],
        residual: cost,
        standard_errors,
        iterations,
    })
}

fn normal_equations(points: &[(f64, f64)], p: &[f64; 4]) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for &(t, y) in points {
        let g = Vector4::from(dip_gradient(p, t));
        let r = y - dip_model(p, t);
        jtj += g * g.transpose();
        jtr += g * r;
    }
    (jtj, jtr)
}

/// Fit to HOM scan points, using counts where sampled and expectations otherwise.
pub fn fit_hom_points(points: &[HomPoint]) -> Result<HomFit> {
    let data: Vec<(f64, f64)> = points.iter().map(|p| (p.delay, p.value())).collect();
    fit_hom(&data)
}

/// Fit to delay-labelled count records.
pub fn fit_hom_records(records: &[CountRecord]) -> Result<HomFit> {
    let data = records
        .iter()
        .map(|r| match r.label {
            RecordLabel::Delay(d) => Ok((d, r.counts as f64)),
            _ => Err(Error::domain("HOM fit needs delay-labelled records")),
        })
        .collect::<Result<Vec<_>>>()?;
    fit_hom(&data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub mean: f64,
    pub std: f64,
}

impl McSummary {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std: 0.0 }
    }

    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, std: var.sqrt() }
    }
}

/// Redraws every record's counts around its observed value.
pub fn resample(records: &[CountRecord], model: CountModel, seed: u64, trial: usize) -> Vec<CountRecord> {
    let mut rng = rng_for(seed, streams::MONTE_CARLO + trial as u64);
    records
        .iter()
        .map(|r| CountRecord {
            counts: draw_count(&mut rng, r.counts as f64, model),
            ..*r
        })
        .collect()
}

/// Monte Carlo mean and standard deviation of a scalar estimator.
pub fn monte_carlo<F>(
    estimator: F,
    records: &[CountRecord],
    trials: usize,
    model: CountModel,
    seed: u64,
) -> Result<McSummary>
where
    F: Fn(&[CountRecord]) -> Result<f64> + Sync,
{
    let out = monte_carlo_many(|r| estimator(r).map(|v| vec![v]), records, trials, model, seed)?;
    Ok(out[0])
}

/// Monte Carlo summary of several estimates computed from the same resamples.
pub fn monte_carlo_many<F>(
    estimator: F,
    records: &[CountRecord],
    trials: usize,
    model: CountModel,
    seed: u64,
) -> Result<Vec<McSummary>>
where
    F: Fn(&[CountRecord]) -> Result<Vec<f64>> + Sync,
{
    if trials < 2 {
        return Err(Error::domain(format!("monte carlo needs at least 2 trials, got {trials}")));
    }
    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            estimator(&resample(records, model, seed, trial)).map_err(|e| Error::Trial {
                trial,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let width = samples[0].len();
    if samples.iter().any(|s| s.len() != width) {
        return Err(Error::numerical("estimator returned a varying number of values"));
    }
    Ok((0..width)
        .map(|k| {
            let column: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            McSummary::from_samples(&column)
        })
        .collect())
}
