//! Maximum-likelihood state tomography by diluted fixed-point iteration.
//!
//! The canonical projectors do not sum to the identity, so the iteration runs
//! on the completed POVM `Ẽ_k = G^{-1/2} Π_k G^{-1/2}` with `G = Σ_k Π_k` and on
//! the transformed state `σ ∝ G^{1/2} ρ G^{1/2}`. Under this change of
//! variables the multinomial likelihood of the counts is preserved exactly,
//! and the `R σ R` update has the true state as its fixed point.

use nalgebra::Matrix4;

use super::state::{
    canonical_settings, projector, qst_linear_from_counts, DensityMatrix, NUM_SETTINGS,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_map, to_dynamic, to_static, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Initial dilution of the fixed-point step. It is halved whenever a step
    /// would lower the likelihood and doubled (up to `max_dilution`) after
    /// every accepted step.
    pub dilution: f64,
    pub max_dilution: f64,
    /// Stop once an accepted step improves the log-likelihood by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            dilution: 0.1,
            max_dilution: 1e3,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Povm {
    elements: [Matrix4<C64>; NUM_SETTINGS],
    g_sqrt: Matrix4<C64>,
    g_inv_sqrt: Matrix4<C64>,
}

fn povm() -> &'static Povm {
    static POVM: std::sync::OnceLock<Povm> = std::sync::OnceLock::new();
    POVM.get_or_init(|| {
        let projectors = canonical_settings().map(|s| projector(&s));
        let g: Matrix4<C64> = projectors.iter().sum();
        let g_dyn = to_dynamic(&g);
        let g_sqrt = to_static(&hermitian_map(&g_dyn, f64::sqrt));
        let g_inv_sqrt = to_static(&hermitian_map(&g_dyn, |l| 1.0 / l.sqrt()));
        let elements = projectors.map(|p| g_inv_sqrt * p * g_inv_sqrt);
        Povm {
            elements,
            g_sqrt,
            g_inv_sqrt,
        }
    })
}

fn check_counts(counts: &[f64; NUM_SETTINGS]) -> Result<f64> {
    if counts.iter().any(|&n| !(n >= 0.0 && n.is_finite())) {
        return Err(Error::domain("counts must be finite and non-negative"));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::domain("all counts are zero"));
    }
    Ok(total)
}

fn likelihood_terms(probabilities: &[f64; NUM_SETTINGS], counts: &[f64; NUM_SETTINGS]) -> f64 {
    let mut ll = 0.0;
    for (&n, &p) in counts.iter().zip(probabilities) {
        if n > 0.0 {
            ll += if p > 0.0 { n * p.ln() } else { f64::NEG_INFINITY };
        }
    }
    ll
}

/// Multinomial log-likelihood Σ n_k ln(p_k / Σ_j p_j) of `rho` given the
/// canonical-setting counts.
pub fn log_likelihood(rho: &DensityMatrix, counts: &[f64; NUM_SETTINGS]) -> f64 {
    let raw: [f64; NUM_SETTINGS] = canonical_settings()
        .map(|s| (projector(&s) * rho.matrix()).trace().re.max(0.0));
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    likelihood_terms(&raw.map(|p| p / total), counts)
}

fn povm_probabilities(sigma: &Matrix4<C64>) -> [f64; NUM_SETTINGS] {
    povm().elements.each_ref().map(|e| (e * sigma).trace().re.max(0.0))
}

fn normalize_trace(m: Matrix4<C64>) -> Matrix4<C64> {
    let m = (m + m.adjoint()).scale(0.5);
    let tr = m.trace().re;
    m.unscale(tr)
}

/// Maximum-likelihood density matrix for counts on the canonical settings.
pub fn qst_mle(counts: &[f64; NUM_SETTINGS]) -> Result<MleResult> {
    qst_mle_with(counts, MleOptions::default())
}

pub fn qst_mle_with(counts: &[f64; NUM_SETTINGS], options: MleOptions) -> Result<MleResult> {
    let total = check_counts(counts)?;
    let frequencies = counts.map(|n| n / total);
    let povm = povm();

    let mut sigma = normalize_trace(povm.g_sqrt * Matrix4::<C64>::identity() * povm.g_sqrt);
    let mut q = povm_probabilities(&sigma);
    let mut ll = likelihood_terms(&q, counts);
    let mut dilution = options.dilution;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let mut r = Matrix4::<C64>::zeros();
        for k in 0..NUM_SETTINGS {
            if frequencies[k] > 0.0 {
                r += povm.elements[k].scale(frequencies[k] / q[k]);
            }
        }
        let step = Matrix4::<C64>::identity() + r.scale(dilution);
        let candidate = normalize_trace(step * sigma * step.adjoint());
        let candidate_q = povm_probabilities(&candidate);
        let candidate_ll = likelihood_terms(&candidate_q, counts);
        if !(candidate_ll >= ll) {
            dilution *= 0.5;
            if dilution < 1e-12 {
                converged = true;
                break;
            }
            continue;
        }
        let gain = candidate_ll - ll;
        sigma = candidate;
        q = candidate_q;
        ll = candidate_ll;
        dilution = (dilution * 2.0).min(options.max_dilution);
        if gain < options.tolerance {
            converged = true;
            break;
        }
    }

    let mut rho = DensityMatrix::new(normalize_trace(povm.g_inv_sqrt * sigma * povm.g_inv_sqrt))?;
    let mut ll = log_likelihood(&rho, counts);
    // A physical linear-inversion estimate is the exact maximizer, which the
    // iteration only approaches asymptotically.
    if let Ok(linear) = qst_linear_from_counts(counts).and_then(|r| r.project_physical()) {
        let linear_ll = log_likelihood(&linear, counts);
        if linear_ll > ll {
            rho = linear;
            ll = linear_ll;
        }
    }
    if !ll.is_finite() {
        return Err(Error::numerical("maximum-likelihood iteration reached zero likelihood"));
    }
    Ok(MleResult {
        rho,
        log_likelihood: ll,
        iterations,
        converged,
    })
}
