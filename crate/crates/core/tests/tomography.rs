mod common;

use common::{median, random_density, random_product, random_pure, random_unitary, rng};
use modegate::counts::{sample_counts, CountModel};
use modegate::tomo::{
    born, canonical_input_states, canonical_settings, chsh_with_signs, log_likelihood, projector,
    qpt, qst_linear, qst_linear_from_counts, qst_mle, state_fidelity, BellState, ChshAngles,
    ChshSigns, DensityMatrix, NUM_SETTINGS,
};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::SQRT_2;

fn probabilities(rho: &DensityMatrix) -> [f64; NUM_SETTINGS] {
    canonical_settings().map(|s| born(rho, &projector(&s)))
}

#[test]
fn linear_inversion_roundtrip() {
    let mut r = rng(7);
    for _ in 0..100 {
        let rho = random_density(&mut r);
        let back = qst_linear(&probabilities(&rho)).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-10);
    }
}

const ALL_SIGNS: [ChshSigns; 8] = [
    ChshSigns([1.0, -1.0, 1.0, 1.0]),
    ChshSigns([-1.0, 1.0, -1.0, -1.0]),
    ChshSigns([1.0, -1.0, -1.0, -1.0]),
    ChshSigns([-1.0, 1.0, 1.0, 1.0]),
    ChshSigns([1.0, 1.0, 1.0, -1.0]),
    ChshSigns([1.0, 1.0, -1.0, 1.0]),
    ChshSigns([-1.0, -1.0, -1.0, 1.0]),
    ChshSigns([-1.0, -1.0, 1.0, -1.0]),
];

fn random_angles(r: &mut impl Rng) -> ChshAngles {
    ChshAngles {
        a: r.random_range(-180.0..180.0),
        a_prime: r.random_range(-180.0..180.0),
        b: r.random_range(-180.0..180.0),
        b_prime: r.random_range(-180.0..180.0),
    }
}

#[test]
fn tsirelson_bound() {
    let mut r = rng(99);
    for k in 0..1000 {
        let rho = if k % 2 == 0 { random_pure(&mut r) } else { random_density(&mut r) };
        let angles = random_angles(&mut r);
        for signs in ALL_SIGNS {
            let s = chsh_with_signs(&rho, &angles, signs).s;
            assert!(s.abs() <= 2.0 * SQRT_2 + 1e-9, "{s}");
        }
    }
}

#[test]
fn product_states_obey_local_bound() {
    let mut r = rng(100);
    for _ in 0..1000 {
        let rho = random_product(&mut r);
        let angles = if r.random_bool(0.5) { ChshAngles::STANDARD } else { random_angles(&mut r) };
        for signs in ALL_SIGNS {
            let s = chsh_with_signs(&rho, &angles, signs).s;
            assert!(s.abs() <= 2.0 + 1e-9, "{s}");
        }
    }
}

#[test]
fn mle_dominates_projected_linear_inversion() {
    for seed in 0..30u64 {
        let mut r = rng(seed);
        let truth = random_density(&mut r).mix(&BellState::ALL[(seed % 4) as usize].density(), 0.8);
        let shots = [200, 1000, 10_000][(seed % 3) as usize];
        let records = sample_counts(&probabilities(&truth), shots, 0.0, CountModel::Poisson, seed).unwrap();
        let counts: [f64; NUM_SETTINGS] = std::array::from_fn(|k| records[k].counts as f64);
        let linear = qst_linear_from_counts(&counts).unwrap().project_physical().unwrap();
        let fit = qst_mle(&counts).unwrap();
        assert!(fit.rho.is_physical(1e-8));
        assert!(
            fit.log_likelihood >= log_likelihood(&linear, &counts) - 1e-9,
            "seed {seed}: {} < {}",
            fit.log_likelihood,
            log_likelihood(&linear, &counts)
        );
    }
}

#[test]
fn mle_statistical_oracle() {
    let phi = BellState::PhiPlus.density();
    let probs = probabilities(&phi);
    let fidelities: Vec<f64> = (0..20)
        .map(|seed| {
            let records = sample_counts(&probs, 100_000, 0.0, CountModel::Poisson, seed).unwrap();
            let counts: [f64; NUM_SETTINGS] = std::array::from_fn(|k| records[k].counts as f64);
            state_fidelity(&qst_mle(&counts).unwrap().rho, &phi).unwrap()
        })
        .collect();
    let m = median(fidelities);
    assert!(m >= 0.999, "median fidelity {m}");
}

#[test]
fn chi_of_random_unitaries_is_trace_preserving() {
    let mut r = rng(5);
    for _ in 0..10 {
        let u = random_unitary(&mut r);
        let outputs: Vec<DensityMatrix> = canonical_input_states()
            .iter()
            .map(|rho| DensityMatrix::new(u * rho.matrix() * u.adjoint()).unwrap())
            .collect();
        let chi = qpt(&outputs).unwrap();
        assert!(chi.trace_preservation_defect() < 1e-6);
        assert_eq!(chi.rank(1e-8), 1);
        assert!((chi.trace() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fidelity_is_bounded_and_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_density(&mut r);
        let b = random_pure(&mut r);
        let f = state_fidelity(&a, &b).unwrap();
        let g = state_fidelity(&b, &a).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - g).abs() < 1e-9);
        prop_assert!((state_fidelity(&b, &b).unwrap() - 1.0).abs() < 1e-9);
        // for pure b, F = ⟨b|a|b⟩ = Tr(a b)
        let overlap = (a.matrix() * b.matrix()).trace().re;
        prop_assert!((f - overlap).abs() < 1e-9);
    }
}
