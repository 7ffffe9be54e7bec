#![allow(dead_code)]

use modegate::modes::TransferMatrix;
use modegate::tomo::DensityMatrix;
use modegate::C64;
use nalgebra::{DMatrix, Matrix4, Vector2, Vector4};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng) -> Matrix4<C64> {
    let g = DMatrix::from_fn(4, 4, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = Matrix4::zeros();
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = d / d.norm();
        for i in 0..4 {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

pub fn random_transfer(rng: &mut impl Rng) -> TransferMatrix {
    let t = TransferMatrix::new(random_unitary(rng)).unwrap();
    assert!(t.is_lossless());
    t
}

pub fn random_vector(rng: &mut impl Rng) -> Vector4<C64> {
    Vector4::from_fn(|_, _| gaussian_complex(rng)).normalize()
}

pub fn random_qubit(rng: &mut impl Rng) -> Vector2<C64> {
    Vector2::from_fn(|_, _| gaussian_complex(rng)).normalize()
}

/// Two random orthonormal vectors.
pub fn random_orthonormal_pair(rng: &mut impl Rng) -> (Vector4<C64>, Vector4<C64>) {
    let u = random_vector(rng);
    let w = random_vector(rng);
    let v = (w - u * u.dotc(&w)).normalize();
    (u, v)
}

/// Random full-rank mixed state ρ = G G† / Tr.
pub fn random_density(rng: &mut impl Rng) -> DensityMatrix {
    let g = Matrix4::from_fn(|_, _| gaussian_complex(rng));
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).unwrap()
}

pub fn random_pure(rng: &mut impl Rng) -> DensityMatrix {
    DensityMatrix::pure(&random_vector(rng))
}

pub fn random_product(rng: &mut impl Rng) -> DensityMatrix {
    let a = random_qubit(rng);
    let b = random_qubit(rng);
    DensityMatrix::pure(&Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
