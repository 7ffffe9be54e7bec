//! Small dense linear-algebra helpers shared by the tomography code.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const SPECTRAL_CUTOFF: f64 = 1e-13;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn to_dynamic(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_iterator(4, 4, m.iter().copied())
}

pub fn to_static(m: &DMatrix<C64>) -> Matrix4<C64> {
    assert_eq!(m.shape(), (4, 4));
    Matrix4::from_iterator(m.iter().copied())
}

/// (M + M†)/2
pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0[0]
}

/// V f(Λ) V† for a Hermitian matrix.
pub fn hermitian_map(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (col, &lambda) in values.iter().enumerate() {
        let s = f(lambda);
        for row in 0..n {
            scaled[(row, col)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

/// Threshold below which eigenvalues of a PSD matrix are treated as round-off.
fn spectral_floor(values: &[f64]) -> f64 {
    SPECTRAL_CUTOFF * values.iter().copied().fold(0.0, f64::max)
}

/// Square roots of PSD eigenvalues, with round-off eigenvalues set to zero.
/// Without the cutoff, a 1e-16 eigenvalue contributes 1e-8 after the root.
pub fn spectral_sqrt(values: &[f64]) -> Vec<f64> {
    let floor = spectral_floor(values);
    values
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .collect()
}

/// Principal square root of a PSD matrix; negative and round-off
/// eigenvalues are clipped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(m);
    let roots = spectral_sqrt(&values);
    let mut scaled = vectors.clone();
    for (col, &r) in roots.iter().enumerate() {
        scaled.column_mut(col).scale_mut(r);
    }
    &scaled * vectors.adjoint()
}

/// Euclidean projection of `values` onto the probability simplex: the
/// eigenvalues shifted by a common μ and clipped at zero so they sum to one.
pub fn simplex_projection(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut running = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        running += v;
        let candidate = (running - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

/// Nearest unit-trace PSD matrix in Frobenius norm to the Hermitian part of
/// `m` after trace normalization.
pub fn project_psd_unit_trace(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let tr = trace(m).re;
    if !(tr > f64::EPSILON) {
        return Err(Error::numerical("matrix has no positive spectral weight"));
    }
    let (values, vectors) = hermitian_eigen(&m.unscale(tr));
    let projected = simplex_projection(&values);
    let mut scaled = vectors.clone();
    for (col, &p) in projected.iter().enumerate() {
        scaled.column_mut(col).scale_mut(p);
    }
    Ok(hermitize(&(&scaled * vectors.adjoint())))
}

/// Uhlmann fidelity [Tr √(√a b √a)]² of two PSD matrices.
///
/// Fails when either argument has an eigenvalue below `-tolerance`.
pub fn uhlmann_fidelity(a: &DMatrix<C64>, b: &DMatrix<C64>, tolerance: f64) -> Result<f64> {
    for (name, m) in [("first", a), ("second", b)] {
        let lo = min_eigenvalue(m);
        if lo < -tolerance {
            return Err(Error::domain(format!(
                "{name} argument is not positive semidefinite (eigenvalue {lo:.3e})"
            )));
        }
    }
    let root = psd_sqrt(a);
    let inner = &root * b * &root;
    let (values, _) = hermitian_eigen(&inner);
    let tr: f64 = spectral_sqrt(&values).iter().sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}
