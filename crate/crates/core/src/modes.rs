//! Physical layer: the four-mode space, component transfer matrices, circuit
//! composition, labeled two-photon propagation and post-selection onto the
//! one-photon-per-rail subspace.
//!
//! Mode indices are fixed throughout the crate:
//!
//! | index | rail    | transverse |
//! |-------|---------|------------|
//! | 0     | control | TE0        |
//! | 1     | control | TE1        |
//! | 2     | target  | TE0        |
//! | 3     | target  | TE1        |
//!
//! Two-qubit vectors over (control mode, target mode) are flattened control
//! major: `2 * c + t` with `TE0 = 0`, `TE1 = 1`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{to_dynamic, C64, I, ONE, ZERO};

pub const NUM_MODES: usize = 4;

const PASSIVITY_TOLERANCE: f64 = 1e-9;
const UNITARITY_TOLERANCE: f64 = 1e-12;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rail {
    Control,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transverse {
    TE0,
    TE1,
}

impl Transverse {
    pub const fn bit(self) -> usize {
        match self {
            Transverse::TE0 => 0,
            Transverse::TE1 => 1,
        }
    }

    pub const fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Transverse::TE0
        } else {
            Transverse::TE1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub rail: Rail,
    pub transverse: Transverse,
}

impl ModeId {
    pub const ALL: [ModeId; NUM_MODES] = [
        ModeId::new(Rail::Control, Transverse::TE0),
        ModeId::new(Rail::Control, Transverse::TE1),
        ModeId::new(Rail::Target, Transverse::TE0),
        ModeId::new(Rail::Target, Transverse::TE1),
    ];

    pub const fn new(rail: Rail, transverse: Transverse) -> Self {
        Self { rail, transverse }
    }

    pub const fn index(self) -> usize {
        let base = match self.rail {
            Rail::Control => 0,
            Rail::Target => 2,
        };
        base + self.transverse.bit()
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

/// A passive linear map on the four optical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    matrix: Matrix4<C64>,
    lossless: bool,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
            lossless: true,
        }
    }

    /// Wraps an arbitrary matrix, rejecting gain. The lossless flag is set when
    /// the matrix is unitary to within 1e-12.
    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let out = Self {
            lossless: is_unitary(&matrix),
            matrix,
        };
        let smax = out.singular_values()[0];
        if smax > 1.0 + PASSIVITY_TOLERANCE {
            return Err(Error::domain(format!(
                "transfer matrix has gain (largest singular value {smax})"
            )));
        }
        Ok(out)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [f64; NUM_MODES] {
        let svd = to_dynamic(&self.matrix).svd(false, false);
        let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        [values[0], values[1], values[2], values[3]]
    }

    pub fn apply(&self, v: &Vector4<C64>) -> Vector4<C64> {
        self.matrix * v
    }

    /// Largest entrywise deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

fn unitarity_defect(m: &Matrix4<C64>) -> f64 {
    let gram = m.adjoint() * m;
    (gram - Matrix4::<C64>::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn is_unitary(m: &Matrix4<C64>) -> bool {
    unitarity_defect(m) <= UNITARITY_TOLERANCE
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {value} is outside [0, 1]")))
    }
}

/// Symmetric beamsplitter block `[[t, i c], [i c, t]]` written onto modes `a`, `b`.
fn couple(m: &mut Matrix4<C64>, a: usize, b: usize, cross_ratio: f64) {
    let through = C64::new((1.0 - cross_ratio).sqrt(), 0.0);
    let cross = I * cross_ratio.sqrt();
    m[(a, a)] = through;
    m[(b, b)] = through;
    m[(a, b)] = cross;
    m[(b, a)] = cross;
}

/// Mode-dependent directional coupler: TE1 is exchanged between the rails with
/// power ratio `cross_ratio`, TE0 passes untouched.
pub fn tmddc_matrix(cross_ratio: f64) -> Result<TransferMatrix> {
    tmddc_matrix_with_residual(cross_ratio, 0.0)
}

/// Directional coupler with an additional (normally zero) TE0 cross coupling.
pub fn tmddc_matrix_with_residual(cross_ratio: f64, te0_cross_ratio: f64) -> Result<TransferMatrix> {
    check_unit_interval("cross_ratio", cross_ratio)?;
    check_unit_interval("te0_cross_ratio", te0_cross_ratio)?;
    let mut m = Matrix4::identity();
    couple(&mut m, 0, 2, te0_cross_ratio);
    couple(&mut m, 1, 3, cross_ratio);
    Ok(TransferMatrix { matrix: m, lossless: true })
}

/// Multimode attenuator on one rail, with independent TE0 and TE1 power transmissions.
pub fn mma_matrix(
    rail: Rail,
    te0_power_transmission: f64,
    te1_power_transmission: f64,
) -> Result<TransferMatrix> {
    check_unit_interval("te0_power_transmission", te0_power_transmission)?;
    check_unit_interval("te1_power_transmission", te1_power_transmission)?;
    let mut m = Matrix4::identity();
    m[(ModeId::new(rail, Transverse::TE0).index(), ModeId::new(rail, Transverse::TE0).index())] =
        C64::new(te0_power_transmission.sqrt(), 0.0);
    m[(ModeId::new(rail, Transverse::TE1).index(), ModeId::new(rail, Transverse::TE1).index())] =
        C64::new(te1_power_transmission.sqrt(), 0.0);
    Ok(TransferMatrix {
        matrix: m,
        lossless: te0_power_transmission == 1.0 && te1_power_transmission == 1.0,
    })
}

/// Diagonal insertion loss; entries are amplitude transmissions.
pub fn loss_matrix(per_mode_amplitude: [f64; NUM_MODES]) -> Result<TransferMatrix> {
    for (k, &a) in per_mode_amplitude.iter().enumerate() {
        check_unit_interval(&format!("amplitude transmission of mode {k}"), a)?;
    }
    let m = Matrix4::from_diagonal(&Vector4::from_iterator(
        per_mode_amplitude.iter().map(|&a| C64::new(a, 0.0)),
    ));
    Ok(TransferMatrix {
        matrix: m,
        lossless: per_mode_amplitude.iter().all(|&a| a == 1.0),
    })
}

/// Chains stages in propagation order: the first stage acts first.
pub fn compose(stages: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = stages
        .split_first()
        .ok_or_else(|| Error::domain("cannot compose an empty list of stages"))?;
    let mut acc = first.clone();
    for stage in rest {
        acc = TransferMatrix {
            matrix: stage.matrix * acc.matrix,
            lossless: acc.lossless && stage.lossless,
        };
    }
    Ok(acc)
}

/// Nominal component parameters of the gate. Defaults are the design values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// TE1 power cross-coupling ratio of the directional coupler.
    pub cross_ratio: f64,
    /// TE0 power cross-coupling ratio of the directional coupler.
    pub te0_cross_ratio: f64,
    /// TE0 power transmission of each attenuator.
    pub mma_te0_transmission: f64,
    /// TE1 power transmission of each attenuator.
    pub mma_te1_transmission: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            cross_ratio: 2.0 / 3.0,
            te0_cross_ratio: 0.0,
            mma_te0_transmission: 1.0 / 3.0,
            mma_te1_transmission: 1.0,
        }
    }
}

/// Phenomenological imperfections of the source, chip and detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Two-photon wavepacket overlap at zero delay, in [0, 1].
    pub indistinguishability: f64,
    /// Amplitude transmission of each output mode, in [0, 1].
    pub transmission: [f64; NUM_MODES],
    /// Accidental coincidences added to every measurement setting.
    pub background: f64,
    /// Photon pairs sent per measurement setting.
    pub shots: u64,
    /// Width of the Gaussian overlap as a function of delay.
    pub coherence_width: f64,
    pub device: DeviceParams,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            indistinguishability: 1.0,
            transmission: [1.0; NUM_MODES],
            background: 0.0,
            shots: 10_000,
            coherence_width: 1.0,
            device: DeviceParams::default(),
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("indistinguishability", self.indistinguishability)?;
        for (k, &a) in self.transmission.iter().enumerate() {
            check_unit_interval(&format!("transmission[{k}]"), a)?;
        }
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return Err(Error::domain(format!("background = {} must be >= 0", self.background)));
        }
        if self.shots == 0 {
            return Err(Error::domain("shots must be positive"));
        }
        if !(self.coherence_width > 0.0 && self.coherence_width.is_finite()) {
            return Err(Error::domain(format!(
                "coherence_width = {} must be > 0",
                self.coherence_width
            )));
        }
        check_unit_interval("device.cross_ratio", self.device.cross_ratio)?;
        check_unit_interval("device.te0_cross_ratio", self.device.te0_cross_ratio)?;
        check_unit_interval("device.mma_te0_transmission", self.device.mma_te0_transmission)?;
        check_unit_interval("device.mma_te1_transmission", self.device.mma_te1_transmission)?;
        Ok(())
    }
}

/// Coupler, the two attenuators and output loss, in propagation order.
pub fn cnot_circuit(noise: &NoiseModel) -> Result<TransferMatrix> {
    noise.validate()?;
    let d = &noise.device;
    compose(&[
        tmddc_matrix_with_residual(d.cross_ratio, d.te0_cross_ratio)?,
        mma_matrix(Rail::Control, d.mma_te0_transmission, d.mma_te1_transmission)?,
        mma_matrix(Rail::Target, d.mma_te0_transmission, d.mma_te1_transmission)?,
        loss_matrix(noise.transmission)?,
    ])
}

/// Labeled two-photon amplitude: entry (m, n) is photon 1 in mode m, photon 2 in mode n.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAmplitude(Matrix4<C64>);

impl JointAmplitude {
    pub fn from_matrix(m: Matrix4<C64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn get(&self, photon1: ModeId, photon2: ModeId) -> C64 {
        self.0[(photon1.index(), photon2.index())]
    }

    /// Σ |A[m][n]|²
    pub fn total_weight(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn check_normalized(name: &str, v: &Vector4<C64>) -> Result<()> {
    let n = v.norm();
    if (n - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::domain(format!("{name} has norm {n}, expected 1")));
    }
    Ok(())
}

/// Propagates one photon in `u` and one in `v` through `circuit`.
pub fn evolve_pair(
    circuit: &TransferMatrix,
    u: &Vector4<C64>,
    v: &Vector4<C64>,
) -> Result<JointAmplitude> {
    check_normalized("photon 1 input", u)?;
    check_normalized("photon 2 input", v)?;
    let out1 = circuit.apply(u);
    let out2 = circuit.apply(v);
    Ok(JointAmplitude(out1 * out2.transpose()))
}

fn check_overlap(x: f64) -> Result<()> {
    check_unit_interval("indistinguishability", x)
}

/// Probability of detecting one photon in `m` and one in `n` (unordered), with
/// the exchange term weighted by the wavepacket overlap `x`.
pub fn coincidence_probability(a: &JointAmplitude, m: ModeId, n: ModeId, x: f64) -> Result<f64> {
    check_overlap(x)?;
    let p = if m == n {
        (1.0 + x) * a.get(m, m).norm_sqr()
    } else {
        let mn = a.get(m, n);
        let nm = a.get(n, m);
        mn.norm_sqr() + nm.norm_sqr() + 2.0 * x * (mn * nm.conj()).re
    };
    Ok(p.max(0.0))
}

/// Probabilities of all unordered output pairs `(m, n)`, `m <= n`.
pub fn outcome_distribution(a: &JointAmplitude, x: f64) -> Result<Vec<((ModeId, ModeId), f64)>> {
    let mut out = Vec::with_capacity(NUM_MODES * (NUM_MODES + 1) / 2);
    for i in 0..NUM_MODES {
        for j in i..NUM_MODES {
            let (m, n) = (ModeId::ALL[i], ModeId::ALL[j]);
            out.push(((m, n), coincidence_probability(a, m, n, x)?));
        }
    }
    Ok(out)
}

/// Two-photon state restricted to one photon per rail, unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelectedState {
    /// Over (control mode, target mode), control major.
    pub rho: Matrix4<C64>,
    pub success_probability: f64,
}

fn rail_split(a: &JointAmplitude) -> (Vector4<C64>, Vector4<C64>) {
    let mut first_in_control = Vector4::zeros();
    let mut second_in_control = Vector4::zeros();
    for c in [Transverse::TE0, Transverse::TE1] {
        for t in [Transverse::TE0, Transverse::TE1] {
            let k = 2 * c.bit() + t.bit();
            let cm = ModeId::new(Rail::Control, c);
            let tm = ModeId::new(Rail::Target, t);
            first_in_control[k] = a.get(cm, tm);
            second_in_control[k] = a.get(tm, cm);
        }
    }
    (first_in_control, second_in_control)
}

/// Coherent amplitude over (control mode, target mode) for perfectly
/// indistinguishable photons.
pub fn coincidence_amplitudes(a: &JointAmplitude) -> Vector4<C64> {
    let (p12, p21) = rail_split(a);
    p12 + p21
}

/// Projects the two-photon state onto the one-photon-per-rail subspace.
pub fn postselect(a: &JointAmplitude, x: f64) -> Result<PostSelectedState> {
    check_overlap(x)?;
    let (p12, p21) = rail_split(a);
    let b = p12 + p21;
    let coherent = b * b.adjoint();
    let incoherent = p12 * p12.adjoint() + p21 * p21.adjoint();
    let rho = coherent.scale(x) + incoherent.scale(1.0 - x);
    let rho = (rho + rho.adjoint()).scale(0.5);
    let success_probability = rho.diagonal().iter().map(|z| z.re).sum();
    Ok(PostSelectedState {
        rho,
        success_probability,
    })
}

/// Unit vector on a single mode.
pub fn basis_vector(mode: ModeId) -> Vector4<C64> {
    let mut v = Vector4::from_element(ZERO);
    v[mode.index()] = ONE;
    v
}
