//! Teleportation figures of merit: fully entangled fraction, optimal
//! two-qubit fidelity, controlled-teleportation fidelity for three and four
//! qubits, the Horodecki CHSH value and threshold-crossing search.

use crate::channels::{evolve_pipeline, GhzScenario};
use crate::measures::{bisect, x_state_view, XStateView};
use crate::qmat::{hermitian_eigenvalues, kron, sigma_x, sigma_y, sigma_z, ComplexMatrix, DensityMatrix, C64};
use nalgebra::Matrix3;
use thiserror::Error;

/// Best fidelity reachable by measure-and-prepare strategies.
pub const CLASSICAL_LIMIT: f64 = 2.0 / 3.0;
/// Fidelity above which a CHSH violation is guaranteed (approximately 0.87).
pub const LHV_THRESHOLD: f64 = 0.87;
/// Local-realistic bound of the CHSH expression.
pub const CHSH_BOUND: f64 = 2.0;
/// Grid resolution used by [`fidelity_crossing`] before bisection.
pub const CROSSING_GRID: usize = 1000;
/// Root tolerance of [`fidelity_crossing`].
pub const CROSSING_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelefidError {
    #[error("expected a {expected}-qubit input, got {got} qubits")]
    WrongQubitCount { expected: usize, got: usize },
    #[error("scenario (n = {n}, m = {m}) has no closed form here")]
    UnsupportedScenario { n: usize, m: usize },
}

/// A fidelity value, the analytic branch attaining it and threshold flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub value: f64,
    /// 1-based index of the maximizing branch.
    pub branch: u8,
    pub above_classical: bool,
    pub above_lhv: bool,
}

impl FidelityReport {
    pub fn new(value: f64, branch: u8) -> Self {
        Self {
            value,
            branch,
            above_classical: value > CLASSICAL_LIMIT,
            above_lhv: value > LHV_THRESHOLD,
        }
    }

    /// Maximum of the given branches; ties go to the lowest index.
    pub fn from_branches(branches: &[f64]) -> Self {
        let mut best = 0;
        for (k, &v) in branches.iter().enumerate() {
            if v > branches[best] {
                best = k;
            }
        }
        Self::new(branches[best], best as u8 + 1)
    }
}

/// Correlation tensor and maximal CHSH value of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshReport {
    pub correlation_tensor: [[f64; 3]; 3],
    pub value: f64,
    pub violates: bool,
}

fn require_qubits(rho: &DensityMatrix, n: usize) -> Result<(), TelefidError> {
    if rho.n_qubits() != n {
        return Err(TelefidError::WrongQubitCount {
            expected: n,
            got: rho.n_qubits(),
        });
    }
    Ok(())
}

fn vector(entries: [(usize, C64); 2]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 4];
    for (i, c) in entries {
        v[i] = c * std::f64::consts::FRAC_1_SQRT_2;
    }
    v
}

/// Bell states `Phi+, Phi-, Psi+, Psi-` as amplitude vectors.
pub fn bell_vectors() -> [Vec<C64>; 4] {
    let one = C64::new(1.0, 0.0);
    [
        vector([(0, one), (3, one)]),
        vector([(0, one), (3, -one)]),
        vector([(1, one), (2, one)]),
        vector([(1, one), (2, -one)]),
    ]
}

/// Magic basis `Phi+, i Phi-, i Psi+, Psi-`.
fn magic_vectors() -> [Vec<C64>; 4] {
    let [pp, pm, sp, sm] = bell_vectors();
    let i = C64::new(0.0, 1.0);
    [
        pp,
        pm.iter().map(|c| c * i).collect(),
        sp.iter().map(|c| c * i).collect(),
        sm,
    ]
}

fn sandwich(u: &[C64], rho: &DensityMatrix, v: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += ui.conj() * rho.entry(i, j) * vj;
        }
    }
    acc
}

/// Fully entangled fraction: the largest eigenvalue of the real part of the
/// state written in the magic basis.
pub fn fully_entangled_fraction(rho: &DensityMatrix) -> Result<f64, TelefidError> {
    require_qubits(rho, 2)?;
    let basis = magic_vectors();
    let real = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(sandwich(&basis[i], rho, &basis[j]).re, 0.0));
    let eig = hermitian_eigenvalues(&real).expect("real part of a Hermitian matrix is symmetric");
    Ok(eig[0])
}

/// Overlaps with the four Bell states, in the order of [`bell_vectors`].
pub fn bell_overlaps(rho: &DensityMatrix) -> Result<[f64; 4], TelefidError> {
    require_qubits(rho, 2)?;
    let v = bell_vectors();
    Ok(std::array::from_fn(|k| sandwich(&v[k], rho, &v[k]).re))
}

/// Optimal two-qubit teleportation fidelity `(1 + 2 FEF) / 3`.
///
/// The branch is the Bell state with the largest overlap
/// (1 = Phi+, 2 = Phi-, 3 = Psi+, 4 = Psi-).
pub fn teleport_fidelity_2q(rho: &DensityMatrix) -> Result<FidelityReport, TelefidError> {
    let fef = fully_entangled_fraction(rho)?;
    let overlaps = bell_overlaps(rho)?;
    let branch = FidelityReport::from_branches(&overlaps).branch;
    Ok(FidelityReport::new((1.0 + 2.0 * fef) / 3.0, branch))
}

/// Closed-form two-qubit fidelity of the damped family as the maximum of a
/// `|00>,|11>`-sector branch (1) and a `|01>,|10>`-sector branch (2).
pub fn teleport_fidelity_2q_closed(s: &GhzScenario) -> Result<FidelityReport, TelefidError> {
    if s.n() != 2 {
        return Err(TelefidError::UnsupportedScenario { n: s.n(), m: s.m() });
    }
    let (a, b) = (s.alpha(), s.beta());
    let (p, pp) = (s.p(), s.p_prime());
    let (q, qp) = (1.0 - p, 1.0 - pp);
    let (sv, t, qq) = (p + pp * q, p * pp + q, q * qp);
    let (a2, b2) = (a * a, b * b);
    let [phi, psi] = match s.m() {
        0 => [
            1.0 + a2 + 2.0 * qq * a * b + (1.0 + 2.0 * qq * (qq - 1.0)) * b2,
            1.0 + 2.0 * q * sv * qp * b2,
        ],
        1 => [
            1.0 + qp * (a2 + 2.0 * q * a * b + (1.0 + 2.0 * (q - 1.0) * q * qp) * b2),
            1.0 + pp * a2 + (pp * (p * p + q * q) + 2.0 * p * q * (1.0 - pp * qp)) * b2,
        ],
        _ => [
            1.0 + (pp * pp + qp * qp) * a2 + 2.0 * qq * a * b + (t * t + p * p * qp * qp) * b2,
            1.0 + 2.0 * pp * qp * a2 + 2.0 * p * t * qp * b2,
        ],
    };
    Ok(FidelityReport::from_branches(&[phi / 3.0, psi / 3.0]))
}

/// Horodecki maximal CHSH value `2 sqrt(k1 + k2)` from the two largest
/// eigenvalues of `C^T C`.
pub fn chsh_value(rho: &DensityMatrix) -> Result<ChshReport, TelefidError> {
    require_qubits(rho, 2)?;
    let paulis = [sigma_x(), sigma_y(), sigma_z()];
    let c: [[f64; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| rho.expectation(&kron(&paulis[i], &paulis[j])).re));
    let m = Matrix3::from_fn(|i, j| c[i][j]);
    let mut eig: Vec<f64> = (m.transpose() * m).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    let value = 2.0 * (eig[0] + eig[1]).max(0.0).sqrt();
    Ok(ChshReport {
        correlation_tensor: c,
        value,
        violates: value > CHSH_BOUND,
    })
}

/// Controlled-teleportation fidelity of a three-qubit X-state at controller
/// angle `pi/4`, the maximum of the four branches
///
/// * `F1 = (3 + |D1| + 4(|z1| + |z4|)) / 6`
/// * `F2 = (3 + |D1| + 4(|z2| + |z3|)) / 6`
/// * `F3 = (3 + sqrt(D2^2 + 16(|z1| + |z4|)^2)) / 6`
/// * `F4 = (3 + sqrt(D2^2 + 16(|z2| + |z3|)^2)) / 6`
///
/// with `D1 = a1 - a2 - a3 + a4 + b1 - b2 - b3 + b4` and
/// `D2 = a1 - a2 + a3 - a4 - b1 + b2 - b3 + b4`.
pub fn cqt_fidelity_3q(view: &XStateView) -> Result<FidelityReport, TelefidError> {
    if view.n() != 3 {
        return Err(TelefidError::WrongQubitCount {
            expected: 3,
            got: view.n(),
        });
    }
    Ok(FidelityReport::from_branches(&cqt_branches_3q(view)))
}

/// The four branch values of [`cqt_fidelity_3q`].
pub fn cqt_branches_3q(view: &XStateView) -> [f64; 4] {
    let (a, b) = (view.a(), view.b());
    let z: Vec<f64> = view.z().iter().map(|c| c.norm()).collect();
    let d1 = a[0] - a[1] - a[2] + a[3] + b[0] - b[1] - b[2] + b[3];
    let d2 = a[0] - a[1] + a[2] - a[3] - b[0] + b[1] - b[2] + b[3];
    let (outer, inner) = (z[0] + z[3], z[1] + z[2]);
    [
        (3.0 + d1.abs() + 4.0 * outer) / 6.0,
        (3.0 + d1.abs() + 4.0 * inner) / 6.0,
        (3.0 + (d2 * d2 + 16.0 * outer * outer).sqrt()) / 6.0,
        (3.0 + (d2 * d2 + 16.0 * inner * inner).sqrt()) / 6.0,
    ]
}

/// Closed-form four-qubit controlled-teleportation fidelity of the damped
/// family with both controllers at `pi/4`.
///
/// Partial flips `m = 1, 2, 3` share a single expression.
pub fn cqt_fidelity_4q_closed(s: &GhzScenario) -> Result<FidelityReport, TelefidError> {
    if s.n() != 4 {
        return Err(TelefidError::UnsupportedScenario { n: s.n(), m: s.m() });
    }
    let (a, b) = (s.alpha(), s.beta());
    let (p, pp) = (s.p(), s.p_prime());
    let (q, qp) = (1.0 - p, 1.0 - pp);
    let (sv, t, qq) = (p + pp * q, p * pp + q, q * qp);
    let (a2, b2) = (a * a, b * b);
    let value = match s.m() {
        0 => 2.0 / 3.0 * (a2 + qq * qq * a * b + (sv * sv + q * sv * qp + qq * qq) * b2),
        4 => {
            2.0 / 3.0
                * ((pp * pp + pp * qp + qp * qp) * a2 + qq * qq * a * b + (t * t + p * t * qp + p * p * qp * qp) * b2)
        }
        _ => {
            let k = pp + 2.0 * qp;
            (k * a2
                + 2.0 * qq * qq * a * b
                + (p * p * k + q * q * k + p * q * (1.0 + pp * pp + 4.0 * pp * qp + qp * qp)) * b2)
                / 3.0
        }
    };
    Ok(FidelityReport::new(value, 1))
}

/// Teleportation fidelity of a damped-family scenario: optimal Bennett
/// fidelity for `n = 2`, the three-qubit branch maximum for `n = 3` and the
/// four-qubit closed form for `n = 4`.
pub fn fidelity_of(s: &GhzScenario) -> FidelityReport {
    match s.n() {
        2 => teleport_fidelity_2q(&evolve_pipeline(s)).expect("two-qubit state"),
        3 => cqt_fidelity_3q(&x_state_view(&evolve_pipeline(s)).expect("pipeline outputs are X-shaped"))
            .expect("three-qubit view"),
        _ => cqt_fidelity_4q_closed(s).expect("four-qubit scenario"),
    }
}

/// First `p'` in `[0, 1]` where `f` drops to `threshold` or below.
///
/// Returns `Some(0.0)` when `f(0) <= threshold` and `None` when `f` stays
/// above the threshold on the whole interval. The crossing is bracketed on a
/// uniform grid and bisected to [`CROSSING_TOL`]; the upper bracket end is
/// returned.
pub fn fidelity_crossing(f: impl Fn(f64) -> f64, threshold: f64) -> Option<f64> {
    let above = |x: f64| f(x) > threshold;
    if !above(0.0) {
        return Some(0.0);
    }
    let mut prev = 0.0;
    for k in 1..=CROSSING_GRID {
        let x = k as f64 / CROSSING_GRID as f64;
        if !above(x) {
            return Some(bisect(prev, x, CROSSING_TOL, above).1);
        }
        prev = x;
    }
    None
}
