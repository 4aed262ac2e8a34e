//! Localizable concurrence: the largest average concurrence of a qubit pair
//! reachable by rank-1 projective measurements on every other qubit.

use crate::qmat::{
    hermitian_eigen, hermitian_eigenvalues, kron, sigma_y, ComplexMatrix, DensityMatrix, C64, NULL_PROBABILITY,
};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Grid points per angle in the coarse search.
pub const GRID_POINTS: usize = 15;
/// Number of grid optima refined by pattern search.
pub const REFINE_SEEDS: usize = 5;
/// Smallest pattern-search step before the search stops.
pub const MIN_STEP: f64 = 1e-7;
/// Tolerance of [`pair_symmetry_check`].
pub const PAIR_SYMMETRY_TOL: f64 = 1e-6;
/// Eigenvalues of `sqrt(rho) rho~ sqrt(rho)` below this fraction of the
/// largest one are rounding noise and are treated as zero before the square
/// root, which would otherwise amplify them to about `1e-8`.
pub const EIGEN_NOISE_FLOOR: f64 = 1e-13;

const REAL_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizableError {
    #[error("localizable concurrence needs 3 or 4 qubits, got {0}")]
    UnsupportedQubitCount(usize),
    #[error("invalid qubit pair ({0}, {1})")]
    InvalidPair(usize, usize),
    #[error("basis has {got} angle pairs, expected {expected}")]
    BasisLength { expected: usize, got: usize },
}

/// Bloch angles `(theta, phi)` for each measured qubit, in ascending qubit
/// order. Each pair defines the projectors onto `cos(theta/2)|0> +
/// e^{i phi} sin(theta/2)|1>` and its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub angles: Vec<(f64, f64)>,
}

impl MeasurementBasis {
    pub fn new(angles: Vec<(f64, f64)>) -> Self {
        Self { angles }
    }

    /// Every measured qubit in the `X` eigenbasis.
    pub fn equatorial(count: usize) -> Self {
        Self {
            angles: vec![(PI / 2.0, 0.0); count],
        }
    }

    /// Every measured qubit in the computational basis.
    pub fn computational(count: usize) -> Self {
        Self {
            angles: vec![(0.0, 0.0); count],
        }
    }

    /// The two outcome vectors of each measured qubit.
    fn outcome_vectors(&self) -> Vec<[[C64; 2]; 2]> {
        self.angles
            .iter()
            .map(|&(theta, phi)| {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let e = C64::from_polar(1.0, phi);
                [[C64::new(c, 0.0), e * s], [C64::new(-s, 0.0), e * c]]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizableResult {
    pub value: f64,
    pub optimal_basis: MeasurementBasis,
    /// 1-based qubit indices of the pair.
    pub pair: (usize, usize),
    /// Best value on the coarse grid before refinement.
    pub grid_value: f64,
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let (vals, vecs) = hermitian_eigen(rho.matrix()).expect("density matrices are Hermitian");
    let root = ComplexMatrix::from_fn(4, 4, |i, j| {
        (0..4).fold(C64::new(0.0, 0.0), |acc, k| {
            acc + vecs[(i, k)] * vals[k].max(0.0).sqrt() * vecs[(j, k)].conj()
        })
    });
    let yy = kron(&sigma_y(), &sigma_y());
    let conj = ComplexMatrix::from_fn(4, 4, |i, j| rho.matrix()[(i, j)].conj());
    let tilde = conj.conjugate_by(&yy);
    let r = root.matmul(&tilde).matmul(&root);
    let r = r.add(&r.adjoint()).scale_real(0.5);
    let mu = hermitian_eigenvalues(&r).expect("symmetrized");
    let floor = EIGEN_NOISE_FLOOR * mu[0].max(1.0);
    let lam: Vec<f64> = mu
        .into_iter()
        .map(|x| if x <= floor { 0.0 } else { x.sqrt() })
        .collect();
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

fn measured_qubits(n: usize, pair: (usize, usize)) -> Result<Vec<usize>, LocalizableError> {
    if !(3..=4).contains(&n) {
        return Err(LocalizableError::UnsupportedQubitCount(n));
    }
    let (i, j) = pair;
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(LocalizableError::InvalidPair(i, j));
    }
    Ok((1..=n).filter(|&k| k != i && k != j).collect())
}

/// Average concurrence `sum_k p_k C(rho_ij^(k))` over all outcomes of the
/// given measurement on the qubits outside `pair`.
pub fn conditional_concurrence(
    rho: &DensityMatrix,
    pair: (usize, usize),
    basis: &MeasurementBasis,
) -> Result<f64, LocalizableError> {
    let n = rho.n_qubits();
    let measured = measured_qubits(n, pair)?;
    if basis.angles.len() != measured.len() {
        return Err(LocalizableError::BasisLength {
            expected: measured.len(),
            got: basis.angles.len(),
        });
    }
    Ok(conditional_unchecked(rho, pair, &measured, basis))
}

fn conditional_unchecked(
    rho: &DensityMatrix,
    pair: (usize, usize),
    measured: &[usize],
    basis: &MeasurementBasis,
) -> f64 {
    let n = rho.n_qubits();
    let vectors = basis.outcome_vectors();
    let bit = |q: usize| n - q;
    let r_count = 1usize << measured.len();
    let full_index = |pair_idx: usize, r: usize| {
        let mut idx = 0usize;
        idx |= ((pair_idx >> 1) & 1) << bit(pair.0);
        idx |= (pair_idx & 1) << bit(pair.1);
        for (k, &q) in measured.iter().enumerate() {
            let b = (r >> (measured.len() - 1 - k)) & 1;
            idx |= b << bit(q);
        }
        idx
    };
    let mut total = 0.0;
    for outcome in 0..r_count {
        let amp: Vec<C64> = (0..r_count)
            .map(|r| {
                (0..measured.len()).fold(C64::new(1.0, 0.0), |acc, k| {
                    let o = (outcome >> (measured.len() - 1 - k)) & 1;
                    let b = (r >> (measured.len() - 1 - k)) & 1;
                    acc * vectors[k][o][b]
                })
            })
            .collect();
        let sigma = ComplexMatrix::from_fn(4, 4, |u, v| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..r_count {
                if amp[r] == C64::new(0.0, 0.0) {
                    continue;
                }
                for rp in 0..r_count {
                    acc += amp[r].conj() * rho.entry(full_index(u, r), full_index(v, rp)) * amp[rp];
                }
            }
            acc
        });
        let prob = sigma.trace().re;
        if prob < NULL_PROBABILITY {
            continue;
        }
        let state = DensityMatrix::from_trusted(sigma.scale_real(1.0 / prob));
        total += prob * concurrence(&state);
    }
    total
}

fn is_real(rho: &DensityMatrix) -> bool {
    rho.matrix().entries().iter().all(|c| c.im.abs() <= REAL_TOL)
}

fn grid_angles(phi_span: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(GRID_POINTS * GRID_POINTS);
    for a in 0..GRID_POINTS {
        let theta = PI * a as f64 / (GRID_POINTS - 1) as f64;
        for b in 0..GRID_POINTS {
            out.push((theta, phi_span * b as f64 / GRID_POINTS as f64));
        }
    }
    out
}

/// Maximizes [`conditional_concurrence`] over measurement bases: a
/// `15 x 15` (theta, phi) grid per measured qubit, then pattern search from
/// the five best grid points.
///
/// Only `phi` in `[0, pi)` is searched on the grid for real input matrices.
/// Shifting `phi` by `pi` acts as a `Z` gate on the measured qubit, which on
/// real X-shaped states equals a `Z` gate on one qubit of the pair and leaves
/// the concurrence unchanged.
pub fn localizable_concurrence(
    rho: &DensityMatrix,
    pair: (usize, usize),
) -> Result<LocalizableResult, LocalizableError> {
    let measured = measured_qubits(rho.n_qubits(), pair)?;
    let phi_span = if is_real(rho) { PI } else { 2.0 * PI };
    let single = grid_angles(phi_span);
    let count = measured.len();
    let total = single.len().pow(count as u32);
    let candidates: Vec<MeasurementBasis> = (0..total)
        .map(|mut k| {
            let mut angles = vec![(0.0, 0.0); count];
            for slot in (0..count).rev() {
                angles[slot] = single[k % single.len()];
                k /= single.len();
            }
            MeasurementBasis::new(angles)
        })
        .collect();
    let values: Vec<f64> = candidates
        .par_iter()
        .map(|b| conditional_unchecked(rho, pair, &measured, b))
        .collect();

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));
    let grid_value = values[order[0]];

    let objective = |b: &MeasurementBasis| conditional_unchecked(rho, pair, &measured, b);
    let initial_step = PI / (GRID_POINTS - 1) as f64;
    let refined: Vec<(f64, MeasurementBasis)> = order
        .iter()
        .take(REFINE_SEEDS)
        .map(|&k| pattern_search(&objective, candidates[k].clone(), values[k], initial_step))
        .collect();
    let (value, optimal_basis) = refined
        .into_iter()
        .fold((grid_value, candidates[order[0]].clone()), |best, cand| {
            if cand.0 > best.0 {
                cand
            } else {
                best
            }
        });
    Ok(LocalizableResult {
        value,
        optimal_basis,
        pair,
        grid_value,
    })
}

/// Compass search over all angles: tries `+-step` along each coordinate,
/// accepts the first improvement and halves the step when none is found.
fn pattern_search(
    objective: &impl Fn(&MeasurementBasis) -> f64,
    mut basis: MeasurementBasis,
    mut value: f64,
    mut step: f64,
) -> (f64, MeasurementBasis) {
    let dims = basis.angles.len() * 2;
    while step > MIN_STEP {
        let mut improved = false;
        for d in 0..dims {
            for sign in [1.0, -1.0] {
                let mut trial = basis.clone();
                let slot = &mut trial.angles[d / 2];
                if d % 2 == 0 {
                    slot.0 += sign * step;
                } else {
                    slot.1 += sign * step;
                }
                let v = objective(&trial);
                if v > value + 1e-15 {
                    basis = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, basis)
}

/// True when the three pairwise localizable concurrences of a three-qubit
/// state agree within [`PAIR_SYMMETRY_TOL`].
pub fn pair_symmetry_check(rho: &DensityMatrix) -> Result<bool, LocalizableError> {
    if rho.n_qubits() != 3 {
        return Err(LocalizableError::UnsupportedQubitCount(rho.n_qubits()));
    }
    let values: Vec<f64> = [(1, 2), (2, 3), (1, 3)]
        .into_iter()
        .map(|pair| localizable_concurrence(rho, pair).map(|r| r.value))
        .collect::<Result<_, _>>()?;
    let (lo, hi) = values
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(hi - lo <= PAIR_SYMMETRY_TOL)
}
