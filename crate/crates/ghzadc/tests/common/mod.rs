//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod golden;

use ghzadc::channels::GhzScenario;
use ghzadc::qmat::{ComplexMatrix, DensityMatrix, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Uniformly drawn scenarios with `n` in `ns` and any valid flip count.
pub fn scenarios(ns: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = GhzScenario> {
    ns.prop_flat_map(|n| (Just(n), 0..=n, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64))
        .prop_map(|(n, m, a2, p, pp)| GhzScenario::from_alpha2(n, m, a2, p, pp).expect("ranges are valid"))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` from the eigen-decomposition
/// of the Jacobi matrix.
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(k, k, |i, j| {
        if i.abs_diff(j) == 1 {
            let l = i.max(j) as f64;
            l / (4.0 * l * l - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..k)
        .map(|c| (eig.eigenvalues[c], 2.0 * eig.eigenvectors[(0, c)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn bits(i: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| (i >> (n - 1 - k)) & 1).collect()
}

fn index(b: &[usize]) -> usize {
    b.iter().fold(0, |acc, &x| (acc << 1) | x)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Average of `rho` over the GHZ symmetry group: qubit permutations, the
/// collective bit flip, complex conjugation and correlated phase rotations
/// `diag(e^{i f_k}, e^{-i f_k})` with `sum f_k = 0`, the free phases running
/// over an 8-point grid each.
pub fn group_average(rho: &DensityMatrix) -> DensityMatrix {
    let n = rho.n_qubits();
    let d = rho.dim();
    let grid = 8usize;
    let free = n - 1;
    let phase_count = grid.pow(free as u32);
    let perms = permutations(n);
    let mut acc = vec![C64::new(0.0, 0.0); d * d];
    for perm in &perms {
        for flip in [0usize, 1] {
            let map = |i: usize| -> usize {
                let b = bits(i, n);
                let moved: Vec<usize> = (0..n).map(|k| b[perm[k]] ^ flip).collect();
                index(&moved)
            };
            for code in 0..phase_count {
                let mut phases = vec![0.0; n];
                let mut c = code;
                for slot in phases.iter_mut().take(free) {
                    *slot = 2.0 * std::f64::consts::PI * (c % grid) as f64 / grid as f64;
                    c /= grid;
                }
                phases[n - 1] = -phases[..free].iter().sum::<f64>();
                let phase = |i: usize| -> f64 {
                    bits(i, n)
                        .iter()
                        .zip(&phases)
                        .map(|(&b, &f)| if b == 0 { f } else { -f })
                        .sum()
                };
                for i in 0..d {
                    for j in 0..d {
                        let v = rho.entry(i, j) * C64::from_polar(1.0, phase(map(i)) - phase(map(j)));
                        acc[map(i) * d + map(j)] += v;
                    }
                }
            }
        }
    }
    let count = (perms.len() * 2 * phase_count) as f64;
    let averaged = ComplexMatrix::from_fn(d, d, |i, j| acc[i * d + j] / count);
    let conj = ComplexMatrix::from_fn(d, d, |i, j| averaged[(i, j)].conj());
    DensityMatrix::new(averaged.add(&conj).scale_real(0.5)).expect("group average of a state is a state")
}

/// First `p'` where `f` changes sign relative to its first nonzero sign, by scan and bisection.
pub fn first_sign_change(f: impl Fn(f64) -> f64) -> f64 {
    let steps = 2000;
    let mut lo = 0.0;
    let mut sign = 0.0;
    for k in 1..=steps {
        let x = k as f64 / steps as f64 * 0.999;
        let value = f(x);
        if sign == 0.0 {
            if value.abs() > 1e-12 {
                sign = value.signum();
            }
        } else if value * sign <= 0.0 {
            let mut hi = x;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid) * sign > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return hi;
        }
        lo = x;
    }
    f64::NAN
}
