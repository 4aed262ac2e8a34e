//! GHZ-type initial states and the two-stage amplitude-damping pipeline with
//! local NOT gates.
//!
//! A scenario `(n, m, alpha, p, p')` evolves `alpha|0..0> + beta|1..1>` through
//! damping of strength `p`, NOT gates on qubits `1..=m`, damping of strength
//! `p'`, and the same NOT gates again.

use crate::qmat::{identity2, kron_all, sigma_x, ComplexMatrix, DensityMatrix, C64};
use thiserror::Error;

/// Completeness residual accepted for a Kraus set.
pub const COMPLETENESS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("cannot flip {m} qubits of a {n}-qubit register")]
    MaskOutOfRange { n: usize, m: usize },
    #[error("qubit count {0} is not supported (expected 2, 3 or 4)")]
    UnsupportedQubitCount(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

fn check_unit(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(ChannelError::ProbabilityOutOfRange { name, value });
    }
    Ok(())
}

/// One point `(n, m, alpha, p, p')` of the damped GHZ family.
///
/// `alpha` is the real, non-negative amplitude of `|0..0>`; `beta` is always
/// derived as `sqrt(1 - alpha^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzScenario {
    n: usize,
    m: usize,
    alpha: f64,
    alpha2: f64,
    p: f64,
    p_prime: f64,
}

impl GhzScenario {
    pub fn new(n: usize, m: usize, alpha: f64, p: f64, p_prime: f64) -> Result<Self, ChannelError> {
        if !(2..=4).contains(&n) {
            return Err(ChannelError::UnsupportedQubitCount(n));
        }
        if m > n {
            return Err(ChannelError::MaskOutOfRange { n, m });
        }
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(ChannelError::AlphaOutOfRange(alpha));
        }
        check_unit("p", p)?;
        check_unit("p_prime", p_prime)?;
        Ok(Self {
            n,
            m,
            alpha,
            alpha2: alpha * alpha,
            p,
            p_prime,
        })
    }

    /// Same as [`GhzScenario::new`] with the population `alpha^2` as input.
    pub fn from_alpha2(n: usize, m: usize, alpha2: f64, p: f64, p_prime: f64) -> Result<Self, ChannelError> {
        check_unit("alpha2", alpha2)?;
        Ok(Self {
            alpha2,
            ..Self::new(n, m, alpha2.sqrt(), p, p_prime)?
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The population of `|0..0>`, exactly as given to
    /// [`GhzScenario::from_alpha2`].
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha2).max(0.0).sqrt()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_prime(&self) -> f64 {
        self.p_prime
    }

    /// Copy with a different second-stage damping strength.
    pub fn with_p_prime(&self, p_prime: f64) -> Result<Self, ChannelError> {
        check_unit("p_prime", p_prime)?;
        Ok(Self { p_prime, ..*self })
    }

    /// Copy with a different flip count.
    pub fn with_m(&self, m: usize) -> Result<Self, ChannelError> {
        if m > self.n {
            return Err(ChannelError::MaskOutOfRange { n: self.n, m });
        }
        Ok(Self { m, ..*self })
    }
}

/// Kraus operators of a channel; all share one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let Some(first) = operators.first() else {
            return Err(ChannelError::DimensionMismatch("empty Kraus set".into()));
        };
        let d = first.rows();
        if operators.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(ChannelError::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Largest entrywise deviation of `sum K† K` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc.add(&k.adjoint().matmul(k)));
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// Pure GHZ-type state `alpha|0..0> + beta|1..1>` as a density matrix.
pub fn ghz_state(n: usize, alpha: f64) -> Result<DensityMatrix, ChannelError> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(ChannelError::AlphaOutOfRange(alpha));
    }
    if n == 0 || n > 5 {
        return Err(ChannelError::UnsupportedQubitCount(n));
    }
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let d = 1usize << n;
    let mut m = ComplexMatrix::zeros(d, d);
    m[(0, 0)] = C64::new(alpha * alpha, 0.0);
    m[(0, d - 1)] = C64::new(alpha * beta, 0.0);
    m[(d - 1, 0)] = C64::new(alpha * beta, 0.0);
    m[(d - 1, d - 1)] = C64::new(beta * beta, 0.0);
    Ok(DensityMatrix::from_trusted(m))
}

/// Single-qubit amplitude damping: `M1 = diag(1, sqrt(1-p))`, `M2 = sqrt(p)|0><1|`.
pub fn adc_kraus(p: f64) -> Result<KrausSet, ChannelError> {
    check_unit("p", p)?;
    let m1 = ComplexMatrix::diag(&[1.0, (1.0 - p).sqrt()]);
    let mut m2 = ComplexMatrix::zeros(2, 2);
    m2[(0, 1)] = C64::new(p.sqrt(), 0.0);
    KrausSet::new(vec![m1, m2])
}

/// All `k^n` tensor products of a single-qubit Kraus set, ordered with the
/// first factor most significant.
pub fn multi_kraus(single: &KrausSet, n: usize) -> Result<KrausSet, ChannelError> {
    if single.dim() != 2 {
        return Err(ChannelError::DimensionMismatch(format!(
            "expected a 1-qubit set, got dimension {}",
            single.dim()
        )));
    }
    let k = single.operators.len();
    let total = k.pow(n as u32);
    let ops = (0..total)
        .map(|mut idx| {
            let mut factors = vec![ComplexMatrix::zeros(2, 2); n];
            for slot in (0..n).rev() {
                factors[slot] = single.operators[idx % k].clone();
                idx /= k;
            }
            kron_all(&factors)
        })
        .collect();
    KrausSet::new(ops)
}

/// `sum_k K rho K†`.
pub fn apply_channel(rho: &DensityMatrix, kraus: &KrausSet) -> Result<DensityMatrix, ChannelError> {
    if kraus.dim() != rho.dim() {
        return Err(ChannelError::DimensionMismatch(format!(
            "{}-dimensional channel on a {}-dimensional state",
            kraus.dim(),
            rho.dim()
        )));
    }
    let d = rho.dim();
    let out = kraus.operators.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| {
        acc.add(&rho.matrix().conjugate_by(k))
    });
    Ok(DensityMatrix::from_trusted(out))
}

/// Applies the same single-qubit channel independently to every qubit.
///
/// Equivalent to [`apply_channel`] with [`multi_kraus`] but works one qubit at
/// a time, so the cost grows with `n 4^n` instead of `2^n 8^n`.
pub fn apply_local_channel(rho: &DensityMatrix, single: &KrausSet) -> Result<DensityMatrix, ChannelError> {
    if single.dim() != 2 {
        return Err(ChannelError::DimensionMismatch(format!(
            "expected a 1-qubit set, got dimension {}",
            single.dim()
        )));
    }
    let n = rho.n_qubits();
    let d = rho.dim();
    let mut current = rho.matrix().clone();
    for qubit in 0..n {
        let shift = n - 1 - qubit;
        let mut next = ComplexMatrix::zeros(d, d);
        for k in single.operators() {
            for i in 0..d {
                let bi = (i >> shift) & 1;
                for j in 0..d {
                    let bj = (j >> shift) & 1;
                    let mut acc = C64::new(0.0, 0.0);
                    for ci in 0..2 {
                        let kin = k[(bi, ci)];
                        if kin == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ii = (i & !(1 << shift)) | (ci << shift);
                        for cj in 0..2 {
                            let kjn = k[(bj, cj)];
                            if kjn == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let jj = (j & !(1 << shift)) | (cj << shift);
                            acc += kin * current[(ii, jj)] * kjn.conj();
                        }
                    }
                    next[(i, j)] += acc;
                }
            }
        }
        current = next;
    }
    Ok(DensityMatrix::from_trusted(current))
}

/// `sigma_x` on qubits `1..=m`, identity on the rest.
pub fn not_mask_unitary(n: usize, m: usize) -> Result<ComplexMatrix, ChannelError> {
    if m > n {
        return Err(ChannelError::MaskOutOfRange { n, m });
    }
    if n == 0 {
        return Err(ChannelError::UnsupportedQubitCount(n));
    }
    let factors: Vec<ComplexMatrix> = (0..n).map(|k| if k < m { sigma_x() } else { identity2() }).collect();
    Ok(kron_all(&factors))
}

/// States along the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineStages {
    pub initial: DensityMatrix,
    pub after_first_adc: DensityMatrix,
    /// After the first damping and the NOT gates.
    pub after_first_not: DensityMatrix,
    pub after_second_adc: DensityMatrix,
    /// After the final NOT gates.
    pub final_state: DensityMatrix,
}

/// Runs the pipeline and keeps every intermediate state.
pub fn evolve_pipeline_stages(s: &GhzScenario) -> Result<PipelineStages, ChannelError> {
    let initial = ghz_state(s.n, s.alpha)?;
    let after_first_adc = apply_local_channel(&initial, &adc_kraus(s.p)?)?;
    let u = not_mask_unitary(s.n, s.m)?;
    let after_first_not = DensityMatrix::from_trusted(after_first_adc.matrix().conjugate_by(&u));
    let after_second_adc = apply_local_channel(&after_first_not, &adc_kraus(s.p_prime)?)?;
    let final_state = DensityMatrix::from_trusted(after_second_adc.matrix().conjugate_by(&u));
    Ok(PipelineStages {
        initial,
        after_first_adc,
        after_first_not,
        after_second_adc,
        final_state,
    })
}

/// Final state `U ADC(p') [U ADC(p)[rho] U] U` of a scenario.
pub fn evolve_pipeline(s: &GhzScenario) -> DensityMatrix {
    evolve_pipeline_stages(s).expect("validated scenario").final_state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::kron;

    #[test]
    fn bell_state_corners() {
        let rho = ghz_state(2, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho.entry(i, j).re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn ghz_alpha_one_is_ground_state() {
        let rho = ghz_state(3, 1.0).unwrap();
        assert_eq!(rho.entry(0, 0).re, 1.0);
        assert_eq!(rho.entry(7, 7).re, 0.0);
        assert_eq!(rho.entry(0, 7).re, 0.0);
    }

    #[test]
    fn ghz4_corner_entries() {
        let rho = ghz_state(4, 0.3f64.sqrt()).unwrap();
        assert!((rho.entry(0, 0).re - 0.3).abs() < 1e-15);
        assert!((rho.entry(15, 15).re - 0.7).abs() < 1e-15);
        assert!((rho.entry(0, 15).re - 0.21f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ghz_rejects_bad_alpha() {
        assert_eq!(ghz_state(2, 1.5), Err(ChannelError::AlphaOutOfRange(1.5)));
    }

    #[test]
    fn adc_endpoints() {
        let k0 = adc_kraus(0.0).unwrap();
        assert_eq!(k0.operators()[0], ComplexMatrix::identity(2));
        assert_eq!(k0.operators()[1], ComplexMatrix::zeros(2, 2));
        let k1 = adc_kraus(1.0).unwrap();
        assert_eq!(k1.operators()[0], ComplexMatrix::diag(&[1.0, 0.0]));
        assert_eq!(k1.operators()[1][(0, 1)].re, 1.0);
    }

    #[test]
    fn adc_at_036() {
        let k = adc_kraus(0.36).unwrap();
        assert!((k.operators()[0][(1, 1)].re - 0.8).abs() < 1e-15);
        assert!((k.operators()[1][(0, 1)].re - 0.6).abs() < 1e-15);
        assert!(k.completeness_residual() < COMPLETENESS_TOL);
    }

    #[test]
    fn adc_rejects_out_of_range() {
        assert!(matches!(
            adc_kraus(-0.1),
            Err(ChannelError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn multi_kraus_shapes() {
        let single = adc_kraus(0.4).unwrap();
        assert_eq!(multi_kraus(&single, 1).unwrap(), single);
        let two = multi_kraus(&adc_kraus(0.0).unwrap(), 2).unwrap();
        assert_eq!(two.operators()[0], ComplexMatrix::identity(4));
        assert!(two.operators()[1..]
            .iter()
            .all(|k| k.max_abs_diff(&ComplexMatrix::zeros(4, 4)) == 0.0));
        let three = multi_kraus(&single, 3).unwrap();
        assert_eq!(three.operators().len(), 8);
        assert!(three.completeness_residual() <= COMPLETENESS_TOL);
    }

    #[test]
    fn full_decay_of_excited_qubit() {
        let one = crate::qmat::PureState::basis(2, 1).unwrap().density();
        let out = apply_channel(&one, &adc_kraus(1.0).unwrap()).unwrap();
        assert_eq!(out.matrix(), &ComplexMatrix::diag(&[1.0, 0.0]));
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = ghz_state(3, 0.4).unwrap();
        let out = apply_channel(&rho, &multi_kraus(&adc_kraus(0.0).unwrap(), 3).unwrap()).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn channel_dimension_mismatch() {
        let rho = ghz_state(3, 0.4).unwrap();
        assert!(matches!(
            apply_channel(&rho, &adc_kraus(0.2).unwrap()),
            Err(ChannelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn local_channel_matches_tensor_kraus() {
        for n in 1..=4 {
            let amps: Vec<C64> = (0..1usize << n)
                .map(|k| C64::new((k as f64 + 1.0).sqrt(), 0.3 * k as f64))
                .collect();
            let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let psi = crate::qmat::PureState::new(amps.iter().map(|c| c / norm).collect()).unwrap();
            let single = adc_kraus(0.37).unwrap();
            let a = apply_channel(&psi.density(), &multi_kraus(&single, n).unwrap()).unwrap();
            let b = apply_local_channel(&psi.density(), &single).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        }
    }

    #[test]
    fn not_masks() {
        assert_eq!(not_mask_unitary(2, 0).unwrap(), ComplexMatrix::identity(4));
        assert_eq!(not_mask_unitary(2, 1).unwrap(), kron(&sigma_x(), &identity2()));
        assert!(matches!(
            not_mask_unitary(2, 3),
            Err(ChannelError::MaskOutOfRange { n: 2, m: 3 })
        ));
        let u = not_mask_unitary(3, 3).unwrap();
        let rho = ghz_state(3, 0.3f64.sqrt()).unwrap();
        let flipped = rho.matrix().conjugate_by(&u);
        assert!((flipped[(0, 0)].re - 0.7).abs() < 1e-15);
        assert!((flipped[(7, 7)].re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noiseless_pipeline_keeps_bell_state() {
        let s = GhzScenario::new(2, 0, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0).unwrap();
        let rho = evolve_pipeline(&s);
        assert!(rho.matrix().max_abs_diff(ghz_state(2, s.alpha()).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn pipeline_stays_a_valid_state() {
        for (a2, p, pp) in [(0.3, 0.1, 0.2), (0.5, 0.3, 0.5), (0.9, 0.7, 0.4)] {
            for n in 2..=4 {
                for m in 0..=n {
                    let rho = evolve_pipeline(&GhzScenario::from_alpha2(n, m, a2, p, pp).unwrap());
                    rho.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(matches!(
            GhzScenario::new(5, 0, 0.5, 0.0, 0.0),
            Err(ChannelError::UnsupportedQubitCount(5))
        ));
        assert!(matches!(
            GhzScenario::new(3, 4, 0.5, 0.0, 0.0),
            Err(ChannelError::MaskOutOfRange { .. })
        ));
        assert!(matches!(
            GhzScenario::new(3, 1, 0.5, 1.2, 0.0),
            Err(ChannelError::ProbabilityOutOfRange { name: "p", .. })
        ));
        let s = GhzScenario::from_alpha2(3, 1, 0.36, 0.1, 0.2).unwrap();
        assert!((s.alpha() - 0.6).abs() < 1e-15 && (s.beta() - 0.8).abs() < 1e-15);
    }
}
