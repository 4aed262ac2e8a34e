//! X-state views, genuine multipartite concurrence (GMC), sudden-death
//! detection and best-flip-count segmentation.

use crate::channels::{evolve_pipeline, GhzScenario};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64};
use thiserror::Error;

/// Largest off-X entry magnitude accepted by [`x_state_view`].
pub const OFF_X_TOL: f64 = 1e-12;
/// GMC values at or below this count as zero for sudden-death checks.
pub const GMC_ZERO: f64 = 1e-8;
/// Upper end of the `p'` interval scanned by [`find_esd`].
pub const PPRIME_GUARD: f64 = 1.0 - 1e-6;
/// Root tolerance of [`find_esd`].
pub const ESD_TOL: f64 = 1e-6;
/// Values within this distance count as tied in [`best_strategy`].
pub const TIE_TOL: f64 = 1e-9;
/// Switch-point tolerance of [`best_strategy`].
pub const SWITCH_TOL: f64 = 1e-7;

const ESD_GRID: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasuresError {
    #[error("state is not X-shaped (off-X entry of magnitude {0})")]
    NotXState(f64),
    #[error("p' grid must be nonempty, sorted and inside [0, 1]")]
    InvalidGrid,
}

/// Diagonal and anti-diagonal content of an X-shaped `n`-qubit state.
///
/// With `D = 2^n` and `N = D/2`: `a_i = rho[i][i]`, `b_i = rho[D-1-i][D-1-i]`
/// and `z_i = rho[i][D-1-i]` for `i` in `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct XStateView {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    z: Vec<C64>,
}

impl XStateView {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    /// `sum_{j != i} sqrt(a_j b_j)`.
    pub fn w(&self, i: usize) -> f64 {
        (0..self.a.len())
            .filter(|&j| j != i)
            .map(|j| (self.a[j] * self.b[j]).max(0.0).sqrt())
            .sum()
    }

    /// Rebuilds the X-shaped density matrix.
    pub fn reconstruct(&self) -> DensityMatrix {
        let d = 1usize << self.n;
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d / 2 {
            m[(i, i)] = C64::new(self.a[i], 0.0);
            m[(d - 1 - i, d - 1 - i)] = C64::new(self.b[i], 0.0);
            m[(i, d - 1 - i)] = self.z[i];
            m[(d - 1 - i, i)] = self.z[i].conj();
        }
        DensityMatrix::from_trusted(m)
    }

    /// Largest `|z_i| - w_i` divided by the total coherence-plus-population
    /// scale `sum |z| + sum sqrt(a b)`.
    ///
    /// Its sign matches the sign of the GMC argument while staying of order
    /// one as the whole state decays towards `|0..0>`.
    pub fn normalized_margin(&self) -> f64 {
        let scale: f64 = self.z.iter().map(|z| z.norm()).sum::<f64>()
            + self
                .a
                .iter()
                .zip(&self.b)
                .map(|(a, b)| (a * b).max(0.0).sqrt())
                .sum::<f64>();
        if scale == 0.0 {
            return 0.0;
        }
        let best = (0..self.z.len())
            .map(|i| self.z[i].norm() - self.w(i))
            .fold(f64::NEG_INFINITY, f64::max);
        best / scale
    }
}

/// Extracts the X-state view; fails when any off-X entry exceeds [`OFF_X_TOL`].
pub fn x_state_view(rho: &DensityMatrix) -> Result<XStateView, MeasuresError> {
    let d = rho.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j && i + j != d - 1 {
                worst = worst.max(rho.entry(i, j).norm());
            }
        }
    }
    if worst > OFF_X_TOL {
        return Err(MeasuresError::NotXState(worst));
    }
    let half = d / 2;
    Ok(XStateView {
        n: rho.n_qubits(),
        a: (0..half).map(|i| rho.entry(i, i).re).collect(),
        b: (0..half).map(|i| rho.entry(d - 1 - i, d - 1 - i).re).collect(),
        z: (0..half).map(|i| rho.entry(i, d - 1 - i)).collect(),
    })
}

/// `2 max_i max(0, |z_i| - w_i)`.
pub fn gmc(view: &XStateView) -> f64 {
    let best = (0..view.z.len())
        .map(|i| view.z[i].norm() - view.w(i))
        .fold(0.0, f64::max);
    2.0 * best
}

/// GMC of the pipeline output for `s`.
pub fn gmc_of(s: &GhzScenario) -> f64 {
    gmc(&x_state_view(&evolve_pipeline(s)).expect("pipeline outputs are X-shaped"))
}

/// Closed-form GMC of the damped family, tabulated for every `(n, m)` with
/// `n` in 2..=4.
pub fn gmc_closed_form(s: &GhzScenario) -> f64 {
    let (a, b) = (s.alpha(), s.beta());
    let (p, pp) = (s.p(), s.p_prime());
    let (q, qp) = (1.0 - p, 1.0 - pp);
    let sv = p + pp * q;
    let t = p * pp + q;
    let (a2, b2) = (a * a, b * b);
    let qq = q * qp;
    let r = |x: f64| x.max(0.0).sqrt();
    let v = match (s.n(), s.m()) {
        (2, 0) => a * b * qq - b2 * qq * sv,
        (2, 1) => b * qp * (a * q - r(p * q * (b2 * t * sv + a2 * pp))),
        (2, 2) => a * b * qq - qp * (a2 * pp + b2 * p * t),
        (3, 0) => a * b * qq.powf(1.5) - 3.0 * r(b2 * b2 * qq.powi(3) * sv.powi(3)),
        (3, 1) => {
            a * b * qq.powf(1.5)
                - b * (q * qp.powf(1.5) * r(a2 * p * pp + b2 * p * t * sv * sv)
                    + 2.0 * b * q * qp.powf(1.5) * r(p * t) * sv)
        }
        (3, 2) => {
            a * b * qq.powf(1.5)
                - b * (p * r(q * qp.powi(3) * (b2 * t * t * sv + a2 * pp * pp))
                    + 2.0 * r(p * q * qp.powi(3) * t * (b2 * p * t * sv + a2 * pp)))
        }
        (3, 3) => {
            a * b * qq.powf(1.5)
                - 3.0
                    * r(qp.powi(3)
                        * (b2 * b2 * p.powi(3) * t.powi(3)
                            + a2 * b2 * p * pp * t * (2.0 * p * pp + q)
                            + a2 * a2 * pp.powi(3)))
        }
        (4, 0) => a * b * qq * qq - 7.0 * b2 * qq * qq * sv * sv,
        (4, 1) => {
            a * b * qq * qq
                - b * qp * qp * r(p * q.powi(3) * (b2 * t * sv.powi(3) + a2 * pp))
                - 6.0 * r(b2 * b2 * p * q.powi(3) * qp.powi(4) * t * sv.powi(3))
        }
        (4, 2) => {
            a * b * qq * qq
                - b * q
                    * qp
                    * qp
                    * (4.0 * b * p.powi(3) * pp
                        + 4.0 * b * q * p * p * (pp * pp + 1.0)
                        + p * r(b2 * t * t * sv * sv + a2 * pp * pp)
                        + 4.0 * b * p * pp * q * q
                        + 2.0 * r(p * t * (b2 * p * t * sv * sv + a2 * pp)))
        }
        (4, 3) => {
            a * b * qq * qq
                - r(b2 * p.powi(3) * q * qp.powi(4) * (b2 * t.powi(3) * sv + a2 * pp.powi(3)))
                - 3.0 * b * qp * qp * t * r(b2 * p.powi(3) * q * t * sv + a2 * p * pp * q)
                - 3.0 * b * p * qp * qp * r(a2 * pp * pp * q * t + b2 * p * q * sv * t.powi(3))
        }
        (4, 4) => {
            a * b * qq * qq
                - qp * qp
                    * (3.0 * b2 * p * p * t * t
                        + 4.0
                            * r(b2 * b2 * p.powi(4) * t.powi(4)
                                + a2 * b2 * p * pp * t * (2.0 * p * p * pp * pp + 2.0 * p * pp * q + q * q)
                                + a2 * a2 * pp.powi(4))
                        + 3.0 * a2 * pp * pp)
        }
        _ => unreachable!("GhzScenario restricts n to 2..=4 and m to 0..=n"),
    };
    2.0 * v.max(0.0)
}

/// Decay type of GMC as a function of `p'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EsdKind {
    /// GMC first reaches zero at the given `p'`.
    SuddenDeath(f64),
    /// GMC stays positive on `[0, 1 - 1e-6]`.
    AsymptoticDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdReport {
    pub kind: EsdKind,
    /// GMC at `p' = 0`.
    pub measure_at_zero: f64,
    /// Every downward zero crossing found on the scanned interval, ascending.
    pub roots: Vec<f64>,
}

fn margin_at(s: &GhzScenario, pp: f64) -> f64 {
    let rho = evolve_pipeline(&s.with_p_prime(pp).expect("p' inside [0, 1]"));
    x_state_view(&rho)
        .expect("pipeline outputs are X-shaped")
        .normalized_margin()
}

/// Bisects a predicate that holds at `lo` and fails at `hi`, returning the
/// final bracket.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, tol: f64, holds: impl Fn(f64) -> bool) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Locates sudden death of GMC along `p'` for the family of `s` (its own
/// `p'` is ignored).
///
/// The sign of the normalized GMC margin is scanned on a uniform grid over
/// `[0, 1 - 1e-6]` and every entangled-to-separable transition is bisected to
/// [`ESD_TOL`].
pub fn find_esd(s: &GhzScenario) -> EsdReport {
    let measure_at_zero = gmc_of(&s.with_p_prime(0.0).expect("p' = 0 is valid"));
    let alive = |pp: f64| margin_at(s, pp) > 0.0;
    let mut roots = Vec::new();
    if !alive(0.0) {
        roots.push(0.0);
    }
    let grid: Vec<f64> = (0..=ESD_GRID)
        .map(|k| PPRIME_GUARD * k as f64 / ESD_GRID as f64)
        .collect();
    let flags: Vec<bool> = grid.iter().map(|&pp| alive(pp)).collect();
    for k in 0..ESD_GRID {
        if flags[k] && !flags[k + 1] {
            roots.push(bisect(grid[k], grid[k + 1], ESD_TOL, alive).1);
        }
    }
    let kind = roots
        .first()
        .map_or(EsdKind::AsymptoticDecay, |&r| EsdKind::SuddenDeath(r));
    EsdReport {
        kind,
        measure_at_zero,
        roots,
    }
}

/// A contiguous `p'` interval on which flip count `m` maximizes the measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySegment {
    pub m: usize,
    pub start: f64,
    pub end: f64,
}

/// Smallest `m` whose value is within [`TIE_TOL`] of the maximum.
pub(crate) fn argmax_m(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= best - TIE_TOL).unwrap_or(0)
}

/// Segments a sorted `p'` grid by the flip count maximizing `measure(m, p')`.
/// Switch points between grid nodes are bisected to [`SWITCH_TOL`].
pub fn segment_by_argmax(
    n: usize,
    grid: &[f64],
    measure: impl Fn(usize, f64) -> f64,
) -> Result<Vec<StrategySegment>, MeasuresError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(MeasuresError::InvalidGrid);
    }
    let winner = |pp: f64| argmax_m(&(0..=n).map(|m| measure(m, pp)).collect::<Vec<_>>());
    let winners: Vec<usize> = grid.iter().map(|&pp| winner(pp)).collect();
    let mut segments = vec![StrategySegment {
        m: winners[0],
        start: grid[0],
        end: grid[0],
    }];
    for k in 1..grid.len() {
        let last = segments.last_mut().expect("nonempty");
        if winners[k] == last.m {
            last.end = grid[k];
        } else {
            let m = last.m;
            let (lo, hi) = bisect(grid[k - 1], grid[k], SWITCH_TOL, |pp| winner(pp) == m);
            let switch = 0.5 * (lo + hi);
            last.end = switch;
            segments.push(StrategySegment {
                m: winners[k],
                start: switch,
                end: grid[k],
            });
        }
    }
    Ok(merge_degenerate(segments))
}

/// Folds zero-width segments, which only arise from exact ties at a single
/// grid node, into their neighbour.
fn merge_degenerate(segments: Vec<StrategySegment>) -> Vec<StrategySegment> {
    let mut out: Vec<StrategySegment> = Vec::with_capacity(segments.len());
    let mut pending_start: Option<f64> = None;
    let count = segments.len();
    for (k, mut seg) in segments.into_iter().enumerate() {
        if let Some(start) = pending_start.take() {
            seg.start = start;
        }
        if seg.end - seg.start <= SWITCH_TOL && count > 1 {
            if k + 1 < count {
                pending_start = Some(seg.start);
            } else if let Some(prev) = out.last_mut() {
                prev.end = seg.end;
            }
            continue;
        }
        match out.last_mut() {
            Some(prev) if prev.m == seg.m => prev.end = seg.end,
            _ => out.push(seg),
        }
    }
    out
}

/// Best flip count by GMC along `p'` for fixed `(n, alpha^2, p)`.
pub fn best_strategy(n: usize, alpha2: f64, p: f64, grid: &[f64]) -> Result<Vec<StrategySegment>, crate::Error> {
    let base = GhzScenario::from_alpha2(n, 0, alpha2, p, 0.0)?;
    Ok(segment_by_argmax(n, grid, |m, pp| {
        gmc_closed_form(&base.with_m(m).and_then(|s| s.with_p_prime(pp)).expect("validated"))
    })?)
}
