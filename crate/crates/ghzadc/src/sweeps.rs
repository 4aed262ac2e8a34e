//! Grid evaluation of the damped family: measure trajectories, decay-type
//! boundaries in `alpha^2` and best-flip-count tables.

use crate::channels::{evolve_pipeline, GhzScenario};
use crate::localizable::localizable_concurrence;
use crate::measures::{bisect, gmc, gmc_closed_form, segment_by_argmax, x_state_view, StrategySegment, PPRIME_GUARD};
use crate::telefid::{chsh_value, fidelity_of};
use crate::twirl::{classify, twirl_coords, BoundaryData, TwirlCoords};
use crate::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Bisection tolerance of [`threshold_table`] in `alpha^2`.
pub const THRESHOLD_TOL: f64 = 1e-6;
/// Grid points closer than this to `stop` are snapped onto it.
const GRID_SNAP: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("{0} list is empty")]
    EmptyList(&'static str),
    #[error("p' grid step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("p' grid {start}:{stop} is empty or leaves [0, 1]")]
    EmptyGrid { start: f64, stop: f64 },
    #[error("cannot parse p' grid {0:?}, expected start:stop:step")]
    MalformedGrid(String),
    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),
    #[error("measure {measure} is not available for n = {n}")]
    UnsupportedMeasure { measure: Measure, n: usize },
    #[error("flip count m = {m} exceeds n = {n}")]
    InvalidFlipCount { m: usize, n: usize },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Uniform `p'` grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PprimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl PprimeGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, SweepError> {
        let grid = Self { start, stop, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(SweepError::InvalidStep(self.step));
        }
        if !(0.0..=1.0).contains(&self.start) || !(0.0..=1.0).contains(&self.stop) || self.start > self.stop {
            return Err(SweepError::EmptyGrid {
                start: self.start,
                stop: self.stop,
            });
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + GRID_SNAP).floor() as usize;
        (0..=count)
            .map(|k| (self.start + k as f64 * self.step).min(self.stop))
            .collect()
    }
}

impl FromStr for PprimeGrid {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| SweepError::MalformedGrid(s.to_string()))?;
        match parts[..] {
            [start, stop, step] => Self::new(start, stop, step),
            _ => Err(SweepError::MalformedGrid(s.to_string())),
        }
    }
}

/// Quantity evaluated per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Gmc,
    Fidelity,
    Chsh,
    Localizable,
    Twirl,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Gmc,
        Measure::Fidelity,
        Measure::Chsh,
        Measure::Localizable,
        Measure::Twirl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Gmc => "gmc",
            Measure::Fidelity => "fidelity",
            Measure::Chsh => "chsh",
            Measure::Localizable => "localizable",
            Measure::Twirl => "twirl",
        }
    }

    /// CHSH is defined for two qubits only, localizable concurrence needs
    /// at least one qubit to measure.
    pub fn available_for(&self, n: usize) -> bool {
        match self {
            Measure::Chsh => n == 2,
            Measure::Localizable => n >= 3,
            _ => true,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gmc" => Ok(Measure::Gmc),
            "fidelity" => Ok(Measure::Fidelity),
            "chsh" => Ok(Measure::Chsh),
            "localizable" | "cl" => Ok(Measure::Localizable),
            "twirl" => Ok(Measure::Twirl),
            other => Err(SweepError::UnknownMeasure(other.to_string())),
        }
    }
}

/// Cartesian scenario grid and the measures to evaluate on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub ms: Vec<usize>,
    pub alpha2s: Vec<f64>,
    pub ps: Vec<f64>,
    pub pprime: PprimeGrid,
    pub measures: Vec<Measure>,
    /// Region boundaries used to label three-qubit twirl coordinates.
    pub boundaries: Option<BoundaryData>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, empty) in [
            ("m", self.ms.is_empty()),
            ("alpha2", self.alpha2s.is_empty()),
            ("p", self.ps.is_empty()),
            ("measure", self.measures.is_empty()),
        ] {
            if empty {
                return Err(SweepError::EmptyList(name).into());
            }
        }
        self.pprime.validate()?;
        if let Some(&m) = self.ms.iter().find(|&&m| m > self.n) {
            return Err(SweepError::InvalidFlipCount { m, n: self.n }.into());
        }
        if let Some(&measure) = self.measures.iter().find(|m| !m.available_for(self.n)) {
            return Err(SweepError::UnsupportedMeasure { measure, n: self.n }.into());
        }
        for &a2 in &self.alpha2s {
            for &p in &self.ps {
                GhzScenario::from_alpha2(self.n, 0, a2, p, self.pprime.start)?;
            }
        }
        Ok(())
    }

    /// Scenarios in lexicographic `(m, alpha^2, p, p')` order.
    pub fn scenarios(&self) -> Result<Vec<GhzScenario>, Error> {
        self.validate()?;
        let grid = self.pprime.points();
        let mut out = Vec::with_capacity(self.ms.len() * self.alpha2s.len() * self.ps.len() * grid.len());
        for &m in &self.ms {
            for &a2 in &self.alpha2s {
                for &p in &self.ps {
                    for &pp in &grid {
                        out.push(GhzScenario::from_alpha2(self.n, m, a2, p, pp)?);
                    }
                }
            }
        }
        Ok(out)
    }

    fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }
}

/// One evaluated scenario. Measures that were not requested are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub m: usize,
    pub alpha2: f64,
    pub p: f64,
    pub pprime: f64,
    pub gmc: Option<f64>,
    pub fidelity: Option<f64>,
    pub branch: Option<u8>,
    pub chsh: Option<f64>,
    pub cl: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub ztilde: Option<f64>,
    pub region: Option<String>,
}

/// Evaluates the requested measures on one scenario.
pub fn evaluate(
    s: &GhzScenario,
    measures: &[Measure],
    boundaries: Option<&BoundaryData>,
) -> Result<SweepRecord, Error> {
    let rho = evolve_pipeline(s);
    let mut rec = SweepRecord {
        n: s.n(),
        m: s.m(),
        alpha2: s.alpha2(),
        p: s.p(),
        pprime: s.p_prime(),
        gmc: None,
        fidelity: None,
        branch: None,
        chsh: None,
        cl: None,
        x: None,
        y: None,
        ztilde: None,
        region: None,
    };
    for measure in measures {
        match measure {
            Measure::Gmc => rec.gmc = Some(gmc(&x_state_view(&rho)?)),
            Measure::Fidelity => {
                let f = fidelity_of(s);
                rec.fidelity = Some(f.value);
                rec.branch = Some(f.branch);
            }
            Measure::Chsh => rec.chsh = Some(chsh_value(&rho)?.value),
            Measure::Localizable => rec.cl = Some(localizable_concurrence(&rho, (1, s.n()))?.value),
            Measure::Twirl => {
                let coords = twirl_coords(&rho)?;
                let (x, y) = coords.xy();
                rec.x = Some(x);
                rec.y = Some(y);
                rec.ztilde = coords.z_t();
                let region = match (&coords, boundaries) {
                    (TwirlCoords::Three(_), None) => crate::twirl::SloccRegion::Unclassified,
                    _ => classify(&coords, boundaries)?,
                };
                rec.region = Some(region.label().to_string());
            }
        }
    }
    Ok(rec)
}

/// Evaluates every scenario of `spec` on `jobs` worker threads. The record
/// order follows [`SweepSpec::scenarios`] for any thread count.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRecord>, Error> {
    let scenarios = spec.scenarios()?;
    let measures: Vec<Measure> = Measure::ALL.into_iter().filter(|m| spec.wants(*m)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| evaluate(s, &measures, spec.boundaries.as_ref()))
            .collect()
    })
}

/// Decay-type boundary for one damping strength `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub n: usize,
    pub p: f64,
    /// Smallest `alpha^2` on the grid side without sudden death, `None` when
    /// the grid does not contain a transition.
    pub boundary_alpha2: Option<f64>,
}

/// Whether GMC of the unflipped family dies before `p' = 1`.
///
/// Decided by the sign of the normalized margin at `p' = 1 - 1e-6`, where
/// GMC is smallest along the trajectory.
pub fn has_sudden_death(n: usize, alpha2: f64, p: f64) -> Result<bool, Error> {
    let s = GhzScenario::from_alpha2(n, 0, alpha2, p, PPRIME_GUARD)?;
    Ok(x_state_view(&evolve_pipeline(&s))?.normalized_margin() <= 0.0)
}

/// Locates, per `p`, the `alpha^2` separating sudden death (below) from
/// asymptotic decay (above). The first transition on `alpha2_grid` is
/// bisected to [`THRESHOLD_TOL`].
pub fn threshold_table(n: usize, ps: &[f64], alpha2_grid: &[f64]) -> Result<Vec<ThresholdRecord>, Error> {
    if ps.is_empty() {
        return Err(SweepError::EmptyList("p").into());
    }
    if alpha2_grid.len() < 2 {
        return Err(SweepError::EmptyList("alpha2").into());
    }
    ps.iter()
        .map(|&p| {
            let flags: Vec<bool> = alpha2_grid
                .iter()
                .map(|&a2| has_sudden_death(n, a2, p))
                .collect::<Result<_, _>>()?;
            let boundary = (1..alpha2_grid.len()).find(|&k| flags[k - 1] && !flags[k]).map(|k| {
                let esd = |a2: f64| has_sudden_death(n, a2, p).unwrap_or(false);
                bisect(alpha2_grid[k - 1], alpha2_grid[k], THRESHOLD_TOL, esd).1
            });
            Ok(ThresholdRecord {
                n,
                p,
                boundary_alpha2: boundary,
            })
        })
        .collect()
}

/// Figure of merit used to rank flip counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gmc,
    Fidelity,
}

/// Best-`m` segmentation of the `p'` axis for one `(alpha^2, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRecord {
    pub n: usize,
    pub alpha2: f64,
    pub p: f64,
    pub criterion: Criterion,
    pub segments: Vec<StrategySegment>,
}

/// Segments the `p'` grid by the best flip count under both criteria, for
/// every `(alpha^2, p)` pair. Records are ordered by `alpha^2`, then `p`,
/// then criterion.
pub fn strategy_table(n: usize, alpha2s: &[f64], ps: &[f64], grid: &PprimeGrid) -> Result<Vec<StrategyRecord>, Error> {
    if alpha2s.is_empty() {
        return Err(SweepError::EmptyList("alpha2").into());
    }
    if ps.is_empty() {
        return Err(SweepError::EmptyList("p").into());
    }
    grid.validate()?;
    let points = grid.points();
    let mut out = Vec::new();
    for &a2 in alpha2s {
        for &p in ps {
            let base = GhzScenario::from_alpha2(n, 0, a2, p, 0.0)?;
            let at = |m: usize, pp: f64| {
                base.with_m(m)
                    .and_then(|s| s.with_p_prime(pp))
                    .expect("validated ranges")
            };
            for criterion in [Criterion::Gmc, Criterion::Fidelity] {
                let segments = match criterion {
                    Criterion::Gmc => segment_by_argmax(n, &points, |m, pp| gmc_closed_form(&at(m, pp)))?,
                    Criterion::Fidelity => segment_by_argmax(n, &points, |m, pp| fidelity_of(&at(m, pp)).value)?,
                };
                out.push(StrategyRecord {
                    n,
                    alpha2: a2,
                    p,
                    criterion,
                    segments,
                });
            }
        }
    }
    Ok(out)
}
