//! GHZ-symmetric projection (twirling), symmetric-family coordinates and
//! SLOCC region classification.
//!
//! The GHZ symmetry group is generated by qubit permutations, the global flip
//! `sigma_x^{(x)n}` and correlated Z rotations whose angles sum to zero. Its
//! twirl keeps the real part of the corner coherence `rho[0][D-1]` and
//! averages each diagonal entry over the basis states of Hamming weight `w`
//! and `n - w`.

use crate::qmat::{ComplexMatrix, DensityMatrix, C64};
use std::path::Path;
use thiserror::Error;

/// Largest entrywise distance from the twirled state accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Points this close to a boundary take the less entangled label.
pub const BOUNDARY_TOL: f64 = 1e-6;

const REFERENCE_BOUNDARIES: &str = include_str!("../data/slocc3_boundaries.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwirlError {
    #[error("twirl supports 2, 3 or 4 qubits, got {0}")]
    UnsupportedQubitCount(usize),
    #[error("state is not GHZ-symmetric (deviation {0})")]
    NotSymmetric(f64),
    #[error("three-qubit classification needs boundary data")]
    MissingBoundaryData,
    #[error("boundary data line {line}: {reason}")]
    MalformedBoundaryData { line: usize, reason: String },
    #[error("cannot read boundary data: {0}")]
    Io(String),
}

/// SLOCC region of a GHZ-symmetric state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SloccRegion {
    Ghz,
    W,
    Biseparable,
    Separable,
    Entangled,
    Unclassified,
}

impl SloccRegion {
    pub fn label(&self) -> &'static str {
        match self {
            SloccRegion::Ghz => "GHZ",
            SloccRegion::W => "W",
            SloccRegion::Biseparable => "biseparable",
            SloccRegion::Separable => "separable",
            SloccRegion::Entangled => "entangled",
            SloccRegion::Unclassified => "unclassified",
        }
    }
}

impl std::fmt::Display for SloccRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwirlCoords2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwirlCoords3 {
    pub x: f64,
    pub y: f64,
}

/// Four-qubit coordinates together with the diagonal parameters of the
/// symmetric state: `alpha1` at Hamming weights 0 and 4, `alpha2` at 1 and 3,
/// `alpha3` at 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwirlCoords4 {
    pub x_t: f64,
    pub y_t: f64,
    pub z_t: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwirlCoords {
    Two(TwirlCoords2),
    Three(TwirlCoords3),
    Four(TwirlCoords4),
}

impl TwirlCoords {
    /// `(x, y)` for two and three qubits, `(x~, y~)` for four.
    pub fn xy(&self) -> (f64, f64) {
        match self {
            TwirlCoords::Two(c) => (c.x, c.y),
            TwirlCoords::Three(c) => (c.x, c.y),
            TwirlCoords::Four(c) => (c.x_t, c.y_t),
        }
    }

    /// `z~` for four qubits.
    pub fn z_t(&self) -> Option<f64> {
        match self {
            TwirlCoords::Four(c) => Some(c.z_t),
            _ => None,
        }
    }
}

/// `N1 = sqrt(2/3 - 2 sqrt(10)/15)`.
pub fn n1() -> f64 {
    (2.0 / 3.0 - 2.0 * 10f64.sqrt() / 15.0).sqrt()
}

/// `N2 = sqrt(14/3 - 22 sqrt(10)/15)`.
pub fn n2() -> f64 {
    (14.0 / 3.0 - 22.0 * 10f64.sqrt() / 15.0).sqrt()
}

fn check_n(n: usize) -> Result<(), TwirlError> {
    if !(2..=4).contains(&n) {
        return Err(TwirlError::UnsupportedQubitCount(n));
    }
    Ok(())
}

/// Projects an `n`-qubit state onto the GHZ-symmetric family.
pub fn twirl(rho: &DensityMatrix) -> Result<DensityMatrix, TwirlError> {
    let n = rho.n_qubits();
    check_n(n)?;
    let d = rho.dim();
    let mut class_sum = vec![0.0; n + 1];
    let mut class_size = vec![0usize; n + 1];
    for i in 0..d {
        let w = (i as u32).count_ones() as usize;
        let c = w.min(n - w);
        class_sum[c] += rho.entry(i, i).re;
        class_size[c] += 1;
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let w = (i as u32).count_ones() as usize;
        let c = w.min(n - w);
        out[(i, i)] = C64::new(class_sum[c] / class_size[c] as f64, 0.0);
    }
    let corner = rho.entry(0, d - 1).re;
    out[(0, d - 1)] = C64::new(corner, 0.0);
    out[(d - 1, 0)] = C64::new(corner, 0.0);
    Ok(DensityMatrix::from_trusted(out))
}

fn require_symmetric(rho: &DensityMatrix, n: usize) -> Result<(), TwirlError> {
    if rho.n_qubits() != n {
        return Err(TwirlError::UnsupportedQubitCount(rho.n_qubits()));
    }
    let dev = twirl(rho)?.matrix().max_abs_diff(rho.matrix());
    if dev > SYMMETRY_TOL {
        return Err(TwirlError::NotSymmetric(dev));
    }
    Ok(())
}

/// Overlaps with `(|0..0> + |1..1>)/sqrt 2` and `(|0..0> - |1..1>)/sqrt 2`.
fn ghz_overlaps(rho: &DensityMatrix) -> (f64, f64) {
    let d = rho.dim();
    let pop = 0.5 * (rho.entry(0, 0).re + rho.entry(d - 1, d - 1).re);
    let coh = rho.entry(0, d - 1).re;
    (pop + coh, pop - coh)
}

/// `x = (<Phi+|rho|Phi+> - <Phi-|rho|Phi->)/2`,
/// `y = (<Phi+|rho|Phi+> + <Phi-|rho|Phi-> - 1/2)/sqrt 2`.
pub fn coords_2q(rho_s: &DensityMatrix) -> Result<TwirlCoords2, TwirlError> {
    require_symmetric(rho_s, 2)?;
    let (gp, gm) = ghz_overlaps(rho_s);
    Ok(TwirlCoords2 {
        x: 0.5 * (gp - gm),
        y: (gp + gm - 0.5) / 2f64.sqrt(),
    })
}

/// `x = (<GHZ+|rho|GHZ+> - <GHZ-|rho|GHZ->)/2`,
/// `y = (<GHZ+|rho|GHZ+> + <GHZ-|rho|GHZ-> - 1/4)/sqrt 3`.
pub fn coords_3q(rho_s: &DensityMatrix) -> Result<TwirlCoords3, TwirlError> {
    require_symmetric(rho_s, 3)?;
    let (gp, gm) = ghz_overlaps(rho_s);
    Ok(TwirlCoords3 {
        x: 0.5 * (gp - gm),
        y: (gp + gm - 0.25) / 3f64.sqrt(),
    })
}

/// Four-qubit coordinates from the overlaps `G+-` with `|GHZ4+->` and `P`
/// with `(|0001> + |1110>)/sqrt 2`:
///
/// * `x~ = (G+ - G-)/2`
/// * `y~ = N1/2 (G+ + G- + 2(sqrt 10 + 3) P)`
/// * `z~ = N2/2 ((sqrt 10 + 3)(G+ - G-) - 2 P)`
pub fn coords_4q(rho_s: &DensityMatrix) -> Result<TwirlCoords4, TwirlError> {
    require_symmetric(rho_s, 4)?;
    let (gp, gm) = ghz_overlaps(rho_s);
    let psi4 = 0.5 * (rho_s.entry(1, 1).re + rho_s.entry(14, 14).re) + rho_s.entry(1, 14).re;
    let k = 10f64.sqrt() + 3.0;
    Ok(TwirlCoords4 {
        x_t: 0.5 * (gp - gm),
        y_t: 0.5 * n1() * (gp + gm + 2.0 * k * psi4),
        z_t: 0.5 * n2() * (k * (gp - gm) - 2.0 * psi4),
        alpha1: rho_s.entry(0, 0).re,
        alpha2: rho_s.entry(1, 1).re,
        alpha3: rho_s.entry(3, 3).re,
    })
}

/// Twirls `rho` and returns the coordinates of the result.
pub fn twirl_coords(rho: &DensityMatrix) -> Result<TwirlCoords, TwirlError> {
    let s = twirl(rho)?;
    Ok(match rho.n_qubits() {
        2 => TwirlCoords::Two(coords_2q(&s)?),
        3 => TwirlCoords::Three(coords_3q(&s)?),
        _ => TwirlCoords::Four(coords_4q(&s)?),
    })
}

/// Upper boundaries of the less entangled regions of the three-qubit
/// GHZ-symmetric triangle, each a polyline sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub ghz_w: Vec<(f64, f64)>,
    pub w_bisep: Vec<(f64, f64)>,
    pub bisep_sep: Vec<(f64, f64)>,
}

impl BoundaryData {
    /// Parses lines of the form `label x y`; `#` starts a comment and blank
    /// lines separate sections.
    pub fn parse(text: &str) -> Result<Self, TwirlError> {
        let mut data = BoundaryData {
            ghz_w: Vec::new(),
            w_bisep: Vec::new(),
            bisep_sep: Vec::new(),
        };
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| TwirlError::MalformedBoundaryData {
                line: line_no,
                reason: reason.into(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [label, xs, ys] = fields[..] else {
                return Err(malformed("expected `label x y`"));
            };
            let x: f64 = xs.parse().map_err(|_| malformed("x is not a number"))?;
            let y: f64 = ys.parse().map_err(|_| malformed("y is not a number"))?;
            if !x.is_finite() || !y.is_finite() {
                return Err(malformed("non-finite coordinate"));
            }
            let target = match label {
                "ghz_w" => &mut data.ghz_w,
                "w_bisep" => &mut data.w_bisep,
                "bisep_sep" => &mut data.bisep_sep,
                _ => return Err(malformed(&format!("unknown label `{label}`"))),
            };
            if target.last().is_some_and(|&(px, _)| x < px) {
                return Err(malformed("points must be ordered by x"));
            }
            target.push((x, y));
        }
        for (name, poly) in [
            ("ghz_w", &data.ghz_w),
            ("w_bisep", &data.w_bisep),
            ("bisep_sep", &data.bisep_sep),
        ] {
            if poly.len() < 2 {
                return Err(TwirlError::MalformedBoundaryData {
                    line: text.lines().count(),
                    reason: format!("section `{name}` needs at least two points"),
                });
            }
        }
        Ok(data)
    }

    pub fn from_path(path: &Path) -> Result<Self, TwirlError> {
        let text = std::fs::read_to_string(path).map_err(|e| TwirlError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The boundary set shipped with the crate.
    pub fn reference() -> Self {
        Self::parse(REFERENCE_BOUNDARIES).expect("bundled boundary data parses")
    }
}

fn segment_distance((px, py): (f64, f64), (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    ((px - ax - t * dx).powi(2) + (py - ay - t * dy).powi(2)).sqrt()
}

/// True when `(x, y)` lies on or under the polyline within its x-range, or
/// within [`BOUNDARY_TOL`] of it.
fn on_or_below(poly: &[(f64, f64)], point: (f64, f64)) -> bool {
    if poly
        .windows(2)
        .any(|w| segment_distance(point, w[0], w[1]) <= BOUNDARY_TOL)
    {
        return true;
    }
    let (x, y) = point;
    let (xl, xr) = (poly[0].0, poly[poly.len() - 1].0);
    if x < xl || x > xr {
        return false;
    }
    let k = poly.windows(2).position(|w| x <= w[1].0).unwrap_or(poly.len() - 2);
    let ((x0, y0), (x1, y1)) = (poly[k], poly[k + 1]);
    let f = if x1 == x0 {
        y0.max(y1)
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    y <= f + BOUNDARY_TOL
}

/// Two-qubit separability line `y = 1/(2 sqrt 2) - sqrt 2 |x|`.
pub fn separability_line_2q(x: f64) -> f64 {
    1.0 / (2.0 * 2f64.sqrt()) - 2f64.sqrt() * x.abs()
}

/// SLOCC region of a coordinate point. Two-qubit points use the built-in
/// separability line, three-qubit points need boundary data and four-qubit
/// points are always [`SloccRegion::Unclassified`].
pub fn classify(coords: &TwirlCoords, boundaries: Option<&BoundaryData>) -> Result<SloccRegion, TwirlError> {
    match coords {
        TwirlCoords::Two(c) => Ok(if c.y > separability_line_2q(c.x) + BOUNDARY_TOL {
            SloccRegion::Entangled
        } else {
            SloccRegion::Separable
        }),
        TwirlCoords::Three(c) => {
            let b = boundaries.ok_or(TwirlError::MissingBoundaryData)?;
            let point = (c.x, c.y);
            Ok(if !on_or_below(&b.ghz_w, point) {
                SloccRegion::Ghz
            } else if !on_or_below(&b.w_bisep, point) {
                SloccRegion::W
            } else if !on_or_below(&b.bisep_sep, point) {
                SloccRegion::Biseparable
            } else {
                SloccRegion::Separable
            })
        }
        TwirlCoords::Four(_) => Ok(SloccRegion::Unclassified),
    }
}
