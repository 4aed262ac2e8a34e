//! Closed-form matrices of the three-qubit damped family.

use ghzadc::channels::{evolve_pipeline, evolve_pipeline_stages, GhzScenario};
use ghzadc::qmat::DensityMatrix;

/// The `(alpha^2, p, p')` fixture grid.
pub const GOLDEN_GRID: [(f64, f64, f64); 8] = [
    (0.3, 0.1, 0.2),
    (0.3, 0.1, 0.5),
    (0.3, 0.3, 0.2),
    (0.3, 0.3, 0.5),
    (0.5, 0.1, 0.2),
    (0.5, 0.1, 0.5),
    (0.5, 0.3, 0.2),
    (0.5, 0.3, 0.5),
];

/// Diagonal and the single real coherence `(i, j, value)` of an X-state.
pub struct XFixture {
    pub diag: [f64; 8],
    pub corner: (usize, usize, f64),
}

/// Largest entrywise deviation of `rho` from the fixture.
pub fn deviation(rho: &DensityMatrix, fx: &XFixture) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let expected = if i == j {
                fx.diag[i]
            } else if (i, j) == (fx.corner.0, fx.corner.1) || (j, i) == (fx.corner.0, fx.corner.1) {
                fx.corner.2
            } else {
                0.0
            };
            let got = rho.entry(i, j);
            worst = worst.max((got.re - expected).abs()).max(got.im.abs());
        }
    }
    worst
}

/// State after the first damping stage and the NOT gates on qubits `1..=m`.
pub fn first_stage(m: usize, a2: f64, p: f64) -> XFixture {
    let (a, b2, q) = (a2.sqrt(), 1.0 - a2, 1.0 - p);
    let coh = a * b2.sqrt() * q.powf(1.5);
    let (g, e1, e2, e3) = (a2 + b2 * p.powi(3), b2 * p * p * q, b2 * p * q * q, b2 * q.powi(3));
    let (diag, (i, j)) = match m {
        0 => ([g, e1, e1, e2, e1, e2, e2, e3], (0, 7)),
        1 => ([e1, e2, e2, e3, g, e1, e1, e2], (3, 4)),
        2 => ([e2, e3, e1, e2, e1, e2, g, e1], (1, 6)),
        _ => ([e3, e2, e2, e1, e2, e1, e1, g], (0, 7)),
    };
    XFixture {
        diag,
        corner: (i, j, coh),
    }
}

/// Final state after both damping stages and the closing NOT gates.
pub fn final_state(m: usize, a2: f64, p: f64, pp: f64) -> XFixture {
    let (a, b2, q, qp) = (a2.sqrt(), 1.0 - a2, 1.0 - p, 1.0 - pp);
    let (s, t) = (p + pp * q, p * pp + q);
    let coh = a * b2.sqrt() * (q * qp).powf(1.5);
    let diag = match m {
        0 => {
            let x1 = b2 * q * qp * s * s;
            let x2 = b2 * q * q * qp * qp * s;
            [a2 + b2 * s.powi(3), x1, x1, x2, x1, x2, x2, b2 * (q * qp).powi(3)]
        }
        1 => {
            let y1 = b2 * p * q * qp * qp * s;
            let y5 = b2 * q * qp * (p * p * pp + p * (pp * pp + 1.0) * q + pp * q * q);
            let y4 = b2 * pp * pp * q * (2.0 * p * p + q * q)
                + pp * (a2 + b2 * p * (p * p + 2.0 * q * q))
                + b2 * p * p * q
                + b2 * p * pp.powi(3) * q * q;
            [
                qp * (a2 + b2 * p * s * s),
                y1,
                y1,
                b2 * p * q * q * qp.powi(3),
                y4,
                y5,
                y5,
                b2 * q * q * qp * qp * t,
            ]
        }
        2 => {
            let w2 = qp * (b2 * p * p * pp * pp * q + pp * (a2 + b2 * p * (p * p + q * q)) + b2 * p * p * q);
            let w3 = b2 * p * q * qp * qp * t;
            let w6 = b2 * p * p * pp.powi(3) * q
                + pp * pp * (a2 + b2 * p * (p * p + 2.0 * q * q))
                + b2 * pp * q * (2.0 * p * p + q * q)
                + b2 * p * q * q;
            [
                qp * qp * (a2 + b2 * p * p * s),
                b2 * p * p * q * qp.powi(3),
                w2,
                w3,
                w2,
                w3,
                w6,
                b2 * q * qp * t * t,
            ]
        }
        _ => {
            let g = a2 + b2 * p.powi(3);
            let v1 = qp * qp * (pp * g + b2 * p * p * q);
            let v3 = qp * (pp * pp * g + 2.0 * b2 * p * p * pp * q + b2 * p * q * q);
            let last = pp.powi(3) * g + 3.0 * b2 * p * p * pp * pp * q + 3.0 * b2 * p * pp * q * q + b2 * q.powi(3);
            [qp.powi(3) * g, v1, v1, v3, v1, v3, v3, last]
        }
    };
    XFixture {
        diag,
        corner: (0, 7, coh),
    }
}

/// Largest deviation of the pipeline from both fixtures over the grid and
/// every flip count.
pub fn max_pipeline_deviation() -> f64 {
    let mut worst = 0.0f64;
    for (a2, p, pp) in GOLDEN_GRID {
        for m in 0..=3 {
            let s = GhzScenario::from_alpha2(3, m, a2, p, pp).expect("fixture parameters are valid");
            let stages = evolve_pipeline_stages(&s).expect("valid scenario");
            worst = worst.max(deviation(&stages.after_first_not, &first_stage(m, a2, p)));
            worst = worst.max(deviation(&evolve_pipeline(&s), &final_state(m, a2, p, pp)));
        }
    }
    worst
}
