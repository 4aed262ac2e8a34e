//! Density-matrix simulation of Bennett teleportation and of controlled
//! teleportation with one or two controllers.
//!
//! Register layout: qubit 0 carries the unknown input, qubits `1..=n` hold
//! the resource. Qubit 0 is the most significant bit.
//!
//! Role assignment per resource size:
//!
//! * two qubits: Alice measures `(0, 1)`, Bob holds qubit 2.
//! * three qubits: the controller holds qubit 1, Bob qubit 2, Alice
//!   measures `(0, 3)`.
//! * four qubits: Alice measures `(0, 1)`, controllers hold qubits 2 and 3,
//!   Bob holds qubit 4.
//!
//! Bell outcomes are encoded as `Phi+ -> (0,0)`, `Psi+ -> (0,1)`,
//! `Phi- -> (1,0)`, `Psi- -> (1,1)`. A controller rotates its qubit with
//! `R_theta = [[cos, sin], [-sin, cos]]` and measures in the Z basis.
//!
//! Correction tables (the operator acts on Bob's qubit, rightmost first):
//!
//! | strategy | Bob's correction |
//! |----------|------------------|
//! | `Phi` | `Z^c0 X^c1 Z^c2 Z^c3` |
//! | `Psi` | `Z^c0 X^c1 Z^c2 Z^c3 X` |
//! | `Lookup(t)` | the Pauli `t[c0 c1 c2 c3]` |
//! | `PauliFrame(P)` | `P Z^c0 X^c1` (two-qubit resource only) |
//!
//! Bits of a withholding controller are unknown to Bob and enter the table
//! as 0. Three-qubit runs report the best of `Phi`, `Psi` and the optimal
//! lookup table, which is the maximum over all Pauli lookup tables. For the
//! damped family this maximum always equals `Phi` or `Psi`:
//!
//! * `Phi` gives `(3 + D1 + 4 Re(z1 + z4)) / 6`,
//! * `Psi` gives `(3 - D1 + 4 Re(z2 + z3)) / 6`,
//!
//! with `D1` as in [`crate::telefid::cqt_fidelity_3q`]. Four-qubit runs use
//! `Phi`; two-qubit runs use the best `PauliFrame`.

use crate::channels::{evolve_pipeline, GhzScenario};
use crate::measures::x_state_view;
use crate::qmat::{identity2, partial_trace, sigma_x, sigma_y, sigma_z, ComplexMatrix, DensityMatrix, PureState, C64};
use crate::telefid::{cqt_fidelity_3q, cqt_fidelity_4q_closed, teleport_fidelity_2q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

/// Default controller rotation angle.
pub const DEFAULT_THETA: f64 = FRAC_PI_4;
/// Allowed deviation of branch probabilities from summing to one.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qubit pair ({0}, {1}) is not inside a {2}-qubit register")]
    InvalidPair(usize, usize, usize),
    #[error("qubit {0} is not inside a {1}-qubit register")]
    InvalidQubit(usize, usize),
    #[error("strategy {0:?} does not apply to a {1}-qubit resource")]
    UnsupportedStrategy(Strategy, usize),
}

/// Bell measurement of Alice's pair, optional controller measurements and
/// Bob's correction, applied to a noisy resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    n_resource: usize,
    resource: DensityMatrix,
    input_state: Option<PureState>,
    controller_angles: Vec<f64>,
    cooperate: Vec<bool>,
}

impl ProtocolRun {
    /// Run with every controller cooperating at the default angle, averaged
    /// over the six axial input states.
    pub fn new(resource: DensityMatrix) -> Result<Self, ProtocolError> {
        let n = resource.n_qubits();
        if !(2..=4).contains(&n) {
            return Err(ProtocolError::DimensionMismatch(format!(
                "resource of {n} qubits, expected 2 to 4"
            )));
        }
        let controllers = n - 2;
        Ok(Self {
            n_resource: n,
            resource,
            input_state: None,
            controller_angles: vec![DEFAULT_THETA; controllers],
            cooperate: vec![true; controllers],
        })
    }

    /// Teleports a single input instead of averaging over the axial states.
    pub fn with_input(mut self, input: PureState) -> Result<Self, ProtocolError> {
        if input.dim() != 2 {
            return Err(ProtocolError::DimensionMismatch(format!(
                "input of dimension {}, expected 2",
                input.dim()
            )));
        }
        self.input_state = Some(input);
        Ok(self)
    }

    pub fn with_controller_angles(mut self, angles: Vec<f64>) -> Result<Self, ProtocolError> {
        if angles.len() != self.controllers() {
            return Err(ProtocolError::DimensionMismatch(format!(
                "{} angles for {} controllers",
                angles.len(),
                self.controllers()
            )));
        }
        self.controller_angles = angles;
        Ok(self)
    }

    pub fn with_cooperation(mut self, cooperate: Vec<bool>) -> Result<Self, ProtocolError> {
        if cooperate.len() != self.controllers() {
            return Err(ProtocolError::DimensionMismatch(format!(
                "{} flags for {} controllers",
                cooperate.len(),
                self.controllers()
            )));
        }
        self.cooperate = cooperate;
        Ok(self)
    }

    pub fn n_resource(&self) -> usize {
        self.n_resource
    }

    pub fn resource(&self) -> &DensityMatrix {
        &self.resource
    }

    pub fn input_state(&self) -> Option<&PureState> {
        self.input_state.as_ref()
    }

    pub fn controller_angles(&self) -> &[f64] {
        &self.controller_angles
    }

    pub fn cooperate(&self) -> &[bool] {
        &self.cooperate
    }

    fn controllers(&self) -> usize {
        self.n_resource - 2
    }

    fn register_qubits(&self) -> usize {
        self.n_resource + 1
    }

    fn alice_pair(&self) -> (usize, usize) {
        match self.n_resource {
            3 => (0, 3),
            _ => (0, 1),
        }
    }

    fn controller_qubits(&self) -> Vec<usize> {
        match self.n_resource {
            3 => vec![1],
            4 => vec![2, 3],
            _ => vec![],
        }
    }

    fn bob(&self) -> usize {
        match self.n_resource {
            3 => 2,
            n => n,
        }
    }
}

/// One measurement record with its probability and conditional state.
///
/// [`bell_measurement`] and [`controller_measurement`] return the full
/// register after the measurement; [`protocol_branches`] returns Bob's
/// qubit before correction.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBranch {
    pub classical_bits: Vec<u8>,
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub state: Option<DensityMatrix>,
}

/// Correction table applied by Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Phi,
    Psi,
}

/// Bob's correction strategy. See the module documentation for the tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Table(Table),
    PauliFrame(Pauli),
    /// Pauli applied to Bob's qubit for each outcome, indexed by the packed
    /// bits `c0 c1 c2 c3` (c0 most significant).
    Lookup([Pauli; 16]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => identity2(),
            Pauli::X => sigma_x(),
            Pauli::Y => sigma_y(),
            Pauli::Z => sigma_z(),
        }
    }
}

/// Fidelity of a run together with the strategy achieving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolReport {
    pub fidelity: f64,
    pub strategy: Strategy,
}

/// The six axial Bloch states `|0>, |1>, |+>, |->, |+i>, |-i>`.
pub fn axial_states() -> [PureState; 6] {
    [
        PureState::bloch(0.0, 0.0),
        PureState::bloch(PI, 0.0),
        PureState::bloch(FRAC_PI_2, 0.0),
        PureState::bloch(FRAC_PI_2, PI),
        PureState::bloch(FRAC_PI_2, FRAC_PI_2),
        PureState::bloch(FRAC_PI_2, -FRAC_PI_2),
    ]
}

fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// Embeds a 4x4 operator acting on qubits `(i, j)` (0-based) of an `n`-qubit
/// register.
fn embed_pair(op: &ComplexMatrix, (i, j): (usize, usize), n: usize) -> ComplexMatrix {
    let mask = (1usize << (n - 1 - i)) | (1usize << (n - 1 - j));
    ComplexMatrix::from_fn(1 << n, 1 << n, |r, c| {
        if r & !mask != c & !mask {
            return C64::new(0.0, 0.0);
        }
        op[(2 * bit(r, i, n) + bit(r, j, n), 2 * bit(c, i, n) + bit(c, j, n))]
    })
}

/// Embeds a single-qubit operator acting on qubit `q` (0-based).
fn embed_one(op: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let mask = 1usize << (n - 1 - q);
    ComplexMatrix::from_fn(1 << n, 1 << n, |r, c| {
        if r & !mask != c & !mask {
            return C64::new(0.0, 0.0);
        }
        op[(bit(r, q, n), bit(c, q, n))]
    })
}

/// Unnormalized projection `P rho P` with its probability.
fn project(rho: &ComplexMatrix, proj: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let post = proj.matmul(rho).matmul(proj);
    (post.trace().re.max(0.0), post)
}

fn branch(bits: Vec<u8>, probability: f64, post: ComplexMatrix) -> Result<OutcomeBranch, ProtocolError> {
    let state = if probability > crate::qmat::NULL_PROBABILITY {
        Some(
            DensityMatrix::new(post.scale_real(1.0 / probability))
                .map_err(|e| ProtocolError::DimensionMismatch(e.to_string()))?,
        )
    } else {
        None
    };
    Ok(OutcomeBranch {
        classical_bits: bits,
        probability,
        state,
    })
}

/// Bell measurement of `qubit_pair` (0-based, first qubit most significant)
/// with outcome bits `Phi+ (0,0)`, `Psi+ (0,1)`, `Phi- (1,0)`, `Psi- (1,1)`.
pub fn bell_measurement(
    register: &DensityMatrix,
    qubit_pair: (usize, usize),
) -> Result<Vec<OutcomeBranch>, ProtocolError> {
    let n = register.n_qubits();
    let (i, j) = qubit_pair;
    if i >= n || j >= n || i == j {
        return Err(ProtocolError::InvalidPair(i, j, n));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let vectors: [([u8; 2], [f64; 4]); 4] = [
        ([0, 0], [h, 0.0, 0.0, h]),
        ([0, 1], [0.0, h, h, 0.0]),
        ([1, 0], [h, 0.0, 0.0, -h]),
        ([1, 1], [0.0, h, -h, 0.0]),
    ];
    vectors
        .iter()
        .map(|(bits, v)| {
            let local = ComplexMatrix::from_fn(4, 4, |r, c| C64::new(v[r] * v[c], 0.0));
            let (p, post) = project(register.matrix(), &embed_pair(&local, (i, j), n));
            branch(bits.to_vec(), p, post)
        })
        .collect()
}

/// Rotation `R_theta = [[cos, sin], [-sin, cos]]`.
pub fn controller_rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real(2, 2, &[c, s, -s, c]).expect("static shape")
}

/// Rotates `qubit` (0-based) by `R_theta` and measures it in the Z basis.
pub fn controller_measurement(
    register: &DensityMatrix,
    qubit: usize,
    theta: f64,
) -> Result<Vec<OutcomeBranch>, ProtocolError> {
    let n = register.n_qubits();
    if qubit >= n {
        return Err(ProtocolError::InvalidQubit(qubit, n));
    }
    let rotated = register
        .matrix()
        .conjugate_by(&embed_one(&controller_rotation(theta), qubit, n));
    (0..2u8)
        .map(|b| {
            let local = ComplexMatrix::diag(if b == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] });
            let (p, post) = project(&rotated, &embed_one(&local, qubit, n));
            branch(vec![b], p, post)
        })
        .collect()
}

/// Unnormalized branch of Bob's qubit: bits `(c0, c1, c2, c3)` with
/// unknown bits set to 0, and `probability * state`.
#[derive(Debug, Clone)]
struct BobBranch {
    bits: [u8; 4],
    weighted: ComplexMatrix,
}

fn bob_branches(run: &ProtocolRun, input: &PureState) -> Result<Vec<BobBranch>, ProtocolError> {
    let n = run.register_qubits();
    let register = input.density().tensor(&run.resource);
    let mut pending: Vec<(Vec<u8>, f64, DensityMatrix)> = bell_measurement(&register, run.alice_pair())?
        .into_iter()
        .filter_map(|b| b.state.map(|s| (b.classical_bits, b.probability, s)))
        .collect();
    for ((&q, &theta), &coop) in run
        .controller_qubits()
        .iter()
        .zip(&run.controller_angles)
        .zip(&run.cooperate)
    {
        let mut next = Vec::with_capacity(pending.len() * 2);
        for (bits, p, state) in pending {
            if !coop {
                let mut bits = bits;
                bits.push(0);
                next.push((bits, p, state));
                continue;
            }
            for b in controller_measurement(&state, q, theta)? {
                if let Some(s) = b.state {
                    let mut bits = bits.clone();
                    bits.extend(b.classical_bits);
                    next.push((bits, p * b.probability, s));
                }
            }
        }
        pending = next;
    }
    let bob = run.bob();
    pending
        .into_iter()
        .map(|(bits, p, state)| {
            let reduced =
                partial_trace(&state, &[bob + 1], n).map_err(|e| ProtocolError::DimensionMismatch(e.to_string()))?;
            let mut packed = [0u8; 4];
            packed[..bits.len()].copy_from_slice(&bits);
            Ok(BobBranch {
                bits: packed,
                weighted: reduced.matrix().scale_real(p),
            })
        })
        .collect()
}

/// Bob's conditional states before correction for the run's input state
/// (`|0>` when none is set). Bits of withholding controllers are reported
/// as 0 and their branches are merged.
pub fn protocol_branches(run: &ProtocolRun) -> Result<Vec<OutcomeBranch>, ProtocolError> {
    let input = run.input_state.clone().unwrap_or_else(|| PureState::bloch(0.0, 0.0));
    let width = 2 + run.controllers();
    bob_branches(run, &input)?
        .into_iter()
        .map(|b| {
            let p = b.weighted.trace().re;
            branch(b.bits[..width].to_vec(), p, b.weighted)
        })
        .collect()
}

fn pow(op: ComplexMatrix, bit: u8) -> ComplexMatrix {
    if bit == 1 {
        op
    } else {
        identity2()
    }
}

fn phi_correction(bits: &[u8; 4]) -> ComplexMatrix {
    pow(sigma_z(), bits[0])
        .matmul(&pow(sigma_x(), bits[1]))
        .matmul(&pow(sigma_z(), bits[2]))
        .matmul(&pow(sigma_z(), bits[3]))
}

fn table_correction(table: Table, bits: &[u8; 4]) -> ComplexMatrix {
    match table {
        Table::Phi => phi_correction(bits),
        Table::Psi => phi_correction(bits).matmul(&sigma_x()),
    }
}

/// Bob's weighted output for one branch under `strategy`.
fn corrected(strategy: &Strategy, b: &BobBranch) -> ComplexMatrix {
    match *strategy {
        Strategy::Table(t) => b.weighted.conjugate_by(&table_correction(t, &b.bits)),
        Strategy::Lookup(table) => b.weighted.conjugate_by(&table[packed_index(&b.bits)].matrix()),
        Strategy::PauliFrame(p) => {
            let base = pow(sigma_z(), b.bits[0]).matmul(&pow(sigma_x(), b.bits[1]));
            b.weighted.conjugate_by(&p.matrix().matmul(&base))
        }
    }
}

fn packed_index(bits: &[u8; 4]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// The Pauli lookup table maximizing the fidelity of the run: each outcome
/// contributes independently, so every entry is chosen on its own.
pub fn optimal_lookup(run: &ProtocolRun) -> Result<[Pauli; 16], ProtocolError> {
    Ok(optimal_lookup_prepared(&prepared_inputs(run)?))
}

fn optimal_lookup_prepared(prepared: &[(PureState, Vec<BobBranch>)]) -> [Pauli; 16] {
    let mut score = [[0.0f64; 4]; 16];
    for (psi, branches) in prepared {
        for b in branches {
            for (k, p) in Pauli::ALL.iter().enumerate() {
                let out = b.weighted.conjugate_by(&p.matrix());
                score[packed_index(&b.bits)][k] += sandwich(psi, &out);
            }
        }
    }
    score.map(|row| {
        let mut best = 0;
        for k in 1..4 {
            if row[k] > row[best] + 1e-15 {
                best = k;
            }
        }
        Pauli::ALL[best]
    })
}

fn sandwich(psi: &PureState, m: &ComplexMatrix) -> f64 {
    let a = psi.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += a[i].conj() * m[(i, j)] * a[j];
        }
    }
    acc.re
}

fn fidelity_from_branches(
    strategy: &Strategy,
    input: &PureState,
    branches: &[BobBranch],
) -> Result<f64, ProtocolError> {
    let mut total = 0.0;
    for b in branches {
        total += sandwich(input, &corrected(strategy, b));
    }
    Ok(total)
}

fn check_strategy(run: &ProtocolRun, strategy: &Strategy) -> Result<(), ProtocolError> {
    let ok = match strategy {
        Strategy::PauliFrame(_) => run.n_resource == 2,
        _ => run.n_resource > 2,
    };
    if ok {
        Ok(())
    } else {
        Err(ProtocolError::UnsupportedStrategy(*strategy, run.n_resource))
    }
}

/// Teleportation fidelity of a single input under a fixed strategy.
pub fn fidelity_for_input(run: &ProtocolRun, strategy: &Strategy, input: &PureState) -> Result<f64, ProtocolError> {
    check_strategy(run, strategy)?;
    if input.dim() != 2 {
        return Err(ProtocolError::DimensionMismatch(format!(
            "input of dimension {}, expected 2",
            input.dim()
        )));
    }
    fidelity_from_branches(strategy, input, &bob_branches(run, input)?)
}

/// Inputs of a run with their precomputed branches.
fn prepared_inputs(run: &ProtocolRun) -> Result<Vec<(PureState, Vec<BobBranch>)>, ProtocolError> {
    let inputs: Vec<PureState> = match &run.input_state {
        Some(psi) => vec![psi.clone()],
        None => axial_states().to_vec(),
    };
    inputs
        .into_iter()
        .map(|psi| {
            let b = bob_branches(run, &psi)?;
            Ok((psi, b))
        })
        .collect()
}

fn mean_fidelity(strategy: &Strategy, prepared: &[(PureState, Vec<BobBranch>)]) -> Result<f64, ProtocolError> {
    let mut sum = 0.0;
    for (psi, b) in prepared {
        sum += fidelity_from_branches(strategy, psi, b)?;
    }
    Ok(sum / prepared.len() as f64)
}

/// Fidelity of a run under a fixed strategy, for the run's input or
/// averaged over the six axial states.
pub fn fidelity_with_strategy(run: &ProtocolRun, strategy: &Strategy) -> Result<f64, ProtocolError> {
    check_strategy(run, strategy)?;
    mean_fidelity(strategy, &prepared_inputs(run)?)
}

fn best_of(
    candidates: impl IntoIterator<Item = Strategy>,
    prepared: &[(PureState, Vec<BobBranch>)],
) -> Result<ProtocolReport, ProtocolError> {
    let mut best: Option<ProtocolReport> = None;
    for strategy in candidates {
        let fidelity = mean_fidelity(&strategy, prepared)?;
        if best.is_none_or(|b| fidelity > b.fidelity) {
            best = Some(ProtocolReport { fidelity, strategy });
        }
    }
    best.ok_or_else(|| ProtocolError::DimensionMismatch("empty strategy set".into()))
}

/// Runs the protocol and reports the best fidelity with its strategy.
pub fn run_protocol_report(run: &ProtocolRun) -> Result<ProtocolReport, ProtocolError> {
    let prepared = prepared_inputs(run)?;
    match run.n_resource {
        2 => best_of(Pauli::ALL.map(Strategy::PauliFrame), &prepared),
        4 => best_of([Strategy::Table(Table::Phi)], &prepared),
        _ => {
            let lookup = Strategy::Lookup(optimal_lookup_prepared(&prepared));
            best_of(
                [Strategy::Table(Table::Phi), Strategy::Table(Table::Psi), lookup],
                &prepared,
            )
        }
    }
}

/// Best average fidelity of the run over its strategy set.
pub fn run_protocol(run: &ProtocolRun) -> Result<f64, ProtocolError> {
    Ok(run_protocol_report(run)?.fidelity)
}

/// Bennett teleportation through a two-qubit resource with the best fixed
/// Pauli frame, averaged over the six axial inputs.
pub fn run_bennett_2q(resource: &DensityMatrix) -> Result<f64, ProtocolError> {
    if resource.n_qubits() != 2 {
        return Err(ProtocolError::DimensionMismatch(format!(
            "Bennett teleportation needs a 2-qubit resource, got {} qubits",
            resource.n_qubits()
        )));
    }
    run_protocol(&ProtocolRun::new(resource.clone())?)
}

/// Deviation between circuit and closed-form fidelity on one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub scenario: GhzScenario,
    pub circuit: f64,
    pub analytic: f64,
}

impl OracleSample {
    pub fn deviation(&self) -> f64 {
        (self.circuit - self.analytic).abs()
    }
}

/// Compares [`run_protocol`] with the analytic fidelity on `samples`
/// scenarios drawn uniformly (`n` in 2..=4, `m` in 0..=n, `alpha^2`, `p`
/// and `p'` in [0, 1]) from a seeded generator.
pub fn oracle_samples(samples: usize, seed: u64) -> Result<Vec<OracleSample>, crate::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenarios: Vec<GhzScenario> = (0..samples)
        .map(|_| {
            let n = rng.random_range(2..=4);
            let m = rng.random_range(0..=n);
            GhzScenario::from_alpha2(n, m, rng.random(), rng.random(), rng.random())
        })
        .collect::<Result<_, _>>()?;
    scenarios
        .into_iter()
        .map(|scenario| {
            let rho = evolve_pipeline(&scenario);
            let analytic = match scenario.n() {
                2 => teleport_fidelity_2q(&rho)?.value,
                3 => cqt_fidelity_3q(&x_state_view(&rho)?)?.value,
                _ => cqt_fidelity_4q_closed(&scenario)?.value,
            };
            let circuit = run_protocol(&ProtocolRun::new(rho)?)?;
            Ok(OracleSample {
                scenario,
                circuit,
                analytic,
            })
        })
        .collect()
}
