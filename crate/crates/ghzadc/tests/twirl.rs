mod common;

use ghzadc::channels::{evolve_pipeline, ghz_state, not_mask_unitary, GhzScenario};
use ghzadc::measures::{find_esd, gmc_of, EsdKind};
use ghzadc::qmat::{ComplexMatrix, DensityMatrix, PureState, C64};
use ghzadc::twirl::{separability_line_2q, twirl, twirl_coords, TwirlCoords};
use proptest::prelude::*;

fn random_state(n: usize) -> impl Strategy<Value = DensityMatrix> {
    let d = 1usize << n;
    (prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * d), 0.0..=1.0f64).prop_filter_map(
        "zero vector",
        move |(raw, w)| {
            let mk = |chunk: &[(f64, f64)]| {
                let norm: f64 = chunk.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| {
                    PureState::new(chunk.iter().map(|&(a, b)| C64::new(a / norm, b / norm)).collect()).unwrap()
                })
            };
            let (a, b) = (mk(&raw[..d])?, mk(&raw[d..])?);
            DensityMatrix::new(
                a.density()
                    .matrix()
                    .scale_real(w)
                    .add(&b.density().matrix().scale_real(1.0 - w)),
            )
            .ok()
        },
    )
}

fn swap_first_two(n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    ComplexMatrix::from_fn(d, d, |i, j| {
        let (b0, b1) = ((j >> (n - 1)) & 1, (j >> (n - 2)) & 1);
        let mut k = j & !(3 << (n - 2));
        k |= b1 << (n - 1) | b0 << (n - 2);
        C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn twirl_matches_group_average_on_damped_states(s in common::scenarios(2..=4)) {
        let rho = evolve_pipeline(&s);
        prop_assert!(twirl(&rho).unwrap().matrix().max_abs_diff(common::group_average(&rho).matrix()) < 1e-6);
    }

    #[test]
    fn twirl_matches_group_average_on_generic_states(rho in (2usize..=3).prop_flat_map(random_state)) {
        prop_assert!(twirl(&rho).unwrap().matrix().max_abs_diff(common::group_average(&rho).matrix()) < 1e-6);
    }

    #[test]
    fn twirl_is_an_idempotent_symmetric_state(rho in (2usize..=4).prop_flat_map(random_state)) {
        let n = rho.n_qubits();
        let t = twirl(&rho).unwrap();
        prop_assert!(t.validate().is_ok());
        prop_assert!(twirl(&t).unwrap().matrix().max_abs_diff(t.matrix()) < 1e-12);
        for g in [not_mask_unitary(n, n).unwrap(), swap_first_two(n)] {
            prop_assert!(t.conjugate(&g).unwrap().matrix().max_abs_diff(t.matrix()) < 1e-12);
            prop_assert!(twirl(&rho.conjugate(&g).unwrap()).unwrap().matrix().max_abs_diff(t.matrix()) < 1e-12);
        }
    }

    #[test]
    fn four_qubit_diagonal_constraint(s in common::scenarios(4..=4)) {
        let TwirlCoords::Four(c) = twirl_coords(&evolve_pipeline(&s)).unwrap() else { panic!("four-qubit coordinates") };
        prop_assert!((c.alpha1 + 4.0 * c.alpha2 + 3.0 * c.alpha3 - 0.5).abs() < 1e-10);
        prop_assert!(c.alpha1.min(c.alpha2).min(c.alpha3) >= -1e-10);
    }
}

#[test]
fn corners_and_origin() {
    let (x, y) = twirl_coords(&ghz_state(2, 0.5f64.sqrt()).unwrap()).unwrap().xy();
    assert!((x - 0.5).abs() < 1e-12 && (y - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    let (x, y) = twirl_coords(&ghz_state(3, 0.5f64.sqrt()).unwrap()).unwrap().xy();
    assert!((x - 0.5).abs() < 1e-12 && (y - 3f64.sqrt() / 4.0).abs() < 1e-12);
    for n in [2, 3] {
        let (x, y) = twirl_coords(&DensityMatrix::maximally_mixed(n)).unwrap().xy();
        assert!(x.abs() < 1e-12 && y.abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn two_qubit_death_points_sit_on_the_separability_line() {
    let mut points = Vec::new();
    for p in [0.0, 0.1] {
        if let EsdKind::SuddenDeath(pp) = find_esd(&GhzScenario::from_alpha2(2, 0, 0.3, p, 0.0).unwrap()).kind {
            points.push((p, pp));
        }
    }
    assert_eq!(points.len(), 2);
    // Without flips the two stages compose, so the death point in `p` at
    // `p' = 0` equals the death point in `p'` at `p = 0`.
    points.push((points[0].1, 0.0));
    for (p, pp) in points {
        let s = GhzScenario::from_alpha2(2, 0, 0.3, p, pp).unwrap();
        assert!(gmc_of(&s) < 1e-8);
        let rho = evolve_pipeline(&s);
        let (x, y) = twirl_coords(&rho).unwrap().xy();
        assert!(
            (y - separability_line_2q(x)).abs() < 1e-3,
            "p = {p}, p' = {pp}: ({x}, {y})"
        );
    }
}
