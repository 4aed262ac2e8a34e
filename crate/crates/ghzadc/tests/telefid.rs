mod common;

use ghzadc::channels::{evolve_pipeline, GhzScenario};
use ghzadc::measures::{gmc_closed_form, x_state_view};
use ghzadc::qmat::{DensityMatrix, PureState, C64};
use ghzadc::telefid::{
    bell_overlaps, chsh_value, cqt_branches_3q, cqt_fidelity_3q, cqt_fidelity_4q_closed, fidelity_crossing,
    fidelity_of, fully_entangled_fraction, teleport_fidelity_2q, teleport_fidelity_2q_closed, CLASSICAL_LIMIT,
    LHV_THRESHOLD,
};
use proptest::prelude::*;

fn scen(n: usize, m: usize, a2: f64, p: f64, pp: f64) -> GhzScenario {
    GhzScenario::from_alpha2(n, m, a2, p, pp).unwrap()
}

fn qubit() -> impl Strategy<Value = PureState> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, f)| {
        PureState::new(vec![
            C64::new((t / 2.0).cos(), 0.0),
            C64::from_polar((t / 2.0).sin(), f),
        ])
        .unwrap()
    })
}

fn crossing_or_one(f: impl Fn(f64) -> f64, threshold: f64) -> f64 {
    fidelity_crossing(f, threshold).unwrap_or(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn two_qubit_closed_form_matches_state_fidelity(s in common::scenarios(2..=2)) {
        let numeric = teleport_fidelity_2q(&evolve_pipeline(&s)).unwrap().value;
        prop_assert!((numeric - teleport_fidelity_2q_closed(&s).unwrap().value).abs() < 1e-10);
    }

    #[test]
    fn two_qubit_quantities_stay_in_range(s in common::scenarios(2..=2)) {
        let rho = evolve_pipeline(&s);
        let fef = fully_entangled_fraction(&rho).unwrap();
        let best_bell = bell_overlaps(&rho).unwrap().into_iter().fold(0.0, f64::max);
        prop_assert!(fef >= best_bell - 1e-12 && fef <= 1.0 + 1e-12);
        let chsh = chsh_value(&rho).unwrap().value;
        prop_assert!(chsh <= 2.0 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn separable_states_stay_classical(a in qubit(), b in qubit(), c in qubit(), d in qubit(), w in 0.0..=1.0f64) {
        let ab = a.density().tensor(&b.density());
        let cd = c.density().tensor(&d.density());
        let mix = DensityMatrix::new(ab.matrix().scale_real(w).add(&cd.matrix().scale_real(1.0 - w))).unwrap();
        prop_assert!(fully_entangled_fraction(&mix).unwrap() <= 0.5 + 1e-9);
    }

    #[test]
    fn three_qubit_value_dominates_each_branch(s in common::scenarios(3..=3)) {
        let view = x_state_view(&evolve_pipeline(&s)).unwrap();
        let report = cqt_fidelity_3q(&view).unwrap();
        for v in cqt_branches_3q(&view) {
            prop_assert!(report.value >= v);
        }
        prop_assert!(report.value <= 1.0 + 1e-12);
    }

    #[test]
    fn four_qubit_partial_flips_coincide(a2 in 0.0..=1.0f64, p in 0.0..=1.0f64, pp in 0.0..=1.0f64) {
        let one = cqt_fidelity_4q_closed(&scen(4, 1, a2, p, pp)).unwrap().value;
        for m in 2..=3 {
            prop_assert!((cqt_fidelity_4q_closed(&scen(4, m, a2, p, pp)).unwrap().value - one).abs() < 1e-9);
        }
    }
}

#[test]
fn pure_resources_teleport_perfectly() {
    for n in 2..=4 {
        for m in 0..=n {
            let f = fidelity_of(&scen(n, m, 0.5, 0.0, 0.0)).value;
            assert!((f - 1.0).abs() < 1e-12, "n = {n}, m = {m}: {f}");
        }
    }
    let view = x_state_view(&evolve_pipeline(&scen(3, 0, 0.5, 0.0, 0.0))).unwrap();
    let expected = [1.0, 2.0 / 3.0, 5.0 / 6.0, 0.5];
    for (v, e) in cqt_branches_3q(&view).iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "{v} vs {e}");
    }
    assert_eq!(fidelity_crossing(|_| 1.0, CLASSICAL_LIMIT), None);
}

#[test]
fn three_qubit_classical_limit_crossings() {
    let cases = [
        (0, 0.0, 0.48, 0.37),
        (3, 0.0, 0.76, 0.64),
        (0, 0.1, 0.42, 0.30),
        (3, 0.1, 0.60, 0.45),
    ];
    for (m, p, fid_target, gmc_target) in cases {
        let f = fidelity_crossing(|pp| fidelity_of(&scen(3, m, 0.3, p, pp)).value, CLASSICAL_LIMIT).unwrap();
        let g = fidelity_crossing(|pp| gmc_closed_form(&scen(3, m, 0.3, p, pp)), 0.0).unwrap();
        assert!(
            (f - fid_target).abs() <= 0.01,
            "m = {m}, p = {p}: fidelity crossing {f}"
        );
        assert!((g - gmc_target).abs() <= 0.01, "m = {m}, p = {p}: GMC zero {g}");
        assert!(f > g, "a biseparable state keeps teleporting above the classical limit");
    }
}

#[test]
fn four_qubit_classical_limit_crossings() {
    let crossing = |m: usize, p: f64| {
        fidelity_crossing(
            |pp| cqt_fidelity_4q_closed(&scen(4, m, 0.3, p, pp)).unwrap().value,
            CLASSICAL_LIMIT,
        )
        .unwrap()
    };
    assert!((crossing(4, 0.0) - 0.60).abs() <= 0.01);
    assert!((crossing(4, 0.1) - 0.45).abs() <= 0.01);
    for m in 1..=3 {
        assert!((crossing(m, 0.0) - 0.37).abs() <= 0.01);
        assert!((crossing(m, 0.1) - 0.30).abs() <= 0.01);
    }
}

#[test]
fn correlation_hierarchy_on_two_qubits() {
    for a2 in [0.3, 0.5] {
        for m in 0..=2 {
            for p in [0.0, 0.1] {
                let s = |pp: f64| scen(2, m, a2, p, pp);
                let f_lhv = crossing_or_one(|pp| fidelity_of(&s(pp)).value, LHV_THRESHOLD);
                let chsh = crossing_or_one(|pp| chsh_value(&evolve_pipeline(&s(pp))).unwrap().value, 2.0);
                let f_cl = crossing_or_one(|pp| fidelity_of(&s(pp)).value, CLASSICAL_LIMIT);
                let gmc = crossing_or_one(|pp| gmc_closed_form(&s(pp)), 0.0);
                assert!(
                    f_lhv <= chsh && chsh <= f_cl && f_cl <= gmc,
                    "{a2} {m} {p}: {f_lhv} {chsh} {f_cl} {gmc}"
                );
            }
        }
    }
}
