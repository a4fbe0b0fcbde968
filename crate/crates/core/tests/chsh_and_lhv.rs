use nonlocality::chsh::{
    canonical_settings, chsh_value, conditional_state_closed_form, violation_sweep,
    violation_value, Party,
};
use nonlocality::lhv::{
    chsh_of_model, dichotomic_strategies, max_deterministic_chsh, postselected_chsh, Component,
    LhvModel, LocalStrategy,
};
use nonlocality::measurement::run_protocol_exact;
use nonlocality::outcome::{Outcome, Setting};
use nonlocality::quantum_core::eig_hermitian;
use nonlocality::werner::{flip_operator, werner};
use proptest::prelude::*;

#[test]
fn closed_form_state_reaches_violation_value() {
    for d in 2..=10 {
        let v = chsh_value(
            &conditional_state_closed_form(d).unwrap(),
            &canonical_settings(d).unwrap(),
        )
        .unwrap();
        assert!((v - violation_value(d)).abs() <= 1e-9, "d={d}");
    }
}

#[test]
fn canonical_spectra() {
    for d in 2..=7 {
        let s = canonical_settings(d).unwrap();
        for party in [Party::Alice, Party::Bob] {
            for setting in Setting::ALL {
                let e = eig_hermitian(s.observable(party, setting)).unwrap();
                assert!((e.eigenvalues[0] + 1.0).abs() <= 1e-8);
                assert!((e.eigenvalues[d - 1] - 1.0).abs() <= 1e-8);
                assert!(e.eigenvalues[1..d - 1].iter().all(|x| x.abs() <= 1e-8));
            }
        }
    }
}

#[test]
fn exchange_symmetry_of_filtered_state() {
    for d in 2..=6 {
        let s = canonical_settings(d).unwrap();
        let w_prime = conditional_state_closed_form(d).unwrap();
        let v = flip_operator(d).unwrap();
        let swapped_state = w_prime.conjugate_by(v.matrix()).unwrap();
        let original = chsh_value(&w_prime, &s).unwrap();
        let exchanged = chsh_value(&swapped_state, &s.swapped()).unwrap();
        assert!((original - exchanged).abs() <= 1e-9);
    }
}

#[test]
fn sweep_closed_form_and_numeric_agree() {
    let rows = violation_sweep(2, 10).unwrap();
    assert_eq!(rows.len(), 9);
    let max_gap = rows
        .iter()
        .map(|r| (r.closed_form - r.numeric).abs())
        .fold(0.0, f64::max);
    assert!(max_gap <= 1e-9, "max discrepancy {max_gap}");
    let tsirelson = 2.0 * std::f64::consts::SQRT_2;
    let mut prev = 0.0;
    for r in &rows {
        assert!(r.closed_form > prev && r.closed_form < tsirelson);
        prev = r.closed_form;
    }
    // Approaches 2√2: the gap shrinks like 2√2·4/(2d+4).
    let wide = violation_sweep(30, 30).unwrap();
    assert!(tsirelson - wide[0].closed_form < 0.18);
}

#[test]
fn werner_alone_does_not_violate() {
    for d in 2..=10 {
        let v = chsh_value(werner(d).unwrap().rho(), &canonical_settings(d).unwrap()).unwrap();
        // Only the |S₁₂⟩ component contributes: (2/d²)·2√2.
        let expected = 2.0 / (d * d) as f64 * 2.0 * std::f64::consts::SQRT_2;
        assert!((v - expected).abs() < 1e-12);
        assert!(v <= 2.0);
    }
}

#[test]
fn central_contrast() {
    let bound = max_deterministic_chsh();
    assert_eq!(bound, 2.0);
    for d in 5..=8 {
        let s = canonical_settings(d).unwrap();
        let filtered = run_protocol_exact(d, &s)
            .unwrap()
            .branch(1, 1)
            .chsh()
            .unwrap();
        let unfiltered = chsh_value(werner(d).unwrap().rho(), &s).unwrap();
        assert!(filtered > bound);
        assert!(unfiltered <= bound);
    }
}

fn strategy() -> impl Strategy<Value = LocalStrategy> + Clone {
    (0usize..4).prop_map(|k| dichotomic_strategies()[k])
}

fn three_valued() -> impl Strategy<Value = LocalStrategy> + Clone {
    let o = prop_oneof![
        Just(Outcome::Minus),
        Just(Outcome::Zero),
        Just(Outcome::Plus)
    ];
    (o.clone(), o).prop_map(|(u, p)| LocalStrategy::new(u, p))
}

fn mixture(s: impl Strategy<Value = LocalStrategy> + Clone) -> impl Strategy<Value = LhvModel> {
    prop::collection::vec((1u32..100, s.clone(), s), 1..8).prop_map(|parts| {
        let total: u32 = parts.iter().map(|p| p.0).sum();
        let components = parts
            .into_iter()
            .map(|(w, alice, bob)| Component {
                weight: w as f64 / total as f64,
                alice,
                bob,
            })
            .collect::<Vec<_>>();
        // Renormalize the rounding residue onto the first component.
        let mut components = components;
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        components[0].weight += 1.0 - sum;
        LhvModel::new(components).unwrap()
    })
}

proptest! {
    #[test]
    fn dichotomic_mixtures_obey_bound(m in mixture(strategy())) {
        let v = chsh_of_model(&m).unwrap();
        prop_assert!((-2.0 - 1e-12..=2.0 + 1e-12).contains(&v));
        prop_assert_eq!(postselected_chsh(&m).unwrap(), v);
    }

    #[test]
    fn postselection_invariant_under_refinement(m in mixture(three_valued()), k in 0usize..8) {
        let k = k % m.components().len();
        match postselected_chsh(&m) {
            Ok(v) => {
                let refined = postselected_chsh(&m.refine(k)).unwrap();
                prop_assert!((v - refined).abs() <= 1e-12);
            }
            Err(_) => prop_assert!(postselected_chsh(&m.refine(k)).is_err()),
        }
    }

    #[test]
    fn postselected_chsh_never_exceeds_four(m in mixture(three_valued())) {
        if let Ok(v) = postselected_chsh(&m) {
            prop_assert!(v.abs() <= 4.0 + 1e-12);
        }
    }
}
