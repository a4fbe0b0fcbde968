use nonlocality::chsh::{canonical_settings, chsh_value, violation_value, Party};
use nonlocality::measurement::{
    filter_measurement, filter_projectors, measure, protocol_statistics, run_protocol_exact,
    sample_protocol, EmpiricalStatistics, FIRST_STAGE_ORDER,
};
use nonlocality::outcome::{setting_pairs, Outcome, Setting};
use nonlocality::quantum_core::{expectation, Complex, ComplexMatrix, DensityMatrix};
use nonlocality::werner::werner;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density(seed: u64, n: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let g = ComplexMatrix::new(n, n, data).unwrap();
    let m = g.matmul(&g.dagger()).unwrap();
    let tr = m.trace().unwrap().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
}

/// Σ_{i,j ∈ {1,2}} ⟨ij|W|ij⟩, read straight off the Werner matrix.
fn filter_probability_by_direct_trace(d: usize) -> f64 {
    let w = werner(d).unwrap();
    let mut n = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let k = i * d + j;
            n += w.rho().matrix().get(k, k).re;
        }
    }
    n
}

#[test]
fn filter_branch_probability_d5() {
    let oracle = filter_probability_by_direct_trace(5);
    assert!((oracle - 14.0 / 125.0).abs() < 1e-15);
    let branches = measure(werner(5).unwrap().rho(), &filter_measurement(5).unwrap()).unwrap();
    assert_eq!(branches[3].label, "11");
    assert!((branches[3].probability - oracle).abs() < 1e-12);
    assert!((branches[3].probability - 0.112).abs() < 1e-12);
    for d in 2..=10 {
        let df = d as f64;
        let closed = (2.0 * df + 4.0) / df.powi(3);
        assert!((filter_probability_by_direct_trace(d) - closed).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn branch_probabilities_sum_to_one(seed in any::<u64>(), d in 2usize..=6) {
        let rho = random_density(seed, d * d);
        let branches = measure(&rho, &filter_measurement(d).unwrap()).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for b in &branches {
            if b.probability >= 1e-6 {
                let diag = b.post_state.as_ref().unwrap().diagnostics().unwrap();
                prop_assert!(diag.passes(), "{:?}", diag);
            }
        }
    }

    #[test]
    fn filtering_preserves_total_correlators(seed in any::<u64>(), d in 2usize..=4) {
        // A, A′, B, B′ commute with P and Q, so averaging the branch
        // correlators reproduces the unfiltered expectation.
        let rho = random_density(seed, d * d);
        let s = canonical_settings(d).unwrap();
        let stats = protocol_statistics(&rho, &filter_projectors(d).unwrap(), &s).unwrap();
        for (a, b) in setting_pairs() {
            let direct = expectation(
                &rho,
                &s.observable(Party::Alice, a).kron(s.observable(Party::Bob, b)).unwrap(),
            )
            .unwrap();
            prop_assert!((stats.total_correlator(a, b) - direct).abs() <= 1e-9);
        }
    }
}

#[test]
fn werner_total_correlators_match_direct_measurement() {
    for d in 2..=6 {
        let s = canonical_settings(d).unwrap();
        let stats = run_protocol_exact(d, &s).unwrap();
        let w = werner(d).unwrap();
        for (a, b) in setting_pairs() {
            let direct = expectation(
                w.rho(),
                &s.observable(Party::Alice, a)
                    .kron(s.observable(Party::Bob, b))
                    .unwrap(),
            )
            .unwrap();
            assert!((stats.total_correlator(a, b) - direct).abs() <= 1e-9);
        }
        // Summed CHSH over branches equals the single-measurement CHSH of W.
        let total: f64 = setting_pairs()
            .iter()
            .map(|&(a, b)| nonlocality::outcome::chsh_sign(a, b) * stats.total_correlator(a, b))
            .sum();
        assert!((total - chsh_value(w.rho(), &s).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn exact_protocol_branch_structure_d5() {
    let stats = run_protocol_exact(5, &canonical_settings(5).unwrap()).unwrap();
    let order: Vec<(u8, u8)> = stats
        .branches
        .iter()
        .map(|b| (b.p_outcome, b.q_outcome))
        .collect();
    assert_eq!(order, FIRST_STAGE_ORDER.to_vec());

    let b11 = stats.branch(1, 1);
    assert!((b11.chsh().unwrap() - violation_value(5)).abs() < 1e-12);
    assert!((b11.chsh().unwrap() - 2.0203051).abs() < 5e-8);
    for (a, b) in setting_pairs() {
        let dist = b11.distribution(a, b).unwrap();
        let zero_mass: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| i == Outcome::Zero.index() || j == Outcome::Zero.index())
            .map(|(i, j)| dist[i][j])
            .sum();
        assert!(zero_mass <= 1e-12);
    }

    let b00 = stats.branch(0, 0);
    for (a, b) in setting_pairs() {
        let dist = b00.distribution(a, b).unwrap();
        assert!((dist[Outcome::Zero.index()][Outcome::Zero.index()] - 1.0).abs() <= 1e-12);
    }
    let p_sum: f64 = stats.branches.iter().map(|b| b.probability).sum();
    assert!((p_sum - 1.0).abs() < 1e-12);
}

#[test]
fn commitment_property_across_dimensions() {
    for d in 3..=6 {
        let stats = run_protocol_exact(d, &canonical_settings(d).unwrap()).unwrap();
        for br in &stats.branches {
            for s in Setting::ALL {
                let a0 = br.alice_marginal(s, Outcome::Zero).unwrap();
                let b0 = br.bob_marginal(s, Outcome::Zero).unwrap();
                if br.p_outcome == 1 {
                    assert!(a0 <= 1e-12);
                } else {
                    assert!(a0 >= 1.0 - 1e-12);
                }
                if br.q_outcome == 1 {
                    assert!(b0 <= 1e-12);
                } else {
                    assert!(b0 >= 1.0 - 1e-12);
                }
            }
        }
    }
}

#[test]
fn d2_protocol_has_only_the_trivial_branch() {
    let stats = run_protocol_exact(2, &canonical_settings(2).unwrap()).unwrap();
    for br in &stats.branches {
        if (br.p_outcome, br.q_outcome) == (1, 1) {
            assert!((br.probability - 1.0).abs() < 1e-15);
            assert!((br.chsh().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
        } else {
            assert_eq!(br.probability, 0.0);
            assert!(br.joint.is_none());
        }
    }
}

#[test]
fn sampled_d4_chsh_stays_below_two() {
    let d = 4;
    let trials = 400_000;
    let s = canonical_settings(d).unwrap();
    let records = sample_protocol(99, d, &s, trials).unwrap();
    let emp = EmpiricalStatistics::from_records(&records);
    let chsh = emp.chsh(1, 1).unwrap();
    let exact = violation_value(d);
    assert!((exact - 1.8856181).abs() < 5e-8);
    let z = (chsh.value - exact) / chsh.std_error;
    assert!(z.abs() <= 4.0, "value {} exact {exact} z {z}", chsh.value);
    assert!(chsh.value < 2.0);

    let stats = run_protocol_exact(d, &s).unwrap();
    for (p, q) in FIRST_STAGE_ORDER {
        let prob = stats.branch(p, q).probability;
        let se = (prob * (1.0 - prob) / trials as f64).sqrt();
        let z = (emp.branch_frequency(p, q) - prob) / se;
        assert!(z.abs() <= 4.0, "branch ({p},{q}) z {z}");
    }
}

#[test]
fn parallel_sampling_matches_single_threaded_pool() {
    let s = canonical_settings(5).unwrap();
    let parallel = sample_protocol(5, 5, &s, 50_000).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial = pool.install(|| sample_protocol(5, 5, &s, 50_000).unwrap());
    assert_eq!(parallel, serial);
}
