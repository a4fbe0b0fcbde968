use nonlocality::quantum_core::{
    eig_hermitian, kron, Complex, ComplexMatrix, Observable, SPECTRAL_TOL_PER_DIM,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    g.add(&g.dagger()).unwrap().scale_real(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs_random_hermitian(seed in any::<u64>(), n in 2usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, n);
        let e = eig_hermitian(&Observable::new(m.clone()).unwrap()).unwrap();

        let residual = e.reconstruct().frobenius_distance(&m).unwrap();
        prop_assert!(residual <= SPECTRAL_TOL_PER_DIM * n as f64, "residual {residual}");

        for w in e.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (i, a) in e.eigenvectors.iter().enumerate() {
            for (j, b) in e.eigenvectors.iter().enumerate() {
                let g = a.inner(b).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - Complex::new(target, 0.0)).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn eig_trace_matches_eigenvalue_sum(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, n);
        let e = eig_hermitian(&Observable::new(m.clone()).unwrap()).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        prop_assert!((sum - m.trace().unwrap().re).abs() < 1e-10);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>(), dims in prop::collection::vec(2usize..=3, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, dims[0], dims[0]);
        let b = random_matrix(&mut rng, dims[1], dims[1]);
        let c = random_matrix(&mut rng, dims[2], dims[2]);
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert!(left.frobenius_distance(&right).unwrap() <= 1e-12);
    }

    #[test]
    fn kron_trace_factorizes(seed in any::<u64>(), n in 2usize..=4, m in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, m, m);
        let lhs = kron(&a, &b).unwrap().trace().unwrap();
        let rhs = a.trace().unwrap() * b.trace().unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=3, m in 1usize..=3, l in 1usize..=3) {
        // A: n×k, C: k×n, B: m×l, D: l×m
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, k);
        let c = random_matrix(&mut rng, k, n);
        let b = random_matrix(&mut rng, m, l);
        let d = random_matrix(&mut rng, l, m);
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        prop_assert!(lhs.frobenius_distance(&rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn dagger_is_an_involution(seed in any::<u64>(), r in 1usize..=5, c in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, r, c);
        prop_assert_eq!(m.dagger().dagger(), m);
    }
}

#[test]
fn degenerate_spectrum_is_resolved() {
    // Werner-like degeneracy: identity plus a rank-one perturbation in 16 dims.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<Complex> = (0..16)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex> = v.iter().map(|z| z / norm).collect();
    let mut m = ComplexMatrix::identity(16);
    m.add_outer_assign(&v, 3.0).unwrap();
    let e = eig_hermitian(&Observable::new(m.clone()).unwrap()).unwrap();
    assert!(e.eigenvalues[..15].iter().all(|x| (x - 1.0).abs() < 1e-12));
    assert!((e.eigenvalues[15] - 4.0).abs() < 1e-12);
    assert!(e.reconstruct().frobenius_distance(&m).unwrap() < 1e-12);
}
