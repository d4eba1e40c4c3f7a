//! Randomized invariants across modules. Random objects are drawn from a
//! seeded ChaCha generator so every failing case is reproducible from the
//! seed proptest reports.

use num_complex::Complex64;
use proptest::prelude::*;
use qproc_core::bipartite::BipartiteState;
use qproc_core::linalg::{
    self, density_to_bloch, expm_hermitian_generator, hermitian_eig, kron, max_abs_diff,
    partial_trace, trace, BlochVector, CMatrix, DensityMatrix, Subsystem,
};
use qproc_core::maps::{
    self, apply, classify_positivity, compose, kraus_decompose, map_from_contraction, reshuffle,
    PositivityTag, SuperOp,
};
use qproc_core::mmap::{build_mmap, contract_with_preparation, memory_matrix};
use qproc_core::models::{heisenberg_unitary, standard_inputs, standard_stochastic_preps};
use qproc_core::prep::{stochastic_input_set, PreparationMap};
use qproc_core::random::{self, seeded};
use qproc_core::tomo::{dual_set, interpolation_residual, reconstruct_linear_map, simulate_process};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    (0.0..=1.0f64, -1.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, z, phi)| {
        let rho = (1.0 - z * z).sqrt();
        [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bloch_round_trip(a in bloch()) {
        let v = BlochVector::try_from(a).unwrap();
        let back = density_to_bloch(&linalg::bloch_to_density(&v)).unwrap().components();
        for j in 0..3 {
            prop_assert!((back[j] - a[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), ds in 2usize..=4, de in 2usize..=4) {
        let mut rng = seeded(seed);
        let rho = random::random_density(ds, &mut rng);
        let tau = random::random_density(de, &mut rng);
        let joint = BipartiteState::product(&rho, &tau);
        prop_assert!(max_abs_diff(partial_trace(&joint, Subsystem::Environment).matrix(), rho.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(partial_trace(&joint, Subsystem::System).matrix(), tau.matrix()) < 1e-12);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random::ginibre(2, 2, &mut rng);
        let b = random::ginibre(3, 2, &mut rng);
        let c = random::ginibre(2, 3, &mut rng);
        prop_assert!(max_abs_diff(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c))) < 1e-12);
    }

    #[test]
    fn eigen_sum_and_exponential(seed in any::<u64>(), d in 2usize..=5, t in -3.0..3.0f64) {
        let mut rng = seeded(seed);
        let h = random::random_hermitian(d, &mut rng);
        let e = hermitian_eig(&h).unwrap();
        prop_assert!((e.eigenvalues.iter().sum::<f64>() - trace(&h).re).abs() < 1e-9);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let u = expm_hermitian_generator(&h, t).unwrap();
        let back = expm_hermitian_generator(&h, -t).unwrap();
        prop_assert!(max_abs_diff(&u.adjoint().matrix().clone(), back.matrix()) < 1e-9);
    }

    #[test]
    fn reshuffle_is_an_involution(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = seeded(seed);
        let s = SuperOp::new(d, maps::Form::AForm, random::ginibre(d * d, d * d, &mut rng)).unwrap();
        let twice = reshuffle(&reshuffle(&s));
        prop_assert_eq!(twice.matrix(), s.matrix());
    }

    #[test]
    fn contraction_maps_are_cp_and_trace_preserving(seed in any::<u64>(), d in 2usize..=3, de in 1usize..=3) {
        let mut rng = seeded(seed);
        let u = random::haar_unitary(d * de, &mut rng);
        let rho_e = random::random_density(de, &mut rng);
        let s = map_from_contraction(&u, &rho_e).unwrap();
        prop_assert!(s.hermiticity_residual() < 1e-9);
        prop_assert!(s.trace_preservation_residual() < 1e-9);
        prop_assert!(s.min_eigenvalue() >= -1e-10);
        prop_assert_eq!(classify_positivity(&s, 64).tag, PositivityTag::CompletelyPositive);

        let k = kraus_decompose(&s).unwrap();
        prop_assert!(max_abs_diff(&k.to_superop().b_matrix(), &s.b_matrix()) < 1e-10);
        prop_assert!(k.completeness_residual() < 1e-9);

        // A unitary afterwards keeps the map CP.
        let v = SuperOp::from_unitary(&random::haar_unitary(d, &mut rng));
        prop_assert_eq!(classify_positivity(&compose(&v, &s).unwrap(), 64).tag, PositivityTag::CompletelyPositive);
    }

    #[test]
    fn composition_applies_in_sequence(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let s1 = map_from_contraction(&random::haar_unitary(4, &mut rng), &random::random_density(2, &mut rng)).unwrap();
        let s2 = map_from_contraction(&random::haar_unitary(6, &mut rng), &random::random_density(3, &mut rng)).unwrap();
        let rho = random::random_density(2, &mut rng);
        let mid = DensityMatrix::new(apply(&s1, &rho).unwrap()).unwrap();
        let both = apply(&compose(&s2, &s1).unwrap(), &rho).unwrap();
        prop_assert!(max_abs_diff(&both, &apply(&s2, &mid).unwrap()) < 1e-10);
    }

    #[test]
    fn trace_preserved_even_outside_compatibility(x in 0.0..6.3f64, c23 in 0.0..1.0f64, a in bloch()) {
        let rho = BipartiteState::correlated_family([0.0; 3], c23).unwrap();
        let map = maps::dynamical_map(&heisenberg_unitary(x), &rho).unwrap();
        let out = apply(&map, &linalg::bloch_to_density(&BlochVector::try_from(a).unwrap())).unwrap();
        prop_assert!((trace(&out) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        prop_assert!(linalg::hermiticity_residual(&out) < 1e-9);
    }

    #[test]
    fn dynamical_negativity_region(x in 0.0..6.3f64, c23 in 0.0..1.0f64) {
        let rho = BipartiteState::correlated_family([0.0; 3], c23).unwrap();
        let min = maps::dynamical_map(&heisenberg_unitary(x), &rho).unwrap().min_eigenvalue();
        let (s, c) = x.sin_cos();
        let margin = 0.5 * (s * s - (c23 * c * s).abs());
        if margin > 1e-9 {
            prop_assert!(min > 0.0);
        }
        if margin < -1e-9 {
            prop_assert!((min - margin).abs() < 1e-10);
        }
    }

    #[test]
    fn mmap_invariants_and_bridge(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let u = random::haar_unitary(4, &mut rng);
        let rho = random::random_bipartite(2, 2, &mut rng);
        let m = build_mmap(&u, &rho).unwrap();
        prop_assert!(m.hermiticity_residual() < 1e-9);
        prop_assert!((m.trace() - 2.0).abs() < 1e-9);
        prop_assert!(m.min_eigenvalue() >= -1e-10);

        let target = random::haar_pure_state(2, &mut rng);
        let v = random::haar_unitary(2, &mut rng);
        let proj = PreparationMap::projective(random::haar_pure_state(2, &mut rng)).unwrap();
        let preps = [
            PreparationMap::identity(2),
            PreparationMap::pin(target.clone()),
            PreparationMap::rotation(v.clone()),
            proj.clone(),
            PreparationMap::stochastic(target, v.clone()).unwrap(),
            PreparationMap::composite(vec![PreparationMap::rotation(v), proj]).unwrap(),
        ];
        let rec = simulate_process(&u, &rho, &preps).unwrap();
        for (p, row) in preps.iter().zip(rec.rows()) {
            let (q, r) = contract_with_preparation(&m, p).unwrap();
            prop_assert!(max_abs_diff(q.matrix(), row.output.as_ref().unwrap()) < 1e-10);
            prop_assert!((r - row.probability).abs() < 1e-10);
        }
    }

    #[test]
    fn memory_zero_iff_product(seed in any::<u64>(), correlated in any::<bool>()) {
        let mut rng = seeded(seed);
        let u = random::haar_unitary(4, &mut rng);
        let rho = if correlated {
            random::random_bipartite(2, 2, &mut rng)
        } else {
            BipartiteState::product(&random::random_density(2, &mut rng), &random::random_density(2, &mut rng))
        };
        let report = memory_matrix(&build_mmap(&u, &rho).unwrap());
        let product = rho.is_product(1e-12);
        prop_assert_eq!(report.norm <= 1e-12, product);
        prop_assert!(trace(&report.chi_s_t).norm() < 1e-10);
    }

    #[test]
    fn duals_are_biorthogonal(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = seeded(seed);
        let inputs: Vec<DensityMatrix> = (0..d * d).map(|_| random::random_density(d, &mut rng)).collect();
        let refs: Vec<&CMatrix> = inputs.iter().map(|p| p.matrix()).collect();
        let duals = dual_set(&refs).unwrap();
        prop_assert!(duals.biorthogonality_residual(&refs) < 1e-8);
    }

    #[test]
    fn reconstruction_interpolates(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let u = random::haar_unitary(4, &mut rng);
        let rho = random::random_bipartite(2, 2, &mut rng);
        let rec = simulate_process(&u, &rho, &standard_stochastic_preps()).unwrap();
        let map = reconstruct_linear_map(&rec).unwrap();
        prop_assert!(interpolation_residual(&map, &rec).unwrap() < 1e-10);
        prop_assert!(map.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn pin_leaves_one_environment(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random::random_bipartite(2, 3, &mut rng);
        let zero = DensityMatrix::basis_state(2, 0);
        let rotations: Vec<_> = standard_inputs()
            .iter()
            .map(|t| qproc_core::prep::rotation_to_state(&zero, t).unwrap())
            .collect();
        let set = stochastic_input_set(&zero, &rotations, &rho).unwrap();
        let env = set[0].total.reduced_environment();
        for p in &set {
            prop_assert!(max_abs_diff(p.total.reduced_environment().matrix(), env.matrix()) <= 1e-12);
        }
    }
}
