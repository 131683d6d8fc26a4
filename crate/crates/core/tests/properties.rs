use gme::downconv::{self, DownConversionParams};
use gme::local_ops::{random_hermitian, random_rank_one_ops};
use gme::states::{haar_vector, random_biseparable_with};
use gme::{
    ComplexMatrix, Condition, DensityMatrix, HilbertDims, LocalOperator, PureState, Witness,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn condition_and_dims(ix: usize, qutrit_site: Option<usize>) -> (Condition, HilbertDims) {
    let (cond, n) = [
        (Condition::TriDagger, 3),
        (Condition::TriProduct, 3),
        (Condition::QuadDagger, 4),
    ][ix % 3];
    let mut d = vec![2; n];
    if let Some(k) = qutrit_site {
        d[k % n] = 3;
    }
    (cond, HilbertDims::new(d).unwrap())
}

fn random_mixed(dims: &HilbertDims, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let comps: Vec<(f64, PureState)> = (0..rng.random_range(1..5))
        .map(|_| {
            (
                rng.random_range(0.1..1.0),
                PureState::new(dims.clone(), haar_vector(dims.total(), rng)).unwrap(),
            )
        })
        .collect();
    DensityMatrix::mixture(&comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn biseparable_states_never_violate(seed in any::<u64>(), ix in 0usize..3, qutrit in proptest::option::of(0usize..4), size in 1usize..6) {
        let (cond, dims) = condition_and_dims(ix, qutrit);
        let w = Witness::new(cond);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_biseparable_with(&dims, &w.sound_against(dims.parties()), size, &mut rng).unwrap();
        let ops = random_rank_one_ops(&dims, &mut rng);
        let r = w.evaluate(&rho, &ops).unwrap();
        prop_assert!(!r.violated, "margin {}", r.margin);
        prop_assert!(!r.violated_sum_form());
    }

    #[test]
    fn single_bipartition_states_respect_bipartite_conditions(seed in any::<u64>(), block in 1usize..7, two in any::<bool>()) {
        let dims = HilbertDims::uniform(3, 2).unwrap();
        let l: Vec<usize> = (0..3).filter(|k| block >> k & 1 == 1).collect();
        let w = Witness::new(if two { Condition::Bi2 } else { Condition::Bi1 }).with_l_sites(l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_biseparable_with(&dims, &w.sound_against(3), 3, &mut rng).unwrap();
        let ops = random_rank_one_ops(&dims, &mut rng);
        prop_assert!(!w.evaluate(&rho, &ops).unwrap().violated);
    }

    #[test]
    fn hermitian_operators_never_violate(seed in any::<u64>(), ix in 0usize..3, qutrit in proptest::option::of(0usize..4)) {
        let (cond, dims) = condition_and_dims(ix, qutrit);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_mixed(&dims, &mut rng);
        let ops: Vec<LocalOperator> = dims.as_slice().iter().map(|&d| random_hermitian(d, &mut rng)).collect();
        let r = Witness::new(cond).evaluate(&rho, &ops).unwrap();
        prop_assert!(!r.violated, "margin {}", r.margin);
    }

    #[test]
    fn scaling_operators_scales_the_report(seed in any::<u64>(), ix in 0usize..3, mags in proptest::collection::vec(0.1f64..10.0, 4), phases in proptest::collection::vec(0.0f64..6.3, 4)) {
        let (cond, dims) = condition_and_dims(ix, None);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = PureState::new(dims.clone(), haar_vector(dims.total(), &mut rng)).unwrap();
        let ops = random_rank_one_ops(&dims, &mut rng);
        let scaled: Vec<LocalOperator> = ops.iter().enumerate().map(|(k, o)| o.scale(Complex64::from_polar(mags[k], phases[k]))).collect();
        let factor: f64 = mags[..dims.parties()].iter().product();
        let w = Witness::new(cond).with_tolerance(0.0).unwrap();
        let a = w.evaluate(&psi, &ops).unwrap();
        let b = w.evaluate(&psi, &scaled).unwrap();
        prop_assert!((b.lhs - factor * a.lhs).abs() <= 1e-12 * factor.max(1.0));
        for (x, y) in a.rhs_terms.iter().zip(&b.rhs_terms) {
            prop_assert_eq!(&x.label, &y.label);
            prop_assert!((y.value - factor * x.value).abs() <= 1e-12 * factor.max(1.0));
        }
        if a.margin.abs() > 1e-9 {
            prop_assert_eq!(a.violated, b.violated);
        }
    }

}

proptest! {
    // each case diagonalises the 125-dimensional Hamiltonian
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sector_evolution_matches_full_space(t in 0.0f64..10.0, g in 0.1f64..2.0, w1 in -1.0f64..1.0, w2 in -1.0f64..1.0, w3 in -1.0f64..1.0) {
        let p = DownConversionParams::new(4, w1, w2, w3, g).unwrap();
        let sub = downconv::evolve(&p, t).unwrap().to_full_state();
        let full: &ComplexMatrix = &downconv::full_hamiltonian(&p);
        let start = PureState::basis(p.full_dims(), &[4, 0, 0]).unwrap();
        let v = gme::tensor::hermitian_evolve(full, t, start.amplitudes()).unwrap();
        let diff = sub.amplitudes().iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-8, "diff {diff:e}");
    }
}
