use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use witten_index::clifford::build_irreducible_rep;
use witten_index::geometry_examples::{commuting_lemma_check, reflection};
use witten_index::instances::random_proper_instance;
use witten_index::local_index::{
    default_cutoff, hermite_kernel_oracle, local_index_eigenspace, LocalData, ModelOperator,
};
use witten_index::perturbation::{check_proper, DEFAULT_SAMPLES};
use witten_index::spectral_sim::geometric_range;

fn nonzero_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution_fixing_its_axis(b in (1usize..7).prop_flat_map(nonzero_vector)) {
        let n = b.len();
        let r = reflection(&b).unwrap();
        prop_assert!((&r * &r - DMatrix::identity(n, n)).amax() < 1e-12);
        let v = DVector::from_column_slice(&b);
        prop_assert!((&r * &v - &v).amax() < 1e-12 * (1.0 + v.amax()));
        let expect = if n % 2 == 0 { -1.0 } else { 1.0 };
        prop_assert!((r.determinant() - expect).abs() < 1e-9);
    }

    #[test]
    fn commuting_lemma_holds((b1, b2) in prop_oneof![Just(2usize), Just(4)]
        .prop_flat_map(|n| (nonzero_vector(n), nonzero_vector(n))))
    {
        let rep = build_irreducible_rep(b1.len()).unwrap();
        let r = commuting_lemma_check(&b1, &b2, &rep).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
    }

    #[test]
    fn geometric_range_is_increasing(a in 0.01f64..100.0, ratio in 1.0f64..1e3, k in 2usize..12) {
        let b = a * ratio;
        let v = geometric_range(a, b, k).unwrap();
        prop_assert_eq!(v.len(), k);
        prop_assert_eq!(v[0], a);
        prop_assert_eq!(v[k - 1], b);
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_instances_are_proper_and_oracles_agree(seed in any::<u64>(), n in 1usize..=2) {
        let p = random_proper_instance(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(check_proper(&p, DEFAULT_SAMPLES).failure().is_none());
        let data = LocalData::from_perturbation(&p);
        let e = local_index_eigenspace(&data.normalized().unwrap()).unwrap();
        let h = hermite_kernel_oracle(&ModelOperator::from_data(&data), default_cutoff(n)).unwrap();
        prop_assert_eq!(e.index, h.index);
        prop_assert!(e.index.unsigned_abs() as usize <= p.module.rank());
    }
}
