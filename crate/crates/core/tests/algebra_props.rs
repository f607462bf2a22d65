mod common;

use common::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use qudit_krylov::{Boundary, Mode, OperatorVector, Site, WeylString};
use rand::rngs::StdRng;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn algebra_invariants(seed in any::<u64>(), d in prop::sample::select(vec![2u8, 3, 4, 5])) {
        let mut rng = StdRng::seed_from_u64(seed);
        if let Err(msg) = check_algebra_instance(&mut rng, d) {
            prop_assert!(false, "{}", msg);
        }
    }

    #[test]
    fn text_form_round_trips(seed in any::<u64>(), d in 2u8..=7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_string(&mut rng, d, 4);
        let back: WeylString = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    /// Per-site inner products of translation sums on a ring equal the
    /// anchored inner product in translation-invariant mode.
    #[test]
    fn translation_invariant_inner_matches_ring(seed in any::<u64>(), d in 2u8..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let ti = Mode::thermodynamic(1);
        let a = random_vector(&mut rng, d, 3, ti, 4);
        let b = random_vector(&mut rng, d, 3, ti, 4);
        let len = 12u16;
        let ring = Mode::Finite(Boundary::Ring { len });
        let sum = |v: &OperatorVector| {
            let terms: Vec<(WeylString, C)> = (0..len as i16)
                .flat_map(|i| v.iter().map(move |(s, c)| (s.translated(Site::new(i)), c)))
                .collect();
            OperatorVector::from_terms(d, ring, terms).unwrap()
        };
        let per_site = sum(&a).inner(&sum(&b)).unwrap() / len as f64;
        let direct = a.inner(&b).unwrap();
        prop_assert!((per_site - direct).norm() < 1e-10);
    }
}
