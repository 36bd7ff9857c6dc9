mod support;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn store_matches_persistent_model(seed: u64, len in 1usize..40) {
        let ops = support::store_model::random_ops(&mut StdRng::seed_from_u64(seed), len);
        if let Err(e) = support::store_model::check(&ops) {
            prop_assert!(false, "{e}");
        }
    }
}
