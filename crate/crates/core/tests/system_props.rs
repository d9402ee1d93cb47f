mod common;

use opacity_core::observer::{verify, Notion};
use opacity_core::system::enumerate_runs;
use opacity_core::{augment, is_total, reachable, validate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn augment_is_total_and_idempotent(sys in common::systems(5)) {
        let aug = augment(&sys).unwrap();
        prop_assert!(is_total(&aug));
        prop_assert_eq!(&augment(&aug).unwrap(), &aug);
        prop_assert!(validate(&aug.to_def()).is_empty());
        prop_assert_eq!(aug.initial().len(), sys.initial().len());
        prop_assert_eq!(aug.secret().len(), sys.secret().len());
    }

    #[test]
    fn verdicts_ignore_augmentation(sys in common::systems(4)) {
        let aug = augment(&sys).unwrap();
        for n in [Notion::InitSO, Notion::CSO, Notion::KSO(2), Notion::InfSO] {
            prop_assert_eq!(verify(&sys, n).unwrap().opaque, verify(&aug, n).unwrap().opaque);
        }
    }

    #[test]
    fn enumerated_runs_are_runs(sys in common::systems(4)) {
        let mut last_len = 0;
        for run in enumerate_runs(&sys, 3) {
            prop_assert!(run.is_valid_in(&sys));
            prop_assert!(run.inputs.len() >= last_len);
            last_len = run.inputs.len();
        }
    }

    #[test]
    fn reachable_contains_initial_and_is_closed(sys in common::systems(5)) {
        let r = reachable(&sys);
        prop_assert!(sys.initial().is_subset(&r));
        for (x, _, y) in sys.transitions() {
            prop_assert!(!r.contains(x) || r.contains(y));
        }
    }
}
