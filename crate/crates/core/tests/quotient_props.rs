mod common;

use opacity_core::observer::{verify, Notion};
use opacity_core::oracle::{all_labelings, random_partition};
use opacity_core::quotient::{
    build_quotient, check_eq1_condition, check_infsop_self, coarsest_infsop_partition,
    is_secret_compatible, quotient_relation, validate_partition,
};
use opacity_core::relations::{
    check_bisimulation, check_infsop_bisimulation, check_initsop_bisimulation, check_simulation,
};
use opacity_core::Partition;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quotient_theorems(sys in common::systems(5), seed in any::<u64>()) {
        let p = random_partition(seed, sys);
        let (q, rel) = quotient_relation(&p).unwrap();
        prop_assert!(q.num_states() <= p.system().num_states());
        prop_assert!(check_simulation(&rel).holds());
        prop_assert_eq!(
            check_eq1_condition(&p).unwrap().holds(),
            check_initsop_bisimulation(&rel).holds()
        );
        prop_assert_eq!(
            check_infsop_self(&p).unwrap().holds(),
            check_infsop_bisimulation(&rel).holds()
        );
    }

    #[test]
    fn quotient_relation_is_a_simulation_for_any_valid_partition(
        sys in common::systems(5),
        labels in prop::collection::vec(0..5usize, 5),
    ) {
        // ignore secrecy, keep only output homogeneity
        let n = sys.num_states();
        let keyed: Vec<usize> = (0..n).map(|s| labels[s] * 8 + sys.output_of(s)).collect();
        let p = Partition::from_labels(sys, &keyed);
        prop_assert!(validate_partition(&p).is_empty());
        let (_, rel) = quotient_relation(&p).unwrap();
        prop_assert!(check_simulation(&rel).holds());
    }

    #[test]
    fn coarsest_partition_is_valid_and_sound(sys in common::systems(5)) {
        let p = coarsest_infsop_partition(sys.clone());
        prop_assert!(validate_partition(&p).is_empty());
        prop_assert!(is_secret_compatible(&p));
        prop_assert!(check_infsop_self(&p).unwrap().holds());
        // within secrecy-homogeneous partitions the InfSOP check is plain stability
        prop_assert!(check_bisimulation(&p.self_relation()).holds());
        let q = build_quotient(&p).unwrap();
        for n in [Notion::InitSO, Notion::CSO, Notion::KSO(1), Notion::KSO(3), Notion::InfSO] {
            prop_assert_eq!(verify(&sys, n).unwrap().opaque, verify(&q, n).unwrap().opaque, "{}", n);
        }
    }

    #[test]
    fn coarsest_partition_is_coarsest(sys in common::systems(5)) {
        let best = coarsest_infsop_partition(sys.clone()).len();
        for labels in all_labelings(sys.num_states()) {
            let p = Partition::from_labels(sys.clone(), &labels);
            if p.len() >= best || !validate_partition(&p).is_empty() || !is_secret_compatible(&p) {
                continue;
            }
            prop_assert!(!check_infsop_self(&p).unwrap().holds(), "coarser partition {}", p);
        }
    }
}
