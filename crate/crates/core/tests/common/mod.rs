#![allow(dead_code)]

use std::sync::Arc;

use opacity_core::oracle::{random_system, RandomSpec};
use opacity_core::TransitionSystem;
use proptest::prelude::*;

/// Random systems with at most `max_states` states, two inputs, three outputs.
pub fn systems(max_states: usize) -> impl Strategy<Value = Arc<TransitionSystem>> {
    (
        any::<u64>(),
        1..=max_states,
        1..=2usize,
        1..=3usize,
        0.15..0.7f64,
        0.1..0.7f64,
    )
        .prop_map(
            |(seed, states, inputs, outputs, density, secret_fraction)| {
                Arc::new(random_system(
                    seed,
                    RandomSpec {
                        states,
                        inputs,
                        outputs,
                        density,
                        secret_fraction,
                    },
                ))
            },
        )
}
