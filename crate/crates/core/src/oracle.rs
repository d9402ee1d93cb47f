//! Definition-level checks and random systems for cross-validating the observer.
//!
//! Nothing here shares code with [`crate::observer`]: the bounded checker
//! enumerates concrete runs and applies the opacity definitions verbatim, and
//! the belief fixpoints are written with plain `BTreeSet`s over state names.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::observer::{self, Notion, ObserverError, Verdict};
use crate::quotient::Partition;
use crate::system::{augment, runs_over, Run, SystemDef, SystemError, TransitionSystem};

/// Runs examined by one bounded check before giving up.
pub const DEFAULT_RUN_BUDGET: usize = 5_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("run budget of {0} exceeded")]
    Budget(usize),
    #[error(transparent)]
    Augment(#[from] SystemError),
}

/// A run that reveals a secret: no run over the same inputs with the same
/// outputs avoids `S` at `position`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedWitness {
    pub run: Run,
    pub position: usize,
}

#[derive(Clone, Debug)]
pub struct BoundedResult {
    pub notion: Notion,
    pub bound: usize,
    pub witness: Option<BoundedWitness>,
    /// The augmented system the witness refers to.
    pub system: Arc<TransitionSystem>,
}

impl BoundedResult {
    pub fn violation_found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Positions of a length-`n` input word that the notion protects.
fn positions(notion: Notion, n: usize) -> std::ops::RangeInclusive<usize> {
    match notion {
        Notion::InitSO => 0..=0,
        Notion::CSO => n..=n,
        Notion::KSO(k) => n.saturating_sub(k)..=n,
        Notion::InfSO => 0..=n,
    }
}

/// Searches every input word of length at most `bound` for a run that the
/// notion's definition says must be masked but is not.
///
/// A violation proves the system is not opaque; finding none proves nothing
/// about longer words.
pub fn bounded_check(
    sys: &TransitionSystem,
    notion: Notion,
    bound: usize,
) -> Result<BoundedResult, OracleError> {
    Ok(
        bounded_check_many(sys, &[notion], bound, DEFAULT_RUN_BUDGET)?
            .pop()
            .expect("one result per notion"),
    )
}

/// [`bounded_check`] for several notions sharing one run enumeration.
pub fn bounded_check_many(
    sys: &TransitionSystem,
    notions: &[Notion],
    bound: usize,
    budget: usize,
) -> Result<Vec<BoundedResult>, OracleError> {
    let aug = Arc::new(augment(sys)?);
    let mut found: Vec<Option<BoundedWitness>> = vec![None; notions.len()];
    let mut spent = 0usize;
    let seed: Vec<Vec<usize>> = aug.initial().iter().map(|s| vec![s]).collect();
    let mut stack = vec![(Vec::<usize>::new(), seed)];
    while let Some((word, runs)) = stack.pop() {
        spent += runs.len();
        if spent > budget {
            return Err(OracleError::Budget(budget));
        }
        inspect(&aug, notions, &word, &runs, &mut found);
        if found.iter().all(Option::is_some) || word.len() == bound {
            continue;
        }
        // reversed so that words are visited in lexicographic order
        for u in (0..aug.num_inputs()).rev() {
            let next: Vec<Vec<usize>> = runs
                .iter()
                .flat_map(|r| {
                    aug.successors(*r.last().unwrap(), u).iter().map(move |&t| {
                        let mut r2 = r.clone();
                        r2.push(t);
                        r2
                    })
                })
                .collect();
            let mut w = word.clone();
            w.push(u);
            stack.push((w, next));
        }
    }
    Ok(notions
        .iter()
        .zip(found)
        .map(|(&notion, witness)| BoundedResult {
            notion,
            bound,
            witness,
            system: aug.clone(),
        })
        .collect())
}

/// Groups the runs over `word` by output sequence and records, per notion,
/// the first position where every run of a group is secret.
fn inspect(
    sys: &TransitionSystem,
    notions: &[Notion],
    word: &[usize],
    runs: &[Vec<usize>],
    found: &mut [Option<BoundedWitness>],
) {
    let n = word.len();
    // output sequence -> (first run, all-secret flag per position)
    let mut groups: BTreeMap<Vec<usize>, (usize, Vec<bool>)> = BTreeMap::new();
    for (idx, run) in runs.iter().enumerate() {
        let outs: Vec<usize> = run.iter().map(|&s| sys.output_of(s)).collect();
        let entry = groups
            .entry(outs)
            .or_insert_with(|| (idx, vec![true; n + 1]));
        for (i, &s) in run.iter().enumerate() {
            if !sys.is_secret(s) {
                entry.1[i] = false;
            }
        }
    }
    for (slot, &notion) in found.iter_mut().zip(notions) {
        if slot.is_some() {
            continue;
        }
        'groups: for (first, all_secret) in groups.values() {
            for i in positions(notion, n) {
                if all_secret[i] {
                    *slot = Some(BoundedWitness {
                        run: Run {
                            inputs: word.to_vec(),
                            states: runs[*first].clone(),
                        },
                        position: i,
                    });
                    break 'groups;
                }
            }
        }
    }
}

/// Re-derives a bounded witness by enumerating all runs over its input word.
pub fn verify_bounded_witness(result: &BoundedResult) -> bool {
    let Some(w) = &result.witness else {
        return true;
    };
    let sys = &*result.system;
    let n = w.run.inputs.len();
    if n > result.bound
        || !w.run.is_valid_in(sys)
        || !positions(result.notion, n).contains(&w.position)
        || !sys.is_secret(w.run.states[w.position])
    {
        return false;
    }
    let outs = w.run.outputs(sys);
    runs_over(sys, &w.run.inputs)
        .iter()
        .filter(|r| r.outputs(sys) == outs)
        .all(|r| sys.is_secret(r.states[w.position]))
}

type Belief = BTreeSet<String>;

struct NamedSystem {
    outputs: BTreeMap<String, String>,
    initial: BTreeSet<String>,
    secret: BTreeSet<String>,
    inputs: Vec<String>,
    edges: BTreeSet<(String, String, String)>,
}

impl NamedSystem {
    fn of(sys: &TransitionSystem) -> Result<Self, OracleError> {
        let def = augment(sys)?.to_def();
        Ok(NamedSystem {
            outputs: def.output_map.into_iter().collect(),
            initial: def.initial.into_iter().collect(),
            secret: def.secret.into_iter().collect(),
            inputs: def.inputs,
            edges: def.transitions.into_iter().collect(),
        })
    }

    fn by_output<'a>(&self, states: impl Iterator<Item = &'a String>) -> Vec<Belief> {
        let mut classes: BTreeMap<&str, Belief> = BTreeMap::new();
        for s in states {
            classes
                .entry(self.outputs[s].as_str())
                .or_default()
                .insert(s.clone());
        }
        classes.into_values().collect()
    }

    fn fixpoint(&self, seeds: Vec<Belief>, forward: bool) -> BTreeSet<Belief> {
        let mut seen: BTreeSet<Belief> = BTreeSet::new();
        let mut todo = seeds;
        while let Some(b) = todo.pop() {
            if !seen.insert(b.clone()) {
                continue;
            }
            for u in &self.inputs {
                let img: Belief = self
                    .edges
                    .iter()
                    .filter(|(s, i, t)| i == u && b.contains(if forward { s } else { t }))
                    .map(|(s, _, t)| if forward { t.clone() } else { s.clone() })
                    .collect();
                todo.extend(self.by_output(img.iter()));
            }
        }
        seen
    }
}

/// Every reachable current-state estimate of the augmented system.
pub fn naive_forward_beliefs(sys: &TransitionSystem) -> Result<BTreeSet<Belief>, OracleError> {
    let named = NamedSystem::of(sys)?;
    let seeds = named.by_output(named.initial.iter());
    Ok(named.fixpoint(seeds, true))
}

/// Every reachable backward estimate of the augmented system.
pub fn naive_backward_beliefs(sys: &TransitionSystem) -> Result<BTreeSet<Belief>, OracleError> {
    let named = NamedSystem::of(sys)?;
    let seeds = named.by_output(named.outputs.keys());
    Ok(named.fixpoint(seeds, false))
}

/// CSO decided from [`naive_forward_beliefs`]: no estimate lies inside `S`.
pub fn naive_cso(sys: &TransitionSystem) -> Result<bool, OracleError> {
    let named = NamedSystem::of(sys)?;
    let beliefs = named.fixpoint(named.by_output(named.initial.iter()), true);
    Ok(beliefs.iter().all(|b| !b.is_subset(&named.secret)))
}

/// InitSO decided from [`naive_backward_beliefs`].
pub fn naive_initso(sys: &TransitionSystem) -> Result<bool, OracleError> {
    let named = NamedSystem::of(sys)?;
    let beliefs = named.fixpoint(named.by_output(named.outputs.keys()), false);
    Ok(beliefs.iter().all(|b| {
        let init: Belief = b.intersection(&named.initial).cloned().collect();
        init.is_empty() || !init.is_subset(&named.secret)
    }))
}

/// Parameters of [`random_system`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub density: f64,
    pub secret_fraction: f64,
}

/// Probability that a generated state is initial.
pub const INITIAL_PROBABILITY: f64 = 0.6;

/// A pseudo-random system determined by `seed` and `spec`.
///
/// A ChaCha8 stream seeded with `seed` draws, in order: each state's output
/// (uniform), initial flag, secret flag, then one Bernoulli(`density`) draw
/// per `(source, input, target)` triple in index order. States are named
/// `s0..`, inputs `u0..`, outputs `y0..`.
pub fn random_system(seed: u64, spec: RandomSpec) -> TransitionSystem {
    assert!(spec.states >= 1 && spec.inputs >= 1 && spec.outputs >= 1);
    assert!(spec.density > 0.0 && spec.density <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = |i: usize| format!("s{i}");
    let mut def = SystemDef::new(format!("random-{seed}"))
        .states((0..spec.states).map(state))
        .inputs((0..spec.inputs).map(|i| format!("u{i}")))
        .outputs((0..spec.outputs).map(|i| format!("y{i}")));
    for s in 0..spec.states {
        let y = rng.gen_range(0..spec.outputs);
        def = def.map(state(s), format!("y{y}"));
        if rng.gen_bool(INITIAL_PROBABILITY) {
            def.initial.push(state(s));
        }
        if rng.gen_bool(spec.secret_fraction.clamp(0.0, 1.0)) {
            def.secret.push(state(s));
        }
    }
    for s in 0..spec.states {
        for u in 0..spec.inputs {
            for t in 0..spec.states {
                if rng.gen_bool(spec.density) {
                    def = def.trans(state(s), format!("u{u}"), state(t));
                }
            }
        }
    }
    def.build().expect("generated system is well formed")
}

/// A random output-homogeneous, secret-compatible partition of `sys`.
///
/// Each state draws a label in `0..n`; blocks are the classes of
/// `(label, output, secret flag)`.
pub fn random_partition(seed: u64, sys: Arc<TransitionSystem>) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.num_states();
    let keys: Vec<(usize, usize, bool)> = (0..n)
        .map(|s| {
            (
                rng.gen_range(0..n.max(1)),
                sys.output_of(s),
                sys.is_secret(s),
            )
        })
        .collect();
    let mut ids: BTreeMap<(usize, usize, bool), usize> = BTreeMap::new();
    let labels: Vec<usize> = keys
        .iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(*k).or_insert(next)
        })
        .collect();
    Partition::from_labels(sys, &labels)
}

/// Every set partition of `0..n` as a restricted-growth label vector.
pub fn all_labelings(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for l in 0..=max {
            prefix.push(l);
            let next_max = if l == max { max + 1 } else { max };
            extend(prefix, next_max, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 0, n, &mut out);
    out
}

/// Verdicts for every notion plus any broken implications among them.
#[derive(Clone, Debug)]
pub struct ImplicationReport {
    pub verdicts: BTreeMap<Notion, Verdict>,
    pub violations: Vec<String>,
}

impl ImplicationReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn opaque(&self, notion: Notion) -> Option<bool> {
        self.verdicts.get(&notion).map(|v| v.opaque)
    }
}

/// Checks InfSO ⇒ KSO(K) ⇒ CSO, InfSO ⇒ InitSO and KSO(K) ⇒ KSO(K') for K' ≤ K.
pub fn implication_suite(
    sys: &TransitionSystem,
    k_max: usize,
) -> Result<ImplicationReport, ObserverError> {
    let mut notions = vec![Notion::InitSO, Notion::CSO, Notion::InfSO];
    notions.extend((1..=k_max).map(Notion::KSO));
    let mut verdicts = BTreeMap::new();
    for n in notions {
        verdicts.insert(n, observer::verify(sys, n)?);
    }
    let holds: HashMap<Notion, bool> = verdicts.iter().map(|(n, v)| (*n, v.opaque)).collect();
    let mut violations = Vec::new();
    let mut implies = |a: Notion, b: Notion| {
        if holds[&a] && !holds[&b] {
            violations.push(format!("{a} holds but {b} does not"));
        }
    };
    implies(Notion::InfSO, Notion::CSO);
    implies(Notion::InfSO, Notion::InitSO);
    for k in 1..=k_max {
        implies(Notion::InfSO, Notion::KSO(k));
        implies(Notion::KSO(k), Notion::CSO);
        for k2 in 1..k {
            implies(Notion::KSO(k), Notion::KSO(k2));
        }
    }
    Ok(ImplicationReport {
        verdicts,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::observer::{backward_component, forward_component, verify_cso, verify_initso};

    fn names(sys: &TransitionSystem, sets: &[crate::StateSet]) -> BTreeSet<Belief> {
        sets.iter()
            .map(|s| sys.names(s).into_iter().map(String::from).collect())
            .collect()
    }

    #[test]
    fn example_2_1_cso_violation_at_length_one() {
        let r = bounded_check(&fixtures::example_2_1(), Notion::CSO, 1).unwrap();
        let w = r.witness.as_ref().unwrap();
        assert_eq!(w.run.describe(&r.system), "b -1-> b");
        assert_eq!(w.position, 1);
        assert!(verify_bounded_witness(&r));
    }

    #[test]
    fn prop35_sigma1_has_no_bounded_initso_violation() {
        let r = bounded_check(&fixtures::prop35_sigma1(), Notion::InitSO, 4).unwrap();
        assert!(!r.violation_found());
    }

    #[test]
    fn empty_secret_never_violates() {
        let mut def = fixtures::fig8().to_def();
        def.secret.clear();
        let sys = def.build().unwrap();
        for n in [Notion::InitSO, Notion::CSO, Notion::KSO(2), Notion::InfSO] {
            assert!(!bounded_check(&sys, n, 4).unwrap().violation_found());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let sys = fixtures::example_2_1();
        assert!(matches!(
            bounded_check_many(&sys, &[Notion::InfSO], 6, 10),
            Err(OracleError::Budget(10))
        ));
    }

    #[test]
    fn naive_beliefs_of_prop35_sigma2() {
        let s2 = fixtures::prop35_sigma2();
        let f = naive_forward_beliefs(&s2).unwrap();
        let expect: BTreeSet<Belief> = [["1"], ["2"]]
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect();
        assert_eq!(f, expect);
        assert!(!naive_cso(&s2).unwrap());
        assert!(!naive_initso(&s2).unwrap());
        assert!(naive_initso(&fixtures::fig9()).unwrap());
    }

    #[test]
    fn naive_beliefs_match_observer_components() {
        for sys in [
            fixtures::fig5_quotient(),
            fixtures::fig8(),
            fixtures::example_2_1(),
        ] {
            let aug = augment(&sys).unwrap();
            let fwd = forward_component(&aug, 1 << 20).unwrap();
            let bwd = backward_component(&aug, 1 << 20).unwrap();
            assert_eq!(
                naive_forward_beliefs(&sys).unwrap(),
                names(&aug, &fwd.nodes)
            );
            assert_eq!(
                naive_backward_beliefs(&sys).unwrap(),
                names(&aug, &bwd.nodes)
            );
            assert_eq!(naive_cso(&sys).unwrap(), verify_cso(&sys).unwrap().opaque);
            assert_eq!(
                naive_initso(&sys).unwrap(),
                verify_initso(&sys).unwrap().opaque
            );
        }
    }

    #[test]
    fn no_transitions_gives_seed_beliefs() {
        let sys = SystemDef::new("still")
            .states(["p", "q"])
            .initial(["p"])
            .inputs(["u"])
            .outputs(["1"])
            .map("p", "1")
            .map("q", "1")
            .build()
            .unwrap();
        let f = naive_forward_beliefs(&sys).unwrap();
        // the seed {p} and, after augmentation, the sink
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn random_systems_are_deterministic() {
        let spec = RandomSpec {
            states: 3,
            inputs: 2,
            outputs: 2,
            density: 0.5,
            secret_fraction: 0.3,
        };
        assert_eq!(random_system(1, spec), random_system(1, spec));
        let one = random_system(7, RandomSpec { outputs: 1, ..spec });
        assert_eq!(one.states_with_output(0).len(), 3);
        let full = random_system(
            3,
            RandomSpec {
                density: 1.0,
                ..spec
            },
        );
        assert!(crate::is_total(&full));
        assert_eq!(full.num_transitions(), 3 * 2 * 3);
    }

    #[test]
    fn labelings_are_bell_numbers() {
        let counts: Vec<usize> = (0..=5).map(|n| all_labelings(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn random_partitions_are_compatible() {
        let sys = Arc::new(fixtures::exam4());
        for seed in 0..20 {
            let p = random_partition(seed, sys.clone());
            assert!(crate::quotient::validate_partition(&p).is_empty());
            assert!(crate::quotient::is_secret_compatible(&p));
        }
    }

    #[test]
    fn implication_suite_on_theorem_fixtures() {
        let r = implication_suite(&fixtures::fig7(), 4).unwrap();
        assert!(r.consistent());
        assert_eq!(r.opaque(Notion::CSO), Some(true));
        assert_eq!(r.opaque(Notion::InitSO), Some(false));
        assert_eq!(r.opaque(Notion::KSO(1)), Some(false));
        assert_eq!(r.opaque(Notion::InfSO), Some(false));

        let r = implication_suite(&fixtures::fig8(), 4).unwrap();
        assert!(r.consistent());
        assert_eq!(r.opaque(Notion::KSO(1)), Some(true));
        assert_eq!(r.opaque(Notion::KSO(2)), Some(false));

        let r = implication_suite(&fixtures::fig9(), 4).unwrap();
        assert!(r.consistent());
        assert_eq!(r.opaque(Notion::InitSO), Some(true));
        assert_eq!(r.opaque(Notion::CSO), Some(false));
    }
}
