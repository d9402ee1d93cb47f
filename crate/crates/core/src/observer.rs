//! The two-way observer and the four opacity decision procedures.
//!
//! An observer state `(q1, q2)` pairs a forward estimate `q1` (states
//! consistent with the observations so far) with a backward estimate `q2`
//! (states from which the remaining observations can be produced). Forward
//! steps only touch `q1` and backward steps only touch `q2`, so the reachable
//! observer is the product of two independent subset constructions. CSO and
//! InitSO only need one of them; InfSO and KSO search the product.
//!
//! Every procedure works on the augmented system, so runs never block.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::stateset::StateSet;
use crate::system::{augment, is_total, SystemError, TransitionSystem};

/// Observer states beyond this count abort the search.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Notion {
    InitSO,
    CSO,
    KSO(usize),
    InfSO,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::InitSO => write!(f, "InitSO"),
            Notion::CSO => write!(f, "CSO"),
            Notion::KSO(k) => write!(f, "KSO({k})"),
            Notion::InfSO => write!(f, "InfSO"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("observer exceeded the state cap of {limit}")]
    ResourceCap { limit: usize },
    #[error("input index {0} is out of range")]
    UnknownInput(usize),
    #[error("K must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Augment(#[from] SystemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObserverConfig {
    pub state_cap: usize,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        ObserverConfig {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// `{x | ∃x' ∈ q, x' --u--> x}`.
pub fn succ_set(sys: &TransitionSystem, q: &StateSet, u: usize) -> Result<StateSet, ObserverError> {
    if u >= sys.num_inputs() {
        return Err(ObserverError::UnknownInput(u));
    }
    Ok(image(sys, q, u, true))
}

/// `{x | ∃x' ∈ q, x --u--> x'}`.
pub fn post_set(sys: &TransitionSystem, q: &StateSet, u: usize) -> Result<StateSet, ObserverError> {
    if u >= sys.num_inputs() {
        return Err(ObserverError::UnknownInput(u));
    }
    Ok(image(sys, q, u, false))
}

fn image(sys: &TransitionSystem, q: &StateSet, u: usize, forward: bool) -> StateSet {
    let mut out = sys.empty_set();
    for x in q.iter() {
        let next = if forward {
            sys.successors(x, u)
        } else {
            sys.predecessors(x, u)
        };
        for &y in next {
            out.insert(y);
        }
    }
    out
}

/// Nonempty output classes of `q`, by output index.
fn split_by_output(sys: &TransitionSystem, q: &StateSet) -> Vec<StateSet> {
    let mut classes: Vec<Option<StateSet>> = vec![None; sys.num_outputs()];
    for x in q.iter() {
        classes[sys.output_of(x)]
            .get_or_insert_with(|| sys.empty_set())
            .insert(x);
    }
    classes.into_iter().flatten().collect()
}

/// `Σ_y 2^|X_y|`, the bound on the states of one observer component.
pub fn component_bound(sys: &TransitionSystem) -> u128 {
    let mut sizes = vec![0u32; sys.num_outputs()];
    for x in 0..sys.num_states() {
        sizes[sys.output_of(x)] += 1;
    }
    sizes
        .into_iter()
        .filter(|&n| n > 0)
        .map(|n| 1u128.checked_shl(n).unwrap_or(u128::MAX))
        .fold(0u128, u128::saturating_add)
}

/// One subset construction: the forward or backward half of the observer.
#[derive(Clone, Debug)]
pub struct Component {
    pub nodes: Vec<StateSet>,
    /// `(input, target node)` per node, inputs ascending.
    pub edges: Vec<Vec<(usize, usize)>>,
    pub roots: Vec<usize>,
    /// BFS distance from the nearest root.
    pub depth: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
}

impl Component {
    fn explore(
        sys: &TransitionSystem,
        seeds: Vec<StateSet>,
        forward: bool,
        cap: usize,
    ) -> Result<Self, ObserverError> {
        let mut c = Component {
            nodes: Vec::new(),
            edges: Vec::new(),
            roots: Vec::new(),
            depth: Vec::new(),
            parent: Vec::new(),
        };
        let mut index: HashMap<StateSet, usize> = HashMap::new();
        let mut add = |c: &mut Component, set: StateSet, parent: Option<(usize, usize)>| {
            if let Some(&i) = index.get(&set) {
                return Ok(i);
            }
            if c.nodes.len() >= cap {
                return Err(ObserverError::ResourceCap { limit: cap });
            }
            let i = c.nodes.len();
            index.insert(set.clone(), i);
            c.depth.push(parent.map_or(0, |(p, _)| c.depth[p] + 1));
            c.nodes.push(set);
            c.edges.push(Vec::new());
            c.parent.push(parent);
            Ok(i)
        };
        for seed in seeds {
            let i = add(&mut c, seed, None)?;
            c.roots.push(i);
        }
        let mut next = 0;
        while next < c.nodes.len() {
            for u in 0..sys.num_inputs() {
                let img = image(sys, &c.nodes[next], u, forward);
                for class in split_by_output(sys, &img) {
                    let j = add(&mut c, class, Some((next, u)))?;
                    c.edges[next].push((u, j));
                }
            }
            next += 1;
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Root of a shortest path to `node` and the `(input, node)` steps.
    pub fn path_to(&self, node: usize) -> (usize, Vec<(usize, usize)>) {
        let mut steps = Vec::new();
        let mut cur = node;
        while let Some((p, u)) = self.parent[cur] {
            steps.push((u, cur));
            cur = p;
        }
        steps.reverse();
        (cur, steps)
    }
}

fn forward_seeds(sys: &TransitionSystem) -> Vec<StateSet> {
    (0..sys.num_outputs())
        .map(|y| sys.initial_with_output(y))
        .filter(|s| !s.is_empty())
        .collect()
}

fn backward_seeds(sys: &TransitionSystem) -> Vec<StateSet> {
    (0..sys.num_outputs())
        .map(|y| sys.states_with_output(y))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Forward half only: reachable current-state estimates.
pub fn forward_component(sys: &TransitionSystem, cap: usize) -> Result<Component, ObserverError> {
    Component::explore(sys, forward_seeds(sys), true, cap)
}

/// Backward half only: reachable initial-state estimates.
pub fn backward_component(sys: &TransitionSystem, cap: usize) -> Result<Component, ObserverError> {
    Component::explore(sys, backward_seeds(sys), false, cap)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObserverState {
    pub q1: StateSet,
    pub q2: StateSet,
}

impl ObserverState {
    pub fn describe(&self, sys: &TransitionSystem) -> String {
        format!(
            "{{{}}} | {{{}}}",
            sys.names(&self.q1).join(","),
            sys.names(&self.q2).join(",")
        )
    }
}

/// `Forward(u)` is the observer input `(u, ε)`, `Backward(u)` is `(ε, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObserverInput {
    Forward(usize),
    Backward(usize),
}

impl ObserverInput {
    pub fn describe(&self, sys: &TransitionSystem) -> String {
        match *self {
            ObserverInput::Forward(u) => format!("({},ε)", sys.input_name(u)),
            ObserverInput::Backward(u) => format!("(ε,{})", sys.input_name(u)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverPath {
    pub start: ObserverState,
    pub steps: Vec<(ObserverInput, ObserverState)>,
}

impl ObserverPath {
    pub fn terminal(&self) -> &ObserverState {
        self.steps.last().map_or(&self.start, |(_, s)| s)
    }

    pub fn backward_steps(&self) -> usize {
        self.steps
            .iter()
            .filter(|(i, _)| matches!(i, ObserverInput::Backward(_)))
            .count()
    }

    pub fn describe(&self, sys: &TransitionSystem) -> String {
        let mut out = self.start.describe(sys);
        for (input, state) in &self.steps {
            out.push_str(&format!(
                "\n  --{}--> {}",
                input.describe(sys),
                state.describe(sys)
            ));
        }
        out
    }
}

/// Outcome of a decision procedure.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub notion: Notion,
    pub opaque: bool,
    /// Present exactly when not opaque; refers to the augmented system.
    pub witness: Option<ObserverPath>,
    /// Whether the input had to be augmented first.
    pub augmented: bool,
    /// The system the witness refers to.
    pub system: Arc<TransitionSystem>,
}

/// True iff `state` violates the notion's condition, given the number of
/// backward steps used to reach it.
pub fn violates(
    sys: &TransitionSystem,
    notion: Notion,
    state: &ObserverState,
    back_steps: usize,
) -> bool {
    let secret = sys.secret();
    let both_secret = |set: StateSet| !set.is_empty() && set.is_subset(secret);
    match notion {
        Notion::CSO => state.q1.is_subset(secret),
        Notion::InitSO => both_secret(state.q2.intersection(sys.initial())),
        Notion::InfSO => both_secret(state.q1.intersection(&state.q2)),
        Notion::KSO(k) => back_steps <= k && both_secret(state.q1.intersection(&state.q2)),
    }
}

fn prepare(sys: &TransitionSystem) -> Result<(Arc<TransitionSystem>, bool), ObserverError> {
    if is_total(sys) {
        Ok((Arc::new(sys.clone()), false))
    } else {
        Ok((Arc::new(augment(sys)?), true))
    }
}

fn verdict(
    notion: Notion,
    system: Arc<TransitionSystem>,
    augmented: bool,
    witness: Option<ObserverPath>,
) -> Verdict {
    Verdict {
        notion,
        opaque: witness.is_none(),
        witness,
        augmented,
        system,
    }
}

pub fn verify_cso(sys: &TransitionSystem) -> Result<Verdict, ObserverError> {
    verify_with(sys, Notion::CSO, &ObserverConfig::default())
}

pub fn verify_initso(sys: &TransitionSystem) -> Result<Verdict, ObserverError> {
    verify_with(sys, Notion::InitSO, &ObserverConfig::default())
}

pub fn verify_infso(sys: &TransitionSystem) -> Result<Verdict, ObserverError> {
    verify_with(sys, Notion::InfSO, &ObserverConfig::default())
}

pub fn verify_kso(sys: &TransitionSystem, k: usize) -> Result<Verdict, ObserverError> {
    verify_with(sys, Notion::KSO(k), &ObserverConfig::default())
}

pub fn verify(sys: &TransitionSystem, notion: Notion) -> Result<Verdict, ObserverError> {
    verify_with(sys, notion, &ObserverConfig::default())
}

pub fn verify_with(
    sys: &TransitionSystem,
    notion: Notion,
    config: &ObserverConfig,
) -> Result<Verdict, ObserverError> {
    if notion == Notion::KSO(0) {
        return Err(ObserverError::ZeroK);
    }
    let (aug, augmented) = prepare(sys)?;
    let cap = config.state_cap;
    let witness = match notion {
        Notion::CSO => {
            let fwd = forward_component(&aug, cap)?;
            single_component_witness(&aug, &fwd, backward_seeds(&aug).first(), true, notion)
        }
        Notion::InitSO => {
            let bwd = backward_component(&aug, cap)?;
            single_component_witness(&aug, &bwd, forward_seeds(&aug).first(), false, notion)
        }
        Notion::InfSO | Notion::KSO(_) => {
            let fwd = forward_component(&aug, cap)?;
            let bwd = backward_component(&aug, cap)?;
            let max_back = match notion {
                Notion::KSO(k) => Some(k),
                _ => None,
            };
            let search = product_search(&fwd, &bwd, max_back, cap, |s, back| {
                violates(&aug, notion, s, back)
            })?;
            search.found
        }
    };
    Ok(verdict(notion, aug, augmented, witness))
}

/// Shortest offending path inside one component, with the other component
/// held at `other` (any of its roots).
fn single_component_witness(
    sys: &TransitionSystem,
    comp: &Component,
    other: Option<&StateSet>,
    forward: bool,
    notion: Notion,
) -> Option<ObserverPath> {
    let other = other?.clone();
    let pair = |set: &StateSet| {
        if forward {
            ObserverState {
                q1: set.clone(),
                q2: other.clone(),
            }
        } else {
            ObserverState {
                q1: other.clone(),
                q2: set.clone(),
            }
        }
    };
    // nodes are numbered in BFS order, so the first offender is a nearest one
    let node = (0..comp.len()).find(|&i| violates(sys, notion, &pair(&comp.nodes[i]), 0))?;
    let (root, steps) = comp.path_to(node);
    Some(ObserverPath {
        start: pair(&comp.nodes[root]),
        steps: steps
            .into_iter()
            .map(|(u, n)| {
                let input = if forward {
                    ObserverInput::Forward(u)
                } else {
                    ObserverInput::Backward(u)
                };
                (input, pair(&comp.nodes[n]))
            })
            .collect(),
    })
}

/// A product node: forward and backward component indices.
type Pair = (usize, usize);

struct ProductSearch {
    found: Option<ObserverPath>,
    order: Vec<Pair>,
    edges: Vec<(Pair, ObserverInput, Pair)>,
}

/// BFS over the product of the two components, optionally limited to
/// backward estimates at most `max_back` backward steps deep.
fn product_search(
    fwd: &Component,
    bwd: &Component,
    max_back: Option<usize>,
    cap: usize,
    mut offending: impl FnMut(&ObserverState, usize) -> bool,
) -> Result<ProductSearch, ObserverError> {
    let allowed = |j: usize| max_back.is_none_or(|k| bwd.depth[j] <= k);
    let mut parent: HashMap<Pair, Option<(Pair, ObserverInput)>> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut out = ProductSearch {
        found: None,
        order: Vec::new(),
        edges: Vec::new(),
    };
    for &i in &fwd.roots {
        for &j in &bwd.roots {
            if parent.len() >= cap {
                return Err(ObserverError::ResourceCap { limit: cap });
            }
            parent.insert((i, j), None);
            queue.push_back((i, j));
        }
    }
    let state = |(i, j): (usize, usize)| ObserverState {
        q1: fwd.nodes[i].clone(),
        q2: bwd.nodes[j].clone(),
    };
    while let Some(cur) = queue.pop_front() {
        out.order.push(cur);
        if offending(&state(cur), bwd.depth[cur.1]) {
            let mut steps = Vec::new();
            let mut at = cur;
            while let Some((prev, input)) = parent[&at] {
                steps.push((input, state(at)));
                at = prev;
            }
            steps.reverse();
            out.found = Some(ObserverPath {
                start: state(at),
                steps,
            });
            return Ok(out);
        }
        let (i, j) = cur;
        let moves = fwd.edges[i]
            .iter()
            .map(|&(u, t)| (ObserverInput::Forward(u), (t, j)))
            .chain(
                bwd.edges[j]
                    .iter()
                    .filter(|&&(_, t)| allowed(t))
                    .map(|&(u, t)| (ObserverInput::Backward(u), (i, t))),
            );
        for (input, next) in moves {
            out.edges.push((cur, input, next));
            if !parent.contains_key(&next) {
                if parent.len() >= cap {
                    return Err(ObserverError::ResourceCap { limit: cap });
                }
                parent.insert(next, Some((cur, input)));
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

/// The reachable two-way observer.
#[derive(Clone, Debug)]
pub struct Observer {
    source: Arc<TransitionSystem>,
    augmented: bool,
    states: Vec<ObserverState>,
    /// Fewest backward steps needed to reach each state.
    back_depth: Vec<usize>,
    initial: Vec<usize>,
    transitions: Vec<(usize, ObserverInput, usize)>,
    forward: Component,
    backward: Component,
}

impl Observer {
    pub fn source(&self) -> &Arc<TransitionSystem> {
        &self.source
    }

    pub fn augmented(&self) -> bool {
        self.augmented
    }

    pub fn states(&self) -> &[ObserverState] {
        &self.states
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn transitions(&self) -> &[(usize, ObserverInput, usize)] {
        &self.transitions
    }

    pub fn forward(&self) -> &Component {
        &self.forward
    }

    pub fn backward(&self) -> &Component {
        &self.backward
    }

    pub fn back_depth(&self, state: usize) -> usize {
        self.back_depth[state]
    }

    /// Indices of the states violating `notion`.
    pub fn offenders(&self, notion: Notion) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| violates(&self.source, notion, &self.states[i], self.back_depth[i]))
            .collect()
    }
}

pub fn build_two_way_observer(sys: &TransitionSystem) -> Result<Observer, ObserverError> {
    build_two_way_observer_with(sys, &ObserverConfig::default())
}

pub fn build_two_way_observer_with(
    sys: &TransitionSystem,
    config: &ObserverConfig,
) -> Result<Observer, ObserverError> {
    let (aug, augmented) = prepare(sys)?;
    let fwd = forward_component(&aug, config.state_cap)?;
    let bwd = backward_component(&aug, config.state_cap)?;
    let search = product_search(&fwd, &bwd, None, config.state_cap, |_, _| false)?;
    let index: HashMap<(usize, usize), usize> = search
        .order
        .iter()
        .enumerate()
        .map(|(n, &p)| (p, n))
        .collect();
    let states = search
        .order
        .iter()
        .map(|&(i, j)| ObserverState {
            q1: fwd.nodes[i].clone(),
            q2: bwd.nodes[j].clone(),
        })
        .collect();
    let back_depth = search.order.iter().map(|&(_, j)| bwd.depth[j]).collect();
    let initial = (0..fwd.roots.len() * bwd.roots.len()).collect();
    let transitions = search
        .edges
        .iter()
        .map(|&(a, input, b)| (index[&a], input, index[&b]))
        .collect();
    Ok(Observer {
        source: aug,
        augmented,
        states,
        back_depth,
        initial,
        transitions,
        forward: fwd,
        backward: bwd,
    })
}

/// Why a witness failed to replay.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("verdict is opaque but carries a witness")]
    UnexpectedWitness,
    #[error("verdict is not opaque but has no witness")]
    MissingWitness,
    #[error("start state is not an initial observer state")]
    BadStart,
    #[error("step {0} is not an observer transition")]
    BadStep(usize),
    #[error("terminal state does not violate the {0} condition")]
    NoViolation(Notion),
}

fn is_output_class_of(sys: &TransitionSystem, whole: &StateSet, part: &StateSet) -> bool {
    split_by_output(sys, whole).iter().any(|c| c == part)
}

/// Re-executes a verdict's witness against the observer rules.
pub fn replay_witness(v: &Verdict) -> Result<(), ReplayError> {
    let sys = &*v.system;
    let path = match (&v.witness, v.opaque) {
        (None, true) => return Ok(()),
        (Some(_), true) => return Err(ReplayError::UnexpectedWitness),
        (None, false) => return Err(ReplayError::MissingWitness),
        (Some(p), false) => p,
    };
    let start_ok =
        forward_seeds(sys).contains(&path.start.q1) && backward_seeds(sys).contains(&path.start.q2);
    if !start_ok {
        return Err(ReplayError::BadStart);
    }
    let mut cur = &path.start;
    for (n, (input, next)) in path.steps.iter().enumerate() {
        let ok = match *input {
            ObserverInput::Forward(u) => {
                u < sys.num_inputs()
                    && next.q2 == cur.q2
                    && is_output_class_of(sys, &image(sys, &cur.q1, u, true), &next.q1)
            }
            ObserverInput::Backward(u) => {
                u < sys.num_inputs()
                    && next.q1 == cur.q1
                    && is_output_class_of(sys, &image(sys, &cur.q2, u, false), &next.q2)
            }
        };
        if !ok {
            return Err(ReplayError::BadStep(n));
        }
        cur = next;
    }
    if violates(sys, v.notion, cur, path.backward_steps()) {
        Ok(())
    } else {
        Err(ReplayError::NoViolation(v.notion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(sys: &TransitionSystem, ids: &[&str]) -> StateSet {
        sys.set_of(ids.iter().copied()).unwrap()
    }

    fn opaque(sys: &TransitionSystem, notion: Notion) -> bool {
        let v = verify(sys, notion).unwrap();
        replay_witness(&v).unwrap();
        v.opaque
    }

    #[test]
    fn succ_and_post() {
        let s2 = fixtures::prop35_sigma2();
        let u = s2.input_index("1").unwrap();
        assert_eq!(
            succ_set(&s2, &set(&s2, &["1"]), u).unwrap(),
            set(&s2, &["2"])
        );
        assert_eq!(
            post_set(&s2, &set(&s2, &["1"]), u).unwrap(),
            set(&s2, &["2"])
        );
        assert!(succ_set(&s2, &s2.empty_set(), u).unwrap().is_empty());
        assert!(post_set(&s2, &s2.empty_set(), u).unwrap().is_empty());
        assert!(matches!(
            succ_set(&s2, &s2.empty_set(), 7),
            Err(ObserverError::UnknownInput(7))
        ));

        let e = fixtures::example_2_1();
        let zero = e.input_index("0").unwrap();
        let one = e.input_index("1").unwrap();
        assert_eq!(
            succ_set(&e, &set(&e, &["a"]), zero).unwrap(),
            set(&e, &["b", "c"])
        );
        assert_eq!(
            post_set(&e, &set(&e, &["b"]), one).unwrap(),
            set(&e, &["b", "c"])
        );
    }

    #[test]
    fn prop35_sigma2_observer() {
        let s2 = fixtures::prop35_sigma2();
        let obs = build_two_way_observer(&s2).unwrap();
        let init: Vec<String> = obs
            .initial()
            .iter()
            .map(|&i| obs.states()[i].describe(&s2))
            .collect();
        assert_eq!(init, ["{1} | {1}", "{1} | {2}", "{2} | {1}", "{2} | {2}"]);
        let from = ObserverState {
            q1: set(&s2, &["1"]),
            q2: set(&s2, &["2"]),
        };
        let to = ObserverState {
            q1: set(&s2, &["2"]),
            q2: set(&s2, &["2"]),
        };
        let (a, b) = (
            obs.states().iter().position(|s| *s == from).unwrap(),
            obs.states().iter().position(|s| *s == to).unwrap(),
        );
        assert!(obs
            .transitions()
            .contains(&(a, ObserverInput::Forward(0), b)));
    }

    #[test]
    fn observer_without_transitions_is_its_initial_states() {
        let sys = crate::SystemDef::new("still")
            .states(["p", "q"])
            .initial(["p", "q"])
            .inputs(["u"])
            .outputs(["1", "2"])
            .map("p", "1")
            .map("q", "2")
            .build()
            .unwrap();
        // augmentation adds the sink, so inspect the components of the raw system
        let fwd = forward_component(&sys, DEFAULT_STATE_CAP).unwrap();
        let bwd = backward_component(&sys, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(fwd.len(), 2);
        assert_eq!(bwd.len(), 2);
        assert!(fwd.edges.iter().chain(&bwd.edges).all(Vec::is_empty));
    }

    #[test]
    fn all_initial_cycle_forward_split() {
        let q = fixtures::fig5_quotient();
        let fwd = forward_component(&q, DEFAULT_STATE_CAP).unwrap();
        let root = fwd.nodes[fwd.roots[0]].clone();
        assert_eq!(root, set(&q, &["1+5", "3+7"]));
        let u = q.input_index("1").unwrap();
        let img = succ_set(&q, &root, u).unwrap();
        assert_eq!(split_by_output(&q, &img), vec![set(&q, &["2+6", "4+8"])]);
    }

    #[test]
    fn cso_verdicts() {
        assert!(!opaque(&fixtures::prop35_sigma2(), Notion::CSO));
        assert!(opaque(&fixtures::fig7(), Notion::CSO));
        assert!(opaque(&fixtures::fig10(), Notion::CSO));
        let mut def = fixtures::example_2_1_def();
        def.secret.clear();
        assert!(opaque(&def.build().unwrap(), Notion::CSO));
    }

    #[test]
    fn initso_verdicts() {
        assert!(opaque(&fixtures::prop35_sigma1(), Notion::InitSO));
        assert!(!opaque(&fixtures::prop35_sigma2(), Notion::InitSO));
        assert!(opaque(&fixtures::fig9(), Notion::InitSO));
        assert!(!opaque(&fixtures::fig10(), Notion::InitSO));
    }

    #[test]
    fn infso_verdicts() {
        assert!(opaque(&fixtures::exam4(), Notion::InfSO));
        assert!(!opaque(&fixtures::fig8(), Notion::InfSO));
        assert!(opaque(&fixtures::eq5_quotient(), Notion::InfSO));
    }

    #[test]
    fn kso_verdicts() {
        assert!(opaque(&fixtures::fig8(), Notion::KSO(1)));
        assert!(!opaque(&fixtures::fig8(), Notion::KSO(2)));
        assert!(!opaque(&fixtures::fig7(), Notion::KSO(1)));
        assert!(opaque(&fixtures::fig10(), Notion::KSO(1)));
        assert!(matches!(
            verify(&fixtures::fig10(), Notion::KSO(0)),
            Err(ObserverError::ZeroK)
        ));
    }

    #[test]
    fn kso_witness_respects_k() {
        let v = verify_kso(&fixtures::fig8(), 2).unwrap();
        let w = v.witness.as_ref().unwrap();
        assert!(w.backward_steps() <= 2);
        assert!(v.augmented);
    }

    #[test]
    fn resource_cap_is_reported() {
        let cfg = ObserverConfig { state_cap: 2 };
        assert!(matches!(
            verify_with(&fixtures::exam4(), Notion::InfSO, &cfg),
            Err(ObserverError::ResourceCap { limit: 2 })
        ));
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let mut v = verify_cso(&fixtures::prop35_sigma2()).unwrap();
        let w = v.witness.as_mut().unwrap();
        w.start.q1 = v.system.set_of(["1", "2"]).unwrap();
        assert_eq!(replay_witness(&v), Err(ReplayError::BadStart));
    }

    #[test]
    fn component_sizes_respect_the_bound() {
        for sys in [
            fixtures::exam4(),
            fixtures::fig10(),
            fixtures::eq5_quotient(),
        ] {
            let obs = build_two_way_observer(&sys).unwrap();
            let bound = component_bound(obs.source());
            assert!(obs.forward().len() as u128 <= bound);
            assert!(obs.backward().len() as u128 <= bound);
            assert_eq!(
                obs.states().len(),
                obs.forward().len() * obs.backward().len()
            );
        }
    }
}
