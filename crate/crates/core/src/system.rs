//! Nondeterministic transition systems with secret states.
//!
//! A [`SystemDef`] is the raw, name-based description of a system as it comes
//! out of a parser or a fixture. [`validate`] lists everything wrong with it;
//! [`TransitionSystem::new`] turns a valid definition into the indexed form
//! every analysis works on.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::stateset::StateSet;

/// Identifier of the sink state (and its output) added by [`augment`].
pub const PHI: &str = "__phi__";

/// A state/input/output identifier is valid when it matches `[A-Za-z0-9_.'+-]+`.
pub fn is_valid_identifier(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '+' | '-'))
}

/// Name-based description of a transition system, possibly malformed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemDef {
    pub name: String,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub secret: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub output_map: Vec<(String, String)>,
    pub transitions: Vec<(String, String, String)>,
}

impl SystemDef {
    pub fn new(name: impl Into<String>) -> Self {
        SystemDef {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn states<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn initial<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.initial = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn secret<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.secret = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn inputs<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.inputs = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn outputs<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.outputs = ids.into_iter().map(Into::into).collect();
        self
    }

    /// Sets `h(state) = output`.
    pub fn map(mut self, state: impl Into<String>, output: impl Into<String>) -> Self {
        self.output_map.push((state.into(), output.into()));
        self
    }

    pub fn trans(
        mut self,
        source: impl Into<String>,
        input: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        self.transitions
            .push((source.into(), input.into(), target.into()));
        self
    }

    pub fn build(self) -> Result<TransitionSystem, SystemError> {
        TransitionSystem::new(self)
    }
}

/// One violated well-formedness invariant of a [`SystemDef`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("invalid identifier `{0}`")]
    BadIdentifier(String),
    #[error("duplicate {kind} `{id}`")]
    Duplicate { kind: &'static str, id: String },
    #[error("{context} names unknown state `{id}`")]
    UnknownState { context: &'static str, id: String },
    #[error("{context} names unknown input `{id}`")]
    UnknownInput { context: &'static str, id: String },
    #[error("output map names unknown output `{id}`")]
    UnknownOutput { id: String },
    #[error("state `{0}` has no output")]
    MissingOutput(String),
    #[error("state `{0}` is mapped more than once")]
    DuplicateMapping(String),
    #[error("reserved identifier `{PHI}` used outside an augmentation sink")]
    Reserved,
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("malformed system: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("`{PHI}` is already an identifier of the system")]
    ReservedClash,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Lists every violated invariant of `def`, one entry per offence.
pub fn validate(def: &SystemDef) -> Vec<Violation> {
    let mut out = Vec::new();

    let check_ids = |kind: &'static str, ids: &[String], out: &mut Vec<Violation>| {
        let mut seen = HashSet::new();
        for id in ids {
            if !is_valid_identifier(id) {
                out.push(Violation::BadIdentifier(id.clone()));
            }
            if !seen.insert(id.as_str()) {
                out.push(Violation::Duplicate {
                    kind,
                    id: id.clone(),
                });
            }
        }
        seen.into_iter()
            .map(str::to_owned)
            .collect::<HashSet<String>>()
    };
    let states = check_ids("state", &def.states, &mut out);
    let inputs = check_ids("input", &def.inputs, &mut out);
    let outputs = check_ids("output", &def.outputs, &mut out);

    for (context, ids) in [("initial set", &def.initial), ("secret set", &def.secret)] {
        for id in ids {
            if !states.contains(id) {
                out.push(Violation::UnknownState {
                    context,
                    id: id.clone(),
                });
            }
        }
    }

    let mut mapped: HashMap<&str, &str> = HashMap::new();
    for (state, output) in &def.output_map {
        if !states.contains(state) {
            out.push(Violation::UnknownState {
                context: "output map",
                id: state.clone(),
            });
        }
        if !outputs.contains(output) {
            out.push(Violation::UnknownOutput { id: output.clone() });
        }
        if mapped.insert(state, output).is_some() {
            out.push(Violation::DuplicateMapping(state.clone()));
        }
    }
    for state in &def.states {
        if !mapped.contains_key(state.as_str()) {
            out.push(Violation::MissingOutput(state.clone()));
        }
    }

    for (src, input, dst) in &def.transitions {
        for id in [src, dst] {
            if !states.contains(id) {
                out.push(Violation::UnknownState {
                    context: "transition",
                    id: id.clone(),
                });
            }
        }
        if !inputs.contains(input) {
            out.push(Violation::UnknownInput {
                context: "transition",
                id: input.clone(),
            });
        }
    }

    // `__phi__` may only appear as the sink produced by augmentation.
    let phi_used = states.contains(PHI) || outputs.contains(PHI) || inputs.contains(PHI);
    if phi_used {
        let sink_ok = states.contains(PHI)
            && outputs.contains(PHI)
            && !inputs.contains(PHI)
            && mapped.get(PHI) == Some(&PHI)
            && mapped.iter().all(|(s, o)| *s == PHI || *o != PHI)
            && !def.initial.iter().any(|s| s == PHI)
            && !def.secret.iter().any(|s| s == PHI)
            && def.transitions.iter().all(|(s, _, d)| s != PHI || d == PHI)
            && def.inputs.iter().all(|u| {
                def.transitions
                    .iter()
                    .any(|(s, i, d)| s == PHI && i == u && d == PHI)
            });
        if !sink_ok {
            out.push(Violation::Reserved);
        }
    }

    out
}

/// A validated finite transition system, indexed for analysis.
///
/// States, inputs and outputs are kept sorted by identifier; every index
/// handed out by this type refers to that canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    name: String,
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    initial: StateSet,
    secret: StateSet,
    output_of: Vec<usize>,
    transitions: BTreeSet<(usize, usize, usize)>,
    succ: Vec<Vec<Vec<usize>>>,
    pred: Vec<Vec<Vec<usize>>>,
}

impl TransitionSystem {
    pub fn new(def: SystemDef) -> Result<Self, SystemError> {
        let violations = validate(&def);
        if !violations.is_empty() {
            return Err(SystemError::Invalid(violations));
        }
        let sorted = |v: &[String]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        let states = sorted(&def.states);
        let inputs = sorted(&def.inputs);
        let outputs = sorted(&def.outputs);
        let s_idx: HashMap<&str, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let u_idx: HashMap<&str, usize> = inputs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let y_idx: HashMap<&str, usize> = outputs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();

        let n = states.len();
        let initial = StateSet::from_indices(n, def.initial.iter().map(|s| s_idx[s.as_str()]));
        let secret = StateSet::from_indices(n, def.secret.iter().map(|s| s_idx[s.as_str()]));
        let mut output_of = vec![0; n];
        for (s, y) in &def.output_map {
            output_of[s_idx[s.as_str()]] = y_idx[y.as_str()];
        }
        let transitions: BTreeSet<_> = def
            .transitions
            .iter()
            .map(|(a, u, b)| (s_idx[a.as_str()], u_idx[u.as_str()], s_idx[b.as_str()]))
            .collect();

        let mut succ = vec![vec![Vec::new(); inputs.len()]; n];
        let mut pred = vec![vec![Vec::new(); inputs.len()]; n];
        for &(a, u, b) in &transitions {
            succ[a][u].push(b);
            pred[b][u].push(a);
        }
        for row in pred.iter_mut() {
            for targets in row.iter_mut() {
                targets.sort_unstable();
            }
        }

        Ok(TransitionSystem {
            name: def.name,
            states,
            inputs,
            outputs,
            initial,
            secret,
            output_of,
            transitions,
            succ,
            pred,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn input_index(&self, id: &str) -> Option<usize> {
        self.inputs.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn output_index(&self, id: &str) -> Option<usize> {
        self.outputs.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn input_name(&self, input: usize) -> &str {
        &self.inputs[input]
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn secret(&self) -> &StateSet {
        &self.secret
    }

    pub fn is_initial(&self, state: usize) -> bool {
        self.initial.contains(state)
    }

    pub fn is_secret(&self, state: usize) -> bool {
        self.secret.contains(state)
    }

    /// Index of `h(state)` in [`outputs`](Self::outputs).
    pub fn output_of(&self, state: usize) -> usize {
        self.output_of[state]
    }

    pub fn output_name(&self, state: usize) -> &str {
        &self.outputs[self.output_of[state]]
    }

    /// Transitions `(source, input, target)` in index order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.transitions.iter().copied()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn has_transition(&self, source: usize, input: usize, target: usize) -> bool {
        self.transitions.contains(&(source, input, target))
    }

    /// Sorted `u`-successors of `state`.
    pub fn successors(&self, state: usize, input: usize) -> &[usize] {
        &self.succ[state][input]
    }

    /// Sorted `u`-predecessors of `state`.
    pub fn predecessors(&self, state: usize, input: usize) -> &[usize] {
        &self.pred[state][input]
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.num_states())
    }

    pub fn set_of<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> Option<StateSet> {
        let mut set = self.empty_set();
        for id in ids {
            set.insert(self.state_index(id)?);
        }
        Some(set)
    }

    /// `X_y`: every state whose output is `y`.
    pub fn states_with_output(&self, output: usize) -> StateSet {
        StateSet::from_indices(
            self.num_states(),
            (0..self.num_states()).filter(|&s| self.output_of[s] == output),
        )
    }

    /// `X_{0,y}`: initial states whose output is `y`.
    pub fn initial_with_output(&self, output: usize) -> StateSet {
        StateSet::from_indices(
            self.num_states(),
            self.initial.iter().filter(|&s| self.output_of[s] == output),
        )
    }

    /// Member names of `set`, in canonical order.
    pub fn names(&self, set: &StateSet) -> Vec<&str> {
        set.iter().map(|s| self.state_name(s)).collect()
    }

    /// Back to the name-based description, in canonical order.
    pub fn to_def(&self) -> SystemDef {
        SystemDef {
            name: self.name.clone(),
            states: self.states.clone(),
            initial: self
                .names(&self.initial)
                .into_iter()
                .map(String::from)
                .collect(),
            secret: self
                .names(&self.secret)
                .into_iter()
                .map(String::from)
                .collect(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            output_map: (0..self.num_states())
                .map(|s| (self.states[s].clone(), self.output_name(s).to_owned()))
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|&(a, u, b)| {
                    (
                        self.states[a].clone(),
                        self.inputs[u].clone(),
                        self.states[b].clone(),
                    )
                })
                .collect(),
        }
    }
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} states, {} inputs, {} transitions)",
            self.name,
            self.num_states(),
            self.num_inputs(),
            self.num_transitions()
        )
    }
}

/// True iff every `(state, input)` pair has at least one successor.
pub fn is_total(sys: &TransitionSystem) -> bool {
    (0..sys.num_states()).all(|s| (0..sys.num_inputs()).all(|u| !sys.successors(s, u).is_empty()))
}

/// Completes a non-total system with the observable sink `__phi__`.
///
/// Total systems are returned unchanged.
pub fn augment(sys: &TransitionSystem) -> Result<TransitionSystem, SystemError> {
    if is_total(sys) {
        return Ok(sys.clone());
    }
    if sys.state_index(PHI).is_some() || sys.output_index(PHI).is_some() {
        return Err(SystemError::ReservedClash);
    }
    let mut def = sys.to_def();
    def.states.push(PHI.to_owned());
    def.outputs.push(PHI.to_owned());
    def.output_map.push((PHI.to_owned(), PHI.to_owned()));
    for u in 0..sys.num_inputs() {
        for s in 0..sys.num_states() {
            if sys.successors(s, u).is_empty() {
                def.transitions.push((
                    sys.state_name(s).to_owned(),
                    sys.input_name(u).to_owned(),
                    PHI.to_owned(),
                ));
            }
        }
        def.transitions
            .push((PHI.to_owned(), sys.input_name(u).to_owned(), PHI.to_owned()));
    }
    TransitionSystem::new(def)
}

/// States reachable from some initial state.
pub fn reachable(sys: &TransitionSystem) -> StateSet {
    let mut seen = sys.initial().clone();
    let mut queue: VecDeque<usize> = seen.iter().collect();
    while let Some(s) = queue.pop_front() {
        for u in 0..sys.num_inputs() {
            for &t in sys.successors(s, u) {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
    }
    seen
}

/// A run: `states[0]` is initial and `states[i] --inputs[i]--> states[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub inputs: Vec<usize>,
    pub states: Vec<usize>,
}

impl Run {
    /// Checks the run invariants against `sys`.
    pub fn is_valid_in(&self, sys: &TransitionSystem) -> bool {
        self.states.len() == self.inputs.len() + 1
            && sys.is_initial(self.states[0])
            && self
                .inputs
                .iter()
                .enumerate()
                .all(|(i, &u)| sys.has_transition(self.states[i], u, self.states[i + 1]))
    }

    pub fn outputs(&self, sys: &TransitionSystem) -> Vec<usize> {
        self.states.iter().map(|&s| sys.output_of(s)).collect()
    }

    pub fn describe(&self, sys: &TransitionSystem) -> String {
        let mut out = sys.state_name(self.states[0]).to_owned();
        for (i, &u) in self.inputs.iter().enumerate() {
            out.push_str(&format!(
                " -{}-> {}",
                sys.input_name(u),
                sys.state_name(self.states[i + 1])
            ));
        }
        out
    }
}

/// Every run over an input word of length at most `max_len`.
///
/// Runs come ordered by length, then by input word, then by state sequence.
/// The number of runs grows exponentially with `max_len`.
pub fn enumerate_runs(sys: &TransitionSystem, max_len: usize) -> RunIter<'_> {
    RunIter {
        sys,
        max_len,
        word: Some(Vec::new()),
        buffer: VecDeque::new(),
    }
}

pub struct RunIter<'a> {
    sys: &'a TransitionSystem,
    max_len: usize,
    word: Option<Vec<usize>>,
    buffer: VecDeque<Run>,
}

impl RunIter<'_> {
    fn advance_word(&mut self) {
        let Some(word) = self.word.as_mut() else {
            return;
        };
        let k = self.sys.num_inputs();
        // odometer over inputs, rightmost digit fastest
        let mut i = word.len();
        while i > 0 {
            i -= 1;
            if word[i] + 1 < k {
                word[i] += 1;
                for d in word.iter_mut().skip(i + 1) {
                    *d = 0;
                }
                return;
            }
        }
        let next_len = word.len() + 1;
        if next_len > self.max_len || k == 0 {
            self.word = None;
        } else {
            *word = vec![0; next_len];
        }
    }
}

impl Iterator for RunIter<'_> {
    type Item = Run;

    fn next(&mut self) -> Option<Run> {
        loop {
            if let Some(run) = self.buffer.pop_front() {
                return Some(run);
            }
            let word = self.word.clone()?;
            self.buffer.extend(runs_over(self.sys, &word));
            self.advance_word();
        }
    }
}

/// All full-length runs over `word`, in state-sequence order.
pub fn runs_over(sys: &TransitionSystem, word: &[usize]) -> Vec<Run> {
    let mut paths: Vec<Vec<usize>> = sys.initial().iter().map(|s| vec![s]).collect();
    for &u in word {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = *p.last().unwrap();
                sys.successors(last, u).iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    paths
        .into_iter()
        .map(|states| Run {
            inputs: word.to_vec(),
            states,
        })
        .collect()
}

/// Groups a system's states by output: `output index -> X_y`.
pub fn output_classes(sys: &TransitionSystem) -> BTreeMap<usize, StateSet> {
    (0..sys.num_outputs())
        .map(|y| (y, sys.states_with_output(y)))
        .filter(|(_, set)| !set.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn example_2_1_is_valid() {
        assert!(validate(&fixtures::example_2_1_def()).is_empty());
    }

    #[test]
    fn unknown_state_in_transition_is_reported() {
        let def = fixtures::example_2_1_def().trans("a", "0", "z");
        let v = validate(&def);
        assert_eq!(
            v,
            vec![Violation::UnknownState {
                context: "transition",
                id: "z".into()
            }]
        );
    }

    #[test]
    fn missing_output_is_reported() {
        let mut def = fixtures::example_2_1_def();
        def.output_map.retain(|(s, _)| s != "c");
        assert_eq!(validate(&def), vec![Violation::MissingOutput("c".into())]);
    }

    #[test]
    fn totality() {
        assert!(is_total(&fixtures::example_2_1()));
        assert!(!is_total(&fixtures::fig7()));
        let lonely = SystemDef::new("s")
            .states(["s"])
            .initial(["s"])
            .inputs(["u"])
            .outputs(["o"])
            .map("s", "o")
            .build()
            .unwrap();
        assert!(!is_total(&lonely));
        let aug = augment(&lonely).unwrap();
        let mut got: Vec<_> = aug.to_def().transitions;
        got.sort();
        assert_eq!(
            got,
            vec![
                (PHI.into(), "u".into(), PHI.into()),
                ("s".into(), "u".into(), PHI.into())
            ]
        );
    }

    #[test]
    fn augment_is_identity_on_total_systems() {
        let sys = fixtures::example_2_1();
        assert_eq!(augment(&sys).unwrap(), sys);
    }

    #[test]
    fn augment_routes_missing_pairs_to_sink() {
        let sys = fixtures::fig7();
        let aug = augment(&sys).unwrap();
        assert!(is_total(&aug));
        let phi = aug.state_index(PHI).unwrap();
        assert_eq!(aug.output_name(phi), PHI);
        let u2 = aug.input_index("u2").unwrap();
        let u1 = aug.input_index("u1").unwrap();
        for s in ["x2", "x3", "x4"] {
            let s = aug.state_index(s).unwrap();
            assert_eq!(aug.successors(s, u2), &[phi]);
        }
        // x1 has a u2 move, so nothing is added there
        let x1 = aug.state_index("x1").unwrap();
        assert_eq!(aug.successors(x1, u2), &[aug.state_index("x4").unwrap()]);
        assert_eq!(aug.successors(phi, u1), &[phi]);
        assert_eq!(aug.num_transitions(), sys.num_transitions() + 3 + 2);
        assert_eq!(
            aug.initial(),
            &aug.set_of(["x1", "x2", "x3", "x4"]).unwrap()
        );
        assert_eq!(augment(&aug).unwrap(), aug);
    }

    #[test]
    fn augment_rejects_reserved_clash() {
        let def = SystemDef::new("bad")
            .states([PHI])
            .inputs(["u"])
            .outputs(["o"])
            .map(PHI, "o");
        assert!(!validate(&def).is_empty());
    }

    #[test]
    fn reachability() {
        assert_eq!(reachable(&fixtures::example_2_1()).len(), 3);
        assert_eq!(reachable(&fixtures::fig5_quotient()).len(), 4);
        let sys = SystemDef::new("iso")
            .states(["a", "z"])
            .initial(["a"])
            .inputs(["u"])
            .outputs(["o"])
            .map("a", "o")
            .map("z", "o")
            .trans("a", "u", "a")
            .build()
            .unwrap();
        let r = reachable(&sys);
        assert!(!r.contains(sys.state_index("z").unwrap()));
    }

    #[test]
    fn run_enumeration() {
        let sys = fixtures::example_2_1();
        assert_eq!(enumerate_runs(&sys, 0).count(), 3);
        let one = sys.input_index("1").unwrap();
        let b = sys.state_index("b").unwrap();
        let runs: Vec<Run> = enumerate_runs(&sys, 1).collect();
        assert!(runs.contains(&Run {
            inputs: vec![one],
            states: vec![b, b]
        }));
        // 3 empty runs + 7 one-step runs (every transition starts at an initial state)
        assert_eq!(runs.len(), 10);
        let mut sorted = runs.clone();
        sorted.sort_by(|x, y| {
            (x.inputs.len(), &x.inputs, &x.states).cmp(&(y.inputs.len(), &y.inputs, &y.states))
        });
        assert_eq!(sorted, runs);
    }

    #[test]
    fn empty_initial_set_has_no_runs() {
        let mut def = fixtures::example_2_1_def();
        def.initial.clear();
        let sys = def.build().unwrap();
        assert_eq!(enumerate_runs(&sys, 3).count(), 0);
    }
}
