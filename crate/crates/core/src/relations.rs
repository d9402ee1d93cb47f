//! Checkers for (bi)simulation relations and their opacity-preserving variants.
//!
//! Every checker evaluates the relation exactly as given (no closure) and
//! reports each violated clause once, with the first falsifying witness in
//! canonical order. Inputs and outputs of the two systems are matched by
//! identifier.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::system::TransitionSystem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("unknown {side} state `{id}`")]
    UnknownState { side: &'static str, id: String },
}

/// A binary relation between the states of two systems.
#[derive(Clone, Debug)]
pub struct StatePairRelation {
    left: Arc<TransitionSystem>,
    right: Arc<TransitionSystem>,
    pairs: BTreeSet<(usize, usize)>,
}

impl StatePairRelation {
    /// Panics if a pair component is out of range for its system.
    pub fn new(
        left: Arc<TransitionSystem>,
        right: Arc<TransitionSystem>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        assert!(pairs
            .iter()
            .all(|&(a, b)| a < left.num_states() && b < right.num_states()));
        StatePairRelation { left, right, pairs }
    }

    pub fn from_names<'a>(
        left: Arc<TransitionSystem>,
        right: Arc<TransitionSystem>,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, RelationError> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            let ia = left
                .state_index(a)
                .ok_or_else(|| RelationError::UnknownState {
                    side: "left",
                    id: a.to_owned(),
                })?;
            let ib = right
                .state_index(b)
                .ok_or_else(|| RelationError::UnknownState {
                    side: "right",
                    id: b.to_owned(),
                })?;
            set.insert((ia, ib));
        }
        Ok(StatePairRelation {
            left,
            right,
            pairs: set,
        })
    }

    /// `{(x, x) | x ∈ X}` on `sys`.
    pub fn identity(sys: Arc<TransitionSystem>) -> Self {
        let n = sys.num_states();
        StatePairRelation::new(sys.clone(), sys, (0..n).map(|i| (i, i)))
    }

    pub fn left(&self) -> &Arc<TransitionSystem> {
        &self.left
    }

    pub fn right(&self) -> &Arc<TransitionSystem> {
        &self.right
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, left: usize, right: usize) -> bool {
        self.pairs.contains(&(left, right))
    }

    /// Pairs as `(left name, right name)`.
    pub fn named_pairs(&self) -> Vec<(&str, &str)> {
        self.pairs
            .iter()
            .map(|&(a, b)| (self.left.state_name(a), self.right.state_name(b)))
            .collect()
    }

    /// Swaps the systems and flips every pair.
    pub fn invert(&self) -> StatePairRelation {
        StatePairRelation {
            left: self.right.clone(),
            right: self.left.clone(),
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }
}

/// One violated clause together with a concrete falsifying witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseViolation {
    pub clause: &'static str,
    pub witness: String,
}

/// Outcome of a relation check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationDiagnosis {
    pub violations: Vec<ClauseViolation>,
}

impl RelationDiagnosis {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Labels of the violated clauses.
    pub fn clauses(&self) -> BTreeSet<&'static str> {
        self.violations.iter().map(|v| v.clause).collect()
    }

    fn record(&mut self, clause: &'static str, witness: Option<String>) {
        if let Some(witness) = witness {
            self.violations.push(ClauseViolation { clause, witness });
        }
    }
}

impl fmt::Display for RelationDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(f, "holds");
        }
        writeln!(f, "fails")?;
        for v in &self.violations {
            writeln!(f, "  clause {}: {}", v.clause, v.witness)?;
        }
        Ok(())
    }
}

/// The relation seen from one side: `a` is the system being matched, `b` the
/// one providing matches.
struct View<'a> {
    a: &'a TransitionSystem,
    b: &'a TransitionSystem,
    related: Vec<Vec<usize>>,
    input_map: Vec<Option<usize>>,
    a_label: &'static str,
}

impl<'a> View<'a> {
    fn forward(rel: &'a StatePairRelation) -> Self {
        let mut related = vec![Vec::new(); rel.left.num_states()];
        for &(x, y) in &rel.pairs {
            related[x].push(y);
        }
        Self::with(&rel.left, &rel.right, related, "left")
    }

    fn backward(rel: &'a StatePairRelation) -> Self {
        let mut related = vec![Vec::new(); rel.right.num_states()];
        for &(x, y) in &rel.pairs {
            related[y].push(x);
        }
        for r in related.iter_mut() {
            r.sort_unstable();
        }
        Self::with(&rel.right, &rel.left, related, "right")
    }

    fn with(
        a: &'a TransitionSystem,
        b: &'a TransitionSystem,
        related: Vec<Vec<usize>>,
        a_label: &'static str,
    ) -> Self {
        let input_map = a.inputs().iter().map(|u| b.input_index(u)).collect();
        View {
            a,
            b,
            related,
            input_map,
            a_label,
        }
    }

    fn is_related(&self, x: usize, y: usize) -> bool {
        self.related[x].binary_search(&y).is_ok()
    }

    /// Every initial `x` of `a` passing `a_secret` has a related initial `y`
    /// of `b` passing `b_secret`.
    fn initial_match(&self, a_secret: Option<bool>, b_secret: Option<bool>) -> Option<String> {
        let passes = |want: Option<bool>, is: bool| want.is_none_or(|w| w == is);
        let x = self.a.initial().iter().find(|&x| {
            passes(a_secret, self.a.is_secret(x))
                && !self.related[x]
                    .iter()
                    .any(|&y| self.b.is_initial(y) && passes(b_secret, self.b.is_secret(y)))
        })?;
        let kind = match b_secret {
            Some(true) => "secret initial",
            Some(false) => "non-secret initial",
            None => "initial",
        };
        Some(format!(
            "{} state {} has no related {kind} state",
            self.a_label,
            self.a.state_name(x)
        ))
    }

    /// Transition matching from related pairs. With `same_input` the match must
    /// use the identical input; with `target_secret` only transitions into
    /// targets of that secrecy are considered and must be matched likewise.
    fn step_match(&self, same_input: bool, target_secret: Option<bool>) -> Option<String> {
        for x in 0..self.a.num_states() {
            for &y in &self.related[x] {
                for (u, x2) in (0..self.a.num_inputs())
                    .flat_map(|u| self.a.successors(x, u).iter().map(move |&x2| (u, x2)))
                {
                    if let Some(s) = target_secret {
                        if self.a.is_secret(x2) != s {
                            continue;
                        }
                    }
                    let ok_target = |y2: usize| {
                        self.is_related(x2, y2)
                            && target_secret.is_none_or(|s| self.b.is_secret(y2) == s)
                    };
                    let matched = if same_input {
                        self.input_map[u].is_some_and(|v| {
                            self.b.successors(y, v).iter().any(|&y2| ok_target(y2))
                        })
                    } else {
                        (0..self.b.num_inputs())
                            .any(|v| self.b.successors(y, v).iter().any(|&y2| ok_target(y2)))
                    };
                    if !matched {
                        return Some(format!(
                            "{} {} -{}-> {} has no match from related {}",
                            self.a_label,
                            self.a.state_name(x),
                            self.a.input_name(u),
                            self.a.state_name(x2),
                            self.b.state_name(y)
                        ));
                    }
                }
            }
        }
        None
    }
}

fn output_match(rel: &StatePairRelation) -> Option<String> {
    rel.pairs.iter().find_map(|&(x, y)| {
        let (hx, hy) = (rel.left.output_name(x), rel.right.output_name(y));
        (hx != hy).then(|| {
            format!(
                "({}, {}) relates outputs {hx} and {hy}",
                rel.left.state_name(x),
                rel.right.state_name(y)
            )
        })
    })
}

/// Plain simulation from left to right; matching input may differ.
pub fn check_simulation(rel: &StatePairRelation) -> RelationDiagnosis {
    let f = View::forward(rel);
    let mut d = RelationDiagnosis::default();
    d.record("1", f.initial_match(None, None));
    d.record("2", output_match(rel));
    d.record("3", f.step_match(false, None));
    d
}

/// Plain bisimulation; matching input may differ.
pub fn check_bisimulation(rel: &StatePairRelation) -> RelationDiagnosis {
    let (f, b) = (View::forward(rel), View::backward(rel));
    let mut d = RelationDiagnosis::default();
    d.record("1a", f.initial_match(None, None));
    d.record("1b", b.initial_match(None, None));
    d.record("2", output_match(rel));
    d.record("3a", f.step_match(false, None));
    d.record("3b", b.step_match(false, None));
    d
}

/// Initial-state opacity preserving simulation from left to right.
pub fn check_initsop_simulation(rel: &StatePairRelation) -> RelationDiagnosis {
    let (f, b) = (View::forward(rel), View::backward(rel));
    let mut d = RelationDiagnosis::default();
    d.record("1a", f.initial_match(Some(false), Some(false)));
    d.record("1c", b.initial_match(Some(true), Some(true)));
    d.record("2", output_match(rel));
    d.record("2a", f.step_match(true, None));
    d.record("2c", b.step_match(true, None));
    d
}

fn initial_clauses(rel: &StatePairRelation, d: &mut RelationDiagnosis) {
    let (f, b) = (View::forward(rel), View::backward(rel));
    d.record("1a", f.initial_match(Some(true), Some(true)));
    d.record("1b", f.initial_match(Some(false), Some(false)));
    d.record("1c", b.initial_match(Some(true), Some(true)));
    d.record("1d", b.initial_match(Some(false), Some(false)));
}

/// Initial-state opacity preserving bisimulation.
pub fn check_initsop_bisimulation(rel: &StatePairRelation) -> RelationDiagnosis {
    let (f, b) = (View::forward(rel), View::backward(rel));
    let mut d = RelationDiagnosis::default();
    initial_clauses(rel, &mut d);
    d.record("2", output_match(rel));
    d.record("2a", f.step_match(true, None));
    d.record("2c", b.step_match(true, None));
    d
}

/// Infinite-step opacity preserving bisimulation: same-input matching that
/// also preserves the secrecy of the target.
pub fn check_infsop_bisimulation(rel: &StatePairRelation) -> RelationDiagnosis {
    let (f, b) = (View::forward(rel), View::backward(rel));
    let mut d = RelationDiagnosis::default();
    initial_clauses(rel, &mut d);
    d.record("2", output_match(rel));
    d.record("2a", f.step_match(true, Some(true)));
    d.record("2b", f.step_match(true, Some(false)));
    d.record("2c", b.step_match(true, Some(true)));
    d.record("2d", b.step_match(true, Some(false)));
    d
}
