//! Partitions, quotient systems and the two quotient conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::relations::{
    check_infsop_bisimulation, ClauseViolation, RelationDiagnosis, StatePairRelation,
};
use crate::stateset::StateSet;
use crate::system::{SystemDef, TransitionSystem};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub name: String,
    pub members: StateSet,
}

/// An equivalence relation on the states of `sys`, given by its blocks.
///
/// A partition may be malformed; [`validate_partition`] reports why.
#[derive(Clone, Debug)]
pub struct Partition {
    sys: Arc<TransitionSystem>,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PartitionViolation {
    #[error("block `{0}` is empty")]
    EmptyBlock(String),
    #[error("state `{state}` lies in blocks `{first}` and `{second}`")]
    Overlap {
        state: String,
        first: String,
        second: String,
    },
    #[error("state `{0}` is in no block")]
    Uncovered(String),
    #[error("block `{0}` mixes outputs")]
    MixedOutputs(String),
    #[error("block name `{0}` is used twice")]
    DuplicateName(String),
}

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("unknown state `{0}` in partition")]
    UnknownState(String),
    #[error("invalid partition: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<PartitionViolation>),
    #[error("partition is not secret-compatible: block `{0}` mixes secret and non-secret states")]
    NotSecretCompatible(String),
}

/// Member names joined with `+`, in canonical order.
pub fn canonical_block_name(sys: &TransitionSystem, members: &StateSet) -> String {
    sys.names(members).join("+")
}

impl Partition {
    /// Blocks are kept in canonical order of their member sets.
    pub fn new(sys: Arc<TransitionSystem>, blocks: impl IntoIterator<Item = Block>) -> Self {
        let mut blocks: Vec<Block> = blocks.into_iter().collect();
        blocks.sort_by(|a, b| a.members.cmp(&b.members).then_with(|| a.name.cmp(&b.name)));
        Partition { sys, blocks }
    }

    pub fn from_sets(sys: Arc<TransitionSystem>, sets: impl IntoIterator<Item = StateSet>) -> Self {
        let blocks: Vec<Block> = sets
            .into_iter()
            .map(|members| Block {
                name: canonical_block_name(&sys, &members),
                members,
            })
            .collect();
        Partition::new(sys, blocks)
    }

    pub fn from_names<I, B, S>(sys: Arc<TransitionSystem>, blocks: I) -> Result<Self, QuotientError>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::from_named_blocks(sys, blocks.into_iter().map(|b| (None::<String>, b)))
    }

    /// Blocks with an optional user-supplied name each.
    pub fn from_named_blocks<I, B, S>(
        sys: Arc<TransitionSystem>,
        blocks: I,
    ) -> Result<Self, QuotientError>
    where
        I: IntoIterator<Item = (Option<String>, B)>,
        B: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        for (name, ids) in blocks {
            let mut members = sys.empty_set();
            for id in ids {
                let id = id.as_ref();
                let s = sys
                    .state_index(id)
                    .ok_or_else(|| QuotientError::UnknownState(id.to_owned()))?;
                members.insert(s);
            }
            let name = name.unwrap_or_else(|| canonical_block_name(&sys, &members));
            out.push(Block { name, members });
        }
        Ok(Partition::new(sys, out))
    }

    /// One block per state.
    pub fn singletons(sys: Arc<TransitionSystem>) -> Self {
        let n = sys.num_states();
        Self::from_sets(sys, (0..n).map(|s| StateSet::from_indices(n, [s])))
    }

    /// Blocks from a block label per state; labels need not be contiguous.
    pub fn from_labels(sys: Arc<TransitionSystem>, labels: &[usize]) -> Self {
        let n = sys.num_states();
        let mut groups: BTreeMap<usize, StateSet> = BTreeMap::new();
        for (s, &l) in labels.iter().enumerate() {
            groups
                .entry(l)
                .or_insert_with(|| StateSet::empty(n))
                .insert(s);
        }
        Self::from_sets(sys, groups.into_values())
    }

    pub fn system(&self) -> &Arc<TransitionSystem> {
        &self.sys
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block containing `state`, first match if blocks overlap.
    pub fn block_of(&self, state: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.members.contains(state))
    }

    /// The induced equivalence on `sys`: all same-block pairs.
    pub fn self_relation(&self) -> StatePairRelation {
        let pairs = self.blocks.iter().flat_map(|b| {
            b.members
                .iter()
                .flat_map(move |x| b.members.iter().map(move |y| (x, y)))
        });
        StatePairRelation::new(
            self.sys.clone(),
            self.sys.clone(),
            pairs.collect::<Vec<_>>(),
        )
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", self.sys.names(&b.members).join(",")))
            .collect();
        write!(f, "{}", shown.join(" "))
    }
}

/// Lists coverage, overlap, emptiness, naming and output-homogeneity problems.
pub fn validate_partition(p: &Partition) -> Vec<PartitionViolation> {
    let sys = &p.sys;
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    let mut owner: Vec<Option<usize>> = vec![None; sys.num_states()];
    for (i, b) in p.blocks.iter().enumerate() {
        if b.members.is_empty() {
            out.push(PartitionViolation::EmptyBlock(b.name.clone()));
        }
        if !names.insert(b.name.as_str()) {
            out.push(PartitionViolation::DuplicateName(b.name.clone()));
        }
        for s in b.members.iter() {
            match owner[s] {
                Some(j) => out.push(PartitionViolation::Overlap {
                    state: sys.state_name(s).to_owned(),
                    first: p.blocks[j].name.clone(),
                    second: b.name.clone(),
                }),
                None => owner[s] = Some(i),
            }
        }
        let mut outputs = b.members.iter().map(|s| sys.output_of(s));
        if let Some(first) = outputs.next() {
            if outputs.any(|y| y != first) {
                out.push(PartitionViolation::MixedOutputs(b.name.clone()));
            }
        }
    }
    for (s, o) in owner.iter().enumerate() {
        if o.is_none() {
            out.push(PartitionViolation::Uncovered(sys.state_name(s).to_owned()));
        }
    }
    out
}

fn first_incompatible_block(p: &Partition) -> Option<&Block> {
    let secret = p.sys.secret();
    p.blocks
        .iter()
        .find(|b| !b.members.is_subset(secret) && !b.members.is_disjoint(secret))
}

/// Every block is entirely secret or entirely non-secret.
pub fn is_secret_compatible(p: &Partition) -> bool {
    first_incompatible_block(p).is_none()
}

fn require_valid(p: &Partition) -> Result<(), QuotientError> {
    let v = validate_partition(p);
    if v.is_empty() {
        Ok(())
    } else {
        Err(QuotientError::Invalid(v))
    }
}

fn require_secret_compatible(p: &Partition) -> Result<(), QuotientError> {
    require_valid(p)?;
    match first_incompatible_block(p) {
        Some(b) => Err(QuotientError::NotSecretCompatible(b.name.clone())),
        None => Ok(()),
    }
}

/// The quotient system: a block is initial (secret) iff it meets `X0` (`S`),
/// and `B --u--> B'` iff some member of `B` has a `u`-successor in `B'`.
pub fn build_quotient(p: &Partition) -> Result<TransitionSystem, QuotientError> {
    require_valid(p)?;
    let sys = &p.sys;
    let mut def = SystemDef::new(format!("{}-quotient", sys.name()))
        .states(p.blocks.iter().map(|b| b.name.clone()))
        .inputs(sys.inputs().iter().cloned())
        .outputs(sys.outputs().iter().cloned());
    for b in &p.blocks {
        let rep = b.members.first().expect("validated block is nonempty");
        def = def.map(b.name.clone(), sys.output_name(rep));
        if !b.members.is_disjoint(sys.initial()) {
            def.initial.push(b.name.clone());
        }
        if !b.members.is_disjoint(sys.secret()) {
            def.secret.push(b.name.clone());
        }
    }
    let mut edges = BTreeSet::new();
    for (x, u, y) in sys.transitions() {
        let (bx, by) = (p.block_of(x).unwrap(), p.block_of(y).unwrap());
        edges.insert((bx, u, by));
    }
    for (bx, u, by) in edges {
        def = def.trans(
            p.blocks[bx].name.clone(),
            sys.input_name(u),
            p.blocks[by].name.clone(),
        );
    }
    def.build()
        .map_err(|e| unreachable!("quotient of a valid partition is well formed: {e}"))
}

/// The quotient together with `{(x, [x])}`.
pub fn quotient_relation(
    p: &Partition,
) -> Result<(Arc<TransitionSystem>, StatePairRelation), QuotientError> {
    let q = Arc::new(build_quotient(p)?);
    let pairs: Vec<(usize, usize)> = (0..p.sys.num_states())
        .map(|x| {
            let b = &p.blocks[p.block_of(x).unwrap()];
            (x, q.state_index(&b.name).unwrap())
        })
        .collect();
    let rel = StatePairRelation::new(p.sys.clone(), q.clone(), pairs);
    Ok((q, rel))
}

/// Same-input matching between equivalent states: for `x ~ x'` and
/// `x --u--> x''`, some `x' --u--> x'''` lands in the block of `x''`.
///
/// The condition is only meaningful for secret-compatible partitions, so any
/// other partition is rejected.
pub fn check_eq1_condition(p: &Partition) -> Result<RelationDiagnosis, QuotientError> {
    require_secret_compatible(p)?;
    let sys = &p.sys;
    let block_of: Vec<usize> = (0..sys.num_states())
        .map(|s| p.block_of(s).unwrap())
        .collect();
    let mut diag = RelationDiagnosis::default();
    'search: for b in &p.blocks {
        for x in b.members.iter() {
            for x2 in b.members.iter() {
                for u in 0..sys.num_inputs() {
                    for &t in sys.successors(x, u) {
                        let matched = sys
                            .successors(x2, u)
                            .iter()
                            .any(|&t2| block_of[t2] == block_of[t]);
                        if !matched {
                            diag.violations.push(ClauseViolation {
                                clause: "eq1",
                                witness: format!(
                                    "{} -{}-> {} has no match from equivalent {} into block {}",
                                    sys.state_name(x),
                                    sys.input_name(u),
                                    sys.state_name(t),
                                    sys.state_name(x2),
                                    p.blocks[block_of[t]].name
                                ),
                            });
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    Ok(diag)
}

/// InfSOP bisimulation check of the induced equivalence against itself.
pub fn check_infsop_self(p: &Partition) -> Result<RelationDiagnosis, QuotientError> {
    require_secret_compatible(p)?;
    Ok(check_infsop_bisimulation(&p.self_relation()))
}

/// The coarsest secret-compatible, output-homogeneous partition whose induced
/// equivalence is an InfSOP bisimulation of `sys` with itself.
///
/// Signature refinement from the `(output, secret)` key; a state's signature
/// is its block plus the set of `(input, successor block)` pairs it can reach.
pub fn coarsest_infsop_partition(sys: Arc<TransitionSystem>) -> Partition {
    let n = sys.num_states();
    let mut labels = canonical_labels(
        &(0..n)
            .map(|s| (sys.output_of(s), sys.is_secret(s)))
            .collect::<Vec<_>>(),
    );
    loop {
        let sigs: Vec<(usize, BTreeSet<(usize, usize)>)> = (0..n)
            .map(|s| {
                let moves = (0..sys.num_inputs())
                    .flat_map(|u| sys.successors(s, u).iter().map(move |&t| (u, t)))
                    .map(|(u, t)| (u, labels[t]))
                    .collect();
                (labels[s], moves)
            })
            .collect();
        let next = canonical_labels(&sigs);
        let before = labels.iter().collect::<BTreeSet<_>>().len();
        let after = next.iter().collect::<BTreeSet<_>>().len();
        labels = next;
        if before == after {
            break;
        }
    }
    Partition::from_labels(sys, &labels)
}

/// Dense labels numbered by first occurrence of each distinct key.
fn canonical_labels<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: BTreeMap<K, usize> = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}
