//! Reference systems, relations and partitions with known verdicts.
//!
//! Every fixture is small enough to check by hand. [`FixtureCatalog`] exposes
//! them by stable identifier for the command-line front end and the
//! acceptance suite.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::quotient::Partition;
use crate::relations::StatePairRelation;
use crate::system::{SystemDef, TransitionSystem};

fn all_initial(mut def: SystemDef) -> SystemDef {
    def.initial = def.states.clone();
    def
}

fn build(def: SystemDef) -> TransitionSystem {
    def.build().expect("fixture is well formed")
}

/// Three states, `S = {b}`, all initial.
pub fn example_2_1_def() -> SystemDef {
    SystemDef::new("example-2.1")
        .states(["a", "b", "c"])
        .initial(["a", "b", "c"])
        .secret(["b"])
        .inputs(["0", "1"])
        .outputs(["0", "1"])
        .map("a", "0")
        .map("b", "1")
        .map("c", "1")
        .trans("a", "1", "a")
        .trans("a", "0", "b")
        .trans("a", "0", "c")
        .trans("b", "0", "b")
        .trans("b", "1", "b")
        .trans("c", "0", "c")
        .trans("c", "1", "b")
}

pub fn example_2_1() -> TransitionSystem {
    build(example_2_1_def())
}

/// `names[i] --u--> names[(i+1) % n]` for every `u` in `inputs`.
fn cycle(mut def: SystemDef, names: &[&str], inputs: &[&str]) -> SystemDef {
    for (i, from) in names.iter().enumerate() {
        let to = names[(i + 1) % names.len()];
        for u in inputs {
            def = def.trans(*from, *u, to);
        }
    }
    def
}

fn alternating(name: &str, states: &[&str], secret: &[&str], inputs: &[&str]) -> SystemDef {
    let mut def = SystemDef::new(name)
        .states(states.iter().copied())
        .secret(secret.iter().copied())
        .inputs(inputs.iter().copied())
        .outputs(["1", "2"]);
    for (i, s) in states.iter().enumerate() {
        def = def.map(*s, if i % 2 == 0 { "1" } else { "2" });
    }
    all_initial(def)
}

/// Four-cycle `1' -> 2' -> 3' -> 4' -> 1'` with `S = {1'}`.
pub fn prop35_sigma1() -> TransitionSystem {
    let names = ["1'", "2'", "3'", "4'"];
    build(cycle(
        alternating("prop-3.5-sigma1", &names, &["1'"], &["1"]),
        &names,
        &["1"],
    ))
}

/// Two-cycle `1 -> 2 -> 1` with `S = {1}`.
pub fn prop35_sigma2() -> TransitionSystem {
    let names = ["1", "2"];
    build(cycle(
        alternating("prop-3.5-sigma2", &names, &["1"], &["1"]),
        &names,
        &["1"],
    ))
}

pub const PROP35_RELATION: [(&str, &str); 4] = [("1'", "1"), ("2'", "2"), ("3'", "1"), ("4'", "2")];

fn rem2_shape(name: &str, p: &str, secret: &[&str], initial: &[&str]) -> SystemDef {
    let n = |i: u32| format!("{i}{p}");
    let mut def = SystemDef::new(name)
        .states((1..=6).map(n))
        .initial(initial.iter().map(|s| format!("{s}{p}")))
        .secret(secret.iter().map(|s| format!("{s}{p}")))
        .inputs(["1"])
        .outputs(["1", "2", "3"]);
    for (i, y) in [(1, "1"), (2, "2"), (3, "1"), (4, "2"), (5, "3"), (6, "3")] {
        def = def.map(n(i), y);
    }
    for (a, b) in [
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 1),
        (1, 5),
        (5, 1),
        (5, 6),
        (6, 5),
        (6, 3),
        (3, 6),
    ] {
        def = def.trans(n(a), "1", n(b));
    }
    def
}

/// Six states; states 5 and 6 are not initial.
pub fn rem2_sigma1() -> TransitionSystem {
    build(rem2_shape("rem2-sigma1", "", &["1"], &["1", "2", "3", "4"]))
}

/// Same graph as [`rem2_sigma1`], all initial, `S = {5', 6'}`.
pub fn rem2_sigma2() -> TransitionSystem {
    build(rem2_shape(
        "rem2-sigma2",
        "'",
        &["5", "6"],
        &["1", "2", "3", "4", "5", "6"],
    ))
}

/// Σ2 shared by the rem3 and rem4 pairs: `1' -> 2'` under both inputs, the
/// rest of the cycle only under input 1.
fn rem34_sigma2(name: &str) -> TransitionSystem {
    let names = ["1'", "2'", "3'", "4'"];
    let def = alternating(name, &names, &["1'"], &["1", "2"])
        .trans("1'", "1", "2'")
        .trans("1'", "2", "2'")
        .trans("2'", "1", "3'")
        .trans("3'", "1", "4'")
        .trans("4'", "1", "1'");
    build(def)
}

/// Four-cycle under both inputs.
pub fn rem4_sigma1() -> TransitionSystem {
    let names = ["1", "2", "3", "4"];
    build(cycle(
        alternating("rem4-sigma1", &names, &["1"], &["1", "2"]),
        &names,
        &["1", "2"],
    ))
}

pub fn rem4_sigma2() -> TransitionSystem {
    rem34_sigma2("rem4-sigma2")
}

/// Four-cycle under input 1 only.
pub fn rem3_sigma1() -> TransitionSystem {
    let names = ["1", "2", "3", "4"];
    build(cycle(
        alternating("rem3-sigma1", &names, &["1"], &["1", "2"]),
        &names,
        &["1"],
    ))
}

pub fn rem3_sigma2() -> TransitionSystem {
    rem34_sigma2("rem3-sigma2")
}

/// `(k, k')` for `k` in `1..=n`.
pub fn primed_identity(n: usize) -> Vec<(String, String)> {
    (1..=n).map(|i| (i.to_string(), format!("{i}'"))).collect()
}

/// Eight-cycle with alternating outputs and `S = {1, 5}`.
pub fn exam4() -> TransitionSystem {
    let names = ["1", "2", "3", "4", "5", "6", "7", "8"];
    build(cycle(
        alternating("exam4", &names, &["1", "5"], &["1"]),
        &names,
        &["1"],
    ))
}

pub const EXAM4_BLOCKS: [[&str; 2]; 4] = [["1", "5"], ["2", "6"], ["3", "7"], ["4", "8"]];

/// The quotient of [`exam4`] by [`EXAM4_BLOCKS`], written out literally.
pub fn fig5_quotient() -> TransitionSystem {
    let names = ["1+5", "2+6", "3+7", "4+8"];
    build(cycle(
        alternating("exam4-quotient", &names, &["1+5"], &["1"]),
        &names,
        &["1"],
    ))
}

fn thm41(name: &str, outputs: &[(&str, &str)]) -> SystemDef {
    let mut def = SystemDef::new(name)
        .states(outputs.iter().map(|(s, _)| *s))
        .secret(["x1"])
        .inputs(["u1", "u2"]);
    let mut ys: Vec<&str> = outputs.iter().map(|(_, y)| *y).collect();
    ys.dedup();
    def = def.outputs(ys);
    for (s, y) in outputs {
        def = def.map(*s, *y);
    }
    all_initial(def)
}

/// CSO but neither InitSO nor KSO for any K.
pub fn fig7() -> TransitionSystem {
    build(
        thm41(
            "thm4.1-fig7",
            &[("x1", "y1"), ("x2", "y1"), ("x3", "y2"), ("x4", "y3")],
        )
        .trans("x3", "u1", "x1")
        .trans("x3", "u1", "x2")
        .trans("x3", "u1", "x3")
        .trans("x1", "u1", "x4")
        .trans("x1", "u2", "x4")
        .trans("x2", "u1", "x4")
        .trans("x4", "u1", "x4"),
    )
}

/// 1-step opaque but not K-step opaque for K > 1.
pub fn fig8() -> TransitionSystem {
    build(
        thm41(
            "thm4.1-fig8",
            &[
                ("x1", "y1"),
                ("x2", "y1"),
                ("x3", "y2"),
                ("x4", "y3"),
                ("x5", "y3"),
            ],
        )
        .trans("x3", "u1", "x1")
        .trans("x3", "u1", "x2")
        .trans("x3", "u1", "x3")
        .trans("x1", "u1", "x4")
        .trans("x2", "u1", "x5")
        .trans("x4", "u2", "x4")
        .trans("x5", "u1", "x5"),
    )
}

/// InitSO but not CSO.
pub fn fig9() -> TransitionSystem {
    build(
        thm41(
            "thm4.1-fig9",
            &[("x1", "y1"), ("x2", "y1"), ("x3", "y2"), ("x4", "y3")],
        )
        .trans("x3", "u1", "x1")
        .trans("x3", "u2", "x2")
        .trans("x3", "u1", "x3")
        .trans("x1", "u1", "x4")
        .trans("x2", "u1", "x4")
        .trans("x4", "u1", "x4"),
    )
}

/// 1-step and current-state opaque but not InitSO.
pub fn fig10() -> TransitionSystem {
    build(
        thm41(
            "thm4.1-fig10",
            &[
                ("x1", "y1"),
                ("x2", "y1"),
                ("x3", "y2"),
                ("x4", "y3"),
                ("x5", "y3"),
                ("x6", "y4"),
            ],
        )
        .trans("x3", "u1", "x1")
        .trans("x3", "u1", "x2")
        .trans("x3", "u1", "x3")
        .trans("x1", "u1", "x4")
        .trans("x2", "u1", "x5")
        .trans("x4", "u2", "x6")
        .trans("x5", "u1", "x6")
        .trans("x6", "u1", "x6"),
    )
}

pub const EQ5_REGIONS: [&str; 9] = ["A1", "A2", "B1", "B2", "C1", "C2", "D1", "D2", "E"];

/// Output of a region: A -> 1, B -> 2, C -> 3, D -> 4, E -> 5.
pub fn eq5_output(region: &str) -> &'static str {
    match region.as_bytes().first() {
        Some(b'A') => "1",
        Some(b'B') => "2",
        Some(b'C') => "3",
        Some(b'D') => "4",
        _ => "5",
    }
}

/// Successor region under the planar dynamics.
pub fn eq5_successor(region: &str) -> &'static str {
    match region {
        "A1" => "B1",
        "B1" => "C1",
        "C1" => "D1",
        "D1" => "A1",
        "A2" => "B2",
        "B2" => "C2",
        "C2" => "D2",
        "D2" => "A2",
        _ => "E",
    }
}

/// The nine-region quotient of the planar piecewise-linear system.
pub fn eq5_quotient() -> TransitionSystem {
    let mut def = SystemDef::new("eq5-quotient")
        .states(EQ5_REGIONS)
        .initial(EQ5_REGIONS)
        .secret(["A1"])
        .inputs(["u"])
        .outputs(["1", "2", "3", "4", "5"]);
    for r in EQ5_REGIONS {
        def = def.map(r, eq5_output(r)).trans(r, "u", eq5_successor(r));
    }
    build(def)
}

/// A relation fixture: left and right system ids plus the pairs.
#[derive(Clone, Debug)]
pub struct RelationFixture {
    pub left: &'static str,
    pub right: &'static str,
    pub pairs: Vec<(String, String)>,
}

/// A partition fixture over the system with id `system`.
#[derive(Clone, Debug)]
pub struct PartitionFixture {
    pub system: &'static str,
    pub blocks: Vec<Vec<String>>,
}

/// Every reference fixture, keyed by stable identifier.
#[derive(Clone, Debug)]
pub struct FixtureCatalog {
    systems: BTreeMap<&'static str, Arc<TransitionSystem>>,
    relations: BTreeMap<&'static str, RelationFixture>,
    partitions: BTreeMap<&'static str, PartitionFixture>,
}

impl Default for FixtureCatalog {
    fn default() -> Self {
        Self::new()
    }
}

impl FixtureCatalog {
    pub fn new() -> Self {
        let systems: Vec<(&'static str, TransitionSystem)> = vec![
            ("example-2.1", example_2_1()),
            ("prop-3.5-sigma1", prop35_sigma1()),
            ("prop-3.5-sigma2", prop35_sigma2()),
            ("rem2-sigma1", rem2_sigma1()),
            ("rem2-sigma2", rem2_sigma2()),
            ("rem4-sigma1", rem4_sigma1()),
            ("rem4-sigma2", rem4_sigma2()),
            ("rem3-sigma1", rem3_sigma1()),
            ("rem3-sigma2", rem3_sigma2()),
            ("exam4", exam4()),
            ("exam4-quotient", fig5_quotient()),
            ("thm4.1-fig7", fig7()),
            ("thm4.1-fig8", fig8()),
            ("thm4.1-fig9", fig9()),
            ("thm4.1-fig10", fig10()),
            ("eq5-quotient", eq5_quotient()),
        ];
        let owned = |pairs: &[(&str, &str)]| {
            pairs
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect()
        };
        let relations = BTreeMap::from([
            (
                "prop-3.5",
                RelationFixture {
                    left: "prop-3.5-sigma1",
                    right: "prop-3.5-sigma2",
                    pairs: owned(&PROP35_RELATION),
                },
            ),
            (
                "rem2",
                RelationFixture {
                    left: "rem2-sigma1",
                    right: "rem2-sigma2",
                    pairs: primed_identity(6),
                },
            ),
            (
                "rem4",
                RelationFixture {
                    left: "rem4-sigma1",
                    right: "rem4-sigma2",
                    pairs: primed_identity(4),
                },
            ),
            (
                "rem3",
                RelationFixture {
                    left: "rem3-sigma1",
                    right: "rem3-sigma2",
                    pairs: primed_identity(4),
                },
            ),
        ]);
        let partitions = BTreeMap::from([(
            "exam4",
            PartitionFixture {
                system: "exam4",
                blocks: EXAM4_BLOCKS
                    .iter()
                    .map(|b| b.iter().map(|s| s.to_string()).collect())
                    .collect(),
            },
        )]);
        FixtureCatalog {
            systems: systems
                .into_iter()
                .map(|(id, s)| (id, Arc::new(s)))
                .collect(),
            relations,
            partitions,
        }
    }

    /// System ids in canonical order.
    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.systems.keys().copied()
    }

    pub fn system(&self, id: &str) -> Option<Arc<TransitionSystem>> {
        self.systems.get(id).cloned()
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.relations.keys().copied()
    }

    pub fn relation_fixture(&self, id: &str) -> Option<&RelationFixture> {
        self.relations.get(id)
    }

    pub fn relation(&self, id: &str) -> Option<StatePairRelation> {
        let f = self.relations.get(id)?;
        let left = self.system(f.left)?;
        let right = self.system(f.right)?;
        StatePairRelation::from_names(
            left,
            right,
            f.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
        .ok()
    }

    pub fn partition_ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.partitions.keys().copied()
    }

    pub fn partition_fixture(&self, id: &str) -> Option<&PartitionFixture> {
        self.partitions.get(id)
    }

    pub fn partition(&self, id: &str) -> Option<Partition> {
        let f = self.partitions.get(id)?;
        let sys = self.system(f.system)?;
        Partition::from_names(
            sys,
            f.blocks
                .iter()
                .map(|b| b.iter().map(String::as_str).collect::<Vec<_>>()),
        )
        .ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{is_total, validate};

    #[test]
    fn every_fixture_validates() {
        let cat = FixtureCatalog::new();
        assert_eq!(cat.ids().count(), 16);
        for id in cat.ids() {
            let sys = cat.system(id).unwrap();
            assert!(validate(&sys.to_def()).is_empty(), "{id}");
            assert_eq!(sys.name(), id);
        }
        for id in cat.relation_ids() {
            assert!(cat.relation(id).is_some(), "{id}");
        }
        assert!(cat.partition("exam4").is_some());
    }

    #[test]
    fn totality_of_fixtures() {
        assert!(is_total(&exam4()));
        assert!(is_total(&eq5_quotient()));
        assert!(!is_total(&fig8()));
        assert!(!is_total(&rem4_sigma2()));
        assert_eq!(eq5_quotient().num_transitions(), 9);
    }

    #[test]
    fn rem2_initial_sets() {
        let s1 = rem2_sigma1();
        assert_eq!(s1.initial().len(), 4);
        assert!(!s1.is_initial(s1.state_index("5").unwrap()));
        let s2 = rem2_sigma2();
        assert_eq!(s2.secret(), &s2.set_of(["5'", "6'"]).unwrap());
    }
}
