//! Graphviz rendering: secret states get a double border, initial states a
//! start arrow, and nodes read `state/output`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use opacity_core::observer::{Component, Observer};
use opacity_core::{Notion, TransitionSystem};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Parallel edges are merged into one edge with a comma-separated label.
fn edges(out: &mut String, list: impl IntoIterator<Item = (String, String, String)>) {
    let mut merged: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for (a, label, b) in list {
        merged.entry((a, b)).or_default().push(label);
    }
    for ((a, b), labels) in merged {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&a),
            quote(&b),
            quote(&labels.join(","))
        );
    }
}

fn start_arrow(out: &mut String, id: &str) {
    let start = format!("__start_{id}");
    let _ = writeln!(out, "  {} [shape=point, label=\"\"];", quote(&start));
    let _ = writeln!(out, "  {} -> {};", quote(&start), quote(id));
}

pub fn system_dot(sys: &TransitionSystem) -> String {
    let mut out = format!(
        "digraph {} {{\n  rankdir=LR;\n  node [shape=circle];\n",
        quote(sys.name())
    );
    for s in 0..sys.num_states() {
        let name = sys.state_name(s);
        let label = format!("{name}/{}", sys.output_name(s));
        let border = if sys.is_secret(s) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  {} [label={}{border}];", quote(name), quote(&label));
        if sys.is_initial(s) {
            start_arrow(&mut out, name);
        }
    }
    edges(
        &mut out,
        sys.transitions().map(|(a, u, b)| {
            (
                sys.state_name(a).to_owned(),
                sys.input_name(u).to_owned(),
                sys.state_name(b).to_owned(),
            )
        }),
    );
    out.push_str("}\n");
    out
}

/// Observer nodes are `{q1} | {q2}`; with a notion, offenders are filled.
pub fn observer_dot(obs: &Observer, notion: Option<Notion>) -> String {
    let sys = obs.source();
    let offenders = notion.map(|n| obs.offenders(n)).unwrap_or_default();
    let mut out = format!(
        "digraph {} {{\n  rankdir=LR;\n  node [shape=box];\n",
        quote(&format!("{}-observer", sys.name()))
    );
    for (i, st) in obs.states().iter().enumerate() {
        let id = format!("o{i}");
        let style = if offenders.contains(&i) {
            ", style=filled, fillcolor=\"#f4a6a6\", color=red"
        } else {
            ""
        };
        let _ = writeln!(out, "  {id} [label={}{style}];", quote(&st.describe(sys)));
        if obs.initial().contains(&i) {
            start_arrow(&mut out, &id);
        }
    }
    edges(
        &mut out,
        obs.transitions()
            .iter()
            .map(|(a, input, b)| (format!("o{a}"), input.describe(sys), format!("o{b}"))),
    );
    out.push_str("}\n");
    out
}

/// One subset-construction component on its own.
pub fn component_dot(sys: &TransitionSystem, comp: &Component, title: &str) -> String {
    let mut out = format!(
        "digraph {} {{\n  rankdir=LR;\n  node [shape=box];\n",
        quote(title)
    );
    for (i, node) in comp.nodes.iter().enumerate() {
        let id = format!("n{i}");
        let label = format!("{{{}}}", sys.names(node).join(","));
        let _ = writeln!(out, "  {id} [label={}];", quote(&label));
        if comp.roots.contains(&i) {
            start_arrow(&mut out, &id);
        }
    }
    edges(
        &mut out,
        comp.edges.iter().enumerate().flat_map(|(i, outs)| {
            outs.iter().map(move |&(u, j)| {
                (
                    format!("n{i}"),
                    sys.input_name(u).to_owned(),
                    format!("n{j}"),
                )
            })
        }),
    );
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use opacity_core::fixtures;
    use opacity_core::observer::build_two_way_observer;
    use opacity_core::SystemDef;

    #[test]
    fn example_system_conventions() {
        let dot = system_dot(&fixtures::example_2_1());
        assert!(dot.contains("\"b\" [label=\"b/"));
        assert_eq!(dot.matches("peripheries=2").count(), 1);
        assert!(dot
            .lines()
            .any(|l| l.contains("\"b\" [") && l.contains("peripheries=2")));
        assert_eq!(dot.matches("shape=point").count(), 3);
        assert_eq!(system_dot(&fixtures::example_2_1()), dot);
    }

    #[test]
    fn empty_transition_system_has_nodes_only() {
        let sys = SystemDef::new("lone")
            .states(["x", "y"])
            .initial(["x"])
            .inputs(["u"])
            .outputs(["o"])
            .map("x", "o")
            .map("y", "o")
            .build()
            .unwrap();
        let dot = system_dot(&sys);
        assert!(dot.contains("\"x\" [label=\"x/o\"]"));
        assert!(dot.contains("\"y\" [label=\"y/o\"]"));
        assert_eq!(dot.matches("->").count(), 1);
    }

    #[test]
    fn observer_offenders_are_highlighted() {
        let obs = build_two_way_observer(&fixtures::prop35_sigma2()).unwrap();
        let plain = observer_dot(&obs, None);
        assert!(!plain.contains("fillcolor"));
        let marked = observer_dot(&obs, Some(Notion::InitSO));
        assert!(!obs.offenders(Notion::InitSO).is_empty());
        assert_eq!(
            marked.matches("fillcolor").count(),
            obs.offenders(Notion::InitSO).len()
        );
        assert!(marked.contains(" | "));
    }
}
