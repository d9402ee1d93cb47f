//! Line-oriented text formats for systems, relations and partitions.
//!
//! `#` starts a comment anywhere on a line; blank lines are ignored.

use std::fmt::Write as _;
use std::sync::Arc;

use opacity_core::quotient::{canonical_block_name, Partition, QuotientError};
use opacity_core::relations::RelationError;
use opacity_core::system::{is_valid_identifier, SystemError};
use opacity_core::{StatePairRelation, SystemDef, TransitionSystem};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Partition(#[from] QuotientError),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// A whitespace-separated token with its 1-based column.
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Non-blank, comment-stripped lines as `(line number, tokens)`.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<Token<'_>>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, c) in body.char_indices().chain([(body.len(), ' ')]) {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &body[s..pos],
                        column: body[..s].chars().count() + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn ident<'a>(line: usize, t: &Token<'a>) -> Result<&'a str, FormatError> {
    if is_valid_identifier(t.text) {
        Ok(t.text)
    } else {
        Err(syntax(
            line,
            t.column,
            format!("invalid identifier `{}`", t.text),
        ))
    }
}

const LIST_HEADERS: [&str; 5] = ["states:", "initial:", "secret:", "inputs:", "outputs:"];

/// Parses the NTS format. Identifier references are checked against the
/// declarations seen so far, so most semantic errors carry a position too.
pub fn parse_nts(text: &str) -> Result<TransitionSystem, FormatError> {
    let mut it = lines(text);
    let (first_line, header) = it
        .next()
        .ok_or_else(|| syntax(1, 1, "empty input, expected `nts <name>`"))?;
    if header[0].text != "nts" || header.len() != 2 {
        return Err(syntax(
            first_line,
            header[0].column,
            "expected `nts <name>`",
        ));
    }
    let mut def = SystemDef::new(ident(first_line, &header[1])?);
    let mut seen = [false; 5];
    let mut ended = false;

    for (line, tokens) in it {
        if ended {
            return Err(syntax(line, tokens[0].column, "content after `end`"));
        }
        let head = &tokens[0];
        let args = &tokens[1..];
        let known = |list: &[String], t: &Token<'_>, kind: &str| -> Result<(), FormatError> {
            if list.iter().any(|x| x == t.text) {
                Ok(())
            } else {
                Err(syntax(
                    line,
                    t.column,
                    format!("unknown {kind} `{}`", t.text),
                ))
            }
        };
        if let Some(k) = LIST_HEADERS.iter().position(|h| *h == head.text) {
            if seen[k] {
                return Err(syntax(
                    line,
                    head.column,
                    format!("`{}` given twice", head.text),
                ));
            }
            seen[k] = true;
            let mut ids = Vec::with_capacity(args.len());
            for t in args {
                let id = ident(line, t)?.to_owned();
                if matches!(k, 1 | 2) && seen[0] {
                    known(&def.states, t, "state")?;
                }
                ids.push(id);
            }
            match k {
                0 => def.states = ids,
                1 => def.initial = ids,
                2 => def.secret = ids,
                3 => def.inputs = ids,
                _ => def.outputs = ids,
            }
            continue;
        }
        match head.text {
            "map:" => {
                if args.len() != 2 {
                    return Err(syntax(
                        line,
                        head.column,
                        "expected `map: <state> <output>`",
                    ));
                }
                let (s, y) = (ident(line, &args[0])?, ident(line, &args[1])?);
                if seen[0] {
                    known(&def.states, &args[0], "state")?;
                }
                if seen[4] {
                    known(&def.outputs, &args[1], "output")?;
                }
                if def.output_map.iter().any(|(x, _)| x == s) {
                    return Err(syntax(
                        line,
                        args[0].column,
                        format!("state `{s}` is mapped twice"),
                    ));
                }
                def.output_map.push((s.to_owned(), y.to_owned()));
            }
            "trans:" => {
                if args.len() != 3 {
                    return Err(syntax(
                        line,
                        head.column,
                        "expected `trans: <src> <input> <dst>`",
                    ));
                }
                let (a, u, b) = (
                    ident(line, &args[0])?,
                    ident(line, &args[1])?,
                    ident(line, &args[2])?,
                );
                if seen[0] {
                    known(&def.states, &args[0], "state")?;
                    known(&def.states, &args[2], "state")?;
                }
                if seen[3] {
                    known(&def.inputs, &args[1], "input")?;
                }
                def.transitions
                    .push((a.to_owned(), u.to_owned(), b.to_owned()));
            }
            "end" if args.is_empty() => ended = true,
            other => return Err(syntax(line, head.column, format!("unexpected `{other}`"))),
        }
    }
    if !ended {
        let last = text.lines().count().max(1);
        return Err(syntax(last, 1, "missing `end`"));
    }
    Ok(def.build()?)
}

fn list_line(out: &mut String, head: &str, ids: &[String]) {
    out.push_str(head);
    for id in ids {
        out.push(' ');
        out.push_str(id);
    }
    out.push('\n');
}

/// Canonical text: sections in fixed order, states and transitions in index
/// order. Round-trips through [`parse_nts`].
pub fn serialize_nts(sys: &TransitionSystem) -> String {
    let def = sys.to_def();
    let mut out = format!("nts {}\n", def.name);
    list_line(&mut out, "states:", &def.states);
    list_line(&mut out, "initial:", &def.initial);
    list_line(&mut out, "secret:", &def.secret);
    list_line(&mut out, "inputs:", &def.inputs);
    list_line(&mut out, "outputs:", &def.outputs);
    for (s, y) in &def.output_map {
        let _ = writeln!(out, "map: {s} {y}");
    }
    for (a, u, b) in &def.transitions {
        let _ = writeln!(out, "trans: {a} {u} {b}");
    }
    out.push_str("end\n");
    out
}

/// One `<left-state> <right-state>` pair per line.
pub fn parse_relation(
    text: &str,
    left: Arc<TransitionSystem>,
    right: Arc<TransitionSystem>,
) -> Result<StatePairRelation, FormatError> {
    let mut pairs = Vec::new();
    for (line, tokens) in lines(text) {
        if tokens.len() != 2 {
            return Err(syntax(
                line,
                tokens[0].column,
                "expected `<left-state> <right-state>`",
            ));
        }
        for (t, sys, side) in [(&tokens[0], &left, "left"), (&tokens[1], &right, "right")] {
            if sys.state_index(t.text).is_none() {
                return Err(syntax(
                    line,
                    t.column,
                    format!("unknown {side} state `{}`", t.text),
                ));
            }
        }
        pairs.push((tokens[0].text, tokens[1].text));
    }
    Ok(StatePairRelation::from_names(left, right, pairs)?)
}

pub fn serialize_relation(rel: &StatePairRelation) -> String {
    rel.named_pairs()
        .into_iter()
        .map(|(a, b)| format!("{a} {b}\n"))
        .collect()
}

/// One block per line, optionally prefixed by `<name>:`.
pub fn parse_partition(text: &str, sys: Arc<TransitionSystem>) -> Result<Partition, FormatError> {
    let mut blocks = Vec::new();
    for (line, tokens) in lines(text) {
        let (name, members) = match tokens[0].text.strip_suffix(':') {
            Some(n) => {
                let t = Token {
                    text: n,
                    column: tokens[0].column,
                };
                (Some(ident(line, &t)?.to_owned()), &tokens[1..])
            }
            None => (None, &tokens[..]),
        };
        if members.is_empty() {
            return Err(syntax(line, tokens[0].column, "empty block"));
        }
        for t in members {
            if sys.state_index(t.text).is_none() {
                return Err(syntax(
                    line,
                    t.column,
                    format!("unknown state `{}`", t.text),
                ));
            }
        }
        blocks.push((
            name,
            members
                .iter()
                .map(|t| t.text.to_owned())
                .collect::<Vec<_>>(),
        ));
    }
    Ok(Partition::from_named_blocks(sys, blocks)?)
}

/// Blocks with canonical names are written bare; others keep a name prefix.
pub fn serialize_partition(p: &Partition) -> String {
    let sys = p.system();
    let mut out = String::new();
    for b in p.blocks() {
        let members = sys.names(&b.members).join(" ");
        if b.name == canonical_block_name(sys, &b.members) {
            let _ = writeln!(out, "{members}");
        } else {
            let _ = writeln!(out, "{}: {members}", b.name);
        }
    }
    out
}
