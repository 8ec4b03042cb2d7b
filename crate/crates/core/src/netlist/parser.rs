//! Line-oriented netlist document format.
//!
//! ```text
//! # comment
//! node <id> [<id> ...]
//! cap <idA> <idB> <value_fF>              # idB may be gnd
//! jj <idA> <idB> [EJ=<value_GHz>] [modes=<minus>/<plus>]
//! drive <name> <source_node_id>
//! ```
//!
//! Node ids match [A-Za-z0-9_]+ with `gnd` reserved for ground. Values are
//! decimal literals or exact fractions `p/q`, parsed exactly to rationals.

use super::{
    is_valid_id, Capacitor, DrivePort, Junction, Netlist, NetlistError, GROUND,
};
use crate::ratmat::{exact_literal, rational_from_literal, Rational};
use num_traits::Zero;
use std::fmt::Write as _;

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: s + 1,
        });
    }
    tokens
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parse a netlist document. Every reported error carries the 1-based line
/// and column of the offending token.
pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
    let mut nodes: Vec<String> = Vec::new();
    let mut node_pos: Vec<(usize, usize)> = Vec::new();
    let mut capacitors: Vec<Capacitor> = Vec::new();
    let mut junctions: Vec<Junction> = Vec::new();
    let mut junction_pos: Vec<(usize, usize)> = Vec::new();
    let mut drives: Vec<DrivePort> = Vec::new();
    let mut drive_pos: Vec<(usize, usize)> = Vec::new();

    let declared = |nodes: &[String], id: &str| nodes.iter().any(|n| n == id);
    let junction_member =
        |junctions: &[Junction], id: &str| junctions.iter().any(|j| j.node_a == id || j.node_b == id);

    for (line_index, raw_line) in text.lines().enumerate() {
        let line_no = line_index + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        let keyword = &tokens[0];
        let args = &tokens[1..];
        match keyword.text {
            "node" => {
                if args.is_empty() {
                    return Err(parse_err(line_no, keyword.column, "node line needs at least one id"));
                }
                for tok in args {
                    if !is_valid_id(tok.text) || tok.text == GROUND {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("invalid node id `{}`", tok.text),
                        ));
                    }
                    if declared(&nodes, tok.text) {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("duplicate node `{}`", tok.text),
                        ));
                    }
                    nodes.push(tok.text.to_owned());
                    node_pos.push((line_no, tok.column));
                }
            }
            "cap" => {
                if args.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        keyword.column,
                        "cap line needs `cap <idA> <idB> <value_fF>`",
                    ));
                }
                for tok in &args[..2] {
                    if tok.text != GROUND && !declared(&nodes, tok.text) {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("unknown node `{}`", tok.text),
                        ));
                    }
                }
                if args[0].text == args[1].text {
                    return Err(parse_err(
                        line_no,
                        args[1].column,
                        format!("capacitor connects `{}` to itself", args[0].text),
                    ));
                }
                let value = rational_from_literal(args[2].text)
                    .map_err(|e| parse_err(line_no, args[2].column, e.to_string()))?;
                if value <= Rational::zero() {
                    return Err(parse_err(
                        line_no,
                        args[2].column,
                        "capacitance must be positive",
                    ));
                }
                capacitors.push(Capacitor {
                    node_a: args[0].text.to_owned(),
                    node_b: args[1].text.to_owned(),
                    value_ff: value,
                });
            }
            "jj" => {
                if args.len() < 2 {
                    return Err(parse_err(
                        line_no,
                        keyword.column,
                        "jj line needs `jj <idA> <idB> [EJ=<GHz>] [modes=<minus>/<plus>]`",
                    ));
                }
                let (a, b) = (&args[0], &args[1]);
                if a.text == GROUND {
                    return Err(parse_err(line_no, a.column, "junction first endpoint may not be `gnd`"));
                }
                for tok in [a, b] {
                    if tok.text != GROUND && !declared(&nodes, tok.text) {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("unknown node `{}`", tok.text),
                        ));
                    }
                }
                if a.text == b.text {
                    return Err(parse_err(line_no, b.column, "junction endpoints must differ"));
                }
                for tok in [a, b] {
                    if tok.text != GROUND && junction_member(&junctions, tok.text) {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("node `{}` participates in more than one junction", tok.text),
                        ));
                    }
                }
                let mut energy = None;
                let mut mode_labels = None;
                for tok in &args[2..] {
                    if let Some(lit) = tok.text.strip_prefix("EJ=") {
                        let value = rational_from_literal(lit)
                            .map_err(|e| parse_err(line_no, tok.column, e.to_string()))?;
                        if value <= Rational::zero() {
                            return Err(parse_err(line_no, tok.column, "EJ must be positive"));
                        }
                        energy = Some(value);
                    } else if let Some(spec) = tok.text.strip_prefix("modes=") {
                        if b.text == GROUND {
                            return Err(parse_err(
                                line_no,
                                tok.column,
                                "modes= is only valid on floating junctions",
                            ));
                        }
                        let Some((minus, plus)) = spec.split_once('/') else {
                            return Err(parse_err(line_no, tok.column, "modes= needs `<minus>/<plus>`"));
                        };
                        for label in [minus, plus] {
                            if !is_valid_id(label) || label == GROUND {
                                return Err(parse_err(
                                    line_no,
                                    tok.column,
                                    format!("invalid mode label `{label}`"),
                                ));
                            }
                        }
                        if minus == plus {
                            return Err(parse_err(line_no, tok.column, "mode labels must differ"));
                        }
                        mode_labels = Some((minus.to_owned(), plus.to_owned()));
                    } else {
                        return Err(parse_err(
                            line_no,
                            tok.column,
                            format!("unexpected token `{}`", tok.text),
                        ));
                    }
                }
                junctions.push(Junction {
                    node_a: a.text.to_owned(),
                    node_b: b.text.to_owned(),
                    josephson_energy_ghz: energy,
                    mode_labels,
                });
                junction_pos.push((line_no, keyword.column));
            }
            "drive" => {
                if args.len() != 2 {
                    return Err(parse_err(
                        line_no,
                        keyword.column,
                        "drive line needs `drive <name> <source_node_id>`",
                    ));
                }
                if !is_valid_id(args[0].text) {
                    return Err(parse_err(
                        line_no,
                        args[0].column,
                        format!("invalid drive name `{}`", args[0].text),
                    ));
                }
                if drives.iter().any(|d| d.name == args[0].text) {
                    return Err(parse_err(
                        line_no,
                        args[0].column,
                        format!("duplicate drive port `{}`", args[0].text),
                    ));
                }
                if !declared(&nodes, args[1].text) {
                    return Err(parse_err(
                        line_no,
                        args[1].column,
                        format!("unknown node `{}`", args[1].text),
                    ));
                }
                drives.push(DrivePort {
                    name: args[0].text.to_owned(),
                    source_node: args[1].text.to_owned(),
                });
                drive_pos.push((line_no, args[1].column));
            }
            other => {
                return Err(parse_err(
                    line_no,
                    keyword.column,
                    format!("unknown keyword `{other}` (expected node, cap, jj, or drive)"),
                ));
            }
        }
    }

    // Post checks that need the whole document.
    for (d, &(line, column)) in drives.iter().zip(&drive_pos) {
        if junction_member(&junctions, &d.source_node) {
            return Err(parse_err(
                line,
                column,
                format!("drive source `{}` participates in a junction", d.source_node),
            ));
        }
        let coupled = capacitors.iter().any(|c| {
            (c.node_a == d.source_node && c.node_b != GROUND)
                || (c.node_b == d.source_node && c.node_a != GROUND)
        });
        if !coupled {
            return Err(parse_err(
                line,
                column,
                format!("drive source `{}` has no capacitor to the rest of the circuit", d.source_node),
            ));
        }
    }
    if nodes.is_empty() {
        return Err(parse_err(1, 1, "netlist declares no nodes"));
    }

    // Coordinate label clash detection with positions: labels come from
    // junction-free node names and junction mode names.
    {
        let mut seen: Vec<(String, (usize, usize))> = Vec::new();
        let floating: Vec<usize> = (0..junctions.len())
            .filter(|&i| junctions[i].node_b != GROUND)
            .collect();
        let mut check = |label: String, pos: (usize, usize)| -> Result<(), NetlistError> {
            if let Some((_, first)) = seen.iter().find(|(l, _)| *l == label) {
                let (line, column) = pos.max(*first);
                return Err(parse_err(
                    line,
                    column,
                    format!("coordinate label `{label}` is used more than once"),
                ));
            }
            seen.push((label, pos));
            Ok(())
        };
        for (node, &pos) in nodes.iter().zip(&node_pos) {
            let junction = junctions
                .iter()
                .position(|j| (&j.node_a == node || &j.node_b == node) && j.node_b != GROUND);
            match junction {
                None => check(node.clone(), pos)?,
                Some(ji) => {
                    let order = floating.iter().position(|&f| f == ji).unwrap() + 1;
                    let (minus, plus) = match &junctions[ji].mode_labels {
                        Some((m, p)) => (m.clone(), p.clone()),
                        None => (format!("{order}m"), format!("{order}p")),
                    };
                    let label = if junctions[ji].node_a == *node { plus } else { minus };
                    check(label, junction_pos[ji])?;
                }
            }
        }
    }

    // Netlist::new re-validates everything; anything it still rejects has no
    // better position than the document start.
    Netlist::new(nodes, capacitors, junctions, drives)
        .map_err(|e| match e {
            NetlistError::Parse { .. } => e,
            other => parse_err(1, 1, other.to_string()),
        })
}

/// Render a netlist to the document format. `parse(render(n)) == n` for
/// every valid netlist.
pub fn render(netlist: &Netlist) -> String {
    let mut out = String::new();
    out.push_str("node");
    for n in netlist.nodes() {
        let _ = write!(out, " {n}");
    }
    out.push('\n');
    for c in netlist.capacitors() {
        let _ = writeln!(out, "cap {} {} {}", c.node_a, c.node_b, exact_literal(&c.value_ff));
    }
    for j in netlist.junctions() {
        let _ = write!(out, "jj {} {}", j.node_a, j.node_b);
        if let Some(ej) = &j.josephson_energy_ghz {
            let _ = write!(out, " EJ={}", exact_literal(ej));
        }
        if let Some((minus, plus)) = &j.mode_labels {
            let _ = write!(out, " modes={minus}/{plus}");
        }
        out.push('\n');
    }
    for d in netlist.drives() {
        let _ = writeln!(out, "drive {} {}", d.name, d.source_node);
    }
    out
}
