//! DIMACS max-flow format: `c` comments, one `p max <nodes> <arcs>` line,
//! `n <id> s` / `n <id> t` designators, `a <tail> <head> <capacity>` arcs.
//! Node ids are 1-based in files, 0-based in memory.

use crate::network::{ArcKind, Instance, Network};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut source: Option<usize> = None;
    let mut sink: Option<usize> = None;
    let mut arcs: Vec<(usize, usize, u128)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        last_line = ln;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "p" => {
                if header.is_some() {
                    return err(ln, "duplicate problem line");
                }
                if fields.len() != 4 || fields[1] != "max" {
                    return err(ln, format!("expected 'p max <nodes> <arcs>', got '{line}'"));
                }
                let n: usize = fields[2]
                    .parse()
                    .map_err(|_| ParseError {
                        line: ln,
                        message: format!("bad node count '{}'", fields[2]),
                    })?;
                let m: usize = fields[3]
                    .parse()
                    .map_err(|_| ParseError {
                        line: ln,
                        message: format!("bad arc count '{}'", fields[3]),
                    })?;
                header = Some((n, m));
            }
            "n" => {
                let Some((n, _)) = header else {
                    return err(ln, "node designator before problem line");
                };
                if fields.len() != 3 {
                    return err(ln, format!("expected 'n <id> s|t', got '{line}'"));
                }
                let id: usize = fields[1].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad node id '{}'", fields[1]),
                })?;
                if id < 1 || id > n {
                    return err(ln, format!("node id {id} out of range 1..={n}"));
                }
                match fields[2] {
                    "s" => {
                        if source.is_some() {
                            return err(ln, "second source designator");
                        }
                        source = Some(id - 1);
                    }
                    "t" => {
                        if sink.is_some() {
                            return err(ln, "second sink designator");
                        }
                        sink = Some(id - 1);
                    }
                    other => return err(ln, format!("node designator must be s or t, got '{other}'")),
                }
            }
            "a" => {
                let Some((n, _)) = header else {
                    return err(ln, "arc before problem line");
                };
                if fields.len() != 4 {
                    return err(ln, format!("expected 'a <tail> <head> <cap>', got '{line}'"));
                }
                let tail: usize = fields[1].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad tail '{}'", fields[1]),
                })?;
                let head: usize = fields[2].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad head '{}'", fields[2]),
                })?;
                let cap: u128 = fields[3].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad capacity '{}'", fields[3]),
                })?;
                if tail < 1 || tail > n {
                    return err(ln, format!("tail {tail} out of range 1..={n}"));
                }
                if head < 1 || head > n {
                    return err(ln, format!("head {head} out of range 1..={n}"));
                }
                arcs.push((tail - 1, head - 1, cap));
            }
            other => return err(ln, format!("unknown line type '{other}'")),
        }
    }

    let Some((n, m)) = header else {
        return err(last_line.max(1), "missing problem line");
    };
    if arcs.len() != m {
        return err(
            last_line,
            format!("problem line promises {m} arcs, file has {}", arcs.len()),
        );
    }
    let Some(s) = source else {
        return err(last_line, "missing source designator");
    };
    let Some(t) = sink else {
        return err(last_line, "missing sink designator");
    };
    Ok(Instance { n, s, t, arcs })
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!("p max {} {}\n", inst.n, inst.arcs.len()));
    out.push_str(&format!("n {} s\n", inst.s + 1));
    out.push_str(&format!("n {} t\n", inst.t + 1));
    for &(i, j, c) in &inst.arcs {
        out.push_str(&format!("a {} {} {}\n", i + 1, j + 1, c));
    }
    out
}

/// Solution format: one `s <value>` line, then `f <tail> <head> <flow>` for
/// every input arc carrying positive flow, in network slot order.
pub fn write_solution(net: &Network, value: i128, flow: &[i128]) -> String {
    let mut out = String::new();
    out.push_str(&format!("s {value}\n"));
    for a in 0..net.arc_count() {
        if net.kind[a] == ArcKind::Input && flow[a] > 0 {
            out.push_str(&format!(
                "f {} {} {}\n",
                net.tail[a] + 1,
                net.head[a] + 1,
                flow[a]
            ));
        }
    }
    out
}

pub struct ParsedSolution {
    pub value: i128,
    pub flows: Vec<(usize, usize, i128)>,
}

pub fn parse_solution(text: &str) -> Result<ParsedSolution, ParseError> {
    let mut value: Option<i128> = None;
    let mut flows = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        last_line = ln;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "s" => {
                if value.is_some() {
                    return err(ln, "duplicate value line");
                }
                if fields.len() != 2 {
                    return err(ln, format!("expected 's <value>', got '{line}'"));
                }
                value = Some(fields[1].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad value '{}'", fields[1]),
                })?);
            }
            "f" => {
                if fields.len() != 4 {
                    return err(ln, format!("expected 'f <tail> <head> <flow>', got '{line}'"));
                }
                let tail: usize = fields[1].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad tail '{}'", fields[1]),
                })?;
                let head: usize = fields[2].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad head '{}'", fields[2]),
                })?;
                let amount: i128 = fields[3].parse().map_err(|_| ParseError {
                    line: ln,
                    message: format!("bad flow '{}'", fields[3]),
                })?;
                if tail < 1 || head < 1 {
                    return err(ln, "node ids are 1-based");
                }
                flows.push((tail - 1, head - 1, amount));
            }
            other => return err(ln, format!("unknown line type '{other}'")),
        }
    }
    let Some(value) = value else {
        return err(last_line.max(1), "missing value line");
    };
    Ok(ParsedSolution { value, flows })
}

/// Expands a parsed solution onto network arc slots. Flows on unknown arcs
/// (pairs the input never mentioned) are rejected.
pub fn solution_to_slots(net: &Network, sol: &ParsedSolution) -> Result<Vec<i128>, String> {
    let mut slot_of = std::collections::HashMap::new();
    for a in 0..net.arc_count() {
        if net.kind[a] == ArcKind::Input {
            slot_of.insert((net.tail[a] as usize, net.head[a] as usize), a);
        }
    }
    let mut flow = vec![0i128; net.arc_count()];
    for &(i, j, x) in &sol.flows {
        let Some(&a) = slot_of.get(&(i, j)) else {
            return Err(format!("flow on arc {} -> {} not in the instance", i + 1, j + 1));
        };
        flow[a] += x;
    }
    Ok(flow)
}

#[cfg(test)]
mod test {
    use super::*;
    use crate::oracle::oracle_max_flow;

    const SAMPLE: &str = "c tiny instance\np max 3 2\nn 1 s\nn 3 t\na 1 2 4\na 2 3 4\n";

    #[test]
    fn round_trip() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!((inst.s, inst.t), (0, 2));
        assert_eq!(inst.arcs, vec![(0, 1, 4), (1, 2, 4)]);
        let text = write_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: &[(&str, usize, &str)] = &[
            ("a 1 2 3\n", 1, "arc before problem line"),
            ("p max 3 1\np max 3 1\n", 2, "duplicate problem line"),
            ("p max 3 1\nn 4 s\n", 2, "out of range"),
            ("p max 3 1\nn 1 s\nn 2 s\n", 3, "second source"),
            ("p max 3 1\nn 1 s\nn 3 t\na 1 2 x\n", 4, "bad capacity"),
            ("p max 3 1\nn 1 s\nn 3 t\na 1 2 -3\n", 4, "bad capacity"),
            ("p max 3 2\nn 1 s\nn 3 t\na 1 2 4\n", 4, "promises 2 arcs"),
            ("p max 3 0\nn 1 s\n", 2, "missing sink"),
            ("q hello\n", 1, "unknown line type"),
        ];
        for (text, line, needle) in cases {
            let e = parse_instance(text).unwrap_err();
            assert_eq!(e.line, *line, "{text:?}");
            assert!(
                e.message.contains(needle),
                "{text:?}: got '{}', wanted '{needle}'",
                e.message
            );
        }
    }

    #[test]
    fn solution_round_trip() {
        let inst = parse_instance(SAMPLE).unwrap();
        let net = inst.build().unwrap();
        let (value, flow) = oracle_max_flow(&net);
        let text = write_solution(&net, value, &flow);
        assert!(text.starts_with("s 4\n"));
        let parsed = parse_solution(&text).unwrap();
        assert_eq!(parsed.value, 4);
        let slots = solution_to_slots(&net, &parsed).unwrap();
        assert_eq!(slots, flow);
        let zero = vec![0i128; net.arc_count()];
        assert_eq!(write_solution(&net, 0, &zero), "s 0\n");
    }

    #[test]
    fn solution_rejects_unknown_arc() {
        let inst = parse_instance(SAMPLE).unwrap();
        let net = inst.build().unwrap();
        let parsed = parse_solution("s 1\nf 3 1 1\n").unwrap();
        assert!(solution_to_slots(&net, &parsed).is_err());
    }
}
