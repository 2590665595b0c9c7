//! The LTSP text format: a line-oriented description of a transition
//! system and its initial partition.
//!
//! ```text
//! LTSP 1
//! states 3
//! actions a
//! transitions 3
//! 0 a 1
//! 1 a 2
//! 2 a 2
//! partition 2
//! 0 0 1
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use bisimlab::{Lts, Partition, Transition};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn serialize(lts: &Lts) -> String {
    let mut out = String::new();
    out.push_str("LTSP 1\n");
    let _ = writeln!(out, "states {}", lts.state_count());
    out.push_str("actions");
    for a in lts.actions() {
        out.push(' ');
        out.push_str(a);
    }
    out.push('\n');
    let _ = writeln!(out, "transitions {}", lts.transition_count());
    for t in lts.transitions() {
        let _ = writeln!(out, "{} {} {}", t.source, lts.actions()[t.action], t.target);
    }
    let pi = lts.initial_partition();
    let _ = writeln!(out, "partition {}", pi.block_count());
    let ids: Vec<String> = pi.assignment().iter().map(usize::to_string).collect();
    out.push_str(&ids.join(" "));
    out.push('\n');
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok((i + 1, line))
            }
            None => Err(ParseError {
                line: self.last + 1,
                message: format!("unexpected end of input, expected {what}"),
            }),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn number(line: usize, token: &str, what: &str) -> Result<usize, ParseError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(
            line,
            format!("{what} must be a natural number, found {token:?}"),
        ));
    }
    token
        .parse()
        .map_err(|_| err(line, format!("{what} is too large: {token}")))
}

/// `keyword <number>` header line.
fn header(lines: &mut Lines<'_>, keyword: &str) -> Result<usize, ParseError> {
    let (no, line) = lines.next(&format!("\"{keyword} <count>\""))?;
    let mut parts = line.split(' ');
    if parts.next() != Some(keyword) {
        return Err(err(no, format!("expected \"{keyword} <count>\"")));
    }
    let value = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return Err(err(no, format!("expected \"{keyword} <count>\"")));
    }
    number(no, value, keyword)
}

pub fn parse(text: &str) -> Result<Lts, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (no, magic) = lines.next("\"LTSP 1\"")?;
    if magic != "LTSP 1" {
        return Err(err(no, "expected \"LTSP 1\""));
    }
    let n = header(&mut lines, "states")?;

    let (no, line) = lines.next("\"actions ...\"")?;
    let mut parts = line.split(' ');
    if parts.next() != Some("actions") {
        return Err(err(no, "expected \"actions ...\""));
    }
    let actions: Vec<String> = parts.map(str::to_string).collect();
    let mut action_ids: HashMap<&str, usize> = HashMap::new();
    for (i, a) in actions.iter().enumerate() {
        if a.is_empty() || a.chars().any(char::is_whitespace) {
            return Err(err(no, format!("invalid action name {a:?}")));
        }
        if action_ids.insert(a, i).is_some() {
            return Err(err(no, format!("duplicate action name {a:?}")));
        }
    }

    let m = header(&mut lines, "transitions")?;
    let mut transitions = Vec::with_capacity(m.min(1 << 20));
    for _ in 0..m {
        let (no, line) = lines.next("a transition")?;
        let fields: Vec<&str> = line.split(' ').collect();
        let [src, action, dst] = fields[..] else {
            return Err(err(no, "expected \"<src> <action> <dst>\""));
        };
        let source = number(no, src, "source")?;
        let target = number(no, dst, "target")?;
        for s in [source, target] {
            if s >= n {
                return Err(err(no, format!("state {s} out of range (states {n})")));
            }
        }
        let action = *action_ids
            .get(action)
            .ok_or_else(|| err(no, format!("unknown action {action:?}")))?;
        transitions.push(Transition::new(source, action, target));
    }

    let blocks = header(&mut lines, "partition")?;
    let (no, line) = lines.next("the block assignment")?;
    let ids: Vec<usize> = if line.is_empty() {
        Vec::new()
    } else {
        line.split(' ')
            .map(|t| number(no, t, "block id"))
            .collect::<Result<_, _>>()?
    };
    if ids.len() != n {
        return Err(err(
            no,
            format!("expected {n} block ids, found {}", ids.len()),
        ));
    }
    if let Some(&b) = ids.iter().find(|&&b| b >= blocks) {
        return Err(err(
            no,
            format!("block id {b} out of range (partition {blocks})"),
        ));
    }
    let pi = Partition::from_block_of(ids).map_err(|e| err(no, e.to_string()))?;
    if pi.block_count() != blocks {
        return Err(err(
            no,
            format!(
                "partition declares {blocks} blocks, found {}",
                pi.block_count()
            ),
        ));
    }
    if let Some((extra, _)) = lines.inner.find(|(_, l)| !l.is_empty()) {
        return Err(err(extra + 1, "unexpected content after the partition"));
    }
    Lts::new(n, actions, transitions, pi).map_err(|e| err(no, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bisimlab::families::{gen_bisplitter, gen_sequential_splitter};

    #[test]
    fn round_trip_is_exact() {
        let lts = gen_sequential_splitter(3).unwrap();
        let text = serialize(&lts);
        assert_eq!(
            text,
            "LTSP 1\nstates 3\nactions a\ntransitions 3\n0 a 1\n1 a 2\n2 a 2\npartition 2\n0 0 1\n"
        );
        assert_eq!(parse(&text).unwrap(), lts);
        let b3 = gen_bisplitter(3).unwrap();
        assert_eq!(serialize(&parse(&serialize(&b3)).unwrap()), serialize(&b3));
    }

    #[test]
    fn empty_alphabet() {
        let lts = gen_bisplitter(1).unwrap();
        let text = serialize(&lts);
        assert!(text.contains("\nactions\n"));
        assert_eq!(parse(&text).unwrap(), lts);
    }

    #[test]
    fn errors_name_the_line() {
        let good = "LTSP 1\nstates 2\nactions a\ntransitions 1\n0 a 1\npartition 1\n0 0\n";
        assert!(parse(good).is_ok());
        let cases = [
            ("LTSP 2\n", 1),
            ("LTSP 1\nstates x\n", 2),
            ("LTSP 1\nstates 2\nactions a a\n", 3),
            ("LTSP 1\nstates 2\nactions a\ntransitions 1\n0 b 1\n", 5),
            ("LTSP 1\nstates 2\nactions a\ntransitions 1\n0 a 2\n", 5),
            ("LTSP 1\nstates 2\nactions a\ntransitions 2\n0 a 1\n", 6),
            (
                "LTSP 1\nstates 2\nactions a\ntransitions 0\npartition 2\n0 2\n",
                6,
            ),
            (
                "LTSP 1\nstates 2\nactions a\ntransitions 0\npartition 1\n0\n",
                6,
            ),
            (
                "LTSP 1\nstates 2\nactions a\ntransitions 0\npartition 3\n0 1\n",
                6,
            ),
            (
                "LTSP 1\nstates 2\nactions a\ntransitions 0\npartition 1\n0 0\nextra\n",
                7,
            ),
        ];
        for (text, line) in cases {
            assert_eq!(parse(text).unwrap_err().line, line, "{text:?}");
        }
    }
}
