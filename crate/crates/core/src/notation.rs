//! Reader and writer for the compact system notation
//!
//! ```text
//! rank: start = clause | nominal_group | word.
//! number: (OR class_name wh_nominal) = singular | plural.
//! ```
//!
//! The `name:` prefix is optional; unnamed systems are called
//! `system-<line>`. `;` starts a comment.

use crate::entry::{Dnf, EntryExpr};
use crate::lattice::System;
use crate::types::TypeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct NotationError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Tok>| {
        if !cur.is_empty() {
            out.push(Tok::Word(std::mem::take(cur)));
        }
    };
    for ch in s.chars() {
        match ch {
            '(' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Open);
            }
            ')' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Close);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

fn parse_expr(toks: &[Tok], pos: &mut usize) -> Result<EntryExpr, String> {
    match toks.get(*pos) {
        Some(Tok::Word(w)) => {
            *pos += 1;
            Ok(EntryExpr::Atom(TypeId::new(w)))
        }
        Some(Tok::Open) => {
            *pos += 1;
            let op = match toks.get(*pos) {
                Some(Tok::Word(w)) => w.to_ascii_uppercase(),
                _ => return Err("expected AND or OR after `(`".into()),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match toks.get(*pos) {
                    Some(Tok::Close) => {
                        *pos += 1;
                        break;
                    }
                    None => return Err("unbalanced parentheses".into()),
                    _ => children.push(parse_expr(toks, pos)?),
                }
            }
            if children.is_empty() {
                return Err(format!("empty ({op})"));
            }
            match op.as_str() {
                "AND" => Ok(EntryExpr::And(children)),
                "OR" => Ok(EntryExpr::Or(children)),
                other => Err(format!("unknown connective {other}")),
            }
        }
        Some(Tok::Close) => Err("unexpected `)`".into()),
        None => Err("missing entry".into()),
    }
}

fn parse_line(text: &str, line: usize) -> Result<System, String> {
    let body = text.trim().strip_suffix('.').ok_or("statement must end with `.`")?;
    let (lhs, rhs) = body.split_once('=').ok_or("expected `entry = outputs`")?;
    let (name, entry_text) = match lhs.split_once(':') {
        Some((n, e)) => (n.trim().to_string(), e),
        None => (format!("system-{line}"), lhs),
    };
    if name.is_empty() {
        return Err("empty system name".into());
    }
    let toks = tokenize(entry_text);
    let mut pos = 0;
    let entry = parse_expr(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err("trailing tokens after entry".into());
    }
    let outputs: Vec<TypeId> = rhs.split('|').map(|o| o.trim()).map(TypeId::new).collect();
    if outputs.iter().any(|o| o.as_str().is_empty() || o.as_str().contains(char::is_whitespace)) {
        return Err("outputs must be single names separated by `|`".into());
    }
    Ok(System::new(&name, Dnf::from_expr(&entry), outputs))
}

/// Parses one system per statement. Statements may span lines.
pub fn parse_systems(text: &str) -> Result<Vec<System>, NotationError> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if buf.is_empty() {
            start = i + 1;
        } else {
            buf.push(' ');
        }
        buf.push_str(line);
        if line.ends_with('.') {
            let system = parse_line(&buf, start).map_err(|message| NotationError { line: start, message })?;
            out.push(system);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        return Err(NotationError { line: start, message: "statement must end with `.`".into() });
    }
    Ok(out)
}

pub fn format_system(s: &System) -> String {
    let entry = s
        .entry
        .to_compact_expr()
        .map(|e| e.to_string())
        .unwrap_or_else(|| "(OR)".into());
    let outputs: Vec<&str> = s.outputs.iter().map(TypeId::as_str).collect();
    format!("{}: {} = {}.", s.name, entry, outputs.join(" | "))
}
