//! Text format for dependency systems (`.iim`).
//!
//! ```text
//! # comment
//! A: gen_1 gen_2          # explicit layer declarations
//! B: tower_1
//! a1 <- b1*b3 + b2        # '*' is conjunction, '+' separates minterms
//! ```
//!
//! Layers come from declarations first, then from a leading `a`/`b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{DependencySystem, EntityId, Layer, LiveEquation, MinTerm};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Arrow,
    Plus,
    Star,
}

/// Tokens of one line with their 1-based columns. Comments are stripped.
fn lex(line: &str, lineno: usize) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'#' => break,
            b' ' | b'\t' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i + 1));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i + 1));
                i += 1;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') => {
                out.push((Tok::Arrow, i + 1));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(&line[start..i]), start + 1));
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(lineno, i + 1, format!("unexpected character {ch:?}")));
            }
        }
    }
    Ok(out)
}

struct RawEquation<'a> {
    line: usize,
    target: (&'a str, usize),
    minterms: Vec<Vec<(&'a str, usize)>>,
}

fn parse_equation<'a>(
    toks: &[(Tok<'a>, usize)],
    lineno: usize,
    eol: usize,
) -> Result<RawEquation<'a>, ParseError> {
    let target = match toks.first() {
        Some((Tok::Ident(name), col)) => (*name, *col),
        Some((_, col)) => return Err(ParseError::new(lineno, *col, "expected identifier")),
        None => unreachable!("blank lines are skipped"),
    };
    match toks.get(1) {
        Some((Tok::Arrow, _)) => {}
        Some((_, col)) => return Err(ParseError::new(lineno, *col, "expected '<-'")),
        None => return Err(ParseError::new(lineno, eol, "expected '<-'")),
    }
    let rhs = &toks[2..];
    if rhs.is_empty() {
        return Err(ParseError::new(lineno, eol, "empty right-hand side"));
    }

    let mut minterms = Vec::new();
    let mut current: Vec<(&str, usize)> = Vec::new();
    let mut expect_ident = true;
    for &(tok, col) in rhs {
        match (tok, expect_ident) {
            (Tok::Ident(name), true) => {
                if current.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::new(lineno, col, format!("duplicate member {name} in minterm")));
                }
                current.push((name, col));
                expect_ident = false;
            }
            (Tok::Star, false) => expect_ident = true,
            (Tok::Plus, false) => {
                minterms.push(std::mem::take(&mut current));
                expect_ident = true;
            }
            (Tok::Plus, true) => return Err(ParseError::new(lineno, col, "empty minterm")),
            (Tok::Star, true) => return Err(ParseError::new(lineno, col, "expected identifier after '*'")),
            (Tok::Ident(_), false) => {
                return Err(ParseError::new(lineno, col, "expected '*' or '+' between identifiers"))
            }
            (Tok::Arrow, _) => return Err(ParseError::new(lineno, col, "unexpected '<-'")),
        }
    }
    if expect_ident {
        return Err(ParseError::new(lineno, eol, "empty minterm"));
    }
    minterms.push(current);
    Ok(RawEquation { line: lineno, target, minterms })
}

/// Parses a rule file. Every mentioned name joins the universe.
pub fn parse_text(input: &str) -> Result<DependencySystem, ParseError> {
    let mut declared: BTreeMap<&str, Layer> = BTreeMap::new();
    let mut decl_order: Vec<(&str, usize, usize)> = Vec::new();
    let mut equations: Vec<RawEquation<'_>> = Vec::new();

    for (idx, raw_line) in input.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();

        let decl_layer = if trimmed.starts_with("A:") {
            Some(Layer::A)
        } else if trimmed.starts_with("B:") {
            Some(Layer::B)
        } else {
            None
        };
        if let Some(layer) = decl_layer {
            let body_offset = indent + 2;
            let toks = lex(&line[body_offset..], lineno)?;
            if toks.is_empty() {
                return Err(ParseError::new(lineno, body_offset + 1, "empty layer declaration"));
            }
            for (tok, col) in toks {
                let col = col + body_offset;
                match tok {
                    Tok::Ident(name) => {
                        if let Some(prev) = declared.insert(name, layer) {
                            if prev != layer {
                                return Err(ParseError::new(
                                    lineno,
                                    col,
                                    format!("{name} declared in both layers"),
                                ));
                            }
                        }
                        decl_order.push((name, lineno, col));
                    }
                    _ => return Err(ParseError::new(lineno, col, "expected identifier in declaration")),
                }
            }
            continue;
        }

        let toks = lex(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let eol = line.find('#').unwrap_or(line.len()) + 1;
        equations.push(parse_equation(&toks, lineno, eol)?);
    }

    let layer_of = |name: &str, line: usize, col: usize| -> Result<Layer, ParseError> {
        if let Some(l) = declared.get(name) {
            return Ok(*l);
        }
        match name.as_bytes()[0] {
            b'a' => Ok(Layer::A),
            b'b' => Ok(Layer::B),
            _ => Err(ParseError::new(line, col, format!("unknown layer for identifier {name}"))),
        }
    };

    let mut system = DependencySystem::new();
    for (name, line, col) in decl_order {
        let layer = layer_of(name, line, col)?;
        system
            .add_entity(EntityId::new(layer, name).map_err(|e| ParseError::new(line, col, e.to_string()))?)
            .map_err(|e| ParseError::new(line, col, e.to_string()))?;
    }

    let mut targets = BTreeSet::new();
    for raw in equations {
        let (target, tcol) = raw.target;
        if !targets.insert(target) {
            return Err(ParseError::new(raw.line, tcol, format!("duplicate left-hand side {target}")));
        }
        let names = std::iter::once((target, tcol)).chain(raw.minterms.iter().flatten().copied());
        for (name, col) in names {
            let layer = layer_of(name, raw.line, col)?;
            system
                .add_entity(
                    EntityId::new(layer, name).map_err(|e| ParseError::new(raw.line, col, e.to_string()))?,
                )
                .map_err(|e| ParseError::new(raw.line, col, e.to_string()))?;
        }
        let minterms = raw
            .minterms
            .iter()
            .map(|m| MinTerm::new(m.iter().map(|(n, _)| *n)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ParseError::new(raw.line, tcol, e.to_string()))?;
        let eq = LiveEquation::new(target, minterms)
            .map_err(|e| ParseError::new(raw.line, tcol, e.to_string()))?;
        system.add_equation(eq);
    }
    Ok(system)
}

const DECL_WRAP: usize = 16;

/// Deterministic text form: declarations for every entity (sorted, wrapped),
/// then equations sorted by target with sorted members.
pub fn serialize_text(system: &DependencySystem) -> String {
    let mut out = String::new();
    for layer in [Layer::A, Layer::B] {
        let names: Vec<&str> =
            system.entities().filter(|e| e.layer == layer).map(|e| e.name.as_str()).collect();
        for chunk in names.chunks(DECL_WRAP) {
            let _ = writeln!(out, "{layer}: {}", chunk.join(" "));
        }
    }
    let mut eqs: Vec<&LiveEquation> = system.equations().iter().collect();
    eqs.sort_by(|a, b| a.target.cmp(&b.target));
    if !eqs.is_empty() && !out.is_empty() {
        out.push('\n');
    }
    for eq in eqs {
        let minterms: Vec<String> = eq
            .minterms()
            .iter()
            .map(|m| {
                let mut members: Vec<&str> = m.members().iter().map(String::as_str).collect();
                members.sort_unstable();
                members.join("*")
            })
            .collect();
        let _ = writeln!(out, "{} <- {}", eq.target, minterms.join(" + "));
    }
    out
}
