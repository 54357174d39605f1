//! Independent oracles shared by the integration suites. Nothing here calls
//! into the solvers or the compiled cascade network.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use iim::model::DependencySystem;

pub const TABLE_ONE: &str = "\
a1 <- b1 + b2
a2 <- b1*b3 + b2
a3 <- b1*b2*b3
a4 <- b1 + b2 + b3
b1 <- a1 + a2*a3
b2 <- a1 + a3
b3 <- a1*a2
";

pub fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Straight from the definition: an entity with an equation dies once
/// every minterm has a dead member; all deaths in a step are simultaneous.
pub fn naive_trace(system: &DependencySystem, initial: &BTreeSet<String>) -> Vec<BTreeSet<String>> {
    let mut steps = vec![initial.clone()];
    loop {
        let dead = steps.last().unwrap();
        let mut next = dead.clone();
        for eq in system.equations() {
            if eq.minterms().iter().all(|m| m.members().iter().any(|y| dead.contains(y))) {
                next.insert(eq.target.clone());
            }
        }
        if &next == dead {
            return steps;
        }
        steps.push(next);
    }
}

pub fn naive_final(system: &DependencySystem, initial: &BTreeSet<String>) -> BTreeSet<String> {
    naive_trace(system, initial).pop().unwrap()
}

/// Largest kill over every seed set of size exactly min(k, n).
pub fn naive_best(system: &DependencySystem, k: usize) -> usize {
    let names: Vec<String> = system.names().map(str::to_owned).collect();
    let k = k.min(names.len());
    let mut best = 0;
    for mask in 0u32..(1 << names.len()) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let seeds: BTreeSet<String> =
            (0..names.len()).filter(|i| mask >> i & 1 == 1).map(|i| names[i].clone()).collect();
        best = best.max(naive_final(system, &seeds).len());
    }
    best
}

/// Plain adjacency-list graph for the reduction oracles.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Every labelled simple graph on n vertices, by edge mask.
    pub fn all(n: usize) -> Vec<Graph> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        (0u64..(1 << pairs.len()))
            .map(|mask| Graph {
                n,
                edges: (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect(),
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                let w = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn min_vertex_cover(&self) -> usize {
        (0u32..(1 << self.n))
            .filter(|mask| self.edges.iter().all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1))
            .map(u32::count_ones)
            .min()
            .unwrap() as usize
    }

    pub fn has_clique(&self, k: usize) -> bool {
        let adj = |u: usize, v: usize| self.edges.iter().any(|&(a, b)| (a, b) == (u.min(v), u.max(v)));
        (0u32..(1 << self.n)).filter(|m| m.count_ones() as usize == k).any(|mask| {
            let vs: Vec<usize> = (0..self.n).filter(|i| mask >> i & 1 == 1).collect();
            vs.iter().enumerate().all(|(i, &u)| vs[i + 1..].iter().all(|&v| adj(u, v)))
        })
    }
}

/// Terms, relation and right-hand side of one LP row.
pub type LpRow = (Vec<(i64, String)>, String, i64);

/// What an LP file says, read back without reference to the model.
#[derive(Debug, Default)]
pub struct ParsedLp {
    pub objective: Vec<(i64, String)>,
    pub constraints: BTreeMap<String, LpRow>,
    pub binaries: Vec<String>,
}

fn parse_terms(text: &str) -> Result<Vec<(i64, String)>, String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut sign = 1;
    let mut coef: Option<i64> = None;
    for tok in tokens {
        match tok {
            "+" => sign = 1,
            "-" => sign = -1,
            "0" if out.is_empty() && coef.is_none() => {}
            t if t.chars().all(|c| c.is_ascii_digit()) => coef = Some(t.parse().map_err(|e| format!("{e}"))?),
            t => {
                if !t.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                    return Err(format!("bad token {t:?}"));
                }
                out.push((sign * coef.take().unwrap_or(1), t.to_owned()));
                sign = 1;
            }
        }
    }
    Ok(out)
}

pub fn parse_lp(text: &str) -> Result<ParsedLp, String> {
    let mut lp = ParsedLp::default();
    let mut section = "";
    let mut pending = String::new();
    let mut entries: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        match line.trim() {
            "Maximize" | "Subject To" | "Binary" | "End" => {
                if !pending.is_empty() {
                    entries.push((section.to_owned(), std::mem::take(&mut pending)));
                }
                section = match line.trim() {
                    "Maximize" => "max",
                    "Subject To" => "st",
                    "Binary" => "bin",
                    _ => "end",
                };
                continue;
            }
            _ => {}
        }
        if section == "bin" {
            lp.binaries.extend(line.split_whitespace().map(str::to_owned));
            continue;
        }
        if section == "end" || section.is_empty() {
            return Err(format!("text outside a section: {line:?}"));
        }
        // continuation lines start with three spaces
        if line.starts_with("   ") {
            pending.push(' ');
            pending.push_str(line.trim());
        } else {
            if !pending.is_empty() {
                entries.push((section.to_owned(), std::mem::take(&mut pending)));
            }
            pending = line.trim().to_owned();
        }
    }
    if section != "end" {
        return Err("missing End".into());
    }
    for (section, entry) in entries {
        let (name, body) = entry.split_once(':').ok_or_else(|| format!("unnamed row {entry:?}"))?;
        if section == "max" {
            lp.objective = parse_terms(body)?;
            continue;
        }
        let (op, pos) = ["<=", ">="]
            .iter()
            .find_map(|op| body.find(op).map(|p| (*op, p)))
            .ok_or_else(|| format!("no relation in {entry:?}"))?;
        let lhs = parse_terms(&body[..pos])?;
        let rhs: i64 = body[pos + 2..].trim().parse().map_err(|e| format!("rhs of {name}: {e}"))?;
        if lp.constraints.insert(name.trim().to_owned(), (lhs, op.to_owned(), rhs)).is_some() {
            return Err(format!("duplicate row {name}"));
        }
    }
    Ok(lp)
}
