//! Polynomial solver for systems whose equations are single literals.
//!
//! Each implication `y <- x` is an edge x -> y; attacking x kills exactly the
//! entities reachable from x. Since every entity has at most one incoming
//! edge, reachability sets form a laminar family and picking the K largest
//! maximal sets is optimal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;

use super::{AttackResult, Method, SolveError};
use crate::cascade::Network;
use crate::model::{classify, CaseClass, DependencySystem};

/// Reflexive reachability set of every entity, keyed by seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureFamily {
    pub closures: BTreeMap<String, BTreeSet<String>>,
}

impl ClosureFamily {
    /// Seed pairs whose closures overlap without one containing the other.
    pub fn laminarity_violations(&self) -> Vec<(String, String)> {
        let entries: Vec<_> = self.closures.iter().collect();
        let mut out = Vec::new();
        for (i, (si, ci)) in entries.iter().enumerate() {
            for (sj, cj) in &entries[i + 1..] {
                let overlap = ci.intersection(cj).count();
                if overlap != 0 && overlap != ci.len() && overlap != cj.len() {
                    out.push(((*si).clone(), (*sj).clone()));
                }
            }
        }
        out
    }

    pub fn is_laminar(&self) -> bool {
        self.laminarity_violations().is_empty()
    }
}

fn require_case1(system: &DependencySystem) -> Result<Network, SolveError> {
    let class = classify(system);
    if class != CaseClass::CaseI {
        return Err(SolveError::NotCaseI(class));
    }
    Ok(Network::compile(system)?)
}

fn closure_bits(net: &Network) -> Vec<FixedBitSet> {
    let n = net.len();
    let mut succ = vec![Vec::new(); n];
    for y in 0..n {
        for minterm in net.minterms_of(y) {
            for &x in minterm {
                succ[x].push(y);
            }
        }
    }
    (0..n)
        .map(|seed| {
            let mut seen = FixedBitSet::with_capacity(n);
            seen.insert(seed);
            let mut queue = VecDeque::from([seed]);
            while let Some(x) = queue.pop_front() {
                for &y in &succ[x] {
                    if !seen.put(y) {
                        queue.push_back(y);
                    }
                }
            }
            seen
        })
        .collect()
}

pub fn transitive_closures(system: &DependencySystem) -> Result<ClosureFamily, SolveError> {
    let net = require_case1(system)?;
    let closures = closure_bits(&net)
        .iter()
        .enumerate()
        .map(|(i, c)| (net.name(i).to_owned(), net.names_of(c)))
        .collect();
    Ok(ClosureFamily { closures })
}

pub fn solve_case1(system: &DependencySystem, k: usize) -> Result<AttackResult, SolveError> {
    let net = require_case1(system)?;
    let n = net.len();
    let k = k.min(n);
    let closures = closure_bits(&net);

    // drop proper subsets, then keep one seed (the smallest name) per
    // distinct closure
    let mut ranked: Vec<usize> = (0..n)
        .filter(|&i| !closures.iter().any(|other| closures[i].is_subset(other) && closures[i] != *other))
        .filter(|&i| !(0..i).any(|j| closures[j] == closures[i]))
        .collect();
    ranked.sort_by_key(|&i| (std::cmp::Reverse(closures[i].count_ones(..)), i));

    let mut seeds: Vec<usize> = ranked.into_iter().take(k).collect();
    let mut dead = net.empty_set();
    for &s in &seeds {
        dead.union_with(&closures[s]);
    }
    // fewer distinct maximal closures than K: fill with surviving entities
    for (i, closure) in closures.iter().enumerate() {
        if seeds.len() >= k {
            break;
        }
        if !dead.contains(i) {
            seeds.push(i);
            dead.union_with(closure);
        }
    }
    Ok(AttackResult::from_seeds(&net, &seeds, Method::Case1))
}
