//! K most vulnerable nodes: pick at most K entities to fail at t0 so the
//! final dead-set is as large as possible.
//!
//! Solvers, fastest to most general:
//! - [`solve_case1`]: closure ranking, optimal for one-literal equations.
//! - [`greedy`]: marginal-gain heuristic, any system.
//! - [`branch_and_bound`]: exact, any system.
//! - [`brute_force`]: exhaustive oracle for small instances.
//!
//! All of them break ties deterministically so repeated runs, including
//! runs with different worker counts, agree.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cascade::Network;
use crate::model::{classify, CaseClass, DependencySystem, ModelError};

mod case1;
mod cover;
mod search;

pub use case1::{solve_case1, transitive_closures, ClosureFamily};
pub use cover::{solve_subset_cover, CoverError, SubsetCoverInstance, SubsetCoverSolution};
pub use search::{branch_and_bound, brute_force, greedy};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("Case I solver requires Case I; system classifies {0}")]
    NotCaseI(CaseClass),
    #[error("budget {k} exceeds universe size {universe}")]
    BudgetTooLarge { k: usize, universe: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which solver produced an [`AttackResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Case1,
    Brute,
    Bnb,
    Greedy,
    /// recovered from an integer-program assignment
    Milp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Case1 => "case1",
            Method::Brute => "brute",
            Method::Bnb => "bnb",
            Method::Greedy => "greedy",
            Method::Milp => "milp",
        };
        f.write_str(s)
    }
}

/// Solver selection. `Auto` uses the Case I algorithm when it applies and
/// branch-and-bound otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Auto,
    Case1,
    Brute,
    Bnb,
    Greedy,
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Solver::Auto),
            "case1" => Ok(Solver::Case1),
            "brute" => Ok(Solver::Brute),
            "bnb" | "exact" => Ok(Solver::Bnb),
            "greedy" => Ok(Solver::Greedy),
            other => Err(format!("unknown method {other:?} (expected auto|case1|exact|bnb|greedy|brute)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackResult {
    pub initial_set: BTreeSet<String>,
    pub final_dead: BTreeSet<String>,
    pub kill_count: usize,
    pub method: Method,
}

impl AttackResult {
    pub(crate) fn from_seeds(net: &Network, seeds: &[usize], method: Method) -> AttackResult {
        let mut initial = net.empty_set();
        for &s in seeds {
            initial.insert(s);
        }
        let dead = net.final_dead(&initial);
        AttackResult {
            initial_set: net.names_of(&initial),
            kill_count: dead.count_ones(..),
            final_dead: net.names_of(&dead),
            method,
        }
    }
}

fn resolve(system: &DependencySystem, solver: Solver) -> Solver {
    match solver {
        Solver::Auto if classify(system) == CaseClass::CaseI => Solver::Case1,
        Solver::Auto => Solver::Bnb,
        s => s,
    }
}

pub fn solve(system: &DependencySystem, k: usize, solver: Solver) -> Result<AttackResult, SolveError> {
    match resolve(system, solver) {
        Solver::Case1 => solve_case1(system, k),
        Solver::Brute => brute_force(system, k),
        Solver::Bnb => branch_and_bound(system, k),
        Solver::Greedy => greedy(system, k),
        Solver::Auto => unreachable!("resolved above"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub kill_count: usize,
    pub initial_set: BTreeSet<String>,
}

/// Kill counts for K = 0..=k_max. Budgets are solved independently and in
/// parallel; the output order is by K.
pub fn sweep(system: &DependencySystem, k_max: usize, solver: Solver) -> Result<Vec<SweepPoint>, SolveError> {
    if k_max > system.len() {
        return Err(SolveError::BudgetTooLarge { k: k_max, universe: system.len() });
    }
    let solver = resolve(system, solver);
    if solver == Solver::Case1 && classify(system) != CaseClass::CaseI {
        return Err(SolveError::NotCaseI(classify(system)));
    }
    Network::compile(system)?;
    (0..=k_max)
        .into_par_iter()
        .map(|k| {
            solve(system, k, solver).map(|r| SweepPoint {
                k,
                kill_count: r.kill_count,
                initial_set: r.initial_set,
            })
        })
        .collect()
}

/// `k,kill_count,initial_set` with the set joined by `;`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("k,kill_count,initial_set\n");
    for p in points {
        let set: Vec<&str> = p.initial_set.iter().map(String::as_str).collect();
        out.push_str(&format!("{},{},{}\n", p.k, p.kill_count, set.join(";")));
    }
    out
}
