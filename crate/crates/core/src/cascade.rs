//! Time-stepped cascading failure and its fixed point.
//!
//! [`Network`] is the compiled, index-based form of a [`DependencySystem`]:
//! entities are numbered in name order and minterms are bitsets, so one
//! propagation step is a handful of word operations per minterm.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::model::{DependencySystem, Layer, ModelError};

pub type DeadSet = FixedBitSet;

#[derive(Debug, Clone)]
struct Minterm {
    target: usize,
    members: Vec<usize>,
    mask: FixedBitSet,
}

#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    layers: Vec<Layer>,
    index: HashMap<String, usize>,
    minterms: Vec<Minterm>,
    /// minterm ids of each entity's equation; empty for roots
    rules: Vec<Vec<usize>>,
    /// minterm ids each entity is a member of
    occurs_in: Vec<Vec<usize>>,
}

impl Network {
    /// Fails on unknown entities or duplicate left-hand sides; same-layer
    /// supporters are accepted.
    pub fn compile(system: &DependencySystem) -> Result<Network, ModelError> {
        let names: Vec<String> = system.names().map(str::to_owned).collect();
        let layers = system.entities().map(|e| e.layer).collect();
        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let n = names.len();
        let lookup =
            |name: &str| index.get(name).copied().ok_or_else(|| ModelError::UnknownEntity(name.to_owned()));

        let mut minterms = Vec::new();
        let mut rules = vec![Vec::new(); n];
        let mut occurs_in = vec![Vec::new(); n];
        for eq in system.equations() {
            let target = lookup(&eq.target)?;
            if !rules[target].is_empty() {
                return Err(ModelError::DuplicateTarget(eq.target.clone()));
            }
            for m in eq.minterms() {
                let members = m.members().iter().map(|y| lookup(y)).collect::<Result<Vec<_>, _>>()?;
                let mut mask = FixedBitSet::with_capacity(n);
                for &y in &members {
                    mask.insert(y);
                }
                let id = minterms.len();
                for &y in &members {
                    occurs_in[y].push(id);
                }
                rules[target].push(id);
                minterms.push(Minterm { target, members, mask });
            }
        }
        Ok(Network { names, layers, index, minterms, rules, occurs_in })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn layer(&self, i: usize) -> Layer {
        self.layers[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.rules[i].is_empty()
    }

    /// Supporter lists of each minterm of entity `i`'s equation.
    pub fn minterms_of(&self, i: usize) -> impl Iterator<Item = &[usize]> {
        self.rules[i].iter().map(|&m| self.minterms[m].members.as_slice())
    }

    /// Root that appears in no minterm: attacking it kills exactly itself.
    pub fn is_isolated(&self, i: usize) -> bool {
        self.rules[i].is_empty() && self.occurs_in[i].is_empty()
    }

    pub fn empty_set(&self) -> DeadSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn set_from_names<'a, I>(&self, names: I) -> Result<DeadSet, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = self.empty_set();
        for name in names {
            let i = self.index_of(name).ok_or_else(|| ModelError::UnknownEntity(name.to_owned()))?;
            set.insert(i);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: &DeadSet) -> BTreeSet<String> {
        set.ones().map(|i| self.names[i].clone()).collect()
    }

    /// One synchronous application of the failure function.
    pub fn step(&self, dead: &DeadSet) -> DeadSet {
        let mut next = dead.clone();
        for (x, rule) in self.rules.iter().enumerate() {
            if rule.is_empty() || dead.contains(x) {
                continue;
            }
            if rule.iter().all(|&m| !self.minterms[m].mask.is_disjoint(dead)) {
                next.insert(x);
            }
        }
        next
    }

    /// Dead-sets t0..tp; the last one is the fixed point.
    pub fn simulate(&self, initial: &DeadSet) -> Vec<DeadSet> {
        let mut steps = vec![initial.clone()];
        loop {
            let next = self.step(steps.last().expect("non-empty"));
            if &next == steps.last().expect("non-empty") {
                return steps;
            }
            steps.push(next);
        }
    }

    /// Fixed point reached from `initial` via event-driven propagation.
    /// Same result as the last step of [`Network::simulate`], without the
    /// per-step rescans.
    pub fn final_dead(&self, initial: &DeadSet) -> DeadSet {
        let mut scratch = Propagator::new(self);
        scratch.run(self, initial)
    }
}

/// Reusable buffers for repeated fixed-point computations on one network.
#[derive(Debug, Clone)]
pub struct Propagator {
    broken: Vec<bool>,
    intact: Vec<u32>,
    queue: Vec<usize>,
}

impl Propagator {
    pub fn new(net: &Network) -> Self {
        Propagator { broken: vec![false; net.minterms.len()], intact: vec![0; net.len()], queue: Vec::new() }
    }

    pub fn run(&mut self, net: &Network, initial: &DeadSet) -> DeadSet {
        self.broken.fill(false);
        for (x, rule) in net.rules.iter().enumerate() {
            self.intact[x] = rule.len() as u32;
        }
        let mut dead = initial.clone();
        self.queue.clear();
        self.queue.extend(initial.ones());
        while let Some(y) = self.queue.pop() {
            for &m in &net.occurs_in[y] {
                if self.broken[m] {
                    continue;
                }
                self.broken[m] = true;
                let x = net.minterms[m].target;
                self.intact[x] -= 1;
                if self.intact[x] == 0 && !dead.contains(x) {
                    dead.insert(x);
                    self.queue.push(x);
                }
            }
        }
        dead
    }

    pub fn count(&mut self, net: &Network, initial: &DeadSet) -> usize {
        self.run(net, initial).count_ones(..)
    }
}

/// Dead-sets per time step, starting with the attacked set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeTrace {
    pub universe: Vec<String>,
    pub steps: Vec<BTreeSet<String>>,
    pub fixed_point_step: usize,
}

impl CascadeTrace {
    pub fn final_dead(&self) -> &BTreeSet<String> {
        self.steps.last().expect("trace has at least one step")
    }

    /// Step at which `name` died, if it did.
    pub fn death_step(&self, name: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.contains(name))
    }

    /// One row per entity, one 0/1 column per time step. The steady state is
    /// repeated so there are at least |universe| columns (t0..t_{n-1}).
    pub fn to_csv(&self) -> String {
        let columns = self.steps.len().max(self.universe.len()).max(1);
        let mut out = String::from("entity");
        for t in 0..columns {
            let _ = write!(out, ",t{t}");
        }
        out.push('\n');
        for name in &self.universe {
            out.push_str(name);
            for t in 0..columns {
                let step = &self.steps[t.min(self.steps.len() - 1)];
                out.push_str(if step.contains(name) { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

fn to_bits(net: &Network, dead: &BTreeSet<String>) -> Result<DeadSet, ModelError> {
    net.set_from_names(dead.iter().map(String::as_str))
}

pub fn step(system: &DependencySystem, dead: &BTreeSet<String>) -> Result<BTreeSet<String>, ModelError> {
    let net = Network::compile(system)?;
    let bits = to_bits(&net, dead)?;
    Ok(net.names_of(&net.step(&bits)))
}

pub fn simulate(
    system: &DependencySystem,
    initial_dead: &BTreeSet<String>,
) -> Result<CascadeTrace, ModelError> {
    let net = Network::compile(system)?;
    let bits = to_bits(&net, initial_dead)?;
    Ok(trace_of(&net, &bits))
}

pub fn trace_of(net: &Network, initial: &DeadSet) -> CascadeTrace {
    let steps: Vec<_> = net.simulate(initial).iter().map(|s| net.names_of(s)).collect();
    CascadeTrace { universe: net.names().to_vec(), fixed_point_step: steps.len() - 1, steps }
}

pub fn final_dead(
    system: &DependencySystem,
    initial_dead: &BTreeSet<String>,
) -> Result<BTreeSet<String>, ModelError> {
    let net = Network::compile(system)?;
    let bits = to_bits(&net, initial_dead)?;
    Ok(net.names_of(&net.final_dead(&bits)))
}
