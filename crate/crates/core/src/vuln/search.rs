use std::cmp::Reverse;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rayon::prelude::*;

use super::{AttackResult, Method, SolveError};
use crate::cascade::{DeadSet, Network, Propagator};
use crate::model::DependencySystem;

/// Every seed set of size exactly min(K, n). Ties go to the lexicographically
/// smallest sorted name list; entity indices follow name order, so comparing
/// index vectors is the same thing.
pub fn brute_force(system: &DependencySystem, k: usize) -> Result<AttackResult, SolveError> {
    let net = Network::compile(system)?;
    Ok(brute_force_on(&net, k))
}

pub(crate) fn brute_force_on(net: &Network, k: usize) -> AttackResult {
    let n = net.len();
    let k = k.min(n);
    if k == 0 {
        return AttackResult::from_seeds(net, &[], Method::Brute);
    }
    // one work unit per smallest seed
    let best = (0..=n - k)
        .into_par_iter()
        .map_init(
            || Propagator::new(net),
            |prop, first| {
                let mut best: Option<(usize, Vec<usize>)> = None;
                let mut initial = net.empty_set();
                for rest in (first + 1..n).combinations(k - 1) {
                    initial.clear();
                    initial.insert(first);
                    for &r in &rest {
                        initial.insert(r);
                    }
                    let count = prop.count(net, &initial);
                    if best.as_ref().is_none_or(|(c, _)| count > *c) {
                        let mut seeds = Vec::with_capacity(k);
                        seeds.push(first);
                        seeds.extend_from_slice(&rest);
                        best = Some((count, seeds));
                    }
                }
                best.expect("at least one combination")
            },
        )
        .reduce_with(|a, b| match a.0.cmp(&b.0) {
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Equal => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        })
        .expect("n >= k > 0");
    AttackResult::from_seeds(net, &best.1, Method::Brute)
}

/// Repeatedly attacks the surviving entity with the largest marginal gain.
pub fn greedy(system: &DependencySystem, k: usize) -> Result<AttackResult, SolveError> {
    let net = Network::compile(system)?;
    let seeds = greedy_seeds(&net, k, &mut Propagator::new(&net));
    Ok(AttackResult::from_seeds(&net, &seeds, Method::Greedy))
}

fn greedy_seeds(net: &Network, k: usize, prop: &mut Propagator) -> Vec<usize> {
    let mut seeds = Vec::new();
    let mut dead = net.empty_set();
    let mut probe = net.empty_set();
    for _ in 0..k.min(net.len()) {
        let mut best: Option<(usize, usize)> = None;
        for c in 0..net.len() {
            if dead.contains(c) {
                continue;
            }
            probe.clone_from(&dead);
            probe.insert(c);
            let count = prop.count(net, &probe);
            if best.is_none_or(|(_, b)| count > b) {
                best = Some((c, count));
            }
        }
        let Some((c, _)) = best else { break };
        seeds.push(c);
        dead.insert(c);
        dead = prop.run(net, &dead);
    }
    seeds
}

/// Exact optimum by depth-first search over seed sets.
///
/// Isolated roots (no equation, never a supporter) add exactly one kill each
/// and are used only to fill leftover budget. The remaining candidates are
/// tried in order of single-seed kill count. A node with chosen set S, dead
/// set D = final(S), r slots left and candidate pool P is cut when
///
/// `|D| + |nonroots in final(D ∪ P) \ D| + min(r, |roots in P| + isolated)`
///
/// cannot beat the incumbent: roots die only when attacked, and nothing
/// outside final(D ∪ P) can die in this subtree.
pub fn branch_and_bound(system: &DependencySystem, k: usize) -> Result<AttackResult, SolveError> {
    let net = Network::compile(system)?;
    Ok(branch_and_bound_on(&net, k))
}

pub(crate) fn branch_and_bound_on(net: &Network, k: usize) -> AttackResult {
    let n = net.len();
    let k = k.min(n);
    if k == n {
        let all: Vec<usize> = (0..n).collect();
        return AttackResult::from_seeds(net, &all, Method::Bnb);
    }
    let mut prop = Propagator::new(net);

    let isolated: Vec<usize> = (0..n).filter(|&i| net.is_isolated(i)).collect();
    let mut order: Vec<(usize, usize)> = (0..n)
        .filter(|&i| !net.is_isolated(i))
        .map(|i| {
            let mut s = net.empty_set();
            s.insert(i);
            (i, prop.count(net, &s))
        })
        .collect();
    order.sort_by_key(|&(i, gain)| (Reverse(gain), i));
    let order: Vec<usize> = order.into_iter().map(|(i, _)| i).collect();

    let mut roots = FixedBitSet::with_capacity(n);
    for i in 0..n {
        if net.is_root(i) {
            roots.insert(i);
        }
    }

    let incumbent = greedy_seeds(net, k, &mut prop);
    let mut start = net.empty_set();
    for &s in &incumbent {
        start.insert(s);
    }
    let best_value = prop.count(net, &start);

    let mut search =
        Search { net, prop, order, isolated, roots, best_value, best_seeds: incumbent, chosen: Vec::new() };
    search.dfs(&net.empty_set(), 0, k);
    AttackResult::from_seeds(net, &search.best_seeds, Method::Bnb)
}

struct Search<'a> {
    net: &'a Network,
    prop: Propagator,
    order: Vec<usize>,
    isolated: Vec<usize>,
    roots: FixedBitSet,
    best_value: usize,
    best_seeds: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, dead: &DeadSet, start: usize, slots: usize) {
        let dead_count = dead.count_ones(..);
        let fill = slots.min(self.isolated.len());
        if dead_count + fill > self.best_value {
            self.best_value = dead_count + fill;
            self.best_seeds = self.chosen.clone();
            self.best_seeds.extend_from_slice(&self.isolated[..fill]);
        }
        if slots == 0 || start >= self.order.len() {
            return;
        }

        let mut pool = dead.clone();
        let mut pool_roots = 0;
        for &c in &self.order[start..] {
            if !dead.contains(c) {
                pool.insert(c);
                if self.roots.contains(c) {
                    pool_roots += 1;
                }
            }
        }
        let reach = self.prop.run(self.net, &pool);
        let nonroot_gain = reach.ones().filter(|&i| !dead.contains(i) && !self.roots.contains(i)).count();
        let bound = dead_count + nonroot_gain + slots.min(pool_roots + self.isolated.len());
        if bound <= self.best_value {
            return;
        }

        let mut next = self.net.empty_set();
        for pos in start..self.order.len() {
            let c = self.order[pos];
            if dead.contains(c) {
                continue;
            }
            next.clone_from(dead);
            next.insert(c);
            let next_dead = self.prop.run(self.net, &next);
            self.chosen.push(c);
            self.dfs(&next_dead, pos + 1, slots - 1);
            self.chosen.pop();
        }
    }
}
