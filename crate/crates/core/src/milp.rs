//! Time-expanded 0/1 program for K most vulnerable nodes, exported as LP
//! text for an external MILP solver.
//!
//! State variable `x_<e>_t<t>` is 1 when entity e is dead at step t, for
//! t = 0..H-1 with H = |universe| (a cascade reaches its fixed point within
//! H-1 steps). The objective counts dead entities at the last step.
//!
//! Constraints:
//! - `budget`: at most K entities dead at t0.
//! - `mono_<e>_t<t>`: the dead stay dead.
//! - `dep_<e>_t<t>` (and `aux_<e>_m<j>_t<t>`): e may be dead at t only if its
//!   equation was fully broken at t-1, or e was attacked at t0.
//!
//! Coupling by equation shape, T = number of minterms:
//! - no equation: `x_e(t) <= x_e(0)`
//! - one minterm: `x_e(t) <= sum of members(t-1) + x_e(0)`
//! - several single-literal minterms in a Case III system:
//!   `T x_e(t) <= sum of literals(t-1) + T x_e(0)`
//! - otherwise one auxiliary `m_<e>_<j>_t<t>` per minterm with
//!   `m_j(t) <= sum of members of j (t-1) + x_e(0)` and
//!   `T x_e(t) <= sum_j m_j(t) + T x_e(0)`

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::cascade::Network;
use crate::model::{classify, CaseClass, DependencySystem, Layer, ModelError};
use crate::vuln::{AttackResult, Method};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("assignment is missing variable {0}")]
    Missing(String),
    #[error("assignment names unknown variable {0}")]
    Unknown(String),
    #[error("variable {name} has non-binary value {value}")]
    NotBinary { name: String, value: i64 },
    #[error("constraint {0} is violated")]
    Infeasible(String),
    #[error("entity {0} is dead at the last step but the cascade does not kill it")]
    Inconsistent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// dead/alive state of the entity
    State,
    /// 1-based minterm index of the entity's equation; 1 means broken
    Minterm(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpVar {
    pub name: String,
    pub entity: String,
    /// A-side state variables are the x_i of the formulation, B-side the y_i
    pub layer: Layer,
    pub role: VarRole,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    /// (coefficient, variable index), variables distinct
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    fn holds(&self, values: &[i64]) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(c, v)| c * values[v]).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variables: Vec<MilpVar>,
    pub objective: Vec<usize>,
    pub constraints: Vec<Constraint>,
    pub budget: usize,
    pub horizon: usize,
    /// number of A entities (n) and B entities (m)
    pub n: usize,
    pub m: usize,
    by_name: HashMap<String, usize>,
    /// state variable index per (entity index, step)
    state: Vec<Vec<usize>>,
    /// aux variable index per (entity index, minterm, step); empty if unused
    aux: Vec<Vec<Vec<usize>>>,
    net: Network,
}

pub fn state_var_name(entity: &str, step: usize) -> String {
    format!("x_{entity}_t{step}")
}

pub fn aux_var_name(entity: &str, minterm: usize, step: usize) -> String {
    format!("m_{entity}_{minterm}_t{step}")
}

struct Builder {
    variables: Vec<MilpVar>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, v: MilpVar) -> usize {
        self.variables.push(v);
        self.variables.len() - 1
    }

    fn constraint(&mut self, name: String, terms: Vec<(i64, usize)>, sense: Sense, rhs: i64) {
        let mut merged: BTreeMap<usize, i64> = BTreeMap::new();
        let mut order = Vec::new();
        for (c, v) in terms {
            if !merged.contains_key(&v) {
                order.push(v);
            }
            *merged.entry(v).or_default() += c;
        }
        let terms = order
            .into_iter()
            .filter_map(|v| match merged[&v] {
                0 => None,
                c => Some((c, v)),
            })
            .collect();
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

pub fn build_model(system: &DependencySystem, k: usize) -> Result<MilpModel, ModelError> {
    let net = Network::compile(system)?;
    let size = net.len();
    let horizon = size;
    let use_direct_or = classify(system) == CaseClass::CaseIII;
    let mut b = Builder { variables: Vec::new(), constraints: Vec::new() };

    let mut state = vec![Vec::with_capacity(horizon); size];
    for (e, slots) in state.iter_mut().enumerate() {
        for t in 0..horizon {
            slots.push(b.var(MilpVar {
                name: state_var_name(net.name(e), t),
                entity: net.name(e).to_owned(),
                layer: net.layer(e),
                role: VarRole::State,
                step: t,
            }));
        }
    }

    let mut aux: Vec<Vec<Vec<usize>>> = vec![Vec::new(); size];
    for (e, per_minterm) in aux.iter_mut().enumerate() {
        let minterm_count = net.minterms_of(e).count();
        if minterm_count < 2 || use_direct_or {
            continue;
        }
        for j in 1..=minterm_count {
            let steps = (1..horizon)
                .map(|t| {
                    b.var(MilpVar {
                        name: aux_var_name(net.name(e), j, t),
                        entity: net.name(e).to_owned(),
                        layer: net.layer(e),
                        role: VarRole::Minterm(j),
                        step: t,
                    })
                })
                .collect();
            per_minterm.push(steps);
        }
    }

    let budget_terms = (0..size).map(|e| (1, state[e][0])).collect();
    b.constraint("budget".into(), budget_terms, Sense::Le, k as i64);

    for (e, slots) in state.iter().enumerate() {
        for t in 1..horizon {
            b.constraint(
                format!("mono_{}_t{t}", net.name(e)),
                vec![(1, slots[t]), (-1, slots[t - 1])],
                Sense::Ge,
                0,
            );
        }
    }

    for e in 0..size {
        let minterms: Vec<&[usize]> = net.minterms_of(e).collect();
        let name = net.name(e);
        let x0 = state[e][0];
        let big_t = minterms.len() as i64;
        for t in 1..horizon {
            let xt = state[e][t];
            if minterms.is_empty() {
                // nothing can kill a root except the attack itself
                b.constraint(format!("dep_{name}_t{t}"), vec![(1, xt), (-1, x0)], Sense::Le, 0);
            } else if minterms.len() == 1 {
                let mut terms = vec![(1, xt)];
                terms.extend(minterms[0].iter().map(|&y| (-1, state[y][t - 1])));
                terms.push((-1, x0));
                b.constraint(format!("dep_{name}_t{t}"), terms, Sense::Le, 0);
            } else if aux[e].is_empty() {
                let mut terms = vec![(big_t, xt)];
                terms.extend(minterms.iter().flat_map(|m| m.iter().map(|&y| (-1, state[y][t - 1]))));
                terms.push((-big_t, x0));
                b.constraint(format!("dep_{name}_t{t}"), terms, Sense::Le, 0);
            } else {
                for (j, members) in minterms.iter().enumerate() {
                    let mj = aux[e][j][t - 1];
                    let mut terms = vec![(1, mj)];
                    terms.extend(members.iter().map(|&y| (-1, state[y][t - 1])));
                    terms.push((-1, x0));
                    b.constraint(format!("aux_{name}_m{}_t{t}", j + 1), terms, Sense::Le, 0);
                }
                let mut terms = vec![(big_t, xt)];
                terms.extend(aux[e].iter().map(|steps| (-1, steps[t - 1])));
                terms.push((-big_t, x0));
                b.constraint(format!("dep_{name}_t{t}"), terms, Sense::Le, 0);
            }
        }
    }

    let objective =
        if horizon == 0 { Vec::new() } else { (0..size).map(|e| state[e][horizon - 1]).collect() };
    let by_name = b.variables.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect();
    Ok(MilpModel {
        variables: b.variables,
        objective,
        constraints: b.constraints,
        budget: k,
        horizon,
        n: system.layer_count(Layer::A),
        m: system.layer_count(Layer::B),
        by_name,
        state,
        aux,
        net,
    })
}

pub type Assignment = HashMap<String, i64>;

impl MilpModel {
    pub fn state_var_count(&self) -> usize {
        self.variables.iter().filter(|v| v.role == VarRole::State).count()
    }

    pub fn aux_var_count(&self) -> usize {
        self.variables.len() - self.state_var_count()
    }

    pub fn variable(&self, name: &str) -> Option<&MilpVar> {
        self.by_name.get(name).map(|&i| &self.variables[i])
    }

    fn values(&self, assignment: &Assignment) -> Result<Vec<i64>, MilpError> {
        if let Some(name) = assignment.keys().find(|n| !self.by_name.contains_key(*n)) {
            return Err(MilpError::Unknown(name.clone()));
        }
        self.variables
            .iter()
            .map(|v| match assignment.get(&v.name) {
                None => Err(MilpError::Missing(v.name.clone())),
                Some(&value) if value != 0 && value != 1 => {
                    Err(MilpError::NotBinary { name: v.name.clone(), value })
                }
                Some(&value) => Ok(value),
            })
            .collect()
    }

    /// First violated constraint, if any.
    pub fn check(&self, assignment: &Assignment) -> Result<(), MilpError> {
        let values = self.values(assignment)?;
        match self.constraints.iter().find(|c| !c.holds(&values)) {
            Some(c) => Err(MilpError::Infeasible(c.name.clone())),
            None => Ok(()),
        }
    }

    pub fn objective_value(&self, assignment: &Assignment) -> Result<i64, MilpError> {
        let values = self.values(assignment)?;
        Ok(self.objective.iter().map(|&v| values[v]).sum())
    }

    /// The assignment a cascade from `seeds` induces: states follow the
    /// synchronous trace, padded with the fixed point; a minterm variable
    /// is 1 when the minterm was broken at the previous step.
    pub fn assignment_from_seeds(&self, seeds: &BTreeSet<String>) -> Result<Assignment, MilpError> {
        let initial = self.net.set_from_names(seeds.iter().map(String::as_str))?;
        let trace = self.net.simulate(&initial);
        let at = |t: usize| &trace[t.min(trace.len() - 1)];
        let mut out = Assignment::with_capacity(self.variables.len());
        for (e, slots) in self.state.iter().enumerate() {
            for (t, &v) in slots.iter().enumerate() {
                out.insert(self.variables[v].name.clone(), at(t).contains(e) as i64);
            }
        }
        for (e, per_minterm) in self.aux.iter().enumerate() {
            let minterms: Vec<&[usize]> = self.net.minterms_of(e).collect();
            for (j, steps) in per_minterm.iter().enumerate() {
                for (i, &v) in steps.iter().enumerate() {
                    let prev = at(i);
                    let broken = minterms[j].iter().any(|&y| prev.contains(y));
                    out.insert(self.variables[v].name.clone(), broken as i64);
                }
            }
        }
        Ok(out)
    }

    /// Reads an attack back out of a feasible assignment and re-simulates it.
    pub fn map_assignment(&self, assignment: &Assignment) -> Result<AttackResult, MilpError> {
        self.check(assignment)?;
        let mut seeds = Vec::new();
        for (e, slots) in self.state.iter().enumerate() {
            if assignment[&self.variables[slots[0]].name] == 1 {
                seeds.push(e);
            }
        }
        let result = AttackResult::from_seeds(&self.net, &seeds, Method::Milp);
        if let Some(last) = self.horizon.checked_sub(1) {
            for slots in &self.state {
                let var = &self.variables[slots[last]];
                if assignment[&var.name] == 1 && !result.final_dead.contains(&var.entity) {
                    return Err(MilpError::Inconsistent(var.entity.clone()));
                }
            }
        }
        Ok(result)
    }
}

const TERMS_PER_LINE: usize = 8;

fn write_expr(out: &mut String, terms: &[(i64, usize)], vars: &[MilpVar]) {
    for (i, &(c, v)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { "-" } else { "+" };
        let mag = c.unsigned_abs();
        match (i, c < 0, mag) {
            (0, false, 1) => {}
            (0, false, _) => {
                let _ = write!(out, "{mag} ");
            }
            (0, true, 1) => out.push_str("- "),
            (_, _, 1) => {
                let _ = write!(out, " {sign} ");
            }
            (0, true, _) => {
                let _ = write!(out, "- {mag} ");
            }
            _ => {
                let _ = write!(out, " {sign} {mag} ");
            }
        }
        out.push_str(&vars[v].name);
    }
}

/// LP text: Maximize, Subject To, Binary, End. Byte-stable for a model.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::from("Maximize\n obj: ");
    if model.objective.is_empty() {
        out.push('0');
    } else {
        let terms: Vec<(i64, usize)> = model.objective.iter().map(|&v| (1, v)).collect();
        write_expr(&mut out, &terms, &model.variables);
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}: ", c.name);
        if c.terms.is_empty() {
            out.push('0');
        }
        write_expr(&mut out, &c.terms, &model.variables);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Binary\n");
    for chunk in model.variables.chunks(TERMS_PER_LINE) {
        let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqparse::parse_text;

    const TABLE_ONE: &str = "a1 <- b1 + b2\na2 <- b1*b3 + b2\na3 <- b1*b2*b3\na4 <- b1 + b2 + b3\n\
                             b1 <- a1 + a2*a3\nb2 <- a1 + a3\nb3 <- a1*a2\n";

    #[test]
    fn table_one_counts() {
        let s = parse_text(TABLE_ONE).unwrap();
        let model = build_model(&s, 1).unwrap();
        assert_eq!(model.horizon, 7);
        assert_eq!((model.n, model.m), (4, 3));
        assert_eq!(model.state_var_count(), 49);
        assert_eq!(model.aux_var_count(), 66);
        assert_eq!(model.constraints.iter().filter(|c| c.name == "budget").count(), 1);
        assert_eq!(model.constraints.iter().filter(|c| c.name.starts_with("mono_")).count(), 42);
        assert_eq!(model.objective.len(), 7);
    }

    #[test]
    fn single_entity_model() {
        let s = parse_text("A: a1").unwrap();
        let model = build_model(&s, 3).unwrap();
        assert_eq!(model.variables.len(), 1);
        assert_eq!(model.variables[0].name, "x_a1_t0");
        let lp = export_lp(&model);
        assert_eq!(lp, "Maximize\n obj: x_a1_t0\nSubject To\n budget: x_a1_t0 <= 3\nBinary\n x_a1_t0\nEnd\n");
    }

    #[test]
    fn disjunction_linearized_with_attack_term() {
        let s = parse_text("ai <- bj + bk").unwrap();
        assert_eq!(classify(&s), CaseClass::CaseIII);
        let model = build_model(&s, 1).unwrap();
        let lp = export_lp(&model);
        assert!(lp.contains(" dep_ai_t1: 2 x_ai_t1 - x_bj_t0 - x_bk_t0 - 2 x_ai_t0 <= 0\n"), "{lp}");
        assert_eq!(model.aux_var_count(), 0);
    }

    #[test]
    fn conjunction_sum_form() {
        let s = parse_text("vi <- vj*vk*vl\nA: vi vj vk vl").unwrap();
        let lp = export_lp(&build_model(&s, 1).unwrap());
        assert!(lp.contains(" dep_vi_t1: x_vi_t1 - x_vj_t0 - x_vk_t0 - x_vl_t0 - x_vi_t0 <= 0\n"), "{lp}");
    }

    #[test]
    fn roots_die_only_when_attacked() {
        let s = parse_text("a1 <- b1").unwrap();
        let model = build_model(&s, 0).unwrap();
        assert!(export_lp(&model).contains(" dep_b1_t1: x_b1_t1 - x_b1_t0 <= 0\n"));
        let mut asg = model.assignment_from_seeds(&BTreeSet::new()).unwrap();
        asg.insert("x_b1_t1".into(), 1);
        assert_eq!(model.check(&asg), Err(MilpError::Infeasible("dep_b1_t1".into())));
    }

    #[test]
    fn table_one_attack_on_a1_is_feasible_and_maps_back() {
        let s = parse_text(TABLE_ONE).unwrap();
        let model = build_model(&s, 1).unwrap();
        let seeds: BTreeSet<String> = ["a1".to_string()].into();
        let asg = model.assignment_from_seeds(&seeds).unwrap();
        model.check(&asg).unwrap();
        assert_eq!(model.objective_value(&asg).unwrap(), 7);
        let r = model.map_assignment(&asg).unwrap();
        assert_eq!(r.initial_set, seeds);
        assert_eq!(r.kill_count, 7);
    }

    #[test]
    fn all_zero_assignment_maps_to_empty_attack() {
        let s = parse_text(TABLE_ONE).unwrap();
        let model = build_model(&s, 0).unwrap();
        let asg: Assignment = model.variables.iter().map(|v| (v.name.clone(), 0)).collect();
        let r = model.map_assignment(&asg).unwrap();
        assert!(r.initial_set.is_empty());
        assert_eq!(r.kill_count, 0);
    }

    #[test]
    fn bad_assignments_rejected() {
        let s = parse_text(TABLE_ONE).unwrap();
        let model = build_model(&s, 1).unwrap();
        let mut asg: Assignment = model.variables.iter().map(|v| (v.name.clone(), 0)).collect();
        asg.remove("x_a1_t0");
        assert_eq!(model.map_assignment(&asg), Err(MilpError::Missing("x_a1_t0".into())));
        asg.insert("x_a1_t0".into(), 2);
        assert!(matches!(model.map_assignment(&asg), Err(MilpError::NotBinary { .. })));
        // two attacks over budget
        asg.insert("x_a1_t0".into(), 1);
        asg.insert("x_a2_t0".into(), 1);
        assert_eq!(model.map_assignment(&asg), Err(MilpError::Infeasible("budget".into())));
        // b3 claimed dead at t1 with nothing dead at t0
        let mut asg: Assignment = model.variables.iter().map(|v| (v.name.clone(), 0)).collect();
        for t in 1..7 {
            asg.insert(format!("x_b3_t{t}"), 1);
        }
        assert_eq!(model.map_assignment(&asg), Err(MilpError::Infeasible("dep_b3_t1".into())));
    }

    #[test]
    fn export_is_deterministic() {
        let s = parse_text(TABLE_ONE).unwrap();
        let a = export_lp(&build_model(&s, 1).unwrap());
        let b = export_lp(&build_model(&s, 1).unwrap());
        assert_eq!(a, b);
    }
}
