//! Entities, live and death equations, and the dependency system that ties
//! them together.
//!
//! A [`DependencySystem`] is plain data: it can hold structurally broken
//! content (duplicate left-hand sides, unknown members) so that [`validate`]
//! can report every problem at once. Analyses compile it into a
//! [`crate::cascade::Network`], which refuses broken input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("entity {name} already declared in layer {existing}")]
    LayerConflict { name: String, existing: Layer },
    #[error("empty minterm")]
    EmptyMinTerm,
    #[error("duplicate member {0} in minterm")]
    DuplicateMember(String),
    #[error("live equation for {0} has no minterms")]
    EmptyEquation(String),
    #[error("entity not in universe: {0}")]
    UnknownEntity(String),
    #[error("duplicate left-hand side {0}")]
    DuplicateTarget(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    A,
    B,
}

impl Layer {
    pub fn other(self) -> Layer {
        match self {
            Layer::A => Layer::B,
            Layer::B => Layer::A,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::A => f.write_str("A"),
            Layer::B => f.write_str("B"),
        }
    }
}

/// Infrastructure role of an entity. Only rule generation assigns these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Generator,
    Load,
    TransmissionLine,
    CellTower,
    FiberBuilding,
    FiberLink,
    Generic,
}

/// Leading letter or underscore, then letters, digits or underscores.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityId {
    pub layer: Layer,
    pub name: String,
    pub kind: Option<Kind>,
}

impl EntityId {
    pub fn new(layer: Layer, name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(ModelError::InvalidIdentifier(name));
        }
        Ok(EntityId { layer, name, kind: None })
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = Some(kind);
        self
    }
}

/// A conjunction of supporting entities. Broken as soon as one member dies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinTerm {
    members: Vec<String>,
}

impl MinTerm {
    pub fn new<I, S>(members: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let members: Vec<String> = members.into_iter().map(Into::into).collect();
        if members.is_empty() {
            return Err(ModelError::EmptyMinTerm);
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.as_str()) {
                return Err(ModelError::DuplicateMember(m.clone()));
            }
        }
        Ok(MinTerm { members })
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_set(&self) -> BTreeSet<&str> {
        self.members.iter().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.members.iter().any(|m| m == name)
    }
}

/// `target <- m1 + m2 + ...`: the target can only be operational while at
/// least one minterm has every member operational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEquation {
    pub target: String,
    minterms: Vec<MinTerm>,
}

impl LiveEquation {
    pub fn new(target: impl Into<String>, minterms: Vec<MinTerm>) -> Result<Self, ModelError> {
        let target = target.into();
        if minterms.is_empty() {
            return Err(ModelError::EmptyEquation(target));
        }
        Ok(LiveEquation { target, minterms })
    }

    /// Builds an equation from nested name lists, e.g. `[["b1", "b3"], ["b2"]]`.
    pub fn from_names(target: &str, minterms: &[&[&str]]) -> Result<Self, ModelError> {
        let minterms =
            minterms.iter().map(|m| MinTerm::new(m.iter().copied())).collect::<Result<Vec<_>, _>>()?;
        LiveEquation::new(target, minterms)
    }

    pub fn minterms(&self) -> &[MinTerm] {
        &self.minterms
    }

    pub fn supporters(&self) -> BTreeSet<&str> {
        self.minterms.iter().flat_map(|m| m.members.iter().map(String::as_str)).collect()
    }

    /// True when some minterm has all members alive.
    pub fn is_satisfied(&self, alive: impl Fn(&str) -> bool) -> bool {
        self.minterms.iter().any(|m| m.members.iter().all(|y| alive(y)))
    }

    /// Order-insensitive view used for semantic comparisons.
    pub fn canonical(&self) -> BTreeSet<BTreeSet<&str>> {
        self.minterms.iter().map(MinTerm::member_set).collect()
    }
}

/// Product of clauses; each clause is a sum of complemented supporters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeathEquation {
    pub target: String,
    pub clauses: Vec<Vec<String>>,
}

impl DeathEquation {
    /// The target is forced dead when every clause has a dead member.
    pub fn is_satisfied(&self, dead: impl Fn(&str) -> bool) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|y| dead(y)))
    }
}

/// De Morgan dual of a live equation, one clause per minterm, same order.
pub fn negate(eq: &LiveEquation) -> DeathEquation {
    DeathEquation {
        target: eq.target.clone(),
        clauses: eq.minterms.iter().map(|m| m.members.clone()).collect(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct DependencySystem {
    entities: BTreeMap<String, EntityId>,
    equations: Vec<LiveEquation>,
}

impl DependencySystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entity to the universe. Re-adding the same name in the same
    /// layer is a no-op (a missing kind is filled in).
    pub fn add_entity(&mut self, entity: EntityId) -> Result<(), ModelError> {
        match self.entities.get_mut(&entity.name) {
            Some(existing) if existing.layer != entity.layer => {
                Err(ModelError::LayerConflict { name: entity.name, existing: existing.layer })
            }
            Some(existing) => {
                if existing.kind.is_none() {
                    existing.kind = entity.kind;
                }
                Ok(())
            }
            None => {
                self.entities.insert(entity.name.clone(), entity);
                Ok(())
            }
        }
    }

    /// Appends an equation without any checks; see [`validate`].
    pub fn add_equation(&mut self, eq: LiveEquation) {
        self.equations.push(eq);
    }

    pub fn entity(&self, name: &str) -> Option<&EntityId> {
        self.entities.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entities.contains_key(name)
    }

    /// Entities sorted by name.
    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entities.keys().map(String::as_str)
    }

    pub fn equations(&self) -> &[LiveEquation] {
        &self.equations
    }

    pub fn equation_for(&self, target: &str) -> Option<&LiveEquation> {
        self.equations.iter().find(|e| e.target == target)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn layer_count(&self, layer: Layer) -> usize {
        self.entities.values().filter(|e| e.layer == layer).count()
    }

    /// Same universe (names and layers) and same equations compared as sets
    /// of minterm sets. Kinds and ordering are ignored.
    pub fn semantically_eq(&self, other: &DependencySystem) -> bool {
        let universe = |s: &DependencySystem| -> BTreeSet<(String, Layer)> {
            s.entities.values().map(|e| (e.name.clone(), e.layer)).collect()
        };
        if universe(self) != universe(other) {
            return false;
        }
        let eqs = |s: &'_ DependencySystem| -> BTreeMap<String, Vec<BTreeSet<BTreeSet<String>>>> {
            let mut map: BTreeMap<String, Vec<_>> = BTreeMap::new();
            for e in &s.equations {
                let canon =
                    e.canonical().into_iter().map(|m| m.into_iter().map(str::to_owned).collect()).collect();
                map.entry(e.target.clone()).or_default().push(canon);
            }
            for v in map.values_mut() {
                v.sort();
            }
            map
        };
        eqs(self) == eqs(other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub entity: String,
    pub reason: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, entity: &str, reason: String) {
        self.violations.push(Issue { entity: entity.to_owned(), reason });
    }
}

/// Reports every broken structural invariant. Same-layer supporters are
/// violations under `strict_cross_layer`, warnings otherwise.
pub fn validate(system: &DependencySystem, strict_cross_layer: bool) -> ValidationReport {
    let mut report = ValidationReport::default();

    for e in system.entities() {
        if !is_identifier(&e.name) {
            report.violation(&e.name, format!("invalid identifier {:?}", e.name));
        }
    }

    let mut seen_targets = BTreeSet::new();
    for eq in system.equations() {
        let target = eq.target.as_str();
        if !seen_targets.insert(target) {
            report.violation(target, format!("duplicate left-hand side {target}"));
        }
        let target_layer = match system.entity(target) {
            Some(e) => Some(e.layer),
            None => {
                report.violation(target, format!("entity not in universe: {target}"));
                None
            }
        };
        if eq.minterms().is_empty() {
            report.violation(target, "empty right-hand side".into());
        }
        let mut distinct = BTreeSet::new();
        for m in eq.minterms() {
            if m.is_empty() {
                report.violation(target, "empty minterm".into());
            }
            if !distinct.insert(m.member_set()) {
                report.violation(target, format!("identical minterms in equation for {target}"));
            }
        }
        let mut same_layer = BTreeSet::new();
        for member in eq.supporters() {
            if member == target {
                report.violation(target, format!("{target} supports itself"));
                continue;
            }
            match system.entity(member) {
                None => report.violation(member, format!("entity not in universe: {member}")),
                Some(e) if Some(e.layer) == target_layer => {
                    same_layer.insert(member);
                }
                Some(_) => {}
            }
        }
        if !same_layer.is_empty() {
            let list = same_layer.into_iter().collect::<Vec<_>>().join(", ");
            let issue = Issue {
                entity: target.to_owned(),
                reason: format!("supporters share the target's layer: {list}"),
            };
            if strict_cross_layer {
                report.violations.push(issue);
            } else {
                report.warnings.push(issue);
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseClass {
    CaseI,
    CaseII,
    CaseIII,
    CaseIV,
}

impl fmt::Display for CaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseClass::CaseI => "Case I",
            CaseClass::CaseII => "Case II",
            CaseClass::CaseIII => "Case III",
            CaseClass::CaseIV => "Case IV",
        };
        f.write_str(s)
    }
}

/// Case taxonomy by minterm count and minterm size.
pub fn classify(system: &DependencySystem) -> CaseClass {
    let eqs = system.equations();
    let single_minterm = eqs.iter().all(|e| e.minterms().len() == 1);
    let unit_minterms = eqs.iter().flat_map(|e| e.minterms()).all(|m| m.len() == 1);
    match (single_minterm, unit_minterms) {
        (true, true) => CaseClass::CaseI,
        (true, false) => CaseClass::CaseII,
        (false, true) => CaseClass::CaseIII,
        (false, false) => CaseClass::CaseIV,
    }
}

/// Entities without a live equation; they only die by direct attack.
pub fn roots(system: &DependencySystem) -> BTreeSet<String> {
    let targets: BTreeSet<&str> = system.equations().iter().map(|e| e.target.as_str()).collect();
    system.names().filter(|n| !targets.contains(n)).map(str::to_owned).collect()
}
