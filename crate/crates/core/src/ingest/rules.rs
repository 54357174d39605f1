use std::collections::BTreeMap;

use super::geo::{GeoEdge, GeoNetwork, GeoPoint};
use super::IngestError;
use crate::model::{DependencySystem, EntityId, Kind, Layer, LiveEquation, MinTerm};

#[derive(Debug, Clone)]
pub struct GeneratedRules {
    pub system: DependencySystem,
    pub warnings: Vec<String>,
}

fn prefix(kind: Kind) -> &'static str {
    match kind {
        Kind::Generator => "gen_",
        Kind::Load => "load_",
        Kind::TransmissionLine => "line_",
        Kind::CellTower => "tower_",
        Kind::FiberBuilding => "bldg_",
        Kind::FiberLink => "link_",
        Kind::Generic => "x_",
    }
}

/// Rule-file identifier for a raw CSV id: kind prefix plus the id with every
/// character outside `[A-Za-z0-9_]` replaced by `_`.
pub fn entity_name(kind: Kind, id: &str) -> String {
    let mut name = prefix(kind).to_owned();
    name.extend(id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }));
    name
}

fn layer_of(kind: Kind) -> Layer {
    match kind {
        Kind::Generator | Kind::Load | Kind::TransmissionLine => Layer::A,
        _ => Layer::B,
    }
}

/// Candidates ordered by distance from `from`, ties by id.
fn by_distance<'a>(from: &GeoPoint, candidates: &'a [GeoPoint]) -> Vec<&'a GeoPoint> {
    let mut v: Vec<(f64, &GeoPoint)> = candidates.iter().map(|c| (from.distance_to(c), c)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
    v.into_iter().map(|(_, p)| p).collect()
}

/// The edge incident to `node` whose other endpoint lies nearest `target`.
fn nearest_incident<'a>(
    edges: &'a [GeoEdge],
    node: &str,
    target: &GeoPoint,
    locate: impl Fn(&str) -> Option<&'a GeoPoint>,
) -> Option<&'a GeoEdge> {
    edges
        .iter()
        .filter_map(|e| {
            let far = e.other_end(node)?;
            let d = locate(far).map_or(f64::INFINITY, |p| p.distance_to(target));
            Some((d, e))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)))
        .map(|(_, e)| e)
}

struct Names {
    system: DependencySystem,
    raw: BTreeMap<String, String>,
}

impl Names {
    fn add(&mut self, kind: Kind, id: &str) -> Result<(), IngestError> {
        let name = entity_name(kind, id);
        if let Some(prev) = self.raw.insert(name.clone(), id.to_owned()) {
            return Err(IngestError::NameCollision(format!("{prev} and {id} both map to {name}")));
        }
        let entity = EntityId::new(layer_of(kind), name.clone())
            .map_err(|_| IngestError::NameCollision(name))?
            .with_kind(kind);
        self.system.add_entity(entity).expect("fresh name");
        Ok(())
    }
}

fn minterm(names: &[String]) -> MinTerm {
    MinTerm::new(names.iter().cloned()).expect("distinct non-empty members")
}

/// Builds live equations from geospatial data.
///
/// Generators depend on their nearest cell tower, or on their nearest
/// fiber-lit building together with the fiber link at that building whose
/// far end is closest to the generator. Towers and buildings depend on their
/// two nearest generators, each paired with the transmission line at that
/// generator whose far end is closest to the tower or building. Loads, lines
/// and links carry no equation. Distances are haversine; ties go to the
/// smallest id.
pub fn generate_rules(geo: &GeoNetwork) -> Result<GeneratedRules, IngestError> {
    if geo.generators.len() < 2 {
        return Err(IngestError::Precondition(format!(
            "need at least 2 generators, found {}",
            geo.generators.len()
        )));
    }
    if geo.towers.is_empty() && geo.buildings.is_empty() {
        return Err(IngestError::Precondition("need at least 1 cell tower or fiber-lit building".into()));
    }

    let mut names = Names { system: DependencySystem::new(), raw: BTreeMap::new() };
    let groups: [(Kind, Vec<&str>); 6] = [
        (Kind::Generator, geo.generators.iter().map(|p| p.id.as_str()).collect()),
        (Kind::Load, geo.loads.iter().map(|p| p.id.as_str()).collect()),
        (Kind::TransmissionLine, geo.transmission_lines.iter().map(|e| e.id.as_str()).collect()),
        (Kind::CellTower, geo.towers.iter().map(|p| p.id.as_str()).collect()),
        (Kind::FiberBuilding, geo.buildings.iter().map(|p| p.id.as_str()).collect()),
        (Kind::FiberLink, geo.fiber_links.iter().map(|e| e.id.as_str()).collect()),
    ];
    for (kind, ids) in &groups {
        for id in ids {
            names.add(*kind, id)?;
        }
    }

    let mut warnings = Vec::new();
    let mut equations = Vec::new();

    for g in &geo.generators {
        let target = entity_name(Kind::Generator, &g.id);
        let mut terms = Vec::new();
        if let Some(t) = by_distance(g, &geo.towers).first() {
            terms.push(minterm(&[entity_name(Kind::CellTower, &t.id)]));
        }
        if let Some(b) = by_distance(g, &geo.buildings).first() {
            let bname = entity_name(Kind::FiberBuilding, &b.id);
            match nearest_incident(&geo.fiber_links, &b.id, g, |id| geo.building(id)) {
                Some(link) => terms.push(minterm(&[bname, entity_name(Kind::FiberLink, &link.id)])),
                None => {
                    warnings.push(format!(
                        "{target}: building {} has no fiber link; using the building alone",
                        b.id
                    ));
                    terms.push(minterm(&[bname]));
                }
            }
        }
        equations.push(LiveEquation::new(target, terms).expect("at least one minterm"));
    }

    for (kind, points) in [(Kind::CellTower, &geo.towers), (Kind::FiberBuilding, &geo.buildings)] {
        for p in points {
            let target = entity_name(kind, &p.id);
            let nearest = by_distance(p, &geo.generators);
            let mut terms = Vec::new();
            for g in nearest.iter().take(2) {
                let gname = entity_name(Kind::Generator, &g.id);
                match nearest_incident(&geo.transmission_lines, &g.id, p, |id| geo.power_node(id)) {
                    Some(line) => {
                        terms.push(minterm(&[gname, entity_name(Kind::TransmissionLine, &line.id)]))
                    }
                    None => {
                        warnings.push(format!(
                            "{target}: generator {} has no transmission line; using the generator alone",
                            g.id
                        ));
                        terms.push(minterm(&[gname]));
                    }
                }
            }
            if terms.len() < 2 {
                warnings.push(format!("{target}: fewer than 2 generators reachable; single minterm"));
            }
            equations.push(LiveEquation::new(target, terms).expect("at least one minterm"));
        }
    }

    let mut system = names.system;
    equations.sort_by(|a, b| a.target.cmp(&b.target));
    for eq in equations {
        system.add_equation(eq);
    }
    Ok(GeneratedRules { system, warnings })
}
