use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geo::{GeoEdge, GeoNetwork, GeoPoint};
use crate::model::{CaseClass, DependencySystem, EntityId, Layer, LiveEquation, MinTerm, ModelError};

/// Seeded random system with `n` layer-A entities (`a1..an`) and `m`
/// layer-B entities (`b1..bm`). Supporters always come from the other
/// layer. The result classifies exactly as `case`; Case I ignores the two
/// size limits.
pub fn random_system(
    seed: u64,
    n: usize,
    m: usize,
    case: CaseClass,
    max_minterms: usize,
    max_size: usize,
) -> Result<DependencySystem, ModelError> {
    if n == 0 || m == 0 || max_minterms == 0 || max_size == 0 {
        return Err(ModelError::InvalidParameters("n, m, max_minterms and max_size must be positive".into()));
    }
    let (max_t, max_s) = match case {
        CaseClass::CaseI => (1, 1),
        CaseClass::CaseII => (1, max_size),
        CaseClass::CaseIII => (max_minterms, 1),
        CaseClass::CaseIV => (max_minterms, max_size),
    };
    let (force_t, force_s) = match case {
        CaseClass::CaseI => (1, 1),
        CaseClass::CaseII => (1, 2),
        CaseClass::CaseIII => (2, 1),
        CaseClass::CaseIV => (2, 2),
    };
    if force_t > max_t || force_s > max_s {
        return Err(ModelError::InvalidParameters(format!("{case} needs larger max_minterms or max_size")));
    }
    if force_t.max(force_s) > n.max(m) {
        return Err(ModelError::InvalidParameters(format!("{case} needs a layer with at least 2 entities")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let b: Vec<String> = (1..=m).map(|i| format!("b{i}")).collect();
    let mut system = DependencySystem::new();
    for (layer, names) in [(Layer::A, &a), (Layer::B, &b)] {
        for name in names {
            system.add_entity(EntityId::new(layer, name.clone())?)?;
        }
    }

    // the forced entity must draw from a pool of at least 2 when anything
    // beyond Case I is requested
    let candidates: Vec<usize> =
        (0..n + m).filter(|&i| if i < n { m } else { n } >= force_t.max(force_s)).collect();
    let forced = *candidates.choose(&mut rng).expect("checked above");

    for i in 0..n + m {
        let (target, pool) = if i < n { (&a[i], &b) } else { (&b[i - n], &a) };
        let eq = if i == forced {
            draw_equation(&mut rng, target, pool, (force_t, max_t), (1, max_s), force_s)
        } else if rng.gen_bool(0.7) {
            draw_equation(&mut rng, target, pool, (1, max_t), (1, max_s), 1)
        } else {
            None
        };
        if let Some(eq) = eq {
            system.add_equation(eq);
        }
    }
    Ok(system)
}

/// `t_range` bounds the minterm count, `s_range` the minterm size; the
/// first minterm is at least `first_size` large.
fn draw_equation(
    rng: &mut ChaCha8Rng,
    target: &str,
    pool: &[String],
    t_range: (usize, usize),
    s_range: (usize, usize),
    first_size: usize,
) -> Option<LiveEquation> {
    let max_s = s_range.1.min(pool.len());
    let t = rng.gen_range(t_range.0..=t_range.1);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut terms = Vec::new();
    let mut attempts = 0;
    while terms.len() < t && attempts < 32 {
        attempts += 1;
        let lo = if terms.is_empty() { first_size.max(s_range.0) } else { s_range.0 };
        let size = rng.gen_range(lo..=max_s);
        let mut picked = index::sample(rng, pool.len(), size).into_vec();
        picked.sort_unstable();
        if seen.insert(picked.clone()) {
            terms.push(MinTerm::new(picked.iter().map(|&j| pool[j].clone())).expect("distinct indices"));
        }
    }
    // unlucky draws: top up with unused singletons
    for (j, name) in pool.iter().enumerate() {
        if terms.len() >= t_range.0 {
            break;
        }
        if seen.insert(vec![j]) {
            terms.push(MinTerm::new([name.clone()]).expect("one member"));
        }
    }
    if terms.is_empty() {
        return None;
    }
    Some(LiveEquation::new(target, terms).expect("non-empty"))
}

/// Shape of a synthetic infrastructure region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub generators: usize,
    pub loads: usize,
    pub towers: usize,
    pub buildings: usize,
    /// load-to-load transmission lines on top of one line per generator
    pub extra_lines: usize,
    /// random building pairs on top of each building's nearest-neighbor link
    pub extra_links: usize,
    pub center: (f64, f64),
    /// half-width of the bounding box in degrees
    pub span_deg: f64,
}

impl Default for RegionSpec {
    fn default() -> Self {
        RegionSpec {
            generators: 6,
            loads: 6,
            towers: 6,
            buildings: 6,
            extra_lines: 4,
            extra_links: 2,
            center: (33.45, -112.07),
            span_deg: 0.3,
        }
    }
}

/// Seeded synthetic region. Each generator gets exactly one transmission
/// line, to its nearest load; further lines run between loads. Each building
/// links to its nearest other building.
pub fn synthetic_region(seed: u64, spec: &RegionSpec) -> GeoNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = |prefix: &str, count: usize| -> Vec<GeoPoint> {
        (1..=count)
            .map(|i| GeoPoint {
                id: format!("{prefix}{i}"),
                lat: spec.center.0 + rng.gen_range(-spec.span_deg..=spec.span_deg),
                lon: spec.center.1 + rng.gen_range(-spec.span_deg..=spec.span_deg),
            })
            .collect()
    };
    let generators = points("g", spec.generators);
    let loads = points("ld", spec.loads);
    let towers = points("t", spec.towers);
    let buildings = points("bd", spec.buildings);

    let nearest = |from: &GeoPoint, pool: &[GeoPoint]| -> Option<usize> {
        (0..pool.len())
            .filter(|&j| pool[j].id != from.id)
            .min_by(|&x, &y| from.distance_to(&pool[x]).total_cmp(&from.distance_to(&pool[y])))
    };

    let mut lines = Vec::new();
    if !loads.is_empty() {
        for g in &generators {
            let l = nearest(g, &loads).expect("non-empty");
            lines.push((g.id.clone(), loads[l].id.clone()));
        }
    }
    let mut pairs = BTreeSet::new();
    add_random_pairs(&mut rng, &loads, spec.extra_lines, &mut pairs);
    lines.extend(pairs.into_iter().map(|(x, y)| (loads[x].id.clone(), loads[y].id.clone())));

    let mut link_pairs = BTreeSet::new();
    for (i, bd) in buildings.iter().enumerate() {
        if let Some(j) = nearest(bd, &buildings) {
            link_pairs.insert((i.min(j), i.max(j)));
        }
    }
    add_random_pairs(&mut rng, &buildings, spec.extra_links, &mut link_pairs);

    let to_edges = |prefix: &str, pairs: Vec<(String, String)>| -> Vec<GeoEdge> {
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, (from, to))| GeoEdge { id: format!("{prefix}{}", i + 1), from, to })
            .collect()
    };
    let links: Vec<(String, String)> =
        link_pairs.into_iter().map(|(x, y)| (buildings[x].id.clone(), buildings[y].id.clone())).collect();

    GeoNetwork {
        transmission_lines: to_edges("tl", lines),
        fiber_links: to_edges("fl", links),
        generators,
        loads,
        towers,
        buildings,
    }
}

fn add_random_pairs(
    rng: &mut ChaCha8Rng,
    pool: &[GeoPoint],
    count: usize,
    pairs: &mut BTreeSet<(usize, usize)>,
) {
    let possible = pool.len() * pool.len().saturating_sub(1) / 2;
    let target = (pairs.len() + count).min(possible);
    while pairs.len() < target {
        let x = rng.gen_range(0..pool.len());
        let y = rng.gen_range(0..pool.len());
        if x != y {
            pairs.insert((x.min(y), x.max(y)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqparse::serialize_text;
    use crate::model::{classify, validate};

    #[test]
    fn every_case_classifies_as_requested() {
        for case in [CaseClass::CaseI, CaseClass::CaseII, CaseClass::CaseIII, CaseClass::CaseIV] {
            for seed in 1..=100 {
                let s = random_system(seed, 5, 5, case, 3, 3).unwrap();
                assert_eq!(classify(&s), case, "seed {seed}");
                assert!(validate(&s, true).is_valid(), "seed {seed}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = random_system(7, 5, 5, CaseClass::CaseIV, 2, 2).unwrap();
        let b = random_system(7, 5, 5, CaseClass::CaseIV, 2, 2).unwrap();
        assert_eq!(serialize_text(&a), serialize_text(&b));
        assert_eq!(synthetic_region(3, &RegionSpec::default()), synthetic_region(3, &RegionSpec::default()));
    }

    #[test]
    fn impossible_parameters() {
        assert!(random_system(1, 0, 3, CaseClass::CaseI, 1, 1).is_err());
        assert!(random_system(1, 3, 3, CaseClass::CaseII, 2, 1).is_err());
        assert!(random_system(1, 1, 1, CaseClass::CaseIV, 2, 2).is_err());
        assert!(random_system(1, 1, 2, CaseClass::CaseIII, 2, 1).is_ok());
    }

    #[test]
    fn region_shape() {
        let spec = RegionSpec::default();
        let g = synthetic_region(11, &spec);
        assert_eq!(g.generators.len(), spec.generators);
        assert_eq!(g.transmission_lines.len(), spec.generators + spec.extra_lines);
        for gen in &g.generators {
            let incident = g.transmission_lines.iter().filter(|e| e.other_end(&gen.id).is_some()).count();
            assert_eq!(incident, 1);
        }
        assert!(g.fiber_links.len() >= spec.buildings / 2);
    }
}
