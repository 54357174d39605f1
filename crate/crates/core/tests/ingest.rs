use std::collections::BTreeSet;
use std::time::Instant;

use iim::ingest::{entity_name, generate_rules, load_geo, synthetic_region, GeoPoint, RegionSpec};
use iim::model::{classify, roots, validate, CaseClass, Kind};

/// Great-circle distance via the chord between unit vectors; independent of
/// the library's haversine.
fn chord_distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let v = |p: &GeoPoint| {
        let (lat, lon) = (p.lat.to_radians(), p.lon.to_radians());
        [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
    };
    let (x, y) = (v(a), v(b));
    let chord = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    2.0 * 6_371_008.8 * (chord / 2.0).asin()
}

fn two_nearest<'a>(p: &GeoPoint, pool: &'a [GeoPoint]) -> Vec<&'a GeoPoint> {
    let mut all: Vec<&GeoPoint> = pool.iter().collect();
    all.sort_by(|a, b| chord_distance(p, a).total_cmp(&chord_distance(p, b)));
    all.truncate(2);
    all
}

#[test]
fn towers_depend_on_their_two_nearest_generators() {
    let spec = RegionSpec { generators: 5, towers: 12, buildings: 12, ..RegionSpec::default() };
    for seed in 0..10 {
        let geo = synthetic_region(seed, &spec);
        let system = generate_rules(&geo).unwrap().system;
        for (kind, points) in [(Kind::CellTower, &geo.towers), (Kind::FiberBuilding, &geo.buildings)] {
            for p in points.iter() {
                let eq = system.equation_for(&entity_name(kind, &p.id)).unwrap();
                let used: BTreeSet<String> = eq
                    .supporters()
                    .into_iter()
                    .filter(|s| s.starts_with("gen_"))
                    .map(str::to_owned)
                    .collect();
                let want: BTreeSet<String> = two_nearest(p, &geo.generators)
                    .iter()
                    .map(|g| entity_name(Kind::Generator, &g.id))
                    .collect();
                assert_eq!(used, want, "seed {seed} {}", p.id);
            }
        }
        for g in &geo.generators {
            let eq = system.equation_for(&entity_name(Kind::Generator, &g.id)).unwrap();
            let tower = two_nearest(g, &geo.towers)[0];
            assert!(eq.supporters().contains(entity_name(Kind::CellTower, &tower.id).as_str()));
            let bldg = two_nearest(g, &geo.buildings)[0];
            assert!(eq.supporters().contains(entity_name(Kind::FiberBuilding, &bldg.id).as_str()));
        }
    }
}

#[test]
fn generated_equations_stay_small() {
    for seed in 0..40 {
        let geo = synthetic_region(seed, &RegionSpec::default());
        let out = generate_rules(&geo).unwrap();
        assert!(validate(&out.system, true).is_valid());
        assert!(classify(&out.system) <= CaseClass::CaseIV);
        for eq in out.system.equations() {
            assert!(eq.minterms().len() <= 2);
            assert!(eq.minterms().iter().all(|m| m.len() <= 2));
        }
    }
}

#[test]
fn three_generator_region_roots() {
    let spec = RegionSpec {
        generators: 3,
        loads: 2,
        towers: 2,
        buildings: 2,
        extra_lines: 1,
        extra_links: 0,
        ..RegionSpec::default()
    };
    let geo = synthetic_region(5, &spec);
    let system = generate_rules(&geo).unwrap().system;
    let want: BTreeSet<String> = geo
        .loads
        .iter()
        .map(|p| entity_name(Kind::Load, &p.id))
        .chain(geo.transmission_lines.iter().map(|e| entity_name(Kind::TransmissionLine, &e.id)))
        .chain(geo.fiber_links.iter().map(|e| entity_name(Kind::FiberLink, &e.id)))
        .collect();
    assert_eq!(roots(&system), want);
}

#[test]
fn csv_files_round_trip_and_load_fast() {
    let spec = RegionSpec {
        generators: 70,
        loads: 40,
        towers: 50,
        buildings: 50,
        extra_lines: 60,
        extra_links: 40,
        ..RegionSpec::default()
    };
    let geo = synthetic_region(1, &spec);
    let dir = tempfile::tempdir().unwrap();
    geo.write_csv_dir(dir.path()).unwrap();
    let p = |f: &str| dir.path().join(f);
    let start = Instant::now();
    let back =
        load_geo(&p("power.csv"), &p("lines.csv"), &p("towers.csv"), &p("buildings.csv"), &p("links.csv"))
            .unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(back.generators.len(), 70);
    assert_eq!(back.towers.len(), 50);
    assert_eq!(back.transmission_lines, geo.transmission_lines);
    assert_eq!(back.fiber_links, geo.fiber_links);
    for (a, b) in back.buildings.iter().zip(&geo.buildings) {
        assert_eq!(a.id, b.id);
        assert!((a.lat - b.lat).abs() < 1e-12 && (a.lon - b.lon).abs() < 1e-12);
    }
}
