use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::IngestError;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Great-circle distance in meters between two WGS-84 degree coordinates.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerKind {
    Generator,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeoPoint {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn distance_to(&self, other: &GeoPoint) -> f64 {
        haversine_m(self.lat, self.lon, other.lat, other.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeoEdge {
    pub id: String,
    pub from: String,
    pub to: String,
}

impl GeoEdge {
    pub fn other_end(&self, id: &str) -> Option<&str> {
        if self.from == id {
            Some(&self.to)
        } else if self.to == id {
            Some(&self.from)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GeoNetwork {
    pub generators: Vec<GeoPoint>,
    pub loads: Vec<GeoPoint>,
    pub towers: Vec<GeoPoint>,
    pub buildings: Vec<GeoPoint>,
    pub transmission_lines: Vec<GeoEdge>,
    pub fiber_links: Vec<GeoEdge>,
}

impl GeoNetwork {
    pub fn power_node(&self, id: &str) -> Option<&GeoPoint> {
        self.generators.iter().chain(&self.loads).find(|p| p.id == id)
    }

    pub fn building(&self, id: &str) -> Option<&GeoPoint> {
        self.buildings.iter().find(|p| p.id == id)
    }

    /// Writes the five CSV files (`power.csv`, `lines.csv`, `towers.csv`,
    /// `buildings.csv`, `links.csv`) into `dir`.
    pub fn write_csv_dir(&self, dir: &Path) -> std::io::Result<()> {
        let mut power = File::create(dir.join("power.csv"))?;
        writeln!(power, "id,lat,lon,kind")?;
        for (kind, pts) in [("generator", &self.generators), ("load", &self.loads)] {
            for p in pts {
                writeln!(power, "{},{},{},{kind}", p.id, p.lat, p.lon)?;
            }
        }
        for (file, pts) in [("towers.csv", &self.towers), ("buildings.csv", &self.buildings)] {
            let mut f = File::create(dir.join(file))?;
            writeln!(f, "id,lat,lon")?;
            for p in pts {
                writeln!(f, "{},{},{}", p.id, p.lat, p.lon)?;
            }
        }
        for (file, edges) in [("lines.csv", &self.transmission_lines), ("links.csv", &self.fiber_links)] {
            let mut f = File::create(dir.join(file))?;
            writeln!(f, "id,from_id,to_id")?;
            for e in edges {
                writeln!(f, "{},{},{}", e.id, e.from, e.to)?;
            }
        }
        Ok(())
    }
}

struct Table {
    file: String,
    headers: csv::StringRecord,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(file: &str, reader: impl Read) -> Result<Table, IngestError> {
        let csv_err = |source| IngestError::Csv { file: file.to_owned(), source };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Table { file: file.to_owned(), headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn { file: self.file.clone(), column: name.to_owned() })
    }

    fn coord(&self, row: u64, rec: &csv::StringRecord, col: usize) -> Result<f64, IngestError> {
        let raw = rec.get(col).unwrap_or("");
        raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::BadValue {
            file: self.file.clone(),
            column: self.headers[col].to_owned(),
            value: raw.to_owned(),
            row,
        })
    }

    /// (id, lat, lon, optional kind column value)
    fn points(&self) -> Result<Vec<(GeoPoint, Option<String>, u64)>, IngestError> {
        let (id, lat, lon) = (self.column("id")?, self.column("lat")?, self.column("lon")?);
        let kind = self.headers.iter().position(|h| h == "kind");
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (row, rec) in &self.rows {
            let pid = rec.get(id).unwrap_or("").to_owned();
            if !seen.insert(pid.clone()) {
                return Err(IngestError::DuplicateId { file: self.file.clone(), id: pid, row: *row });
            }
            let point =
                GeoPoint { id: pid, lat: self.coord(*row, rec, lat)?, lon: self.coord(*row, rec, lon)? };
            out.push((point, kind.and_then(|k| rec.get(k)).map(str::to_owned), *row));
        }
        Ok(out)
    }

    fn edges(&self, endpoint_exists: impl Fn(&str) -> bool) -> Result<Vec<GeoEdge>, IngestError> {
        let (id, from, to) = (self.column("id")?, self.column("from_id")?, self.column("to_id")?);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (row, rec) in &self.rows {
            let eid = rec.get(id).unwrap_or("").to_owned();
            if !seen.insert(eid.clone()) {
                return Err(IngestError::DuplicateId { file: self.file.clone(), id: eid, row: *row });
            }
            let edge = GeoEdge {
                id: eid,
                from: rec.get(from).unwrap_or("").to_owned(),
                to: rec.get(to).unwrap_or("").to_owned(),
            };
            for end in [&edge.from, &edge.to] {
                if !endpoint_exists(end) {
                    return Err(IngestError::DanglingEndpoint {
                        file: self.file.clone(),
                        id: end.clone(),
                        row: *row,
                    });
                }
            }
            out.push(edge);
        }
        Ok(out)
    }
}

/// Loads the five CSV files. Row numbers in errors are file line numbers
/// (the header is line 1).
pub fn load_geo(
    power_csv: &Path,
    lines_csv: &Path,
    towers_csv: &Path,
    buildings_csv: &Path,
    links_csv: &Path,
) -> Result<GeoNetwork, IngestError> {
    let open =
        |p: &Path| File::open(p).map_err(|source| IngestError::Io { file: p.display().to_string(), source });
    load_geo_from_readers(
        (&power_csv.display().to_string(), open(power_csv)?),
        (&lines_csv.display().to_string(), open(lines_csv)?),
        (&towers_csv.display().to_string(), open(towers_csv)?),
        (&buildings_csv.display().to_string(), open(buildings_csv)?),
        (&links_csv.display().to_string(), open(links_csv)?),
    )
}

/// Like [`load_geo`], with `(file label, reader)` pairs.
pub fn load_geo_from_readers<P: Read, L: Read, T: Read, B: Read, K: Read>(
    power: (&str, P),
    lines: (&str, L),
    towers: (&str, T),
    buildings: (&str, B),
    links: (&str, K),
) -> Result<GeoNetwork, IngestError> {
    let power_t = Table::read(power.0, power.1)?;
    let mut net = GeoNetwork::default();
    for (point, kind, row) in power_t.points()? {
        match kind.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("") | Some("generator") => net.generators.push(point),
            Some("load") => net.loads.push(point),
            Some(other) => {
                return Err(IngestError::BadValue {
                    file: power_t.file.clone(),
                    column: "kind".into(),
                    value: other.to_owned(),
                    row,
                })
            }
        }
    }
    net.towers = Table::read(towers.0, towers.1)?.points()?.into_iter().map(|p| p.0).collect();
    net.buildings = Table::read(buildings.0, buildings.1)?.points()?.into_iter().map(|p| p.0).collect();

    let power_ids: HashSet<String> = net.generators.iter().chain(&net.loads).map(|p| p.id.clone()).collect();
    net.transmission_lines = Table::read(lines.0, lines.1)?.edges(|id| power_ids.contains(id))?;
    let building_ids: HashSet<String> = net.buildings.iter().map(|p| p.id.clone()).collect();
    net.fiber_links = Table::read(links.0, links.1)?.edges(|id| building_ids.contains(id))?;
    Ok(net)
}
