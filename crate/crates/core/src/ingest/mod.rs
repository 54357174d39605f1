//! Instance construction: infrastructure CSVs to live equations, hardness
//! reduction generators, and seeded random systems for testing.

mod geo;
mod random;
mod reductions;
mod rules;

use thiserror::Error;

pub use geo::{haversine_m, load_geo, load_geo_from_readers, GeoEdge, GeoNetwork, GeoPoint, PowerKind};
pub use random::{random_system, synthetic_region, RegionSpec};
pub use reductions::{clique_to_subset_cover, vc_reduction, GraphError, UndirectedGraph, VcInstance};
pub use rules::{entity_name, generate_rules, GeneratedRules};

#[derive(Error, Debug)]
pub enum IngestError {
    #[error("{file}: missing column {column}")]
    MissingColumn { file: String, column: String },
    #[error("{file}: duplicate id {id}, row {row}")]
    DuplicateId { file: String, id: String, row: u64 },
    #[error("{file}: dangling endpoint {id}, row {row}")]
    DanglingEndpoint { file: String, id: String, row: u64 },
    #[error("{file}: bad value {value:?} in column {column}, row {row}")]
    BadValue { file: String, column: String, value: String, row: u64 },
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("entity name collision after sanitizing: {0}")]
    NameCollision(String),
}
