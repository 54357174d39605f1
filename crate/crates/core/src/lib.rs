//! Implicative interdependency model for multi-layer infrastructure
//! networks.
//!
//! Entities of two layers keep each other alive through live equations in
//! disjunctive normal form, e.g. `a1 <- b1*b2 + b3`. Killing a handful of
//! entities at t0 can cascade; [`cascade`] runs that cascade to its fixed
//! point and [`vuln`] searches for the K entities whose loss does the most
//! damage.

pub mod cascade;
pub mod eqparse;
pub mod ingest;
pub mod milp;
pub mod model;
pub mod vuln;
