use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{DependencySystem, EntityId, Layer, LiveEquation, MinTerm};
use crate::vuln::{CoverError, SubsetCoverInstance};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {0} out of range")]
    UnknownVertex(usize),
}

/// Simple undirected graph on vertices `v1..vn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph { n, edges: BTreeSet::new() }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = UndirectedGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::UnknownVertex(u));
        }
        if v >= self.n {
            return Err(GraphError::UnknownVertex(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.edges.insert((u.min(v), u.max(v))) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Normalized `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| u != v && self.has_edge(u, v)).collect()
    }

    pub fn vertex_name(v: usize) -> String {
        format!("v{}", v + 1)
    }
}

#[derive(Debug, Clone)]
pub struct VcInstance {
    pub system: DependencySystem,
    /// attack budget, equal to the cover size R
    pub k: usize,
    /// kill target, equal to the vertex count
    pub l: usize,
}

/// Vertex cover to K-MVN. Every edge becomes two opposite dependencies, so
/// each vertex lives on the conjunction of its neighbors. Isolated vertices
/// get no equation. All entities sit in layer A.
pub fn vc_reduction(graph: &UndirectedGraph, r: usize) -> VcInstance {
    let mut system = DependencySystem::new();
    for v in 0..graph.vertex_count() {
        let entity = EntityId::new(Layer::A, UndirectedGraph::vertex_name(v)).expect("valid identifier");
        system.add_entity(entity).expect("single layer");
    }
    for v in 0..graph.vertex_count() {
        let nbrs = graph.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let term =
            MinTerm::new(nbrs.into_iter().map(UndirectedGraph::vertex_name)).expect("distinct neighbors");
        let eq = LiveEquation::new(UndirectedGraph::vertex_name(v), vec![term]).expect("one minterm");
        system.add_equation(eq);
    }
    VcInstance { system, k: r, l: graph.vertex_count() }
}

/// Clique to subset cover: ground set is the vertices, one pair per edge,
/// p = K and q = K(K-1)/2.
pub fn clique_to_subset_cover(graph: &UndirectedGraph, k: usize) -> Result<SubsetCoverInstance, CoverError> {
    let family = graph
        .edges()
        .map(|(u, v)| {
            [UndirectedGraph::vertex_name(u), UndirectedGraph::vertex_name(v)].into_iter().collect()
        })
        .collect();
    SubsetCoverInstance::new(
        (0..graph.vertex_count()).map(UndirectedGraph::vertex_name),
        family,
        k,
        k * k.saturating_sub(1) / 2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::final_dead;
    use crate::model::{classify, validate, CaseClass};
    use crate::vuln::{brute_force, solve_subset_cover};

    #[test]
    fn graph_rejects_bad_edges() {
        let mut g = UndirectedGraph::new(3);
        assert_eq!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1)));
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(1, 0), Err(GraphError::DuplicateEdge(1, 0)));
        assert_eq!(g.add_edge(0, 3), Err(GraphError::UnknownVertex(3)));
    }

    #[test]
    fn path_reduction() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = vc_reduction(&g, 1);
        assert_eq!((inst.k, inst.l), (1, 3));
        let eq = inst.system.equation_for("v2").unwrap();
        assert_eq!(eq.canonical(), LiveEquation::from_names("v2", &[&["v1", "v3"]]).unwrap().canonical());
        assert_eq!(classify(&inst.system), CaseClass::CaseII);
        let report = validate(&inst.system, false);
        assert!(report.violations.is_empty() && !report.warnings.is_empty());
        let dead = final_dead(&inst.system, &["v2".to_string()].into()).unwrap();
        assert_eq!(dead.len(), 3);
    }

    #[test]
    fn triangle_reductions() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = vc_reduction(&g, 2);
        assert_eq!(brute_force(&inst.system, 2).unwrap().kill_count, 3);

        let cover = clique_to_subset_cover(&g, 3).unwrap();
        assert_eq!((cover.family().len(), cover.p, cover.q), (3, 3, 3));
        assert_eq!(solve_subset_cover(&cover).covered_count, 3);
    }

    #[test]
    fn path_has_no_triangle() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cover = clique_to_subset_cover(&g, 3).unwrap();
        let sol = solve_subset_cover(&cover);
        assert_eq!(sol.covered_count, 2);
        assert!(!sol.satisfies);
    }

    #[test]
    fn single_edge_zero_budget() {
        let g = UndirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        let inst = vc_reduction(&g, 0);
        assert_eq!(brute_force(&inst.system, inst.k).unwrap().kill_count, 0);
    }
}
