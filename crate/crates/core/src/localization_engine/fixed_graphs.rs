use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::canon::{self, CanonicalCode};

/// The two torus-fixed points of the exceptional curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FixedPoint {
    P1,
    P2,
}

impl FixedPoint {
    pub fn opposite(self) -> Self {
        match self {
            FixedPoint::P1 => FixedPoint::P2,
            FixedPoint::P2 => FixedPoint::P1,
        }
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedPoint::P1 => "p1",
            FixedPoint::P2 => "p2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FixedVertex {
    pub target: FixedPoint,
    pub genus: u32,
}

/// A degree-`degree` cover of the exceptional curve, totally ramified over
/// both fixed points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FixedEdge {
    pub endpoints: (usize, usize),
    pub degree: u32,
}

/// Decorated graph indexing a component of the torus-fixed locus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedLocusGraph {
    vertices: Vec<FixedVertex>,
    edges: Vec<FixedEdge>,
    graph_automorphisms: u64,
}

impl FixedLocusGraph {
    /// Panics unless the graph is connected and every edge joins `P1` to `P2`.
    pub fn new(vertices: Vec<FixedVertex>, edges: Vec<FixedEdge>) -> Self {
        for e in &edges {
            let (a, b) = e.endpoints;
            assert!(e.degree >= 1, "edge degree must be positive");
            assert_ne!(vertices[a].target, vertices[b].target, "edges join opposite fixed points");
        }
        let mut g = FixedLocusGraph { vertices, edges, graph_automorphisms: 0 };
        assert!(g.is_connected(), "fixed-locus graph must be connected");
        g.graph_automorphisms = g.count_automorphisms();
        g
    }

    pub fn vertices(&self) -> &[FixedVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[FixedEdge] {
        &self.edges
    }

    pub fn total_degree(&self) -> u32 {
        self.edges.iter().map(|e| e.degree).sum()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.endpoints.0 == v || e.endpoints.1 == v).count()
    }

    /// Edges incident to `v`.
    pub fn flags(&self, v: usize) -> impl Iterator<Item = &FixedEdge> + '_ {
        self.edges.iter().filter(move |e| e.endpoints.0 == v || e.endpoints.1 == v)
    }

    /// Graph automorphisms preserving targets, genera and edge degrees.
    pub fn graph_automorphisms(&self) -> u64 {
        self.graph_automorphisms
    }

    /// `|Aut| * prod d_e`, the order of the automorphism group of a generic
    /// map in the fixed locus.
    pub fn automorphism_factor(&self) -> u64 {
        self.graph_automorphisms * self.edges.iter().map(|e| e.degree as u64).product::<u64>()
    }

    fn adjacency(&self) -> Vec<Vec<u32>> {
        let n = self.vertices.len();
        let mut adj = vec![vec![0; n]; n];
        for e in &self.edges {
            let (a, b) = e.endpoints;
            adj[a][b] = e.degree;
            adj[b][a] = e.degree;
        }
        adj
    }

    fn labels(&self) -> Vec<(FixedPoint, u32)> {
        self.vertices.iter().map(|v| (v.target, v.genus)).collect()
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if adj[v][u] > 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    fn count_automorphisms(&self) -> u64 {
        canon::label_preserving_automorphisms(&self.labels(), &self.adjacency()).len() as u64
    }

    fn code(&self) -> CanonicalCode<(FixedPoint, u32), u32> {
        canon::canonical_form(&self.labels(), &self.adjacency()).0
    }

    fn from_code(code: &CanonicalCode<(FixedPoint, u32), u32>) -> Self {
        let vertices: Vec<FixedVertex> =
            code.vertices.iter().map(|&(target, genus)| FixedVertex { target, genus }).collect();
        let mut edges = Vec::new();
        let mut k = 0;
        for j in 0..vertices.len() {
            for i in 0..=j {
                if code.adjacency[k] > 0 {
                    edges.push(FixedEdge { endpoints: (i, j), degree: code.adjacency[k] });
                }
                k += 1;
            }
        }
        Self::new(vertices, edges)
    }
}

/// Genus-0 fixed-locus graphs of total degree `d`, one per isomorphism
/// class: trees with vertices alternating between the fixed points.
pub fn enumerate_fixed_graphs_genus0(d: u32) -> Vec<FixedLocusGraph> {
    let v = |target| FixedVertex { target, genus: 0 };
    // layer[t] holds trees of total degree t
    let mut layers: Vec<BTreeSet<CanonicalCode<(FixedPoint, u32), u32>>> = vec![BTreeSet::new(); d as usize + 1];
    for delta in 1..=d {
        let edge = FixedLocusGraph::new(
            vec![v(FixedPoint::P1), v(FixedPoint::P2)],
            vec![FixedEdge { endpoints: (0, 1), degree: delta }],
        );
        layers[delta as usize].insert(edge.code());
    }
    // grow by attaching one leaf at a time; a tree of degree t comes from
    // removing any leaf edge, so every tree is reached
    for t in 1..d {
        let current: Vec<_> = layers[t as usize].iter().cloned().collect();
        for code in current {
            let g = FixedLocusGraph::from_code(&code);
            for (at, vertex) in g.vertices.iter().enumerate() {
                for delta in 1..=d - t {
                    let mut vertices = g.vertices.clone();
                    vertices.push(v(vertex.target.opposite()));
                    let mut edges = g.edges.clone();
                    edges.push(FixedEdge { endpoints: (at, vertices.len() - 1), degree: delta });
                    layers[(t + delta) as usize].insert(FixedLocusGraph::new(vertices, edges).code());
                }
            }
        }
    }
    layers[d as usize].iter().map(FixedLocusGraph::from_code).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_and_two() {
        let one = enumerate_fixed_graphs_genus0(1);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].automorphism_factor(), 1);
        let two = enumerate_fixed_graphs_genus0(2);
        assert_eq!(two.len(), 3);
        assert!(two.iter().all(|g| g.automorphism_factor() == 2));
    }

    #[test]
    fn all_graphs_are_bipartite_trees() {
        for d in 1..=5 {
            for g in enumerate_fixed_graphs_genus0(d) {
                assert_eq!(g.total_degree(), d);
                assert_eq!(g.edges().len() + 1, g.vertices().len());
            }
        }
    }

    #[test]
    fn star_automorphisms() {
        let v = |target| FixedVertex { target, genus: 0 };
        let star = FixedLocusGraph::new(
            vec![v(FixedPoint::P1), v(FixedPoint::P2), v(FixedPoint::P2), v(FixedPoint::P2)],
            (1..4).map(|i| FixedEdge { endpoints: (0, i), degree: 1 }).collect(),
        );
        assert_eq!(star.graph_automorphisms(), 6);
        assert_eq!(star.valence(0), 3);
    }
}
