//! Dual graphs of nodal curves and of stable maps.
//!
//! A [`StratumData`] is a connected multigraph (loops allowed) whose vertices
//! carry genera and which has `m` numbered tails attached to vertices. A
//! [`MapStratumData`] additionally assigns each vertex a nonnegative degree,
//! the homology class of the component specialised to `H_2 = Z`.
//!
//! Valency counts a loop twice and every tail once.

mod enumerate;
pub mod oracle;
mod order;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{self, CanonicalCode};

pub use enumerate::{enumerate_map_strata, enumerate_strata, vertex_bound};
pub use order::{equivalent, map_equivalent, map_precedes, precedes};

pub type VertexId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a stratum needs at least one vertex")]
    Empty,
    #[error("vertex id {0} declared twice")]
    DuplicateVertex(VertexId),
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("tail labels must be exactly 1..={0}")]
    TailLabels(usize),
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
    #[error("no stable curves of genus {genus} with {marks} marks (need 2g + m >= 3)")]
    Unstable { genus: u32, marks: u32 },
    #[error("vertex {0} has no degree")]
    MissingDegree(VertexId),
    #[error("malformed stratum JSON: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub id: VertexId,
    pub genus: u32,
}

/// Label used for canonical ordering. Every field is an isomorphism
/// invariant of the vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexLabel {
    pub genus: u32,
    pub degree: u32,
    pub tails: Vec<u32>,
    pub valence: u32,
}

/// Canonical code of a (map) stratum; equal codes mean isomorphic data.
pub type StratumCode = CanonicalCode<VertexLabel, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumData {
    vertices: Vec<Vertex>,
    edges: Vec<(VertexId, VertexId)>,
    tails: BTreeMap<u32, VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapStratumData {
    base: StratumData,
    degrees: BTreeMap<VertexId, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphAutomorphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    /// `edge_map[i]` is the image of edge `i`.
    pub edge_map: Vec<usize>,
}

impl StratumData {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<(VertexId, VertexId)>,
        tails: BTreeMap<u32, VertexId>,
    ) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids = BTreeSet::new();
        for v in &vertices {
            if !ids.insert(v.id) {
                return Err(GraphError::DuplicateVertex(v.id));
            }
        }
        for &(a, b) in &edges {
            for x in [a, b] {
                if !ids.contains(&x) {
                    return Err(GraphError::UnknownVertex(x));
                }
            }
        }
        let m = tails.len();
        for (i, (&label, &target)) in tails.iter().enumerate() {
            if label as usize != i + 1 {
                return Err(GraphError::TailLabels(m));
            }
            if !ids.contains(&target) {
                return Err(GraphError::UnknownVertex(target));
            }
        }
        let s = StratumData { vertices, edges, tails };
        if !s.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(s)
    }

    /// The open stratum: one vertex of the given genus carrying all tails.
    pub fn smooth(genus: u32, marks: u32) -> Self {
        StratumData {
            vertices: vec![Vertex { id: 0, genus }],
            edges: Vec::new(),
            tails: (1..=marks).map(|j| (j, 0)).collect(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn tails(&self) -> &BTreeMap<u32, VertexId> {
        &self.tails
    }

    pub fn num_marks(&self) -> usize {
        self.tails.len()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    fn index_of(&self, id: VertexId) -> usize {
        self.vertices.iter().position(|v| v.id == id).expect("validated vertex id")
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, self.index_of(a)), find(&mut parent, self.index_of(b)));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|i| find(&mut parent, i) == root)
    }

    /// Valency: edge ends (a loop counts twice) plus tails.
    pub fn valence(&self, id: VertexId) -> u32 {
        let ends = self
            .edges
            .iter()
            .map(|&(a, b)| (a == id) as u32 + (b == id) as u32)
            .sum::<u32>();
        ends + self.tails.values().filter(|&&t| t == id).count() as u32
    }

    /// Rank of `H_1` of the underlying graph.
    pub fn first_betti(&self) -> u32 {
        (self.edges.len() + 1 - self.vertices.len()) as u32
    }

    /// Sum of vertex genera plus the first Betti number of the graph.
    pub fn total_genus(&self) -> u32 {
        self.vertices.iter().map(|v| v.genus).sum::<u32>() + self.first_betti()
    }

    /// Every vertex satisfies `2 g_k + val(k) >= 3`.
    pub fn is_stable(&self) -> bool {
        self.vertices.iter().all(|v| 2 * v.genus + self.valence(v.id) >= 3)
    }

    /// Collapses edge `e`. The merged vertex keeps the smaller endpoint id and
    /// its genus is `g(T) - sum_{k != v,w} g_k - rank H^1(T')`.
    pub fn contract(&self, e: usize) -> Result<Self, GraphError> {
        let &(a, b) = self.edges.get(e).ok_or(GraphError::EdgeIndex(e))?;
        let (keep, gone) = (a.min(b), a.max(b));
        let g_total = self.total_genus();
        let others: u32 = self
            .vertices
            .iter()
            .filter(|v| v.id != keep && v.id != gone)
            .map(|v| v.genus)
            .sum();
        let edges: Vec<(VertexId, VertexId)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, &(x, y))| (if x == gone { keep } else { x }, if y == gone { keep } else { y }))
            .collect();
        let n_vertices = if keep == gone { self.vertices.len() } else { self.vertices.len() - 1 };
        let betti = (edges.len() + 1 - n_vertices) as u32;
        let merged_genus = g_total - others - betti;
        let vertices = self
            .vertices
            .iter()
            .filter(|v| v.id != gone || keep == gone)
            .map(|v| if v.id == keep { Vertex { id: keep, genus: merged_genus } } else { *v })
            .collect();
        let tails = self
            .tails
            .iter()
            .map(|(&j, &t)| (j, if t == gone { keep } else { t }))
            .collect();
        Ok(StratumData { vertices, edges, tails })
    }

    /// Graph automorphisms preserving genera and fixing every tail.
    pub fn automorphisms(&self) -> Vec<GraphAutomorphism> {
        automorphisms_with_degrees(self, None)
    }

    pub fn canonical_code(&self) -> StratumCode {
        Dense::from_stratum(self, None).code()
    }

    /// Isomorphic copy with vertex ids `0..n` in canonical order.
    pub fn canonical(&self) -> Self {
        Dense::from_code(&self.canonical_code()).to_stratum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StratumJson::from_parts(self, None)).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, GraphError> {
        let raw: StratumJson =
            serde_json::from_value(value.clone()).map_err(|e| GraphError::Json(e.to_string()))?;
        raw.into_stratum().map(|(s, _)| s)
    }
}

impl MapStratumData {
    pub fn new(base: StratumData, degrees: BTreeMap<VertexId, u32>) -> Result<Self, GraphError> {
        for v in &base.vertices {
            if !degrees.contains_key(&v.id) {
                return Err(GraphError::MissingDegree(v.id));
            }
        }
        if let Some(&extra) = degrees.keys().find(|id| base.vertex(**id).is_none()) {
            return Err(GraphError::UnknownVertex(extra));
        }
        Ok(MapStratumData { base, degrees })
    }

    pub fn smooth(genus: u32, marks: u32, degree: u32) -> Self {
        MapStratumData { base: StratumData::smooth(genus, marks), degrees: [(0, degree)].into() }
    }

    pub fn base(&self) -> &StratumData {
        &self.base
    }

    pub fn degrees(&self) -> &BTreeMap<VertexId, u32> {
        &self.degrees
    }

    pub fn degree(&self, id: VertexId) -> u32 {
        self.degrees[&id]
    }

    pub fn total_degree(&self) -> u32 {
        self.degrees.values().sum()
    }

    pub fn total_genus(&self) -> u32 {
        self.base.total_genus()
    }

    /// Each component is a stable curve or carries positive degree.
    pub fn is_stable(&self) -> bool {
        self.base
            .vertices
            .iter()
            .all(|v| 2 * v.genus + self.base.valence(v.id) >= 3 || self.degrees[&v.id] > 0)
    }

    /// Contraction of the underlying stratum; degrees of merged vertices add.
    pub fn contract(&self, e: usize) -> Result<Self, GraphError> {
        let base = self.base.contract(e)?;
        let (a, b) = self.base.edges[e];
        let (keep, gone) = (a.min(b), a.max(b));
        let mut degrees = self.degrees.clone();
        if keep != gone {
            let d = degrees.remove(&gone).expect("degree present");
            *degrees.get_mut(&keep).expect("degree present") += d;
        }
        Ok(MapStratumData { base, degrees })
    }

    /// `n(2 - 2g) + 2 c_1(A) + 6g - 6 + 2m - 2 |Sing|` with `|Sing|` the
    /// number of edges; `n` is the complex dimension of the target.
    pub fn virtual_dimension(&self, n: i64, c1a: i64, m: i64) -> i64 {
        let g = self.total_genus() as i64;
        n * (2 - 2 * g) + 2 * c1a + 6 * g - 6 + 2 * m - 2 * self.base.edges.len() as i64
    }

    pub fn automorphisms(&self) -> Vec<GraphAutomorphism> {
        automorphisms_with_degrees(&self.base, Some(&self.degrees))
    }

    pub fn canonical_code(&self) -> StratumCode {
        Dense::from_stratum(&self.base, Some(&self.degrees)).code()
    }

    pub fn canonical(&self) -> Self {
        Dense::from_code(&self.canonical_code()).to_map_stratum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StratumJson::from_parts(&self.base, Some(&self.degrees))).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, GraphError> {
        let raw: StratumJson =
            serde_json::from_value(value.clone()).map_err(|e| GraphError::Json(e.to_string()))?;
        let (base, degrees) = raw.into_stratum()?;
        let degrees = degrees.into_iter().map(|(k, v)| (k, v.unwrap_or(0))).collect();
        MapStratumData::new(base, degrees)
    }
}

fn automorphisms_with_degrees(s: &StratumData, degrees: Option<&BTreeMap<VertexId, u32>>) -> Vec<GraphAutomorphism> {
    let dense = Dense::from_stratum(s, degrees);
    let labels: Vec<(u32, u32, &[u32])> = (0..dense.len())
        .map(|v| (dense.genus[v], dense.degree[v], dense.tails[v].as_slice()))
        .collect();
    let ids: Vec<VertexId> = s.vertices.iter().map(|v| v.id).collect();
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, &(a, b)) in s.edges.iter().enumerate() {
        let (x, y) = (s.index_of(a), s.index_of(b));
        classes.entry((x.min(y), x.max(y))).or_default().push(i);
    }
    let mut out = Vec::new();
    for perm in canon::label_preserving_automorphisms(&labels, &dense.adj) {
        let pairs: Vec<(&Vec<usize>, &Vec<usize>)> = classes
            .iter()
            .map(|(&(x, y), src)| {
                let (px, py) = (perm[x], perm[y]);
                (src, &classes[&(px.min(py), px.max(py))])
            })
            .collect();
        let vertex_map: BTreeMap<VertexId, VertexId> =
            perm.iter().enumerate().map(|(i, &j)| (ids[i], ids[j])).collect();
        let mut edge_map = vec![usize::MAX; s.edges.len()];
        extend_edge_maps(&pairs, 0, &mut edge_map, &vertex_map, &mut out);
    }
    out
}

fn extend_edge_maps(
    pairs: &[(&Vec<usize>, &Vec<usize>)],
    k: usize,
    edge_map: &mut Vec<usize>,
    vertex_map: &BTreeMap<VertexId, VertexId>,
    out: &mut Vec<GraphAutomorphism>,
) {
    if k == pairs.len() {
        out.push(GraphAutomorphism { vertex_map: vertex_map.clone(), edge_map: edge_map.clone() });
        return;
    }
    let (src, dst) = pairs[k];
    for image in permutations(dst) {
        for (&e, &f) in src.iter().zip(&image) {
            edge_map[e] = f;
        }
        extend_edge_maps(pairs, k + 1, edge_map, vertex_map, out);
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Index-based working form used by canonicalization and enumeration.
/// `adj[i][i]` counts loops at `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Dense {
    pub genus: Vec<u32>,
    pub degree: Vec<u32>,
    pub tails: Vec<Vec<u32>>,
    pub adj: Vec<Vec<u32>>,
}

impl Dense {
    pub fn len(&self) -> usize {
        self.genus.len()
    }

    pub fn from_stratum(s: &StratumData, degrees: Option<&BTreeMap<VertexId, u32>>) -> Self {
        let n = s.vertices.len();
        let mut adj = vec![vec![0; n]; n];
        for &(a, b) in &s.edges {
            let (x, y) = (s.index_of(a), s.index_of(b));
            adj[x][y] += 1;
            if x != y {
                adj[y][x] += 1;
            }
        }
        let mut tails = vec![Vec::new(); n];
        for (&j, &t) in &s.tails {
            tails[s.index_of(t)].push(j);
        }
        Dense {
            genus: s.vertices.iter().map(|v| v.genus).collect(),
            degree: s.vertices.iter().map(|v| degrees.map_or(0, |d| d[&v.id])).collect(),
            tails,
            adj,
        }
    }

    pub fn valence(&self, v: usize) -> u32 {
        let edge_ends: u32 = (0..self.len()).map(|u| if u == v { 2 * self.adj[v][v] } else { self.adj[v][u] }).sum();
        edge_ends + self.tails[v].len() as u32
    }

    pub fn label(&self, v: usize) -> VertexLabel {
        VertexLabel {
            genus: self.genus[v],
            degree: self.degree[v],
            tails: self.tails[v].clone(),
            valence: self.valence(v),
        }
    }

    pub fn code(&self) -> StratumCode {
        let labels: Vec<VertexLabel> = (0..self.len()).map(|v| self.label(v)).collect();
        canon::canonical_form(&labels, &self.adj).0
    }

    pub fn from_code(code: &StratumCode) -> Self {
        let n = code.vertices.len();
        let mut adj = vec![vec![0; n]; n];
        let mut k = 0;
        for j in 0..n {
            for i in 0..=j {
                adj[i][j] = code.adjacency[k];
                adj[j][i] = code.adjacency[k];
                k += 1;
            }
        }
        Dense {
            genus: code.vertices.iter().map(|l| l.genus).collect(),
            degree: code.vertices.iter().map(|l| l.degree).collect(),
            tails: code.vertices.iter().map(|l| l.tails.clone()).collect(),
            adj,
        }
    }

    pub fn to_stratum(&self) -> StratumData {
        let n = self.len();
        let vertices = (0..n).map(|i| Vertex { id: i as VertexId, genus: self.genus[i] }).collect();
        let mut edges = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                for _ in 0..self.adj[i][j] {
                    edges.push((i as VertexId, j as VertexId));
                }
            }
        }
        let tails = (0..n)
            .flat_map(|i| self.tails[i].iter().map(move |&t| (t, i as VertexId)))
            .collect();
        StratumData { vertices, edges, tails }
    }

    pub fn to_map_stratum(&self) -> MapStratumData {
        let base = self.to_stratum();
        let degrees = (0..self.len()).map(|i| (i as VertexId, self.degree[i])).collect();
        MapStratumData { base, degrees }
    }

    pub fn vertex_is_stable(&self, v: usize, maps: bool) -> bool {
        2 * self.genus[v] + self.valence(v) >= 3 || (maps && self.degree[v] > 0)
    }
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: VertexId,
    genus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct StratumJson {
    vertices: Vec<VertexJson>,
    edges: Vec<[VertexId; 2]>,
    #[serde(default)]
    tails: BTreeMap<String, VertexId>,
}

impl StratumJson {
    fn from_parts(s: &StratumData, degrees: Option<&BTreeMap<VertexId, u32>>) -> Self {
        StratumJson {
            vertices: s
                .vertices
                .iter()
                .map(|v| VertexJson { id: v.id, genus: v.genus, degree: degrees.map(|d| d[&v.id]) })
                .collect(),
            edges: s.edges.iter().map(|&(a, b)| [a, b]).collect(),
            tails: s.tails.iter().map(|(j, t)| (j.to_string(), *t)).collect(),
        }
    }

    #[allow(clippy::type_complexity)]
    fn into_stratum(self) -> Result<(StratumData, BTreeMap<VertexId, Option<u32>>), GraphError> {
        let mut tails = BTreeMap::new();
        for (k, v) in self.tails {
            let j: u32 = k.parse().map_err(|_| GraphError::Json(format!("tail label {k:?} is not an integer")))?;
            tails.insert(j, v);
        }
        let degrees = self.vertices.iter().map(|v| (v.id, v.degree)).collect();
        let vertices = self.vertices.iter().map(|v| Vertex { id: v.id, genus: v.genus }).collect();
        let edges = self.edges.into_iter().map(|[a, b]| (a, b)).collect();
        Ok((StratumData::new(vertices, edges, tails)?, degrees))
    }
}
