//! Independent brute-force enumeration and isomorphism testing, used to
//! cross-check the degeneration enumerator and the canonical forms.
//!
//! Nothing here touches the canonical-code machinery: candidates are generated
//! directly from vertex counts, genus/degree vectors, tail placements and edge
//! multisets, then deduplicated with a pairwise backtracking isomorphism test.

use std::collections::{BTreeMap, HashMap};

use super::{MapStratumData, StratumData, Vertex, VertexId};

#[derive(Clone, Debug)]
struct Raw {
    genus: Vec<u32>,
    degree: Vec<u32>,
    tail_of: Vec<usize>,
    adj: Vec<Vec<u32>>,
}

impl Raw {
    fn from_map(ms: &MapStratumData) -> Self {
        let ids: Vec<VertexId> = ms.base().vertices().iter().map(|v| v.id).collect();
        let idx = |id: VertexId| ids.iter().position(|&x| x == id).unwrap();
        let n = ids.len();
        let mut adj = vec![vec![0; n]; n];
        for &(a, b) in ms.base().edges() {
            let (x, y) = (idx(a), idx(b));
            adj[x][y] += 1;
            if x != y {
                adj[y][x] += 1;
            }
        }
        Raw {
            genus: ms.base().vertices().iter().map(|v| v.genus).collect(),
            degree: ids.iter().map(|&id| ms.degree(id)).collect(),
            tail_of: ms.base().tails().values().map(|&t| idx(t)).collect(),
            adj,
        }
    }

    fn to_map(&self) -> MapStratumData {
        let n = self.genus.len();
        let vertices = (0..n).map(|i| Vertex { id: i as VertexId, genus: self.genus[i] }).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                for _ in 0..self.adj[i][j] {
                    edges.push((i as VertexId, j as VertexId));
                }
            }
        }
        let tails = self.tail_of.iter().enumerate().map(|(j, &t)| (j as u32 + 1, t as VertexId)).collect();
        let base = StratumData::new(vertices, edges, tails).expect("oracle builds valid data");
        let degrees = (0..n).map(|i| (i as VertexId, self.degree[i])).collect();
        MapStratumData::new(base, degrees).expect("oracle builds valid data")
    }

    fn valence(&self, v: usize) -> u32 {
        let ends: u32 = (0..self.genus.len()).map(|u| self.adj[v][u] * if u == v { 2 } else { 1 }).sum();
        ends + self.tail_of.iter().filter(|&&t| t == v).count() as u32
    }

    fn connected(&self) -> bool {
        let n = self.genus.len();
        let mut comp: Vec<usize> = (0..n).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                for j in 0..n {
                    if self.adj[i][j] > 0 && comp[j] > comp[i] {
                        comp[j] = comp[i];
                        changed = true;
                    }
                }
            }
        }
        comp.iter().all(|&c| c == 0)
    }

    fn stable(&self, maps: bool) -> bool {
        (0..self.genus.len()).all(|v| 2 * self.genus[v] + self.valence(v) >= 3 || (maps && self.degree[v] > 0))
    }

    fn invariant(&self) -> Vec<(u32, u32, Vec<usize>, u32)> {
        let mut inv: Vec<_> = (0..self.genus.len())
            .map(|v| {
                let tails = (0..self.tail_of.len()).filter(|&j| self.tail_of[j] == v).collect();
                (self.genus[v], self.degree[v], tails, self.valence(v))
            })
            .collect();
        inv.sort();
        inv
    }
}

fn raw_isomorphic(a: &Raw, b: &Raw) -> bool {
    let n = a.genus.len();
    if n != b.genus.len() || a.tail_of.len() != b.tail_of.len() {
        return false;
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(a: &Raw, b: &Raw, v: usize, image: &mut [usize], used: &mut [bool]) -> bool {
        let n = a.genus.len();
        if v == n {
            return a.tail_of.iter().zip(&b.tail_of).all(|(&x, &y)| image[x] == y);
        }
        for w in 0..n {
            if used[w] || a.genus[v] != b.genus[w] || a.degree[v] != b.degree[w] || a.adj[v][v] != b.adj[w][w] {
                continue;
            }
            if (0..v).any(|u| a.adj[u][v] != b.adj[image[u]][w]) {
                continue;
            }
            image[v] = w;
            used[w] = true;
            if extend(a, b, v + 1, image, used) {
                return true;
            }
            used[w] = false;
        }
        false
    }
    extend(a, b, 0, &mut image, &mut used)
}

/// Isomorphism of stratum data by direct search over vertex bijections.
pub fn isomorphic(a: &StratumData, b: &StratumData) -> bool {
    let zero = |s: &StratumData| s.vertices().iter().map(|v| (v.id, 0)).collect::<BTreeMap<_, _>>();
    let ma = MapStratumData::new(a.clone(), zero(a)).expect("degrees complete");
    let mb = MapStratumData::new(b.clone(), zero(b)).expect("degrees complete");
    isomorphic_maps(&ma, &mb)
}

pub fn isomorphic_maps(a: &MapStratumData, b: &MapStratumData) -> bool {
    raw_isomorphic(&Raw::from_map(a), &Raw::from_map(b))
}

/// Brute-force list of stable strata of genus `g` with `m` tails.
pub fn brute_force_strata(g: u32, m: u32) -> Vec<StratumData> {
    brute_force(g, m, 0, false).into_iter().map(|r| r.to_map().base().clone()).collect()
}

/// Brute-force list of stable map strata of genus `g`, `m` tails, degree `d`.
pub fn brute_force_map_strata(g: u32, m: u32, d: u32) -> Vec<MapStratumData> {
    brute_force(g, m, d, true).into_iter().map(|r| r.to_map()).collect()
}

fn brute_force(g: u32, m: u32, d: u32, maps: bool) -> Vec<Raw> {
    // Same bound as the enumerator, rederived: sum_k (2 g_k - 2 + val_k) = 2g - 2 + m.
    let max_vertices = (2 * g as i64 - 2 + m as i64 + 2 * d as i64).max(1) as usize;
    let mut classes: HashMap<Vec<(u32, u32, Vec<usize>, u32)>, Vec<Raw>> = HashMap::new();
    for n in 1..=max_vertices {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        // edges = n - 1 + b1 with b1 <= g
        for b1 in 0..=g {
            let n_edges = n - 1 + b1 as usize;
            let vertex_genus = g - b1;
            let labels = sorted_labels(n, vertex_genus, if maps { d } else { 0 });
            for edges in multisets(pairs.len(), n_edges) {
                let mut adj = vec![vec![0; n]; n];
                for (p, &k) in edges.iter().enumerate() {
                    let (i, j) = pairs[p];
                    adj[i][j] += k;
                    if i != j {
                        adj[j][i] += k;
                    }
                }
                for (genus, degree) in &labels {
                    for tail_of in tuples(n, m as usize) {
                        let raw = Raw { genus: genus.clone(), degree: degree.clone(), tail_of, adj: adj.clone() };
                        if !raw.connected() || !raw.stable(maps) {
                            continue;
                        }
                        let bucket = classes.entry(raw.invariant()).or_default();
                        if !bucket.iter().any(|r| raw_isomorphic(r, &raw)) {
                            bucket.push(raw);
                        }
                    }
                }
            }
        }
    }
    classes.into_values().flatten().collect()
}

/// Genus/degree vectors whose (genus, degree) pairs are non-decreasing;
/// every vertex labelling is isomorphic to one of these after reordering.
fn sorted_labels(n: usize, genus: u32, degree: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = Vec::new();
    for gs in compositions(genus, n) {
        for ds in compositions(degree, n) {
            let pairs: Vec<(u32, u32)> = gs.iter().copied().zip(ds.iter().copied()).collect();
            if pairs.windows(2).all(|w| w[0] <= w[1]) {
                out.push((gs.clone(), ds));
            }
        }
    }
    out
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Multiplicity vectors over `slots` slots with the given total.
fn multisets(slots: usize, total: usize) -> Vec<Vec<u32>> {
    compositions(total as u32, slots)
}

fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}
