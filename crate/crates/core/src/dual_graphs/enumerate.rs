use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{Dense, GraphError, MapStratumData, StratumCode, StratumData};

/// Upper bound on the vertex count of a stable (map) stratum:
/// every degree-zero vertex adds at least 1 to `sum (2 g_k - 2 + val_k) = 2g - 2 + m`
/// and a positive-degree vertex subtracts at most 1.
pub fn vertex_bound(g: u32, m: u32, d: u32) -> usize {
    (2 * g as i64 - 2 + m as i64 + 2 * d as i64).max(1) as usize
}

/// Stable stratum data of genus `g` with `m` tails, one canonical
/// representative per isomorphism class, sorted by canonical code.
pub fn enumerate_strata(g: u32, m: u32) -> Result<Vec<StratumData>, GraphError> {
    if 2 * g + m < 3 {
        return Err(GraphError::Unstable { genus: g, marks: m });
    }
    Ok(enumerate(g, m, 0, false).iter().map(|c| Dense::from_code(c).to_stratum()).collect())
}

/// Stable map-stratum data of genus `g`, `m` tails and total degree `d`.
pub fn enumerate_map_strata(g: u32, m: u32, d: u32) -> Vec<MapStratumData> {
    if d == 0 && 2 * g + m < 3 {
        return Vec::new();
    }
    enumerate(g, m, d, true).iter().map(|c| Dense::from_code(c).to_map_stratum()).collect()
}

// Stability survives contraction, so every stable stratum is reached from
// the smooth one through stable single-edge degenerations.
fn enumerate(g: u32, m: u32, d: u32, maps: bool) -> BTreeSet<StratumCode> {
    let bound = vertex_bound(g, m, d);
    let smooth = Dense {
        genus: vec![g],
        degree: vec![d],
        tails: vec![(1..=m).collect()],
        adj: vec![vec![0]],
    };
    let mut seen: BTreeSet<StratumCode> = BTreeSet::new();
    seen.insert(smooth.code());
    let mut frontier = vec![smooth];
    while !frontier.is_empty() {
        let next: BTreeSet<StratumCode> = frontier
            .par_iter()
            .flat_map_iter(|s| degenerations(s, maps))
            .map(|s| s.code())
            .collect();
        frontier = next
            .into_iter()
            .filter(|c| seen.insert(c.clone()))
            .map(|c| Dense::from_code(&c))
            .collect();
        assert!(frontier.iter().all(|s| s.len() <= bound), "vertex bound exceeded");
    }
    seen
}

/// Stable data with one more edge that contract back onto `s`.
fn degenerations(s: &Dense, maps: bool) -> Vec<Dense> {
    let n = s.len();
    let mut out = Vec::new();
    for v in 0..n {
        if s.genus[v] > 0 {
            let mut t = s.clone();
            t.genus[v] -= 1;
            t.adj[v][v] += 1;
            out.push(t);
        }
        split_vertex(s, v, maps, &mut out);
    }
    out
}

/// Replaces `v` by `v` and a new vertex `w` joined by an edge, distributing
/// genus, degree, tails, loops and incident edges in every possible way.
fn split_vertex(s: &Dense, v: usize, maps: bool, out: &mut Vec<Dense>) {
    let n = s.len();
    let w = n;
    let neighbours: Vec<usize> = (0..n).filter(|&u| u != v && s.adj[v][u] > 0).collect();
    let tails = &s.tails[v];
    let loops = s.adj[v][v];

    let mut base = s.clone();
    base.genus.push(0);
    base.degree.push(0);
    base.tails.push(Vec::new());
    for row in base.adj.iter_mut() {
        row.push(0);
    }
    base.adj.push(vec![0; n + 1]);

    for gw in 0..=s.genus[v] {
        for dw in 0..=s.degree[v] {
            for tail_mask in 0u32..(1 << tails.len()) {
                for_each_edge_split(&neighbours, s, v, 0, &mut Vec::new(), &mut |moved| {
                    for loops_w in 0..=loops {
                        for loops_vw in 0..=loops - loops_w {
                            let mut t = base.clone();
                            t.genus[v] -= gw;
                            t.genus[w] = gw;
                            t.degree[v] -= dw;
                            t.degree[w] = dw;
                            let (to_w, stay): (Vec<_>, Vec<_>) =
                                tails.iter().enumerate().partition(|(i, _)| tail_mask >> i & 1 == 1);
                            t.tails[v] = stay.into_iter().map(|(_, &j)| j).collect();
                            t.tails[w] = to_w.into_iter().map(|(_, &j)| j).collect();
                            for (&u, &k) in neighbours.iter().zip(moved) {
                                t.adj[v][u] -= k;
                                t.adj[u][v] -= k;
                                t.adj[w][u] = k;
                                t.adj[u][w] = k;
                            }
                            t.adj[v][v] = loops - loops_w - loops_vw;
                            t.adj[w][w] = loops_w;
                            t.adj[v][w] = loops_vw + 1;
                            t.adj[w][v] = loops_vw + 1;
                            if t.vertex_is_stable(v, maps) && t.vertex_is_stable(w, maps) {
                                out.push(t);
                            }
                        }
                    }
                });
            }
        }
    }
}

fn for_each_edge_split(
    neighbours: &[usize],
    s: &Dense,
    v: usize,
    i: usize,
    moved: &mut Vec<u32>,
    f: &mut dyn FnMut(&[u32]),
) {
    if i == neighbours.len() {
        f(moved);
        return;
    }
    for k in 0..=s.adj[v][neighbours[i]] {
        moved.push(k);
        for_each_edge_split(neighbours, s, v, i + 1, moved, f);
        moved.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_strata(0, 3).unwrap().len(), 1);
        assert_eq!(enumerate_strata(0, 4).unwrap().len(), 4);
        assert_eq!(enumerate_strata(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_strata(0, 2), Err(GraphError::Unstable { genus: 0, marks: 2 }));
    }

    #[test]
    fn map_counts() {
        assert_eq!(enumerate_map_strata(0, 0, 1).len(), 1);
        assert!(enumerate_map_strata(0, 0, 0).is_empty());
        // smooth and the two-component splitting 1 + 1
        assert_eq!(enumerate_map_strata(0, 0, 2).len(), 2);
    }

    #[test]
    fn outputs_are_stable_and_connected() {
        for s in enumerate_strata(1, 2).unwrap() {
            assert!(s.is_stable());
            assert_eq!(s.total_genus(), 1);
            assert_eq!(s.num_marks(), 2);
        }
        for ms in enumerate_map_strata(1, 0, 2) {
            assert!(ms.is_stable());
            assert_eq!(ms.total_degree(), 2);
            assert_eq!(ms.total_genus(), 1);
        }
    }
}
