//! Exhaustive canonical labelling for small decorated multigraphs.
//!
//! Vertices carry an isomorphism-invariant label and every vertex pair
//! carries an adjacency label (edge multiplicity, list of edge weights, ...).
//! The canonical form is the lexicographically least adjacency code over all
//! vertex orders that sort the vertex labels. Graphs here have at most a
//! dozen vertices, so the search is a plain backtracking over label cells
//! with prefix pruning.

/// Canonical code of a decorated graph: sorted vertex labels and the
/// column-major upper triangle of the relabelled adjacency matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode<V, A> {
    pub vertices: Vec<V>,
    pub adjacency: Vec<A>,
}

/// Returns the canonical code and one vertex order realizing it
/// (`order[position] = original vertex`).
pub fn canonical_form<V, A>(labels: &[V], adj: &[Vec<A>]) -> (CanonicalCode<V, A>, Vec<usize>)
where
    V: Ord + Clone,
    A: Ord + Clone,
{
    let n = labels.len();
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    // cell_start[p] = first position of the label cell containing p
    let mut cell_start = vec![0; n];
    for p in 1..n {
        cell_start[p] = if labels[sorted[p]] == labels[sorted[p - 1]] { cell_start[p - 1] } else { p };
    }
    let mut cell_end = vec![n; n];
    for p in (0..n).rev() {
        if p + 1 < n && cell_start[p + 1] == cell_start[p] {
            cell_end[p] = cell_end[p + 1];
        } else {
            cell_end[p] = p + 1;
        }
    }

    let mut search = Search {
        adj,
        sorted: &sorted,
        cell_start: &cell_start,
        cell_end: &cell_end,
        order: Vec::with_capacity(n),
        used: vec![false; n],
        code: Vec::with_capacity(n * (n + 1) / 2),
        best: None,
    };
    search.run();
    let (code, order) = search.best.unwrap_or_default();
    let vertices = sorted.iter().map(|&v| labels[v].clone()).collect();
    (CanonicalCode { vertices, adjacency: code }, order)
}

struct Search<'a, A> {
    adj: &'a [Vec<A>],
    sorted: &'a [usize],
    cell_start: &'a [usize],
    cell_end: &'a [usize],
    order: Vec<usize>,
    used: Vec<bool>,
    code: Vec<A>,
    best: Option<(Vec<A>, Vec<usize>)>,
}

impl<A: Ord + Clone> Search<'_, A> {
    fn run(&mut self) {
        let pos = self.order.len();
        if pos == self.sorted.len() {
            let better = match &self.best {
                None => true,
                Some((b, _)) => self.code < *b,
            };
            if better {
                self.best = Some((self.code.clone(), self.order.clone()));
            }
            return;
        }
        let (lo, hi) = (self.cell_start[pos], self.cell_end[pos]);
        for slot in lo..hi {
            let v = self.sorted[slot];
            if self.used[v] {
                continue;
            }
            let mark = self.code.len();
            for i in 0..pos {
                self.code.push(self.adj[self.order[i]][v].clone());
            }
            self.code.push(self.adj[v][v].clone());
            if let Some((best, _)) = &self.best {
                if self.code[..] > best[..self.code.len()] {
                    self.code.truncate(mark);
                    continue;
                }
            }
            self.used[v] = true;
            self.order.push(v);
            self.run();
            self.order.pop();
            self.used[v] = false;
            self.code.truncate(mark);
        }
    }
}

/// All vertex permutations `p` with `labels[p[v]] == labels[v]` and
/// `adj[p[a]][p[b]] == adj[a][b]`, found by backtracking.
pub fn label_preserving_automorphisms<V: Eq, A: Eq>(labels: &[V], adj: &[Vec<A>]) -> Vec<Vec<usize>> {
    let n = labels.len();
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go<V: Eq, A: Eq>(
        v: usize,
        labels: &[V],
        adj: &[Vec<A>],
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = labels.len();
        if v == n {
            out.push(image.clone());
            return;
        }
        for w in 0..n {
            if used[w] || labels[w] != labels[v] || adj[w][w] != adj[v][v] {
                continue;
            }
            if (0..v).any(|u| adj[image[u]][w] != adj[u][v]) {
                continue;
            }
            used[w] = true;
            image[v] = w;
            go(v + 1, labels, adj, image, used, out);
            used[w] = false;
        }
        image[v] = usize::MAX;
    }
    go(0, labels, adj, &mut image, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(labels: &[u8], edges: &[(usize, usize)]) -> (Vec<u8>, Vec<Vec<u32>>) {
        let n = labels.len();
        let mut adj = vec![vec![0u32; n]; n];
        for &(a, b) in edges {
            adj[a][b] += 1;
            if a != b {
                adj[b][a] += 1;
            }
        }
        (labels.to_vec(), adj)
    }

    #[test]
    fn relabelled_graphs_share_code() {
        let (l1, a1) = path(&[0, 0, 1], &[(0, 1), (1, 2)]);
        let (l2, a2) = path(&[1, 0, 0], &[(0, 1), (1, 2)]);
        let (l3, a3) = path(&[0, 1, 0], &[(0, 1), (1, 2)]);
        let c1 = canonical_form(&l1, &a1).0;
        assert_eq!(c1, canonical_form(&l2, &a2).0);
        assert_ne!(c1, canonical_form(&l3, &a3).0);
    }

    #[test]
    fn order_realizes_code() {
        let (l, a) = path(&[0, 0, 0, 0], &[(0, 1), (1, 2), (2, 3), (3, 3)]);
        let (code, order) = canonical_form(&l, &a);
        let mut k = 0;
        for j in 0..4 {
            for i in 0..=j {
                assert_eq!(code.adjacency[k], a[order[i]][order[j]]);
                k += 1;
            }
        }
    }

    #[test]
    fn automorphisms_of_a_triangle() {
        let (l, a) = path(&[0, 0, 0], &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(label_preserving_automorphisms(&l, &a).len(), 6);
        let (l, a) = path(&[0, 0, 1], &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(label_preserving_automorphisms(&l, &a).len(), 2);
    }
}
