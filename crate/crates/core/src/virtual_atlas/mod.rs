//! Finite models of virtual manifolds: patch systems `{X_I, X_{J,I}, φ_{J,I}}`
//! indexed by subsets of `{1..n}`, the patching axioms, the
//! fibre-product condition, the cover construction and the virtual space.
//!
//! Subsets are bitmasks (bit `i - 1` for index `i`). Points are opaque `u64`
//! ids local to each `X_I`. Smoothness and bundle structure have no finite
//! content; the checks cover the set-theoretic identities, surjectivity and
//! constant fibre cardinality.

mod json;
mod model;
mod transition;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use json::AtlasJson;
pub use model::{delete_overlap_point, from_cover, product_model, random_cover, CoverInput};
pub use transition::{check_transition_data, TransitionLabeling};

pub type Subset = u32;
pub type Point = u64;

pub const MAX_INDICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlasError {
    #[error("at most {MAX_INDICES} indices are supported (got {0})")]
    TooManyIndices(usize),
    #[error("X_∅ must be nonempty")]
    EmptyBase,
    #[error("point {0} is not covered by any U_i")]
    NotCovered(Point),
    #[error("point {0} lies in several U_i but in neither U_0 nor any U°_i")]
    ShrinkGap(Point),
    #[error("shrunk set U°_{0} is not contained in U_{0}")]
    ShrinkNotContained(usize),
    #[error("expected {expected} sets, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("system is not patchable: {0} violation(s)")]
    NotPatchable(usize),
    #[error("malformed atlas JSON: {0}")]
    Json(String),
}

/// `X_{J,I} ⊆ X_J`, `X_{I,J} ⊆ X_I` and `φ_{J,I}: X_{J,I} -> X_{I,J}` for `I ⊊ J`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overlap {
    pub domain: BTreeSet<Point>,
    pub codomain: BTreeSet<Point>,
    pub map: BTreeMap<Point, Point>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePatchSystem {
    n: usize,
    ground: Vec<BTreeSet<Point>>,
    overlaps: BTreeMap<(Subset, Subset), Overlap>,
}

/// A patch system with a declared fibre cardinality `r_j` per index:
/// every fibre of `φ_{J,I}` must have `prod_{j ∈ J - I} r_j` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberedPatchSystem {
    pub base: FinitePatchSystem,
    pub fiber_ranks: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    NonemptyBase,
    Containment,
    Totality,
    Surjectivity,
    UpperMeet,
    LowerMeet,
    Commuting,
    FirstPreimage,
    SecondPreimage,
    FiberProduct,
    FiberCardinality,
    Transition,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub pair: (Vec<u32>, Vec<u32>),
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(mut self, other: Report) -> Report {
        self.violations.extend(other.violations);
        self
    }

    fn sorted(mut self) -> Report {
        self.violations.sort();
        self.violations.dedup();
        self
    }
}

/// 1-based index list of a subset.
pub fn indices(s: Subset) -> Vec<u32> {
    (0..32).filter(|i| s >> i & 1 == 1).map(|i| i + 1).collect()
}

pub fn subset_of(indices: &[u32]) -> Subset {
    indices.iter().fold(0, |acc, &i| acc | 1 << (i - 1))
}

fn is_subset(a: Subset, b: Subset) -> bool {
    a & !b == 0
}

fn violation(axiom: Axiom, i: Subset, j: Subset, witness: impl fmt::Display) -> Violation {
    Violation { axiom, pair: (indices(i), indices(j)), witness: witness.to_string() }
}

fn first_difference(a: &BTreeSet<Point>, b: &BTreeSet<Point>) -> Option<Point> {
    a.symmetric_difference(b).next().copied()
}

impl FinitePatchSystem {
    /// Builds a system; missing overlaps are empty. Structural checks are
    /// left to [`check_patchable`].
    pub fn new(
        n: usize,
        ground: Vec<BTreeSet<Point>>,
        overlaps: BTreeMap<(Subset, Subset), Overlap>,
    ) -> Result<Self, AtlasError> {
        if n > MAX_INDICES {
            return Err(AtlasError::TooManyIndices(n));
        }
        if ground.len() != 1 << n {
            return Err(AtlasError::WrongArity { expected: 1 << n, got: ground.len() });
        }
        if ground[0].is_empty() {
            return Err(AtlasError::EmptyBase);
        }
        Ok(FinitePatchSystem { n, ground, overlaps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self, i: Subset) -> &BTreeSet<Point> {
        &self.ground[i as usize]
    }

    pub fn overlaps(&self) -> &BTreeMap<(Subset, Subset), Overlap> {
        &self.overlaps
    }

    pub fn overlap_mut(&mut self, small: Subset, large: Subset) -> &mut Overlap {
        self.overlaps.entry((small, large)).or_default()
    }

    fn subsets(&self) -> std::ops::Range<Subset> {
        0..(1 << self.n)
    }

    /// All pairs `I ⊊ J`.
    pub fn nested_pairs(&self) -> Vec<(Subset, Subset)> {
        let mut out = Vec::new();
        for j in self.subsets() {
            for i in self.subsets() {
                if i != j && is_subset(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `X_{J,I} ⊆ X_J` for `I ⊆ J`.
    pub fn large_side(&self, j: Subset, i: Subset) -> BTreeSet<Point> {
        if i == j {
            return self.ground[j as usize].clone();
        }
        self.overlaps.get(&(i, j)).map(|o| o.domain.clone()).unwrap_or_default()
    }

    /// `X_{I,J} ⊆ X_I` for `I ⊆ J`.
    pub fn small_side(&self, i: Subset, j: Subset) -> BTreeSet<Point> {
        if i == j {
            return self.ground[i as usize].clone();
        }
        self.overlaps.get(&(i, j)).map(|o| o.codomain.clone()).unwrap_or_default()
    }

    /// `φ_{J,I}(x)` for `I ⊆ J`; `None` outside the domain.
    pub fn phi(&self, j: Subset, i: Subset, x: Point) -> Option<Point> {
        if i == j {
            return self.ground[j as usize].contains(&x).then_some(x);
        }
        self.overlaps.get(&(i, j)).and_then(|o| o.map.get(&x).copied())
    }

    fn image(&self, j: Subset, i: Subset, set: &BTreeSet<Point>) -> BTreeSet<Point> {
        set.iter().filter_map(|&x| self.phi(j, i, x)).collect()
    }

    /// Preimage of `set` under `φ_{J,I}` inside `X_{J,I}`.
    fn preimage(&self, j: Subset, i: Subset, set: &BTreeSet<Point>) -> BTreeSet<Point> {
        self.large_side(j, i)
            .into_iter()
            .filter(|&x| self.phi(j, i, x).is_some_and(|y| set.contains(&y)))
            .collect()
    }
}

/// Structural checks plus the five patching axioms for every ordered pair `(I, J)`.
pub fn check_patchable(p: &FinitePatchSystem) -> Report {
    let mut report = structural(p);
    let pairs: Vec<(Subset, Subset)> = p.subsets().flat_map(|i| p.subsets().map(move |j| (i, j))).collect();
    let axioms = pairs
        .par_iter()
        .map(|&(i, j)| axioms_for_pair(p, i, j))
        .reduce(Report::default, Report::merge);
    report = report.merge(axioms);
    report.sorted()
}

fn structural(p: &FinitePatchSystem) -> Report {
    let mut v = Vec::new();
    if p.ground[0].is_empty() {
        v.push(violation(Axiom::NonemptyBase, 0, 0, "X_∅ is empty"));
    }
    for (&(i, j), o) in &p.overlaps {
        if i == j || !is_subset(i, j) || j as usize >= p.ground.len() {
            v.push(violation(Axiom::Containment, i, j, "overlap key is not a proper inclusion I ⊊ J"));
            continue;
        }
        if let Some(x) = o.domain.difference(&p.ground[j as usize]).next() {
            v.push(violation(Axiom::Containment, i, j, format!("domain point {x} not in X_J")));
        }
        if let Some(x) = o.codomain.difference(&p.ground[i as usize]).next() {
            v.push(violation(Axiom::Containment, i, j, format!("codomain point {x} not in X_I")));
        }
        let keys: BTreeSet<Point> = o.map.keys().copied().collect();
        if let Some(x) = first_difference(&keys, &o.domain) {
            v.push(violation(Axiom::Totality, i, j, format!("map and domain disagree at {x}")));
        }
        if let Some((x, y)) = o.map.iter().find(|(_, y)| !o.codomain.contains(y)) {
            v.push(violation(Axiom::Containment, i, j, format!("φ({x}) = {y} lies outside X_(I,J)")));
        }
        let values: BTreeSet<Point> = o.map.values().copied().collect();
        if let Some(y) = o.codomain.difference(&values).next() {
            v.push(violation(Axiom::Surjectivity, i, j, format!("{y} has no preimage")));
        }
    }
    Report { violations: v }
}

fn axioms_for_pair(p: &FinitePatchSystem, i: Subset, j: Subset) -> Report {
    let (u, c) = (i | j, i & j);
    let mut v = Vec::new();
    // X_{U,C} = X_{U,I} ∩ X_{U,J}
    let x_uc = p.large_side(u, c);
    let meet: BTreeSet<Point> = p.large_side(u, i).intersection(&p.large_side(u, j)).copied().collect();
    if let Some(x) = first_difference(&x_uc, &meet) {
        v.push(violation(Axiom::UpperMeet, i, j, x));
    }
    // X_{C,U} = X_{C,I} ∩ X_{C,J}
    let x_cu = p.small_side(c, u);
    let meet: BTreeSet<Point> = p.small_side(c, i).intersection(&p.small_side(c, j)).copied().collect();
    if let Some(x) = first_difference(&x_cu, &meet) {
        v.push(violation(Axiom::LowerMeet, i, j, x));
    }
    // φ_{U,C} = φ_{I,C} ∘ φ_{U,I} = φ_{J,C} ∘ φ_{U,J} on X_{U,C}
    for &x in &x_uc {
        let direct = p.phi(u, c, x);
        let via_i = p.phi(u, i, x).and_then(|y| p.phi(i, c, y));
        let via_j = p.phi(u, j, x).and_then(|y| p.phi(j, c, y));
        if direct.is_none() || direct != via_i || direct != via_j {
            v.push(violation(Axiom::Commuting, i, j, x));
            break;
        }
    }
    // φ_{U,I}(X_{U,C}) = φ_{I,C}^{-1}(X_{C,U})
    for (side, axiom) in [(i, Axiom::FirstPreimage), (j, Axiom::SecondPreimage)] {
        let lhs = p.image(u, side, &x_uc);
        let rhs = p.preimage(side, c, &x_cu);
        if let Some(x) = first_difference(&lhs, &rhs) {
            v.push(violation(axiom, i, j, x));
        }
    }
    Report { violations: v }
}

/// Checks `X_{U,C} = X_{I,J} ×_{X_{C,U}} X_{J,I}` for every pair, plus the
/// declared fibre cardinalities.
pub fn check_fiber_product(p: &FiberedPatchSystem) -> Report {
    let base = &p.base;
    let pairs: Vec<(Subset, Subset)> =
        base.subsets().flat_map(|i| base.subsets().map(move |j| (i, j))).collect();
    let products = pairs
        .par_iter()
        .map(|&(i, j)| fiber_product_for_pair(base, i, j))
        .reduce(Report::default, Report::merge);
    let mut cards = Vec::new();
    for (i, j) in base.nested_pairs() {
        let expected: usize = indices(j & !i).iter().map(|&k| p.fiber_ranks[k as usize - 1]).product();
        let mut fibres: BTreeMap<Point, usize> = base.small_side(i, j).iter().map(|&y| (y, 0)).collect();
        for x in base.large_side(j, i) {
            if let Some(y) = base.phi(j, i, x) {
                *fibres.entry(y).or_default() += 1;
            }
        }
        if let Some((y, n)) = fibres.iter().find(|(_, &n)| n != expected) {
            cards.push(violation(
                Axiom::FiberCardinality,
                i,
                j,
                format!("fibre over {y} has {n} points, expected {expected}"),
            ));
        }
    }
    products.merge(Report { violations: cards }).sorted()
}

fn fiber_product_for_pair(p: &FinitePatchSystem, i: Subset, j: Subset) -> Report {
    let (u, c) = (i | j, i & j);
    let x_uc = p.large_side(u, c);
    let x_cu = p.small_side(c, u);
    let left = p.image(u, i, &x_uc);
    let right = p.image(u, j, &x_uc);
    let mut target: BTreeSet<(Point, Point)> = BTreeSet::new();
    for &a in &left {
        for &b in &right {
            match (p.phi(i, c, a), p.phi(j, c, b)) {
                (Some(s), Some(t)) if s == t && x_cu.contains(&s) => {
                    target.insert((a, b));
                }
                _ => {}
            }
        }
    }
    let mut hit: BTreeSet<(Point, Point)> = BTreeSet::new();
    for &x in &x_uc {
        let pair = match (p.phi(u, i, x), p.phi(u, j, x)) {
            (Some(a), Some(b)) => (a, b),
            _ => return report_one(Axiom::FiberProduct, i, j, format!("legs undefined at {x}")),
        };
        if !target.contains(&pair) {
            return report_one(Axiom::FiberProduct, i, j, format!("{x} maps outside the fibre product"));
        }
        if !hit.insert(pair) {
            return report_one(Axiom::FiberProduct, i, j, format!("{x} collides at ({}, {})", pair.0, pair.1));
        }
    }
    if let Some((a, b)) = target.difference(&hit).next() {
        return report_one(Axiom::FiberProduct, i, j, format!("({a}, {b}) has no preimage"));
    }
    Report::default()
}

fn report_one(axiom: Axiom, i: Subset, j: Subset, witness: String) -> Report {
    Report { violations: vec![violation(axiom, i, j, witness)] }
}

/// Quotient `∪ X_I / ∼` with the projections `φ_I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualSpace {
    pub classes: Vec<Vec<(Subset, Point)>>,
    pub projection: BTreeMap<(Subset, Point), usize>,
    /// Pairs identified by the transitive closure that the literal relation
    /// `φ_{I,K}(x) = φ_{J,K}(y)` does not relate directly.
    pub closure_added_pairs: usize,
}

impl VirtualSpace {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

pub fn virtual_space(p: &FinitePatchSystem) -> Result<VirtualSpace, AtlasError> {
    let report = check_patchable(p);
    if !report.passed() {
        return Err(AtlasError::NotPatchable(report.violations.len()));
    }
    let nodes: Vec<(Subset, Point)> =
        p.subsets().flat_map(|i| p.ground[i as usize].iter().map(move |&x| (i, x))).collect();
    let index: BTreeMap<(Subset, Point), usize> = nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // x ∈ X_I is related to φ_{I,K}(x) ∈ X_K; these pairs generate ∼
    for (k, o) in &p.overlaps {
        let (small, large) = *k;
        for (&x, &y) in &o.map {
            let a = find(&mut parent, index[&(large, x)]);
            let b = find(&mut parent, index[&(small, y)]);
            parent[a] = b;
        }
    }
    let mut by_root: BTreeMap<usize, Vec<(Subset, Point)>> = BTreeMap::new();
    for (k, &n) in nodes.iter().enumerate() {
        let r = find(&mut parent, k);
        by_root.entry(r).or_default().push(n);
    }
    let classes: Vec<Vec<(Subset, Point)>> = by_root.into_values().collect();
    let projection = classes
        .iter()
        .enumerate()
        .flat_map(|(c, members)| members.iter().map(move |&m| (m, c)))
        .collect();
    let mut added = 0;
    for members in &classes {
        for (a, &(i, x)) in members.iter().enumerate() {
            for &(j, y) in &members[a + 1..] {
                if !literally_related(p, i, x, j, y) {
                    added += 1;
                }
            }
        }
    }
    Ok(VirtualSpace { classes, projection, closure_added_pairs: added })
}

fn literally_related(p: &FinitePatchSystem, i: Subset, x: Point, j: Subset, y: Point) -> bool {
    let c = i & j;
    // K ranges over subsets of I ∩ J
    let mut k = c;
    loop {
        if let (Some(a), Some(b)) = (p.phi(i, k, x), p.phi(j, k, y)) {
            if a == b {
                return true;
            }
        }
        if k == 0 {
            return false;
        }
        k = (k - 1) & c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: impl IntoIterator<Item = Point>) -> BTreeSet<Point> {
        xs.into_iter().collect()
    }

    #[test]
    fn trivial_system_passes() {
        let p = FinitePatchSystem::new(0, vec![set([1, 2, 3])], BTreeMap::new()).unwrap();
        assert!(check_patchable(&p).passed());
        let vs = virtual_space(&p).unwrap();
        assert_eq!(vs.len(), 3);
        assert_eq!(vs.closure_added_pairs, 0);
        assert_eq!(FinitePatchSystem::new(0, vec![set([])], BTreeMap::new()), Err(AtlasError::EmptyBase));
        assert!(FinitePatchSystem::new(13, vec![], BTreeMap::new()).is_err());
    }

    #[test]
    fn subset_encoding() {
        assert_eq!(indices(0b101), vec![1, 3]);
        assert_eq!(subset_of(&[1, 3]), 0b101);
    }

    #[test]
    fn non_surjective_map_is_named() {
        let mut p = FinitePatchSystem::new(1, vec![set([1, 2]), set([5, 6])], BTreeMap::new()).unwrap();
        *p.overlap_mut(0, 1) =
            Overlap { domain: set([5]), codomain: set([1, 2]), map: [(5, 1)].into_iter().collect() };
        let r = check_patchable(&p);
        assert!(r.violations.iter().any(|v| v.axiom == Axiom::Surjectivity && v.witness.contains('2')));
        assert!(virtual_space(&p).is_err());
    }

    #[test]
    fn disjoint_patches_give_singletons() {
        let p = FinitePatchSystem::new(1, vec![set([1, 2]), set([7, 8])], BTreeMap::new()).unwrap();
        assert!(check_patchable(&p).passed());
        let vs = virtual_space(&p).unwrap();
        assert_eq!(vs.len(), 4);
        assert!(vs.classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn gluing_identifies_points() {
        let mut p = FinitePatchSystem::new(1, vec![set([1, 2]), set([10, 11])], BTreeMap::new()).unwrap();
        *p.overlap_mut(0, 1) =
            Overlap { domain: set([10]), codomain: set([2]), map: [(10, 2)].into_iter().collect() };
        assert!(check_patchable(&p).passed());
        let vs = virtual_space(&p).unwrap();
        assert_eq!(vs.len(), 3);
        assert_eq!(vs.projection[&(0, 2)], vs.projection[&(1, 10)]);
    }
}
