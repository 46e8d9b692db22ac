use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IteratorRandom;
use rand::Rng;

use super::{indices, AtlasError, FiberedPatchSystem, FinitePatchSystem, Overlap, Point, Subset, MAX_INDICES};

/// Cover data: points, `U_0..U_n` and shrunk sets `U°_1..U°_n`
/// (`shrunk[i - 1]` belongs to `U_i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverInput {
    pub points: BTreeSet<Point>,
    pub cover: Vec<BTreeSet<Point>>,
    pub shrunk: Vec<BTreeSet<Point>>,
}

/// A point outside `U_0` and every `U°_i` may lie in at most one `U_i`.
/// `X_∅ = U_0 - ∪ U°_i`, `X_I = ∩_{i∈I} U_i - ∪_{j∉I} U°_j`, all overlaps
/// `X_I ∩ X_J` and all maps identities.
pub fn from_cover(input: &CoverInput) -> Result<FinitePatchSystem, AtlasError> {
    let n = input.shrunk.len();
    if input.cover.len() != n + 1 {
        return Err(AtlasError::WrongArity { expected: n + 1, got: input.cover.len() });
    }
    if n > MAX_INDICES {
        return Err(AtlasError::TooManyIndices(n));
    }
    for (i, s) in input.shrunk.iter().enumerate() {
        if !s.is_subset(&input.cover[i + 1]) {
            return Err(AtlasError::ShrinkNotContained(i + 1));
        }
    }
    for &x in &input.points {
        let hits = input.cover[1..].iter().filter(|u| u.contains(&x)).count();
        if hits == 0 && !input.cover[0].contains(&x) {
            return Err(AtlasError::NotCovered(x));
        }
        // such a point lies in X_I, X_J and X_{I∪J} for disjoint I, J but
        // not in X_∅, which breaks the upper-meet axiom
        if hits >= 2 && !input.cover[0].contains(&x) && !input.shrunk.iter().any(|u| u.contains(&x)) {
            return Err(AtlasError::ShrinkGap(x));
        }
    }
    let ground: Vec<BTreeSet<Point>> = (0..1u32 << n)
        .map(|s| {
            let members = indices(s);
            let mut x: BTreeSet<Point> = if members.is_empty() {
                input.cover[0].clone()
            } else {
                let mut acc = input.cover[members[0] as usize].clone();
                for &i in &members[1..] {
                    acc = acc.intersection(&input.cover[i as usize]).copied().collect();
                }
                acc
            };
            x = x.intersection(&input.points).copied().collect();
            for j in 1..=n as u32 {
                if !members.contains(&j) {
                    x = x.difference(&input.shrunk[j as usize - 1]).copied().collect();
                }
            }
            x
        })
        .collect();
    let mut overlaps = BTreeMap::new();
    for j in 0..1u32 << n {
        for i in 0..1u32 << n {
            if i != j && i & !j == 0 {
                let both: BTreeSet<Point> = ground[i as usize].intersection(&ground[j as usize]).copied().collect();
                let map = both.iter().map(|&x| (x, x)).collect();
                overlaps.insert((i, j), Overlap { domain: both.clone(), codomain: both, map });
            }
        }
    }
    FinitePatchSystem::new(n, ground, overlaps)
}

/// A random cover of `0..n_points` by `n + 1` sets whose `X_∅` is nonempty.
pub fn random_cover<R: Rng>(rng: &mut R, n: usize, n_points: usize) -> CoverInput {
    loop {
        let points: BTreeSet<Point> = (0..n_points as Point).collect();
        let mut cover: Vec<BTreeSet<Point>> = (0..=n)
            .map(|_| points.iter().copied().filter(|_| rng.gen_bool(0.45)).collect())
            .collect();
        for &x in &points {
            if !cover.iter().any(|u| u.contains(&x)) {
                cover[rng.gen_range(0..=n)].insert(x);
            }
        }
        let shrunk: Vec<BTreeSet<Point>> =
            (1..=n).map(|i| cover[i].iter().copied().filter(|_| rng.gen_bool(0.6)).collect()).collect();
        for &x in &points {
            let hits = cover[1..].iter().filter(|u| u.contains(&x)).count();
            if hits >= 2 && !cover[0].contains(&x) && !shrunk.iter().any(|u| u.contains(&x)) {
                cover[0].insert(x);
            }
        }
        let input = CoverInput { points, cover, shrunk };
        if from_cover(&input).is_ok() {
            return input;
        }
    }
}

const FIBER_BITS: u32 = 2;

/// `X_I = B_I × prod_{i∈I} F_i` over the cover-model bases `B_I`, with
/// `|F_i| = fiber_sizes[i - 1] <= 3` and projections forgetting coordinates.
pub fn product_model(input: &CoverInput, fiber_sizes: &[usize]) -> Result<FiberedPatchSystem, AtlasError> {
    let bases = from_cover(input)?;
    let n = bases.n();
    assert_eq!(fiber_sizes.len(), n, "one fibre size per index");
    assert!(fiber_sizes.iter().all(|&s| (1..=3).contains(&s)), "fibre sizes must lie in 1..=3");
    let encode = |b: Point, coords: &BTreeMap<u32, usize>| -> Point {
        let mut x = b << (FIBER_BITS * n as u32);
        for (&i, &c) in coords {
            x |= (c as Point) << (FIBER_BITS * (i - 1));
        }
        x
    };
    let lift = |s: Subset, base: &BTreeSet<Point>| -> BTreeSet<Point> {
        let mut coords_list: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new()];
        for i in indices(s) {
            coords_list = coords_list
                .into_iter()
                .flat_map(|c| {
                    (0..fiber_sizes[i as usize - 1]).map(move |v| {
                        let mut c = c.clone();
                        c.insert(i, v);
                        c
                    })
                })
                .collect();
        }
        base.iter().flat_map(|&b| coords_list.iter().map(move |c| encode(b, c))).collect()
    };
    let ground: Vec<BTreeSet<Point>> = (0..1u32 << n).map(|s| lift(s, bases.ground(s))).collect();
    let mut overlaps = BTreeMap::new();
    for (i, j) in bases.nested_pairs() {
        let base: BTreeSet<Point> = bases.large_side(j, i);
        let domain = lift(j, &base);
        let codomain = lift(i, &base);
        let forget: Point = indices(j & !i)
            .iter()
            .map(|&k| ((1 << FIBER_BITS) - 1) << (FIBER_BITS * (k - 1)))
            .fold(0, |a, b| a | b);
        let map = domain.iter().map(|&x| (x, x & !forget)).collect();
        overlaps.insert((i, j), Overlap { domain, codomain, map });
    }
    Ok(FiberedPatchSystem { base: FinitePatchSystem::new(n, ground, overlaps)?, fiber_ranks: fiber_sizes.to_vec() })
}

/// Deletes one random point from one nonempty overlap domain `X_{J,I}`
/// together with its map entry. Returns `(I, J, point)`.
pub fn delete_overlap_point<R: Rng>(p: &mut FinitePatchSystem, rng: &mut R) -> Option<(Subset, Subset, Point)> {
    let key = p.overlaps.iter().filter(|(_, o)| !o.domain.is_empty()).map(|(k, _)| *k).choose(rng)?;
    let o = p.overlaps.get_mut(&key).expect("chosen key");
    let x = *o.domain.iter().choose(rng).expect("nonempty domain");
    o.domain.remove(&x);
    o.map.remove(&x);
    Some((key.0, key.1, x))
}
