use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtloc::virtual_atlas::{
    check_fiber_product, check_patchable, check_transition_data, delete_overlap_point, from_cover, product_model,
    random_cover, virtual_space, Axiom, CoverInput, FiberedPatchSystem, Point, TransitionLabeling,
};

fn fibered(cover: &CoverInput) -> FiberedPatchSystem {
    let base = from_cover(cover).unwrap();
    let n = base.n();
    FiberedPatchSystem { base, fiber_ranks: vec![1; n] }
}

// Direct set-formula oracle for the cover construction.
fn x_by_hand(c: &CoverInput, members: &[usize]) -> BTreeSet<Point> {
    c.points
        .iter()
        .copied()
        .filter(|x| {
            let inside = if members.is_empty() { c.cover[0].contains(x) } else { members.iter().all(|&i| c.cover[i].contains(x)) };
            let excluded = (1..c.cover.len()).filter(|j| !members.contains(j)).any(|j| c.shrunk[j - 1].contains(x));
            inside && !excluded
        })
        .collect()
}

#[test]
fn cover_systems_are_virtual_manifolds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(0..=5);
        let points = rng.gen_range(1..=200);
        let cover = random_cover(&mut rng, n, points);
        let sys = fibered(&cover);
        for s in 0..1u32 << n {
            let members: Vec<usize> = (1..=n).filter(|i| s >> (i - 1) & 1 == 1).collect();
            assert_eq!(sys.base.ground(s), &x_by_hand(&cover, &members));
        }
        assert!(check_patchable(&sys.base).passed());
        assert!(check_fiber_product(&sys).passed());
        let vs = virtual_space(&sys.base).unwrap();
        assert_eq!(vs.len(), cover.points.len());
        // each projection is injective
        for s in 0..1u32 << n {
            let images: BTreeSet<usize> = sys.base.ground(s).iter().map(|&x| vs.projection[&(s, x)]).collect();
            assert_eq!(images.len(), sys.base.ground(s).len());
        }
    }
}

#[test]
fn mutations_are_caught() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=4);
        let cover = random_cover(&mut rng, n, 40);
        let mut sys = from_cover(&cover).unwrap();
        if let Some((i, j, x)) = delete_overlap_point(&mut sys, &mut rng) {
            let report = check_patchable(&sys);
            assert!(!report.passed(), "deleting {x} from X_({j},{i}) went unnoticed");
            assert!(report.violations.iter().any(|v| v.axiom == Axiom::Surjectivity));
            done += 1;
        }
    }
}

#[test]
fn product_models_pass_and_mutations_flip() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut flipped = 0;
    while flipped < 100 {
        let n = rng.gen_range(1..=3);
        let cover = random_cover(&mut rng, n, 15);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let model = product_model(&cover, &sizes).unwrap();
        assert!(check_patchable(&model.base).passed());
        assert!(check_fiber_product(&model).passed());
        let mut broken = model.clone();
        if delete_overlap_point(&mut broken.base, &mut rng).is_some() {
            assert!(!check_patchable(&broken.base).passed() || !check_fiber_product(&broken).passed());
            flipped += 1;
        }
    }
}

#[test]
fn extra_point_in_overlap_breaks_fiber_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cover = random_cover(&mut rng, 2, 30);
    let mut model = product_model(&cover, &[2, 2]).unwrap();
    // duplicate a fibre point of φ_{{1,2},∅} under a fresh id
    let o = model.base.overlap_mut(0, 0b11);
    if let Some(&y) = o.map.values().next() {
        let fresh = Point::MAX - 1;
        o.domain.insert(fresh);
        o.map.insert(fresh, y);
        let r = check_fiber_product(&model);
        assert!(!r.passed());
    }
}

#[test]
fn transition_data() {
    for n in 0..=6 {
        assert!(check_transition_data(&TransitionLabeling::canonical(n)).passed());
    }
    let mut t = TransitionLabeling::canonical(2);
    t.labels.insert((0, 0b11), vec![1]);
    assert!(!check_transition_data(&t).passed());
}

#[test]
fn symmetric_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let cover = random_cover(&mut rng, 3, 25);
        let mut sys = from_cover(&cover).unwrap();
        delete_overlap_point(&mut sys, &mut rng);
        let report = check_patchable(&sys);
        for v in &report.violations {
            let mirrored = match v.axiom {
                Axiom::FirstPreimage => Axiom::SecondPreimage,
                Axiom::SecondPreimage => Axiom::FirstPreimage,
                a => a,
            };
            if matches!(v.axiom, Axiom::UpperMeet | Axiom::LowerMeet | Axiom::Commuting | Axiom::FirstPreimage | Axiom::SecondPreimage) {
                let swapped = (v.pair.1.clone(), v.pair.0.clone());
                assert!(
                    report.violations.iter().any(|w| w.axiom == mirrored && w.pair == swapped),
                    "{v:?} has no mirror"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_covers_pass(seed in any::<u64>(), n in 0usize..5, points in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cover = random_cover(&mut rng, n, points);
        let sys = fibered(&cover);
        prop_assert!(check_patchable(&sys.base).passed());
        prop_assert!(check_fiber_product(&sys).passed());
        prop_assert_eq!(virtual_space(&sys.base).unwrap().closure_added_pairs, 0);
    }
}
