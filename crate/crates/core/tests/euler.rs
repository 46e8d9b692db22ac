use proptest::prelude::*;
use virtloc::virtual_integration::{
    default_grid, default_stabilization, euler_number, independence_check, Chart, GridModel, IntegrationError,
    SectionKind, Stabilization, ToySection,
};

/// Degree by counting the winding of S around a large circle, independent of
/// any Thom form or stabilization.
fn winding_degree(section: &ToySection, center: (f64, f64), radius: f64) -> i32 {
    let n = 20_000;
    let mut total = 0.0;
    let point = |t: f64| {
        let (a, b) = section.eval(center.0 + radius * t.cos(), center.1 + radius * t.sin());
        b.atan2(a)
    };
    let mut prev = point(0.0);
    for i in 1..=n {
        let angle = point(std::f64::consts::TAU * i as f64 / n as f64);
        let mut d = angle - prev;
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
        prev = angle;
    }
    (total / std::f64::consts::TAU).round() as i32
}

fn catalog() -> Vec<ToySection> {
    ["z", "zbar", "z2", "z3", "z4", "z2-1", "fold"].iter().map(|n| ToySection::parse(n).unwrap()).collect()
}

#[test]
fn catalog_degrees_match_winding_numbers() {
    for s in catalog() {
        assert_eq!(s.degree(), winding_degree(&s, (0.0, 0.0), 2.0), "{s}");
    }
}

#[test]
fn euler_numbers_round_to_degree() {
    for s in catalog() {
        let h = 0.005;
        let v = euler_number(&s, &default_stabilization(&s), &default_grid(&s, h)).unwrap();
        let oracle = winding_degree(&s, (0.0, 0.0), 2.0) as f64;
        assert!((v - oracle).abs() < 1e-2, "{s}: {v} vs {oracle}");
    }
}

#[test]
fn halving_the_step_shrinks_the_error() {
    for name in ["z", "z2", "z3", "z2-1"] {
        let s = ToySection::parse(name).unwrap();
        let stab = default_stabilization(&s);
        let target = s.degree() as f64;
        let coarse = (euler_number(&s, &stab, &default_grid(&s, 0.04)).unwrap() - target).abs();
        let fine = (euler_number(&s, &stab, &default_grid(&s, 0.02)).unwrap() - target).abs();
        assert!(fine <= (coarse / 2.0).max(1e-9), "{name}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn overlapping_charts_agree_with_single_chart() {
    let s = ToySection::parse("z2").unwrap();
    let one = Stabilization::single((0.0, 0.0), 1.0, 2);
    let two = Stabilization::new(vec![
        Chart { center: (-0.1, 0.0), radius: 0.8, rank: 2 },
        Chart { center: (0.25, 0.1), radius: 0.9, rank: 2 },
    ]);
    let r = independence_check(&s, &one, &two, &GridModel::square(2.0, 0.01)).unwrap();
    assert!(r.delta <= 2e-2, "{r:?}");
}

#[test]
fn rank_zero_and_rank_two_charts_agree_on_transverse_zeros() {
    let s = ToySection::parse("z2-1").unwrap();
    let rank0 = Stabilization::new(vec![
        Chart { center: (-1.0, 0.0), radius: 0.6, rank: 0 },
        Chart { center: (1.0, 0.0), radius: 0.6, rank: 0 },
    ]);
    let r = independence_check(&s, &rank0, &default_stabilization(&s), &GridModel::square(2.5, 0.01)).unwrap();
    assert!(r.delta <= 2e-2, "{r:?}");
    assert!((r.value_a - 2.0).abs() < 1e-2);
}

#[test]
fn zero_outside_charts_is_reported() {
    let s = ToySection::new(SectionKind::Z).translated(1.5, 0.0);
    let err = euler_number(&s, &Stabilization::single((0.0, 0.0), 1.0, 2), &GridModel::square(2.5, 0.02));
    assert!(matches!(err, Err(IntegrationError::NotCovered(..))), "{err:?}");
}

#[test]
fn small_section_on_boundary_is_reported() {
    let s = ToySection::parse("z").unwrap();
    let err = euler_number(&s, &Stabilization::single((0.0, 0.0), 0.2, 2), &GridModel::square(0.25, 0.01));
    assert!(err.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn translation_invariance(dx in -3.0f64..3.0, dy in -3.0f64..3.0, pick in 0usize..4) {
        let s = ToySection::parse(["z", "zbar", "z2", "z2-1"][pick]).unwrap();
        let stab = default_stabilization(&s);
        let grid = default_grid(&s, 0.02);
        let base = euler_number(&s, &stab, &grid).unwrap();
        let moved = euler_number(&s.translated(dx, dy), &stab.translated(dx, dy), &grid.translated(dx, dy)).unwrap();
        prop_assert!((base - moved).abs() < 1e-6, "{} vs {}", base, moved);
    }
}
