use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtloc::beltrami_geometry::gluing::{cutoff_slope, from_cylinder, SweepOptions};
use virtloc::beltrami_geometry::{
    canonical_section, dbar_scaling_sweep, j_of_mu, mu_of_j, parse_poly_map, preglue, AreaMetric, GluedCylinder, Mat2,
};

fn random_rational_gamma(rng: &mut ChaCha8Rng) -> Complex<BigRational> {
    loop {
        let den = rng.gen_range(1i64..=97);
        let re = rng.gen_range(-den..=den);
        let im = rng.gen_range(-den..=den);
        // |γ|^2 <= 0.95^2
        if 400 * (re * re + im * im) <= 361 * den * den {
            let q = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(den));
            return Complex::new(q(re), q(im));
        }
    }
}

/// `j = G i G^-1` for the real-linear map `G(z) = z + γ z̄`, evaluated on
/// the basis vectors with complex arithmetic.
fn structure_oracle(gamma: Complex64) -> [[f64; 2]; 2] {
    let g = |z: Complex64| z + gamma * z.conj();
    let g_inv = |w: Complex64| (w - gamma * w.conj()) / (1.0 - gamma.norm_sqr());
    let j = |v: Complex64| g(Complex64::i() * g_inv(v));
    let e1 = j(Complex64::new(1.0, 0.0));
    let e2 = j(Complex64::new(0.0, 1.0));
    [[e1.re, e2.re], [e1.im, e2.im]]
}

#[test]
fn rational_roundtrip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let gamma = random_rational_gamma(&mut rng);
        let j = j_of_mu(&gamma).unwrap();
        let m = j.matrix();
        assert_eq!(m.mul(m), Mat2::identity().scale(&-BigRational::from_integer(1.into())));
        assert_eq!(mu_of_j(&j).unwrap(), gamma);
        let sigma = canonical_section(&gamma).unwrap();
        assert!(sigma.det() > BigRational::from_integer(0.into()));
        assert_eq!(m.mul(&sigma), sigma.mul(&Mat2::standard()));
    }
}

#[test]
fn float_structure_matches_complex_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (r, a) = (0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let gamma = Complex64::from_polar(r, a);
        let j = j_of_mu(&gamma).unwrap();
        let m = j.matrix();
        let o = structure_oracle(gamma);
        let scale = 1.0 / (1.0 - r * r);
        for (x, y) in [(m.a, o[0][0]), (m.b, o[0][1]), (m.c, o[1][0]), (m.d, o[1][1])] {
            assert!((x - y).abs() <= 1e-12 * scale.max(1.0) * 10.0, "{x} vs {y}");
        }
        assert!((mu_of_j(&j).unwrap() - gamma).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn section_intertwines_and_has_positive_det(r in 0.0f64..0.95, a in 0.0f64..6.3) {
        let gamma = Complex64::from_polar(r, a);
        let sigma = canonical_section(&gamma).unwrap();
        let j = j_of_mu(&gamma).unwrap();
        prop_assert!(sigma.det() > 0.0);
        prop_assert!(j.matrix().mul(&sigma).approx_eq(&sigma.mul(&Mat2::standard())));
    }
}

/// `||∂̄φ||_p` for `u1 = z`, `u2 = w`, node 0 and the flat metric, from a
/// one-dimensional radial integral: each side contributes
/// `2π R^2 ∫_1^2 (s β'(s) / 2)^p s ds`.
fn radial_oracle(r: f64, p: u32) -> f64 {
    let big_r = r.powf(0.25);
    let n = 200_000;
    let h = 1.0 / n as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let s = 1.0 + (i as f64 + 0.5) * h;
            (s * cutoff_slope(s) / 2.0).powi(p as i32) * s * h
        })
        .sum();
    (2.0 * std::f64::consts::TAU * big_r * big_r * integral).powf(1.0 / p as f64)
}

#[test]
fn grid_norm_matches_radial_oracle() {
    let u1 = parse_poly_map("z").unwrap();
    let u2 = parse_poly_map("w").unwrap();
    for r in [1e-2, 1e-4] {
        let rho = Complex64::from_polar(r, 0.3);
        let map = preglue(&u1, &u2, rho).unwrap();
        let grid = GluedCylinder::new(rho, 400, 256).unwrap();
        let got = map.dbar_norm(&grid, 4, AreaMetric::Flat);
        let want = radial_oracle(r, 4);
        assert!((got / want - 1.0).abs() < 1e-4, "r={r}: {got} vs {want}");
    }
}

#[test]
fn analytic_dbar_matches_finite_differences() {
    let u1 = parse_poly_map("z,z^2").unwrap();
    let u2 = parse_poly_map("w^2,w").unwrap();
    let map = preglue(&u1, &u2, Complex64::new(1e-4, 0.0)).unwrap();
    let h = 1e-6;
    for (side, z) in [(1u8, Complex64::new(0.15, 0.05)), (2, Complex64::new(-0.02, 0.17)), (1, Complex64::new(0.5, 0.2))] {
        let fd: Vec<Complex64> = (0..2)
            .map(|k| {
                let dx = (map.value(side, z + h)[k] - map.value(side, z - h)[k]) / (2.0 * h);
                let dy = (map.value(side, z + Complex64::new(0.0, h))[k] - map.value(side, z - Complex64::new(0.0, h))[k]) / (2.0 * h);
                0.5 * (dx + Complex64::i() * dy)
            })
            .collect();
        let exact = map.dbar(side, z);
        for k in 0..2 {
            assert!((fd[k] - exact[k]).norm() < 1e-6, "{side} {z}: {} vs {}", fd[k], exact[k]);
        }
    }
}

#[test]
fn dbar_vanishes_outside_transition_annuli() {
    let u1 = parse_poly_map("z,z^2").unwrap();
    let u2 = parse_poly_map("w^2,w").unwrap();
    let rho = Complex64::new(1e-4, 0.0);
    let map = preglue(&u1, &u2, rho).unwrap();
    let grid = GluedCylinder::new(rho, 40, 32).unwrap();
    let big_r = map.cut_radius;
    for side in [1u8, 2] {
        for &t in &grid.t_nodes() {
            for &a in &grid.theta_nodes(side) {
                let z = from_cylinder(t, a);
                let inside = z.norm() > big_r && z.norm() < 2.0 * big_r;
                let d = map.dbar(side, z);
                if !inside {
                    assert!(d.iter().all(|c| c.norm() == 0.0));
                }
            }
        }
    }
}

#[test]
fn preglue_is_continuous_and_exact_away_from_cutoff() {
    let u1 = parse_poly_map("1+z,z^2").unwrap();
    let u2 = parse_poly_map("1+w^2,w").unwrap();
    let rho = Complex64::from_polar(1e-4, 0.9);
    let map = preglue(&u1, &u2, rho).unwrap();
    let grid = GluedCylinder::new(rho, 100, 64).unwrap();
    let [s1, s2] = map.sample(&grid);
    let ts = grid.t_nodes();
    let n_theta = grid.n_theta;
    for (i, &t) in ts.iter().enumerate() {
        for (k, &a) in grid.theta_nodes(1).iter().enumerate() {
            let z = from_cylinder(t, a);
            if z.norm() >= 2.0 * map.cut_radius {
                assert_eq!(s1[i * n_theta + k], u1.eval(z));
            }
            if z.norm() <= map.cut_radius {
                assert_eq!(s1[i * n_theta + k], map.node);
            }
        }
    }
    // seam values coincide: both sides sit in the middle band there
    for k in 0..n_theta {
        assert_eq!(s1[k], s2[k]);
    }
    // neighbouring samples differ by at most Lipschitz times spacing
    let dt = ts[1] - ts[0];
    for i in 1..ts.len() {
        for k in 0..n_theta {
            let a = &s1[i * n_theta + k];
            let b = &s1[(i - 1) * n_theta + k];
            let jump: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(jump < 10.0 * dt, "jump {jump} at t={}", ts[i]);
        }
    }
}

#[test]
fn sweep_exponent_and_refinement() {
    let u1 = parse_poly_map("z,z^2").unwrap();
    let u2 = parse_poly_map("w^2,w").unwrap();
    let rs = [1e-2, 1e-3, 1e-4, 1e-5];
    let coarse = SweepOptions { steps_per_unit: 200, n_theta: 128, ..SweepOptions::default() };
    let fine = SweepOptions::default();
    let a = dbar_scaling_sweep(&u1, &u2, 4, &rs, &coarse).unwrap();
    let b = dbar_scaling_sweep(&u1, &u2, 4, &rs, &fine).unwrap();
    let slope = b.slope.unwrap();
    assert!(slope >= 1.0 / 8.0 - 0.1, "{slope}");
    for ((_, x), (_, y)) in a.rows.iter().zip(&b.rows) {
        assert!((x / y - 1.0).abs() < 0.05);
    }
    // the leading term is linear, so the flat exponent approaches 2/p / 4
    let linear = dbar_scaling_sweep(&parse_poly_map("z").unwrap(), &parse_poly_map("w").unwrap(), 4, &rs, &fine).unwrap();
    assert!((linear.slope.unwrap() - 0.125).abs() < 1e-3);
    let cyl = SweepOptions { metric: AreaMetric::Cylinder, ..SweepOptions::default() };
    let c = dbar_scaling_sweep(&u1, &u2, 4, &rs, &cyl).unwrap();
    assert!(c.slope.unwrap() >= 0.2);
}
