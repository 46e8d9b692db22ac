//! The acceptance suite, shared by the `acceptance` test target and
//! `virtloc selftest`. Each check returns a one-line verdict.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beltrami_geometry::gluing::SweepOptions;
use crate::beltrami_geometry::{canonical_section, dbar_scaling_sweep, j_of_mu, mu_of_j, parse_poly_map};
use crate::dual_graphs::{enumerate_strata, oracle};
use crate::exact_arith::{bernoulli, hodge_b_series, int, rat};
use crate::localization_engine::{
    closed_form_ck, generic_weights, higher_genus_invariant, total_invariant_genus0, total_invariant_genus0_at,
};
use crate::virtual_atlas::{
    check_fiber_product, check_patchable, delete_overlap_point, from_cover, random_cover, virtual_space,
    FiberedPatchSystem,
};
use crate::virtual_integration::{
    default_grid, default_stabilization, euler_number, independence_check, Chart, GridModel, Stabilization,
    ToySection,
};

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
    pub budget_secs: f64,
}

impl Verdict {
    /// Verdict without timing, stable across runs.
    pub fn plain_line(&self) -> String {
        format!("[{}] {}. {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {} ({:.2}s, budget {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget_secs,
            self.detail
        )
    }
}

type Outcome = Result<String, String>;

fn run(id: u32, name: &'static str, budget_secs: f64, check: impl FnOnce() -> Outcome) -> Verdict {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let over = elapsed.as_secs_f64() > budget_secs;
    let (passed, mut detail) = match outcome {
        Ok(d) => (!over, d),
        Err(d) => (false, d),
    };
    if over {
        detail.push_str("; over time budget");
    }
    Verdict { id, name, passed, detail, elapsed, budget_secs }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn higher_genus_table() -> Verdict {
    run(1, "higher-genus invariants equal the closed form", 1.0, || {
        let mut cases = 0;
        for g in 1..=8 {
            for d in 1..=5 {
                for k in 1..=4 {
                    let got = higher_genus_invariant(g, d, k).map_err(|e| e.to_string())?;
                    let want = closed_form_ck(g, d, k).map_err(|e| e.to_string())?;
                    ensure(got == want, || format!("g={g} d={d} k={k}: {got} != {want}"))?;
                    cases += 1;
                }
            }
        }
        Ok(format!("{cases} exact matches"))
    })
}

pub fn b_series_identity() -> Verdict {
    run(2, "b-series convolution matches Bernoulli numbers", 0.1, || {
        let b = hodge_b_series(10).coeffs().to_vec();
        ensure(b[1] == rat(1, 24) && b[2] == rat(7, 5760), || format!("b1 = {}, b2 = {}", b[1], b[2]))?;
        for g in 1..=10usize {
            let conv = (0..=g).fold(BigRational::zero(), |acc, i| acc + &b[i] * &b[g - i]);
            let fact = (1..=2 * g - 2).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
            let want = bernoulli(2 * g).abs() / BigRational::from_integer(BigInt::from(2 * g) * fact);
            ensure(conv == want, || format!("g={g}: {conv} != {want}"))?;
        }
        Ok("g = 1..10 exact; b1 = 1/24, b2 = 7/5760".into())
    })
}

pub fn genus0_graph_sum(seed: u64) -> Verdict {
    run(3, "genus-0 graph sums give k/d^3 independent of weights", 10.0, || {
        let mut cases = Vec::new();
        cases.extend((1..=4).map(|d| (d, 1)));
        for k in 2..=3 {
            cases.extend((1..=3).map(|d| (d, k)));
        }
        for &(d, k) in &cases {
            let want = int(k as i64) / int((d * d * d) as i64);
            let total = total_invariant_genus0(d, k).map_err(|e| e.to_string())?;
            ensure(total == want, || format!("d={d} k={k}: {total} != {want}"))?;
            for w in generic_weights(k, seed, 5) {
                let v = total_invariant_genus0_at(d, &w).map_err(|e| format!("d={d} k={k}: {e}"))?;
                ensure(v == want, || format!("d={d} k={k} at λ={} u={}: {v}", w.lambda, w.u))?;
            }
        }
        Ok(format!("{} (d, k) pairs, 5 weight pairs each", cases.len()))
    })
}

pub fn stratum_enumeration() -> Verdict {
    run(4, "stratum enumeration agrees with brute force", 30.0, || {
        let count = |g, m| enumerate_strata(g, m).map(|v| v.len()).map_err(|e| e.to_string());
        let small = (count(0, 3)?, count(0, 4)?, count(1, 1)?);
        ensure(small == (1, 4, 2), || format!("|D03|, |D04|, |D11| = {small:?}"))?;
        let mut total = 0;
        for g in 0..=3u32 {
            for m in 0..=6u32 {
                if 2 * g + m > 6 || 2 * g + m < 3 {
                    continue;
                }
                let ours = enumerate_strata(g, m).map_err(|e| e.to_string())?;
                let brute = oracle::brute_force_strata(g, m);
                ensure(ours.len() == brute.len(), || format!("({g},{m}): {} vs {}", ours.len(), brute.len()))?;
                for b in &brute {
                    let hits = ours.iter().filter(|s| oracle::isomorphic(s, b)).count();
                    ensure(hits == 1, || format!("({g},{m}): oracle stratum matched {hits} times"))?;
                }
                for s in &ours {
                    for e in 0..s.edges().len() {
                        let c = s.contract(e).map_err(|e| e.to_string())?;
                        ensure(c.total_genus() == g && c.is_stable(), || format!("({g},{m}): contraction broke genus or stability"))?;
                    }
                }
                total += ours.len();
            }
        }
        Ok(format!("|D03|=1 |D04|=4 |D11|=2; {total} strata over 2g+m <= 6 agree"))
    })
}

pub fn atlas_axioms(seed: u64) -> Verdict {
    run(5, "cover systems satisfy the patching axioms", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..200 {
            let n = rng.gen_range(0..=5);
            let points = rng.gen_range(1..=200);
            let cover = random_cover(&mut rng, n, points);
            let base = from_cover(&cover).map_err(|e| e.to_string())?;
            let sys = FiberedPatchSystem { fiber_ranks: vec![1; base.n()], base };
            let report = check_patchable(&sys.base).merge(check_fiber_product(&sys));
            ensure(report.passed(), || format!("instance {i}: {:?}", report.violations.first()))?;
            let vs = virtual_space(&sys.base).map_err(|e| e.to_string())?;
            ensure(vs.len() == cover.points.len(), || format!("instance {i}: {} classes for {} points", vs.len(), cover.points.len()))?;
        }
        let mut caught = 0;
        while caught < 100 {
            let n = rng.gen_range(1..=5);
            let cover = random_cover(&mut rng, n, 60);
            let mut sys = from_cover(&cover).map_err(|e| e.to_string())?;
            if delete_overlap_point(&mut sys, &mut rng).is_some() {
                ensure(!check_patchable(&sys).passed(), || "a mutation went unnoticed".into())?;
                caught += 1;
            }
        }
        Ok("200 instances pass, 100/100 mutations flagged, quotient matches ground set".into())
    })
}

pub fn stabilized_euler_numbers() -> Verdict {
    run(6, "stabilized Euler numbers round to the degree", 60.0, || {
        let h = 0.005;
        let mut parts = Vec::new();
        for (name, want) in [("z", 1.0), ("z2", 2.0), ("z3", 3.0), ("zbar", -1.0), ("z2-1", 2.0), ("fold", 0.0)] {
            let s = ToySection::parse(name).map_err(|e| e.to_string())?;
            let v = euler_number(&s, &default_stabilization(&s), &default_grid(&s, h)).map_err(|e| e.to_string())?;
            ensure((v - want).abs() <= 1e-2, || format!("{name}: {v} vs {want}"))?;
            parts.push(format!("{name}={v:.5}"));
        }
        let s = ToySection::parse("z2").map_err(|e| e.to_string())?;
        let other = Stabilization::new(vec![
            Chart { center: (-0.1, 0.0), radius: 0.8, rank: 2 },
            Chart { center: (0.25, 0.1), radius: 0.9, rank: 2 },
        ]);
        let r = independence_check(&s, &default_stabilization(&s), &other, &GridModel::square(2.5, h))
            .map_err(|e| e.to_string())?;
        ensure(r.delta <= 2e-2, || format!("stabilizations differ by {}", r.delta))?;
        Ok(format!("{}; z2-1 is the two-zero map of degree 2, fold = (x^2-1, y); two stabilizations differ by {:.1e}", parts.join(" "), r.delta))
    })
}

pub fn beltrami_roundtrip(seed: u64) -> Verdict {
    run(7, "Beltrami coefficient roundtrip", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = 0;
        while done < 100 {
            let den = rng.gen_range(1i64..=97);
            let (re, im) = (rng.gen_range(-den..=den), rng.gen_range(-den..=den));
            if 400 * (re * re + im * im) > 361 * den * den {
                continue;
            }
            let gamma = Complex::new(rat(re, den), rat(im, den));
            let back = mu_of_j(&j_of_mu(&gamma).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(back == gamma, || format!("{gamma:?} came back as {back:?}"))?;
            let det = canonical_section(&gamma).map_err(|e| e.to_string())?.det();
            ensure(det.is_positive(), || format!("det σ = {det} at {gamma:?}"))?;
            done += 1;
        }
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let gamma = Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
            let back = mu_of_j(&j_of_mu(&gamma).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            worst = worst.max((back - gamma).norm());
            let det = canonical_section(&gamma).map_err(|e| e.to_string())?.det();
            ensure(det > 0.0, || format!("det σ = {det} at {gamma}"))?;
        }
        ensure(worst <= 1e-12, || format!("float roundtrip error {worst:e}"))?;
        Ok(format!("100 exact rational roundtrips; float error {worst:.1e}; det σ > 0 throughout"))
    })
}

pub fn dbar_exponent() -> Verdict {
    run(8, "pre-glued dbar decays at least like r^(1/2p)", 60.0, || {
        let u1 = parse_poly_map("z,z^2").map_err(|e| e.to_string())?;
        let u2 = parse_poly_map("w^2,w").map_err(|e| e.to_string())?;
        let rs = [1e-2, 1e-3, 1e-4, 1e-5];
        let fine = SweepOptions::default();
        let coarse = SweepOptions { steps_per_unit: fine.steps_per_unit / 2, n_theta: fine.n_theta / 2, ..fine };
        let a = dbar_scaling_sweep(&u1, &u2, 4, &rs, &fine).map_err(|e| e.to_string())?;
        let b = dbar_scaling_sweep(&u1, &u2, 4, &rs, &coarse).map_err(|e| e.to_string())?;
        let slope = a.slope.ok_or("all norms vanished")?;
        ensure(slope >= 0.025, || format!("slope {slope}"))?;
        let drift = a.rows.iter().zip(&b.rows).map(|((_, x), (_, y))| (x / y - 1.0).abs()).fold(0.0, f64::max);
        ensure(drift < 0.05, || format!("refinement changes a norm by {:.2}%", 100.0 * drift))?;
        Ok(format!("p=4 slope {slope:.4} (threshold 0.025); refinement drift {:.2e}", drift))
    })
}

/// All eight checks in order.
pub fn run_all(seed: u64) -> Vec<Verdict> {
    vec![
        higher_genus_table(),
        b_series_identity(),
        genus0_graph_sum(seed),
        stratum_enumeration(),
        atlas_axioms(seed),
        stabilized_euler_numbers(),
        beltrami_roundtrip(seed),
        dbar_exponent(),
    ]
}
