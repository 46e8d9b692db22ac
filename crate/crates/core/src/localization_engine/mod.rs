//! Torus localization for the local curves `W_k`: an exceptional `P^1` with
//! normal bundle `O(-1) + O(-1)` (k = 1) or `O + O(-2)` (k >= 2).
//!
//! The torus acts with weight `λ` on the tangent line at `p1` and with
//! weights `u`, `-λ + k u` on the two normal directions there. Genus-0
//! invariants are computed as exact graph sums over fixed loci; higher genus
//! uses the `u -> 0` reduction to single-edge graphs.

mod fixed_graphs;

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact_arith::{self, bernoulli, hodge_b_series, int, ArithError, BigInt, BigRational, RationalFunction};

pub use fixed_graphs::{enumerate_fixed_graphs_genus0, FixedEdge, FixedLocusGraph, FixedPoint, FixedVertex};

const RETRIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalizationError {
    #[error("weight {0} vanishes at the chosen substitution")]
    Pole(String),
    #[error("every one of {0} weight substitutions hit a pole")]
    PersistentPole(usize),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A torus weight `a λ + b u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    pub lambda: BigRational,
    pub u: BigRational,
}

impl Weight {
    pub fn new(lambda: BigRational, u: BigRational) -> Self {
        Weight { lambda, u }
    }

    fn lam(a: BigRational) -> Self {
        Weight { lambda: a, u: BigRational::zero() }
    }

    fn plus(&self, other: &Weight) -> Weight {
        Weight { lambda: &self.lambda + &other.lambda, u: &self.u + &other.u }
    }

    fn scaled(&self, c: &BigRational) -> Weight {
        Weight { lambda: &self.lambda * c, u: &self.u * c }
    }

    pub fn eval<S: Scalar>(&self, lambda: &S, u: &S) -> S {
        lambda.mul(&S::from_rational(self.lambda.clone())).add(&u.mul(&S::from_rational(self.u.clone())))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})λ + ({})u", self.lambda, self.u)
    }
}

/// Exact scalars the factor product can be evaluated in.
pub trait Scalar: Clone + Send + Sync {
    fn from_rational(r: BigRational) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// `None` when `rhs` is zero.
    fn div(&self, rhs: &Self) -> Option<Self>;
}

impl Scalar for BigRational {
    fn from_rational(r: BigRational) -> Self {
        r
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn div(&self, rhs: &Self) -> Option<Self> {
        (!Zero::is_zero(rhs)).then(|| self / rhs)
    }
}

impl Scalar for RationalFunction {
    fn from_rational(r: BigRational) -> Self {
        RationalFunction::constant(r)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn div(&self, rhs: &Self) -> Option<Self> {
        self.checked_div(rhs).ok()
    }
}

/// A weight substitution `(λ, u)` together with the geometry index `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusWeights {
    pub lambda: BigRational,
    pub u: BigRational,
    pub k: u32,
}

/// A line bundle summand of the normal bundle: degree and weight at `p1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalSummand {
    pub degree: i64,
    pub weight_p1: Weight,
}

impl NormalSummand {
    /// Fibre weight at `p2`, shifted by `degree` times the tangent weight.
    pub fn weight_p2(&self) -> Weight {
        self.weight_p1.plus(&Weight::lam(int(-self.degree)))
    }

    fn weight_at(&self, p: FixedPoint) -> Weight {
        match p {
            FixedPoint::P1 => self.weight_p1.clone(),
            FixedPoint::P2 => self.weight_p2(),
        }
    }
}

pub fn normal_summands(k: u32) -> Vec<NormalSummand> {
    let u = Weight::new(int(0), int(1));
    let shifted = Weight::new(int(-1), int(k as i64));
    if k == 1 {
        vec![
            NormalSummand { degree: -1, weight_p1: u },
            NormalSummand { degree: -1, weight_p1: shifted },
        ]
    } else {
        vec![
            NormalSummand { degree: 0, weight_p1: u },
            NormalSummand { degree: -2, weight_p1: shifted },
        ]
    }
}

/// Tangent weight of the exceptional curve at a fixed point.
pub fn tangent_weight(p: FixedPoint) -> Weight {
    match p {
        FixedPoint::P1 => Weight::lam(int(1)),
        FixedPoint::P2 => Weight::lam(int(-1)),
    }
}

/// Weights of the full tangent space of the threefold at `p`.
pub fn tangent_space_weights(p: FixedPoint, k: u32) -> Vec<Weight> {
    let mut w = vec![tangent_weight(p)];
    w.extend(normal_summands(k).iter().map(|s| s.weight_at(p)));
    w
}

/// Vertex moduli factor: `ω` (one flag), `1/(ω1 + ω2)` (two flags), or the
/// integral of `prod 1/(ω_F - ψ_F)` over `M_{0,n}` for `n >= 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexFactor {
    Univalent(Weight),
    Bivalent(Weight, Weight),
    Psi(Vec<Weight>),
}

/// The contribution of a fixed locus as `scalar * prod numer / prod denom`
/// times the vertex factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorList {
    pub scalar: BigRational,
    pub numer: Vec<Weight>,
    pub denom: Vec<Weight>,
    pub vertices: Vec<VertexFactor>,
}

/// Equivariant factors of `e(H^1) / e(H^0)` and the node smoothings for a
/// genus-0 fixed-locus graph, divided by the automorphism factor.
pub fn factor_list(graph: &FixedLocusGraph, k: u32) -> FactorList {
    let summands = normal_summands(k);
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for e in graph.edges() {
        let delta = e.degree as i64;
        // orient the edge from its p1 end
        let (a, b) = e.endpoints;
        debug_assert_ne!(graph.vertices()[a].target, graph.vertices()[b].target);
        let step = Weight::lam(BigRational::new(BigInt::one(), BigInt::from(delta)));
        // deformations of the cover: H^0 of the pulled-back tangent bundle
        // minus the infinitesimal automorphism (zero weight)
        for j in 0..=2 * delta {
            if j != delta {
                denom.push(Weight::lam(int(1)).plus(&step.scaled(&int(-j))));
            }
        }
        for s in &summands {
            if s.degree >= 0 {
                for j in 0..=s.degree * delta {
                    denom.push(s.weight_p1.plus(&step.scaled(&int(-j))));
                }
            } else {
                for j in 1..(-s.degree * delta) {
                    numer.push(s.weight_p1.plus(&step.scaled(&int(j))));
                }
            }
        }
    }
    let mut vertices = Vec::new();
    for (v, vertex) in graph.vertices().iter().enumerate() {
        assert_eq!(vertex.genus, 0, "only genus-0 vertices are supported");
        let p = vertex.target;
        let flags: Vec<Weight> = graph
            .flags(v)
            .map(|e| tangent_weight(p).scaled(&BigRational::new(BigInt::one(), BigInt::from(e.degree))))
            .collect();
        let n = flags.len();
        // node identifications: e(T_p X)^(n - 1)
        for _ in 1..n {
            numer.extend(tangent_space_weights(p, k));
        }
        vertices.push(match n {
            1 => VertexFactor::Univalent(flags[0].clone()),
            2 => VertexFactor::Bivalent(flags[0].clone(), flags[1].clone()),
            _ => VertexFactor::Psi(flags),
        });
    }
    FactorList {
        scalar: BigRational::new(BigInt::one(), BigInt::from(graph.automorphism_factor())),
        numer,
        denom,
        vertices,
    }
}

impl FactorList {
    pub fn evaluate<S: Scalar>(&self, lambda: &S, u: &S) -> Result<S, LocalizationError> {
        let mut value = S::from_rational(self.scalar.clone());
        for w in &self.numer {
            value = value.mul(&w.eval(lambda, u));
        }
        for w in &self.denom {
            value = value.div(&w.eval(lambda, u)).ok_or_else(|| LocalizationError::Pole(w.to_string()))?;
        }
        for f in &self.vertices {
            let factor = match f {
                VertexFactor::Univalent(w) => w.eval(lambda, u),
                VertexFactor::Bivalent(a, b) => {
                    let sum = a.plus(b);
                    S::from_rational(BigRational::one())
                        .div(&sum.eval(lambda, u))
                        .ok_or_else(|| LocalizationError::Pole(sum.to_string()))?
                }
                VertexFactor::Psi(flags) => psi_vertex(flags, lambda, u)?,
            };
            value = value.mul(&factor);
        }
        Ok(value)
    }
}

/// `sum_a <tau_a> prod ω_F^{-(a_F + 1)}` over exponent vectors with `|a| = n - 3`.
fn psi_vertex<S: Scalar>(flags: &[Weight], lambda: &S, u: &S) -> Result<S, LocalizationError> {
    let n = flags.len();
    let mut inverse = Vec::with_capacity(n);
    for w in flags {
        let value = S::from_rational(BigRational::one())
            .div(&w.eval(lambda, u))
            .ok_or_else(|| LocalizationError::Pole(w.to_string()))?;
        inverse.push(value);
    }
    let mut total = S::from_rational(BigRational::zero());
    for a in exponent_vectors(n, (n - 3) as u32) {
        let coeff = psi_integral_genus0(&a)?;
        let mut term = S::from_rational(coeff);
        for (f, &af) in a.iter().enumerate() {
            for _ in 0..=af {
                term = term.mul(&inverse[f]);
            }
        }
        total = total.add(&term);
    }
    Ok(total)
}

fn exponent_vectors(parts: usize, total: u32) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            exponent_vectors(parts - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// `∫_{M_{0,n}} ψ_1^{a_1} ... ψ_n^{a_n} = (n-3)! / prod a_i!` when the
/// exponents sum to `n - 3`, zero otherwise.
pub fn psi_integral_genus0(a: &[u32]) -> Result<BigRational, LocalizationError> {
    let n = a.len();
    if n < 3 {
        return Err(LocalizationError::Domain(format!("M_0,{n} is unstable; need at least 3 points")));
    }
    if a.iter().map(|&x| x as usize).sum::<usize>() != n - 3 {
        return Ok(BigRational::zero());
    }
    let fact = |m: usize| (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let den = a.iter().fold(BigInt::one(), |acc, &x| acc * fact(x as usize));
    Ok(BigRational::new(fact(n - 3), den))
}

/// Contribution of one fixed locus as a rational function of `u` with
/// `λ = 1`, already divided by the automorphism factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphContribution {
    pub value: RationalFunction,
    pub automorphism_factor: u64,
}

pub fn graph_contribution_genus0(graph: &FixedLocusGraph, k: u32) -> Result<GraphContribution, LocalizationError> {
    let value = factor_list(graph, k).evaluate(&RationalFunction::one(), &RationalFunction::variable())?;
    Ok(GraphContribution { value, automorphism_factor: graph.automorphism_factor() })
}

/// Contribution of one fixed locus at explicit weights.
pub fn graph_contribution_at(graph: &FixedLocusGraph, weights: &TorusWeights) -> Result<BigRational, LocalizationError> {
    factor_list(graph, weights.k).evaluate(&weights.lambda, &weights.u)
}

/// Sum of all genus-0 fixed-locus contributions at the given weights.
pub fn total_invariant_genus0_at(d: u32, weights: &TorusWeights) -> Result<BigRational, LocalizationError> {
    check_degree_and_k(d, weights.k)?;
    let graphs = enumerate_fixed_graphs_genus0(d);
    let parts: Vec<BigRational> =
        graphs.par_iter().map(|g| graph_contribution_at(g, weights)).collect::<Result<_, _>>()?;
    Ok(parts.iter().fold(BigRational::zero(), |acc, x| acc + x))
}

fn check_degree_and_k(d: u32, k: u32) -> Result<(), LocalizationError> {
    if d == 0 || k == 0 {
        return Err(LocalizationError::Domain(format!("need d >= 1 and k >= 1 (got d = {d}, k = {k})")));
    }
    Ok(())
}

/// Deterministic sequence of generic weight pairs; `λ` and `u` are random
/// small rationals drawn from a seeded stream.
pub fn generic_weights(k: u32, seed: u64, count: usize) -> Vec<TorusWeights> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| loop {
        let n: i64 = rng.gen_range(-40..=40);
        let d: i64 = rng.gen_range(1..=13);
        if n != 0 {
            return exact_arith::rat(n, d);
        }
    };
    (0..count).map(|_| TorusWeights { lambda: pick(&mut rng), u: pick(&mut rng), k }).collect()
}

/// The degree-`d` genus-0 invariant of `W_k`, evaluated at a generic weight
/// pair and re-substituted up to five times if a pole is hit.
pub fn total_invariant_genus0(d: u32, k: u32) -> Result<BigRational, LocalizationError> {
    total_invariant_genus0_seeded(d, k, 0)
}

pub fn total_invariant_genus0_seeded(d: u32, k: u32, seed: u64) -> Result<BigRational, LocalizationError> {
    check_degree_and_k(d, k)?;
    for w in generic_weights(k, seed, RETRIES) {
        match total_invariant_genus0_at(d, &w) {
            Err(LocalizationError::Pole(_)) => continue,
            other => return other,
        }
    }
    Err(LocalizationError::PersistentPole(RETRIES))
}

fn b_coefficients(max_g: u32) -> Vec<BigRational> {
    hodge_b_series(max_g as usize).coeffs().to_vec()
}

fn rational_power(d: u32, e: i64) -> BigRational {
    let base = int(d as i64);
    let p = (0..e.unsigned_abs()).fold(BigRational::one(), |acc, _| acc * &base);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// `lim_{u -> 0}` of the single-edge contribution with vertex genera
/// `g1`, `g2`: `k d^(2g-3) b_g1 b_g2`.
pub fn single_edge_limit(g1: u32, g2: u32, d: u32, k: u32) -> BigRational {
    let b = b_coefficients(g1.max(g2));
    let g = (g1 + g2) as i64;
    int(k as i64) * rational_power(d, 2 * g - 3) * &b[g1 as usize] * &b[g2 as usize]
}

/// Sum of the single-edge limits over `g1 + g2 = g`.
pub fn higher_genus_invariant(g: u32, d: u32, k: u32) -> Result<BigRational, LocalizationError> {
    if g == 0 {
        return Err(LocalizationError::Domain("the u -> 0 reduction needs genus >= 1".into()));
    }
    check_degree_and_k(d, k)?;
    let b = b_coefficients(g);
    let conv = (0..=g as usize).fold(BigRational::zero(), |acc, g1| acc + &b[g1] * &b[g as usize - g1]);
    Ok(int(k as i64) * rational_power(d, 2 * g as i64 - 3) * conv)
}

/// `k |B_2g| d^(2g-3) / (2g (2g-2)!)`.
pub fn closed_form_ck(g: u32, d: u32, k: u32) -> Result<BigRational, LocalizationError> {
    if g == 0 {
        return Err(LocalizationError::Domain("closed form is undefined at genus 0".into()));
    }
    let fact = (1..=(2 * g - 2) as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let den = BigRational::from_integer(BigInt::from(2 * g) * fact);
    let b = bernoulli(2 * g as usize).abs();
    Ok(int(k as i64) * b * rational_power(d, 2 * g as i64 - 3) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    #[test]
    fn psi_integral_examples() {
        assert_eq!(psi_integral_genus0(&[0, 0, 0]).unwrap(), int(1));
        assert_eq!(psi_integral_genus0(&[1, 0, 0, 0]).unwrap(), int(1));
        assert_eq!(psi_integral_genus0(&[1, 1, 0, 0, 0]).unwrap(), int(2));
        assert_eq!(psi_integral_genus0(&[2, 0, 0, 0]).unwrap(), int(0));
        assert!(psi_integral_genus0(&[0, 0]).is_err());
    }

    #[test]
    fn psi_integral_string_equation() {
        // <tau_0 prod tau_ai> = sum_j <... tau_{aj - 1} ...>
        for a in exponent_vectors(5, 2) {
            let mut with_point = a.clone();
            with_point.push(0);
            let lhs = psi_integral_genus0(&with_point).unwrap();
            let mut rhs = BigRational::zero();
            for j in 0..a.len() {
                if a[j] > 0 {
                    let mut b = a.clone();
                    b[j] -= 1;
                    rhs += psi_integral_genus0(&b).unwrap();
                }
            }
            assert_eq!(lhs, rhs, "{a:?}");
        }
    }

    #[test]
    fn psi_vertex_matches_closed_form() {
        // sum_a (n-3)!/prod a! prod w^-(a+1) = (sum 1/w)^(n-3) prod 1/w
        let flags = vec![Weight::lam(rat(1, 2)), Weight::lam(int(1)), Weight::lam(rat(1, 3)), Weight::lam(int(1))];
        let lam = rat(3, 7);
        let u = int(5);
        let got = psi_vertex(&flags, &lam, &u).unwrap();
        let ws: Vec<BigRational> = flags.iter().map(|w| w.eval(&lam, &u)).collect();
        let s: BigRational = ws.iter().map(|w| w.recip()).fold(BigRational::zero(), |a, b| a + b);
        let p: BigRational = ws.iter().map(|w| w.recip()).fold(BigRational::one(), |a, b| a * b);
        assert_eq!(got, s * p);
    }

    #[test]
    fn degree_one_values() {
        assert_eq!(total_invariant_genus0(1, 1).unwrap(), int(1));
        assert_eq!(total_invariant_genus0(1, 2).unwrap(), int(2));
    }

    #[test]
    fn weight_independence_degree_two() {
        for (lambda, u) in [(int(1), int(7)), (int(1), rat(-5, 3))] {
            let w = TorusWeights { lambda, u, k: 1 };
            assert_eq!(total_invariant_genus0_at(2, &w).unwrap(), rat(1, 8));
        }
    }

    #[test]
    fn pole_names_weight() {
        let w = TorusWeights { lambda: int(1), u: int(0), k: 2 };
        match total_invariant_genus0_at(1, &w) {
            Err(LocalizationError::Pole(s)) => assert!(s.contains('u')),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn single_edge_examples() {
        assert_eq!(single_edge_limit(0, 0, 1, 1), int(1));
        assert_eq!(single_edge_limit(1, 0, 1, 1), rat(1, 24));
        assert_eq!(single_edge_limit(1, 1, 2, 3), rat(1, 96));
    }

    #[test]
    fn higher_genus_examples() {
        assert_eq!(higher_genus_invariant(1, 1, 1).unwrap(), rat(1, 12));
        assert_eq!(higher_genus_invariant(2, 1, 1).unwrap(), rat(1, 240));
        assert_eq!(higher_genus_invariant(2, 3, 2).unwrap(), rat(1, 40));
        assert!(higher_genus_invariant(0, 1, 1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        for d in 1..5 {
            assert_eq!(closed_form_ck(1, d, 1).unwrap(), rat(1, 12 * d as i64));
            assert_eq!(closed_form_ck(2, d, 1).unwrap(), rat(d as i64, 240));
        }
        assert!(closed_form_ck(0, 1, 1).is_err());
    }

    #[test]
    fn contribution_as_function_of_u() {
        let g = &enumerate_fixed_graphs_genus0(1)[0];
        let c = graph_contribution_genus0(g, 2).unwrap();
        assert_eq!(c.value, RationalFunction::constant(int(2)));
        assert_eq!(c.automorphism_factor, 1);
    }
}
