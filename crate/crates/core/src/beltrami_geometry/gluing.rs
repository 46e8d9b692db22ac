//! Smoothing `z1 z2 = ρ` of a node and pre-glued maps into flat `C^n`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::BeltramiError;

/// `z2 = ρ / z1`.
pub fn smoothing_transition(rho: Complex64, z1: Complex64) -> Result<Complex64, BeltramiError> {
    if z1 == Complex64::new(0.0, 0.0) {
        return Err(BeltramiError::Pole("z1 = 0".into()));
    }
    Ok(rho / z1)
}

/// `(log|z|, arg z)`.
pub fn to_cylinder(z: Complex64) -> (f64, f64) {
    (z.norm().ln(), z.arg())
}

pub fn from_cylinder(t: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(t.exp(), theta)
}

/// The transition in cylinder coordinates: `(t, θ) ↦ (log r0 - t, θ0 - θ)`.
/// The angle reverses because `z ↦ ρ/z` reverses arguments.
pub fn cylinder_transition(rho: Complex64, t: f64, theta: f64) -> (f64, f64) {
    (rho.norm().ln() - t, wrap_angle(rho.arg() - theta))
}

fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w > PI { w - TAU } else { w }
}

/// Largest `|∂_w̄ W|` over a grid on side 1, where `W` is the transition
/// written in cylinder coordinates `w = t + iθ`. The transition is affine
/// there, so only rounding is left.
pub fn transition_cr_residual(rho: Complex64, n_t: usize, n_theta: usize) -> Result<f64, BeltramiError> {
    let r = rho.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(BeltramiError::Domain(format!("need 0 < |ρ| < 1, got {r}")));
    }
    let (t0, t1) = (0.5 * r.ln(), 0.0);
    let h = (t1 - t0) / n_t as f64;
    let image = |t: f64, theta: f64| -> Result<(f64, f64), BeltramiError> {
        Ok(to_cylinder(smoothing_transition(rho, from_cylinder(t, theta))?))
    };
    let mut worst = 0.0f64;
    for i in 1..n_t {
        let t = t0 + h * i as f64;
        for k in 0..n_theta {
            let theta = TAU * k as f64 / n_theta as f64;
            let (tp, ap) = image(t + h, theta)?;
            let (tm, am) = image(t - h, theta)?;
            let (sp, bp) = image(t, theta + h)?;
            let (sm, bm) = image(t, theta - h)?;
            let dt = Complex64::new(tp - tm, wrap_angle(ap - am)) / (2.0 * h);
            let dtheta = Complex64::new(sp - sm, wrap_angle(bp - bm)) / (2.0 * h);
            let dbar = 0.5 * (dt + Complex64::i() * dtheta);
            worst = worst.max(dbar.norm());
        }
    }
    Ok(worst)
}

/// Two annular grids in cylinder coordinates, each covering
/// `t ∈ [log r0 / 2, 0]` of its own side; they meet on the middle circle.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedCylinder {
    pub rho: Complex64,
    /// grid cells per unit of `t`
    pub steps_per_unit: usize,
    pub n_theta: usize,
}

impl GluedCylinder {
    pub fn new(rho: Complex64, steps_per_unit: usize, n_theta: usize) -> Result<Self, BeltramiError> {
        let r = rho.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(BeltramiError::Domain(format!("need 0 < |ρ| < 1, got {r}")));
        }
        if steps_per_unit == 0 || n_theta < 4 {
            return Err(BeltramiError::Domain("grid too coarse".into()));
        }
        Ok(GluedCylinder { rho, steps_per_unit, n_theta })
    }

    pub fn r0(&self) -> f64 {
        self.rho.norm()
    }

    pub fn twist(&self) -> f64 {
        self.rho.arg()
    }

    /// Shared `t` nodes, from the middle circle out to `t = 0`.
    pub fn t_nodes(&self) -> Vec<f64> {
        let t0 = 0.5 * self.r0().ln();
        let n = ((-t0) * self.steps_per_unit as f64).ceil().max(1.0) as usize;
        (0..=n).map(|i| t0 - t0 * i as f64 / n as f64).collect()
    }

    /// Angular nodes of side `side` (1 or 2); side 2 is mirrored through the
    /// twist so seam nodes match exactly.
    pub fn theta_nodes(&self, side: u8) -> Vec<f64> {
        (0..self.n_theta)
            .map(|k| {
                let theta = TAU * k as f64 / self.n_theta as f64;
                if side == 1 { theta } else { wrap_angle(self.twist() - theta) }
            })
            .collect()
    }

    /// Largest distance between a side-1 seam node pushed through the
    /// transition and the matching side-2 seam node.
    pub fn seam_mismatch(&self) -> f64 {
        let t = self.t_nodes()[0];
        self.theta_nodes(1)
            .iter()
            .zip(self.theta_nodes(2))
            .map(|(&a, b)| {
                let z2 = smoothing_transition(self.rho, from_cylinder(t, a)).expect("nonzero on the grid");
                (z2 - from_cylinder(t, b)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Polynomial map `C -> C^n`, coefficients listed by ascending power.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    pub components: Vec<Vec<Complex64>>,
}

impl PolyMap {
    pub fn new(components: Vec<Vec<Complex64>>) -> Self {
        PolyMap { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.components
            .iter()
            .map(|c| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a))
            .collect()
    }

    pub fn node_value(&self) -> Vec<Complex64> {
        self.eval(Complex64::new(0.0, 0.0))
    }
}

/// Parses comma-separated components such as `"z,z^2"` or `"1+2i*w^3, -w"`.
/// The variable may be written `z` or `w`.
pub fn parse_poly_map(text: &str) -> Result<PolyMap, BeltramiError> {
    let err = |why: &str| BeltramiError::Parse(text.to_string(), why.to_string());
    let mut components = Vec::new();
    for comp in text.split(',') {
        let comp: String = comp.chars().filter(|c| !c.is_whitespace()).collect();
        if comp.is_empty() {
            return Err(err("empty component"));
        }
        let mut coeffs: Vec<Complex64> = Vec::new();
        let mut start = 0;
        let bytes = comp.as_bytes();
        let mut terms = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            if i > 0 && (b == b'+' || b == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'^' | b'*') {
                terms.push(&comp[start..i]);
                start = i;
            }
        }
        terms.push(&comp[start..]);
        for term in terms {
            let (coef, power) = parse_term(term).ok_or_else(|| err(&format!("bad term {term:?}")))?;
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Complex64::new(0.0, 0.0));
            }
            coeffs[power] += coef;
        }
        components.push(coeffs);
    }
    Ok(PolyMap::new(components))
}

fn parse_term(term: &str) -> Option<(Complex64, usize)> {
    let (coef, power) = match term.find(['z', 'w']) {
        Some(pos) => {
            let rest = &term[pos + 1..];
            let power = if rest.is_empty() { 1 } else { rest.strip_prefix('^')?.parse().ok()? };
            (term[..pos].trim_end_matches('*'), power)
        }
        None => (term, 0),
    };
    let value = match coef {
        "" | "+" => Complex64::new(1.0, 0.0),
        "-" => Complex64::new(-1.0, 0.0),
        _ => match coef.strip_suffix('i') {
            Some(im) => {
                let im = match im {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    _ => im.trim_end_matches('*').parse().ok()?,
                };
                Complex64::new(0.0, im)
            }
            None => Complex64::new(coef.parse().ok()?, 0.0),
        },
    };
    Some((value, power))
}

/// Cut-off in the scaled radius: 0 up to 1, 1 from 2 on, slope at most 15/8.
pub fn cutoff(s: f64) -> f64 {
    let t = (s - 1.0).clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn cutoff_slope(s: f64) -> f64 {
    let t = s - 1.0;
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `|z| >= 2R`: the input map
    Outer,
    /// `R < |z| < 2R`: interpolation towards the node value
    Transition,
    /// `|z| <= R`: the node value
    Middle,
}

/// The pre-glued map, with each side evaluated in its own disk coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct PregluedMap {
    pub u1: PolyMap,
    pub u2: PolyMap,
    pub node: Vec<Complex64>,
    pub rho: Complex64,
    /// `R = r0^(1/4)`
    pub cut_radius: f64,
}

pub fn preglue(u1: &PolyMap, u2: &PolyMap, rho: Complex64) -> Result<PregluedMap, BeltramiError> {
    if u1.dim() != u2.dim() || u1.dim() == 0 {
        return Err(BeltramiError::Domain("maps have different target dimensions".into()));
    }
    let (p1, p2) = (u1.node_value(), u2.node_value());
    if p1.iter().zip(&p2).any(|(a, b)| (a - b).norm() > 1e-12) {
        return Err(BeltramiError::Domain(format!("node values differ: {p1:?} vs {p2:?}")));
    }
    let r = rho.norm();
    let cut_radius = r.powf(0.25);
    if !(r > 0.0) || 2.0 * cut_radius >= 1.0 {
        return Err(BeltramiError::Domain(format!("need 0 < 2 r0^(1/4) < 1, got r0 = {r}")));
    }
    Ok(PregluedMap { u1: u1.clone(), u2: u2.clone(), node: p1, rho, cut_radius })
}

impl PregluedMap {
    fn side_map(&self, side: u8) -> &PolyMap {
        if side == 1 { &self.u1 } else { &self.u2 }
    }

    pub fn region(&self, z: Complex64) -> Region {
        let s = z.norm() / self.cut_radius;
        if s >= 2.0 {
            Region::Outer
        } else if s > 1.0 {
            Region::Transition
        } else {
            Region::Middle
        }
    }

    /// Value at side-local coordinate `z` with `|z| >= sqrt(r0)`.
    pub fn value(&self, side: u8, z: Complex64) -> Vec<Complex64> {
        let u = self.side_map(side);
        match self.region(z) {
            Region::Outer => u.eval(z),
            Region::Middle => self.node.clone(),
            Region::Transition => {
                let b = cutoff(z.norm() / self.cut_radius);
                u.eval(z).iter().zip(&self.node).map(|(v, p)| p + (v - p) * b).collect()
            }
        }
    }

    /// `∂φ/∂z̄` in the side-local coordinate. Only the cut-off contributes,
    /// since both inputs are holomorphic.
    pub fn dbar(&self, side: u8, z: Complex64) -> Vec<Complex64> {
        if self.region(z) != Region::Transition {
            return vec![Complex64::new(0.0, 0.0); self.node.len()];
        }
        let m = z.norm();
        // ∂|z|/∂z̄ = z / (2|z|)
        let factor = cutoff_slope(m / self.cut_radius) / self.cut_radius * z / (2.0 * m);
        self.side_map(side).eval(z).iter().zip(&self.node).map(|(v, p)| (v - p) * factor).collect()
    }

    /// Map values at every grid node, side 1 then side 2, row-major in `t`.
    pub fn sample(&self, grid: &GluedCylinder) -> [Vec<Vec<Complex64>>; 2] {
        let ts = grid.t_nodes();
        [1u8, 2].map(|side| {
            let thetas = grid.theta_nodes(side);
            ts.iter()
                .flat_map(|&t| thetas.iter().map(move |&a| from_cylinder(t, a)))
                .map(|z| self.value(side, z))
                .collect()
        })
    }

    /// `||∂̄φ||_{L^p}` by the trapezoidal rule in `(t, θ)` on both sides.
    pub fn dbar_norm(&self, grid: &GluedCylinder, p: u32, metric: AreaMetric) -> f64 {
        let ts = grid.t_nodes();
        let dt = ts[1] - ts[0];
        let dtheta = TAU / grid.n_theta as f64;
        let total: f64 = [1u8, 2]
            .iter()
            .map(|&side| {
                let thetas = grid.theta_nodes(side);
                let rows: Vec<f64> = ts
                    .par_iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        let weight = if i == 0 || i + 1 == ts.len() { 0.5 } else { 1.0 };
                        let row: f64 = thetas
                            .iter()
                            .map(|&a| {
                                let z = from_cylinder(t, a);
                                let d = self.dbar(side, z).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                                match metric {
                                    AreaMetric::Flat => d.powi(p as i32) * (2.0 * t).exp(),
                                    AreaMetric::Cylinder => (d * t.exp()).powi(p as i32),
                                }
                            })
                            .sum();
                        weight * row
                    })
                    .collect();
                rows.iter().sum::<f64>()
            })
            .sum();
        (total * dt * dtheta).powf(1.0 / p as f64)
    }
}

/// Area element and norm used in the `L^p` quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum AreaMetric {
    /// Euclidean metric of each side's unit disk.
    #[default]
    Flat,
    /// `dt^2 + dθ^2` on the cylinder.
    Cylinder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepOptions {
    pub metric: AreaMetric,
    pub steps_per_unit: usize,
    pub n_theta: usize,
    pub twist: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { metric: AreaMetric::Flat, steps_per_unit: 400, n_theta: 256, twist: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub p: u32,
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log norm` against `log r`; `None` when every
    /// norm vanishes.
    pub slope: Option<f64>,
    pub degenerate: bool,
}

pub fn dbar_scaling_sweep(
    u1: &PolyMap,
    u2: &PolyMap,
    p: u32,
    rs: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport, BeltramiError> {
    if rs.len() < 3 {
        return Err(BeltramiError::Domain("a sweep needs at least 3 radii".into()));
    }
    if p < 2 || p % 2 != 0 {
        return Err(BeltramiError::Domain(format!("p must be an even integer >= 2, got {p}")));
    }
    let rows: Vec<(f64, f64)> = rs
        .par_iter()
        .map(|&r| {
            let rho = Complex64::from_polar(r, opts.twist);
            let map = preglue(u1, u2, rho)?;
            let grid = GluedCylinder::new(rho, opts.steps_per_unit, opts.n_theta)?;
            Ok((r, map.dbar_norm(&grid, p, opts.metric)))
        })
        .collect::<Result<_, BeltramiError>>()?;
    let zeros = rows.iter().filter(|(_, n)| *n == 0.0).count();
    if zeros == rows.len() {
        return Ok(SweepReport { p, rows, slope: None, degenerate: true });
    }
    if zeros > 0 {
        return Err(BeltramiError::Domain("some but not all norms vanish; no slope to fit".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, n)| n.ln()).collect();
    Ok(SweepReport { p, slope: Some(least_squares_slope(&xs, &ys)), rows, degenerate: false })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
