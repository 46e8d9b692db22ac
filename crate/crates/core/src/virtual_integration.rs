//! Euler numbers of planar sections through cut-off stabilizations.
//!
//! A section `S: R^2 -> R^2` is stabilized on rank-2 charts by adding a
//! trivial obstruction space `R^2` with bundle map `η I`. The zero set of
//! `S + η v` over `{η > 0}` is the graph of `v = -S/η`, and pulling back a
//! compactly supported Thom form gives
//! `∫ ρ(|S/η|) det D(S/η)` there and `∫ ρ(|S|) det DS` where no rank-2
//! chart reaches. Both pieces are evaluated with the midpoint rule and
//! central differences.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("unknown section {0:?}; try z, zbar, z2, z3, zk:<k>, z2-1 or fold")]
    UnknownSection(String),
    #[error("zero ({0:.4}, {1:.4}) is not covered by any chart")]
    NotCovered(f64, f64),
    #[error("stabilized linearization is not surjective at ({x:.4}, {y:.4}) (smallest singular value {sigma:.2e})")]
    StabilizationFailure { x: f64, y: f64, sigma: f64 },
    #[error("|S| = {value:.3e} drops below the Thom radius at ({x:.4}, {y:.4}), where the integrand switches form")]
    Interface { x: f64, y: f64, value: f64 },
    #[error("|S| = {value:.3e} drops below the Thom radius on the box boundary at ({x:.4}, {y:.4})")]
    Boundary { x: f64, y: f64, value: f64 },
    #[error("chart centred at ({0:.3}, {1:.3}) leaves the bounding box")]
    ChartOutsideBox(f64, f64),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid stabilization: {0}")]
    Stabilization(String),
}

/// Built-in sections with known degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectionKind {
    Z,
    ZBar,
    ZPow(u32),
    /// `z^2 - 1`, two simple zeros of the same orientation
    TwoZeros,
    /// `(x^2 - 1, y)`, two simple zeros of opposite orientation
    Fold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToySection {
    pub kind: SectionKind,
    pub shift: (f64, f64),
}

impl ToySection {
    pub fn new(kind: SectionKind) -> Self {
        ToySection { kind, shift: (0.0, 0.0) }
    }

    pub fn parse(name: &str) -> Result<Self, IntegrationError> {
        let kind = match name {
            "z" => SectionKind::Z,
            "zbar" => SectionKind::ZBar,
            "z2-1" | "two-zeros" => SectionKind::TwoZeros,
            "fold" | "x2-1,y" => SectionKind::Fold,
            _ => {
                let k = name
                    .strip_prefix("zk:")
                    .or_else(|| name.strip_prefix('z'))
                    .and_then(|s| s.parse::<u32>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| IntegrationError::UnknownSection(name.to_string()))?;
                if k == 1 {
                    SectionKind::Z
                } else {
                    SectionKind::ZPow(k)
                }
            }
        };
        Ok(Self::new(kind))
    }

    pub fn translated(self, dx: f64, dy: f64) -> Self {
        ToySection { kind: self.kind, shift: (self.shift.0 + dx, self.shift.1 + dy) }
    }

    pub fn degree(&self) -> i32 {
        match self.kind {
            SectionKind::Z => 1,
            SectionKind::ZBar => -1,
            SectionKind::ZPow(k) => k as i32,
            SectionKind::TwoZeros => 2,
            SectionKind::Fold => 0,
        }
    }

    pub fn zeros(&self) -> Vec<(f64, f64)> {
        let base = match self.kind {
            SectionKind::TwoZeros | SectionKind::Fold => vec![(-1.0, 0.0), (1.0, 0.0)],
            _ => vec![(0.0, 0.0)],
        };
        base.into_iter().map(|(x, y)| (x + self.shift.0, y + self.shift.1)).collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let (x, y) = (x - self.shift.0, y - self.shift.1);
        match self.kind {
            SectionKind::Z => (x, y),
            SectionKind::ZBar => (x, -y),
            SectionKind::ZPow(k) => {
                let (mut re, mut im) = (1.0, 0.0);
                for _ in 0..k {
                    (re, im) = (re * x - im * y, re * y + im * x);
                }
                (re, im)
            }
            SectionKind::TwoZeros => (x * x - y * y - 1.0, 2.0 * x * y),
            SectionKind::Fold => (x * x - 1.0, y),
        }
    }

    /// Analytic Jacobian, used for the surjectivity check at zeros.
    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (x, y) = (x - self.shift.0, y - self.shift.1);
        match self.kind {
            SectionKind::Z => [[1.0, 0.0], [0.0, 1.0]],
            SectionKind::ZBar => [[1.0, 0.0], [0.0, -1.0]],
            SectionKind::ZPow(k) => {
                // d/dz z^k = k z^(k-1) acts as the matrix [[a, -b], [b, a]]
                let (mut a, mut b) = (k as f64, 0.0);
                for _ in 0..k - 1 {
                    (a, b) = (a * x - b * y, a * y + b * x);
                }
                [[a, -b], [b, a]]
            }
            SectionKind::TwoZeros => [[2.0 * x, -2.0 * y], [2.0 * y, 2.0 * x]],
            SectionKind::Fold => [[2.0 * x, 0.0], [0.0, 1.0]],
        }
    }
}

impl fmt::Display for ToySection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SectionKind::Z => write!(f, "z"),
            SectionKind::ZBar => write!(f, "zbar"),
            SectionKind::ZPow(k) => write!(f, "z{k}"),
            SectionKind::TwoZeros => write!(f, "z2-1"),
            SectionKind::Fold => write!(f, "fold"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub center: (f64, f64),
    pub radius: f64,
    /// 0 (no obstruction space) or 2
    pub rank: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    pub charts: Vec<Chart>,
    /// Support radius of the Thom form.
    #[serde(default = "default_thom_radius")]
    pub thom_radius: f64,
}

fn default_thom_radius() -> f64 {
    0.2
}

impl Stabilization {
    pub fn new(charts: Vec<Chart>) -> Self {
        Stabilization { charts, thom_radius: default_thom_radius() }
    }

    pub fn single(center: (f64, f64), radius: f64, rank: u32) -> Self {
        Self::new(vec![Chart { center, radius, rank }])
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let charts = self
            .charts
            .iter()
            .map(|c| Chart { center: (c.center.0 + dx, c.center.1 + dy), ..*c })
            .collect();
        Stabilization { charts, thom_radius: self.thom_radius }
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.thom_radius > 0.0) {
            return Err(IntegrationError::Stabilization("Thom radius must be positive".into()));
        }
        for c in &self.charts {
            if !(c.radius > 0.0) || !(c.rank == 0 || c.rank == 2) {
                return Err(IntegrationError::Stabilization(format!(
                    "chart at {:?} needs a positive radius and rank 0 or 2",
                    c.center
                )));
            }
        }
        Ok(())
    }

    /// Combined cut-off `1 - prod (1 - η_i)` over rank-2 charts.
    pub fn eta(&self, x: f64, y: f64) -> f64 {
        let mut keep = 1.0;
        for c in self.charts.iter().filter(|c| c.rank == 2) {
            keep *= 1.0 - cutoff(((x - c.center.0).hypot(y - c.center.1)) / c.radius);
        }
        1.0 - keep
    }
}

/// Smooth bump in the scaled radius: 1 up to 1/2, 0 from 3/4 on.
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 0.75 {
        return 0.0;
    }
    let t = (0.75 - s) / 0.25;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Normalized radial Thom density supported in the `delta`-ball.
pub fn thom_density(v: f64, delta: f64) -> f64 {
    const K: i32 = 4;
    if v >= delta {
        return 0.0;
    }
    let q = 1.0 - (v / delta).powi(2);
    (K + 1) as f64 / (PI * delta * delta) * q.powi(K)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridModel {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h: f64,
}

impl GridModel {
    pub fn square(half_width: f64, h: f64) -> Self {
        GridModel { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, h }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        GridModel { x_min: self.x_min + dx, x_max: self.x_max + dx, y_min: self.y_min + dy, y_max: self.y_max + dy, h: self.h }
    }

    fn cells(&self) -> (usize, usize) {
        (
            ((self.x_max - self.x_min) / self.h).round() as usize,
            ((self.y_max - self.y_min) / self.h).round() as usize,
        )
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.h > 0.0) || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(IntegrationError::Grid("need h > 0 and a nondegenerate box".into()));
        }
        let (nx, ny) = self.cells();
        if nx < 4 || ny < 4 {
            return Err(IntegrationError::Grid("box holds fewer than 4 cells per side".into()));
        }
        if nx.saturating_mul(ny) > 400_000_000 {
            return Err(IntegrationError::Grid("grid too large".into()));
        }
        Ok(())
    }

    fn midpoint(&self, i: usize, j: usize) -> (f64, f64) {
        let (nx, ny) = self.cells();
        let hx = (self.x_max - self.x_min) / nx as f64;
        let hy = (self.y_max - self.y_min) / ny as f64;
        (self.x_min + (i as f64 + 0.5) * hx, self.y_min + (j as f64 + 0.5) * hy)
    }
}

/// The map whose degree is integrated: `S/η` where `η > 0`, `S` elsewhere.
fn reduced(section: &ToySection, stab: &Stabilization, x: f64, y: f64) -> (f64, f64) {
    let (a, b) = section.eval(x, y);
    let eta = stab.eta(x, y);
    if eta > 0.0 {
        (a / eta, b / eta)
    } else {
        (a, b)
    }
}

fn check_preconditions(section: &ToySection, stab: &Stabilization, grid: &GridModel) -> Result<(), IntegrationError> {
    stab.validate()?;
    grid.validate()?;
    let delta = stab.thom_radius;
    for c in &stab.charts {
        let (cx, cy) = c.center;
        if cx - c.radius < grid.x_min || cx + c.radius > grid.x_max || cy - c.radius < grid.y_min || cy + c.radius > grid.y_max {
            return Err(IntegrationError::ChartOutsideBox(cx, cy));
        }
    }
    for (zx, zy) in section.zeros() {
        let covered = stab.charts.iter().any(|c| (zx - c.center.0).hypot(zy - c.center.1) < c.radius);
        if !covered {
            return Err(IntegrationError::NotCovered(zx, zy));
        }
        // smallest singular value of [DS | η I]
        let eta = stab.eta(zx, zy);
        let j = section.jacobian(zx, zy);
        let sigma = smallest_singular_value_augmented(j, eta);
        if sigma < 1e-8 {
            return Err(IntegrationError::StabilizationFailure { x: zx, y: zy, sigma });
        }
    }
    let (nx, ny) = grid.cells();
    // zero set must stay inside the charts; the integrand must vanish where
    // it switches between S/η and S and on the box boundary
    let problems: Vec<IntegrationError> = (0..ny)
        .into_par_iter()
        .filter_map(|j| {
            for i in 0..nx {
                let (x, y) = grid.midpoint(i, j);
                let (a, b) = section.eval(x, y);
                let value = a.hypot(b);
                if value >= delta {
                    continue;
                }
                let in_chart = stab.charts.iter().any(|c| (x - c.center.0).hypot(y - c.center.1) < c.radius);
                if !in_chart {
                    return Some(IntegrationError::NotCovered(x, y));
                }
                if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                    return Some(IntegrationError::Boundary { x, y, value });
                }
                let eta = stab.eta(x, y);
                let near_switch = stab.charts.iter().filter(|c| c.rank == 2).any(|c| {
                    let s = (x - c.center.0).hypot(y - c.center.1) / c.radius;
                    (0.75..=1.0).contains(&s)
                });
                if eta == 0.0 && near_switch {
                    return Some(IntegrationError::Interface { x, y, value });
                }
            }
            None
        })
        .collect();
    match problems.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn smallest_singular_value_augmented(j: [[f64; 2]; 2], eta: f64) -> f64 {
    // singular values of the 2x4 matrix [J | η I] are square roots of the
    // eigenvalues of J J^T + η^2 I
    let a = j[0][0] * j[0][0] + j[0][1] * j[0][1] + eta * eta;
    let d = j[1][0] * j[1][0] + j[1][1] * j[1][1] + eta * eta;
    let b = j[0][0] * j[1][0] + j[0][1] * j[1][1];
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d).powi(2) + b * b).sqrt();
    (mean - disc).max(0.0).sqrt()
}

/// Neumaier-compensated sum in iteration order.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integral of the pulled-back Thom form over the virtual neighbourhood.
pub fn euler_number(section: &ToySection, stab: &Stabilization, grid: &GridModel) -> Result<f64, IntegrationError> {
    check_preconditions(section, stab, grid)?;
    let (nx, ny) = grid.cells();
    let hx = (grid.x_max - grid.x_min) / nx as f64;
    let hy = (grid.y_max - grid.y_min) / ny as f64;
    let delta = stab.thom_radius;
    let step = grid.h;
    let rows: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| {
            compensated_sum((0..nx).map(|i| {
                let (x, y) = grid.midpoint(i, j);
                let (a, b) = reduced(section, stab, x, y);
                let r = a.hypot(b);
                if r >= delta {
                    return 0.0;
                }
                let fxp = reduced(section, stab, x + step, y);
                let fxm = reduced(section, stab, x - step, y);
                let fyp = reduced(section, stab, x, y + step);
                let fym = reduced(section, stab, x, y - step);
                let dadx = (fxp.0 - fxm.0) / (2.0 * step);
                let dbdx = (fxp.1 - fxm.1) / (2.0 * step);
                let dady = (fyp.0 - fym.0) / (2.0 * step);
                let dbdy = (fyp.1 - fym.1) / (2.0 * step);
                thom_density(r, delta) * (dadx * dbdy - dady * dbdx) * hx * hy
            }))
        })
        .collect();
    Ok(compensated_sum(rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Independence {
    pub value_a: f64,
    pub value_b: f64,
    pub delta: f64,
}

pub fn independence_check(
    section: &ToySection,
    a: &Stabilization,
    b: &Stabilization,
    grid: &GridModel,
) -> Result<Independence, IntegrationError> {
    let value_a = euler_number(section, a, grid)?;
    let value_b = euler_number(section, b, grid)?;
    Ok(Independence { value_a, value_b, delta: (value_a - value_b).abs() })
}

/// A chart layout that works for every catalog section: one rank-2 chart
/// per zero, or one around the origin for single-zero sections.
pub fn default_stabilization(section: &ToySection) -> Stabilization {
    let zeros = section.zeros();
    if zeros.len() == 1 {
        Stabilization::single(zeros[0], 1.0, 2)
    } else {
        Stabilization::new(zeros.iter().map(|&z| Chart { center: z, radius: 0.8, rank: 2 }).collect())
    }
}

/// Square box centred on the section's zeros, wide enough for the
/// default charts.
pub fn default_grid(section: &ToySection, h: f64) -> GridModel {
    GridModel::square(2.5, h).translated(section.shift.0, section.shift.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thom_density_has_unit_mass() {
        // radial quadrature of 2 pi r rho(r)
        let delta = 0.3;
        let n = 20_000;
        let h = delta / n as f64;
        let mass: f64 = (0..n).map(|i| {
            let r = (i as f64 + 0.5) * h;
            2.0 * PI * r * thom_density(r, delta) * h
        }).sum();
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(0.8), 0.0);
        assert!((cutoff(0.625) - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..100 {
            let v = cutoff(0.5 + 0.25 * i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(ToySection::parse("z3").unwrap().kind, SectionKind::ZPow(3));
        assert_eq!(ToySection::parse("zk:5").unwrap().degree(), 5);
        assert_eq!(ToySection::parse("zbar").unwrap().degree(), -1);
        assert_eq!(ToySection::parse("fold").unwrap().degree(), 0);
        assert!(ToySection::parse("w").is_err());
    }

    #[test]
    fn jacobian_matches_differences() {
        let s = ToySection::new(SectionKind::ZPow(3)).translated(0.2, -0.1);
        let (x, y, h) = (0.4, 0.7, 1e-6);
        let j = s.jacobian(x, y);
        let fx = |x, y| s.eval(x, y);
        let d = [
            [(fx(x + h, y).0 - fx(x - h, y).0) / (2.0 * h), (fx(x, y + h).0 - fx(x, y - h).0) / (2.0 * h)],
            [(fx(x + h, y).1 - fx(x - h, y).1) / (2.0 * h), (fx(x, y + h).1 - fx(x, y - h).1) / (2.0 * h)],
        ];
        for r in 0..2 {
            for c in 0..2 {
                assert!((j[r][c] - d[r][c]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn transverse_zero_needs_no_obstruction() {
        let s = ToySection::parse("z").unwrap();
        let v = euler_number(&s, &Stabilization::single((0.0, 0.0), 1.0, 0), &GridModel::square(2.0, 0.01)).unwrap();
        assert!((v - 1.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn degenerate_zero_without_obstruction_fails() {
        let s = ToySection::parse("z2").unwrap();
        let err = euler_number(&s, &Stabilization::single((0.0, 0.0), 1.0, 0), &GridModel::square(2.0, 0.01));
        assert!(matches!(err, Err(IntegrationError::StabilizationFailure { .. })));
    }

    #[test]
    fn uncovered_zero_is_rejected() {
        let s = ToySection::parse("z2-1").unwrap();
        let err = euler_number(&s, &Stabilization::single((1.0, 0.0), 0.5, 2), &GridModel::square(2.5, 0.01));
        assert!(matches!(err, Err(IntegrationError::NotCovered(..))));
    }
}
