//! `BMO_φ` norms, φ-Carleson measures, the pairing identity and the
//! John–Nirenberg and decay-integral checks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{wavelet_transform, AdmissibleWavelet};
use crate::growth::GrowthFunction;
use crate::halfspace::{distance, Ball, HalfSpaceGrid, Point, SpatialGrid, GRID_EPS};
use crate::norms::BallNorms;
use crate::numeric::{ls_slope, max_of, pairwise_sum};
use crate::weights::{BallFamily, RowIndex};

fn check_len(grid: &SpatialGrid, b: &[f64]) -> Result<()> {
    if b.len() != grid.len() {
        return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", b.len(), grid.len())));
    }
    Ok(())
}

/// Mean oscillation pieces of `b` on the in-domain cells of a ball:
/// `(|B|, Σ_B |b - b_B|^p h^n)`.
fn oscillation(grid: &SpatialGrid, b: &[f64], ball: &Ball, p: f64) -> Option<(f64, f64)> {
    let cells = grid.ball_cells(ball);
    if cells.is_empty() {
        return None;
    }
    let vals: Vec<f64> = cells.iter().map(|&i| b[i]).collect();
    let mean = pairwise_sum(&vals) / vals.len() as f64;
    let dev: Vec<f64> = vals.iter().map(|v| if p == 1.0 { (v - mean).abs() } else { (v - mean).abs().powf(p) }).collect();
    let h = grid.cell_measure();
    Some((vals.len() as f64 * h, pairwise_sum(&dev) * h))
}

/// `sup_B ‖χ_B‖^{-1} ∫_B |b - b_B|` over the ball family.
pub fn bmo_phi_norm(b: &[f64], phi: &GrowthFunction, grid: &SpatialGrid, family: &BallFamily) -> Result<f64> {
    bmo_phi_p_norm(b, phi, grid, 1.0, family)
}

/// `sup_B |B| ‖χ_B‖^{-1} (|B|^{-1} ∫_B |b - b_B|^p)^{1/p}`; at `p = 1` this is
/// [`bmo_phi_norm`] exactly.
pub fn bmo_phi_p_norm(b: &[f64], phi: &GrowthFunction, grid: &SpatialGrid, p: f64, family: &BallFamily) -> Result<f64> {
    check_len(grid, b)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Input(format!("p must be a finite number at least 1, got {p}")));
    }
    let balls = family.balls(grid)?;
    let norms = BallNorms::new(phi, grid);
    let vals: Vec<f64> = balls
        .par_iter()
        .map(|ball| {
            let Some((measure, integral)) = oscillation(grid, b, ball, p) else {
                return Ok(0.0);
            };
            let chi = norms.char_norm(ball)?;
            Ok(if p == 1.0 { integral / chi } else { measure / chi * (integral / measure).powf(1.0 / p) })
        })
        .collect::<Result<_>>()?;
    Ok(max_of(&vals).max(0.0))
}

/// Nonnegative density `dμ/(dx dt)` on the nodes of a half-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonMeasure {
    grid: HalfSpaceGrid,
    density: Vec<f64>,
    source: String,
}

impl CarlesonMeasure {
    pub fn new(grid: &HalfSpaceGrid, density: Vec<f64>, source: &str) -> Result<Self> {
        if density.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!("density has {} nodes, grid has {}", density.len(), grid.node_count())));
        }
        if let Some(v) = density.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Input(format!("density must be finite and nonnegative, found {v}")));
        }
        Ok(CarlesonMeasure { grid: grid.clone(), density, source: source.to_string() })
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `μ` of a single node: density times `h^n t ln ρ`.
    pub fn node_mass(&self, node: usize) -> f64 {
        let (_, m) = self.grid.split(node);
        self.density[node] * self.grid.node_weight() * self.grid.t(m)
    }

    pub fn total_mass(&self) -> f64 {
        let masses: Vec<f64> = (0..self.density.len()).map(|i| self.node_mass(i)).collect();
        pairwise_sum(&masses)
    }

    /// `μ(B̂)`.
    pub fn tent_mass(&self, ball: &Ball) -> f64 {
        let idx = self.level_indices();
        self.tent_mass_with(&idx, ball)
    }

    fn level_indices(&self) -> Vec<RowIndex> {
        let base = self.grid.base();
        (0..self.grid.levels())
            .map(|m| {
                let masses: Vec<f64> = (0..base.len()).map(|i| self.node_mass(self.grid.node(i, m))).collect();
                RowIndex::new(base, &masses, false)
            })
            .collect()
    }

    fn tent_mass_with(&self, idx: &[RowIndex], ball: &Ball) -> f64 {
        let base = self.grid.base();
        let slack = 2.0 * GRID_EPS * base.spacing();
        let mut acc = 0.0;
        for (m, index) in idx.iter().enumerate() {
            let reach = ball.radius - self.grid.t(m);
            if reach < -slack / 2.0 {
                break;
            }
            // closed ball |y - c| <= r - t as an open ball with slack
            let rows = base.ball_rows(&Ball::new(ball.center, reach + slack));
            acc += index.ball_sum(&rows).max(0.0);
        }
        acc
    }
}

/// `dμ = |φ_t * b|² dx dt / t`.
pub fn carleson_from_bmo(b: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid) -> Result<CarlesonMeasure> {
    check_len(hs.base(), b)?;
    let field = wavelet_transform(b, w, hs)?;
    let density: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(node, v)| v * v / hs.t(hs.split(node).1))
        .collect();
    CarlesonMeasure::new(hs, density, "|phi_t * b|^2 / t")
}

/// `sup_B |B|^{1/2} ‖χ_B‖^{-1} μ(B̂)^{1/2}` over the ball family.
pub fn carleson_norm(mu: &CarlesonMeasure, phi: &GrowthFunction, family: &BallFamily) -> Result<f64> {
    let base = mu.grid().base();
    let balls = family.balls(base)?;
    let norms = BallNorms::new(phi, base);
    let idx = mu.level_indices();
    let vals: Vec<f64> = balls
        .par_iter()
        .map(|ball| {
            let mass = mu.tent_mass_with(&idx, ball);
            if mass == 0.0 {
                return Ok(0.0);
            }
            let measure = base.ball_cells(ball).len() as f64 * base.cell_measure();
            Ok(measure.sqrt() / norms.char_norm(ball)? * mass.sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(max_of(&vals).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonRow {
    pub id: String,
    pub bmo: f64,
    pub carleson: f64,
    /// `None` for a constant `b`.
    pub ratio: Option<f64>,
}

/// `‖dμ‖_φ / ‖b‖_{BMO_φ}` for each member of the family.
pub fn theorem51_experiment(
    family: &[(String, Vec<f64>)],
    phi: &GrowthFunction,
    w: &AdmissibleWavelet,
    hs: &HalfSpaceGrid,
    balls: &BallFamily,
) -> Result<Vec<CarlesonRow>> {
    family
        .iter()
        .map(|(id, b)| {
            let bmo = bmo_phi_norm(b, phi, hs.base(), balls)?;
            let carleson = carleson_norm(&carleson_from_bmo(b, w, hs)?, phi, balls)?;
            Ok(CarlesonRow { id: id.clone(), bmo, carleson, ratio: if bmo > 0.0 { Some(carleson / bmo) } else { None } })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingResult {
    /// `∫ f b`.
    pub lhs: f64,
    /// `∫∫ (φ_t * f)(φ_t * b) dx dt/t`.
    pub rhs: f64,
    /// Relative to `|lhs|`, or absolute when `|lhs| < 1e-14`.
    pub residual: f64,
}

pub fn pairing_check(f: &[f64], b: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid) -> Result<PairingResult> {
    let grid = hs.base();
    check_len(grid, f)?;
    check_len(grid, b)?;
    let prod: Vec<f64> = f.iter().zip(b).map(|(x, y)| x * y).collect();
    let lhs = pairwise_sum(&prod) * grid.cell_measure();
    let ff = wavelet_transform(f, w, hs)?;
    let fb = wavelet_transform(b, w, hs)?;
    let prod: Vec<f64> = ff.values().iter().zip(fb.values()).map(|(x, y)| x * y).collect();
    let rhs = pairwise_sum(&prod) * hs.node_weight();
    let diff = (lhs - rhs).abs();
    let residual = if lhs.abs() < 1e-14 { diff } else { diff / lhs.abs() };
    Ok(PairingResult { lhs, rhs, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohnNirenbergReport {
    pub lambdas: Vec<f64>,
    /// `|{x ∈ B : |b - b_B| > λ}| / |B|`.
    pub distribution: Vec<f64>,
    /// `-slope` of `ln distribution` against `λ` over its positive tail half.
    pub rate: Option<f64>,
    pub monotone: bool,
    /// Distribution at zero, or a fitted rate that is positive.
    pub decays: bool,
}

pub fn john_nirenberg_experiment(b: &[f64], grid: &SpatialGrid, ball: &Ball, lambdas: &[f64]) -> Result<JohnNirenbergReport> {
    check_len(grid, b)?;
    let cells = grid.ball_cells(ball);
    if cells.is_empty() {
        return Err(Error::Input("ball holds no grid cells".into()));
    }
    let vals: Vec<f64> = cells.iter().map(|&i| b[i]).collect();
    let mean = pairwise_sum(&vals) / vals.len() as f64;
    let dev: Vec<f64> = vals.iter().map(|v| (v - mean).abs()).collect();
    let distribution: Vec<f64> =
        lambdas.iter().map(|l| dev.iter().filter(|d| **d > *l).count() as f64 / dev.len() as f64).collect();
    let monotone = distribution.windows(2).all(|w| w[1] <= w[0]);
    let positive: Vec<(f64, f64)> =
        lambdas.iter().zip(&distribution).filter(|(_, d)| **d > 0.0).map(|(l, d)| (*l, d.ln())).collect();
    let tail = &positive[positive.len() / 2..];
    let rate = if tail.len() >= 2 {
        let x: Vec<f64> = tail.iter().map(|p| p.0).collect();
        let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
        Some(-ls_slope(&x, &y))
    } else {
        None
    };
    let hits_zero = distribution.last().is_none_or(|d| *d == 0.0);
    let decays = hits_zero || rate.is_some_and(|r| r > 0.0);
    Ok(JohnNirenbergReport { lambdas: lambdas.to_vec(), distribution, rate, monotone, decays })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma52Result {
    /// Grid quadrature of `∫ δ^ε |f - f_{B0}| / (δ^{n+ε} + |x - x0|^{n+ε})`.
    pub lhs: f64,
    /// Bound on the part of the integral outside the domain, taking
    /// `|f - f_{B0}|` no larger than its grid maximum there.
    pub tail_bound: f64,
    /// `‖χ_{B0}‖ / |B0| · ‖f‖_{BMO_φ}`.
    pub rhs_scale: f64,
    pub ratio: f64,
    /// `ε <= n (q/i - 1)`: the decay hypothesis fails.
    pub below_threshold: bool,
}

/// Decay integral around `B0 = B(center, δ)` against
/// `‖χ_{B0}‖ / |B0| · ‖f‖_{BMO_φ}`; `bmo_norm` is `‖f‖_{BMO_φ}` as returned by
/// [`bmo_phi_norm`], so sweeps over `B0` compute it once.
#[allow(clippy::too_many_arguments)]
pub fn lemma52_check(
    f: &[f64],
    grid: &SpatialGrid,
    center: Point,
    delta: f64,
    epsilon: f64,
    phi: &GrowthFunction,
    q_index: f64,
    bmo_norm: f64,
) -> Result<Lemma52Result> {
    check_len(grid, f)?;
    if !(delta > 0.0) || !(epsilon > 0.0) {
        return Err(Error::Input(format!("delta and epsilon must be positive, got {delta}, {epsilon}")));
    }
    let n = grid.dim() as f64;
    let ball = Ball::new(center, delta);
    let cells = grid.ball_cells(&ball);
    if cells.is_empty() {
        return Err(Error::Input("B0 holds no grid cells".into()));
    }
    let inner: Vec<f64> = cells.iter().map(|&i| f[i]).collect();
    let mean = pairwise_sum(&inner) / inner.len() as f64;
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let d = distance(&grid.center(i), &center);
            delta.powf(epsilon) * (f[i] - mean).abs() / (delta.powf(n + epsilon) + d.powf(n + epsilon))
        })
        .collect();
    let lhs = pairwise_sum(&terms) * grid.cell_measure();
    let sup = f.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let l = grid.half_width();
    let reach = if grid.dim() == 1 {
        l - center[0].abs()
    } else {
        (l - center[0].abs()).min(l - center[1].abs())
    };
    let sphere = if grid.dim() == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let tail_bound = if reach > 0.0 { sup * sphere * delta.powf(epsilon) * reach.powf(-epsilon) / epsilon } else { f64::INFINITY };
    let norms = BallNorms::new(phi, grid);
    let measure = cells.len() as f64 * grid.cell_measure();
    let rhs_scale = norms.char_norm(&ball)? / measure * bmo_norm;
    let threshold = n * (q_index / phi.nominal_lower_type() - 1.0);
    Ok(Lemma52Result {
        lhs,
        tail_bound,
        rhs_scale,
        ratio: if rhs_scale > 0.0 { lhs / rhs_scale } else { f64::NAN },
        below_threshold: epsilon <= threshold,
    })
}
