//! Discretized upper half-space: cones, tents, density sets, Whitney cubes.

mod grid;
mod whitney;

pub use grid::{distance, Ball, HalfSpaceGrid, Point, SpatialGrid};
pub(crate) use grid::GRID_EPS;
pub use whitney::{whitney_decomposition, WhitneyCube};

use crate::error::{Error, Result};
use crate::weights::{hardy_littlewood_maximal, MaximalPolicy};

/// `(y, t) ∈ Γ_ν(x)`, i.e. `|x - y| < ν t`.
pub fn cone_membership(x: &Point, y: &Point, t: f64, aperture: f64) -> bool {
    distance(x, y) < aperture * t
}

/// Membership predicate of the tent over a ball.
pub fn tent_over_ball(ball: Ball) -> impl Fn(&Point, f64) -> bool {
    move |y, t| ball.tent_contains(y, t)
}

/// For every cell, the distance from its center to the nearest lattice center
/// outside the set (cells outside the domain always count as outside).
pub fn distance_to_complement(grid: &SpatialGrid, set: &[bool]) -> Vec<f64> {
    let n = grid.cells_per_axis();
    let h = grid.spacing();
    // 1D nearest-complement distance in cell units along a line of length n,
    // with virtual complement cells at -1 and n
    let line = |get: &dyn Fn(usize) -> bool| -> Vec<f64> {
        let mut d = vec![0.0; n];
        let mut last = -1i64;
        for i in 0..n {
            if !get(i) {
                last = i as i64;
            }
            d[i] = (i as i64 - last) as f64;
        }
        let mut next = n as i64;
        for i in (0..n).rev() {
            if !get(i) {
                next = i as i64;
            }
            d[i] = d[i].min((next - i as i64) as f64);
        }
        d
    };
    if grid.dim() == 1 {
        return line(&|i| set[i]).into_iter().map(|d| d * h).collect();
    }
    // rows first, then an exact lower envelope over rows (small grids only)
    let mut g = vec![0.0; n * n];
    for r in 0..n {
        let d = line(&|c| set[grid.index(c, r)]);
        for c in 0..n {
            g[grid.index(c, r)] = d[c];
        }
    }
    let mut out = vec![0.0; n * n];
    for c in 0..n {
        for r in 0..n {
            // exterior rows -1 and n contribute their vertical offset
            let mut best = ((r + 1).min(n - r) as f64).powi(2);
            for k in 0..n {
                let dr = r as f64 - k as f64;
                let v = g[grid.index(c, k)].powi(2) + dr * dr;
                if v < best {
                    best = v;
                }
            }
            out[grid.index(c, r)] = best.sqrt() * h;
        }
    }
    out
}

/// Node mask of the tent `T_ν(O) = {(y, t): d(y, O^c) >= ν t}`.
pub fn tent_over_set(grid: &HalfSpaceGrid, set: &[bool], aperture: f64) -> Vec<bool> {
    let d = distance_to_complement(grid.base(), set);
    let cells = grid.base().len();
    let mut mask = vec![false; grid.node_count()];
    for m in 0..grid.levels() {
        let t = grid.t(m);
        for i in 0..cells {
            mask[grid.node(i, m)] = d[i] >= aperture * t * (1.0 - GRID_EPS);
        }
    }
    mask
}

/// `O*_γ = {x : M(χ_O)(x) > 1 - γ}`.
pub fn gamma_density_complement(
    grid: &SpatialGrid,
    set: &[bool],
    gamma: f64,
    policy: MaximalPolicy,
) -> Result<Vec<bool>> {
    if set.len() != grid.len() {
        return Err(Error::GridMismatch(format!("set has {} cells, grid has {}", set.len(), grid.len())));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Input(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if set.iter().all(|&b| b) {
        return Err(Error::Precondition("set covers the whole domain; its complement is empty".into()));
    }
    if !set.iter().any(|&b| b) {
        return Ok(vec![false; grid.len()]);
    }
    if grid.dim() == 1 && policy == MaximalPolicy::AllWindows {
        return Ok(density_complement_intervals(set, gamma));
    }
    let chi: Vec<f64> = set.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let m = hardy_littlewood_maximal(grid, &chi, policy)?;
    Ok(m.iter().zip(set).map(|(v, &inside)| inside || *v > 1.0 - gamma).collect())
}

/// One-dimensional, all-windows case in linear time: with
/// `G(i) = Σ_{j<i} (χ_O(j) - (1 - γ))`, a cell `x` lies in a window of
/// density above `1 - γ` iff `max_{b>x} G(b) > min_{a<=x} G(a)`.
fn density_complement_intervals(set: &[bool], gamma: f64) -> Vec<bool> {
    let n = set.len();
    let mut g = vec![0.0; n + 1];
    for i in 0..n {
        g[i + 1] = g[i] + if set[i] { gamma } else { gamma - 1.0 };
    }
    let mut right_max = vec![f64::NEG_INFINITY; n + 1];
    for i in (0..n).rev() {
        right_max[i] = right_max[i + 1].max(g[i + 1]);
    }
    let mut left_min = f64::INFINITY;
    (0..n)
        .map(|x| {
            left_min = left_min.min(g[x]);
            set[x] || right_max[x] > left_min
        })
        .collect()
}

/// Measure of a cell mask.
pub fn set_measure(grid: &SpatialGrid, set: &[bool]) -> f64 {
    set.iter().filter(|&&b| b).count() as f64 * grid.cell_measure()
}
