//! Muckenhoupt and reverse Hölder constants, critical indices, and the
//! Hardy–Littlewood maximal operator on grids.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::halfspace::{Ball, SpatialGrid};

/// Window lengths (in cells per side) used by the uncentered maximal operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaximalPolicy {
    /// Every length `1..=N`.
    #[default]
    AllWindows,
    /// Lengths `2^k`.
    Dyadic,
    /// Lengths `round(2^{j/k})`, `k` per octave.
    Geometric(u32),
}

impl MaximalPolicy {
    pub fn lengths(&self, n: usize) -> Vec<usize> {
        match *self {
            MaximalPolicy::AllWindows => (1..=n).collect(),
            MaximalPolicy::Dyadic => {
                let mut v = Vec::new();
                let mut w = 1;
                while w <= n {
                    v.push(w);
                    w *= 2;
                }
                v
            }
            MaximalPolicy::Geometric(k) => {
                let mut v: Vec<usize> = Vec::new();
                let mut j = 0;
                loop {
                    let w = 2f64.powf(j as f64 / k.max(1) as f64).round() as usize;
                    if w > n {
                        break;
                    }
                    if v.last() != Some(&w) {
                        v.push(w);
                    }
                    j += 1;
                }
                if v.last() != Some(&n) {
                    v.push(n);
                }
                v
            }
        }
    }
}

/// `out[x] = max a[s]` over `s ∈ [x + 1 - w, x] ∩ [0, a.len())`, for `x < n_out`.
fn trailing_window_max(a: &[f64], w: usize, n_out: usize) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; n_out];
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for x in 0..n_out {
        if x < a.len() {
            while let Some(&b) = dq.back() {
                if a[b] <= a[x] {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(x);
        }
        while let Some(&f) = dq.front() {
            if f + w <= x {
                dq.pop_front();
            } else {
                break;
            }
        }
        if let Some(&f) = dq.front() {
            out[x] = a[f];
        }
    }
    out
}

/// Uncentered maximal function: at each cell, the largest average of `|f|`
/// over windows (intervals or squares of the policy's side lengths) that
/// contain the cell and lie in the domain.
pub fn hardy_littlewood_maximal(grid: &SpatialGrid, f: &[f64], policy: MaximalPolicy) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", f.len(), grid.len())));
    }
    let n = grid.cells_per_axis();
    let lengths = policy.lengths(n);
    if grid.dim() == 1 {
        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + f[i].abs();
        }
        // max is exact, so the fold/reduce order cannot change the result
        let out = lengths
            .par_iter()
            .fold(
                || vec![0.0f64; n],
                |mut acc, &w| {
                    let avg: Vec<f64> = (0..=n - w).map(|s| (prefix[s + w] - prefix[s]) / w as f64).collect();
                    merge_max(&mut acc, &trailing_window_max(&avg, w, n));
                    acc
                },
            )
            .reduce(|| vec![0.0f64; n], |mut a, b| {
                merge_max(&mut a, &b);
                a
            });
        return Ok(out);
    }
    let stride = n + 1;
    let mut prefix = vec![0.0; stride * stride];
    for r in 0..n {
        for c in 0..n {
            prefix[(r + 1) * stride + c + 1] = f[grid.index(c, r)].abs() + prefix[r * stride + c + 1]
                + prefix[(r + 1) * stride + c]
                - prefix[r * stride + c];
        }
    }
    let out = lengths
        .par_iter()
        .fold(|| vec![0.0f64; grid.len()], |mut acc, &w| {
            let k = n - w + 1;
            let area = (w * w) as f64;
            let mut avg = vec![0.0; k * k];
            for r in 0..k {
                for c in 0..k {
                    let s = prefix[(r + w) * stride + c + w] - prefix[r * stride + c + w] - prefix[(r + w) * stride + c]
                        + prefix[r * stride + c];
                    avg[r * k + c] = s / area;
                }
            }
            // max over origins along columns, then along rows
            let mut cols = vec![0.0; k * n];
            for r in 0..k {
                let m = trailing_window_max(&avg[r * k..(r + 1) * k], w, n);
                cols[r * n..(r + 1) * n].copy_from_slice(&m);
            }
            let mut out = vec![0.0; n * n];
            for c in 0..n {
                let column: Vec<f64> = (0..k).map(|r| cols[r * n + c]).collect();
                let m = trailing_window_max(&column, w, n);
                for r in 0..n {
                    out[grid.index(c, r)] = m[r];
                }
            }
            merge_max(&mut acc, &out);
            acc
        })
        .reduce(|| vec![0.0f64; grid.len()], |mut a, b| {
            merge_max(&mut a, &b);
            a
        });
    Ok(out)
}

fn merge_max(acc: &mut [f64], other: &[f64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a = a.max(*b);
    }
}

/// The balls over which the sups in `𝔸_q`, `ℝℍ_q`, BMO and Carleson norms run.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BallFamily {
    /// Balls centered at cell centers with radii `h 2^k` that fit in the domain.
    #[default]
    Dyadic,
    /// Every contiguous run of cells (one dimension only).
    AllIntervals,
    Explicit(Vec<Ball>),
}

impl BallFamily {
    pub fn balls(&self, grid: &SpatialGrid) -> Result<Vec<Ball>> {
        let h = grid.spacing();
        let n = grid.cells_per_axis();
        match self {
            BallFamily::Dyadic => {
                let mut out = Vec::new();
                let mut k = 0;
                loop {
                    let m = (1usize << k) - 1;
                    if 2 * m + 1 > n {
                        break;
                    }
                    let radius = h * (1u64 << k) as f64;
                    let fits = |i: usize| i >= m && i + m < n;
                    for idx in 0..grid.len() {
                        let (c, r) = grid.coords(idx);
                        if fits(c) && (grid.dim() == 1 || fits(r)) {
                            out.push(Ball::new(grid.center(idx), radius));
                        }
                    }
                    k += 1;
                }
                Ok(out)
            }
            BallFamily::AllIntervals => {
                if grid.dim() != 1 {
                    return Err(Error::Input("the all-intervals family needs a one-dimensional grid".into()));
                }
                let mut out = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..n {
                    for j in i..n {
                        let center = 0.5 * (grid.axis_coord(i as i64) + grid.axis_coord(j as i64));
                        out.push(Ball::interval(center, (j - i + 1) as f64 * h / 2.0));
                    }
                }
                Ok(out)
            }
            BallFamily::Explicit(balls) => {
                if balls.is_empty() {
                    return Err(Error::Input("explicit ball family is empty".into()));
                }
                Ok(balls.clone())
            }
        }
    }
}

/// Row-wise prefix sums and range maxima of a grid field.
pub(crate) struct RowIndex {
    n: usize,
    prefix: Vec<f64>,
    // sparse table per row: level j holds max over [i, i + 2^j)
    sparse: Vec<Vec<f64>>,
}

impl RowIndex {
    pub(crate) fn new(grid: &SpatialGrid, values: &[f64], with_max: bool) -> Self {
        let n = grid.cells_per_axis();
        let rows = grid.rows();
        let mut prefix = vec![0.0; rows * (n + 1)];
        for r in 0..rows {
            for c in 0..n {
                prefix[r * (n + 1) + c + 1] = prefix[r * (n + 1) + c] + values[grid.index(c, r)];
            }
        }
        let mut sparse = Vec::new();
        if with_max {
            let mut level: Vec<f64> = (0..rows * n).map(|k| values[grid.index(k % n, k / n)]).collect();
            let mut span = 1;
            sparse.push(level.clone());
            while 2 * span <= n {
                let next: Vec<f64> = (0..rows * n)
                    .map(|k| {
                        let c = k % n;
                        if c + span < n {
                            level[k].max(level[k + span])
                        } else {
                            level[k]
                        }
                    })
                    .collect();
                sparse.push(next.clone());
                level = next;
                span *= 2;
            }
        }
        RowIndex { n, prefix, sparse }
    }

    pub(crate) fn sum(&self, row: usize, lo: usize, hi: usize) -> f64 {
        self.prefix[row * (self.n + 1) + hi] - self.prefix[row * (self.n + 1) + lo]
    }

    pub(crate) fn max(&self, row: usize, lo: usize, hi: usize) -> f64 {
        let len = hi - lo;
        let j = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let t = &self.sparse[j];
        t[row * self.n + lo].max(t[row * self.n + hi - (1 << j)])
    }

    pub(crate) fn ball_sum(&self, rows: &[(usize, usize, usize)]) -> f64 {
        rows.iter().map(|&(r, lo, hi)| self.sum(r, lo, hi)).sum()
    }

    pub(crate) fn ball_max(&self, rows: &[(usize, usize, usize)]) -> f64 {
        rows.iter().map(|&(r, lo, hi)| self.max(r, lo, hi)).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn ball_cell_count(rows: &[(usize, usize, usize)]) -> usize {
    rows.iter().map(|&(_, lo, hi)| hi - lo).sum()
}

/// Levels the outer sup over `t` actually has to visit.
fn effective_levels(phi: &GrowthFunction, t_levels: &[f64]) -> Vec<f64> {
    if phi.product_parts().is_some() {
        // constants in t cancel in every ratio
        vec![1.0]
    } else {
        t_levels.to_vec()
    }
}

fn weight_field(phi: &GrowthFunction, grid: &SpatialGrid, t: f64) -> Vec<f64> {
    match phi.product_parts() {
        Some((w, _)) => grid.sample(|x| w.at(x)),
        None => grid.sample(|x| phi.value(x, t)),
    }
}

fn sup_over_balls<F>(phi: &GrowthFunction, grid: &SpatialGrid, balls: &[Ball], t_levels: &[f64], per_ball: F) -> Result<f64>
where
    F: Fn(&[f64], &[Vec<(usize, usize, usize)>]) -> Vec<f64> + Sync,
{
    if balls.is_empty() {
        return Err(Error::Input("ball family is empty".into()));
    }
    if t_levels.is_empty() {
        return Err(Error::Input("t grid is empty".into()));
    }
    let rows: Vec<Vec<(usize, usize, usize)>> = balls.iter().map(|b| grid.ball_rows(b)).collect();
    if rows.iter().any(|r| r.is_empty()) {
        return Err(Error::Precondition("a ball of the family contains no grid cell".into()));
    }
    let levels = effective_levels(phi, t_levels);
    let per_t: Vec<f64> = levels
        .par_iter()
        .map(|&t| {
            let field = weight_field(phi, grid, t);
            per_ball(&field, &rows).into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
        })
        .collect();
    Ok(per_t.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `𝔸_q(φ)` over a ball family and `t` levels. `+∞` when `φ` vanishes on a cell of some ball.
pub fn muckenhoupt_constant(
    phi: &GrowthFunction,
    grid: &SpatialGrid,
    q: f64,
    family: &BallFamily,
    t_levels: &[f64],
) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Input(format!("Muckenhoupt index must be at least 1, got {q}")));
    }
    let balls = family.balls(grid)?;
    sup_over_balls(phi, grid, &balls, t_levels, |field, rows| {
        let plain = RowIndex::new(grid, field, false);
        let zero = field.iter().any(|&v| !(v > 0.0));
        let dual: Vec<f64> = if q == 1.0 {
            field.iter().map(|&v| if v > 0.0 { 1.0 / v } else { f64::INFINITY }).collect()
        } else {
            field.iter().map(|&v| if v > 0.0 { v.powf(-1.0 / (q - 1.0)) } else { f64::INFINITY }).collect()
        };
        let dual_idx = RowIndex::new(grid, &dual, q == 1.0);
        rows.par_iter()
            .map(|r| {
                let count = ball_cell_count(r) as f64;
                let avg = plain.ball_sum(r) / count;
                if zero && r.iter().any(|&(row, lo, hi)| (lo..hi).any(|c| !(field[grid.index(c, row)] > 0.0))) {
                    return f64::INFINITY;
                }
                if q == 1.0 {
                    avg * dual_idx.ball_max(r)
                } else {
                    avg * (dual_idx.ball_sum(r) / count).powf(q - 1.0)
                }
            })
            .collect()
    })
}

/// `ℝℍ_q(φ)`; `q = f64::INFINITY` uses the cell maximum.
pub fn reverse_holder_constant(
    phi: &GrowthFunction,
    grid: &SpatialGrid,
    q: f64,
    family: &BallFamily,
    t_levels: &[f64],
) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::Input(format!("reverse Hölder index must exceed 1, got {q}")));
    }
    let balls = family.balls(grid)?;
    sup_over_balls(phi, grid, &balls, t_levels, |field, rows| {
        let plain = RowIndex::new(grid, field, q.is_infinite());
        let powered: Vec<f64> = if q.is_infinite() { Vec::new() } else { field.iter().map(|v| v.powf(q)).collect() };
        let pow_idx = if q.is_infinite() { None } else { Some(RowIndex::new(grid, &powered, false)) };
        rows.par_iter()
            .map(|r| {
                let count = ball_cell_count(r) as f64;
                let avg = plain.ball_sum(r) / count;
                if !(avg > 0.0) {
                    return f64::INFINITY;
                }
                let top = match &pow_idx {
                    None => plain.ball_max(r),
                    Some(idx) => (idx.ball_sum(r) / count).powf(1.0 / q),
                };
                top / avg
            })
            .collect()
    })
}

/// Refinement trend of a constant measured on grids `N, 2N, 4N, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTrend {
    pub values: Vec<f64>,
    /// `A_{i+1} - A_i`.
    pub increments: Vec<f64>,
    pub divergent: bool,
}

impl RefinementTrend {
    /// Divergent when some value is infinite, or when the last increment is
    /// still above `1e-3 A` and at least 0.9 of the first. A constant that
    /// converges like `h^e` has increments shrinking by `2^{-e}` per halving;
    /// logarithmic or faster growth keeps them level or growing.
    pub fn classify(values: Vec<f64>) -> Self {
        let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let divergent = values.iter().any(|v| !v.is_finite())
            || match (increments.first(), increments.last(), values.last()) {
                (Some(&first), Some(&last), Some(&top)) => last > 1e-3 * top && last >= 0.9 * first,
                _ => false,
            };
        RefinementTrend { values, increments, divergent }
    }
}

/// Point estimate of a critical index together with the scan bracket it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEstimate {
    /// `None` when no scanned index was stable.
    pub estimate: Option<f64>,
    /// The two scanned indices on either side of the stability switch.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightAnalysis {
    pub aq_constants: Vec<(f64, RefinementTrend)>,
    pub rh_constants: Vec<(f64, RefinementTrend)>,
    pub q_critical: IndexEstimate,
    pub r_critical: IndexEstimate,
    /// `⌊n (q(φ)/i(φ) - 1)⌋` from the estimates.
    pub m: Option<i64>,
    pub ball_family: BallFamily,
    pub t_levels: Vec<f64>,
}

/// Estimates `q(φ)`, `r(φ)` and `m(φ)` by scanning `q_scan` on the grid and its
/// `refinements` successive halvings, using `lower_type` for `i(φ)`.
pub fn critical_indices(
    phi: &GrowthFunction,
    grid: &SpatialGrid,
    q_scan: &[f64],
    family: &BallFamily,
    t_levels: &[f64],
    refinements: usize,
    lower_type: f64,
) -> Result<WeightAnalysis> {
    if q_scan.is_empty() || q_scan.windows(2).any(|w| w[1] <= w[0]) || q_scan[0] < 1.0 {
        return Err(Error::Input("q scan must be increasing and start at 1 or above".into()));
    }
    if !matches!(family, BallFamily::Dyadic | BallFamily::AllIntervals) {
        return Err(Error::Input("refinement studies need a grid-generated ball family".into()));
    }
    let grids: Vec<SpatialGrid> = (0..=refinements).map(|k| grid.refined(1 << k)).collect();
    let trend = |f: &dyn Fn(&SpatialGrid) -> Result<f64>| -> Result<RefinementTrend> {
        let values = grids.iter().map(f).collect::<Result<Vec<f64>>>()?;
        Ok(RefinementTrend::classify(values))
    };
    let mut aq = Vec::new();
    for &q in q_scan {
        aq.push((q, trend(&|g| muckenhoupt_constant(phi, g, q, family, t_levels))?));
    }
    let mut rh_scan: Vec<f64> = q_scan.iter().cloned().filter(|&q| q > 1.0).collect();
    rh_scan.push(f64::INFINITY);
    let mut rh = Vec::new();
    for &q in &rh_scan {
        rh.push((q, trend(&|g| reverse_holder_constant(phi, g, q, family, t_levels))?));
    }
    let q_critical = match aq.iter().position(|(_, t)| !t.divergent) {
        Some(0) => IndexEstimate { estimate: Some(aq[0].0), bracket: (aq[0].0.min(1.0), aq[0].0) },
        Some(k) => IndexEstimate { estimate: Some(aq[k].0), bracket: (aq[k - 1].0, aq[k].0) },
        None => IndexEstimate { estimate: None, bracket: (aq[aq.len() - 1].0, f64::INFINITY) },
    };
    // r(φ) is a sup: the largest stable index, bracketed by the next scanned one
    let r_critical = match rh.iter().rposition(|(_, t)| !t.divergent) {
        Some(k) if k + 1 == rh.len() => IndexEstimate { estimate: Some(f64::INFINITY), bracket: (f64::INFINITY, f64::INFINITY) },
        Some(k) => IndexEstimate { estimate: Some(rh[k].0), bracket: (rh[k].0, rh[k + 1].0) },
        None => IndexEstimate { estimate: None, bracket: (1.0, rh[0].0) },
    };
    let m = q_critical.estimate.map(|q| m_index(grid.dim(), q, lower_type));
    Ok(WeightAnalysis {
        aq_constants: aq,
        rh_constants: rh,
        q_critical,
        r_critical,
        m,
        ball_family: family.clone(),
        t_levels: t_levels.to_vec(),
    })
}

/// `m(φ) = ⌊n (q / i - 1)⌋`.
pub fn m_index(dim: usize, q: f64, i: f64) -> i64 {
    (dim as f64 * (q / i - 1.0) + 1e-12).floor() as i64
}
