//! Uniform spatial grids on `[-L, L]^n` and geometric half-space grids.

use crate::error::{Error, Result};

/// A point of `R^n`; for `n = 1` the second coordinate is always zero.
pub type Point = [f64; 2];

/// Relative slack (in units of the grid spacing) used by every discrete
/// inclusion test so that exact grid geometry is not decided by rounding.
pub(crate) const GRID_EPS: f64 = 1e-9;

pub fn distance(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Euclidean ball `B(center, radius)`; on a grid it selects the cells whose
/// centers lie at distance strictly less than `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn interval(center: f64, radius: f64) -> Self {
        Ball { center: [center, 0.0], radius }
    }

    /// The concentric ball `factor * B`.
    pub fn dilate(&self, factor: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * factor }
    }

    pub fn contains(&self, p: &Point) -> bool {
        distance(p, &self.center) < self.radius
    }

    /// Membership of `(y, t)` in the tent over the ball: `|y - x_B| <= r - t`.
    pub fn tent_contains(&self, y: &Point, t: f64) -> bool {
        t > 0.0 && distance(y, &self.center) <= self.radius - t
    }
}

/// Uniform grid of `cells_per_axis^dim` cells on `[-L, L]^dim`, `dim` in {1, 2}.
///
/// Cell `i` along an axis has center `-L + (i + 1/2) h`. The same formula for
/// any integer `i` defines the infinite lattice the grid is embedded in;
/// lattice cells outside the domain carry no data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    dim: usize,
    half_width: f64,
    cells_per_axis: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
        }
        if cells_per_axis < 2 {
            return Err(Error::Grid("need at least two cells per axis".into()));
        }
        Ok(SpatialGrid { dim, half_width, cells_per_axis })
    }

    /// Grid with spacing `h`; `2L/h` must be (close to) an integer.
    pub fn with_spacing(dim: usize, half_width: f64, h: f64) -> Result<Self> {
        let cells = 2.0 * half_width / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(Error::Grid(format!("2L/h = {cells} is not an integer")));
        }
        Self::new(dim, half_width, rounded as usize)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^n`, the quadrature weight of one cell.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn domain_measure(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    pub fn rows(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.cells_per_axis
        }
    }

    pub fn axis_coord(&self, i: i64) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// `(column, row)` of a flat cell index.
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx % self.cells_per_axis, idx / self.cells_per_axis)
        }
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        col + row * self.cells_per_axis
    }

    pub fn center(&self, idx: usize) -> Point {
        let (c, r) = self.coords(idx);
        if self.dim == 1 {
            [self.axis_coord(c as i64), 0.0]
        } else {
            [self.axis_coord(c as i64), self.axis_coord(r as i64)]
        }
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    pub fn sample<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.center(i))).collect()
    }

    /// Index of the cell containing `p`, if `p` is in the domain.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let h = self.spacing();
        let along = |x: f64| -> Option<usize> {
            let i = ((x + self.half_width) / h).floor();
            if i < 0.0 || i >= self.cells_per_axis as f64 {
                None
            } else {
                Some(i as usize)
            }
        };
        let c = along(p[0])?;
        let r = if self.dim == 1 { 0 } else { along(p[1])? };
        Some(self.index(c, r))
    }

    /// Grid with the same domain and `factor` times as many cells per axis.
    pub fn refined(&self, factor: usize) -> SpatialGrid {
        SpatialGrid { cells_per_axis: self.cells_per_axis * factor, ..self.clone() }
    }

    /// Largest integer `m >= 0` with `m h < radius` (robust to rounding).
    pub fn max_offset_below(&self, radius: f64) -> i64 {
        let ratio = radius / self.spacing();
        ((ratio - GRID_EPS).ceil() as i64 - 1).max(-1)
    }

    /// In-domain cells of a ball as `(row, lo, hi)` half-open column ranges.
    pub fn ball_rows(&self, ball: &Ball) -> Vec<(usize, usize, usize)> {
        let h = self.spacing();
        let n = self.cells_per_axis as i64;
        let mut out = Vec::new();
        let col_range = |cx: f64, half: f64| -> Option<(usize, usize)> {
            // columns i with |x_i - cx| < half
            if half <= 0.0 {
                return None;
            }
            let lo_f = (cx - half + self.half_width) / h - 0.5;
            let hi_f = (cx + half + self.half_width) / h - 0.5;
            let lo = (lo_f + GRID_EPS).floor() as i64 + 1;
            let hi = (hi_f - GRID_EPS).ceil() as i64 - 1;
            let lo = lo.max(0);
            let hi = hi.min(n - 1);
            if lo > hi {
                None
            } else {
                Some((lo as usize, hi as usize + 1))
            }
        };
        if self.dim == 1 {
            if let Some((lo, hi)) = col_range(ball.center[0], ball.radius) {
                out.push((0, lo, hi));
            }
        } else {
            for row in 0..self.cells_per_axis {
                let dy = self.axis_coord(row as i64) - ball.center[1];
                let r2 = ball.radius * ball.radius - dy * dy;
                if r2 <= 0.0 {
                    continue;
                }
                if let Some((lo, hi)) = col_range(ball.center[0], r2.sqrt()) {
                    out.push((row, lo, hi));
                }
            }
        }
        out
    }

    /// In-domain cell indices of a ball.
    pub fn ball_cells(&self, ball: &Ball) -> Vec<usize> {
        let mut cells = Vec::new();
        for (row, lo, hi) in self.ball_rows(ball) {
            for col in lo..hi {
                cells.push(self.index(col, row));
            }
        }
        cells
    }

    /// Centers of all lattice cells (inside or outside the domain) that lie in the ball.
    pub fn lattice_ball_points(&self, ball: &Ball) -> Vec<Point> {
        let h = self.spacing();
        let lattice_range = |cx: f64, half: f64| -> (i64, i64) {
            let lo_f = (cx - half + self.half_width) / h - 0.5;
            let hi_f = (cx + half + self.half_width) / h - 0.5;
            (lo_f.floor() as i64 - 1, hi_f.ceil() as i64 + 1)
        };
        let mut pts = Vec::new();
        if self.dim == 1 {
            let (lo, hi) = lattice_range(ball.center[0], ball.radius);
            for i in lo..=hi {
                let p = [self.axis_coord(i), 0.0];
                if distance(&p, &ball.center) < ball.radius - GRID_EPS * h {
                    pts.push(p);
                }
            }
        } else {
            let (rlo, rhi) = lattice_range(ball.center[1], ball.radius);
            let (clo, chi) = lattice_range(ball.center[0], ball.radius);
            for j in rlo..=rhi {
                for i in clo..=chi {
                    let p = [self.axis_coord(i), self.axis_coord(j)];
                    if distance(&p, &ball.center) < ball.radius - GRID_EPS * h {
                        pts.push(p);
                    }
                }
            }
        }
        pts
    }

    /// Lattice measure of a ball: number of lattice centers inside times `h^n`.
    pub fn ball_measure(&self, ball: &Ball) -> f64 {
        self.lattice_ball_points(ball).len() as f64 * self.cell_measure()
    }

    /// Distance from a cell center to the nearest lattice center outside the domain.
    pub fn exterior_distance(&self, idx: usize) -> f64 {
        let h = self.spacing();
        let n = self.cells_per_axis;
        let (c, r) = self.coords(idx);
        let along = |i: usize| ((i + 1).min(n - i)) as f64 * h;
        if self.dim == 1 {
            along(c)
        } else {
            along(c).min(along(r))
        }
    }
}

/// Geometric levels `t_m = t_min * ratio^m`, `m = 0..levels`, over a spatial grid.
///
/// A node `(cell, m)` carries the measure `h^n * ln(ratio)` for `dy dt/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGrid {
    base: SpatialGrid,
    t_min: f64,
    ratio: f64,
    levels: usize,
}

impl HalfSpaceGrid {
    pub fn new(base: SpatialGrid, t_min: f64, ratio: f64, levels: usize) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Grid(format!("level ratio must exceed 1, got {ratio}")));
        }
        if !(t_min > 0.0) {
            return Err(Error::Grid(format!("t_min must be positive, got {t_min}")));
        }
        if levels == 0 {
            return Err(Error::Grid("need at least one t-level".into()));
        }
        let g = HalfSpaceGrid { base, t_min, ratio, levels };
        if g.t_max() > g.base.half_width() * (1.0 + 1e-12) {
            return Err(Error::Grid(format!(
                "t_max = {} exceeds the half width {}",
                g.t_max(),
                g.base.half_width()
            )));
        }
        Ok(g)
    }

    pub fn base(&self) -> &SpatialGrid {
        &self.base
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t(&self, m: usize) -> f64 {
        self.t_min * self.ratio.powi(m as i32)
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.levels - 1)
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.levels).map(|m| self.t(m)).collect()
    }

    pub fn log_ratio(&self) -> f64 {
        self.ratio.ln()
    }

    pub fn node_count(&self) -> usize {
        self.levels * self.base.len()
    }

    pub fn node(&self, cell: usize, level: usize) -> usize {
        level * self.base.len() + cell
    }

    /// `(cell, level)` of a node index.
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node % self.base.len(), node / self.base.len())
    }

    /// Measure of a node for `dy dt / t`.
    pub fn node_weight(&self) -> f64 {
        self.base.cell_measure() * self.log_ratio()
    }

    /// The same levels over a refined spatial grid.
    pub fn refined(&self, factor: usize) -> HalfSpaceGrid {
        HalfSpaceGrid { base: self.base.refined(factor), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_and_spacing() {
        let g = SpatialGrid::new(1, 1.0, 4).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.center(0), [-0.75, 0.0]);
        assert_eq!(g.center(3), [0.75, 0.0]);
        assert_eq!(g.locate(&[0.1, 0.0]), Some(2));
        assert_eq!(g.locate(&[1.5, 0.0]), None);
    }

    #[test]
    fn ball_rows_are_strict() {
        let g = SpatialGrid::new(1, 1.0, 8).unwrap(); // h = 0.25
        // center at cell 3 (x = -0.125), radius 2h: offsets -1..=1
        let b = Ball::interval(-0.125, 0.5);
        assert_eq!(g.ball_rows(&b), vec![(0, 2, 5)]);
        assert_eq!(g.lattice_ball_points(&b).len(), 3);
        let g2 = SpatialGrid::new(2, 1.0, 8).unwrap();
        let b2 = Ball::new([-0.125, -0.125], 0.3);
        assert_eq!(g2.ball_cells(&b2).len(), 5);
    }

    #[test]
    fn lattice_ball_extends_past_domain() {
        let g = SpatialGrid::new(1, 1.0, 8).unwrap();
        let b = Ball::interval(0.875, 1.0); // reaches past x = 1
        assert!(g.lattice_ball_points(&b).len() > g.ball_cells(&b).len());
        assert!((g.ball_measure(&b) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn exterior_distance_counts_cells_to_the_wall() {
        let g = SpatialGrid::new(1, 1.0, 8).unwrap();
        assert_eq!(g.exterior_distance(0), 0.25);
        assert_eq!(g.exterior_distance(3), 1.0);
        assert_eq!(g.exterior_distance(7), 0.25);
    }

    #[test]
    fn halfspace_grid_rejects_tall_levels() {
        let g = SpatialGrid::new(1, 1.0, 8).unwrap();
        assert!(HalfSpaceGrid::new(g.clone(), 0.5, 2.0, 3).is_err());
        let hs = HalfSpaceGrid::new(g, 0.25, 2.0, 3).unwrap();
        assert_eq!(hs.t_max(), 1.0);
        assert_eq!(hs.split(hs.node(5, 2)), (5, 2));
    }
}
