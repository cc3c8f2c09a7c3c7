//! Dyadic Whitney decomposition of an open union of grid cells.

use super::grid::{Point, SpatialGrid, GRID_EPS};
use super::distance_to_complement;

/// A dyadic cube of `2^level` cells per side.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyCube {
    /// Depth below the root block; larger cubes have smaller generations.
    pub generation: usize,
    pub level: u32,
    /// Lower-left cell `(column, row)`.
    pub origin: (usize, usize),
    pub center: Point,
    pub side: f64,
    /// Min over the cube's cells of the center distance to the complement.
    pub dist_to_complement: f64,
    /// Identifier of the open set the cube belongs to.
    pub set_id: usize,
    /// Set when a single cell had to be emitted although it sits closer to the
    /// complement than `√n` times its side.
    pub resolution_loss: bool,
}

impl WhitneyCube {
    pub fn cells_per_side(&self) -> usize {
        1 << self.level
    }

    pub fn cells(&self, grid: &SpatialGrid) -> Vec<usize> {
        let w = self.cells_per_side();
        let rows = if grid.dim() == 1 { 1 } else { w };
        let mut out = Vec::with_capacity(w * rows);
        for r in 0..rows {
            for c in 0..w {
                out.push(grid.index(self.origin.0 + c, self.origin.1 + r));
            }
        }
        out
    }

    /// Radius of the ball circumscribing the cube, `√n ℓ / 2`.
    pub fn half_diagonal(&self, dim: usize) -> f64 {
        (dim as f64).sqrt() * self.side / 2.0
    }
}

/// Whitney cubes of `set`: maximal dyadic blocks (aligned to the grid origin)
/// inside the set whose distance to the complement is at least `√n ℓ`.
///
/// Cubes are ordered by `(generation, center)`; the cells they cover are
/// exactly the cells of the set.
pub fn whitney_decomposition(grid: &SpatialGrid, set: &[bool], set_id: usize) -> Vec<WhitneyCube> {
    if !set.iter().any(|&b| b) {
        return Vec::new();
    }
    let n = grid.cells_per_axis();
    let h = grid.spacing();
    let root = n.next_power_of_two().trailing_zeros();
    let dist = distance_to_complement(grid, set);
    let sqrt_n = (grid.dim() as f64).sqrt();
    let mut out = Vec::new();
    let mut stack = vec![(root, 0usize, 0usize)];
    while let Some((level, c0, r0)) = stack.pop() {
        let w = 1usize << level;
        let rows = if grid.dim() == 1 { 1 } else { w };
        let mut any = false;
        let mut all = true;
        let mut dmin = f64::INFINITY;
        for r in r0..r0 + rows {
            for c in c0..c0 + w {
                if r >= grid.rows() || c >= n {
                    all = false;
                    continue;
                }
                let i = grid.index(c, r);
                if set[i] {
                    any = true;
                    dmin = dmin.min(dist[i]);
                } else {
                    all = false;
                }
            }
        }
        if !any {
            continue;
        }
        let side = w as f64 * h;
        let fits = all && dmin >= sqrt_n * side * (1.0 - GRID_EPS);
        if fits || level == 0 {
            let half = (w as f64 - 1.0) / 2.0;
            let cx = grid.axis_coord(c0 as i64) + half * h;
            let cy = if grid.dim() == 1 { 0.0 } else { grid.axis_coord(r0 as i64) + half * h };
            out.push(WhitneyCube {
                generation: (root - level) as usize,
                level,
                origin: (c0, r0),
                center: [cx, cy],
                side,
                dist_to_complement: dmin,
                set_id,
                resolution_loss: !fits,
            });
            continue;
        }
        let half = w / 2;
        if grid.dim() == 1 {
            stack.push((level - 1, c0, 0));
            stack.push((level - 1, c0 + half, 0));
        } else {
            for (dc, dr) in [(0, 0), (half, 0), (0, half), (half, half)] {
                stack.push((level - 1, c0 + dc, r0 + dr));
            }
        }
    }
    out.sort_by(|a, b| {
        a.generation
            .cmp(&b.generation)
            .then(a.center[0].total_cmp(&b.center[0]))
            .then(a.center[1].total_cmp(&b.center[1]))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_cubes_accumulate_at_both_ends() {
        let grid = SpatialGrid::new(1, 2.0, 256).unwrap();
        let set: Vec<bool> = grid.centers().iter().map(|c| c[0] > 0.0 && c[0] < 1.0).collect();
        let cubes = whitney_decomposition(&grid, &set, 0);
        let mut covered = vec![0u32; grid.len()];
        for q in &cubes {
            assert!(!q.resolution_loss);
            assert!(q.dist_to_complement >= q.side - 1e-12);
            assert!(q.dist_to_complement <= 4.0 * q.side + 1e-12);
            for i in q.cells(&grid) {
                covered[i] += 1;
            }
        }
        for i in 0..grid.len() {
            assert_eq!(covered[i], set[i] as u32);
        }
        // smallest cubes touch both endpoints
        let smallest = cubes.iter().map(|q| q.level).min().unwrap();
        let ends: Vec<f64> = cubes.iter().filter(|q| q.level == smallest).map(|q| q.center[0]).collect();
        assert!(ends.iter().any(|&c| c < 0.1) && ends.iter().any(|&c| c > 0.9));
    }

    #[test]
    fn empty_set_has_no_cubes() {
        let grid = SpatialGrid::new(2, 1.0, 8).unwrap();
        assert!(whitney_decomposition(&grid, &[false; 64], 0).is_empty());
    }
}
