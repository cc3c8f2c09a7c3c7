//! Luxembourg quasi-norms, ball-localized `L^q_φ(B)` norms, and the `Λ`
//! coefficient functional.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::halfspace::{Ball, SpatialGrid};
use crate::numeric::{infimum_level, pairwise_sum, pairwise_sum_by};

type BallKey = (u64, u64, u64);

/// Relative tolerance of every bisection in this module.
pub const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LuxembourgResult {
    pub norm: f64,
    /// `∫ φ(x, |f|/norm) dx`; `None` for the zero function.
    pub modular_at_norm: Option<f64>,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// `∫ φ(x, |f(x)| / λ) dx` as a cell-weighted sum.
pub fn modular(phi: &GrowthFunction, grid: &SpatialGrid, f: &[f64], lambda: f64) -> f64 {
    let centers = grid.centers();
    pairwise_sum_by(f.len(), |i| phi.value(&centers[i], f[i].abs() / lambda)) * grid.cell_measure()
}

fn check_samples(grid: &SpatialGrid, f: &[f64]) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", f.len(), grid.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("function samples must be finite".into()));
    }
    Ok(())
}

/// `‖f‖_{L^φ} = inf{λ > 0 : ∫ φ(x, |f|/λ) dx <= 1}` by bisection on `λ`.
pub fn luxembourg_norm(phi: &GrowthFunction, grid: &SpatialGrid, f: &[f64]) -> Result<LuxembourgResult> {
    check_samples(grid, f)?;
    let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    if support.is_empty() {
        return Ok(LuxembourgResult { norm: 0.0, modular_at_norm: None, bracket: (0.0, 0.0), iterations: 0 });
    }
    let pts: Vec<_> = support.iter().map(|&i| grid.center(i)).collect();
    let vals: Vec<f64> = support.iter().map(|&i| f[i].abs()).collect();
    let w = grid.cell_measure();
    let g = |lambda: f64| pairwise_sum_by(vals.len(), |k| phi.value(&pts[k], vals[k] / lambda)) * w;
    let r = infimum_level(g, BISECTION_TOL);
    Ok(LuxembourgResult { norm: r.root, modular_at_norm: Some(g(r.root)), bracket: (r.lo, r.hi), iterations: r.iterations })
}

/// Per-ball quantities `‖χ_B‖_{L^φ}` and `φ(B, t)`, cached by ball.
pub struct BallNorms<'a> {
    phi: &'a GrowthFunction,
    grid: &'a SpatialGrid,
    cache: Mutex<HashMap<BallKey, (f64, f64)>>,
}

impl<'a> BallNorms<'a> {
    pub fn new(phi: &'a GrowthFunction, grid: &'a SpatialGrid) -> Self {
        BallNorms { phi, grid, cache: Mutex::new(HashMap::new()) }
    }

    pub fn phi(&self) -> &GrowthFunction {
        self.phi
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.grid
    }

    fn key(b: &Ball) -> BallKey {
        (b.center[0].to_bits(), b.center[1].to_bits(), b.radius.to_bits())
    }

    /// `(‖χ_B‖_{L^φ}, ∫_B w)`; the second entry is only meaningful for product forms.
    fn entry(&self, b: &Ball) -> Result<(f64, f64)> {
        if let Some(v) = self.cache.lock().unwrap().get(&Self::key(b)) {
            return Ok(*v);
        }
        let cells = self.grid.ball_cells(b);
        if cells.is_empty() {
            return Err(Error::Precondition(format!("ball {b:?} contains no grid cell")));
        }
        let mut chi = vec![0.0; self.grid.len()];
        for &i in &cells {
            chi[i] = 1.0;
        }
        let norm = luxembourg_norm(self.phi, self.grid, &chi)?.norm;
        let wsum = match self.phi.product_parts() {
            Some((w, _)) => {
                let vals: Vec<f64> = cells.iter().map(|&i| w.at(&self.grid.center(i))).collect();
                pairwise_sum(&vals) * self.grid.cell_measure()
            }
            None => f64::NAN,
        };
        if !(norm > 0.0) {
            return Err(Error::Precondition(format!("‖χ_B‖ vanishes for ball {b:?}")));
        }
        self.cache.lock().unwrap().insert(Self::key(b), (norm, wsum));
        Ok((norm, wsum))
    }

    pub fn char_norm(&self, b: &Ball) -> Result<f64> {
        Ok(self.entry(b)?.0)
    }

    /// `φ(B, t) = ∫_B φ(x, t) dx` over the in-domain cells of `B`.
    pub fn phi_ball(&self, b: &Ball, t: f64) -> Result<f64> {
        if let Some((_, o)) = self.phi.product_parts() {
            let (_, wsum) = self.entry(b)?;
            return Ok(wsum * o.at(t));
        }
        let cells = self.grid.ball_cells(b);
        Ok(pairwise_sum_by(cells.len(), |k| self.phi.value(&self.grid.center(cells[k]), t)) * self.grid.cell_measure())
    }
}

/// `Λ({λ_j, B_j}) = inf{λ > 0 : Σ_j φ(B_j, |λ_j| / (λ ‖χ_{B_j}‖)) <= 1}`.
pub fn lambda_functional(terms: &[(f64, Ball)], norms: &BallNorms) -> Result<f64> {
    let live: Vec<(f64, Ball)> = terms.iter().filter(|(c, _)| *c != 0.0).cloned().collect();
    if live.is_empty() {
        return Ok(0.0);
    }
    if live.iter().any(|(c, _)| !c.is_finite()) {
        return Err(Error::Input("coefficients must be finite".into()));
    }
    let scaled: Vec<(f64, Ball)> = live
        .iter()
        .map(|(c, b)| Ok((c.abs() / norms.char_norm(b)?, *b)))
        .collect::<Result<_>>()?;
    let g = |lambda: f64| -> f64 {
        let parts: Vec<f64> = scaled
            .par_iter()
            .map(|(s, b)| norms.phi_ball(b, s / lambda).unwrap_or(f64::INFINITY))
            .collect();
        pairwise_sum(&parts)
    };
    Ok(infimum_level(g, BISECTION_TOL).root)
}

/// `‖f‖_{L^q_φ(B)}`: for finite `q` the sup over `t_levels` of
/// `(φ(B,t)^{-1} ∫ |f|^q φ(·,t))^{1/q}`, for `q = ∞` the max of `|f|` on `B`.
pub fn lq_phi_ball_norm(
    phi: &GrowthFunction,
    grid: &SpatialGrid,
    f: &[f64],
    ball: &Ball,
    q: f64,
    t_levels: &[f64],
) -> Result<f64> {
    check_samples(grid, f)?;
    if !(q >= 1.0) {
        return Err(Error::Input(format!("q must be at least 1, got {q}")));
    }
    let cells = grid.ball_cells(ball);
    let mut inside = vec![false; grid.len()];
    for &i in &cells {
        inside[i] = true;
    }
    if (0..f.len()).any(|i| !inside[i] && f[i] != 0.0) {
        return Err(Error::Precondition("function is not supported in the ball".into()));
    }
    if cells.is_empty() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(cells.iter().map(|&i| f[i].abs()).fold(0.0, f64::max));
    }
    let levels: Vec<f64> = if phi.product_parts().is_some() { vec![1.0] } else { t_levels.to_vec() };
    if levels.is_empty() {
        return Err(Error::Input("t grid is empty".into()));
    }
    let centers: Vec<_> = cells.iter().map(|&i| grid.center(i)).collect();
    let fq: Vec<f64> = cells.iter().map(|&i| f[i].abs().powf(q)).collect();
    let mut best: f64 = 0.0;
    for t in levels {
        let w: Vec<f64> = centers.iter().map(|x| phi.value(x, t)).collect();
        let num = pairwise_sum_by(w.len(), |k| fq[k] * w[k]);
        let den = pairwise_sum(&w);
        if den > 0.0 {
            best = best.max((num / den).powf(1.0 / q));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(1, 4.0, 256).unwrap()
    }

    #[test]
    fn half_power_norm_of_indicator() {
        let g = grid();
        let phi = GrowthFunction::power(1, 0.5).unwrap();
        let f = g.sample(|x| if x[0] > 0.0 && x[0] < 2.0 { 1.0 } else { 0.0 });
        let r = luxembourg_norm(&phi, &g, &f).unwrap();
        assert!((r.norm - 4.0).abs() < 1e-9);
        assert!((r.modular_at_norm.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let g = grid();
        let r = luxembourg_norm(&GrowthFunction::identity(1), &g, &vec![0.0; g.len()]).unwrap();
        assert_eq!(r.norm, 0.0);
        assert!(r.modular_at_norm.is_none());
        let bad = vec![f64::NAN; g.len()];
        assert!(luxembourg_norm(&GrowthFunction::identity(1), &g, &bad).is_err());
    }

    #[test]
    fn lambda_is_l1_for_identity() {
        let g = grid();
        let phi = GrowthFunction::identity(1);
        let norms = BallNorms::new(&phi, &g);
        let terms = vec![(2.0, Ball::interval(0.0, 1.0)), (-0.5, Ball::interval(1.0, 0.25)), (3.0, Ball::interval(-2.0, 0.5))];
        let l = lambda_functional(&terms, &norms).unwrap();
        assert!((l - 5.5).abs() < 1e-10);
        assert_eq!(lambda_functional(&[], &norms).unwrap(), 0.0);
    }

    #[test]
    fn single_term_lambda() {
        let g = grid();
        let phi = GrowthFunction::identity(1);
        let norms = BallNorms::new(&phi, &g);
        let b = Ball::interval(0.015625, 1.0);
        let c = 0.7;
        let lam = norms.char_norm(&b).unwrap() * c;
        let size = g.ball_cells(&b).len() as f64 * g.cell_measure();
        let l = lambda_functional(&[(lam, b)], &norms).unwrap();
        assert!((l - c * size).abs() < 1e-10 * l);
    }

    #[test]
    fn lq_norm_of_indicator_is_one() {
        let g = grid();
        let phi = GrowthFunction::log_family(1, 0.5, 1.0, 0.5).unwrap();
        let b = Ball::interval(0.5, 1.0);
        let f: Vec<f64> = g.sample(|x| if b.contains(x) { 1.0 } else { 0.0 });
        let ts = [0.01, 1.0, 100.0];
        for q in [1.0, 2.0, 3.5] {
            assert!((lq_phi_ball_norm(&phi, &g, &f, &b, q, &ts).unwrap() - 1.0).abs() < 1e-12);
        }
        let outside = g.sample(|x| if x[0] > 3.0 { 1.0 } else { 0.0 });
        assert!(matches!(lq_phi_ball_norm(&phi, &g, &outside, &b, 2.0, &ts), Err(Error::Precondition(_))));
    }
}
