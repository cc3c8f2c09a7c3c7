//! Constructive atomic decomposition of tent functions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{area_functional, tent_norm_p, tent_norm_phi, TentFunction};
use crate::growth::GrowthFunction;
use crate::halfspace::{distance_to_complement, gamma_density_complement, whitney_decomposition, Ball, HalfSpaceGrid, WhitneyCube};
use crate::norms::{lambda_functional, BallNorms};
use crate::weights::MaximalPolicy;

/// Whitney balls have radius `11/2 √n ℓ(Q)`.
pub const WHITNEY_BALL_FACTOR: f64 = 5.5;

/// One atom `a_{k,j}` stored on its region `A_{k,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TentAtom {
    pub k: i32,
    pub j: usize,
    pub cube: WhitneyCube,
    pub ball: Ball,
    pub lambda: f64,
    /// `‖χ_B‖_{L^φ}`.
    pub char_norm: f64,
    /// Node indices of `A_{k,j}` where `f` is nonzero, ascending.
    pub nodes: Vec<usize>,
    /// `a` at those nodes.
    pub values: Vec<f64>,
}

impl TentAtom {
    pub fn to_tent(&self, grid: &HalfSpaceGrid) -> TentFunction {
        let mut g = TentFunction::zeros(grid);
        let v = g.values_mut();
        for (n, a) in self.nodes.iter().zip(&self.values) {
            v[*n] = *a;
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    /// Atoms in canonical order: `k` descending, then Whitney order.
    pub atoms: Vec<TentAtom>,
    pub lambda_value: f64,
    pub input_norm: f64,
    /// `max |f - Σ λ_j a_j|` over the nodes.
    pub reconstruction_residual: f64,
    pub implied_constant: f64,
    pub gamma: f64,
    /// `(k_min, k_max)`; `None` for the zero function.
    pub k_range: Option<(i32, i32)>,
    /// Nodes where `f != 0` but no region `A_{k,j}` applies.
    pub residual_nodes: Vec<usize>,
    /// Whitney cubes emitted below grid resolution.
    pub resolution_loss_cubes: usize,
}

impl DecompositionReport {
    pub fn has_residual(&self) -> bool {
        !self.residual_nodes.is_empty()
    }

    /// `Σ λ_j a_j` over the first `count` atoms.
    pub fn partial_sum(&self, grid: &HalfSpaceGrid, count: usize) -> TentFunction {
        let mut g = TentFunction::zeros(grid);
        let v = g.values_mut();
        for atom in self.atoms.iter().take(count) {
            for (n, a) in atom.nodes.iter().zip(&atom.values) {
                v[*n] += atom.lambda * a;
            }
        }
        g
    }
}

/// Decomposes `f` into tent atoms following the level-set / Whitney
/// construction, with `O*_k = {M(χ_{O_k}) > 1 - γ}`.
pub fn decompose(f: &TentFunction, phi: &GrowthFunction, gamma: f64, policy: MaximalPolicy) -> Result<DecompositionReport> {
    let hs = f.grid();
    let base = hs.base();
    if phi.dim() != base.dim() {
        return Err(Error::GridMismatch("growth function and grid dimensions differ".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Input(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if f.is_zero() {
        return Ok(DecompositionReport {
            atoms: Vec::new(),
            lambda_value: 0.0,
            input_norm: 0.0,
            reconstruction_residual: 0.0,
            implied_constant: f64::NAN,
            gamma,
            k_range: None,
            residual_nodes: Vec::new(),
            resolution_loss_cubes: 0,
        });
    }
    let area = area_functional(f, 1.0);
    let min_pos = area.iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let max = area.iter().cloned().fold(0.0, f64::max);
    let mut k_min = min_pos.log2().floor() as i32;
    if 2f64.powi(k_min) >= min_pos {
        k_min -= 1;
    }
    let k_max = max.log2().ceil() as i32;
    let ks: Vec<i32> = (k_min..k_max).collect();

    // O*_k, its distance transform and its Whitney cubes, per level
    let levels: Vec<(Vec<bool>, Vec<f64>, Vec<WhitneyCube>)> = ks
        .par_iter()
        .map(|&k| {
            let thr = 2f64.powi(k);
            let o: Vec<bool> = area.iter().map(|v| *v > thr).collect();
            let star = gamma_density_complement(base, &o, gamma, policy)?;
            let dist = distance_to_complement(base, &star);
            let cubes = whitney_decomposition(base, &star, (k - k_min) as usize);
            Ok((star, dist, cubes))
        })
        .collect::<Result<_>>()?;

    // cube index of each cell, per level
    let cube_of: Vec<Vec<usize>> = levels
        .iter()
        .map(|(_, _, cubes)| {
            let mut map = vec![usize::MAX; base.len()];
            for (j, q) in cubes.iter().enumerate() {
                for c in q.cells(base) {
                    map[c] = j;
                }
            }
            map
        })
        .collect();

    let sqrt_n = (base.dim() as f64).sqrt();
    let balls: Vec<Vec<Ball>> = levels
        .iter()
        .map(|(_, _, cubes)| cubes.iter().map(|q| Ball::new(q.center, WHITNEY_BALL_FACTOR * sqrt_n * q.side)).collect())
        .collect();

    // assign every nonzero node to (k, j)
    let mut members: Vec<Vec<Vec<usize>>> = levels.iter().map(|(_, _, c)| vec![Vec::new(); c.len()]).collect();
    let mut residual_nodes = Vec::new();
    for (node, &v) in f.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (y, m) = hs.split(node);
        let t = hs.t(m);
        let yc = base.center(y);
        // largest k whose tent contains (y, t)
        let level = (0..ks.len()).rev().find(|&li| levels[li].1[y] >= t * (1.0 - 1e-9));
        let placed = level.and_then(|li| {
            let j = cube_of[li][y];
            if j == usize::MAX || !balls[li][j].tent_contains(&yc, t) {
                None
            } else {
                Some((li, j))
            }
        });
        match placed {
            Some((li, j)) => members[li][j].push(node),
            None => residual_nodes.push(node),
        }
    }

    let norms = BallNorms::new(phi, base);
    let mut atoms = Vec::new();
    for li in (0..ks.len()).rev() {
        let k = ks[li];
        for (j, nodes) in members[li].iter().enumerate() {
            if nodes.is_empty() {
                continue;
            }
            let ball = balls[li][j];
            let char_norm = norms.char_norm(&ball)?;
            let scale = 2f64.powi(-k) / char_norm;
            atoms.push(TentAtom {
                k,
                j,
                cube: levels[li].2[j].clone(),
                ball,
                lambda: 2f64.powi(k) * char_norm,
                char_norm,
                nodes: nodes.clone(),
                values: nodes.iter().map(|&n| scale * f.values()[n]).collect(),
            });
        }
    }

    let recon = {
        let mut acc = vec![0.0; hs.node_count()];
        for a in &atoms {
            for (n, v) in a.nodes.iter().zip(&a.values) {
                acc[*n] += a.lambda * v;
            }
        }
        acc
    };
    let reconstruction_residual = f.values().iter().zip(&recon).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let terms: Vec<(f64, Ball)> = atoms.iter().map(|a| (a.lambda, a.ball)).collect();
    let lambda_value = lambda_functional(&terms, &norms)?;
    let input_norm = tent_norm_phi(f, phi)?;
    let resolution_loss_cubes = levels.iter().flat_map(|l| l.2.iter()).filter(|q| q.resolution_loss).count();
    Ok(DecompositionReport {
        atoms,
        lambda_value,
        input_norm,
        reconstruction_residual,
        implied_constant: lambda_value / input_norm,
        gamma,
        k_range: Some((k_min, k_max)),
        residual_nodes,
        resolution_loss_cubes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomValidation {
    pub support_ok: bool,
    /// Nonzero nodes outside the tent over the ball.
    pub outside_nodes: Vec<usize>,
    /// `(p, ‖a‖_{T^p_2}, |B|^{1/p} ‖χ_B‖^{-1}, margin)`.
    pub sizes: Vec<(f64, f64, f64, f64)>,
}

impl AtomValidation {
    pub fn max_margin(&self) -> f64 {
        self.sizes.iter().map(|s| s.3).fold(0.0, f64::max)
    }

    pub fn passes(&self, margin_cap: f64) -> bool {
        self.support_ok && self.max_margin() <= margin_cap
    }
}

/// Checks `supp a ⊂ B̂` and reports the size margins
/// `‖a‖_{T^p_2} / (|B|^{1/p} ‖χ_B‖^{-1}_{L^φ})` for each `p`.
pub fn validate_tent_atom(a: &TentFunction, ball: &Ball, norms: &BallNorms, p_list: &[f64]) -> Result<AtomValidation> {
    let hs = a.grid();
    let base = hs.base();
    let mut outside_nodes = Vec::new();
    for (node, v) in a.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let (y, m) = hs.split(node);
        if !ball.tent_contains(&base.center(y), hs.t(m)) {
            outside_nodes.push(node);
        }
    }
    let measure = base.ball_cells(ball).len() as f64 * base.cell_measure();
    let char_norm = norms.char_norm(ball)?;
    let sizes = p_list
        .iter()
        .map(|&p| {
            let size = tent_norm_p(a, p)?;
            let bound = measure.powf(1.0 / p) / char_norm;
            Ok((p, size, bound, size / bound))
        })
        .collect::<Result<_>>()?;
    Ok(AtomValidation { support_ok: outside_nodes.is_empty(), outside_nodes, sizes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    /// Number of leading atoms summed.
    pub counts: Vec<usize>,
    pub tphi_tails: Vec<f64>,
    pub tp_tails: Vec<f64>,
    pub p: f64,
    pub monotone: bool,
}

/// `‖f - Σ_{first N} λ_j a_j‖` in `T_φ` and `T^p_2` for `N = 0..=#atoms`.
pub fn convergence_check(f: &TentFunction, report: &DecompositionReport, phi: &GrowthFunction, p: f64) -> Result<TailProfile> {
    let hs = f.grid();
    let counts: Vec<usize> = (0..=report.atoms.len()).collect();
    let tails: Vec<(f64, f64)> = counts
        .par_iter()
        .map(|&n| {
            let partial = report.partial_sum(hs, n);
            let rest = f.add_scaled(&partial, -1.0)?;
            Ok((tent_norm_phi(&rest, phi)?, tent_norm_p(&rest, p)?))
        })
        .collect::<Result<_>>()?;
    let tphi_tails: Vec<f64> = tails.iter().map(|t| t.0).collect();
    let tp_tails: Vec<f64> = tails.iter().map(|t| t.1).collect();
    let slack = |w: &[f64]| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300;
    let monotone = tphi_tails.windows(2).all(slack) && tp_tails.windows(2).all(slack);
    Ok(TailProfile { counts, tphi_tails, tp_tails, p, monotone })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionRecord {
    pub t22_norm: f64,
    pub tphi_norm: f64,
    /// `‖f‖_{T^2_2} / ‖f‖_{T_φ}`; `None` when `f = 0`.
    pub ratio: Option<f64>,
}

/// Records `‖f‖_{T^2_2}` and its ratio to `‖f‖_{T_φ}` for compactly supported `f`.
pub fn inclusion_check(f: &TentFunction, phi: &GrowthFunction) -> Result<InclusionRecord> {
    let t22_norm = tent_norm_p(f, 2.0)?;
    let tphi_norm = tent_norm_phi(f, phi)?;
    let ratio = if tphi_norm > 0.0 { Some(t22_norm / tphi_norm) } else { None };
    Ok(InclusionRecord { t22_norm, tphi_norm, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfspace::SpatialGrid;

    fn hs() -> HalfSpaceGrid {
        let base = SpatialGrid::new(1, 4.0, 256).unwrap();
        HalfSpaceGrid::new(base, 1.0 / 16.0, 2f64.powf(0.25), 12).unwrap()
    }

    fn bump(hs: &HalfSpaceGrid) -> TentFunction {
        TentFunction::from_fn(hs, |y, t| {
            if y[0].abs() < 1.0 && t < 0.3 {
                (1.0 - y[0] * y[0]) * (1.0 + 3.0 * t) * (5.0 * y[0]).cos()
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_function_has_no_atoms() {
        let r = decompose(&TentFunction::zeros(&hs()), &GrowthFunction::identity(1), 0.5, MaximalPolicy::AllWindows).unwrap();
        assert!(r.atoms.is_empty());
        assert_eq!(r.lambda_value, 0.0);
    }

    #[test]
    fn bump_reconstructs_and_partitions() {
        let g = hs();
        let f = bump(&g);
        let phi = GrowthFunction::identity(1);
        let r = decompose(&f, &phi, 0.5, MaximalPolicy::AllWindows).unwrap();
        assert!(!r.has_residual());
        assert!(r.reconstruction_residual <= 1e-12 * f.max_abs());
        let mut seen = vec![false; g.node_count()];
        for a in &r.atoms {
            for n in &a.nodes {
                assert!(!seen[*n]);
                seen[*n] = true;
            }
        }
        assert!(r.implied_constant.is_finite());
        for w in r.atoms.windows(2) {
            assert!(w[0].k > w[1].k || (w[0].k == w[1].k && w[0].j < w[1].j));
        }
    }

    #[test]
    fn single_node_atom_has_margin_one_at_p2() {
        let g = hs();
        let base = g.base().clone();
        let phi = GrowthFunction::identity(1);
        let norms = BallNorms::new(&phi, &base);
        let ball = Ball::new(base.center(128), 1.0);
        let (y0, m0) = (130, 3);
        let mut unit = TentFunction::zeros(&g);
        unit.values_mut()[g.node(y0, m0)] = 1.0;
        let n2 = tent_norm_p(&unit, 2.0).unwrap();
        let measure = base.ball_cells(&ball).len() as f64 * base.cell_measure();
        let c = measure.sqrt() / norms.char_norm(&ball).unwrap() / n2;
        let v = validate_tent_atom(&unit.scaled(c), &ball, &norms, &[2.0]).unwrap();
        assert!(v.support_ok);
        assert!((v.sizes[0].3 - 1.0).abs() < 1e-12);
        let mut far = TentFunction::zeros(&g);
        far.values_mut()[g.node(10, 0)] = 1.0;
        assert!(!validate_tent_atom(&far, &ball, &norms, &[2.0]).unwrap().support_ok);
    }
}
