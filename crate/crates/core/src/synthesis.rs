//! The synthesis operator `π_φ`, the Calderón reproducing formula, molecules,
//! the molecule-to-atom projection and the molecular pipeline.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::functionals::{lp_norm, lusin_area, wavelet_transform, AdmissibleWavelet, TentFunction};
use crate::growth::GrowthFunction;
use crate::halfspace::{distance, Ball, HalfSpaceGrid, SpatialGrid, GRID_EPS};
use crate::norms::{lambda_functional, luxembourg_norm, BallNorms};
use crate::numeric::pairwise_sum;
use crate::tent_atoms::{decompose, DecompositionReport};
use crate::weights::MaximalPolicy;

fn check_grid(w: &AdmissibleWavelet, hs: &HalfSpaceGrid) -> Result<()> {
    if w.grid() != hs.base() {
        return Err(Error::GridMismatch("wavelet and half-space grid use different spatial grids".into()));
    }
    Ok(())
}

/// `Σ_{m ∈ levels} (F(·, t_m) * φ_{t_m}) ln ρ`, skipping identically zero levels.
fn synthesize_levels(f: &TentFunction, w: &AdmissibleWavelet, levels: &[usize]) -> Result<Vec<f64>> {
    let hs = f.grid();
    check_grid(w, hs)?;
    let sp = Spectral::new(hs.base());
    let radii = sp.radial_frequencies();
    let live: Vec<usize> = levels.iter().cloned().filter(|&m| f.level(m).iter().any(|v| *v != 0.0)).collect();
    let spectra: Vec<Vec<Complex64>> = live
        .par_iter()
        .map(|&m| {
            let t = hs.t(m);
            let mut s = sp.forward(f.level(m))?;
            for (v, r) in s.iter_mut().zip(&radii) {
                *v *= w.hat(t * r);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![Complex64::new(0.0, 0.0); radii.len()];
    for s in &spectra {
        for (a, v) in acc.iter_mut().zip(s) {
            *a += v;
        }
    }
    let ones = vec![hs.log_ratio(); radii.len()];
    Ok(sp.apply(&acc, &ones))
}

/// `π_φ(F) = Σ_m (F(·, t_m) * φ_{t_m}) ln ρ`.
pub fn pi_phi(f: &TentFunction, w: &AdmissibleWavelet) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..f.grid().levels()).collect();
    synthesize_levels(f, w, &all)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalderonResult {
    pub reconstruction: Vec<f64>,
    /// `‖f - Σ φ_t * φ_t * f ln ρ‖_2 / ‖f‖_2` (0 for `f = 0`).
    pub residual: f64,
    pub levels_used: usize,
}

/// Truncated Calderón sum over the levels `t_m ∈ [δ, T]`.
pub fn calderon_reproduce(f: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid, range: (f64, f64)) -> Result<CalderonResult> {
    let levels: Vec<usize> = (0..hs.levels())
        .filter(|&m| {
            let t = hs.t(m);
            t >= range.0 * (1.0 - 1e-12) && t <= range.1 * (1.0 + 1e-12)
        })
        .collect();
    if levels.is_empty() {
        return Err(Error::Input(format!("no level lies in [{}, {}]", range.0, range.1)));
    }
    let transform = wavelet_transform(f, w, hs)?;
    let reconstruction = synthesize_levels(&transform, w, &levels)?;
    let grid = hs.base();
    let norm = lp_norm(grid, f, 2.0);
    let diff: Vec<f64> = f.iter().zip(&reconstruction).map(|(a, b)| a - b).collect();
    let residual = if norm > 0.0 { lp_norm(grid, &diff, 2.0) / norm } else { 0.0 };
    Ok(CalderonResult { reconstruction, residual, levels_used: levels.len() })
}

/// Cells of `U_0 = B` and `U_j = 2^j B \ 2^{j-1} B`, until every cell is covered.
pub fn annuli(grid: &SpatialGrid, ball: &Ball) -> Vec<Vec<usize>> {
    let slack = GRID_EPS * grid.spacing();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..grid.len() {
        let d = distance(&grid.center(i), &ball.center);
        let mut j = 0;
        while d >= ball.radius * 2f64.powi(j as i32) - slack {
            j += 1;
        }
        if out.len() <= j {
            out.resize(j + 1, Vec::new());
        }
        out[j].push(i);
    }
    out
}

/// Multi-indices `β` with `|β| <= s`, graded.
pub fn multi_indices(dim: usize, s: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for total in 0..=s {
        for a in (0..=total).rev() {
            let b = total - a;
            if dim == 1 && b > 0 {
                continue;
            }
            v.push((a, b));
        }
    }
    v
}

/// Centered monomial `((x - c) / r)^β`.
fn monomial(x: &[f64; 2], ball: &Ball, beta: (usize, usize)) -> f64 {
    let u = (x[0] - ball.center[0]) / ball.radius;
    let v = (x[1] - ball.center[1]) / ball.radius;
    u.powi(beta.0 as i32) * v.powi(beta.1 as i32)
}

/// `|∫ α m_β| / ∫ |α| |m_β|` for each `|β| <= s`, `m_β` centered at the ball.
pub fn normalized_moments(grid: &SpatialGrid, alpha: &[f64], ball: &Ball, s: usize) -> Vec<((usize, usize), f64)> {
    let centers = grid.centers();
    multi_indices(grid.dim(), s)
        .into_iter()
        .map(|beta| {
            let signed: Vec<f64> = centers.iter().zip(alpha).map(|(x, a)| a * monomial(x, ball, beta)).collect();
            let abs: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
            let den = pairwise_sum(&abs);
            let r = if den > 0.0 { pairwise_sum(&signed).abs() / den } else { 0.0 };
            (beta, r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub samples: Vec<f64>,
    pub ball: Ball,
    pub q: f64,
    pub s: usize,
    pub epsilon: f64,
    pub annular_norms: Vec<f64>,
    /// `2^{-jε} |2^j B|^{1/q} ‖χ_B‖^{-1}`.
    pub annular_bounds: Vec<f64>,
    pub margins: Vec<f64>,
    pub moment_residuals: Vec<((usize, usize), f64)>,
}

impl Molecule {
    pub fn max_margin(&self) -> f64 {
        self.margins.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_moment_residual(&self) -> f64 {
        self.moment_residuals.iter().map(|m| m.1).fold(0.0, f64::max)
    }

    pub fn passes(&self, margin_cap: f64, moment_tol: f64) -> bool {
        self.max_margin() <= margin_cap && self.max_moment_residual() <= moment_tol
    }
}

/// Default molecule decay `ε = n + n (q0/p0 - 1) + 1/2`.
pub fn default_epsilon(dim: usize, q0: f64, p0: f64) -> f64 {
    dim as f64 * (1.0 + q0 / p0 - 1.0) + 0.5
}

/// Annular `L^q` norms against the molecule bound, plus normalized moments.
pub fn validate_molecule(alpha: &[f64], ball: &Ball, q: f64, s: usize, epsilon: f64, norms: &BallNorms) -> Result<Molecule> {
    let grid = norms.grid();
    if alpha.len() != grid.len() {
        return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", alpha.len(), grid.len())));
    }
    if !(q >= 1.0) {
        return Err(Error::Input(format!("q must be at least 1, got {q}")));
    }
    let char_norm = norms.char_norm(ball)?;
    let rings = annuli(grid, ball);
    let mut annular_norms = Vec::with_capacity(rings.len());
    let mut annular_bounds = Vec::with_capacity(rings.len());
    for (j, cells) in rings.iter().enumerate() {
        let norm = if q.is_infinite() {
            cells.iter().map(|&i| alpha[i].abs()).fold(0.0, f64::max)
        } else {
            let terms: Vec<f64> = cells.iter().map(|&i| alpha[i].abs().powf(q)).collect();
            (pairwise_sum(&terms) * grid.cell_measure()).powf(1.0 / q)
        };
        let measure = grid.ball_measure(&ball.dilate(2f64.powi(j as i32)));
        let bound = 2f64.powf(-(j as f64) * epsilon) * measure.powf(if q.is_infinite() { 0.0 } else { 1.0 / q }) / char_norm;
        annular_norms.push(norm);
        annular_bounds.push(bound);
    }
    let margins = annular_norms.iter().zip(&annular_bounds).map(|(n, b)| n / b).collect();
    Ok(Molecule {
        samples: alpha.to_vec(),
        ball: *ball,
        q,
        s,
        epsilon,
        annular_norms,
        annular_bounds,
        margins,
        moment_residuals: normalized_moments(grid, alpha, ball, s),
    })
}

/// Pieces of the molecule-to-atom projection, all as grid functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPieces {
    pub indices: Vec<(usize, usize)>,
    /// Cells of each annulus `U_k`; a clipped outer sliver is merged inward.
    pub annuli: Vec<Vec<usize>>,
    /// `α_k - P_k`.
    pub atom_parts: Vec<Vec<f64>>,
    /// `P_k`.
    pub polynomials: Vec<Vec<f64>>,
    /// `Q_{β,k}` for each `k`, in `indices` order.
    pub dual_basis: Vec<Vec<Vec<f64>>>,
    /// `N^j_ℓ` for `j = 0..=K+1` (the last row is zero).
    pub tails: Vec<Vec<f64>>,
    /// `b^k_ℓ = N^{k+1}_ℓ (Q_{ℓ,k+1}/|U_{k+1}| - Q_{ℓ,k}/|U_k|)`, indexed `[k][ℓ]`.
    pub telescoped: Vec<Vec<Vec<f64>>>,
    /// `Σ_ℓ N^0_ℓ Q_{ℓ,0}/|U_0|`, zero for a molecule with vanishing moments.
    pub defect: Vec<f64>,
    /// Max over `k, β` of the relative moment of `α_k - P_k`.
    pub moment_residual: f64,
    /// Max over `k, γ, β` of `|∫ m_γ Q_{β,k} - |U_k| δ_{γβ}| / |U_k|`.
    pub dual_residual: f64,
    /// Max over `k, ℓ, γ` of the relative moment of `b^k_ℓ`.
    pub telescoped_moment_residual: f64,
    /// `max |Σ_k (α_k - P_k) + Σ b^k_ℓ + defect - α| / max |α|`.
    pub reassembly_residual: f64,
}

/// Splits `α` along the annuli of `B` into moment-free pieces.
///
/// Monomials are `m_β = ((x - c)/r)^β`; the Gram matrix of annulus `k` is
/// solved with columns scaled by `2^{k|β|}`.
pub fn molecule_to_atoms(alpha: &[f64], grid: &SpatialGrid, ball: &Ball, s: usize) -> Result<ProjectionPieces> {
    if alpha.len() != grid.len() {
        return Err(Error::GridMismatch(format!("function has {} samples, grid has {}", alpha.len(), grid.len())));
    }
    if s > 2 {
        return Err(Error::Input(format!("moment order {s} is not supported (0, 1 or 2)")));
    }
    let indices = multi_indices(grid.dim(), s);
    let nb = indices.len();
    let mut rings = annuli(grid, ball);
    // the domain clips the outermost annulus; once it holds fewer cells than
    // its inner neighbour it is a thin shell with an ill-conditioned Gram
    // system, so it joins that neighbour
    while rings.len() > 1 && {
        let k = rings.len();
        rings[k - 1].len() < (2 * nb).max(rings[k - 2].len())
    } {
        let last = rings.pop().unwrap();
        rings.last_mut().unwrap().extend(last);
    }
    let centers = grid.centers();
    let h = grid.cell_measure();
    let n = grid.len();
    let mono: Vec<Vec<f64>> = indices.iter().map(|&b| centers.iter().map(|x| monomial(x, ball, b)).collect()).collect();

    let mut dual_basis = Vec::with_capacity(rings.len());
    let mut moments_k = Vec::with_capacity(rings.len()); // M_k^ℓ = ∫_{U_k} α m_ℓ
    let mut measures = Vec::with_capacity(rings.len());
    let mut dual_residual: f64 = 0.0;
    for (k, cells) in rings.iter().enumerate() {
        let measure = cells.len() as f64 * h;
        let scale: Vec<f64> = indices.iter().map(|&(a, b)| 2f64.powi(-(k as i32) * (a + b) as i32)).collect();
        let mut gram = DMatrix::<f64>::zeros(nb, nb);
        for g in 0..nb {
            for e in 0..nb {
                let v: Vec<f64> = cells.iter().map(|&i| mono[g][i] * mono[e][i] * scale[g] * scale[e]).collect();
                gram[(g, e)] = pairwise_sum(&v) * h;
            }
        }
        // Q_β = Σ_η c_{βη} m_η χ_{U_k} with ∫ m_γ Q_β = |U_k| δ_{γβ}
        let lu = gram.clone().lu();
        let diag_max = (0..nb).map(|i| gram[(i, i)].abs()).fold(0.0, f64::max);
        let mut coeffs = Vec::with_capacity(nb);
        for beta in 0..nb {
            let mut rhs = DVector::<f64>::zeros(nb);
            rhs[beta] = measure * scale[beta];
            let sol = lu.solve(&rhs).ok_or(Error::SingularGram { annulus: k })?;
            if !sol.iter().all(|v| v.is_finite()) || cells.len() < nb || !(diag_max > 0.0) {
                return Err(Error::SingularGram { annulus: k });
            }
            coeffs.push(sol.iter().zip(&scale).map(|(c, s)| c * s).collect::<Vec<f64>>());
        }
        let mut qs = Vec::with_capacity(nb);
        for beta in 0..nb {
            let mut qv = vec![0.0; n];
            for &i in cells {
                qv[i] = (0..nb).map(|e| coeffs[beta][e] * mono[e][i]).sum();
            }
            for gamma in 0..nb {
                let v: Vec<f64> = cells.iter().map(|&i| mono[gamma][i] * qv[i]).collect();
                let want = if gamma == beta { measure } else { 0.0 };
                dual_residual = dual_residual.max((pairwise_sum(&v) * h - want).abs() / measure);
            }
            qs.push(qv);
        }
        let m: Vec<f64> = (0..nb)
            .map(|l| {
                let v: Vec<f64> = cells.iter().map(|&i| alpha[i] * mono[l][i]).collect();
                pairwise_sum(&v) * h
            })
            .collect();
        dual_basis.push(qs);
        moments_k.push(m);
        measures.push(measure);
    }
    let kk = rings.len();
    let mut polynomials = Vec::with_capacity(kk);
    let mut atom_parts = Vec::with_capacity(kk);
    let mut moment_residual: f64 = 0.0;
    for k in 0..kk {
        let mut p = vec![0.0; n];
        for &i in &rings[k] {
            p[i] = (0..nb).map(|b| moments_k[k][b] / measures[k] * dual_basis[k][b][i]).sum();
        }
        let mut part = vec![0.0; n];
        for &i in &rings[k] {
            part[i] = alpha[i] - p[i];
        }
        for b in 0..nb {
            let signed: Vec<f64> = rings[k].iter().map(|&i| part[i] * mono[b][i]).collect();
            let abs: Vec<f64> = rings[k].iter().map(|&i| (alpha[i] * mono[b][i]).abs()).collect();
            let den = pairwise_sum(&abs);
            if den > 0.0 {
                moment_residual = moment_residual.max(pairwise_sum(&signed).abs() / den);
            }
        }
        polynomials.push(p);
        atom_parts.push(part);
    }
    // N^j_ℓ = Σ_{k >= j} M_k^ℓ
    let mut tails = vec![vec![0.0; nb]; kk + 1];
    for j in (0..kk).rev() {
        for l in 0..nb {
            tails[j][l] = tails[j + 1][l] + moments_k[j][l];
        }
    }
    let e = |k: usize, l: usize, i: usize| dual_basis[k][l][i] / measures[k];
    let mut telescoped = Vec::with_capacity(kk.saturating_sub(1));
    let mut telescoped_moment_residual: f64 = 0.0;
    for k in 0..kk.saturating_sub(1) {
        let mut per_l = Vec::with_capacity(nb);
        for l in 0..nb {
            let coef = tails[k + 1][l];
            let b: Vec<f64> = (0..n).map(|i| coef * (e(k + 1, l, i) - e(k, l, i))).collect();
            for g in 0..nb {
                let signed: Vec<f64> = (0..n).map(|i| b[i] * mono[g][i]).collect();
                let abs: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
                let den = pairwise_sum(&abs);
                if den > 0.0 {
                    telescoped_moment_residual = telescoped_moment_residual.max(pairwise_sum(&signed).abs() / den);
                }
            }
            per_l.push(b);
        }
        telescoped.push(per_l);
    }
    let defect: Vec<f64> = (0..n).map(|i| (0..nb).map(|l| tails[0][l] * e(0, l, i)).sum()).collect();
    let peak = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut v = defect[i];
        for part in &atom_parts {
            v += part[i];
        }
        for per_l in &telescoped {
            for b in per_l {
                v += b[i];
            }
        }
        worst = worst.max((v - alpha[i]).abs());
    }
    let reassembly_residual = if peak > 0.0 { worst / peak } else { worst };
    Ok(ProjectionPieces {
        indices,
        annuli: rings,
        atom_parts,
        polynomials,
        dual_basis,
        tails,
        telescoped,
        defect,
        moment_residual,
        dual_residual,
        telescoped_moment_residual,
        reassembly_residual,
    })
}

/// `‖S(f)‖_{L^φ}`.
pub fn hardy_s_quasinorm(f: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid, phi: &GrowthFunction) -> Result<f64> {
    let s = lusin_area(f, w, hs, 1.0)?;
    Ok(luxembourg_norm(phi, hs.base(), &s)?.norm)
}

/// Parameters of the molecular pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub gamma: f64,
    pub q: f64,
    pub s: usize,
    pub epsilon: f64,
    /// Samples of `φ_t * f` below this fraction of the max are dropped.
    pub truncation: f64,
    pub margin_cap: f64,
    pub moment_tol: f64,
    pub policy: MaximalPolicy,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            gamma: 0.5,
            q: 2.0,
            s: 1,
            epsilon: 1.5,
            truncation: 1e-9,
            margin_cap: 10.0,
            moment_tol: 1e-8,
            policy: MaximalPolicy::AllWindows,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeRow {
    pub k: i32,
    pub j: usize,
    pub lambda: f64,
    pub ball: Ball,
    pub max_margin: f64,
    pub max_moment_residual: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub molecules: Vec<MoleculeRow>,
    pub reconstruction: Vec<f64>,
    /// `‖f - Σ λ_j α_j‖_2 / ‖f‖_2`.
    pub reconstruction_error: f64,
    pub lambda_value: f64,
    pub quasi_norm: f64,
    pub ratio: f64,
    pub tent_residual_nodes: usize,
    pub tent_reconstruction_residual: f64,
}

/// `F = φ_t * f` → tent atoms → molecules `π_φ(a_j)` → `Σ λ_j α_j`.
pub fn molecular_pipeline(
    f: &[f64],
    w: &AdmissibleWavelet,
    hs: &HalfSpaceGrid,
    phi: &GrowthFunction,
    params: &PipelineParams,
) -> Result<PipelineReport> {
    check_grid(w, hs)?;
    let grid = hs.base();
    let fnorm = lp_norm(grid, f, 2.0);
    if fnorm == 0.0 {
        return Ok(PipelineReport {
            molecules: Vec::new(),
            reconstruction: vec![0.0; grid.len()],
            reconstruction_error: 0.0,
            lambda_value: 0.0,
            quasi_norm: 0.0,
            ratio: f64::NAN,
            tent_residual_nodes: 0,
            tent_reconstruction_residual: 0.0,
        });
    }
    let mut big_f = wavelet_transform(f, w, hs)?;
    let cut = params.truncation * big_f.max_abs();
    for v in big_f.values_mut() {
        if v.abs() < cut {
            *v = 0.0;
        }
    }
    let report: DecompositionReport = decompose(&big_f, phi, params.gamma, params.policy)?;
    let norms = BallNorms::new(phi, grid);
    let pieces: Vec<(Vec<f64>, MoleculeRow)> = report
        .atoms
        .par_iter()
        .map(|atom| {
            let alpha = pi_phi(&atom.to_tent(hs), w)?;
            let m = validate_molecule(&alpha, &atom.ball, params.q, params.s, params.epsilon, &norms)?;
            let row = MoleculeRow {
                k: atom.k,
                j: atom.j,
                lambda: atom.lambda,
                ball: atom.ball,
                max_margin: m.max_margin(),
                max_moment_residual: m.max_moment_residual(),
                passes: m.passes(params.margin_cap, params.moment_tol),
            };
            Ok((alpha, row))
        })
        .collect::<Result<_>>()?;
    let mut reconstruction = vec![0.0; grid.len()];
    for ((alpha, row), _) in pieces.iter().zip(&report.atoms) {
        for (r, a) in reconstruction.iter_mut().zip(alpha) {
            *r += row.lambda * a;
        }
    }
    let diff: Vec<f64> = f.iter().zip(&reconstruction).map(|(a, b)| a - b).collect();
    let terms: Vec<(f64, Ball)> = report.atoms.iter().map(|a| (a.lambda, a.ball)).collect();
    let lambda_value = lambda_functional(&terms, &norms)?;
    let quasi_norm = hardy_s_quasinorm(f, w, hs, phi)?;
    Ok(PipelineReport {
        molecules: pieces.into_iter().map(|p| p.1).collect(),
        reconstruction,
        reconstruction_error: lp_norm(grid, &diff, 2.0) / fnorm,
        lambda_value,
        quasi_norm,
        ratio: lambda_value / quasi_norm,
        tent_residual_nodes: report.residual_nodes.len(),
        tent_reconstruction_residual: report.reconstruction_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annuli_partition_the_grid() {
        let grid = SpatialGrid::new(1, 4.0, 128).unwrap();
        let ball = Ball::new(grid.center(64), 0.5);
        let rings = annuli(&grid, &ball);
        let total: usize = rings.iter().map(|r| r.len()).sum();
        assert_eq!(total, grid.len());
        assert_eq!(rings[0].len(), grid.ball_cells(&ball).len());
    }

    #[test]
    fn projection_of_a_bump_reassembles() {
        let grid = SpatialGrid::new(1, 4.0, 256).unwrap();
        let ball = Ball::new(grid.center(128), 0.25);
        // derivative of a Gaussian spread over several annuli
        let alpha = grid.sample(|x| -x[0] * (-x[0] * x[0]).exp());
        for s in 0..=2 {
            let p = molecule_to_atoms(&alpha, &grid, &ball, s).unwrap();
            assert!(p.reassembly_residual <= 1e-10, "s={s}: {}", p.reassembly_residual);
            assert!(p.moment_residual <= 1e-10);
            assert!(p.dual_residual <= 1e-10);
        }
    }

    #[test]
    fn degenerate_annulus_is_singular() {
        let grid = SpatialGrid::new(1, 1.0, 16).unwrap();
        // U_0 holds a single cell, too few for a degree-one basis
        let ball = Ball::new(grid.center(8), 0.5 * grid.spacing());
        let alpha = vec![1.0; 16];
        assert!(matches!(molecule_to_atoms(&alpha, &grid, &ball, 1), Err(Error::SingularGram { annulus: 0 })));
    }

    #[test]
    fn indicator_has_no_vanishing_mean() {
        let grid = SpatialGrid::new(1, 4.0, 128).unwrap();
        let phi = GrowthFunction::identity(1);
        let norms = BallNorms::new(&phi, &grid);
        let ball = Ball::new(grid.center(64), 0.5);
        let chi = grid.sample(|x| if ball.contains(x) { 1.0 } else { 0.0 });
        let m = validate_molecule(&chi, &ball, 2.0, 0, 1.5, &norms).unwrap();
        assert!(m.max_moment_residual() > 0.5);
        assert!(m.annular_norms[1..].iter().all(|v| *v == 0.0));
        // ‖χ_B‖_2 / (|B|^{1/2} ‖χ_B‖_1^{-1}) = |B|
        assert!((m.margins[0] - grid.ball_measure(&ball)).abs() < 1e-12);
    }
}
