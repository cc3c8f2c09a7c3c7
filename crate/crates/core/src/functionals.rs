//! Admissible wavelets, tent functions, the area functional, tent-space
//! norms, the Lusin area function and a grand maximal proxy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::growth::GrowthFunction;
use crate::halfspace::{Ball, HalfSpaceGrid, Point, SpatialGrid};
use crate::norms::luxembourg_norm;
use crate::numeric::{composite_gauss5, pairwise_sum};
use crate::weights::RowIndex;

/// The Gaussian profile of `ψ̂²` in `u = ln|ξ|` is cut off (smoothly, over one
/// unit of `z`) starting this many standard deviations from the band center.
const CUTOFF_SIGMAS: f64 = 10.0;
const QUAD_PANELS: usize = 400;

/// `C^∞` step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Radial wavelet `φ` with `φ̂(ξ) = ψ̂(|ξ|) / √c`, `ψ̂` supported in the annulus
/// `r_lo <= |ξ| <= r_hi` and `c = ∫ ψ̂(r)² dr/r`.
#[derive(Debug, Clone)]
pub struct AdmissibleWavelet {
    dim: usize,
    moment_order: usize,
    band: (f64, f64),
    center: f64,
    sigma: f64,
    c: f64,
    grid: SpatialGrid,
    samples: Vec<f64>,
    support_radius: f64,
    normalization_residual: f64,
}

impl AdmissibleWavelet {
    /// `ψ̂(r)²` as a function of `u = ln r`.
    fn theta(&self, u: f64) -> f64 {
        let z = (u - self.center) / self.sigma;
        (-0.5 * z * z).exp() * (1.0 - smooth_step(z.abs() - CUTOFF_SIGMAS))
    }

    /// `φ̂` at radius `r = |ξ|` (frequencies in cycles per unit length).
    pub fn hat(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        (self.theta(r.ln()) / self.c).sqrt()
    }

    /// `|φ̂(r)|²`.
    pub fn hat_sq(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.theta(r.ln()) / self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// `φ` at the cell centers of the grid it was built on.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Radius outside which `|φ| <= 1e-12 max|φ|` on the grid.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Max of `|∫_0^∞ |φ̂(tξ)|² dt/t - 1|` over test radii in `[2 r_lo, r_hi / 2]`.
    pub fn normalization_residual(&self) -> f64 {
        self.normalization_residual
    }

    /// `∫_0^∞ |φ̂(tξ)|² dt/t` at `|ξ| = r`, by Gauss–Legendre in `ln t`.
    pub fn continuous_calibration(&self, r: f64) -> f64 {
        let (lo, hi) = self.band;
        composite_gauss5(|v| self.hat_sq(v.exp() * r), (lo / r).ln(), (hi / r).ln(), QUAD_PANELS)
    }

    /// `Σ_m |φ̂(t_m ξ)|² ln ρ` on the levels of a half-space grid.
    pub fn discrete_calibration(&self, hs: &HalfSpaceGrid, r: f64) -> f64 {
        let parts: Vec<f64> = hs.ts().iter().map(|t| self.hat_sq(t * r)).collect();
        pairwise_sum(&parts) * hs.log_ratio()
    }

    /// Frequencies `[r_hi / t_max, r_lo / t_min]` whose dilates are fully
    /// covered by the levels of `hs`.
    pub fn calibrated_band(&self, hs: &HalfSpaceGrid) -> (f64, f64) {
        (self.band.1 / hs.t_max(), self.band.0 / hs.t_min())
    }

    /// `∫ φ(x) x^γ dx` for every multi-index with `|γ| <= order`.
    pub fn moments(&self, order: usize) -> Vec<((usize, usize), f64)> {
        let centers = self.grid.centers();
        let mut out = Vec::new();
        for total in 0..=order {
            for a in (0..=total).rev() {
                let b = total - a;
                if self.dim == 1 && b > 0 {
                    continue;
                }
                let terms: Vec<f64> =
                    centers.iter().zip(&self.samples).map(|(x, v)| v * x[0].powi(a as i32) * x[1].powi(b as i32)).collect();
                out.push(((a, b), pairwise_sum(&terms) * self.grid.cell_measure()));
            }
        }
        out
    }

    /// `max |φ(x) - φ(-x)|` over the grid.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.grid.cells_per_axis();
        (0..self.grid.len())
            .map(|i| {
                let (c, r) = self.grid.coords(i);
                let j = if self.dim == 1 { self.grid.index(n - 1 - c, 0) } else { self.grid.index(n - 1 - c, n - 1 - r) };
                (self.samples[i] - self.samples[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `(|ξ|, φ̂(ξ))` on `count` log-spaced radii across the band.
    pub fn fourier_profile(&self, count: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.band;
        (0..count)
            .map(|k| {
                let r = lo * (hi / lo).powf(k as f64 / (count.max(2) - 1) as f64);
                (r, self.hat(r))
            })
            .collect()
    }
}

/// Builds the wavelet on `grid`. Every polynomial moment vanishes because
/// `φ̂` is zero near the origin, so `moment_order` is only recorded.
pub fn make_admissible_wavelet(grid: &SpatialGrid, moment_order: usize, band: (f64, f64)) -> Result<AdmissibleWavelet> {
    let (lo, hi) = band;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::Input(format!("wavelet band must satisfy 0 < r_lo < r_hi, got ({lo}, {hi})")));
    }
    let center = 0.5 * (lo.ln() + hi.ln());
    let half_width = 0.5 * (hi.ln() - lo.ln());
    let sigma = half_width / (CUTOFF_SIGMAS + 1.0);
    let mut w = AdmissibleWavelet {
        dim: grid.dim(),
        moment_order,
        band,
        center,
        sigma,
        c: 1.0,
        grid: grid.clone(),
        samples: Vec::new(),
        support_radius: 0.0,
        normalization_residual: 0.0,
    };
    w.c = composite_gauss5(|u| w.theta(u), lo.ln(), hi.ln(), QUAD_PANELS);
    // radial profile on the grid's own frequency lattice
    let sp = Spectral::new(grid);
    w.samples = sp.synthesize_radial(|r| w.hat(r));
    let peak = w.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.support_radius = (0..grid.len())
        .filter(|&i| w.samples[i].abs() > 1e-12 * peak)
        .map(|i| {
            let x = grid.center(i);
            x[0].hypot(x[1])
        })
        .fold(0.0, f64::max);
    w.normalization_residual = (0..=32)
        .map(|k| {
            let r = 2.0 * lo * (hi / (4.0 * lo)).powf(k as f64 / 32.0);
            (w.continuous_calibration(r) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(w)
}

/// Samples of `g(y, t)` at the nodes of a half-space grid (level-major).
#[derive(Debug, Clone, PartialEq)]
pub struct TentFunction {
    grid: HalfSpaceGrid,
    values: Vec<f64>,
}

impl TentFunction {
    pub fn new(grid: HalfSpaceGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!("{} samples for {} nodes", values.len(), grid.node_count())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("tent function samples must be finite".into()));
        }
        Ok(TentFunction { grid, values })
    }

    pub fn zeros(grid: &HalfSpaceGrid) -> Self {
        TentFunction { grid: grid.clone(), values: vec![0.0; grid.node_count()] }
    }

    pub fn from_fn<F: Fn(&Point, f64) -> f64>(grid: &HalfSpaceGrid, f: F) -> Self {
        let base = grid.base();
        let mut values = vec![0.0; grid.node_count()];
        for m in 0..grid.levels() {
            let t = grid.t(m);
            for i in 0..base.len() {
                values[grid.node(i, m)] = f(&base.center(i), t);
            }
        }
        TentFunction { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn level(&self, m: usize) -> &[f64] {
        let n = self.grid.base().len();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn get(&self, cell: usize, level: usize) -> f64 {
        self.values[self.grid.node(cell, level)]
    }

    /// Node mask of nonzero samples.
    pub fn support(&self) -> Vec<bool> {
        self.values.iter().map(|v| *v != 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> TentFunction {
        TentFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &TentFunction, c: f64) -> Result<TentFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("tent functions live on different grids".into()));
        }
        Ok(TentFunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        })
    }
}

/// `Σ_{y : |x-y| < radius} v(y)` for every cell `x`.
pub(crate) fn cone_window_sums(grid: &SpatialGrid, values: &[f64], radius: f64) -> Vec<f64> {
    let index = RowIndex::new(grid, values, false);
    (0..grid.len())
        .map(|i| {
            let rows = grid.ball_rows(&Ball::new(grid.center(i), radius));
            index.ball_sum(&rows)
        })
        .collect()
}

/// `Σ_{y : |x-y| < radius} v(y)` restricted to a 1-D fast path when possible.
fn window_sums(grid: &SpatialGrid, values: &[f64], radius: f64) -> Vec<f64> {
    if grid.dim() != 1 {
        return cone_window_sums(grid, values, radius);
    }
    let n = grid.len();
    let m = grid.max_offset_below(radius);
    if m < 0 {
        return vec![0.0; n];
    }
    let m = m as usize;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + values[i];
    }
    (0..n).map(|i| prefix[(i + m + 1).min(n)] - prefix[i.saturating_sub(m)]).collect()
}

/// `𝒜(g)(x) = (Σ_{(y,t) : |x-y| < νt} |g(y,t)|² h^n ln ρ / t^n)^{1/2}`.
pub fn area_functional(g: &TentFunction, aperture: f64) -> Vec<f64> {
    let hs = g.grid();
    let base = hs.base();
    let w = base.cell_measure() * hs.log_ratio();
    let per_level: Vec<Vec<f64>> = (0..hs.levels())
        .into_par_iter()
        .map(|m| {
            let level = g.level(m);
            if level.iter().all(|v| *v == 0.0) {
                return Vec::new();
            }
            let t = hs.t(m);
            let sq: Vec<f64> = level.iter().map(|v| v * v).collect();
            let scale = w / t.powi(base.dim() as i32);
            window_sums(base, &sq, aperture * t).into_iter().map(|s| s * scale).collect()
        })
        .collect();
    let mut acc = vec![0.0; base.len()];
    for lv in per_level.iter().filter(|v| !v.is_empty()) {
        for (a, v) in acc.iter_mut().zip(lv) {
            *a += v;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// `(∫ |v|^p dx)^{1/p}` on the grid.
pub fn lp_norm(grid: &SpatialGrid, v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let terms: Vec<f64> = v.iter().map(|x| x.abs().powf(p)).collect();
    (pairwise_sum(&terms) * grid.cell_measure()).powf(1.0 / p)
}

/// `‖g‖_{T^p_2} = ‖𝒜(g)‖_{L^p}`.
pub fn tent_norm_p(g: &TentFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Input(format!("tent exponent must be positive, got {p}")));
    }
    Ok(lp_norm(g.grid().base(), &area_functional(g, 1.0), p))
}

/// `‖g‖_{T_φ} = ‖𝒜(g)‖_{L^φ}`.
pub fn tent_norm_phi(g: &TentFunction, phi: &GrowthFunction) -> Result<f64> {
    Ok(luxembourg_norm(phi, g.grid().base(), &area_functional(g, 1.0))?.norm)
}

fn check_wavelet_grid(w: &AdmissibleWavelet, hs: &HalfSpaceGrid) -> Result<()> {
    if w.grid() != hs.base() {
        return Err(Error::GridMismatch("wavelet and half-space grid use different spatial grids".into()));
    }
    Ok(())
}

/// `F(y, t) = (φ_t * f)(y)` on every node.
pub fn wavelet_transform(f: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid) -> Result<TentFunction> {
    check_wavelet_grid(w, hs)?;
    let sp = Spectral::new(hs.base());
    let spec = sp.forward(f)?;
    let radii = sp.radial_frequencies();
    let levels: Vec<Vec<f64>> = hs
        .ts()
        .par_iter()
        .map(|t| {
            let mult: Vec<f64> = radii.iter().map(|r| w.hat(t * r)).collect();
            sp.apply(&spec, &mult)
        })
        .collect();
    TentFunction::new(hs.clone(), levels.concat())
}

/// `S_α(f) = 𝒜_α(φ_t * f)`.
pub fn lusin_area(f: &[f64], w: &AdmissibleWavelet, hs: &HalfSpaceGrid, aperture: f64) -> Result<Vec<f64>> {
    Ok(area_functional(&wavelet_transform(f, w, hs)?, aperture))
}

/// Test functions of the grand maximal dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestProfile {
    /// `exp(-|x|²/2)`
    Gaussian,
    /// `-x_1 exp(-|x|²/2)`
    GaussianDx,
    /// `(x_1² - 1) exp(-|x|²/2)`
    GaussianDxx,
    /// Tensor product of centered cubic B-splines.
    CubicBSpline,
}

fn bspline3(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    }
}

impl TestProfile {
    pub fn at(&self, x: &Point, dim: usize) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let g = (-0.5 * r2).exp();
        match self {
            TestProfile::Gaussian => g,
            TestProfile::GaussianDx => -x[0] * g,
            TestProfile::GaussianDxx => (x[0] * x[0] - 1.0) * g,
            TestProfile::CubicBSpline => {
                if dim == 1 {
                    bspline3(x[0])
                } else {
                    bspline3(x[0]) * bspline3(x[1])
                }
            }
        }
    }
}

/// A scaled test function `scale * profile`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub profile: TestProfile,
    pub scale: f64,
}

impl TestFunction {
    pub fn at(&self, x: &Point, dim: usize) -> f64 {
        self.scale * self.profile.at(x, dim)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `max over |β| <= m+1 and x of (1+|x|)^{(m+2)(n+1)} |∂^β ψ(x)|`, with
/// derivatives by central finite differences on a validation lattice.
pub fn class_bound(psi: &TestFunction, dim: usize, m: usize) -> f64 {
    let eta = 1e-2;
    let radius = 12.0;
    let step = if dim == 1 { 1.0 / 64.0 } else { 1.0 / 8.0 };
    let count = (2.0 * radius / step) as i64;
    let exponent = ((m + 2) * (dim + 1)) as i32;
    let mut indices = Vec::new();
    for total in 0..=m + 1 {
        for a in 0..=total {
            let b = total - a;
            if dim == 1 && b > 0 {
                continue;
            }
            indices.push((a, b));
        }
    }
    let derivative = |x: &Point, a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..=a {
            for j in 0..=b {
                let sx = (a as f64 / 2.0 - i as f64) * eta;
                let sy = (b as f64 / 2.0 - j as f64) * eta;
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binomial(a, i) * binomial(b, j) * psi.at(&[x[0] + sx, x[1] + sy], dim);
            }
        }
        acc / eta.powi((a + b) as i32)
    };
    let ys: Vec<i64> = if dim == 1 { vec![0] } else { (0..=count).collect() };
    ys.par_iter()
        .map(|&iy| {
            let mut best: f64 = 0.0;
            for ix in 0..=count {
                let x = [-radius + ix as f64 * step, if dim == 1 { 0.0 } else { -radius + iy as f64 * step }];
                let wgt = (1.0 + x[0].hypot(x[1])).powi(exponent);
                for &(a, b) in &indices {
                    best = best.max(wgt * derivative(&x, a, b).abs());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Finite dictionary standing in for the class `𝒮_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub dim: usize,
    pub m: usize,
    pub elements: Vec<TestFunction>,
}

impl Dictionary {
    /// Validates that every element satisfies the class bound (up to `1e-9`).
    pub fn new(dim: usize, m: usize, elements: Vec<TestFunction>) -> Result<Self> {
        for (index, e) in elements.iter().enumerate() {
            let value = class_bound(e, dim, m);
            if value > 1.0 + 1e-9 {
                return Err(Error::Dictionary { index, value });
            }
        }
        Ok(Dictionary { dim, m, elements })
    }

    /// Gaussian, its first two `x_1` derivatives and a cubic B-spline, each
    /// rescaled to meet the class bound with equality.
    pub fn standard(dim: usize, m: usize) -> Result<Self> {
        let profiles = [TestProfile::Gaussian, TestProfile::GaussianDx, TestProfile::GaussianDxx, TestProfile::CubicBSpline];
        let elements = profiles
            .iter()
            .map(|&profile| {
                let raw = TestFunction { profile, scale: 1.0 };
                TestFunction { profile, scale: 1.0 / class_bound(&raw, dim, m) }
            })
            .collect();
        Self::new(dim, m, elements)
    }
}

/// Grand maximal values together with the maximizing `(element, level, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrandMaximal {
    pub values: Vec<f64>,
    pub argmax: Vec<(usize, usize, usize)>,
}

/// `f*_D(x) = max |f * ψ_t(y)|` over dictionary elements `ψ`, the levels of
/// `hs` and cells `y` with `|y - x| < t`. A lower bound for the true `f*_m`.
pub fn grand_maximal(f: &[f64], hs: &HalfSpaceGrid, dict: &Dictionary) -> Result<GrandMaximal> {
    let base = hs.base();
    if dict.dim != base.dim() {
        return Err(Error::GridMismatch("dictionary and grid dimensions differ".into()));
    }
    let sp = Spectral::new(base);
    let spec = sp.forward(f)?;
    let dim = base.dim();
    let jobs: Vec<(usize, usize)> = (0..dict.elements.len()).flat_map(|e| (0..hs.levels()).map(move |m| (e, m))).collect();
    let fields: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(e, m)| {
            let t = hs.t(m);
            let psi = dict.elements[e];
            let tn = t.powi(dim as i32);
            let kernel = sp.kernel_spectrum(|z| psi.at(&[z[0] / t, z[1] / t], dim) / tn);
            sp.apply_complex(&spec, &kernel).into_iter().map(f64::abs).collect()
        })
        .collect();
    let n = base.len();
    let mut values = vec![0.0; n];
    let mut argmax = vec![(0, 0, 0); n];
    for (field, &(e, m)) in fields.iter().zip(&jobs) {
        let t = hs.t(m);
        for x in 0..n {
            let rows = base.ball_rows(&Ball::new(base.center(x), t));
            for (row, lo, hi) in rows {
                for c in lo..hi {
                    let y = base.index(c, row);
                    if field[y] > values[x] {
                        values[x] = field[y];
                        argmax[x] = (e, m, y);
                    }
                }
            }
        }
    }
    Ok(GrandMaximal { values, argmax })
}

/// `‖f*_D‖_{L^φ}`.
pub fn hphi_grand_quasinorm(f: &[f64], hs: &HalfSpaceGrid, dict: &Dictionary, phi: &GrowthFunction) -> Result<f64> {
    let gm = grand_maximal(f, hs, dict)?;
    Ok(luxembourg_norm(phi, hs.base(), &gm.values)?.norm)
}
