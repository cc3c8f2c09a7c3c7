//! Growth functions `φ(x, t)`: evaluation, type exponents, regularization.

use std::f64::consts::E;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::halfspace::{Point, SpatialGrid};
use crate::numeric::{gauss5, ls_slope, pairwise_sum_by};

/// Spatial weight `w(x)` of a product-form growth function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Unit,
    /// `|x|^a`
    AbsPower(f64),
    /// `(1 + |x|)^a`
    Bracket(f64),
}

impl Weight {
    pub fn at(&self, x: &Point) -> f64 {
        let r = x[0].hypot(x[1]);
        match *self {
            Weight::Unit => 1.0,
            Weight::AbsPower(a) => r.powf(a),
            Weight::Bracket(a) => (1.0 + r).powf(a),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Weight::Unit)
    }
}

/// Orlicz factor `Φ(t)` of a product-form growth function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orlicz {
    /// `t^p`
    Power(f64),
    /// `t^p / ln(e + t)`
    PowerOverLog(f64),
    /// `t^p ln(e + t)`
    PowerTimesLog(f64),
}

impl Orlicz {
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Orlicz::Power(p) => t.powf(p),
            Orlicz::PowerOverLog(p) => t.powf(p) / (E + t).ln(),
            Orlicz::PowerTimesLog(p) => t.powf(p) * (E + t).ln(),
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Orlicz::Power(p) | Orlicz::PowerOverLog(p) | Orlicz::PowerTimesLog(p) => p,
        }
    }
}

/// Radial sample table `φ(r, t)` on knots `radii × levels`, optionally times a weight.
///
/// Linear interpolation in `t` (and in `r` between radial knots). Below the
/// first level the table is continued linearly to `φ(r, 0) = 0`; above the last
/// level it is held constant and `saturated()` is raised.
#[derive(Debug, Clone)]
pub struct GrowthTable {
    radii: Vec<f64>,
    levels: Vec<f64>,
    values: Vec<Vec<f64>>,
    weight: Weight,
    saturated: Arc<AtomicBool>,
}

impl PartialEq for GrowthTable {
    fn eq(&self, other: &Self) -> bool {
        self.radii == other.radii
            && self.levels == other.levels
            && self.values == other.values
            && self.weight == other.weight
    }
}

impl GrowthTable {
    pub fn new(radii: Vec<f64>, levels: Vec<f64>, values: Vec<Vec<f64>>, weight: Weight) -> Result<Self> {
        if radii.is_empty() || levels.is_empty() {
            return Err(Error::Input("growth table needs at least one knot per axis".into()));
        }
        if values.len() != radii.len() || values.iter().any(|row| row.len() != levels.len()) {
            return Err(Error::Input("growth table shape does not match its knots".into()));
        }
        if levels[0] <= 0.0 || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("table levels must be positive and increasing".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("table radii must be increasing".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input("table values must be finite and nonnegative".into()));
        }
        Ok(GrowthTable { radii, levels, values, weight, saturated: Arc::new(AtomicBool::new(false)) })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// True once some evaluation has run past the last tabulated level.
    pub fn saturated(&self) -> bool {
        self.saturated.load(Ordering::Relaxed)
    }

    fn along_t(&self, row: &[f64], t: f64) -> f64 {
        let lv = &self.levels;
        if t <= lv[0] {
            return row[0] * t / lv[0];
        }
        if t >= lv[lv.len() - 1] {
            if t > lv[lv.len() - 1] {
                self.saturated.store(true, Ordering::Relaxed);
            }
            return row[lv.len() - 1];
        }
        let k = lv.partition_point(|&s| s <= t) - 1;
        let w = (t - lv[k]) / (lv[k + 1] - lv[k]);
        row[k] * (1.0 - w) + row[k + 1] * w
    }

    fn at(&self, x: &Point, t: f64) -> f64 {
        let r = x[0].hypot(x[1]);
        let rs = &self.radii;
        let base = if rs.len() == 1 || r <= rs[0] {
            self.along_t(&self.values[0], t)
        } else if r >= rs[rs.len() - 1] {
            self.along_t(&self.values[rs.len() - 1], t)
        } else {
            let k = rs.partition_point(|&s| s <= r) - 1;
            let w = (r - rs[k]) / (rs[k + 1] - rs[k]);
            self.along_t(&self.values[k], t) * (1.0 - w) + self.along_t(&self.values[k + 1], t) * w
        };
        base * self.weight.at(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GrowthForm {
    Product { weight: Weight, orlicz: Orlicz },
    /// `t^α / ([ln(e + |x|)]^β + [ln(e + t)]^γ)`
    LogFamily { alpha: f64, beta: f64, gamma: f64 },
    Tabulated(GrowthTable),
}

/// A Musielak–Orlicz growth function with its declared type exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFunction {
    form: GrowthForm,
    lower_type: f64,
    dim: usize,
}

impl GrowthFunction {
    pub fn product(dim: usize, weight: Weight, orlicz: Orlicz) -> Result<Self> {
        let p = orlicz.exponent();
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Input(format!("Orlicz exponent must lie in (0, 1], got {p}")));
        }
        if let Orlicz::PowerTimesLog(_) = orlicz {
            if p >= 1.0 {
                return Err(Error::Input("t^p ln(e+t) needs p < 1 to keep upper type 1".into()));
            }
        }
        match weight {
            Weight::AbsPower(a) | Weight::Bracket(a) if !a.is_finite() => {
                return Err(Error::Input("weight exponent must be finite".into()));
            }
            _ => {}
        }
        Self::check_dim(dim)?;
        Ok(GrowthFunction { form: GrowthForm::Product { weight, orlicz }, lower_type: p, dim })
    }

    /// `φ(x, t) = t` in dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        GrowthFunction {
            form: GrowthForm::Product { weight: Weight::Unit, orlicz: Orlicz::Power(1.0) },
            lower_type: 1.0,
            dim,
        }
    }

    pub fn power(dim: usize, p: f64) -> Result<Self> {
        Self::product(dim, Weight::Unit, Orlicz::Power(p))
    }

    pub fn log_family(dim: usize, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::check_dim(dim)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Input(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Input(format!("beta must be nonnegative, got {beta}")));
        }
        let gmax = 2.0 * alpha * (1.0 + 2f64.ln());
        if !(gamma >= 0.0 && gamma <= gmax) {
            return Err(Error::Input(format!("gamma must lie in [0, {gmax}], got {gamma}")));
        }
        Ok(GrowthFunction { form: GrowthForm::LogFamily { alpha, beta, gamma }, lower_type: alpha, dim })
    }

    pub fn tabulated(dim: usize, table: GrowthTable, lower_type: f64) -> Result<Self> {
        Self::check_dim(dim)?;
        if !(lower_type > 0.0 && lower_type <= 1.0) {
            return Err(Error::Input(format!("lower type must lie in (0, 1], got {lower_type}")));
        }
        Ok(GrowthFunction { form: GrowthForm::Tabulated(table), lower_type, dim })
    }

    fn check_dim(dim: usize) -> Result<()> {
        if dim == 1 || dim == 2 {
            Ok(())
        } else {
            Err(Error::Input(format!("dimension must be 1 or 2, got {dim}")))
        }
    }

    pub fn form(&self) -> &GrowthForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nominal_lower_type(&self) -> f64 {
        self.lower_type
    }

    pub fn nominal_upper_type(&self) -> f64 {
        1.0
    }

    /// `(w, Φ)` for product forms.
    pub fn product_parts(&self) -> Option<(Weight, Orlicz)> {
        match self.form {
            GrowthForm::Product { weight, orlicz } => Some((weight, orlicz)),
            _ => None,
        }
    }

    /// True when `φ(x, t)` does not depend on `x`.
    pub fn is_x_independent(&self) -> bool {
        match &self.form {
            GrowthForm::Product { weight, .. } => weight.is_unit(),
            GrowthForm::LogFamily { beta, .. } => *beta == 0.0,
            GrowthForm::Tabulated(t) => t.radii.len() == 1 && t.weight.is_unit(),
        }
    }

    /// `φ(x, t)`, rejecting negative or non-finite `t`.
    pub fn evaluate(&self, x: &Point, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("growth function evaluated at t = {t}")));
        }
        Ok(self.value(x, t))
    }

    /// `φ(x, t)` for `t >= 0` without validation.
    #[inline]
    pub fn value(&self, x: &Point, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.form {
            GrowthForm::Product { weight, orlicz } => weight.at(x) * orlicz.at(t),
            GrowthForm::LogFamily { alpha, beta, gamma } => {
                let r = x[0].hypot(x[1]);
                let lx = if *beta == 0.0 { 1.0 } else { (E + r).ln().powf(*beta) };
                let lt = if *gamma == 0.0 { 1.0 } else { (E + t).ln().powf(*gamma) };
                t.powf(*alpha) / (lx + lt)
            }
            GrowthForm::Tabulated(table) => table.at(x, t),
        }
    }

    /// `φ(E, t) = ∫_E φ(x, t) dx` for a cell mask `E` of the grid.
    pub fn modular_over_set(&self, grid: &SpatialGrid, set: &[bool], t: f64) -> Result<f64> {
        if set.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "set has {} cells, grid has {}",
                set.len(),
                grid.len()
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("growth function evaluated at t = {t}")));
        }
        let cells: Vec<usize> = (0..set.len()).filter(|&i| set[i]).collect();
        let s = pairwise_sum_by(cells.len(), |k| self.value(&grid.center(cells[k]), t));
        Ok(s * grid.cell_measure())
    }

    /// The regularization `∫_0^t φ(x, s) ds/s` tabulated on `levels` (and on
    /// `radii` when `φ` depends on `x` beyond a product weight).
    ///
    /// Each level step is integrated with 5-point Gauss–Legendre in `ln s`. The
    /// part below the first level uses the same rule over 60 octaves and closes
    /// the remainder with `φ(s_0) / p`, exact for a lower-type-`p` power law.
    pub fn regularize(&self, levels: &GeometricLevels, radii: &[f64]) -> Result<GrowthFunction> {
        let ts = levels.values();
        let (knots, weight, profile): (Vec<f64>, Weight, Box<dyn Fn(f64, f64) -> f64 + Sync + '_>) =
            match &self.form {
                GrowthForm::Product { weight, orlicz } => {
                    let o = *orlicz;
                    (vec![0.0], *weight, Box::new(move |_r, t| o.at(t)))
                }
                _ => {
                    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(Error::Input("regularization needs increasing radial knots".into()));
                    }
                    let knots = if self.is_x_independent() { vec![0.0] } else { radii.to_vec() };
                    (knots, Weight::Unit, Box::new(move |r, t| self.value(&[r, 0.0], t)))
                }
            };
        let p = self.lower_type;
        let values: Vec<Vec<f64>> = knots
            .iter()
            .map(|&r| {
                let f = |u: f64| profile(r, u.exp());
                let u0 = ts[0].ln();
                let octaves = 60;
                let floor = u0 - octaves as f64 * 2f64.ln();
                let mut head = profile(r, floor.exp()) / p;
                let step = 2f64.ln();
                for k in 0..octaves {
                    let a = floor + k as f64 * step;
                    head += gauss5(f, a, a + step);
                }
                let mut acc = head;
                let mut row = Vec::with_capacity(ts.len());
                row.push(acc);
                for w in ts.windows(2) {
                    acc += gauss5(f, w[0].ln(), w[1].ln());
                    row.push(acc);
                }
                row
            })
            .collect();
        let table = GrowthTable::new(knots, ts, values, weight)?;
        GrowthFunction::tabulated(self.dim, table, p)
    }
}

/// Geometric levels `t_min * ratio^m`, `m = 0..count`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricLevels {
    pub t_min: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for GeometricLevels {
    /// Ratio `2^{1/8}` spanning `[2^-20, 2^20]`.
    fn default() -> Self {
        GeometricLevels { t_min: 2f64.powi(-20), ratio: 2f64.powf(0.125), count: 321 }
    }
}

impl GeometricLevels {
    pub fn new(t_min: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0) || !(ratio > 1.0) || count == 0 {
            return Err(Error::Grid(format!(
                "invalid geometric levels t_min={t_min}, ratio={ratio}, count={count}"
            )));
        }
        Ok(GeometricLevels { t_min, ratio, count })
    }

    /// Levels from `lo` to `hi` with `per_octave` levels per doubling.
    pub fn spanning(lo: f64, hi: f64, per_octave: usize) -> Result<Self> {
        let ratio = 2f64.powf(1.0 / per_octave as f64);
        let count = ((hi / lo).log2() * per_octave as f64).round() as usize + 1;
        Self::new(lo, ratio, count)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|m| self.t_min * self.ratio.powi(m as i32)).collect()
    }
}

/// Measured type exponents and the scan they were measured on.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeExponentEstimate {
    pub lower_p: f64,
    pub upper_p: f64,
    /// Largest `φ(x, st) / (s^p φ(x, t))` over the scan with the fitted exponents.
    pub worst_constant: f64,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
}

/// Estimates uniform lower/upper type exponents.
///
/// For each scale `s` the worst log-ratio `D(s) = sup_{x,t} ln φ(x,st) - ln φ(x,t)`
/// is measured; the exponents are the least-squares slopes of `D` against
/// `ln s` on `s <= 1` and `s >= 1`.
pub fn estimate_type_exponents(
    phi: &GrowthFunction,
    s_grid: &[f64],
    t_grid: &[f64],
    x_grid: &[Point],
) -> Result<TypeExponentEstimate> {
    if s_grid.is_empty() || t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::Estimation("type scan needs nonempty grids".into()));
    }
    if !s_grid.iter().any(|&s| s < 1.0) || !s_grid.iter().any(|&s| s > 1.0) {
        return Err(Error::Estimation("s grid must have points below and above 1".into()));
    }
    if s_grid.iter().chain(t_grid).any(|&v| !(v > 0.0)) {
        return Err(Error::Estimation("scan grids must be positive".into()));
    }
    let worst = |s: f64| -> f64 {
        let mut d = f64::NEG_INFINITY;
        for x in x_grid {
            for &t in t_grid {
                let a = phi.value(x, t);
                let b = phi.value(x, s * t);
                if a > 0.0 && b > 0.0 {
                    d = d.max(b.ln() - a.ln());
                }
            }
        }
        d
    };
    let mut lo = (Vec::new(), Vec::new());
    let mut hi = (Vec::new(), Vec::new());
    for &s in s_grid {
        let d = worst(s);
        if !d.is_finite() {
            continue;
        }
        let side = if s < 1.0 { &mut lo } else if s > 1.0 { &mut hi } else { continue };
        side.0.push(s.ln());
        side.1.push(d);
    }
    if lo.0.is_empty() || hi.0.is_empty() {
        return Err(Error::Estimation("growth function vanishes on the whole scan".into()));
    }
    // anchor both fits at D(1) = 0
    let fit = |xs: &[f64], ys: &[f64]| {
        let mut x = vec![0.0];
        let mut y = vec![0.0];
        x.extend_from_slice(xs);
        y.extend_from_slice(ys);
        ls_slope(&x, &y)
    };
    let lower_p = fit(&lo.0, &lo.1);
    let upper_p = fit(&hi.0, &hi.1);
    let mut c: f64 = 1.0;
    for (u, d) in lo.0.iter().zip(&lo.1) {
        c = c.max((d - lower_p * u).exp());
    }
    for (u, d) in hi.0.iter().zip(&hi.1) {
        c = c.max((d - upper_p * u).exp());
    }
    let range = |v: &[f64]| {
        (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    };
    let xr: Vec<f64> = x_grid.iter().map(|p| p[0].hypot(p[1])).collect();
    Ok(TypeExponentEstimate {
        lower_p,
        upper_p,
        worst_constant: c,
        s_range: range(s_grid),
        t_range: range(t_grid),
        x_range: range(&xr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan() -> (Vec<f64>, Vec<f64>, Vec<Point>) {
        let s: Vec<f64> = (-40..=40).filter(|k| *k != 0).map(|k| 2f64.powf(k as f64 / 4.0)).collect();
        let t: Vec<f64> = (-40..=40).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        let x: Vec<Point> = (0..8).map(|k| [k as f64 * 0.75, 0.0]).collect();
        (s, t, x)
    }

    #[test]
    fn identity_and_log_family_values() {
        let id = GrowthFunction::identity(1);
        assert_eq!(id.evaluate(&[0.3, 0.0], 2.0).unwrap(), 2.0);
        let lf = GrowthFunction::log_family(1, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(lf.evaluate(&[0.0, 0.0], 1.0).unwrap(), 0.5);
        assert_eq!(lf.evaluate(&[0.4, 0.0], 0.0).unwrap(), 0.0);
        assert!(matches!(id.evaluate(&[0.0, 0.0], -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn log_family_parameter_ranges() {
        assert!(GrowthFunction::log_family(1, 0.0, 1.0, 0.0).is_err());
        assert!(GrowthFunction::log_family(1, 0.5, -1.0, 0.0).is_err());
        assert!(GrowthFunction::log_family(1, 0.5, 1.0, 1.0 + 2f64.ln() + 1e-9).is_err());
        assert!(GrowthFunction::log_family(1, 0.5, 1.0, 1.0 + 2f64.ln()).is_ok());
    }

    #[test]
    fn homogeneous_power_has_exact_type() {
        let phi = GrowthFunction::power(1, 0.7).unwrap();
        let (s, t, x) = scan();
        let est = estimate_type_exponents(&phi, &s, &t, &x).unwrap();
        assert!((est.lower_p - 0.7).abs() < 0.02);
        assert!((est.upper_p - 0.7).abs() < 0.02);
        assert!((est.worst_constant - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_family_upper_type_is_alpha() {
        let phi = GrowthFunction::log_family(1, 0.8, 1.0, 0.5).unwrap();
        let (s, t, x) = scan();
        let est = estimate_type_exponents(&phi, &s, &t, &x).unwrap();
        assert!((est.upper_p - 0.8).abs() < 0.02, "{est:?}");
        assert!(est.lower_p < 0.8);
        assert!(est.lower_p <= est.upper_p + 1e-9);
        assert!(est.worst_constant >= 1.0);
    }

    #[test]
    fn scan_needs_both_sides_of_one() {
        let phi = GrowthFunction::identity(1);
        let r = estimate_type_exponents(&phi, &[0.5, 0.25], &[1.0], &[[0.0, 0.0]]);
        assert!(matches!(r, Err(Error::Estimation(_))));
    }

    #[test]
    fn regularized_power_matches_closed_form() {
        let p = 0.6;
        let phi = GrowthFunction::power(1, p).unwrap();
        let levels = GeometricLevels::default();
        let reg = phi.regularize(&levels, &[]).unwrap();
        let ts = levels.values();
        for t in [ts[0], ts[1], ts[100], ts[160], ts[200], ts[320]] {
            let want = t.powf(p) / p;
            let got = reg.value(&[0.2, 0.0], t);
            assert!((got - want).abs() <= 1e-6 * want, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn regularized_table_is_increasing_and_saturates() {
        let phi = GrowthFunction::log_family(1, 0.5, 1.0, 0.5).unwrap();
        let levels = GeometricLevels::spanning(1e-3, 1e3, 8).unwrap();
        let reg = phi.regularize(&levels, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        let ts = levels.values();
        for w in ts.windows(2) {
            assert!(reg.value(&[1.5, 0.0], w[0]) < reg.value(&[1.5, 0.0], w[1]));
        }
        let GrowthForm::Tabulated(table) = reg.form() else { panic!() };
        assert!(!table.saturated());
        let _ = reg.value(&[0.0, 0.0], 1e6);
        assert!(table.saturated());
    }

    #[test]
    fn modular_over_set_sums_cells() {
        let grid = SpatialGrid::new(1, 2.0, 64).unwrap();
        let set: Vec<bool> = grid.centers().iter().map(|c| c[0] > 0.0 && c[0] < 1.0).collect();
        let id = GrowthFunction::identity(1);
        assert!((id.modular_over_set(&grid, &set, 3.0).unwrap() - 3.0).abs() < 1e-12);
        let empty = vec![false; grid.len()];
        assert_eq!(id.modular_over_set(&grid, &empty, 3.0).unwrap(), 0.0);
    }
}
