//! The experiment registry and the experiments themselves.

use mohardy_core::bmo::{bmo_phi_norm, john_nirenberg_experiment, lemma52_check, pairing_check, theorem51_experiment};
use mohardy_core::functionals::{lp_norm, lusin_area, make_admissible_wavelet, wavelet_transform, AdmissibleWavelet};
use mohardy_core::growth::{GeometricLevels, GrowthFunction, Orlicz, Weight};
use mohardy_core::halfspace::{Ball, HalfSpaceGrid, SpatialGrid};
use mohardy_core::norms::{luxembourg_norm, BallNorms};
use mohardy_core::synthesis::{calderon_reproduce, default_epsilon, molecular_pipeline, pi_phi, PipelineParams};
use mohardy_core::tent_atoms::{convergence_check, decompose, validate_tent_atom};
use mohardy_core::weights::{critical_indices, m_index, BallFamily, MaximalPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{BallFamilyKind, ConfigError, ExperimentConfig};
use crate::families::{bmo_family, fixture_grid, tent_fixture, truncated_log, wave_packets};
use crate::output::{Series, Table};

pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo { name: "indices", description: "Muckenhoupt and reverse Hölder constants under refinement; q(φ), r(φ), m(φ)" },
    ExperimentInfo { name: "luxembourg", description: "Luxembourg norms: modular identity, homogeneity, power reduction" },
    ExperimentInfo { name: "tent-decompose", description: "tent atom decomposition of the bundled fixture" },
    ExperimentInfo { name: "calderon", description: "Calderón reproducing formula on wave packets" },
    ExperimentInfo { name: "pipeline", description: "wave packets to tent atoms to molecules and back" },
    ExperimentInfo { name: "carleson", description: "Carleson norm of |φ_t * b|² dx dt/t against the BMO norm of b" },
    ExperimentInfo { name: "pairing", description: "∫ f b against its half-space form" },
    ExperimentInfo { name: "jn", description: "John–Nirenberg distribution of a truncated logarithm" },
    ExperimentInfo { name: "lemma52", description: "decay integral of a BMO function around small balls" },
    ExperimentInfo { name: "plancherel", description: "‖S(f)‖² / ‖f‖² on wave packets" },
];

pub fn list_experiments() -> String {
    let width = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    EXPERIMENTS.iter().map(|e| format!("{:width$}  {}\n", e.name, e.description)).collect()
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] mohardy_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    match cfg.experiment.as_str() {
        "indices" => indices(cfg),
        "luxembourg" => luxembourg(cfg),
        "tent-decompose" => tent_decompose(cfg),
        "calderon" => calderon(cfg),
        "pipeline" => pipeline(cfg),
        "carleson" => carleson(cfg),
        "pairing" => pairing(cfg),
        "jn" => jn(cfg),
        "lemma52" => lemma52(cfg),
        "plancherel" => plancherel(cfg),
        other => Err(ConfigError::UnknownExperiment(other.to_string()).into()),
    }
}

/// Runs on a private pool of `threads` workers.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::Value { key: "threads".into(), reason: e.to_string() })?;
    pool.install(|| run_experiment(cfg))
}

fn spatial(cfg: &ExperimentConfig, half_width: f64, spacing: f64) -> Result<SpatialGrid, RunError> {
    let l = cfg.grid.half_width.unwrap_or(half_width);
    let h = cfg.grid.spacing.unwrap_or(spacing);
    let cells = 2.0 * l / h;
    if cells.is_nan() || cells < 2.0 || (cells - cells.round()).abs() > 1e-9 * cells {
        return Err(ConfigError::Value { key: "grid.h".into(), reason: format!("2L/h = {cells} is not a whole number of cells") }.into());
    }
    Ok(SpatialGrid::new(cfg.grid.dim.unwrap_or(1), l, cells.round() as usize)?)
}

fn half_space(cfg: &ExperimentConfig, base: SpatialGrid, t_min: f64, ratio: f64, levels: usize) -> Result<HalfSpaceGrid, RunError> {
    Ok(HalfSpaceGrid::new(
        base,
        cfg.grid.t_min.unwrap_or(t_min),
        cfg.grid.ratio.unwrap_or(ratio),
        cfg.grid.levels.unwrap_or(levels),
    )?)
}

/// The wave-packet grid: `[-32, 32]`, `h = 1/64`, 48 levels from `1/4` at ratio `2^{1/8}`.
fn packet_grid(cfg: &ExperimentConfig) -> Result<(HalfSpaceGrid, AdmissibleWavelet), RunError> {
    let base = spatial(cfg, 32.0, 1.0 / 64.0)?;
    let hs = half_space(cfg, base.clone(), 0.25, 2f64.powf(0.125), 48)?;
    let w = make_admissible_wavelet(&base, cfg.wavelet_s, cfg.wavelet_band)?;
    Ok((hs, w))
}

fn growth(cfg: &ExperimentConfig, dim: usize) -> Result<GrowthFunction, RunError> {
    Ok(cfg.growth.build(dim)?)
}

fn t_levels() -> Vec<f64> {
    GeometricLevels::spanning(1e-2, 1e2, 2).expect("fixed levels").values()
}

fn family(cfg: &ExperimentConfig, dim: usize) -> BallFamily {
    cfg.balls.map(|b| b.family()).unwrap_or(if dim == 1 { BallFamily::AllIntervals } else { BallFamily::Dyadic })
}

fn dyadic_default(cfg: &ExperimentConfig) -> BallFamily {
    cfg.balls.unwrap_or(BallFamilyKind::Dyadic).family()
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

const Q_SCAN: [f64; 8] = [1.0, 1.1, 1.2, 1.5, 1.75, 2.0, 3.0, 4.0];

fn indices(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = spatial(cfg, 1.0, 1.0 / 64.0)?;
    let phi = growth(cfg, grid.dim())?;
    let fam = family(cfg, grid.dim());
    let levels = t_levels();
    let a = critical_indices(&phi, &grid, &Q_SCAN, &fam, &levels, 2, phi.nominal_lower_type())?;
    let mut out = Outcome::default();
    let mut constants = Table::new("indices_constants", &["kind", "q", "cells", "value", "divergent"]);
    let mut lowest = f64::INFINITY;
    for (kind, rows) in [("A", &a.aq_constants), ("RH", &a.rh_constants)] {
        for (q, trend) in rows.iter() {
            for (k, v) in trend.values.iter().enumerate() {
                constants.push(vec![kind.into(), (*q).into(), (grid.len() << k).into(), (*v).into(), trend.divergent.into()]);
                if kind == "A" {
                    lowest = lowest.min(*v);
                }
            }
        }
    }
    let mut summary = Table::new("indices_summary", &["quantity", "estimate", "bracket_lo", "bracket_hi"]);
    summary.push(vec!["q".into(), a.q_critical.estimate.into(), a.q_critical.bracket.0.into(), a.q_critical.bracket.1.into()]);
    summary.push(vec!["r".into(), a.r_critical.estimate.into(), a.r_critical.bracket.0.into(), a.r_critical.bracket.1.into()]);
    summary.push(vec!["m".into(), a.m.map(|m| m as f64).into(), f64::NAN.into(), f64::NAN.into()]);
    out.series.push(Series {
        name: "indices_aq".into(),
        points: a.aq_constants.iter().map(|(q, t)| (*q, *t.values.last().unwrap())).collect(),
    });
    out.check("A_q >= 1", lowest >= 1.0 - 1e-10, format!("smallest constant {lowest}"));
    out.check("q(φ) located", a.q_critical.estimate.is_some(), format!("{:?}", a.q_critical));
    if phi.is_x_independent() {
        out.check("q(φ) = 1 for x-independent φ", a.q_critical.estimate == Some(1.0), format!("{:?}", a.q_critical.estimate));
    }
    out.tables.push(constants);
    out.tables.push(summary);
    Ok(out)
}

fn builtin_growth(dim: usize) -> Vec<(String, GrowthFunction)> {
    let mk = |w, o| GrowthFunction::product(dim, w, o).expect("built-in growth");
    vec![
        ("t".into(), GrowthFunction::identity(dim)),
        ("t^0.5".into(), GrowthFunction::power(dim, 0.5).expect("built-in growth")),
        ("|x|^0.5 t".into(), mk(Weight::AbsPower(0.5), Orlicz::Power(1.0))),
        ("(1+|x|)^0.5 t/log".into(), mk(Weight::Bracket(0.5), Orlicz::PowerOverLog(1.0))),
        ("t^0.7 log".into(), mk(Weight::Unit, Orlicz::PowerTimesLog(0.7))),
        ("log(0.7,1,0.5)".into(), GrowthFunction::log_family(dim, 0.7, 1.0, 0.5).expect("built-in growth")),
    ]
}

fn luxembourg(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = spatial(cfg, 1.0, 1.0 / 128.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Outcome::default();
    let mut table = Table::new("luxembourg_modular", &["phi", "id", "norm", "modular_at_norm", "iterations"]);
    let mut worst: f64 = 0.0;
    let funcs: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            (0..grid.len()).map(|_| if rng.gen::<f64>() < 0.3 { 0.0 } else { scale * rng.gen_range(-1.0..1.0) }).collect()
        })
        .collect();
    for (label, phi) in builtin_growth(grid.dim()) {
        for (id, f) in funcs.iter().enumerate() {
            let r = luxembourg_norm(&phi, &grid, f)?;
            let m = r.modular_at_norm.unwrap_or(f64::NAN);
            worst = worst.max((m - 1.0).abs());
            table.push(vec![label.clone().into(), id.into(), r.norm.into(), m.into(), r.iterations.into()]);
        }
    }
    out.check("modular at the norm within 1e-6 of 1", worst <= 1e-6, format!("worst deviation {worst:e}"));
    let mut reduction = Table::new("luxembourg_powers", &["p", "id", "norm", "lp_norm", "scaled_norm", "scale"]);
    let mut worst_lp: f64 = 0.0;
    let mut worst_hom: f64 = 0.0;
    for p in [0.25, 0.5, 0.75, 1.0] {
        let phi = GrowthFunction::power(grid.dim(), p)?;
        for (id, f) in funcs.iter().take(5).enumerate() {
            let norm = luxembourg_norm(&phi, &grid, f)?.norm;
            let lp = lp_norm(&grid, f, p);
            let c = 10f64.powf(rng.gen_range(-2.0..2.0));
            let g: Vec<f64> = f.iter().map(|v| -c * v).collect();
            let scaled = luxembourg_norm(&phi, &grid, &g)?.norm;
            worst_lp = worst_lp.max((norm - lp).abs() / lp);
            worst_hom = worst_hom.max((scaled - c * norm).abs() / (c * norm));
            reduction.push(vec![p.into(), id.into(), norm.into(), lp.into(), scaled.into(), c.into()]);
        }
    }
    out.check("t^p norm equals the L^p norm", worst_lp <= 1e-8, format!("worst relative gap {worst_lp:e}"));
    out.check("homogeneity", worst_hom <= 1e-8, format!("worst relative gap {worst_hom:e}"));
    out.tables.push(table);
    out.tables.push(reduction);
    Ok(out)
}

fn tent_decompose(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let f = tent_fixture();
    let hs = fixture_grid();
    let base = hs.base().clone();
    let phi = growth(cfg, 1)?;
    let report = decompose(&f, &phi, cfg.gamma, MaximalPolicy::AllWindows)?;
    let norms = BallNorms::new(&phi, &base);
    let mut atoms = Table::new("tent_atoms", &["k", "j", "lambda", "center", "radius", "nodes", "char_norm", "margin_p2", "margin_p4"]);
    let mut worst: f64 = 0.0;
    let mut support = true;
    for a in &report.atoms {
        let v = validate_tent_atom(&a.to_tent(&hs), &a.ball, &norms, &[2.0, 4.0])?;
        support &= v.support_ok;
        worst = worst.max(v.max_margin());
        atoms.push(vec![
            a.k.into(),
            a.j.into(),
            a.lambda.into(),
            a.ball.center[0].into(),
            a.ball.radius.into(),
            a.nodes.len().into(),
            a.char_norm.into(),
            v.sizes[0].3.into(),
            v.sizes[1].3.into(),
        ]);
    }
    let mut summary = Table::new(
        "tent_summary",
        &["atoms", "lambda_value", "input_norm", "implied_constant", "reconstruction_residual", "residual_nodes", "resolution_loss_cubes"],
    );
    summary.push(vec![
        report.atoms.len().into(),
        report.lambda_value.into(),
        report.input_norm.into(),
        report.implied_constant.into(),
        report.reconstruction_residual.into(),
        report.residual_nodes.len().into(),
        report.resolution_loss_cubes.into(),
    ]);
    let tails = convergence_check(&f, &report, &phi, 2.0)?;
    let mut out = Outcome::default();
    out.series.push(Series {
        name: "tent_tail".into(),
        points: tails.counts.iter().zip(&tails.tphi_tails).map(|(c, t)| (*c as f64, *t)).collect(),
    });
    let resid = report.reconstruction_residual;
    out.check("reconstruction", resid <= 1e-12 * f.max_abs(), format!("residual {resid:e}"));
    out.check("every node assigned", report.residual_nodes.is_empty(), format!("{} residual nodes", report.residual_nodes.len()));
    out.check("atoms supported in their tents", support, String::new());
    out.check("atom margins <= 10", worst <= 10.0, format!("worst margin {worst}"));
    out.tables.push(summary);
    out.tables.push(atoms);
    Ok(out)
}

fn calderon(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (hs, w) = packet_grid(cfg)?;
    let grid = hs.base();
    let mut out = Outcome::default();
    let mut table = Table::new("calderon", &["id", "frequency", "center", "residual", "levels_used", "identity_exact"]);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for (id, p) in wave_packets(10, cfg.seed).iter().enumerate() {
        let f = p.sample(grid);
        let r = calderon_reproduce(&f, &w, &hs, (0.0, f64::INFINITY))?;
        let same = pi_phi(&wavelet_transform(&f, &w, &hs)?, &w)? == r.reconstruction;
        exact &= same;
        worst = worst.max(r.residual);
        table.push(vec![id.into(), p.frequency.into(), p.center.into(), r.residual.into(), r.levels_used.into(), same.into()]);
    }
    let (lo, hi) = w.calibrated_band(&hs);
    let points = (0..=200)
        .map(|i| {
            let r = lo * 0.5 * (4.0 * hi / lo).powf(i as f64 / 200.0);
            (r, w.discrete_calibration(&hs, r))
        })
        .collect();
    out.series.push(Series { name: "calderon_calibration".into(), points });
    out.check("relative L2 error <= 1e-6", worst <= 1e-6, format!("worst {worst:e}"));
    out.check("π_φ(φ_t * f) equals the Calderón sum", exact, String::new());
    out.tables.push(table);
    Ok(out)
}

/// `q(φ)` and `m(φ)` for the molecule parameters: 1 and `⌊n(1/i - 1)⌋` for
/// x-independent `φ`, otherwise from a small refinement study.
fn molecule_indices(phi: &GrowthFunction, dim: usize) -> Result<(f64, i64), RunError> {
    let i = phi.nominal_lower_type();
    let q = if phi.is_x_independent() {
        1.0
    } else {
        let grid = SpatialGrid::new(dim, 1.0, 128)?;
        let fam = if dim == 1 { BallFamily::AllIntervals } else { BallFamily::Dyadic };
        critical_indices(phi, &grid, &Q_SCAN, &fam, &t_levels(), 2, i)?.q_critical.estimate.unwrap_or(4.0)
    };
    Ok((q, m_index(dim, q, i).max(0)))
}

fn pipeline(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (hs, w) = packet_grid(cfg)?;
    let grid = hs.base();
    let phi = growth(cfg, grid.dim())?;
    let (q0, m) = molecule_indices(&phi, grid.dim())?;
    let params = PipelineParams {
        gamma: cfg.gamma,
        s: m as usize,
        epsilon: default_epsilon(grid.dim(), q0, phi.nominal_lower_type()),
        ..PipelineParams::default()
    };
    let mut out = Outcome::default();
    let mut summary = Table::new(
        "pipeline_summary",
        &["id", "molecules", "reconstruction_error", "lambda", "quasi_norm", "ratio", "max_margin", "max_moment_residual", "all_pass", "tent_residual_nodes"],
    );
    let mut molecules = Table::new("pipeline_molecules", &["id", "k", "j", "lambda", "center", "radius", "margin", "moment_residual", "passes"]);
    let mut worst_err: f64 = 0.0;
    let mut all_pass = true;
    let mut ratios = Vec::new();
    for (id, p) in wave_packets(20, cfg.seed).iter().enumerate() {
        let f = p.sample(grid);
        let r = molecular_pipeline(&f, &w, &hs, &phi, &params)?;
        let pass = r.molecules.iter().all(|m| m.passes);
        let margin = r.molecules.iter().map(|m| m.max_margin).fold(0.0, f64::max);
        let moments = r.molecules.iter().map(|m| m.max_moment_residual).fold(0.0, f64::max);
        for m in &r.molecules {
            molecules.push(vec![
                id.into(),
                m.k.into(),
                m.j.into(),
                m.lambda.into(),
                m.ball.center[0].into(),
                m.ball.radius.into(),
                m.max_margin.into(),
                m.max_moment_residual.into(),
                m.passes.into(),
            ]);
        }
        summary.push(vec![
            id.into(),
            r.molecules.len().into(),
            r.reconstruction_error.into(),
            r.lambda_value.into(),
            r.quasi_norm.into(),
            r.ratio.into(),
            margin.into(),
            moments.into(),
            pass.into(),
            r.tent_residual_nodes.into(),
        ]);
        worst_err = worst_err.max(r.reconstruction_error);
        all_pass &= pass;
        ratios.push(r.ratio);
    }
    out.series.push(Series { name: "pipeline_ratio".into(), points: ratios.iter().enumerate().map(|(i, r)| (i as f64, *r)).collect() });
    out.check("reconstruction error <= 1e-3", worst_err <= 1e-3, format!("worst {worst_err:e}"));
    out.check("molecules pass (margin <= 10, moments <= 1e-8)", all_pass, String::new());
    let s = spread(&ratios);
    out.check("Λ / ‖f‖ spread <= 50", s <= 50.0, format!("max/min {s}"));
    out.tables.push(summary);
    out.tables.push(molecules);
    Ok(out)
}

/// `[-2, 2]` at `h = 1/64`, 17 levels from `1/8` at ratio `2^{1/4}`.
fn bmo_grids(cfg: &ExperimentConfig) -> Result<(HalfSpaceGrid, HalfSpaceGrid), RunError> {
    let base = spatial(cfg, 2.0, 1.0 / 64.0)?;
    let hs = half_space(cfg, base, 0.125, 2f64.powf(0.25), 17)?;
    let fine = hs.refined(2);
    Ok((hs, fine))
}

fn carleson(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (hs, fine) = bmo_grids(cfg)?;
    let phi = growth(cfg, hs.base().dim())?;
    let fam = dyadic_default(cfg);
    let w = make_admissible_wavelet(hs.base(), cfg.wavelet_s, cfg.wavelet_band)?;
    let wf = make_admissible_wavelet(fine.base(), cfg.wavelet_s, cfg.wavelet_band)?;
    let coarse = theorem51_experiment(&bmo_family(hs.base(), cfg.seed), &phi, &w, &hs, &fam)?;
    let refined = theorem51_experiment(&bmo_family(fine.base(), cfg.seed), &phi, &wf, &fine, &fam)?;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "carleson",
        &["id", "bmo", "carleson", "ratio", "bmo_refined", "carleson_refined", "ratio_refined", "relative_change", "gamma", "band_lo", "band_hi"],
    );
    let mut finite = true;
    let mut worst_change: f64 = 0.0;
    let mut ratios = Vec::new();
    for (a, b) in coarse.iter().zip(&refined) {
        let (ra, rb) = (a.ratio.unwrap_or(f64::NAN), b.ratio.unwrap_or(f64::NAN));
        finite &= ra.is_finite() && rb.is_finite();
        let change = (rb - ra).abs() / ra;
        worst_change = worst_change.max(change);
        ratios.push(ra);
        table.push(vec![
            a.id.clone().into(),
            a.bmo.into(),
            a.carleson.into(),
            ra.into(),
            b.bmo.into(),
            b.carleson.into(),
            rb.into(),
            change.into(),
            cfg.gamma.into(),
            cfg.wavelet_band.0.into(),
            cfg.wavelet_band.1.into(),
        ]);
    }
    out.series.push(Series { name: "carleson_ratio".into(), points: ratios.iter().enumerate().map(|(i, r)| (i as f64, *r)).collect() });
    out.check("ratios finite", finite, String::new());
    out.check("stable to 10% under refinement", worst_change <= 0.1, format!("worst change {worst_change}"));
    let s = spread(&ratios);
    out.check("ratio spread <= 50", s <= 50.0, format!("max/min {s}"));
    out.tables.push(table);
    Ok(out)
}

fn pairing(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (hs, w) = packet_grid(cfg)?;
    let packets = wave_packets(20, cfg.seed);
    let mut out = Outcome::default();
    let mut table = Table::new("pairing", &["id", "lhs", "rhs", "residual"]);
    let mut worst: f64 = 0.0;
    for (id, pair) in packets.chunks(2).enumerate() {
        let f = pair[0].sample(hs.base());
        let b = pair[1].sample(hs.base());
        let r = pairing_check(&f, &b, &w, &hs)?;
        worst = worst.max(r.residual);
        table.push(vec![id.into(), r.lhs.into(), r.rhs.into(), r.residual.into()]);
    }
    out.check("pairing residual <= 1e-6", worst <= 1e-6, format!("worst {worst:e}"));
    out.tables.push(table);
    Ok(out)
}

fn jn(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = spatial(cfg, 2.0, 1.0 / 128.0)?;
    let b = grid.sample(|x| truncated_log(x[0]));
    let lambdas: Vec<f64> = (0..=24).map(|i| 0.25 * i as f64).collect();
    let r = john_nirenberg_experiment(&b, &grid, &Ball::new([0.0, 0.0], 1.0), &lambdas)?;
    let mut out = Outcome::default();
    let mut table = Table::new("jn", &["lambda", "distribution"]);
    for (l, d) in r.lambdas.iter().zip(&r.distribution) {
        table.push(vec![(*l).into(), (*d).into()]);
    }
    let mut summary = Table::new("jn_summary", &["rate", "monotone", "decays"]);
    summary.push(vec![r.rate.into(), r.monotone.into(), r.decays.into()]);
    out.series.push(Series { name: "jn_distribution".into(), points: r.lambdas.iter().cloned().zip(r.distribution.iter().cloned()).collect() });
    out.check("distribution nonincreasing", r.monotone, String::new());
    out.check("exponential decay", r.decays, format!("rate {:?}", r.rate));
    out.tables.push(table);
    out.tables.push(summary);
    Ok(out)
}

fn lemma52(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let coarse = spatial(cfg, 2.0, 1.0 / 64.0)?;
    let fine = coarse.refined(2);
    let phi = growth(cfg, coarse.dim())?;
    let fam = dyadic_default(cfg);
    let (q0, _) = molecule_indices(&phi, coarse.dim())?;
    let epsilon = 1.0;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "lemma52",
        &["center", "delta", "lhs", "tail_bound", "rhs_scale", "ratio", "ratio_refined", "relative_change", "below_threshold"],
    );
    let fc = coarse.sample(|x| x[0].signum());
    let ff = fine.sample(|x| x[0].signum());
    let bc = bmo_phi_norm(&fc, &phi, &coarse, &fam)?;
    let bf = bmo_phi_norm(&ff, &phi, &fine, &fam)?;
    let mut worst_change: f64 = 0.0;
    let mut finite = true;
    let mut ratios = Vec::new();
    for c in [0.0, 0.1, -0.25, 0.3] {
        for delta in [0.05, 0.1, 0.25] {
            let a = lemma52_check(&fc, &coarse, [c, 0.0], delta, epsilon, &phi, q0, bc)?;
            let b = lemma52_check(&ff, &fine, [c, 0.0], delta, epsilon, &phi, q0, bf)?;
            let change = (b.ratio - a.ratio).abs() / a.ratio;
            finite &= a.ratio.is_finite() && b.ratio.is_finite();
            worst_change = worst_change.max(change);
            ratios.push(a.ratio);
            table.push(vec![
                c.into(),
                delta.into(),
                a.lhs.into(),
                a.tail_bound.into(),
                a.rhs_scale.into(),
                a.ratio.into(),
                b.ratio.into(),
                change.into(),
                a.below_threshold.into(),
            ]);
        }
    }
    out.series.push(Series { name: "lemma52_ratio".into(), points: ratios.iter().enumerate().map(|(i, r)| (i as f64, *r)).collect() });
    out.check("ratios finite", finite, String::new());
    out.check("stable to 10% under refinement", worst_change <= 0.1, format!("worst change {worst_change}"));
    out.tables.push(table);
    Ok(out)
}

fn plancherel(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let (hs, w) = packet_grid(cfg)?;
    let grid = hs.base();
    let mut out = Outcome::default();
    let mut table = Table::new("plancherel", &["id", "frequency", "ratio"]);
    let mut worst: f64 = 0.0;
    let mut points = Vec::new();
    for (id, p) in wave_packets(10, cfg.seed).iter().enumerate() {
        let f = p.sample(grid);
        let s = lusin_area(&f, &w, &hs, 1.0)?;
        let ratio = (lp_norm(grid, &s, 2.0) / lp_norm(grid, &f, 2.0)).powi(2);
        let expected = 2f64.powi(grid.dim() as i32) * if grid.dim() == 2 { std::f64::consts::PI / 4.0 } else { 1.0 };
        worst = worst.max((ratio - expected).abs() / expected);
        points.push((p.frequency, ratio));
        table.push(vec![id.into(), p.frequency.into(), ratio.into()]);
    }
    out.series.push(Series { name: "plancherel_ratio".into(), points });
    out.check("‖S f‖² / ‖f‖² within 1% of the cone volume", worst <= 0.01, format!("worst relative gap {worst:e}"));
    out.tables.push(table);
    Ok(out)
}
