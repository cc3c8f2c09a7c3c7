//! `key=value` experiment configuration. Blank lines and `#` comments are
//! ignored; sections are key prefixes (`grid.`, `growth.`, `wavelet.`, `balls.`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mohardy_core::growth::{GrowthFunction, Orlicz, Weight};
use mohardy_core::weights::BallFamily;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} given twice")]
    Duplicate(String),
    #[error("bad value for {key}: {reason}")]
    Value { key: String, reason: String },
    #[error("unknown experiment {0:?} (see `mohardy list`)")]
    UnknownExperiment(String),
    #[error("missing key {0:?}")]
    Missing(String),
}

const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output",
    "gamma",
    "grid.n",
    "grid.L",
    "grid.h",
    "grid.t_min",
    "grid.rho",
    "grid.levels",
    "growth.kind",
    "growth.p",
    "growth.weight",
    "growth.a",
    "growth.orlicz",
    "growth.alpha",
    "growth.beta",
    "growth.gamma",
    "wavelet.s",
    "wavelet.band_lo",
    "wavelet.band_hi",
    "balls.family",
];

/// Grid block; absent fields fall back to each experiment's own defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridBlock {
    pub dim: Option<usize>,
    pub half_width: Option<f64>,
    pub spacing: Option<f64>,
    pub t_min: Option<f64>,
    pub ratio: Option<f64>,
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GrowthSpec {
    Identity,
    Power(f64),
    Product { weight: Weight, orlicz: Orlicz },
    Log { alpha: f64, beta: f64, gamma: f64 },
}

impl GrowthSpec {
    pub fn build(&self, dim: usize) -> mohardy_core::Result<GrowthFunction> {
        match *self {
            GrowthSpec::Identity => Ok(GrowthFunction::identity(dim)),
            GrowthSpec::Power(p) => GrowthFunction::power(dim, p),
            GrowthSpec::Product { weight, orlicz } => GrowthFunction::product(dim, weight, orlicz),
            GrowthSpec::Log { alpha, beta, gamma } => GrowthFunction::log_family(dim, alpha, beta, gamma),
        }
    }

    /// Short label for CSV columns.
    pub fn label(&self) -> String {
        match self {
            GrowthSpec::Identity => "t".into(),
            GrowthSpec::Power(p) => format!("t^{p}"),
            GrowthSpec::Product { weight, orlicz } => format!("{weight:?}*{orlicz:?}"),
            GrowthSpec::Log { alpha, beta, gamma } => format!("log({alpha},{beta},{gamma})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallFamilyKind {
    Dyadic,
    Intervals,
}

impl BallFamilyKind {
    pub fn family(&self) -> BallFamily {
        match self {
            BallFamilyKind::Dyadic => BallFamily::Dyadic,
            BallFamilyKind::Intervals => BallFamily::AllIntervals,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub gamma: f64,
    pub grid: GridBlock,
    pub growth: GrowthSpec,
    pub wavelet_s: usize,
    pub wavelet_band: (f64, f64),
    pub balls: Option<BallFamilyKind>,
}

impl ExperimentConfig {
    /// Defaults for the named experiment.
    pub fn named(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            seed: 0,
            output: None,
            gamma: 0.5,
            grid: GridBlock::default(),
            growth: GrowthSpec::Identity,
            wavelet_s: 3,
            wavelet_band: (1.0, std::f64::consts::E.powi(2)),
            balls: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
        }
        let experiment = map.get("experiment").cloned().ok_or_else(|| ConfigError::Missing("experiment".into()))?;
        if !crate::experiments::EXPERIMENTS.iter().any(|e| e.name == experiment) {
            return Err(ConfigError::UnknownExperiment(experiment));
        }
        let mut cfg = ExperimentConfig::named(&experiment);
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(v) = get("seed") {
            cfg.seed = parse_num(v, "seed")?;
        }
        cfg.output = get("output").map(PathBuf::from);
        if let Some(v) = get("gamma") {
            cfg.gamma = parse_num(v, "gamma")?;
            if !(cfg.gamma > 0.0 && cfg.gamma < 1.0) {
                return Err(bad("gamma", "must lie in (0, 1)"));
            }
        }
        cfg.grid = GridBlock {
            dim: get("grid.n").map(|v| parse_num(v, "grid.n")).transpose()?,
            half_width: get("grid.L").map(|v| parse_num(v, "grid.L")).transpose()?,
            spacing: get("grid.h").map(|v| parse_num(v, "grid.h")).transpose()?,
            t_min: get("grid.t_min").map(|v| parse_num(v, "grid.t_min")).transpose()?,
            ratio: get("grid.rho").map(|v| parse_num(v, "grid.rho")).transpose()?,
            levels: get("grid.levels").map(|v| parse_num(v, "grid.levels")).transpose()?,
        };
        if let Some(d) = cfg.grid.dim {
            if d != 1 && d != 2 {
                return Err(bad("grid.n", "dimension must be 1 or 2"));
            }
        }
        cfg.growth = parse_growth(&get)?;
        if let Some(v) = get("wavelet.s") {
            cfg.wavelet_s = parse_num(v, "wavelet.s")?;
        }
        if let Some(v) = get("wavelet.band_lo") {
            cfg.wavelet_band.0 = parse_num(v, "wavelet.band_lo")?;
        }
        if let Some(v) = get("wavelet.band_hi") {
            cfg.wavelet_band.1 = parse_num(v, "wavelet.band_hi")?;
        }
        if !(cfg.wavelet_band.0 > 0.0 && cfg.wavelet_band.1 > cfg.wavelet_band.0) {
            return Err(bad("wavelet.band_lo", "band must satisfy 0 < lo < hi"));
        }
        cfg.balls = match get("balls.family") {
            None => None,
            Some("dyadic") => Some(BallFamilyKind::Dyadic),
            Some("intervals") => Some(BallFamilyKind::Intervals),
            Some(other) => return Err(bad("balls.family", &format!("expected dyadic or intervals, got {other:?}"))),
        };
        Ok(cfg)
    }
}

fn bad(key: &str, reason: &str) -> ConfigError {
    ConfigError::Value { key: key.to_string(), reason: reason.to_string() }
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| bad(key, &format!("cannot parse {v:?}")))
}

fn parse_growth<'a>(get: &dyn Fn(&str) -> Option<&'a str>) -> Result<GrowthSpec, ConfigError> {
    let num = |k: &str, default: Option<f64>| -> Result<f64, ConfigError> {
        match get(k) {
            Some(v) => parse_num(v, k),
            None => default.ok_or_else(|| ConfigError::Missing(k.to_string())),
        }
    };
    let spec = match get("growth.kind").unwrap_or("identity") {
        "identity" => GrowthSpec::Identity,
        "power" => GrowthSpec::Power(num("growth.p", None)?),
        "product" => {
            let a = num("growth.a", Some(0.0))?;
            let weight = match get("growth.weight").unwrap_or("unit") {
                "unit" => Weight::Unit,
                "abs" => Weight::AbsPower(a),
                "bracket" => Weight::Bracket(a),
                other => return Err(bad("growth.weight", &format!("expected unit, abs or bracket, got {other:?}"))),
            };
            let p = num("growth.p", Some(1.0))?;
            let orlicz = match get("growth.orlicz").unwrap_or("power") {
                "power" => Orlicz::Power(p),
                "over_log" => Orlicz::PowerOverLog(p),
                "times_log" => Orlicz::PowerTimesLog(p),
                other => return Err(bad("growth.orlicz", &format!("expected power, over_log or times_log, got {other:?}"))),
            };
            GrowthSpec::Product { weight, orlicz }
        }
        "log" => GrowthSpec::Log {
            alpha: num("growth.alpha", None)?,
            beta: num("growth.beta", Some(1.0))?,
            gamma: num("growth.gamma", Some(0.0))?,
        },
        other => return Err(bad("growth.kind", &format!("expected identity, power, product or log, got {other:?}"))),
    };
    // surface the core validator's message as a config error
    spec.build(1).map_err(|e| bad("growth", &e.to_string()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# weights\nexperiment = indices\nseed=7\n\ngrowth.kind=product\ngrowth.weight=abs\ngrowth.a=0.5\ngrid.L=1 # half width\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, "indices");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.half_width, Some(1.0));
        assert_eq!(cfg.growth, GrowthSpec::Product { weight: Weight::AbsPower(0.5), orlicz: Orlicz::Power(1.0) });
    }

    #[test]
    fn rejects_unknown_keys_and_experiments() {
        assert!(matches!(ExperimentConfig::parse("experiment=indices\ngrid.q=1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ExperimentConfig::parse("experiment=nope"), Err(ConfigError::UnknownExperiment(_))));
        assert!(matches!(ExperimentConfig::parse("seed=1"), Err(ConfigError::Missing(_))));
        assert!(matches!(ExperimentConfig::parse("experiment=jn\nexperiment=jn"), Err(ConfigError::Duplicate(_))));
        assert!(matches!(ExperimentConfig::parse("experiment=jn\ngrowth.kind=power\ngrowth.p=3"), Err(ConfigError::Value { .. })));
    }
}
