// SPDX-License-Identifier: Apache-2.0

//! Run configuration: an optional TOML file whose sections all default,
//! overridden by command-line flags and resolved into an explicit
//! [`RunConfig`] that is written back into every manifest.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FractionGrid, ModelConfig, DEFAULT_TIME_POINTS, DEFAULT_T_MAX_GAMMA};

/// A complex number given either as a plain real or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexInput> for Complex64 {
    fn from(c: ComplexInput) -> Self {
        match c {
            ComplexInput::Real(x) => Complex64::new(x, 0.0),
            ComplexInput::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub bph: BphSection,
    #[serde(default)]
    pub concentration: ConcentrationSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_env: Option<usize>,
    pub omega0: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_bar: Option<f64>,
    /// `gamma_bar` in units of `gamma`; exclusive with `gamma_bar`.
    pub gamma_bar_ratio: Option<f64>,
    pub alpha0: Option<ComplexInput>,
    pub branch_a: Option<ComplexInput>,
    pub branch_b: Option<ComplexInput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub fractions: Option<FractionGrid>,
    pub delta: Option<f64>,
    pub time_points: Option<usize>,
    pub t_max_gamma: Option<f64>,
    pub nm_samples: Option<usize>,
    pub pair_variance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BphSection {
    pub t_gamma: Option<Vec<f64>>,
    pub fractions: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSection {
    pub fraction: Option<f64>,
    pub samples: Option<usize>,
    pub width: Option<f64>,
    pub total: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub t_gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n_env: Option<usize>,
    pub alpha0: Option<ComplexInput>,
    pub gamma: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
    pub t_max: Option<f64>,
    pub cutoff: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub gamma_bar_ratio: Option<f64>,
    pub fractions: Option<FractionGrid>,
    pub samples: Option<usize>,
    pub t_max_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BphSettings {
    /// Evaluation times in units of `1 / decay_rate`.
    pub t_gamma: Vec<f64>,
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSettings {
    pub fraction: f64,
    pub samples: usize,
    /// Support width of the box profiles as a fraction of the bath.
    pub width: f64,
    /// Total excitation of the box profiles.
    pub total: f64,
    /// Bath sizes for the box profiles.
    pub sizes: Vec<usize>,
    /// Time of the simulated profile in units of `1 / decay_rate`.
    pub t_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub n_env: usize,
    pub alpha0: Complex64,
    pub gamma: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Last evaluation time in raw units.
    pub t_max: f64,
    /// `None` picks the smallest cutoff with truncation deficit below 1e-10.
    pub cutoff: Option<usize>,
}

impl OracleSettings {
    /// Small model sharing the main model's centre frequency and branches.
    pub fn model(&self, base: &ModelConfig) -> ModelConfig {
        let mut m = ModelConfig {
            n_env: self.n_env,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            gamma: self.gamma,
            gamma_bar: None,
            alpha0: self.alpha0,
            ..base.clone()
        };
        m.time_grid = (0..self.points)
            .map(|i| match self.points {
                1 => 0.0,
                n => self.t_max * i as f64 / (n - 1) as f64,
            })
            .collect();
        m
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// `gamma_bar / gamma` values visited by `nonmarkov` and `sweep`.
    pub sweep_ratios: Vec<f64>,
    pub bph: BphSettings,
    pub concentration: ConcentrationSettings,
    pub oracle: OracleSettings,
}

pub const DEFAULT_SWEEP_RATIOS: [f64; 6] = [1.0, 10.0, 25.0, 50.0, 75.0, 100.0];

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Self> {
        let mut model = ModelConfig::default();
        let m = file.model;
        set(&mut model.n_env, m.n_env);
        set(&mut model.omega0, m.omega0);
        set(&mut model.omega_min, m.omega_min);
        set(&mut model.omega_max, m.omega_max);
        set(&mut model.gamma, m.gamma);
        set(&mut model.alpha0, m.alpha0.map(Into::into));
        set(&mut model.branch_a, m.branch_a.map(Into::into));
        set(&mut model.branch_b, m.branch_b.map(Into::into));
        let ratio = flags.gamma_bar_ratio.or(m.gamma_bar_ratio);
        model.gamma_bar = match (m.gamma_bar, ratio) {
            (Some(_), Some(_)) if flags.gamma_bar_ratio.is_none() => {
                return Err(Error::Config(
                    "set either model.gamma_bar or model.gamma_bar_ratio, not both".into(),
                ))
            }
            (_, Some(r)) => Some(r * model.gamma),
            (g, None) => g,
        };

        let r = file.run;
        set(&mut model.master_seed, flags.seed.or(r.seed));
        set(&mut model.mc_samples, flags.samples.or(r.samples));
        set(&mut model.fraction_grid, flags.fractions.or(r.fractions));
        set(&mut model.delta, r.delta);
        set(&mut model.nm_samples, r.nm_samples);
        set(&mut model.pair_variance, r.pair_variance);
        let points = r.time_points.unwrap_or(DEFAULT_TIME_POINTS);
        let t_max_gamma = flags
            .t_max_gamma
            .or(r.t_max_gamma)
            .unwrap_or(DEFAULT_T_MAX_GAMMA);
        if points < 2 {
            return Err(Error::Config(format!("run.time_points must be at least 2, got {points}")));
        }
        if !(t_max_gamma > 0.0 && t_max_gamma.is_finite()) {
            return Err(Error::Config(format!("t_max_gamma must be positive, got {t_max_gamma}")));
        }
        if model.gamma > 0.0 && model.bandwidth() > 0.0 {
            model.time_grid = model.uniform_time_grid(points, t_max_gamma);
        }

        let sweep_ratios = match (ratio, file.sweep.ratios) {
            (Some(r), _) if flags.gamma_bar_ratio.is_some() => vec![r],
            (_, Some(rs)) => rs,
            _ => DEFAULT_SWEEP_RATIOS.to_vec(),
        };

        let bph = BphSettings {
            t_gamma: file.bph.t_gamma.unwrap_or_else(|| vec![8.0]),
            fractions: file
                .bph
                .fractions
                .unwrap_or_else(|| (1..=20).map(|k| k as f64 / 20.0).collect()),
        };

        let c = file.concentration;
        let concentration = ConcentrationSettings {
            fraction: c.fraction.unwrap_or(0.1),
            samples: c.samples.unwrap_or(1000),
            width: c.width.unwrap_or(0.5),
            total: c.total.unwrap_or(9.0),
            sizes: c.sizes.unwrap_or_else(|| vec![900, 1800]),
            t_gamma: c.t_gamma.unwrap_or(8.0),
        };

        let o = file.oracle;
        let oracle = OracleSettings {
            n_env: o.n_env.unwrap_or(2),
            alpha0: o.alpha0.map_or(Complex64::new(0.8, 0.0), Into::into),
            gamma: o.gamma.unwrap_or(0.15),
            omega_min: o.omega_min.unwrap_or(0.9),
            omega_max: o.omega_max.unwrap_or(1.1),
            points: o.points.unwrap_or(20),
            t_max: o.t_max.unwrap_or(60.0),
            cutoff: o.cutoff,
        };

        let cfg = RunConfig {
            model,
            sweep_ratios,
            bph,
            concentration,
            oracle,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        self.model.validate()?;
        if self.sweep_ratios.is_empty() || self.sweep_ratios.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return fail("sweep.ratios must be a non-empty list of non-negative numbers".into());
        }
        let b = &self.bph;
        if b.t_gamma.is_empty() || b.t_gamma.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return fail("bph.t_gamma must be a non-empty list of non-negative times".into());
        }
        if b.fractions.is_empty() || b.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return fail("bph.fractions must be a non-empty list in (0, 1]".into());
        }
        let c = &self.concentration;
        if !(c.fraction > 0.0 && c.fraction <= 1.0) {
            return fail(format!("concentration.fraction must lie in (0, 1], got {}", c.fraction));
        }
        if c.samples < 2 {
            return fail("concentration.samples must be at least 2".into());
        }
        if !(c.width > 0.0 && c.width <= 1.0) {
            return fail(format!("concentration.width must lie in (0, 1], got {}", c.width));
        }
        if !(c.total > 0.0 && c.total.is_finite()) {
            return fail("concentration.total must be positive".into());
        }
        if c.sizes.contains(&0) {
            return fail("concentration.sizes must be positive".into());
        }
        if !(c.t_gamma >= 0.0 && c.t_gamma.is_finite()) {
            return fail("concentration.t_gamma must be non-negative".into());
        }
        let o = &self.oracle;
        if !(1..=3).contains(&o.n_env) {
            return fail(format!("oracle.n_env must be 1, 2 or 3, got {}", o.n_env));
        }
        if o.alpha0.norm() > 1.0 {
            return fail(format!("oracle.alpha0 must satisfy |alpha0| <= 1, got {}", o.alpha0.norm()));
        }
        if o.points < 1 || !(o.t_max > 0.0 && o.t_max.is_finite()) {
            return fail("oracle.points must be positive and oracle.t_max positive".into());
        }
        self.oracle.model(&self.model).validate()
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
