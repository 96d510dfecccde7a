//! JSON run configuration.
//!
//! Every field except the family is optional. Unknown fields are rejected.
//!
//! ```json
//! {
//!   "family": {"name": "stable", "dim": 1, "alpha": 1.5},
//!   "time_set": {"kind": "cantor", "ratio": 0.3333333333333333, "depth": 16},
//!   "seed": 42,
//!   "frequency": {"lo_exp": 0, "hi_exp": 17},
//!   "probe": {"points_per_axis": 41, "half_width": 10.0},
//!   "time": {"step": 0.00390625, "horizon": 1.0},
//!   "replicas": {"dimension": 64, "probability": 10000, "paths": 2},
//!   "simulation": {"epsilon": 0.001, "euler_step": 0.000244140625},
//!   "box_counting": {"min_count": 100, "max_fraction": 0.1, "min_r_squared": 0.98},
//!   "capacity": {"rule": {"rule": "increment_rate", "theta": 1.0, "min_level": 4}},
//!   "p_grid": [1.0, 1.05, 1.1],
//!   "tolerance": {"dimension": 0.12},
//!   "matrix": [{"family": {"name": "stable", "alpha": 0.5}, "time_set": {"kind": "interval", "depth": 16}}]
//! }
//! ```
//!
//! Families: `brownian {dim}`, `stable {dim, alpha, scale}`,
//! `compound_poisson {dim, rate, law}`, `tempered_stable {dim, alpha, theta,
//! intensity}`, `tabulated {dim, radii, densities}` and
//! `stable_like {dim, alpha_lo, alpha_hi}`, with `dim` defaulting to 1.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fractal::{BoxOptions, CapacityOptions, TimeSet};
use crate::simulate::{SimOptions, TimeGrid};
use crate::symbol::{Angular, FrequencyGrid, JumpLaw, LevyMeasure, StateGrid, StateTriplet};
use crate::verify::{VerifyOptions, DEFAULT_DIMENSION_REPLICAS, DEFAULT_TOLERANCE};

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

/// A named process family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Brownian {
        #[serde(default = "one")]
        dim: usize,
    },
    Stable {
        #[serde(default = "one")]
        dim: usize,
        alpha: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    CompoundPoisson {
        #[serde(default = "one")]
        dim: usize,
        rate: f64,
        law: JumpLaw,
    },
    TemperedStable {
        #[serde(default = "one")]
        dim: usize,
        alpha: f64,
        theta: f64,
        #[serde(default = "unit")]
        intensity: f64,
    },
    Tabulated {
        #[serde(default = "one")]
        dim: usize,
        radii: Vec<f64>,
        densities: Vec<f64>,
    },
    /// `α(x) = alpha_lo + (alpha_hi − alpha_lo)(1 + sin x₁)/2`.
    StableLike {
        #[serde(default = "one")]
        dim: usize,
        alpha_lo: f64,
        alpha_hi: f64,
    },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Brownian { .. } => "brownian",
            FamilySpec::Stable { .. } => "stable",
            FamilySpec::CompoundPoisson { .. } => "compound_poisson",
            FamilySpec::TemperedStable { .. } => "tempered_stable",
            FamilySpec::Tabulated { .. } => "tabulated",
            FamilySpec::StableLike { .. } => "stable_like",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FamilySpec::Brownian { dim }
            | FamilySpec::Stable { dim, .. }
            | FamilySpec::CompoundPoisson { dim, .. }
            | FamilySpec::TemperedStable { dim, .. }
            | FamilySpec::Tabulated { dim, .. }
            | FamilySpec::StableLike { dim, .. } => *dim,
        }
    }

    /// Stability parameters as a short string for reports.
    pub fn alpha_params(&self) -> String {
        match self {
            FamilySpec::Stable { alpha, .. } | FamilySpec::TemperedStable { alpha, .. } => format!("alpha={alpha}"),
            FamilySpec::StableLike { alpha_lo, alpha_hi, .. } => format!("alpha=[{alpha_lo};{alpha_hi}]"),
            FamilySpec::Brownian { .. } => "alpha=2".into(),
            FamilySpec::CompoundPoisson { .. } | FamilySpec::Tabulated { .. } => "-".into(),
        }
    }

    pub fn build(&self) -> Result<StateTriplet> {
        let dim = self.dim();
        if dim == 0 {
            return Err(crate::error::invalid("dim", "must be at least 1"));
        }
        let zeros = |n: usize| vec![0.0; n];
        match self.clone() {
            FamilySpec::Brownian { dim } => StateTriplet::brownian(dim),
            FamilySpec::Stable { dim, alpha, scale } => StateTriplet::stable(dim, alpha, scale),
            FamilySpec::CompoundPoisson { dim, rate, law } => StateTriplet::compound_poisson(dim, rate, law),
            FamilySpec::TemperedStable {
                dim,
                alpha,
                theta,
                intensity,
            } => StateTriplet::levy(
                zeros(dim),
                zeros(dim * dim),
                LevyMeasure::tempered_stable(dim, alpha, theta, intensity)?,
            ),
            FamilySpec::Tabulated { dim, radii, densities } => StateTriplet::levy(
                zeros(dim),
                zeros(dim * dim),
                LevyMeasure::tabulated(dim, radii, densities, Angular::Uniform)?,
            ),
            FamilySpec::StableLike {
                dim,
                alpha_lo,
                alpha_hi,
            } => StateTriplet::stable_like(dim, alpha_lo, alpha_hi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencySpec {
    /// Magnitudes `2^lo_exp ..= 2^hi_exp`.
    pub lo_exp: i32,
    pub hi_exp: i32,
}

impl Default for FrequencySpec {
    fn default() -> Self {
        Self { lo_exp: 0, hi_exp: 17 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub points_per_axis: usize,
    pub half_width: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            points_per_axis: 41,
            half_width: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub step: f64,
    pub horizon: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            step: 2f64.powi(-8),
            horizon: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplicaSpec {
    /// Paths per dimension estimate.
    pub dimension: usize,
    /// Paths per probability or moment estimate.
    pub probability: usize,
    /// Paths written by `simulate`.
    pub paths: usize,
}

impl Default for ReplicaSpec {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION_REPLICAS,
            probability: 10_000,
            paths: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    pub dimension: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_TOLERANCE,
        }
    }
}

/// One cell of an experiment matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCell {
    pub family: FamilySpec,
    pub time_set: TimeSet,
    #[serde(default)]
    pub replicas: Option<usize>,
}

fn default_p_grid() -> Vec<f64> {
    (10..=60).map(|k| k as f64 * 0.05).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub time_set: Option<TimeSet>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub frequency: FrequencySpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub replicas: ReplicaSpec,
    #[serde(default)]
    pub simulation: SimOptions,
    #[serde(default)]
    pub box_counting: BoxOptions,
    #[serde(default)]
    pub capacity: CapacityOptions,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub matrix: Vec<MatrixCell>,
}

fn config_error(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Prefixes the parameter name of a validation error with a field path.
fn at(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => config_error(format!("{prefix}.{name}"), reason),
        Error::Config { path, reason } => config_error(format!("{prefix}.{path}"), reason),
        other => config_error(prefix, other.to_string()),
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(
                if path == "." { "(root)".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a file; also returns the SHA-256 of its bytes.
    pub fn load(path: &Path) -> Result<(RunConfig, String)> {
        let bytes = fs::read(path).map_err(|e| config_error(path.display().to_string(), e.to_string()))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| config_error("(root)", "not valid UTF-8"))?;
        Ok((RunConfig::from_json(&text)?, sha256_hex(&bytes)))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(f) = &self.family {
            f.build().map_err(|e| at("family", e))?;
        }
        if let Some(s) = &self.time_set {
            s.validate().map_err(|e| at("time_set", e))?;
        }
        let f = self.frequency;
        if f.hi_exp <= f.lo_exp || (f.hi_exp - f.lo_exp) as f64 * 2f64.log10() < 4.0 || 2f64.powi(f.hi_exp) < 1e4 {
            return Err(config_error(
                "frequency",
                "need at least four decades ending at or above 1e4",
            ));
        }
        if self.probe.points_per_axis == 0 || !(self.probe.half_width > 0.0) {
            return Err(config_error("probe", "need a positive point count and half width"));
        }
        self.time_grid().validate().map_err(|e| at("time", e))?;
        if !(self.simulation.epsilon > 0.0) {
            return Err(config_error("simulation.epsilon", "must be positive"));
        }
        if !(self.simulation.euler_step > 0.0 && self.simulation.euler_step <= 1e-2) {
            return Err(config_error("simulation.euler_step", "must lie in (0, 1e-2]"));
        }
        let r = self.replicas;
        if r.dimension == 0 || r.probability == 0 || r.paths == 0 {
            return Err(config_error("replicas", "counts must be positive"));
        }
        if !(self.tolerance.dimension >= 0.0) {
            return Err(config_error("tolerance.dimension", "must be nonnegative"));
        }
        let b = self.box_counting;
        if b.min_count < 2 || !(b.max_fraction > 0.0 && b.max_fraction <= 0.5) {
            return Err(config_error(
                "box_counting",
                "need min_count ≥ 2 and max_fraction in (0, 0.5]",
            ));
        }
        let l = &self.capacity.lambdas;
        if l.iter().any(|v| !(*v > 0.0)) || l.windows(2).any(|w| !(w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-12)) {
            return Err(config_error(
                "capacity.lambdas",
                "must be positive and increase in steps of at most 0.05",
            ));
        }
        if self.p_grid.is_empty()
            || self.p_grid.iter().any(|p| !(*p > 0.0))
            || self.p_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(config_error("p_grid", "must be positive and increasing"));
        }
        for (i, c) in self.matrix.iter().enumerate() {
            c.family.build().map_err(|e| at(&format!("matrix[{i}].family"), e))?;
            c.time_set
                .validate()
                .map_err(|e| at(&format!("matrix[{i}].time_set"), e))?;
            if c.replicas == Some(0) {
                return Err(config_error(format!("matrix[{i}].replicas"), "must be positive"));
            }
        }
        Ok(())
    }

    /// The family, or a configuration error naming the missing field.
    pub fn require_family(&self) -> Result<&FamilySpec> {
        self.family
            .as_ref()
            .ok_or_else(|| config_error("family", "required by this command"))
    }

    pub fn require_time_set(&self) -> Result<&TimeSet> {
        self.time_set
            .as_ref()
            .ok_or_else(|| config_error("time_set", "required by this command"))
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::Uniform {
            step: self.time.step,
            horizon: self.time.horizon,
        }
    }

    pub fn frequency_grid(&self, dim: usize) -> FrequencyGrid {
        FrequencyGrid::dyadic(dim, self.frequency.lo_exp, self.frequency.hi_exp)
    }

    pub fn state_grid(&self, dim: usize) -> StateGrid {
        StateGrid::uniform(dim, self.probe.points_per_axis, self.probe.half_width)
    }

    /// Verification settings for a process of dimension `dim`.
    pub fn verify_options(&self, dim: usize) -> VerifyOptions {
        let mut o = VerifyOptions::new(self.seed);
        o.replicas = self.replicas.dimension;
        o.tolerance = self.tolerance.dimension;
        o.xi_grid = Some(self.frequency_grid(dim));
        o.x_grid = Some(self.state_grid(dim));
        o.simulation = self.simulation.clone();
        o.box_options = self.box_counting;
        o.capacity = self.capacity.clone();
        o
    }
}
