use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{image_points, DimensionEstimate, Method, TimeSet};
use crate::error::{invalid, Result};
use crate::numeric::stats::ols;
use crate::simulate::{replica_seed, SamplePath};

/// Distances below this are clamped.
pub const CLAMP_FLOOR: f64 = 1e-12;
/// Fraction of clamped pairs above which the geometry is degenerate.
const CLAMP_WARNING: f64 = 1e-3;
/// Levels with at most this many pairs are enumerated exactly.
const EXACT_PAIRS: u64 = 1 << 20;
/// Pairs sampled on the other levels.
const SAMPLED_PAIRS: usize = 1 << 18;
/// Width of the log-distance histogram bins.
const BIN_WIDTH: f64 = 0.005;
const ROW_BLOCK: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub lambda: f64,
    pub value: f64,
    pub pairs: u64,
    pub clamped: u64,
    /// More than 0.1% of the pairs were clamped.
    pub degenerate: bool,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `Σ_i Σ_{j≠i} w_i w_j |x_i − x_j|^{−λ}` for every `λ` in `lambdas`.
/// Row blocks run in parallel and are reduced in block order.
fn weighted_energies(points: &[f64], dim: usize, weights: &[f64], lambdas: &[f64], floor: f64) -> (Vec<f64>, u64) {
    let n = weights.len();
    let blocks: Vec<(Vec<f64>, u64)> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; lambdas.len()];
            let mut clamped = 0;
            for i in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(n) {
                let xi = &points[i * dim..(i + 1) * dim];
                for j in i + 1..n {
                    let mut r = dist(xi, &points[j * dim..(j + 1) * dim]);
                    if r < floor {
                        r = floor;
                        clamped += 1;
                    }
                    let l = r.ln();
                    let w = 2.0 * weights[i] * weights[j];
                    for (a, lam) in acc.iter_mut().zip(lambdas) {
                        *a += w * (-lam * l).exp();
                    }
                }
            }
            (acc, clamped)
        })
        .collect();
    let mut total = vec![0.0; lambdas.len()];
    let mut clamped = 0;
    for (acc, c) in blocks {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
        clamped += c;
    }
    (total, clamped)
}

/// Riesz energy of the image of `set` under `path` with respect to the
/// natural measure of `set`, diagonal excluded.
pub fn energy_integral(path: &SamplePath, set: &TimeSet, lambda: f64) -> Result<EnergyValue> {
    Ok(energy_profile(path, set, &[lambda], CLAMP_FLOOR)?.remove(0))
}

/// Energies for several exponents from a single pass over the pairs.
pub fn energy_profile(path: &SamplePath, set: &TimeSet, lambdas: &[f64], floor: f64) -> Result<Vec<EnergyValue>> {
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(invalid("lambda", "must be positive"));
    }
    set.validate()?;
    let pts = image_points(path, set)?;
    let w = set.weights();
    let (values, clamped) = weighted_energies(&pts, path.dim, &w, lambdas, floor);
    let n = w.len() as u64;
    let pairs = n * (n - 1) / 2;
    Ok(values
        .into_iter()
        .zip(lambdas)
        .map(|(value, &lambda)| EnergyValue {
            lambda,
            value,
            pairs,
            clamped,
            degenerate: clamped as f64 > CLAMP_WARNING * pairs as f64,
        })
        .collect())
}

/// How boundedness of the energy under refinement is decided.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacityRule {
    /// Splits the energy of the finest construction into contributions of
    /// pairs first separated at level `ℓ` of the binary construction tree.
    /// The energy is bounded iff these contributions decay geometrically:
    /// the fitted log-rate over levels `min_level..=depth` is below `ln theta`.
    IncrementRate { theta: f64, min_level: u32 },
    /// Direct energies at several depths; bounded iff every ratio between
    /// consecutive depths is at most `threshold`.
    EnergyRatio { threshold: f64, depths: Vec<u32> },
}

impl Default for CapacityRule {
    fn default() -> Self {
        CapacityRule::IncrementRate {
            theta: 1.0,
            min_level: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityOptions {
    pub rule: CapacityRule,
    /// Exponents probed, increasing, step at most 0.05. Empty means
    /// `0.05, 0.10, …` strictly below the ambient dimension.
    pub lambdas: Vec<f64>,
    pub floor: f64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            rule: CapacityRule::default(),
            lambdas: Vec::new(),
            floor: CLAMP_FLOOR,
        }
    }
}

impl CapacityOptions {
    pub fn lambda_grid(&self, dim: usize) -> Vec<f64> {
        if !self.lambdas.is_empty() {
            return self.lambdas.clone();
        }
        let n = 20 * dim - 1;
        (1..=n).map(|k| k as f64 * 0.05).collect()
    }
}

/// Mean of `|Δ|^{−λ}` over the pairs first separated at each level of the
/// binary tree of `points` (`2^depth` points in address order).
struct LevelMoments {
    /// `moments[ℓ-1][k]`.
    moments: Vec<Vec<f64>>,
    /// Fraction of clamped pairs per level.
    clamped: Vec<f64>,
}

fn level_moments(points: &[f64], dim: usize, depth: u32, lambdas: &[f64], floor: f64, seed: u64) -> LevelMoments {
    let lo = floor.ln();
    let mut moments = Vec::with_capacity(depth as usize);
    let mut clamped_frac = Vec::with_capacity(depth as usize);
    for level in 1..=depth {
        let mut clamped = 0u64;
        let half = 1usize << (depth - level);
        let blocks = 1usize << (level - 1);
        let count = blocks as u64 * (half as u64) * (half as u64);
        let mut hist: Vec<u64> = Vec::new();
        let add = |r: f64, hist: &mut Vec<u64>, clamped: &mut u64| {
            let r = if r < floor {
                *clamped += 1;
                floor
            } else {
                r
            };
            let b = ((r.ln() - lo) / BIN_WIDTH) as usize;
            if b >= hist.len() {
                hist.resize(b + 1, 0);
            }
            hist[b] += 1;
        };
        let at = |i: usize| &points[i * dim..(i + 1) * dim];
        let used = if count <= EXACT_PAIRS {
            for b in 0..blocks {
                let start = 2 * b * half;
                for i in start..start + half {
                    for j in start + half..start + 2 * half {
                        add(dist(at(i), at(j)), &mut hist, &mut clamped);
                    }
                }
            }
            count
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(seed, level as u64));
            for _ in 0..SAMPLED_PAIRS {
                let start = 2 * rng.random_range(0..blocks) * half;
                let i = start + rng.random_range(0..half);
                let j = start + half + rng.random_range(0..half);
                add(dist(at(i), at(j)), &mut hist, &mut clamped);
            }
            SAMPLED_PAIRS as u64
        };
        clamped_frac.push(clamped as f64 / used as f64);
        let m = lambdas
            .iter()
            .map(|lam| {
                hist.iter()
                    .enumerate()
                    .filter(|(_, c)| **c > 0)
                    .map(|(b, &c)| c as f64 * (-lam * (lo + (b as f64 + 0.5) * BIN_WIDTH)).exp())
                    .sum::<f64>()
                    / used as f64
            })
            .collect();
        moments.push(m);
    }
    LevelMoments {
        moments,
        clamped: clamped_frac,
    }
}

/// Fewest tree levels entering the rate fit.
const MIN_FIT_LEVELS: u32 = 4;

/// Fitted log-rates of the level contributions and their R², per exponent,
/// over levels `min_level..=top`.
fn level_rates(lm: &LevelMoments, lambdas: &[f64], min_level: u32, top: u32) -> Vec<(f64, f64)> {
    let levels: Vec<f64> = (min_level..=top).map(|l| l as f64).collect();
    (0..lambdas.len())
        .map(|k| {
            let y: Vec<f64> = (min_level..=top)
                .map(|l| -(l as f64) * std::f64::consts::LN_2 + lm.moments[l as usize - 1][k].ln())
                .collect();
            let f = ols(&levels, &y);
            (f.slope, f.r_squared)
        })
        .collect()
}

/// Lower capacity-type estimate of the dimension of `path(set)`: the largest
/// exponent whose energy stays bounded as the construction is refined.
pub fn capacity_dim_lower(path: &SamplePath, set: &TimeSet, opts: &CapacityOptions) -> Result<DimensionEstimate> {
    set.validate()?;
    let lambdas = opts.lambda_grid(path.dim);
    if lambdas.is_empty()
        || lambdas.iter().any(|l| !(*l > 0.0 && *l < path.dim as f64))
        || lambdas
            .windows(2)
            .any(|w| !(w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-12))
    {
        return Err(invalid(
            "lambdas",
            "must increase in steps of at most 0.05 inside (0, d)",
        ));
    }
    if let TimeSet::Union { parts } = set {
        // a measure on one component is a measure on the union
        let parts: Vec<DimensionEstimate> = parts
            .iter()
            .map(|p| capacity_dim_lower(path, p, opts))
            .collect::<Result<_>>()?;
        let mut best = parts.into_iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
        best.warnings.push("union: best component".into());
        return Ok(best);
    }
    let mut warnings = Vec::new();
    let (bounded, rates, degenerate) = match &opts.rule {
        CapacityRule::IncrementRate { theta, min_level } => {
            if !(*theta > 0.0) {
                return Err(invalid("theta", "must be positive"));
            }
            let depth = set.depth();
            if *min_level == 0 || depth < min_level + MIN_FIT_LEVELS - 1 {
                return Err(invalid(
                    "depth",
                    format!("need at least {} levels, have {depth}", min_level + MIN_FIT_LEVELS - 1),
                ));
            }
            let pts = image_points(path, set)?;
            let seed = replica_seed(path.seed ^ 0x5EED_CAFE, path.replica);
            let lm = level_moments(&pts, path.dim, depth, &lambdas, opts.floor, seed);
            // fine levels whose pairs hit the clamp floor are left out of the fit
            let top = lm
                .clamped
                .iter()
                .position(|c| *c > CLAMP_WARNING)
                .map_or(depth, |i| i as u32);
            if top < depth {
                warnings.push(format!("levels above {top} excluded: pairs below the clamp floor"));
            }
            let top = top.max(*min_level);
            let degenerate = top < min_level + MIN_FIT_LEVELS - 1;
            let rates = if degenerate {
                vec![(0.0, 0.0); lambdas.len()]
            } else {
                level_rates(&lm, &lambdas, *min_level, top)
            };
            let cut = theta.ln();
            let bounded: Vec<bool> = rates.iter().map(|(s, _)| *s < cut).collect();
            let shifted: Vec<(f64, f64)> = rates.iter().map(|(s, r)| (s - cut, *r)).collect();
            (bounded, Some(shifted), degenerate)
        }
        CapacityRule::EnergyRatio { threshold, depths } => {
            if depths.len() < 2 || depths.windows(2).any(|w| w[1] <= w[0]) || *depths.last().unwrap() > set.depth() {
                return Err(invalid(
                    "depths",
                    "need two or more increasing depths up to the set depth",
                ));
            }
            let profiles: Vec<Vec<EnergyValue>> = depths
                .iter()
                .map(|&d| energy_profile(path, &set.at_depth(d), &lambdas, opts.floor))
                .collect::<Result<_>>()?;
            let bounded = (0..lambdas.len())
                .map(|k| profiles.windows(2).all(|w| w[1][k].value <= threshold * w[0][k].value))
                .collect();
            (bounded, None, profiles.last().unwrap()[0].degenerate)
        }
    };
    let window = (lambdas[0], *lambdas.last().unwrap());
    if degenerate {
        warnings.push("degenerate geometry: too many pairs below the clamp floor".into());
        return Ok(DimensionEstimate {
            value: 0.0,
            method: Method::Capacity,
            window,
            slope: 0.0,
            r_squared: 0.0,
            dispersion: 0.0,
            replicas: 1,
            low_confidence: true,
            warnings,
        });
    }
    let first_unbounded = bounded.iter().position(|b| !b);
    if let Some(j) = first_unbounded {
        if bounded[j..].iter().any(|b| *b) {
            warnings.push("bounded exponents are not contiguous".into());
        }
    } else {
        warnings.push("energy bounded across the whole exponent grid".into());
    }
    let (value, slope, r_squared) = match (first_unbounded, &rates) {
        (Some(0), Some(r)) => (0.0, r[0].0, r[0].1),
        (Some(0), None) => (0.0, 0.0, 0.0),
        (Some(j), Some(r)) => {
            // zero crossing of the rate between the last bounded and first unbounded exponent
            let (s0, s1) = (r[j - 1].0, r[j].0);
            let frac = if s1 > s0 {
                (-s0 / (s1 - s0)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (
                lambdas[j - 1] + frac * (lambdas[j] - lambdas[j - 1]),
                r[j - 1].0,
                r[j - 1].1,
            )
        }
        (Some(j), None) => (lambdas[j - 1], 0.0, 0.0),
        (None, Some(r)) => (window.1, r[r.len() - 1].0, r[r.len() - 1].1),
        (None, None) => (window.1, 0.0, 0.0),
    };
    Ok(DimensionEstimate {
        value,
        method: Method::Capacity,
        window,
        slope,
        r_squared,
        dispersion: 0.0,
        replicas: 1,
        low_confidence: false,
        warnings,
    })
}
