use serde::{Deserialize, Serialize};

use super::Ensemble;
use crate::error::{invalid, Result};
use crate::numeric::stats::wilson_interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMode {
    /// `|X_t − X_0| ≤ u`.
    Endpoint,
    /// `sup_{s ≤ t} |X_s − X_0| ≤ u`, over grid times.
    RunningSup,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBall {
    pub probability: f64,
    /// 95% Wilson interval.
    pub lower: f64,
    pub upper: f64,
    pub hits: usize,
    pub trials: usize,
    /// Fewer than 10 hits; the interval is wide.
    pub few_hits: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfEstimate {
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

fn time_index(ensemble: &Ensemble, t: f64) -> Result<usize> {
    let first = ensemble.paths.first().ok_or_else(|| invalid("ensemble", "is empty"))?;
    first
        .index_of(t)
        .ok_or_else(|| invalid("t", format!("{t} is not on the ensemble grid")))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn small_ball_probability(ensemble: &Ensemble, t: f64, u: f64, mode: BallMode) -> Result<SmallBall> {
    if !(u > 0.0) {
        return Err(invalid("u", "radius must be positive"));
    }
    let k = time_index(ensemble, t)?;
    let hits = ensemble
        .paths
        .iter()
        .filter(|p| {
            let z = p.position(0);
            match mode {
                BallMode::Endpoint => dist(p.position(k), z) <= u,
                BallMode::RunningSup => (0..=k).all(|i| dist(p.position(i), z) <= u),
            }
        })
        .count();
    let n = ensemble.len();
    let (lower, upper) = wilson_interval(hits, n);
    Ok(SmallBall {
        probability: hits as f64 / n as f64,
        lower,
        upper,
        hits,
        trials: n,
        few_hits: hits < 10,
    })
}

/// Sample mean of `exp(i⟨ξ, X_t − X_0⟩)` with standard errors.
pub fn empirical_cf(ensemble: &Ensemble, t: f64, xi: &[f64]) -> Result<CfEstimate> {
    let k = time_index(ensemble, t)?;
    if xi.len() != ensemble.dim() {
        return Err(invalid("xi", "dimension mismatch"));
    }
    let n = ensemble.len() as f64;
    let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
    for p in &ensemble.paths {
        let (z, x) = (p.position(0), p.position(k));
        let u: f64 = xi.iter().zip(x.iter().zip(z)).map(|(f, (a, b))| f * (a - b)).sum();
        let (s, c) = u.sin_cos();
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    let (re, im) = (sc / n, ss / n);
    let var = |m2: f64, m: f64| ((m2 / n - m * m).max(0.0) * n / (n - 1.0).max(1.0)).sqrt() / n.sqrt();
    Ok(CfEstimate {
        re,
        im,
        se_re: var(sc2, re),
        se_im: var(ss2, im),
    })
}
