use serde::{Deserialize, Serialize};

use super::energy::CLAMP_FLOOR;
use crate::error::{invalid, Result};
use crate::indices::{IndexEstimate, IndexKind};
use crate::numeric::stats::ols;
use crate::simulate::Ensemble;

/// Relative standard error above which a moment is flagged unstable.
const MAX_RELATIVE_SE: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentIndex {
    /// `value` is `α̂ = λ/|slope|`, `grid` the gaps and `envelope` the moments.
    pub index: IndexEstimate,
    pub lambda: f64,
    pub alpha_hat: f64,
    /// `exp(intercept)`: the fitted moment at gap 1.
    pub constant: f64,
    pub moments: Vec<f64>,
    pub relative_se: Vec<f64>,
    /// Samples per gap (replicas times disjoint windows).
    pub samples: Vec<usize>,
    /// `λ` itself when the fitted slope is at least −1, a lower bound for `β′`.
    pub beta_prime_lower: Option<f64>,
    pub unstable: bool,
}

/// Negative moments `E|X_{s+g} − X_s|^{−λ}` per gap, averaged over replicas
/// and the disjoint windows `[s, s+g]` of each path, and their log-log slope.
pub fn moment_index(ensemble: &Ensemble, lambda: f64, gaps: &[f64]) -> Result<MomentIndex> {
    let dim = ensemble.dim();
    if ensemble.is_empty() {
        return Err(invalid("ensemble", "is empty"));
    }
    if !(lambda >= 0.0 && lambda < dim as f64) {
        return Err(invalid("lambda", format!("{lambda} not in [0, {dim})")));
    }
    if gaps.len() < 2 || gaps.iter().any(|g| !(*g > 0.0)) {
        return Err(invalid("gaps", "need two or more positive gaps"));
    }
    let (gmin, gmax) = gaps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), g| (a.min(*g), b.max(*g)));
    if (gmax / gmin).log10() < 2.0 - 1e-9 {
        return Err(invalid("gaps", "must span at least two decades"));
    }
    let times = ensemble.times();
    let mut moments = Vec::with_capacity(gaps.len());
    let mut relative_se = Vec::with_capacity(gaps.len());
    let mut samples = Vec::with_capacity(gaps.len());
    let mut clamped = 0usize;
    for &g in gaps {
        let first = &ensemble.paths[0];
        let mut starts = Vec::new();
        let mut s = 0.0;
        while s + g <= times[times.len() - 1] * (1.0 + 1e-12) {
            let a = first
                .index_of(s)
                .ok_or_else(|| invalid("gaps", format!("time {s} is off the grid")))?;
            let b = first
                .index_of(s + g)
                .ok_or_else(|| invalid("gaps", format!("time {} is off the grid", s + g)))?;
            starts.push((a, b));
            s += g;
        }
        if starts.is_empty() {
            return Err(invalid("gaps", format!("gap {g} exceeds the horizon")));
        }
        let (mut sum, mut sq, mut n) = (0.0, 0.0, 0usize);
        for p in &ensemble.paths {
            for &(a, b) in &starts {
                let mut r = p
                    .position(a)
                    .iter()
                    .zip(p.position(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                if r < CLAMP_FLOOR {
                    r = CLAMP_FLOOR;
                    clamped += 1;
                }
                let v = r.powf(-lambda);
                sum += v;
                sq += v * v;
                n += 1;
            }
        }
        let m = sum / n as f64;
        let var = (sq / n as f64 - m * m).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
        moments.push(m);
        relative_se.push((var / n as f64).sqrt() / m);
        samples.push(n);
    }
    let lx: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let ly: Vec<f64> = moments.iter().map(|m| m.ln()).collect();
    let fit = ols(&lx, &ly);
    let mut warnings = Vec::new();
    let unstable = relative_se.iter().any(|s| *s > MAX_RELATIVE_SE);
    if unstable {
        warnings.push("moment estimator unstable; increase replicas".into());
    }
    if clamped > 0 {
        warnings.push(format!("{clamped} increments clamped at {CLAMP_FLOOR:e}"));
    }
    let alpha_hat = if fit.slope < 0.0 {
        lambda / -fit.slope
    } else {
        f64::INFINITY
    };
    Ok(MomentIndex {
        index: IndexEstimate {
            value: alpha_hat,
            kind: IndexKind::BetaPrime,
            grid: gaps.to_vec(),
            envelope: moments.clone(),
            slope: fit.slope,
            r_squared: fit.r_squared,
            monotone_repaired: false,
            degenerate: !alpha_hat.is_finite(),
            capped: false,
            warnings,
        },
        lambda,
        alpha_hat,
        constant: fit.intercept.exp(),
        moments,
        relative_se,
        samples,
        beta_prime_lower: (fit.slope >= -1.0).then_some(lambda),
        unstable,
    })
}
