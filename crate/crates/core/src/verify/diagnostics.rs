use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fractal::{moment_index, MomentIndex};
use crate::numeric::stats::{median, ols, wilson_interval};
use crate::simulate::Ensemble;

/// Fewest replicas accepted by the probability diagnostics.
pub const MIN_PROBABILITY_REPLICAS: usize = 10_000;
/// Samples within one bandwidth below which the KDE is flagged.
const MIN_SAMPLES_PER_BANDWIDTH: usize = 30;

/// Smallest ratio between the largest and smallest density time: six octaves.
const MIN_TIME_SPAN: f64 = 64.0;

fn span(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    if lo > 0.0 {
        hi / lo
    } else {
        0.0
    }
}

fn displacements(ensemble: &Ensemble, t: f64) -> Result<Vec<f64>> {
    let first = ensemble.paths.first().ok_or_else(|| invalid("ensemble", "is empty"))?;
    let k = first
        .index_of(t)
        .ok_or_else(|| invalid("times", format!("{t} is not on the ensemble grid")))?;
    Ok(ensemble
        .paths
        .iter()
        .map(|p| {
            p.position(k)
                .iter()
                .zip(p.position(0))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityScalingReport {
    pub times: Vec<f64>,
    /// Kernel estimates of `p(t, x, x)`.
    pub densities: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub slope: f64,
    pub expected_slope: f64,
    pub r_squared: f64,
    /// Times where fewer than 30 samples fall within one bandwidth.
    pub undersmoothed: Vec<f64>,
}

impl DensityScalingReport {
    pub fn relative_error(&self) -> f64 {
        ((self.slope - self.expected_slope) / self.expected_slope).abs()
    }
}

/// Gaussian kernel estimate of the transition density on the diagonal at each
/// time, with bandwidth `c t^{1/α} N^{−1/5}`, and its log-log slope in `t`.
/// `c` is the median over times of `median|X_t − X_0| / t^{1/α}`.
pub fn check_density_scaling(ensemble: &Ensemble, times: &[f64], alpha_expected: f64) -> Result<DensityScalingReport> {
    if ensemble.len() < MIN_PROBABILITY_REPLICAS {
        return Err(invalid("replicas", format!("need at least {MIN_PROBABILITY_REPLICAS}")));
    }
    if span(times) < MIN_TIME_SPAN * (1.0 - 1e-9) {
        return Err(invalid("times", "must span at least six octaves"));
    }
    if !(alpha_expected > 0.0 && alpha_expected <= 2.0) {
        return Err(invalid("alpha_expected", "must lie in (0, 2]"));
    }
    let d = ensemble.dim() as i32;
    let n = ensemble.len() as f64;
    let samples: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| displacements(ensemble, t))
        .collect::<Result<_>>()?;
    let scale = median(
        &times
            .iter()
            .zip(&samples)
            .map(|(t, s)| median(s) / t.powf(1.0 / alpha_expected))
            .collect::<Vec<_>>(),
    );
    if !(scale > 0.0) {
        return Err(invalid("ensemble", "displacements vanish"));
    }
    let norm = (2.0 * PI).powf(d as f64 / 2.0);
    let mut densities = Vec::with_capacity(times.len());
    let mut bandwidths = Vec::with_capacity(times.len());
    let mut undersmoothed = Vec::new();
    for (&t, s) in times.iter().zip(&samples) {
        let h = scale * t.powf(1.0 / alpha_expected) * n.powf(-0.2);
        let sum: f64 = s.iter().map(|r| (-0.5 * (r / h) * (r / h)).exp()).sum();
        densities.push(sum / (n * norm * h.powi(d)));
        bandwidths.push(h);
        if s.iter().filter(|r| **r <= h).count() < MIN_SAMPLES_PER_BANDWIDTH {
            undersmoothed.push(t);
        }
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = densities.iter().map(|p| p.ln()).collect();
    let fit = ols(&lx, &ly);
    Ok(DensityScalingReport {
        times: times.to_vec(),
        densities,
        bandwidths,
        slope: fit.slope,
        expected_slope: -(d as f64) / alpha_expected,
        r_squared: fit.r_squared,
        undersmoothed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallProbe {
    pub t: f64,
    pub u: f64,
    /// `P(|X_t − x| ≤ u)` and its 95% interval.
    pub endpoint: (f64, f64, f64),
    /// Smallest `c` with `P(|X_t−x| ≤ u) ≤ c P(sup_{r≤t}|X_r−x| ≤ cu)`; infinite
    /// when none in the scan works.
    pub c: f64,
    pub sup_hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallReport {
    pub probes: Vec<SmallBallProbe>,
    /// Largest per-probe constant.
    pub c_empirical: f64,
    pub c_probe: f64,
    pub holds: bool,
    pub warnings: Vec<String>,
}

const C_SCAN_MAX: f64 = 10.0;
const C_SCAN_STEP: f64 = 0.01;

/// Estimates the smallest constant in the comparison between endpoint and
/// running-supremum small-ball probabilities at each time `times[i]` and
/// each radius of `radii[i]`. The endpoint side uses its lower 95% bound and
/// the supremum side its upper bound.
pub fn check_small_ball_comparison(
    ensemble: &Ensemble,
    times: &[f64],
    radii: &[Vec<f64>],
    c_probe: f64,
) -> Result<SmallBallReport> {
    if ensemble.is_empty() {
        return Err(invalid("ensemble", "is empty"));
    }
    if radii.len() != times.len() || radii.iter().flatten().any(|u| !(*u > 0.0)) {
        return Err(invalid("radii", "one list of positive radii per time"));
    }
    let first = &ensemble.paths[0];
    let n = ensemble.len();
    let mut probes = Vec::new();
    let mut warnings = Vec::new();
    for (&t, radii) in times.iter().zip(radii) {
        let k = first
            .index_of(t)
            .ok_or_else(|| invalid("times", format!("{t} is not on the ensemble grid")))?;
        let mut ends = Vec::with_capacity(n);
        let mut sups = Vec::with_capacity(n);
        for p in &ensemble.paths {
            let z = p.position(0);
            let d = |i: usize| {
                p.position(i)
                    .iter()
                    .zip(z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            };
            ends.push(d(k));
            sups.push((0..=k).map(d).fold(0.0, f64::max));
        }
        sups.sort_by(f64::total_cmp);
        for &u in radii {
            let hits = ends.iter().filter(|r| **r <= u).count();
            let (lo, hi) = wilson_interval(hits, n);
            let mut c = f64::INFINITY;
            let mut sup_hits = 0;
            let steps = ((C_SCAN_MAX - 1.0) / C_SCAN_STEP).round() as usize;
            for s in 0..=steps {
                let cc = 1.0 + s as f64 * C_SCAN_STEP;
                let h = sups.partition_point(|v| *v <= cc * u);
                let (_, upper) = wilson_interval(h, n);
                if lo <= cc * upper {
                    c = cc;
                    sup_hits = h;
                    break;
                }
            }
            if sups.partition_point(|v| *v <= u) == 0 {
                warnings.push(format!("no running-sup hits at t={t}, u={u}; enlarge the radius"));
            }
            probes.push(SmallBallProbe {
                t,
                u,
                endpoint: (hits as f64 / n as f64, lo, hi),
                c,
                sup_hits,
            });
        }
    }
    let c_empirical = probes.iter().map(|p| p.c).fold(1.0, f64::max);
    Ok(SmallBallReport {
        probes,
        c_empirical,
        c_probe,
        holds: c_empirical <= c_probe,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub lambda: f64,
    pub slope: f64,
    pub expected_slope: f64,
    /// Fitted moment at gap 1.
    pub constant: f64,
    pub passes: bool,
    pub detail: MomentIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub alpha: f64,
    pub rows: Vec<MomentRow>,
    /// Constants increase with `λ`.
    pub constant_growth: bool,
    pub passes: bool,
}

/// Slack allowed below the predicted slope `−λ/α`.
const MOMENT_SLACK: f64 = 0.05;

/// Checks `E|X_t − X_s|^{−λ} ≲ (t − s)^{−λ/α}` through the fitted slope and
/// reports the constants.
pub fn check_moment_inequality(ensemble: &Ensemble, lambdas: &[f64], gaps: &[f64], alpha: f64) -> Result<MomentReport> {
    let d = ensemble.dim() as f64;
    let cap = d.min(alpha) - 0.1;
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && *l <= cap + 1e-12)) {
        return Err(invalid(
            "lambdas",
            format!("each must lie in (0, min(d, α) − 0.1] = (0, {cap}]"),
        ));
    }
    let rows: Vec<MomentRow> = lambdas
        .iter()
        .map(|&lambda| {
            let m = moment_index(ensemble, lambda, gaps)?;
            let expected = -lambda / alpha;
            Ok(MomentRow {
                lambda,
                slope: m.index.slope,
                expected_slope: expected,
                constant: m.constant,
                passes: m.index.slope >= expected - MOMENT_SLACK,
                detail: m,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MomentReport {
        alpha,
        constant_growth: rows.windows(2).all(|w| w[1].constant >= w[0].constant),
        passes: rows.iter().all(|r| r.passes),
        rows,
    })
}
