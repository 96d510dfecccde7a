//! Generalized Blumenthal–Getoor indices at infinity, estimated as log-log
//! slopes of sup/inf envelopes of the symbol over the top two decades of a
//! frequency grid.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::stats::ols;
use crate::symbol::{FrequencyGrid, StateGrid, StateTriplet};

/// Slopes below this are reported as index 0.
pub const DEGENERATE_SLOPE: f64 = 0.05;
/// Width of the fitting window in decades.
const FIT_DECADES: f64 = 2.0;
/// Relative gap between raw data and its running maximum that triggers a warning.
const MONOTONE_WARNING: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    BetaUpperStar,
    BetaLower,
    DeltaStar,
    BetaPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: f64,
    pub kind: IndexKind,
    /// Abscissae of the fit: frequency magnitudes, or time gaps for `BetaPrime`.
    pub grid: Vec<f64>,
    /// The (repaired) envelope the slope was fitted to.
    pub envelope: Vec<f64>,
    /// Slope of log envelope against log grid, i.e. decades per decade.
    pub slope: f64,
    pub r_squared: f64,
    /// The running maximum changed the raw data.
    pub monotone_repaired: bool,
    /// Slope below the degeneracy threshold, or envelope not positive.
    pub degenerate: bool,
    /// Value lowered to keep the defining ordering of the indices.
    pub capped: bool,
    pub warnings: Vec<String>,
}

/// All three at-infinity indices from a single grid evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    pub beta_upper_star: IndexEstimate,
    pub beta_lower: IndexEstimate,
    pub delta_star: IndexEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedBounds {
    pub lower: f64,
    pub upper: f64,
}

fn running_max(raw: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    raw.iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}

fn fit(kind: IndexKind, grid: &[f64], raw: &[f64], repair: bool) -> IndexEstimate {
    let envelope = if repair { running_max(raw) } else { raw.to_vec() };
    let mut warnings = Vec::new();
    let monotone_repaired = repair && envelope.iter().zip(raw).any(|(e, r)| e != r);
    if repair {
        let worst = envelope
            .iter()
            .zip(raw)
            .filter(|(e, _)| **e > 0.0)
            .map(|(e, r)| (e - r) / e)
            .fold(0.0, f64::max);
        if worst > MONOTONE_WARNING {
            warnings.push(format!(
                "raw envelope falls {:.1}% below its running maximum",
                100.0 * worst
            ));
        }
    }
    let top = grid[grid.len() - 1] / 10f64.powf(FIT_DECADES);
    let start = grid.partition_point(|&r| r < top * (1.0 - 1e-12));
    let window = &envelope[start..];
    let positive = window.iter().all(|v| *v > 0.0 && v.is_finite());
    let (slope, r_squared) = if positive && window.len() >= 2 {
        let lx: Vec<f64> = grid[start..].iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = window.iter().map(|v| v.ln()).collect();
        let f = ols(&lx, &ly);
        (f.slope, f.r_squared)
    } else {
        (f64::NAN, f64::NAN)
    };
    let degenerate = !positive || !(slope >= DEGENERATE_SLOPE);
    if !positive {
        warnings.push("envelope is not positive at large frequencies".into());
    }
    IndexEstimate {
        value: if degenerate { 0.0 } else { slope },
        kind,
        grid: grid.to_vec(),
        envelope,
        slope,
        r_squared,
        monotone_repaired,
        degenerate,
        capped: false,
        warnings,
    }
}

fn check_grid(grid: &FrequencyGrid, dim: usize) -> Result<()> {
    grid.validate(3.0)?;
    if grid.dim() != dim {
        return Err(invalid(
            "xi_magnitudes",
            "direction dimension does not match the triplet",
        ));
    }
    if grid.magnitudes[grid.magnitudes.len() - 1] < 1e4 {
        return Err(invalid("xi_magnitudes", "grid must end at or above 1e4"));
    }
    Ok(())
}

/// Estimates `β*_∞`, `β_∞` and `δ*_∞` together.
///
/// `δ*_∞` is capped at `β*_∞` and `β_∞` at `δ*_∞`, which the definitions
/// guarantee; a cap that bites is recorded in the `capped` flag.
pub fn estimate_indices(triplet: &StateTriplet, xi_grid: &FrequencyGrid, x_grid: &StateGrid) -> Result<IndexSet> {
    check_grid(xi_grid, triplet.dim())?;
    let rows = crate::symbol::evaluate_grid(triplet, xi_grid, x_grid)?;
    let sup_abs: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().map(|p| p.abs()).fold(0.0, f64::max))
        .collect();
    let inf_re: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().map(|p| p.re).fold(f64::INFINITY, f64::min))
        .collect();
    let mags = &xi_grid.magnitudes;

    let beta_upper_star = fit(IndexKind::BetaUpperStar, mags, &sup_abs, true);
    let mut delta_star = fit(IndexKind::DeltaStar, mags, &inf_re, true);
    let mut beta_lower = fit(IndexKind::BetaLower, mags, &inf_re, false);

    if delta_star.value > beta_upper_star.value {
        delta_star.value = beta_upper_star.value;
        delta_star.capped = true;
    }
    if delta_star.degenerate && !beta_lower.degenerate {
        beta_lower.degenerate = true;
        beta_lower.warnings.push("delta_star is degenerate".into());
    }
    if beta_lower.degenerate {
        beta_lower.value = 0.0;
    } else if beta_lower.value > delta_star.value {
        beta_lower.value = delta_star.value;
        beta_lower.capped = true;
    }
    Ok(IndexSet {
        beta_upper_star,
        beta_lower,
        delta_star,
    })
}

pub fn estimate_beta_upper_star(
    triplet: &StateTriplet,
    xi_grid: &FrequencyGrid,
    x_grid: &StateGrid,
) -> Result<IndexEstimate> {
    Ok(estimate_indices(triplet, xi_grid, x_grid)?.beta_upper_star)
}

pub fn estimate_beta_lower(
    triplet: &StateTriplet,
    xi_grid: &FrequencyGrid,
    x_grid: &StateGrid,
) -> Result<IndexEstimate> {
    Ok(estimate_indices(triplet, xi_grid, x_grid)?.beta_lower)
}

pub fn estimate_delta_star(
    triplet: &StateTriplet,
    xi_grid: &FrequencyGrid,
    x_grid: &StateGrid,
) -> Result<IndexEstimate> {
    Ok(estimate_indices(triplet, xi_grid, x_grid)?.delta_star)
}

/// `lower = min(β_∞, d)·dim E`, `upper = min(d, β*_∞·dim E)`. A degenerate
/// lower index gives the trivial lower bound 0.
pub fn predicted_dimension_bounds(
    beta_lower: &IndexEstimate,
    beta_upper: &IndexEstimate,
    dim_e: f64,
    d: usize,
) -> Result<PredictedBounds> {
    if !(0.0..=1.0).contains(&dim_e) {
        return Err(invalid("dim_e", "must lie in [0, 1]"));
    }
    let d = d as f64;
    let bl = if beta_lower.degenerate { 0.0 } else { beta_lower.value };
    let lower = bl.min(d) * dim_e;
    let upper = d.min(beta_upper.value * dim_e);
    if lower > upper + 1e-12 {
        return Err(Error::InconsistentBounds { lower, upper });
    }
    Ok(PredictedBounds { lower, upper })
}

/// Bounds for a state-independent (Lévy) triplet, where the lower index is
/// the growth index of `Re ψ`: `lower = min(d, β_∞·dim E)`,
/// `upper = min(d, β*_∞·dim E)`.
pub fn predicted_levy_bounds(
    beta_lower: &IndexEstimate,
    beta_upper: &IndexEstimate,
    dim_e: f64,
    d: usize,
) -> Result<PredictedBounds> {
    let feller = predicted_dimension_bounds(beta_lower, beta_upper, dim_e, d)?;
    let bl = if beta_lower.degenerate { 0.0 } else { beta_lower.value };
    let lower = (d as f64).min(bl * dim_e).max(feller.lower);
    if lower > feller.upper + 1e-12 {
        return Err(Error::InconsistentBounds {
            lower,
            upper: feller.upper,
        });
    }
    Ok(PredictedBounds {
        lower,
        upper: feller.upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::JumpLaw;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::dyadic(1, 0, 20)
    }

    fn probe() -> StateGrid {
        StateGrid::default_probe(1)
    }

    #[test]
    fn brownian_indices_are_two() {
        let s = estimate_indices(&StateTriplet::brownian(1).unwrap(), &grid(), &probe()).unwrap();
        for e in [&s.beta_upper_star, &s.beta_lower, &s.delta_star] {
            assert!((e.value - 2.0).abs() < 0.02, "{e:?}");
        }
    }

    #[test]
    fn compound_poisson_is_degenerate() {
        let t = StateTriplet::compound_poisson(
            1,
            1.0,
            JumpLaw::PointMasses {
                atoms: vec![vec![1.0], vec![-1.0]],
                weights: vec![0.5, 0.5],
            },
        )
        .unwrap();
        let s = estimate_indices(&t, &grid(), &probe()).unwrap();
        assert!(s.beta_lower.degenerate && s.beta_lower.value == 0.0);
        assert!(s.beta_upper_star.degenerate);
    }

    #[test]
    fn bounds_arithmetic() {
        let mk = |v: f64| IndexEstimate {
            value: v,
            kind: IndexKind::BetaLower,
            grid: vec![],
            envelope: vec![],
            slope: v,
            r_squared: 1.0,
            monotone_repaired: false,
            degenerate: false,
            capped: false,
            warnings: vec![],
        };
        let b = predicted_dimension_bounds(&mk(1.5), &mk(1.5), 1.0, 1).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let dim_c = 2f64.ln() / 3f64.ln();
        let b = predicted_levy_bounds(&mk(1.2), &mk(1.2), dim_c, 1).unwrap();
        assert!((b.lower - 1.2 * dim_c).abs() < 1e-12 && (b.upper - b.lower).abs() < 1e-12);
        assert!((b.lower - 0.757116).abs() < 1e-6);
        let b = predicted_dimension_bounds(&mk(1.2), &mk(1.2), dim_c, 1).unwrap();
        assert!((b.lower - dim_c).abs() < 1e-12);
        let b = predicted_dimension_bounds(&mk(0.5), &mk(0.5), dim_c, 1).unwrap();
        assert!((b.lower - 0.315465).abs() < 1e-6 && (b.upper - 0.315465).abs() < 1e-6);
        let b = predicted_dimension_bounds(&mk(1.2), &mk(1.6), 1.0, 1).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(matches!(
            predicted_dimension_bounds(&mk(0.9), &mk(0.5), 1.0, 1),
            Err(Error::InconsistentBounds { .. })
        ));
    }

    #[test]
    fn short_grid_rejected() {
        let t = StateTriplet::brownian(1).unwrap();
        assert!(estimate_indices(&t, &FrequencyGrid::dyadic(1, 0, 10), &probe()).is_err());
    }
}
