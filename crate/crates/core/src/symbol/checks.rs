//! Grid checks of growth, sector and non-oscillation conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{FrequencyGrid, StateGrid};
use super::measure::{EvalMode, LevyMeasure};
use super::triplet::StateTriplet;
use super::{eval_symbol, SymbolValue};
use crate::error::{invalid, Error, Result};
use crate::numeric::stats::ols;
use crate::numeric::Tolerance;

/// Slopes below this are treated as flat.
const FLAT_SLOPE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Smallest `c` with `|p(x,ξ)| ≤ c(1 + |ξ|²)` on the grid; `∞` when growth
    /// is flagged as unbounded.
    pub c_bound: f64,
    pub unbounded: bool,
    /// Magnitude where the ratio is largest.
    pub argmax_xi: f64,
    pub max_abs_at_zero: f64,
    /// `max |p(x,0)| ≤ 10⁻¹²`.
    pub conservative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    /// `max |Im p| / Re p` over the retained grid points.
    pub kappa: f64,
    pub holds: bool,
    /// Points dropped because `Re p < 10⁻¹⁴`.
    pub excluded: usize,
    /// Smallest frequency magnitude of the grid; `κ̂` may depend on it.
    pub grid_floor: f64,
    /// Per-magnitude maxima of the ratio.
    pub per_magnitude: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonOscillationReport {
    pub beta_hat: f64,
    pub alpha_hat: f64,
    /// `sup_ℓ q^U(rℓ) / inf_ℓ q^L(rℓ)` per grid radius.
    pub ratios: Vec<f64>,
    /// `(1 − cos 1) q^L ≤ Re p ≤ 2 q^U` at every grid point.
    pub sandwich_holds: bool,
    /// Ratio keeps growing over the grid: the measure has too little small-jump
    /// activity for a finite constant.
    pub low_activity: bool,
}

/// Evaluates `p` on `x_grid × xi_grid`, returning one row per magnitude,
/// each row listing `(x index, direction index, value)` in grid order.
/// State-independent triplets are evaluated at the first state only.
pub fn evaluate_grid(
    triplet: &StateTriplet,
    xi_grid: &FrequencyGrid,
    x_grid: &StateGrid,
) -> Result<Vec<Vec<SymbolValue>>> {
    let xs: &[Vec<f64>] = if triplet.is_state_independent() {
        &x_grid.points[..x_grid.points.len().min(1)]
    } else {
        &x_grid.points
    };
    if xs.is_empty() {
        return Err(invalid("x_grid", "grid is empty"));
    }
    xi_grid
        .magnitudes
        .par_iter()
        .map(|&r| {
            let mut row = Vec::with_capacity(xs.len() * xi_grid.directions.len());
            for x in xs {
                for j in 0..xi_grid.directions.len() {
                    row.push(eval_symbol(triplet, x, &xi_grid.point(r, j))?);
                }
            }
            Ok(row)
        })
        .collect()
}

fn top_decade_start(mags: &[f64]) -> usize {
    let top = mags[mags.len() - 1] / 10.0;
    mags.partition_point(|&r| r < top * (1.0 - 1e-12))
}

pub fn check_standing_assumptions(
    triplet: &StateTriplet,
    xi_grid: &FrequencyGrid,
    x_grid: &StateGrid,
) -> Result<AssumptionReport> {
    xi_grid.validate(4.0)?;
    let rows = evaluate_grid(triplet, xi_grid, x_grid)?;
    let ratios: Vec<f64> = rows
        .iter()
        .zip(&xi_grid.magnitudes)
        .map(|(row, r)| row.iter().map(|p| p.abs()).fold(0.0, f64::max) / (1.0 + r * r))
        .collect();
    let (imax, cmax) = ratios
        .iter()
        .enumerate()
        .fold((0, 0.0), |(i, m), (j, &v)| if v > m { (j, v) } else { (i, m) });

    let start = top_decade_start(&xi_grid.magnitudes);
    let tail = &ratios[start..];
    let mut unbounded = false;
    if tail.len() >= 3 && tail.windows(2).all(|w| w[1] > w[0]) {
        let lx: Vec<f64> = xi_grid.magnitudes[start..].iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
        unbounded = ols(&lx, &ly).slope > FLAT_SLOPE;
    }

    let d = triplet.dim();
    let zero = vec![0.0; d];
    let max_abs_at_zero = x_grid
        .points
        .iter()
        .map(|x| eval_symbol(triplet, x, &zero).map(|p| p.abs()))
        .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))?;
    Ok(AssumptionReport {
        c_bound: if unbounded { f64::INFINITY } else { cmax },
        unbounded,
        argmax_xi: xi_grid.magnitudes[imax],
        max_abs_at_zero,
        conservative: max_abs_at_zero <= 1e-12,
    })
}

pub fn check_sector(triplet: &StateTriplet, xi_grid: &FrequencyGrid, x_grid: &StateGrid) -> Result<SectorReport> {
    xi_grid.validate(0.0)?;
    let rows = evaluate_grid(triplet, xi_grid, x_grid)?;
    let mut excluded = 0;
    let mut per_magnitude = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut m: f64 = 0.0;
        for p in row {
            if p.re < 1e-14 {
                excluded += 1;
            } else {
                m = m.max(p.im.abs() / p.re);
            }
        }
        per_magnitude.push(m);
    }
    let kappa = per_magnitude.iter().copied().fold(0.0, f64::max);
    let start = top_decade_start(&xi_grid.magnitudes);
    let below = per_magnitude[..start].iter().copied().fold(0.0, f64::max);
    let top = per_magnitude[start..].iter().copied().fold(0.0, f64::max);
    let holds = kappa.is_finite() && (start == 0 || top <= 1.05 * below + 1e-12);
    Ok(SectorReport {
        kappa,
        holds,
        excluded,
        grid_floor: xi_grid.magnitudes[0],
        per_magnitude,
    })
}

/// `(q^U(ξ), q^L(ξ))` for a measure.
pub fn compute_qu_ql(measure: &LevyMeasure, xi: &[f64]) -> Result<(f64, f64)> {
    if xi.len() != measure.dim() || xi.iter().any(|v| !v.is_finite()) {
        return Err(invalid("xi", "must be a finite vector of the measure dimension"));
    }
    measure.q_upper_lower(xi)
}

pub fn check_non_oscillation(
    measure: &LevyMeasure,
    r_grid: &[f64],
    sphere_grid: &[Vec<f64>],
) -> Result<NonOscillationReport> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r >= 1.0 && r.is_finite())) {
        return Err(invalid("r_grid", "radii must be finite and at least 1"));
    }
    if sphere_grid.is_empty() || sphere_grid.iter().any(|l| l.len() != measure.dim()) {
        return Err(invalid("sphere_grid", "need unit directions of the measure dimension"));
    }
    let gap = 1.0 - 1f64.cos();
    let rows: Vec<Result<(f64, bool)>> = r_grid
        .par_iter()
        .map(|&r| {
            let mut sup_u: f64 = 0.0;
            let mut inf_l = f64::INFINITY;
            let mut sandwich = true;
            for l in sphere_grid {
                let xi: Vec<f64> = l.iter().map(|v| v * r).collect();
                let (u, lo) = measure.q_upper_lower(&xi)?;
                let q = measure.exponent(&xi, EvalMode::Auto, Tolerance::default())?.0;
                sup_u = sup_u.max(u);
                inf_l = inf_l.min(lo);
                let slack = 1e-9 * q.abs().max(1e-300);
                sandwich &= gap * lo <= q + slack && q <= 2.0 * u + slack;
            }
            if !(inf_l > 0.0) {
                return Err(Error::DegenerateMeasure(format!("inf q^L vanishes at radius {r}")));
            }
            Ok((sup_u / inf_l, sandwich))
        })
        .collect();
    let mut ratios = Vec::with_capacity(rows.len());
    let mut sandwich_holds = true;
    for row in rows {
        let (ratio, s) = row?;
        ratios.push(ratio);
        sandwich_holds &= s;
    }
    let beta_hat = ratios.iter().copied().fold(0.0, f64::max);
    let low_activity = ratios.len() >= 3
        && ratios.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-6))
        && ratios[ratios.len() - 1] > 1.05 * ratios[0];
    Ok(NonOscillationReport {
        beta_hat,
        alpha_hat: 2.0 / beta_hat,
        ratios,
        sandwich_holds,
        low_activity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::JumpLaw;

    #[test]
    fn brownian_growth_constant() {
        let t = StateTriplet::brownian(1).unwrap();
        let r =
            check_standing_assumptions(&t, &FrequencyGrid::dyadic(1, -10, 20), &StateGrid::default_probe(1)).unwrap();
        assert!(!r.unbounded);
        assert!((r.c_bound - 0.5).abs() < 1e-6);
        assert_eq!(r.max_abs_at_zero, 0.0);
        assert!(r.conservative);
    }

    #[test]
    fn short_grid_is_rejected() {
        let t = StateTriplet::brownian(1).unwrap();
        assert!(
            check_standing_assumptions(&t, &FrequencyGrid::dyadic(1, 0, 10), &StateGrid::default_probe(1)).is_err()
        );
    }

    #[test]
    fn non_oscillation_degenerate_for_atoms() {
        let m = LevyMeasure::compound_poisson(
            1,
            1.0,
            JumpLaw::PointMasses {
                atoms: vec![vec![1.0]],
                weights: vec![1.0],
            },
        )
        .unwrap();
        let e = check_non_oscillation(&m, &[1.0, 4.0], &[vec![1.0], vec![-1.0]]);
        assert!(matches!(e, Err(Error::DegenerateMeasure(_))));
    }
}
