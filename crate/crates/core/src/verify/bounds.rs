use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fractal::{
    box_counting_dim, capacity_dim_lower, image_points, BoxOptions, CapacityOptions, DimensionEstimate, TimeSet,
};
use crate::indices::{estimate_indices, predicted_dimension_bounds, predicted_levy_bounds, IndexSet, PredictedBounds};
use crate::simulate::{simulate_path, SimOptions};
use crate::symbol::{check_standing_assumptions, AssumptionReport, FrequencyGrid, StateGrid, StateTriplet};

/// Default pass/fail tolerance of the dimension comparison.
pub const DEFAULT_TOLERANCE: f64 = 0.12;
/// Default replicas per dimension estimate.
pub const DEFAULT_DIMENSION_REPLICAS: usize = 64;
/// Box and capacity medians further apart than this are flagged.
const DISAGREEMENT: f64 = 0.15;

/// Settings of a dimension-bound verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub replicas: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Defaults to magnitudes `2^0..2^17` with the default directions.
    pub xi_grid: Option<FrequencyGrid>,
    /// Defaults to the default probe grid.
    pub x_grid: Option<StateGrid>,
    pub simulation: SimOptions,
    pub box_options: BoxOptions,
    pub capacity: CapacityOptions,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            replicas: DEFAULT_DIMENSION_REPLICAS,
            tolerance: DEFAULT_TOLERANCE,
            seed,
            xi_grid: None,
            x_grid: None,
            simulation: SimOptions::default(),
            box_options: BoxOptions::default(),
            capacity: CapacityOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub process: String,
    pub time_set: TimeSet,
    pub dim_e: f64,
    pub assumptions: AssumptionReport,
    pub indices: IndexSet,
    pub predicted: PredictedBounds,
    /// The triplet is state independent and the sharper Lévy lower bound
    /// `min(d, β_∞·dim E)` was used.
    pub levy_form: bool,
    pub box_estimate: DimensionEstimate,
    pub capacity_estimate: DimensionEstimate,
    pub tolerance: f64,
    pub pass: bool,
    pub replicas: usize,
    pub seed: u64,
    /// Box and capacity medians differ by more than 0.15.
    pub estimators_disagree: bool,
    pub warnings: Vec<String>,
    /// Wall-clock seconds; not serialized so that reports are reproducible.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl BoundReport {
    /// Largest replica dispersion of the two estimators.
    pub fn dispersion(&self) -> f64 {
        self.box_estimate.dispersion.max(self.capacity_estimate.dispersion)
    }
}

/// Predicted interval from the indices, then box and capacity estimates of
/// the dimension of `X(E)` over independent replicas. The run passes when
/// both medians lie in `[lower − tol, upper + tol]`.
pub fn verify_dimension_bounds(triplet: &StateTriplet, set: &TimeSet, opts: &VerifyOptions) -> Result<BoundReport> {
    let started = Instant::now();
    set.validate()?;
    if opts.replicas == 0 {
        return Err(invalid("replicas", "must be positive"));
    }
    if !(opts.tolerance >= 0.0) {
        return Err(invalid("tolerance", "must be nonnegative"));
    }
    let d = triplet.dim();
    let xi_grid = opts.xi_grid.clone().unwrap_or_else(|| FrequencyGrid::dyadic(d, 0, 17));
    let x_grid = opts.x_grid.clone().unwrap_or_else(|| StateGrid::default_probe(d));
    let assumptions = check_standing_assumptions(triplet, &xi_grid, &x_grid)?;
    if assumptions.unbounded || !assumptions.conservative {
        return Err(invalid("triplet", "fails the growth or conservativeness assumption"));
    }
    let indices = estimate_indices(triplet, &xi_grid, &x_grid)?;
    let dim_e = set.exact_dimension();
    let levy_form = triplet.is_state_independent();
    let bounds = if levy_form {
        predicted_levy_bounds
    } else {
        predicted_dimension_bounds
    };
    let predicted = bounds(&indices.beta_lower, &indices.beta_upper_star, dim_e, d)?;
    let grid = set.time_grid();
    let estimates: Vec<(DimensionEstimate, DimensionEstimate)> = (0..opts.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_path(triplet, &grid, &opts.simulation, opts.seed, r)?;
            let pts = image_points(&path, set)?;
            let b = box_counting_dim(&pts, path.dim, &opts.box_options)?;
            let c = capacity_dim_lower(&path, set, &opts.capacity)?;
            Ok((b, c))
        })
        .collect::<Result<_>>()?;
    let (boxes, caps): (Vec<_>, Vec<_>) = estimates.into_iter().unzip();
    let box_estimate = DimensionEstimate::summarize(&boxes)?;
    let capacity_estimate = DimensionEstimate::summarize(&caps)?;
    let tol = opts.tolerance;
    let inside = |v: f64| v >= predicted.lower - tol && v <= predicted.upper + tol;
    let pass = inside(box_estimate.value) && inside(capacity_estimate.value);
    let mut warnings = Vec::new();
    if indices.beta_lower.degenerate {
        warnings.push("lower index degenerate: lower bound is 0".into());
    }
    let estimators_disagree = (box_estimate.value - capacity_estimate.value).abs() > DISAGREEMENT;
    if estimators_disagree {
        warnings.push("box and capacity estimates differ by more than 0.15".into());
    }
    Ok(BoundReport {
        process: triplet.description().to_string(),
        time_set: set.clone(),
        dim_e,
        assumptions,
        indices,
        predicted,
        levy_form,
        box_estimate,
        capacity_estimate,
        tolerance: tol,
        pass,
        replicas: opts.replicas,
        seed: opts.seed,
        estimators_disagree,
        warnings,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}
