//! Lévy–Khintchine symbols of state-dependent triplets.
//!
//! `p(x, ξ) = −i⟨b(x), ξ⟩ + ½⟨ξ, a(x)ξ⟩ + m(x) ∫ (1 − e^{i⟨z,ξ⟩} + i⟨z,ξ⟩ 1_{|z|≤1}) ν(x, dz)`

mod checks;
mod grid;
mod measure;
pub mod radial;
mod triplet;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_non_oscillation, check_sector, check_standing_assumptions, compute_qu_ql, evaluate_grid, AssumptionReport,
    NonOscillationReport, SectorReport,
};
pub use grid::{default_directions, FrequencyGrid, StateGrid};
pub use measure::{sphere_abs_moment, tempered_exponent_1d, AlphaGuard, Angular, EvalMode, JumpLaw, LevyMeasure};
pub use triplet::{cholesky, identity, JumpField, JumpPart, StateTriplet, VectorField};

use crate::error::{invalid, Result};
use crate::numeric::Tolerance;

/// Value of a symbol, in units of inverse time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolValue {
    pub re: f64,
    pub im: f64,
}

impl SymbolValue {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }
}

/// Evaluates `p(x, ξ)` with closed forms where available.
pub fn eval_symbol(triplet: &StateTriplet, x: &[f64], xi: &[f64]) -> Result<SymbolValue> {
    eval_symbol_with(triplet, x, xi, EvalMode::Auto, Tolerance::default())
}

/// Evaluates `p(x, ξ)` choosing between closed forms and quadrature.
pub fn eval_symbol_with(
    triplet: &StateTriplet,
    x: &[f64],
    xi: &[f64],
    mode: EvalMode,
    tol: Tolerance,
) -> Result<SymbolValue> {
    let d = triplet.dim();
    if x.len() != d || xi.len() != d {
        return Err(invalid("xi", format!("expected dimension {d}")));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(invalid("xi", "must be finite"));
    }
    let b = triplet.drift_at(x);
    let a = triplet.diffusion_at(x);
    let jump = triplet.jump_at(x);
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += xi[i] * a[i * d + j] * xi[j];
        }
    }
    let (jre, jim) = jump.measure.exponent(xi, mode, tol)?;
    let drift: f64 = b.iter().zip(xi).map(|(u, v)| u * v).sum();
    Ok(SymbolValue {
        re: 0.5 * quad + jump.multiplier * jre,
        im: -drift + jump.multiplier * jim,
    })
}
