//! State-dependent Lévy triplets and the parametric families.

use std::fmt;
use std::sync::Arc;

use super::grid::StateGrid;
use super::measure::{AlphaGuard, Angular, JumpLaw, LevyMeasure};
use crate::error::{invalid, Result};

/// Jump data at one state: the measure and a scalar multiplier `m(x) > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpPart {
    pub measure: LevyMeasure,
    pub multiplier: f64,
}

pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JumpField = Arc<dyn Fn(&[f64]) -> JumpPart + Send + Sync>;

/// A state-dependent Lévy triplet `(b(x), a(x), m(x)ν(x, dz))`.
///
/// The diffusion matrix is stored row-major. Triplets are immutable and
/// cheap to clone.
#[derive(Clone)]
pub struct StateTriplet {
    dim: usize,
    drift: VectorField,
    diffusion: VectorField,
    jump: JumpField,
    state_independent: bool,
    symmetric: bool,
    description: String,
    /// Stability exponent range when the jump part is stable at every state.
    alpha_range: Option<(f64, f64)>,
}

impl fmt::Debug for StateTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateTriplet")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .field("state_independent", &self.state_independent)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

fn check_matrix(dim: usize, a: &[f64]) -> Result<()> {
    if a.len() != dim * dim || a.iter().any(|v| !v.is_finite()) {
        return Err(invalid("diffusion", "must be a finite d×d matrix"));
    }
    for i in 0..dim {
        for j in 0..i {
            if (a[i * dim + j] - a[j * dim + i]).abs() > 1e-12 * (1.0 + a[i * dim + j].abs()) {
                return Err(invalid("diffusion", "must be symmetric"));
            }
        }
    }
    if cholesky(dim, a).is_none() {
        return Err(invalid("diffusion", "must be nonnegative definite"));
    }
    Ok(())
}

/// Lower-triangular factor `L` with `L Lᵀ = a` for nonnegative-definite `a`,
/// tolerating zero pivots. Returns `None` for indefinite input.
pub fn cholesky(dim: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    for j in 0..dim {
        let mut s = a[j * dim + j];
        for k in 0..j {
            s -= l[j * dim + k] * l[j * dim + k];
        }
        if s < -1e-12 * scale {
            return None;
        }
        let pivot = s.max(0.0).sqrt();
        l[j * dim + j] = pivot;
        for i in j + 1..dim {
            let mut t = a[i * dim + j];
            for k in 0..j {
                t -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = if pivot > 0.0 { t / pivot } else { 0.0 };
            if pivot == 0.0 && t.abs() > 1e-12 * scale {
                return None;
            }
        }
    }
    Some(l)
}

pub fn identity(dim: usize) -> Vec<f64> {
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        a[i * dim + i] = 1.0;
    }
    a
}

impl StateTriplet {
    /// General constructor from coefficient functions.
    ///
    /// `symmetric` declares that `ν(x, ·)` is symmetric and `b ≡ 0`.
    pub fn new(
        dim: usize,
        drift: VectorField,
        diffusion: VectorField,
        jump: JumpField,
        state_independent: bool,
        symmetric: bool,
        description: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        Ok(Self {
            dim,
            drift,
            diffusion,
            jump,
            state_independent,
            symmetric,
            description: description.into(),
            alpha_range: None,
        })
    }

    /// A Lévy (state-independent) triplet.
    pub fn levy(drift: Vec<f64>, diffusion: Vec<f64>, measure: LevyMeasure) -> Result<Self> {
        let dim = measure.dim();
        if drift.len() != dim || drift.iter().any(|v| !v.is_finite()) {
            return Err(invalid("drift", "must be a finite vector of the ambient dimension"));
        }
        check_matrix(dim, &diffusion)?;
        let symmetric = measure.is_symmetric() && drift.iter().all(|v| *v == 0.0);
        let alpha_range = match &measure {
            LevyMeasure::StableRadial { alpha, .. } => Some((*alpha, *alpha)),
            _ => None,
        };
        let description = format!(
            "levy(drift={:?}, diffusion={:?}, jumps={})",
            drift,
            diffusion,
            measure.describe()
        );
        let part = JumpPart {
            measure,
            multiplier: 1.0,
        };
        let mut t = Self::new(
            dim,
            Arc::new(move |_| drift.clone()),
            Arc::new(move |_| diffusion.clone()),
            Arc::new(move |_| part.clone()),
            true,
            symmetric,
            description,
        )?;
        t.alpha_range = alpha_range;
        Ok(t)
    }

    /// Standard Brownian motion with generator `½Δ` (symbol `½|ξ|²`).
    pub fn brownian(dim: usize) -> Result<Self> {
        Self::levy(vec![0.0; dim], identity(dim), LevyMeasure::Null { dim })
    }

    /// Isotropic α-stable Lévy process with symbol `scale·|ξ|^α`.
    pub fn stable(dim: usize, alpha: f64, scale: f64) -> Result<Self> {
        Self::levy(
            vec![0.0; dim],
            vec![0.0; dim * dim],
            LevyMeasure::stable(dim, alpha, scale)?,
        )
    }

    pub fn compound_poisson(dim: usize, rate: f64, law: JumpLaw) -> Result<Self> {
        Self::levy(
            vec![0.0; dim],
            vec![0.0; dim * dim],
            LevyMeasure::compound_poisson(dim, rate, law)?,
        )
    }

    /// Stable-like process with symbol `|ξ|^{α(x)}`,
    /// `α(x) = lo + (hi − lo)(1 + sin x₁)/2`.
    pub fn stable_like(dim: usize, alpha_lo: f64, alpha_hi: f64) -> Result<Self> {
        let guard = AlphaGuard::default();
        guard.check(alpha_lo)?;
        guard.check(alpha_hi)?;
        if alpha_hi < alpha_lo {
            return Err(invalid("alpha", "alpha_hi must not be below alpha_lo"));
        }
        let alpha = move |x: &[f64]| alpha_lo + (alpha_hi - alpha_lo) * (1.0 + x[0].sin()) / 2.0;
        Self::stable_like_with(dim, alpha, (alpha_lo, alpha_hi), Angular::Uniform, guard)
    }

    /// Stable-like process for a general exponent function and angular law.
    /// `range` must contain every value of `alpha_fn`.
    pub fn stable_like_with(
        dim: usize,
        alpha_fn: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        range: (f64, f64),
        angular: Angular,
        guard: AlphaGuard,
    ) -> Result<Self> {
        guard.check(range.0)?;
        guard.check(range.1)?;
        let symmetric = LevyMeasure::stable_with(dim, range.0, 1.0, angular.clone(), guard)?.is_symmetric();
        let jump_angular = angular.clone();
        let mut t = Self::new(
            dim,
            Arc::new(move |_| vec![0.0; dim]),
            Arc::new(move |_| vec![0.0; dim * dim]),
            Arc::new(move |x| {
                let a = alpha_fn(x).clamp(range.0, range.1);
                JumpPart {
                    measure: LevyMeasure::StableRadial {
                        dim,
                        alpha: a,
                        scale: 1.0,
                        angular: jump_angular.clone(),
                    },
                    multiplier: 1.0,
                }
            }),
            range.0 == range.1,
            symmetric,
            format!("stable_like(alpha in [{}, {}])", range.0, range.1),
        )?;
        t.alpha_range = Some(range);
        Ok(t)
    }

    /// Time change by a constant factor `k > 0`: multiplies `b`, `a` and the
    /// jump intensity by `k`.
    pub fn time_changed(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid("k", "must be positive and finite"));
        }
        let (b, a, j) = (self.drift.clone(), self.diffusion.clone(), self.jump.clone());
        let mut t = self.clone();
        t.drift = Arc::new(move |x| b(x).into_iter().map(|v| v * k).collect());
        t.diffusion = Arc::new(move |x| a(x).into_iter().map(|v| v * k).collect());
        t.jump = Arc::new(move |x| {
            let mut p = j(x);
            p.multiplier *= k;
            p
        });
        t.description = format!("{} (time change x{k})", self.description);
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_state_independent(&self) -> bool {
        self.state_independent
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn alpha_range(&self) -> Option<(f64, f64)> {
        self.alpha_range
    }

    pub fn drift_at(&self, x: &[f64]) -> Vec<f64> {
        (self.drift)(x)
    }

    pub fn diffusion_at(&self, x: &[f64]) -> Vec<f64> {
        (self.diffusion)(x)
    }

    pub fn jump_at(&self, x: &[f64]) -> JumpPart {
        (self.jump)(x)
    }

    /// Checks boundedness of `b`, `a` and `m` on the probe grid against
    /// `bound`, positivity of `m`, and that state-independent triplets really
    /// do not vary.
    pub fn validate(&self, probe: &StateGrid, bound: f64) -> Result<()> {
        let mut reference: Option<(Vec<f64>, Vec<f64>, JumpPart)> = None;
        for x in &probe.points {
            if x.len() != self.dim {
                return Err(invalid("x_grid", "probe point dimension mismatch"));
            }
            let b = self.drift_at(x);
            let a = self.diffusion_at(x);
            let j = self.jump_at(x);
            if b.len() != self.dim {
                return Err(invalid("drift", "wrong dimension"));
            }
            check_matrix(self.dim, &a)?;
            if j.measure.dim() != self.dim {
                return Err(invalid("jump", "measure dimension mismatch"));
            }
            if !(j.multiplier > 0.0) {
                return Err(invalid(
                    "multiplier",
                    format!("must be positive, got {} at {x:?}", j.multiplier),
                ));
            }
            let sup = b.iter().chain(&a).map(|v| v.abs()).fold(j.multiplier, f64::max);
            if !(sup <= bound) {
                return Err(invalid(
                    "coefficients",
                    format!("sup {sup} at {x:?} exceeds the declared bound {bound}"),
                ));
            }
            if self.state_independent {
                match &reference {
                    None => reference = Some((b, a, j)),
                    Some((b0, a0, j0)) => {
                        if *b0 != b || *a0 != a || *j0 != j {
                            return Err(invalid(
                                "state_independent",
                                format!("coefficients vary with the state at {x:?}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
