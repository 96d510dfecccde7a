//! Lévy measures and their contribution to the symbol.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::radial::{stable_integral, RadialDensity};
use crate::error::{invalid, Error, Result};
use crate::numeric::{integrate, Tolerance};

/// Admissible range for stability exponents. Values at or beyond the
/// endpoints are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGuard {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaGuard {
    /// The full open interval `(0, 2)`.
    pub const OPEN: AlphaGuard = AlphaGuard { lo: 0.0, hi: 2.0 };

    pub fn check(&self, alpha: f64) -> Result<()> {
        if !(alpha > self.lo && alpha < self.hi) || !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(
                "alpha",
                format!("{alpha} outside the admissible range ({}, {})", self.lo, self.hi),
            ));
        }
        Ok(())
    }
}

impl Default for AlphaGuard {
    fn default() -> Self {
        AlphaGuard { lo: 0.1, hi: 1.9 }
    }
}

/// Angular part `σ` of a radial measure, a probability on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angular {
    Uniform,
    /// Finitely many unit directions with probability weights.
    Discrete {
        directions: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

impl Angular {
    pub fn discrete(dim: usize, directions: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if directions.is_empty() || directions.len() != weights.len() {
            return Err(invalid("angular", "need one weight per direction"));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !(total > 0.0) {
            return Err(invalid("angular", "weights must be nonnegative with positive sum"));
        }
        let mut unit = Vec::with_capacity(directions.len());
        for d in directions {
            if d.len() != dim {
                return Err(invalid("angular", "direction dimension mismatch"));
            }
            let n = norm(&d);
            if !(n > 0.0 && n.is_finite()) {
                return Err(invalid("angular", "directions must be nonzero"));
            }
            unit.push(d.iter().map(|v| v / n).collect());
        }
        Ok(Angular::Discrete {
            directions: unit,
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    fn is_symmetric(&self) -> bool {
        match self {
            Angular::Uniform => true,
            Angular::Discrete { directions, weights } => directions.iter().zip(weights).all(|(d, w)| {
                directions
                    .iter()
                    .zip(weights)
                    .any(|(e, v)| (w - v).abs() <= 1e-12 && d.iter().zip(e).all(|(a, b)| (a + b).abs() <= 1e-12))
            }),
        }
    }
}

/// Jump law of a compound Poisson measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    /// Atoms with probability weights.
    PointMasses { atoms: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Uniform on `[−w, w]` (one dimension).
    Uniform1d { half_width: f64 },
}

/// A Lévy measure `ν` on `R^d \ {0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LevyMeasure {
    Null {
        dim: usize,
    },
    /// `ν(dz) = k r^{−1−α} dr σ(dℓ)`, normalized so that for uniform `σ` the
    /// symbol equals `scale·|ξ|^α`.
    StableRadial {
        dim: usize,
        alpha: f64,
        scale: f64,
        angular: Angular,
    },
    /// Finite measure `rate · P(Z ∈ dz)`.
    CompoundPoisson {
        dim: usize,
        rate: f64,
        law: JumpLaw,
    },
    /// Isotropic tempered stable, `ν(dz) = 2c e^{−θr} r^{−1−α} dr σ(dℓ)` with
    /// uniform `σ`; in one dimension the density is `c e^{−θ|z|} |z|^{−1−α}`.
    TemperedStable {
        dim: usize,
        alpha: f64,
        theta: f64,
        intensity: f64,
    },
    /// Radial density from a table, `ν(dz) = g(r) dr σ(dℓ)`.
    TabulatedRadial {
        dim: usize,
        radial: RadialDensity,
        angular: Angular,
    },
}

/// How to evaluate integrals that have a closed form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMode {
    /// Closed forms where available, quadrature otherwise.
    #[default]
    Auto,
    /// Radial quadrature even when a closed form exists.
    Quadrature,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E|⟨ℓ, e⟩|^α` for `ℓ` uniform on the sphere in `R^d` and a unit vector `e`.
pub fn sphere_abs_moment(dim: usize, alpha: f64) -> f64 {
    let d = dim as f64;
    (ln_gamma(d / 2.0) + ln_gamma((alpha + 1.0) / 2.0) - 0.5 * PI.ln() - ln_gamma((d + alpha) / 2.0)).exp()
}

/// Average of an even function `f(⟨ℓ, ξ⟩)` over the uniform sphere, using the
/// projected law `sin^{d−2}φ dφ` of the angle to `ξ`.
fn sphere_average<F: Fn(f64) -> Result<f64>>(dim: usize, r: f64, f: F, tol: Tolerance) -> Result<f64> {
    if dim == 1 {
        return f(r);
    }
    let err = std::cell::RefCell::new(None);
    let weight = |phi: f64| phi.sin().powi(dim as i32 - 2);
    let num = integrate(
        |phi: f64| match f(r * phi.cos()) {
            Ok(v) => v * weight(phi),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        PI / 2.0,
        tol,
        500,
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let d = dim as f64;
    let norm = 0.5 * PI.sqrt() * gamma((d - 1.0) / 2.0) / gamma(d / 2.0);
    Ok(num.value / norm)
}

/// One-dimensional tempered stable exponent for the density `c e^{−θ|z|}|z|^{−1−α}`.
pub fn tempered_exponent_1d(alpha: f64, theta: f64, c: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    if (alpha - 1.0).abs() < 1e-12 {
        let x = xi.abs();
        2.0 * c * (x * (x / theta).atan() - 0.5 * theta * (1.0 + (x / theta).powi(2)).ln())
    } else {
        let x = xi.abs();
        2.0 * c
            * gamma(-alpha)
            * (theta.powf(alpha) - (theta * theta + x * x).powf(alpha / 2.0) * (alpha * (x / theta).atan()).cos())
    }
}

impl LevyMeasure {
    /// Isotropic stable measure with symbol `scale·|ξ|^α`, guarded by the
    /// default admissible range.
    pub fn stable(dim: usize, alpha: f64, scale: f64) -> Result<Self> {
        Self::stable_with(dim, alpha, scale, Angular::Uniform, AlphaGuard::default())
    }

    pub fn stable_with(dim: usize, alpha: f64, scale: f64, angular: Angular, guard: AlphaGuard) -> Result<Self> {
        check_dim(dim)?;
        guard.check(alpha)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale", "must be positive and finite"));
        }
        if let Angular::Discrete { directions, .. } = &angular {
            if directions.iter().any(|d| d.len() != dim) {
                return Err(invalid("angular", "direction dimension mismatch"));
            }
        }
        Ok(LevyMeasure::StableRadial {
            dim,
            alpha,
            scale,
            angular,
        })
    }

    /// The one-dimensional measure `c |z|^{−1−α} dz`.
    pub fn stable_density_1d(alpha: f64, c: f64) -> Result<Self> {
        AlphaGuard::OPEN.check(alpha)?;
        Self::stable_with(
            1,
            alpha,
            2.0 * c * stable_integral(alpha),
            Angular::Uniform,
            AlphaGuard::OPEN,
        )
    }

    pub fn compound_poisson(dim: usize, rate: f64, law: JumpLaw) -> Result<Self> {
        check_dim(dim)?;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid("rate", "must be positive and finite"));
        }
        let law = match law {
            JumpLaw::PointMasses { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(invalid("atoms", "need one weight per atom"));
                }
                if atoms.iter().any(|a| a.len() != dim || a.iter().any(|v| !v.is_finite())) {
                    return Err(invalid(
                        "atoms",
                        "atoms must be finite vectors of the ambient dimension",
                    ));
                }
                let total: f64 = weights.iter().sum();
                if weights.iter().any(|w| !(*w >= 0.0)) || !(total > 0.0) {
                    return Err(invalid("weights", "must be nonnegative with positive sum"));
                }
                JumpLaw::PointMasses {
                    atoms,
                    weights: weights.iter().map(|w| w / total).collect(),
                }
            }
            JumpLaw::Uniform1d { half_width } => {
                if dim != 1 {
                    return Err(invalid("law", "uniform jumps are one-dimensional"));
                }
                if !(half_width > 0.0 && half_width.is_finite()) {
                    return Err(invalid("half_width", "must be positive and finite"));
                }
                JumpLaw::Uniform1d { half_width }
            }
        };
        Ok(LevyMeasure::CompoundPoisson { dim, rate, law })
    }

    pub fn tempered_stable(dim: usize, alpha: f64, theta: f64, intensity: f64) -> Result<Self> {
        check_dim(dim)?;
        AlphaGuard::default().check(alpha)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid("theta", "must be positive and finite"));
        }
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(invalid("intensity", "must be positive and finite"));
        }
        Ok(LevyMeasure::TemperedStable {
            dim,
            alpha,
            theta,
            intensity,
        })
    }

    pub fn tabulated(dim: usize, radii: Vec<f64>, densities: Vec<f64>, angular: Angular) -> Result<Self> {
        check_dim(dim)?;
        let radial = RadialDensity::tabulated(radii, densities)?;
        let m = Self::TabulatedRadial { dim, radial, angular };
        let mass = m.truncated_second_moment()?;
        if !mass.is_finite() {
            return Err(Error::DegenerateMeasure("∫(1 ∧ |z|²) ν(dz) is not finite".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::Null { dim }
            | LevyMeasure::StableRadial { dim, .. }
            | LevyMeasure::CompoundPoisson { dim, .. }
            | LevyMeasure::TemperedStable { dim, .. }
            | LevyMeasure::TabulatedRadial { dim, .. } => *dim,
        }
    }

    /// Whether `ν` is invariant under `z ↦ −z`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyMeasure::Null { .. } | LevyMeasure::TemperedStable { .. } => true,
            LevyMeasure::StableRadial { angular, .. } | LevyMeasure::TabulatedRadial { angular, .. } => {
                angular.is_symmetric()
            }
            LevyMeasure::CompoundPoisson { law, .. } => match law {
                JumpLaw::Uniform1d { .. } => true,
                JumpLaw::PointMasses { atoms, weights } => atoms.iter().zip(weights).all(|(a, w)| {
                    atoms
                        .iter()
                        .zip(weights)
                        .any(|(b, v)| (w - v).abs() <= 1e-12 && a.iter().zip(b).all(|(x, y)| (x + y).abs() <= 1e-12))
                }),
            },
        }
    }

    /// Radial profile and angular law for radial families.
    pub fn radial(&self) -> Option<(RadialDensity, &Angular)> {
        match self {
            LevyMeasure::StableRadial {
                dim,
                alpha,
                scale,
                angular,
            } => {
                let k = match angular {
                    Angular::Uniform => scale / (stable_integral(*alpha) * sphere_abs_moment(*dim, *alpha)),
                    Angular::Discrete { .. } => scale / stable_integral(*alpha),
                };
                Some((RadialDensity::Stable { alpha: *alpha, k }, angular))
            }
            LevyMeasure::TemperedStable {
                alpha,
                theta,
                intensity,
                ..
            } => Some((
                RadialDensity::Tempered {
                    alpha: *alpha,
                    theta: *theta,
                    k: 2.0 * intensity,
                },
                &Angular::Uniform,
            )),
            LevyMeasure::TabulatedRadial { radial, angular, .. } => Some((radial.clone(), angular)),
            _ => None,
        }
    }

    /// `∫(1 ∧ |z|²) ν(dz)`.
    pub fn truncated_second_moment(&self) -> Result<f64> {
        let tol = Tolerance::new(1e-10, 1e-10);
        match self {
            LevyMeasure::Null { .. } => Ok(0.0),
            LevyMeasure::CompoundPoisson { rate, law, .. } => Ok(rate
                * match law {
                    JumpLaw::PointMasses { atoms, weights } => atoms
                        .iter()
                        .zip(weights)
                        .map(|(a, w)| w * norm(a).powi(2).min(1.0))
                        .sum(),
                    JumpLaw::Uniform1d { half_width } => {
                        let m = half_width.min(1.0);
                        (m.powi(3) / 3.0 + (half_width - m)) / half_width
                    }
                }),
            _ => {
                let (g, _) = self.radial().expect("radial family");
                g.truncated_second_moment(tol)
            }
        }
    }

    /// Jump part of the exponent with the compensator on `{|z| ≤ 1}`, as `(Re, Im)`.
    pub fn exponent(&self, xi: &[f64], mode: EvalMode, tol: Tolerance) -> Result<(f64, f64)> {
        if xi.iter().all(|v| *v == 0.0) {
            return Ok((0.0, 0.0));
        }
        match self {
            LevyMeasure::Null { .. } => Ok((0.0, 0.0)),
            LevyMeasure::CompoundPoisson { rate, law, .. } => Ok(match law {
                JumpLaw::PointMasses { atoms, weights } => {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (a, w) in atoms.iter().zip(weights) {
                        let u = dot(a, xi);
                        let comp = if norm(a) <= 1.0 { u } else { 0.0 };
                        let s = (0.5 * u).sin();
                        re += w * 2.0 * s * s;
                        im -= w * (u.sin() - comp);
                    }
                    (rate * re, rate * im)
                }
                JumpLaw::Uniform1d { half_width } => {
                    let x = half_width * xi[0];
                    let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                    (rate * (1.0 - sinc), 0.0)
                }
            }),
            LevyMeasure::StableRadial {
                alpha, scale, angular, ..
            } if mode == EvalMode::Auto => {
                let (g, _) = self.radial().expect("radial");
                let RadialDensity::Stable { k, .. } = g else {
                    unreachable!()
                };
                match angular {
                    Angular::Uniform => Ok((scale * norm(xi).powf(*alpha), 0.0)),
                    Angular::Discrete { directions, weights } => {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (l, w) in directions.iter().zip(weights) {
                            let (r, i) = RadialDensity::stable_exponent(*alpha, k, dot(l, xi));
                            re += w * r;
                            im += w * i;
                        }
                        Ok((re, im))
                    }
                }
            }
            LevyMeasure::TemperedStable {
                dim,
                alpha,
                theta,
                intensity,
            } if mode == EvalMode::Auto => {
                let r = norm(xi);
                let re = sphere_average(
                    *dim,
                    r,
                    |u| Ok(tempered_exponent_1d(*alpha, *theta, *intensity, u)),
                    tol,
                )?;
                Ok((re, 0.0))
            }
            _ => {
                let (g, angular) = self.radial().expect("radial family");
                match angular {
                    Angular::Uniform => {
                        let re = sphere_average(self.dim(), norm(xi), |u| g.exponent(u, tol).map(|v| v.0), tol)?;
                        Ok((re, 0.0))
                    }
                    Angular::Discrete { directions, weights } => {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (l, w) in directions.iter().zip(weights) {
                            let (r, i) = g.exponent(dot(l, xi), tol)?;
                            re += w * r;
                            im += w * i;
                        }
                        Ok((re, im))
                    }
                }
            }
        }
    }

    /// `(q^U(ξ), q^L(ξ))` with `q^U = ∫(1 ∧ ⟨ξ,z⟩²)ν(dz)` and
    /// `q^L = ∫_{|⟨ξ,z⟩| ≤ 1} ⟨ξ,z⟩² ν(dz)`.
    pub fn q_upper_lower(&self, xi: &[f64]) -> Result<(f64, f64)> {
        if xi.iter().all(|v| *v == 0.0) {
            return Ok((0.0, 0.0));
        }
        let tol = Tolerance::new(1e-10, 1e-9);
        match self {
            LevyMeasure::Null { .. } => Ok((0.0, 0.0)),
            LevyMeasure::CompoundPoisson { rate, law, .. } => Ok(match law {
                JumpLaw::PointMasses { atoms, weights } => {
                    let (mut up, mut low) = (0.0, 0.0);
                    for (a, w) in atoms.iter().zip(weights) {
                        let u2 = dot(a, xi).powi(2);
                        up += w * u2.min(1.0);
                        if u2 <= 1.0 {
                            low += w * u2;
                        }
                    }
                    (rate * up, rate * low)
                }
                JumpLaw::Uniform1d { half_width } => {
                    let x = xi[0].abs();
                    let m = half_width.min(1.0 / x);
                    let low = rate * x * x * m.powi(3) / (3.0 * half_width);
                    (low + rate * (half_width - m) / half_width, low)
                }
            }),
            _ => {
                let (g, angular) = self.radial().expect("radial family");
                let ray = |u: f64| -> Result<(f64, f64)> {
                    let au = u.abs();
                    if au == 0.0 {
                        return Ok((0.0, 0.0));
                    }
                    if let RadialDensity::Stable { alpha, k } = g {
                        let low = k * au.powf(alpha) / (2.0 - alpha);
                        return Ok((low + k * au.powf(alpha) / alpha, low));
                    }
                    let low = au * au * g.second_moment_below(1.0 / au, tol)?;
                    Ok((low + g.mass_above(1.0 / au, tol)?, low))
                };
                match angular {
                    Angular::Uniform => {
                        let r = norm(xi);
                        if let RadialDensity::Stable { alpha, .. } = g {
                            let (u, l) = ray(r)?;
                            let a = sphere_abs_moment(self.dim(), alpha);
                            return Ok((u * a, l * a));
                        }
                        let up = sphere_average(self.dim(), r, |u| ray(u).map(|v| v.0), tol)?;
                        let low = sphere_average(self.dim(), r, |u| ray(u).map(|v| v.1), tol)?;
                        Ok((up, low))
                    }
                    Angular::Discrete { directions, weights } => {
                        let (mut up, mut low) = (0.0, 0.0);
                        for (l, w) in directions.iter().zip(weights) {
                            let (u, lo) = ray(dot(l, xi))?;
                            up += w * u;
                            low += w * lo;
                        }
                        Ok((up, low))
                    }
                }
            }
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            LevyMeasure::Null { .. } => "null".into(),
            LevyMeasure::StableRadial {
                alpha, scale, angular, ..
            } => match angular {
                Angular::Uniform => format!("stable(alpha={alpha}, scale={scale})"),
                Angular::Discrete { directions, .. } => {
                    format!("stable(alpha={alpha}, scale={scale}, directions={})", directions.len())
                }
            },
            LevyMeasure::CompoundPoisson { rate, law, .. } => match law {
                JumpLaw::PointMasses { atoms, .. } => format!("compound_poisson(rate={rate}, atoms={})", atoms.len()),
                JumpLaw::Uniform1d { half_width } => format!("compound_poisson(rate={rate}, uniform={half_width})"),
            },
            LevyMeasure::TemperedStable {
                alpha,
                theta,
                intensity,
                ..
            } => {
                format!("tempered_stable(alpha={alpha}, theta={theta}, c={intensity})")
            }
            LevyMeasure::TabulatedRadial { radial, .. } => match radial {
                RadialDensity::Tabulated { radii, .. } => format!("tabulated(points={})", radii.len()),
                _ => "tabulated".into(),
            },
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    Ok(())
}
