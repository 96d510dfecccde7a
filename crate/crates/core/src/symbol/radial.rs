//! One-dimensional radial integrals of a Lévy density along a ray.
//!
//! For a radial density `g` on `(0, ∞)` and a projected frequency `u`, the
//! half-line exponent is
//!
//! `ψ₊(u) = ∫₀^∞ (1 − e^{iur} + iur·1_{r≤1}) g(r) dr`.
//!
//! The integral is split at `r_min`, `1/|u|`, `1` and `max(1, 1/|u|)`; the
//! innermost piece uses the power-law expansion of `g` at zero, the middle
//! pieces use adaptive Gauss–Kronrod in `log r`, and the oscillatory tail is
//! summed half-period by half-period with epsilon extrapolation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{integrate, integrate_oscillatory_tail, Integral, Tolerance};

const MAX_INTERVALS: usize = 4000;
/// Upper limit on the number of period chunks for compactly supported tails.
const MAX_CHUNKS: usize = 2_000_000;

/// Radial profile of a Lévy measure, `ν(dz) = g(|z|) d|z| σ(dℓ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadialDensity {
    /// `g(r) = k r^{−1−α}`.
    Stable { alpha: f64, k: f64 },
    /// `g(r) = k e^{−θr} r^{−1−α}`.
    Tempered { alpha: f64, theta: f64, k: f64 },
    /// Log-log interpolation of `(radii[i], densities[i])`, zero outside the grid.
    Tabulated { radii: Vec<f64>, densities: Vec<f64> },
}

fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Integrates `f` over `[a, b] ⊂ (0, ∞)` in the variable `s = ln r`.
fn log_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if b <= a {
        return Ok(Integral::ZERO);
    }
    integrate(
        |s: f64| {
            let r = s.exp();
            f(r) * r
        },
        a.ln(),
        b.ln(),
        tol,
        MAX_INTERVALS,
    )
}

/// Integrates `f` over a finite `[a, b]` in chunks of length `period`.
fn chunked<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, period: f64, tol: Tolerance) -> Result<Integral> {
    if b <= a {
        return Ok(Integral::ZERO);
    }
    let n = (((b - a) / period).ceil() as usize).clamp(1, MAX_CHUNKS);
    let step = (b - a) / n as f64;
    let piece_tol = Tolerance::new(tol.abs / n as f64, tol.rel);
    let mut total = Integral::ZERO;
    for i in 0..n {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n { b } else { lo + step };
        total = total + integrate(&f, lo, hi, piece_tol, 200)?;
    }
    Ok(total)
}

impl RadialDensity {
    pub fn tabulated(radii: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != densities.len() {
            return Err(invalid("radii", "need at least two radii and one density per radius"));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid("radii", "radii must be finite and positive"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("radii", "radii must be strictly increasing"));
        }
        if densities.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("densities", "densities must be finite and nonnegative"));
        }
        Ok(RadialDensity::Tabulated { radii, densities })
    }

    pub fn density(&self, r: f64) -> f64 {
        match self {
            RadialDensity::Stable { alpha, k } => k * r.powf(-1.0 - alpha),
            RadialDensity::Tempered { alpha, theta, k } => k * (-theta * r).exp() * r.powf(-1.0 - alpha),
            RadialDensity::Tabulated { radii, densities } => {
                if r < radii[0] || r > radii[radii.len() - 1] {
                    return 0.0;
                }
                let i = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1);
                let (r0, r1) = (radii[i - 1], radii[i]);
                let (g0, g1) = (densities[i - 1], densities[i]);
                if g0 > 0.0 && g1 > 0.0 {
                    let t = (r / r0).ln() / (r1 / r0).ln();
                    (g0.ln() + t * (g1.ln() - g0.ln())).exp()
                } else {
                    g0 + (g1 - g0) * (r - r0) / (r1 - r0)
                }
            }
        }
    }

    /// `(c, p)` with `g(r) ~ c r^p` as `r → 0`, when the density reaches zero.
    fn near_zero(&self) -> Option<(f64, f64)> {
        match self {
            RadialDensity::Stable { alpha, k } | RadialDensity::Tempered { alpha, k, .. } => Some((*k, -1.0 - alpha)),
            RadialDensity::Tabulated { .. } => None,
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            RadialDensity::Tabulated { radii, .. } => (radii[0], radii[radii.len() - 1]),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Radius beyond which the density is negligible (`∞` only for stable).
    fn effective_end(&self) -> f64 {
        match self {
            RadialDensity::Stable { .. } => f64::INFINITY,
            RadialDensity::Tempered { theta, .. } => 1.0_f64.max(1.0 / theta) + 60.0 / theta,
            RadialDensity::Tabulated { radii, .. } => radii[radii.len() - 1],
        }
    }

    /// `∫_a^∞ g(r) dr` for `a > 0`.
    pub fn mass_above(&self, a: f64, tol: Tolerance) -> Result<f64> {
        match self {
            RadialDensity::Stable { alpha, k } => Ok(k * a.powf(-alpha) / alpha),
            _ => {
                let (lo, _) = self.support();
                let from = a.max(lo);
                let end = self.effective_end();
                Ok(log_integrate(|r| self.density(r), from, end, tol)?.value)
            }
        }
    }

    /// `∫_0^a r² g(r) dr`.
    pub fn second_moment_below(&self, a: f64, tol: Tolerance) -> Result<f64> {
        match self {
            RadialDensity::Stable { alpha, k } => Ok(k * a.powf(2.0 - alpha) / (2.0 - alpha)),
            _ => {
                let (lo, hi) = self.support();
                let b = a.min(hi);
                let mut total = 0.0;
                let mut start = lo;
                if let Some((c, p)) = self.near_zero() {
                    let r_min = 1e-8 * b;
                    total += c * r_min.powf(p + 3.0) / (p + 3.0);
                    start = r_min;
                }
                total += log_integrate(|r| r * r * self.density(r), start, b, tol)?.value;
                Ok(total)
            }
        }
    }

    /// `∫_a^b g(r) dr`.
    pub fn mass_between(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
        let (lo, hi) = self.support();
        Ok(log_integrate(|r| self.density(r), a.max(lo), b.min(hi).min(self.effective_end()), tol)?.value)
    }

    /// `∫_a^b r g(r) dr`.
    pub fn first_moment_between(&self, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
        let (lo, hi) = self.support();
        Ok(log_integrate(|r| r * self.density(r), a.max(lo), b.min(hi), tol)?.value)
    }

    /// Radius beyond which the mass is negligible, finite for every family
    /// except stable.
    pub fn upper_cutoff(&self) -> f64 {
        self.effective_end()
    }

    /// `∫(1 ∧ r²) g(r) dr`.
    pub fn truncated_second_moment(&self, tol: Tolerance) -> Result<f64> {
        Ok(self.second_moment_below(1.0, tol)? + self.mass_above(1.0, tol)?)
    }

    /// Closed form of `ψ₊(u)` for the stable profile.
    pub fn stable_exponent(alpha: f64, k: f64, u: f64) -> (f64, f64) {
        if u == 0.0 {
            return (0.0, 0.0);
        }
        let au = u.abs();
        let re = k * stable_integral(alpha) * au.powf(alpha);
        let im = if (alpha - 1.0).abs() < 1e-12 {
            // ∫₀^∞ (sin r − r 1_{r≤1}) r^{−2} dr = 1 − γ
            -k * u * (1.0 - EULER_GAMMA - au.ln())
        } else {
            -re * u.signum() * (PI * alpha / 2.0).tan() + k * u / (1.0 - alpha)
        };
        (re, im)
    }

    /// `ψ₊(u)` by quadrature. Returns `(Re, Im)`.
    pub fn exponent(&self, u: f64, tol: Tolerance) -> Result<(f64, f64)> {
        if u == 0.0 {
            return Ok((0.0, 0.0));
        }
        let au = u.abs();
        let sgn = u.signum();
        let (lo, hi) = self.support();
        let split = 1.0_f64.max(1.0 / au);
        let piece_tol = Tolerance::new(tol.abs / 8.0, tol.rel);

        let mut re = 0.0;
        let mut im = 0.0;

        // (0, r_min]: power-law expansion of the integrand
        let mut start = lo;
        if let Some((c, p)) = self.near_zero() {
            let r_min = 1e-4 * (1.0 / au).min(1.0);
            re += c
                * (au * au * r_min.powf(p + 3.0) / (2.0 * (p + 3.0))
                    - au.powi(4) * r_min.powf(p + 5.0) / (24.0 * (p + 5.0)));
            im += c * sgn * au.powi(3) * r_min.powf(p + 4.0) / (6.0 * (p + 4.0));
            start = r_min;
        }

        // [start, split] with breakpoints at 1/|u| and 1
        let mut cuts = vec![start];
        for b in [1.0 / au, 1.0] {
            if b > start && b < split.min(hi) {
                cuts.push(b);
            }
        }
        cuts.push(split.min(hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            re += log_integrate(|r| one_minus_cos(au * r) * self.density(r), a, b, piece_tol)?.value;
            im -= log_integrate(
                |r| {
                    let comp = if r <= 1.0 { au * r } else { 0.0 };
                    ((au * r).sin() - comp) * self.density(r)
                },
                a,
                b,
                piece_tol,
            )?
            .value
                * sgn;
        }

        // [split, ∞)
        if split < hi {
            let end = self.effective_end();
            let half_period = PI / au;
            if end.is_finite() {
                let from = split;
                re += chunked(
                    |r| one_minus_cos(au * r) * self.density(r),
                    from,
                    end,
                    2.0 * half_period,
                    piece_tol,
                )?
                .value;
                im -= sgn
                    * chunked(
                        |r| (au * r).sin() * self.density(r),
                        from,
                        end,
                        2.0 * half_period,
                        piece_tol,
                    )?
                    .value;
            } else {
                let mass = self.mass_above(split, piece_tol)?;
                let first_cos_zero = ((split / half_period - 0.5).floor() + 1.5) * half_period;
                let cos_part = integrate_oscillatory_tail(
                    |r| (au * r).cos() * self.density(r),
                    split,
                    first_cos_zero,
                    half_period,
                    piece_tol,
                )?;
                let first_sin_zero = ((split / half_period).floor() + 1.0) * half_period;
                let sin_part = integrate_oscillatory_tail(
                    |r| (au * r).sin() * self.density(r),
                    split,
                    first_sin_zero,
                    half_period,
                    piece_tol,
                )?;
                re += mass - cos_part.value;
                im -= sgn * sin_part.value;
            }
        }
        Ok((re, im))
    }
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `I_α = ∫₀^∞ (1 − cos u) u^{−1−α} du`.
pub fn stable_integral(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        PI / 2.0
    } else {
        statrs::function::gamma::gamma(1.0 - alpha) * (PI * alpha / 2.0).cos() / alpha
    }
}
