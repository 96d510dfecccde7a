//! Stable random variables by the Chambers–Mallows–Stuck method.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Result};

/// Stable law `S_α(σ, β, 0)` with characteristic function
/// `exp(−σ^α|u|^α (1 − iβ sgn(u) tan(πα/2)))` for `α ≠ 1` and
/// `exp(−σ|u|(1 + iβ (2/π) sgn(u) ln|u|))` for `α = 1`.
/// At `α = 2` this is `N(0, 2σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableDist {
    alpha: f64,
    skew: f64,
    scale: f64,
}

impl StableDist {
    pub fn new(alpha: f64, skew: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid("alpha", format!("{alpha} not in (0, 2]")));
        }
        if !(-1.0..=1.0).contains(&skew) {
            return Err(invalid("skew", format!("{skew} not in [-1, 1]")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale", "must be positive and finite"));
        }
        Ok(Self { alpha, skew, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Distribution<f64> for StableDist {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, b, s) = (self.alpha, self.skew, self.scale);
        if a == 2.0 {
            let n: f64 = StandardNormal.sample(rng);
            return s * std::f64::consts::SQRT_2 * n;
        }
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = Exp1.sample(rng);
        if (a - 1.0).abs() < 1e-12 {
            let t = FRAC_PI_2 + b * v;
            let x = (t * v.tan() - b * (FRAC_PI_2 * w * v.cos() / t).ln()) / FRAC_PI_2;
            return s * x + b * s * s.ln() / FRAC_PI_2;
        }
        if b == 0.0 {
            let x = (a * v).sin() / v.cos().powf(1.0 / a) * ((v * (1.0 - a)).cos() / w).powf((1.0 - a) / a);
            return s * x;
        }
        let t = b * (PI * a / 2.0).tan();
        let shift = t.atan() / a;
        let factor = (1.0 + t * t).powf(1.0 / (2.0 * a));
        let x = factor * (a * (v + shift)).sin() / v.cos().powf(1.0 / a)
            * ((v - a * (v + shift)).cos() / w).powf((1.0 - a) / a);
        s * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cf(d: &StableDist, u: f64, n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..n {
            let x = d.sample(&mut rng);
            re += (u * x).cos();
            im += (u * x).sin();
        }
        (re / n as f64, im / n as f64)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableDist::new(0.0, 0.0, 1.0).is_err());
        assert!(StableDist::new(2.1, 0.0, 1.0).is_err());
        assert!(StableDist::new(1.5, 1.5, 1.0).is_err());
        assert!(StableDist::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn skewed_characteristic_function() {
        // E e^{iuX} = exp(−σ^α|u|^α(1 − iβ tan(πα/2)))
        for &(a, b) in &[(1.5, 1.0), (0.7, 1.0), (1.3, -0.5)] {
            let d = StableDist::new(a, b, 0.8).unwrap();
            let (re, im) = cf(&d, 1.0, 200_000);
            let m = 0.8f64.powf(a);
            let arg = m * b * (PI * a / 2.0).tan();
            let (er, ei) = ((-m).exp() * arg.cos(), (-m).exp() * arg.sin());
            assert!(
                (re - er).abs() < 0.01 && (im - ei).abs() < 0.01,
                "{a} {b}: {re} {im} vs {er} {ei}"
            );
        }
    }

    #[test]
    fn skewed_cauchy_characteristic_function() {
        // exp(−σ|u|(1 + iβ(2/π) sgn u ln|u|)) at u = 2
        let d = StableDist::new(1.0, 0.6, 0.5).unwrap();
        let (re, im) = cf(&d, 2.0, 200_000);
        let modulus = (-1.0f64).exp();
        let arg = -0.5 * 2.0 * 0.6 * (2.0 / PI) * 2f64.ln();
        assert!((re - modulus * arg.cos()).abs() < 0.01 && (im - modulus * arg.sin()).abs() < 0.01);
    }

    #[test]
    fn gaussian_edge() {
        let d = StableDist::new(2.0, 0.0, 1.0).unwrap();
        let (re, _) = cf(&d, 1.0, 100_000);
        assert!((re - (-1.0f64).exp()).abs() < 0.01);
    }
}
