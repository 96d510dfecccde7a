//! Exact or approximate increments of a Lévy law over a time step.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::stable::StableDist;
use crate::error::{Error, Result};
use crate::numeric::Tolerance;
use crate::symbol::radial::{stable_integral, RadialDensity};
use crate::symbol::{cholesky, Angular, JumpLaw, JumpPart, LevyMeasure};

/// Largest admissible rate of simulated big jumps per unit time.
pub const MAX_JUMP_RATE: f64 = 1e7;
const TABLE_POINTS: usize = 4096;

/// Inverse CDF of a radial density restricted to `[lo, hi]`, tabulated on a
/// logarithmic grid.
#[derive(Clone, Debug)]
struct RadiusTable {
    log_r: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadiusTable {
    fn new(g: &RadialDensity, lo: f64, hi: f64) -> Result<Self> {
        let (a, b) = (lo.ln(), hi.ln());
        let log_r: Vec<f64> = (0..TABLE_POINTS)
            .map(|i| a + (b - a) * i as f64 / (TABLE_POINTS - 1) as f64)
            .collect();
        let tol = Tolerance::new(1e-13, 1e-10);
        let mut cdf = Vec::with_capacity(TABLE_POINTS);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in log_r.windows(2) {
            acc += g.mass_between(w[0].exp(), w[1].exp(), tol)?;
            cdf.push(acc);
        }
        let total = acc;
        if !(total > 0.0) {
            return Err(Error::Simulation("no jump mass above the cutoff".into()));
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok(Self { log_r, cdf })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        (self.log_r[i - 1] + t * (self.log_r[i] - self.log_r[i - 1])).exp()
    }
}

#[derive(Clone, Debug)]
enum JumpSampler {
    None,
    /// Isotropic stable with symbol `c|ξ|^α`.
    StableIso {
        alpha: f64,
        c: f64,
    },
    /// Symmetric stable along `±ℓ`: `Σ ℓ_j S_j`, `S_j` symmetric with `σ_j^α = c_j t`.
    StablePairs {
        alpha: f64,
        lines: Vec<(Vec<f64>, f64)>,
    },
    /// Totally skewed stable along each direction, recentred by `shift_j t`.
    StableSkewed {
        alpha: f64,
        rays: Vec<(Vec<f64>, f64, f64)>,
    },
    CompoundPoisson {
        rate: f64,
        law: JumpLaw,
        compensator: Vec<f64>,
    },
    /// Big jumps as compound Poisson, small jumps as a Gaussian.
    Truncated {
        rate: f64,
        table: RadiusTable,
        angular: Angular,
        small_chol: Vec<f64>,
        drift: Vec<f64>,
    },
}

/// The law of `X_{t+s} − X_t` for a triplet frozen at one state, sampled
/// for any step `s`.
#[derive(Clone, Debug)]
pub struct FrozenLaw {
    dim: usize,
    drift: Vec<f64>,
    chol: Vec<f64>,
    has_diffusion: bool,
    jumps: JumpSampler,
}

fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R, out: &mut [f64]) {
    if dim == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
            n2 += *v * *v;
        }
        if n2 > 1e-300 {
            let n = n2.sqrt();
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn add_gaussian<R: Rng + ?Sized>(dim: usize, chol: &[f64], scale: f64, rng: &mut R, out: &mut [f64]) {
    let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    for i in 0..dim {
        let mut s = 0.0;
        for k in 0..=i {
            s += chol[i * dim + k] * z[k];
        }
        out[i] += scale * s;
    }
}

impl FrozenLaw {
    /// Builds the sampler. `allow_truncation` permits the compound Poisson
    /// plus Gaussian approximation for infinite-activity non-stable measures.
    pub fn new(
        drift: Vec<f64>,
        diffusion: &[f64],
        jump: &JumpPart,
        epsilon: f64,
        allow_truncation: bool,
    ) -> Result<Self> {
        let dim = drift.len();
        let chol = cholesky(dim, diffusion)
            .ok_or_else(|| Error::Simulation("diffusion matrix is not nonnegative definite".into()))?;
        let has_diffusion = diffusion.iter().any(|v| *v != 0.0);
        let m = jump.multiplier;
        let jumps = match &jump.measure {
            LevyMeasure::Null { .. } => JumpSampler::None,
            LevyMeasure::StableRadial {
                alpha, scale, angular, ..
            } => match angular {
                Angular::Uniform => JumpSampler::StableIso {
                    alpha: *alpha,
                    c: scale * m,
                },
                Angular::Discrete { directions, weights } => {
                    let k = scale / stable_integral(*alpha);
                    if jump.measure.is_symmetric() {
                        let mut lines: Vec<(Vec<f64>, f64)> = Vec::new();
                        for (l, w) in directions.iter().zip(weights) {
                            let opposite = lines
                                .iter()
                                .any(|(e, _)| e.iter().zip(l).all(|(a, b)| (a + b).abs() <= 1e-12));
                            if !opposite && *w > 0.0 {
                                lines.push((l.clone(), m * k * 2.0 * w * stable_integral(*alpha)));
                            }
                        }
                        JumpSampler::StablePairs { alpha: *alpha, lines }
                    } else if (alpha - 1.0).abs() < 1e-12 {
                        return Err(Error::Unsupported(
                            "exact sampling of asymmetric stable laws with alpha = 1".into(),
                        ));
                    } else {
                        let rays = directions
                            .iter()
                            .zip(weights)
                            .filter(|(_, w)| **w > 0.0)
                            .map(|(l, w)| {
                                (
                                    l.clone(),
                                    m * k * w * stable_integral(*alpha),
                                    m * k * w / (1.0 - alpha),
                                )
                            })
                            .collect();
                        JumpSampler::StableSkewed { alpha: *alpha, rays }
                    }
                }
            },
            LevyMeasure::CompoundPoisson { rate, law, .. } => {
                let mut compensator = vec![0.0; dim];
                match law {
                    JumpLaw::PointMasses { atoms, weights } => {
                        for (a, w) in atoms.iter().zip(weights) {
                            if a.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                                for (c, v) in compensator.iter_mut().zip(a) {
                                    *c += m * rate * w * v;
                                }
                            }
                        }
                    }
                    JumpLaw::Uniform1d { .. } => {}
                }
                JumpSampler::CompoundPoisson {
                    rate: m * rate,
                    law: law.clone(),
                    compensator,
                }
            }
            other => {
                if !allow_truncation {
                    return Err(Error::Unsupported(format!(
                        "frozen-coefficient sampling of {}",
                        other.describe()
                    )));
                }
                let (g, angular) = other.radial().expect("radial family");
                Self::truncated(dim, m, &g, angular, epsilon)?
            }
        };
        Ok(Self {
            dim,
            drift,
            chol,
            has_diffusion,
            jumps,
        })
    }

    fn truncated(dim: usize, m: f64, g: &RadialDensity, angular: &Angular, epsilon: f64) -> Result<JumpSampler> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Simulation(format!(
                "cutoff epsilon {epsilon} must lie in (0, 1)"
            )));
        }
        let tol = Tolerance::new(1e-12, 1e-10);
        let hi = g.upper_cutoff();
        let rate = m * g.mass_between(epsilon, hi, tol)?;
        if rate > MAX_JUMP_RATE {
            return Err(Error::Simulation(format!(
                "jump rate {rate:.3e} per unit time above the cutoff {epsilon} exceeds {MAX_JUMP_RATE:e}; use a larger epsilon"
            )));
        }
        let small = m * g.second_moment_below(epsilon, tol)?;
        let mean_dir = match angular {
            Angular::Uniform => vec![0.0; dim],
            Angular::Discrete { directions, weights } => (0..dim)
                .map(|i| directions.iter().zip(weights).map(|(l, w)| w * l[i]).sum())
                .collect(),
        };
        let mut cov = vec![0.0; dim * dim];
        match angular {
            Angular::Uniform => {
                for i in 0..dim {
                    cov[i * dim + i] = small / dim as f64;
                }
            }
            Angular::Discrete { directions, weights } => {
                for (l, w) in directions.iter().zip(weights) {
                    for i in 0..dim {
                        for j in 0..dim {
                            cov[i * dim + j] += small * w * l[i] * l[j];
                        }
                    }
                }
            }
        }
        let small_chol = cholesky(dim, &cov).expect("covariance is nonnegative definite");
        let first = if epsilon < 1.0 {
            m * g.first_moment_between(epsilon, 1.0, tol)?
        } else {
            0.0
        };
        let drift = mean_dir.iter().map(|v| -first * v).collect();
        let table = RadiusTable::new(g, epsilon, hi)?;
        Ok(JumpSampler::Truncated {
            rate,
            table,
            angular: angular.clone(),
            small_chol,
            drift,
        })
    }

    /// Builds the law of a state-independent triplet.
    pub fn for_levy(triplet: &crate::symbol::StateTriplet, epsilon: f64) -> Result<Self> {
        let x = vec![0.0; triplet.dim()];
        Self::new(
            triplet.drift_at(&x),
            &triplet.diffusion_at(&x),
            &triplet.jump_at(&x),
            epsilon,
            true,
        )
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.jumps, JumpSampler::Truncated { .. })
    }

    pub fn is_stable(&self) -> bool {
        matches!(
            self.jumps,
            JumpSampler::StableIso { .. } | JumpSampler::StablePairs { .. } | JumpSampler::StableSkewed { .. }
        )
    }

    /// Stability exponent of the jump part, if stable.
    pub fn alpha(&self) -> Option<f64> {
        match &self.jumps {
            JumpSampler::StableIso { alpha, .. }
            | JumpSampler::StablePairs { alpha, .. }
            | JumpSampler::StableSkewed { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Adds an increment over a step `dt` to `out`; returns the number of
    /// compound Poisson jumps drawn.
    pub fn add_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) -> u64 {
        let dim = self.dim;
        for (o, b) in out.iter_mut().zip(&self.drift) {
            *o += b * dt;
        }
        if self.has_diffusion {
            add_gaussian(dim, &self.chol, dt.sqrt(), rng, out);
        }
        match &self.jumps {
            JumpSampler::None => 0,
            JumpSampler::StableIso { alpha, c } => {
                let sigma = (c * dt).powf(1.0 / alpha);
                if dim == 1 {
                    let s = StableDist::new(*alpha, 0.0, sigma).expect("validated").sample(rng);
                    out[0] += s;
                } else {
                    let a_scale = (std::f64::consts::PI * alpha / 4.0).cos().powf(2.0 / alpha);
                    let a = StableDist::new(alpha / 2.0, 1.0, a_scale)
                        .expect("validated")
                        .sample(rng);
                    let amp = sigma * (2.0 * a.max(0.0)).sqrt();
                    for o in out.iter_mut() {
                        let n: f64 = StandardNormal.sample(rng);
                        *o += amp * n;
                    }
                }
                0
            }
            JumpSampler::StablePairs { alpha, lines } => {
                for (l, c) in lines {
                    let sigma = (c * dt).powf(1.0 / alpha);
                    let s = StableDist::new(*alpha, 0.0, sigma).expect("validated").sample(rng);
                    for (o, v) in out.iter_mut().zip(l) {
                        *o += v * s;
                    }
                }
                0
            }
            JumpSampler::StableSkewed { alpha, rays } => {
                for (l, c, shift) in rays {
                    let sigma = (c * dt).powf(1.0 / alpha);
                    let s = StableDist::new(*alpha, 1.0, sigma).expect("validated").sample(rng) - shift * dt;
                    for (o, v) in out.iter_mut().zip(l) {
                        *o += v * s;
                    }
                }
                0
            }
            JumpSampler::CompoundPoisson { rate, law, compensator } => {
                for (o, c) in out.iter_mut().zip(compensator) {
                    *o -= c * dt;
                }
                let n = poisson(rate * dt, rng);
                for _ in 0..n {
                    match law {
                        JumpLaw::PointMasses { atoms, weights } => {
                            let a = &atoms[pick(weights, rng)];
                            for (o, v) in out.iter_mut().zip(a) {
                                *o += v;
                            }
                        }
                        JumpLaw::Uniform1d { half_width } => {
                            out[0] += half_width * (2.0 * rng.random::<f64>() - 1.0);
                        }
                    }
                }
                n
            }
            JumpSampler::Truncated {
                rate,
                table,
                angular,
                small_chol,
                drift,
            } => {
                for (o, b) in out.iter_mut().zip(drift) {
                    *o += b * dt;
                }
                add_gaussian(dim, small_chol, dt.sqrt(), rng, out);
                let n = poisson(rate * dt, rng);
                let mut dir = vec![0.0; dim];
                for _ in 0..n {
                    let r = table.sample(rng);
                    match angular {
                        Angular::Uniform => uniform_direction(dim, rng, &mut dir),
                        Angular::Discrete { directions, weights } => {
                            dir.copy_from_slice(&directions[pick(weights, rng)]);
                        }
                    }
                    for (o, v) in out.iter_mut().zip(&dir) {
                        *o += r * v;
                    }
                }
                n
            }
        }
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let n: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    n as u64
}
