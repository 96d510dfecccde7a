use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Frequencies `r·ℓ` for log-spaced magnitudes `r` and a fixed set of unit
/// directions `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub magnitudes: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

/// Default probe directions: `±1` on the line, eight equally spaced
/// directions in the plane, and `±e_i` together with `±(1,…,1)/√d` above.
pub fn default_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..8)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 4.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(2 * dim + 2);
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; dim];
                    e[i] = s;
                    out.push(e);
                }
            }
            let c = 1.0 / (dim as f64).sqrt();
            out.push(vec![c; dim]);
            out.push(vec![-c; dim]);
            out
        }
    }
}

impl FrequencyGrid {
    /// Magnitudes `2^lo, 2^{lo+1}, …, 2^hi` with the default directions.
    pub fn dyadic(dim: usize, lo: i32, hi: i32) -> Self {
        Self {
            magnitudes: (lo..=hi).map(|k| 2f64.powi(k)).collect(),
            directions: default_directions(dim),
        }
    }

    /// `n_per_decade` log-spaced magnitudes per decade over `[lo, hi]`.
    pub fn log_spaced(dim: usize, lo: f64, hi: f64, n_per_decade: usize) -> Self {
        let decades = (hi / lo).log10();
        let n = ((decades * n_per_decade as f64).round() as usize).max(1);
        Self {
            magnitudes: (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect(),
            directions: default_directions(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    /// Number of decades spanned by the magnitudes.
    pub fn decades(&self) -> f64 {
        match (self.magnitudes.first(), self.magnitudes.last()) {
            (Some(a), Some(b)) if *a > 0.0 => (b / a).log10(),
            _ => 0.0,
        }
    }

    pub fn validate(&self, min_decades: f64) -> Result<()> {
        if self.magnitudes.is_empty() || self.directions.is_empty() {
            return Err(invalid("xi_grid", "grid is empty"));
        }
        if self.magnitudes.windows(2).any(|w| w[1] <= w[0]) || self.magnitudes[0] <= 0.0 {
            return Err(invalid(
                "xi_grid",
                "magnitudes must be positive and strictly increasing",
            ));
        }
        if self.decades() + 1e-9 < min_decades {
            return Err(invalid(
                "xi_grid",
                format!("spans {:.2} decades, need at least {min_decades}", self.decades()),
            ));
        }
        Ok(())
    }

    pub fn point(&self, magnitude: f64, direction: usize) -> Vec<f64> {
        self.directions[direction].iter().map(|v| v * magnitude).collect()
    }
}

/// Finite set of state points standing in for the whole state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateGrid {
    pub points: Vec<Vec<f64>>,
}

impl StateGrid {
    /// `n` equally spaced points per axis on `[−half_width, half_width]^d`.
    pub fn uniform(dim: usize, n: usize, half_width: f64) -> Self {
        let axis: Vec<f64> = if n == 1 {
            vec![0.0]
        } else {
            (0..n)
                .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
                .collect()
        };
        let mut points = vec![Vec::with_capacity(dim)];
        for _ in 0..dim {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        Self { points }
    }

    /// The default probe: 41 points per axis over `[−10, 10]^d`.
    pub fn default_probe(dim: usize) -> Self {
        Self::uniform(dim, 41, 10.0)
    }

    pub fn single(x: Vec<f64>) -> Self {
        Self { points: vec![x] }
    }

    /// Adds extra probe points, e.g. states visited by simulated paths.
    pub fn extend(&mut self, extra: impl IntoIterator<Item = Vec<f64>>) {
        self.points.extend(extra);
    }
}
