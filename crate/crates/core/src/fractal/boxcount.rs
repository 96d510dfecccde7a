use serde::{Deserialize, Serialize};

use super::{DimensionEstimate, Method};
use crate::error::{invalid, Result};
use crate::numeric::stats::ols;

/// Fewest points accepted by the box-counting estimator.
const MIN_POINTS: usize = 1000;

/// Fitting window in terms of occupied-box counts: scales with
/// `min_count ≤ N(δ) ≤ max_fraction · points` are used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxOptions {
    pub min_count: usize,
    pub max_fraction: f64,
    pub min_r_squared: f64,
}

impl Default for BoxOptions {
    fn default() -> Self {
        Self {
            min_count: 100,
            max_fraction: 0.1,
            min_r_squared: 0.98,
        }
    }
}

fn occupied(points: &[f64], dim: usize, lo: &[f64], delta: f64, scratch: &mut Vec<i64>) -> usize {
    let n = points.len() / dim;
    if dim == 1 {
        // `points` is sorted in one dimension, so the cells are monotone
        let mut count = 0;
        let mut last = i64::MIN;
        for &x in points {
            let c = ((x - lo[0]) / delta).floor() as i64;
            if c != last {
                count += 1;
                last = c;
            }
        }
        return count;
    }
    scratch.clear();
    scratch.extend(
        points
            .chunks_exact(dim)
            .flat_map(|p| p.iter().zip(lo).map(|(x, l)| ((x - l) / delta).floor() as i64)),
    );
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| scratch[a * dim..(a + 1) * dim].cmp(&scratch[b * dim..(b + 1) * dim]));
    1 + idx
        .windows(2)
        .filter(|w| scratch[w[0] * dim..(w[0] + 1) * dim] != scratch[w[1] * dim..(w[1] + 1) * dim])
        .count()
}

/// Box-counting dimension of a finite point cloud (row-major, `dim` values
/// per point) on the dyadic lattices `δ = L 2^{-k}`, `L` the largest
/// coordinate range.
pub fn box_counting_dim(points: &[f64], dim: usize, opts: &BoxOptions) -> Result<DimensionEstimate> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(invalid("points", "length must be a multiple of the dimension"));
    }
    let n = points.len() / dim;
    if n < MIN_POINTS {
        return Err(invalid("points", format!("{n} points, need at least {MIN_POINTS}")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(invalid("points", "must be finite"));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points.chunks_exact(dim) {
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    if !(extent > 0.0) {
        return Ok(DimensionEstimate {
            value: 0.0,
            method: Method::Box,
            window: (0.0, 0.0),
            slope: 0.0,
            r_squared: 0.0,
            dispersion: 0.0,
            replicas: 1,
            low_confidence: true,
            warnings: vec!["point cloud is a single point".into()],
        });
    }
    let sorted;
    let pts = if dim == 1 {
        let mut s = points.to_vec();
        s.sort_by(f64::total_cmp);
        sorted = s;
        &sorted[..]
    } else {
        points
    };
    let mut scratch = Vec::new();
    let mut deltas = Vec::new();
    let mut counts = Vec::new();
    for k in 0..64 {
        let delta = extent * 2f64.powi(-k);
        let c = occupied(pts, dim, &lo, delta, &mut scratch);
        deltas.push(delta);
        counts.push(c);
        if c as f64 > 0.5 * n as f64 {
            break;
        }
    }
    let upper = opts.max_fraction * n as f64;
    let mut sel: Vec<usize> = (0..deltas.len())
        .filter(|&i| counts[i] >= opts.min_count && counts[i] as f64 <= upper)
        .collect();
    let mut warnings = Vec::new();
    if sel.len() < 3 {
        warnings.push("calibrated window too short; fitting every unsaturated scale".into());
        sel = (0..deltas.len())
            .filter(|&i| counts[i] > 1 && counts[i] as f64 <= 0.5 * n as f64)
            .collect();
    }
    if sel.len() < 2 {
        return Err(invalid("points", "no usable scale window"));
    }
    let x: Vec<f64> = sel.iter().map(|&i| deltas[i].ln()).collect();
    let y: Vec<f64> = sel.iter().map(|&i| (counts[i] as f64).ln()).collect();
    let fit = ols(&x, &y);
    let window = (deltas[*sel.last().unwrap()], deltas[sel[0]]);
    let mut est = DimensionEstimate {
        value: (-fit.slope).clamp(0.0, dim as f64),
        method: Method::Box,
        window,
        slope: fit.slope,
        r_squared: fit.r_squared,
        dispersion: 0.0,
        replicas: 1,
        low_confidence: false,
        warnings,
    };
    if fit.r_squared < opts.min_r_squared {
        est.warnings
            .push(format!("R² {:.4} below {}", fit.r_squared, opts.min_r_squared));
    }
    if est.window_decades() < 2.0 {
        est.warnings
            .push(format!("window spans {:.2} decades", est.window_decades()));
    }
    est.low_confidence = !est.warnings.is_empty();
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn segment_and_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seg = Vec::new();
        let mut sq = Vec::new();
        for _ in 0..100_000 {
            let u: f64 = rng.random();
            seg.extend([u, 0.5 * u]);
            sq.extend([rng.random::<f64>(), rng.random::<f64>()]);
        }
        let a = box_counting_dim(&seg, 2, &BoxOptions::default()).unwrap();
        let b = box_counting_dim(&sq, 2, &BoxOptions::default()).unwrap();
        assert!((a.value - 1.0).abs() < 0.05, "{a:?}");
        assert!((b.value - 2.0).abs() < 0.05, "{b:?}");
    }

    #[test]
    fn rejects_small_clouds() {
        assert!(box_counting_dim(&[0.0; 999], 1, &BoxOptions::default()).is_err());
    }
}
