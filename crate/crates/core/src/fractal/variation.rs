use crate::error::{invalid, Result};
use crate::indices::{IndexEstimate, IndexKind};
use crate::simulate::SamplePath;

/// Largest ratio between the finest and the coarser variation estimate that
/// still counts as stabilized.
pub const VARIATION_RATIO: f64 = 1.1;
/// The coarser estimate uses meshes up to `2^{-(K - MESH_GAP)}`.
const MESH_GAP: u32 = 2;

fn dyadic_levels(path: &SamplePath) -> Result<u32> {
    let steps = path.len().saturating_sub(1);
    if steps == 0 || !steps.is_power_of_two() {
        return Err(invalid("path", "needs 2^K + 1 equally spaced points"));
    }
    let h = path.times[1] - path.times[0];
    if path.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(invalid("path", "grid is not uniform"));
    }
    Ok(steps.trailing_zeros())
}

/// `sums[k][j]`: `Σ |ΔX|^{p_j}` over the increments at mesh `2^{-k}` of the
/// path's own horizon, `k = 0..=K`.
pub fn variation_sums(path: &SamplePath, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    if ps.iter().any(|p| !(*p > 0.0)) {
        return Err(invalid("p", "must be positive"));
    }
    let k_max = dyadic_levels(path)?;
    let dim = path.dim;
    Ok((0..=k_max)
        .map(|k| {
            let stride = 1usize << (k_max - k);
            let mut acc = vec![0.0; ps.len()];
            for j in 0..(1usize << k) {
                let a = path.position(j * stride);
                let b = path.position((j + 1) * stride);
                let r = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                if r > 0.0 {
                    let l = r.ln();
                    for (s, p) in acc.iter_mut().zip(ps) {
                        *s += (p * l).exp();
                    }
                }
            }
            debug_assert!(dim > 0);
            acc
        })
        .collect())
}

fn running_sup(sums: &[Vec<f64>], upto: usize, j: usize) -> f64 {
    sums[..=upto].iter().map(|s| s[j]).fold(0.0, f64::max)
}

/// Supremum of the `p`-variation sums over the nested dyadic subdivisions
/// of the path grid, a lower bound for the true `p`-variation.
pub fn p_variation(path: &SamplePath, p: f64) -> Result<f64> {
    let sums = variation_sums(path, &[p])?;
    Ok(running_sup(&sums, sums.len() - 1, 0))
}

/// Smallest exponent in `ps` from which on the dyadic `p`-variation has
/// stabilized: its value over all meshes exceeds the value over meshes up to
/// four times coarser by at most [`VARIATION_RATIO`].
pub fn variation_index(path: &SamplePath, ps: &[f64]) -> Result<IndexEstimate> {
    if ps.is_empty() || ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("p_grid", "must be nonempty and increasing"));
    }
    let sums = variation_sums(path, ps)?;
    let k = sums.len() - 1;
    if k < MESH_GAP as usize + 2 {
        return Err(invalid("path", "too few dyadic levels"));
    }
    let ratios: Vec<f64> = (0..ps.len())
        .map(|j| {
            let fine = running_sup(&sums, k, j);
            let coarse = running_sup(&sums, k - MESH_GAP as usize, j);
            if coarse > 0.0 {
                fine / coarse
            } else {
                1.0
            }
        })
        .collect();
    let mut idx = ps.len();
    while idx > 0 && ratios[idx - 1] <= VARIATION_RATIO {
        idx -= 1;
    }
    let mut warnings = Vec::new();
    let degenerate = idx == ps.len();
    if degenerate {
        warnings.push("variation did not stabilize on the exponent grid".into());
    }
    Ok(IndexEstimate {
        value: if degenerate { ps[ps.len() - 1] } else { ps[idx] },
        kind: IndexKind::BetaUpperStar,
        grid: ps.to_vec(),
        envelope: ratios,
        slope: f64::NAN,
        r_squared: f64::NAN,
        monotone_repaired: false,
        degenerate,
        capped: false,
        warnings,
    })
}
