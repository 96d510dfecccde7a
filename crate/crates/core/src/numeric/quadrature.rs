//! Adaptive Gauss–Kronrod quadrature and an extrapolated integrator for
//! oscillatory tails.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Requested accuracy: the integral is accepted once the error estimate is
/// below `max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-8, 1e-10)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Integral {
    pub const ZERO: Integral = Integral { value: 0.0, error: 0.0 };
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Globally adaptive 15-point Gauss–Kronrod integration over `[a, b]`.
///
/// Fails with [`Error::Quadrature`] if `max_intervals` bisections do not
/// bring the summed error estimate under the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance, max_intervals: usize) -> Result<Integral> {
    if a == b {
        return Ok(Integral::ZERO);
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    while total_err > tol.target(total) {
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature {
                partial: total,
                achieved: total_err,
                requested: tol.target(total),
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, val, err) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // interval collapsed to machine precision; nothing left to refine
            intervals.push((lo, hi, val, 0.0));
            total_err -= err;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - val;
        total_err += e1 + e2 - err;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // re-sum for a stable final value
    let value = intervals.iter().map(|iv| iv.2).sum();
    let error = intervals.iter().map(|iv| iv.3).sum();
    Ok(Integral { value, error })
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the highest-order even-column estimate.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return *partial_sums.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = cur[n - 1];
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff == 0.0 || !diff.is_finite() {
                return cur[k + 1];
            }
            next.push(prev[k + 1] + 1.0 / diff);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            let last = cur[cur.len() - 1];
            if last.is_finite() {
                best = last;
            }
        }
    }
    best
}

/// Integrates `f` over `[start, ∞)` where `f` oscillates with zeros at
/// `first_zero + k * spacing`. Each half-period is integrated adaptively and
/// the alternating partial sums are accelerated with Wynn's epsilon.
pub fn integrate_oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    first_zero: f64,
    spacing: f64,
    tol: Tolerance,
) -> Result<Integral> {
    const MAX_TERMS: usize = 400;
    const WINDOW: usize = 24;
    let piece_tol = Tolerance::new(tol.abs * 1e-3, tol.rel * 1e-2);
    let mut partial = Vec::with_capacity(64);
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut lo = start;
    let mut hi = if first_zero > start {
        first_zero
    } else {
        first_zero + spacing * ((start - first_zero) / spacing).floor() + spacing
    };
    let mut last_extrapolated = f64::NAN;
    let mut small_run = 0;
    for k in 0..MAX_TERMS {
        let piece = integrate(&f, lo, hi, piece_tol, 200)?;
        sum += piece.value;
        err += piece.error;
        partial.push(sum);
        if piece.value.abs() < 1e-3 * tol.abs {
            small_run += 1;
            if small_run >= 3 {
                return Ok(Integral { value: sum, error: err });
            }
        } else {
            small_run = 0;
        }
        if k >= 8 && k % 2 == 0 {
            let from = partial.len().saturating_sub(WINDOW);
            let ext = wynn_epsilon(&partial[from..]);
            let delta = (ext - last_extrapolated).abs();
            if delta.is_finite() && delta < tol.target(ext) * 0.1 {
                return Ok(Integral {
                    value: ext,
                    error: err + delta,
                });
            }
            last_extrapolated = ext;
        }
        lo = hi;
        hi += spacing;
    }
    Err(Error::Quadrature {
        partial: sum,
        achieved: err,
        requested: tol.target(sum),
    })
}
