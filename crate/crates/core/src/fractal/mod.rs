//! Time sets with known dimension and dimension estimators for path images.

mod boxcount;
mod energy;
mod moment;
mod timeset;
mod variation;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use boxcount::{box_counting_dim, BoxOptions};
pub use energy::{
    capacity_dim_lower, energy_integral, energy_profile, CapacityOptions, CapacityRule, EnergyValue, CLAMP_FLOOR,
};
pub use moment::{moment_index, MomentIndex};
pub use timeset::{make_cantor, TimeSet, MAX_DEPTH};
pub use variation::{p_variation, variation_index, variation_sums, VARIATION_RATIO};

use crate::error::{invalid, Result};
use crate::numeric::stats::{median, std_dev};
use crate::simulate::SamplePath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Box,
    Capacity,
    Variation,
    Moment,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Box => "box",
            Method::Capacity => "capacity",
            Method::Variation => "variation",
            Method::Moment => "moment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub method: Method,
    /// Range of the fitted abscissa: box sizes, or the probed exponents.
    pub window: (f64, f64),
    pub slope: f64,
    pub r_squared: f64,
    /// Standard deviation across replicas; zero for a single path.
    pub dispersion: f64,
    pub replicas: usize,
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

impl DimensionEstimate {
    /// Decades spanned by the window.
    pub fn window_decades(&self) -> f64 {
        (self.window.1 / self.window.0).log10().abs()
    }

    /// Median across replicas, with the standard deviation as dispersion.
    /// Warnings are deduplicated.
    pub fn summarize(estimates: &[DimensionEstimate]) -> Result<DimensionEstimate> {
        let first = estimates.first().ok_or_else(|| invalid("estimates", "empty"))?;
        let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
        let mut warnings: Vec<String> = Vec::new();
        for w in estimates.iter().flat_map(|e| &e.warnings) {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        let low = estimates.iter().filter(|e| e.low_confidence).count();
        Ok(DimensionEstimate {
            value: median(&values),
            method: first.method,
            window: first.window,
            slope: median(&estimates.iter().map(|e| e.slope).collect::<Vec<_>>()),
            r_squared: median(&estimates.iter().map(|e| e.r_squared).collect::<Vec<_>>()),
            dispersion: if values.len() > 1 { std_dev(&values) } else { 0.0 },
            replicas: estimates.len(),
            low_confidence: 2 * low > estimates.len(),
            warnings,
        })
    }
}

/// CSV rows `method,value,window_lo,window_hi,r_squared,dispersion`.
pub fn write_estimates_csv<W: Write>(out: W, estimates: &[DimensionEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "value", "window_lo", "window_hi", "r_squared", "dispersion"])?;
    for e in estimates {
        w.write_record([
            e.method.as_str().to_string(),
            format!("{:?}", e.value),
            format!("{:?}", e.window.0),
            format!("{:?}", e.window.1),
            format!("{:?}", e.r_squared),
            format!("{:?}", e.dispersion),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Positions of `path` at the points of `set`, row-major.
pub fn image_points(path: &SamplePath, set: &TimeSet) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.dim << set.depth());
    for t in set.points() {
        let i = path
            .index_of(t)
            .ok_or_else(|| invalid("path", format!("time {t} of the set is not on the path grid")))?;
        out.extend_from_slice(path.position(i));
    }
    Ok(out)
}
