use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::simulate::TimeGrid;

/// Largest supported construction depth.
pub const MAX_DEPTH: u32 = 24;

/// Compact subsets of `[0, 1]` with known Hausdorff dimension, represented by
/// the left endpoints of their level-`depth` construction intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeSet {
    /// `[0, 1]`, points `k 2^{-depth}`.
    Interval { depth: u32 },
    /// Middle Cantor set keeping two intervals of relative length `ratio`.
    Cantor { ratio: f64, depth: u32 },
    /// Finite union; each component carries equal mass.
    Union { parts: Vec<TimeSet> },
}

pub fn make_cantor(ratio: f64, depth: u32) -> Result<TimeSet> {
    let set = TimeSet::Cantor { ratio, depth };
    set.validate()?;
    Ok(set)
}

impl TimeSet {
    pub fn interval(depth: u32) -> Result<TimeSet> {
        let set = TimeSet::Interval { depth };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TimeSet::Interval { depth } => check_depth(*depth),
            TimeSet::Cantor { ratio, depth } => {
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    return Err(invalid("ratio", format!("{ratio} not in (0, 1/2)")));
                }
                check_depth(*depth)
            }
            TimeSet::Union { parts } => {
                if parts.is_empty() {
                    return Err(invalid("parts", "union needs at least one component"));
                }
                parts.iter().try_for_each(TimeSet::validate)
            }
        }
    }

    pub fn exact_dimension(&self) -> f64 {
        match self {
            TimeSet::Interval { .. } => 1.0,
            TimeSet::Cantor { ratio, .. } => 2f64.ln() / (1.0 / ratio).ln(),
            TimeSet::Union { parts } => parts.iter().map(TimeSet::exact_dimension).fold(0.0, f64::max),
        }
    }

    /// Depth of the construction; the maximum over components of a union.
    pub fn depth(&self) -> u32 {
        match self {
            TimeSet::Interval { depth } | TimeSet::Cantor { depth, .. } => *depth,
            TimeSet::Union { parts } => parts.iter().map(TimeSet::depth).max().unwrap_or(0),
        }
    }

    /// The same set built to a different depth.
    pub fn at_depth(&self, depth: u32) -> TimeSet {
        match self {
            TimeSet::Interval { .. } => TimeSet::Interval { depth },
            TimeSet::Cantor { ratio, .. } => TimeSet::Cantor { ratio: *ratio, depth },
            TimeSet::Union { parts } => TimeSet::Union {
                parts: parts.iter().map(|p| p.at_depth(depth)).collect(),
            },
        }
    }

    /// Representative points in construction order. For the interval and the
    /// Cantor set the order is by binary address, which is also increasing.
    pub fn points(&self) -> Vec<f64> {
        match self {
            TimeSet::Interval { depth } => {
                let n = 1u64 << depth;
                (0..n).map(|k| k as f64 / n as f64).collect()
            }
            TimeSet::Cantor { ratio, depth } => {
                let n = 1usize << depth;
                let steps: Vec<f64> = (1..=*depth).map(|k| (1.0 - ratio) * ratio.powi(k as i32 - 1)).collect();
                (0..n)
                    .map(|i| {
                        steps
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| (i >> (*depth as usize - 1 - k)) & 1 == 1)
                            .map(|(_, s)| s)
                            .sum()
                    })
                    .collect()
            }
            TimeSet::Union { parts } => parts.iter().flat_map(TimeSet::points).collect(),
        }
    }

    /// Natural probability weights, aligned with `points`.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            TimeSet::Interval { depth } | TimeSet::Cantor { depth, .. } => {
                let n = 1usize << depth;
                vec![1.0 / n as f64; n]
            }
            TimeSet::Union { parts } => {
                let share = 1.0 / parts.len() as f64;
                parts
                    .iter()
                    .flat_map(|p| p.weights().into_iter().map(move |w| w * share))
                    .collect()
            }
        }
    }

    /// Sorted distinct points, as a simulation grid.
    pub fn time_grid(&self) -> TimeGrid {
        let mut t = self.points();
        t.push(0.0);
        t.sort_by(f64::total_cmp);
        t.dedup();
        TimeGrid::Explicit(t)
    }

    pub fn describe(&self) -> String {
        match self {
            TimeSet::Interval { depth } => format!("interval(depth={depth})"),
            TimeSet::Cantor { ratio, depth } => format!("cantor(r={ratio},depth={depth})"),
            TimeSet::Union { parts } => {
                format!(
                    "union({})",
                    parts.iter().map(TimeSet::describe).collect::<Vec<_>>().join(";")
                )
            }
        }
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(invalid("depth", format!("{depth} not in 1..={MAX_DEPTH}")));
    }
    Ok(())
}
