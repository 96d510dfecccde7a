//! Checks of predicted dimension bounds and of the heat-kernel style
//! diagnostics against simulation.

mod bounds;
mod diagnostics;
mod matrix;

pub use bounds::{verify_dimension_bounds, BoundReport, VerifyOptions, DEFAULT_DIMENSION_REPLICAS, DEFAULT_TOLERANCE};
pub use diagnostics::{
    check_density_scaling, check_moment_inequality, check_small_ball_comparison, DensityScalingReport, MomentReport,
    MomentRow, SmallBallProbe, SmallBallReport, MIN_PROBABILITY_REPLICAS,
};
pub use matrix::{run_experiment_matrix, write_report_csv, CellOutcome, MatrixReport, PROBE_NOTE};
