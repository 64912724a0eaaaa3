//! Trade-off estimation: pipelines, sweeps, frontiers and evaluation of
//! external representations.

mod curve;
mod evaluate;
mod frontier;
mod pipeline;
mod sweep;

pub use curve::{CurveBin, PointFailure, PointSource, TradeoffCurve, TradeoffPoint, DEFAULT_BIN_WIDTH};
pub use evaluate::{evaluate_representation, EvaluationReport};
pub use frontier::{
    classify_region, dist_to_curve, pareto_front, CurveInterpolant, Normalizers, Region, RegionResult,
    DEFAULT_DISTANCE_WEIGHT,
};
pub use pipeline::{estimate_dst_point, estimate_lst_point, run_pipeline, PipelineConfig, PipelineOutcome};
pub use sweep::{default_lambda_grid, sweep, SweepMode, SweepRequest};
