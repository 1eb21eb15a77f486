//! Scoring and analysis: error curves over context length, per-component
//! test errors and posterior-weight reports across noise levels, input
//! distribution distances, rank statistics, and the prefix-matching score
//! for attention matrices.

mod attention;
mod curves;
mod error;
mod predictor;
mod selection;
mod table;

pub use attention::{prefix_matching_score, MatchingScore};
pub use curves::{error_curve, mean_by_context_length, STREAM_CURVE};
pub use error::{MetricsError, Result};
pub use predictor::{
    ClosedFormPredictor, GdPredictor, IclPredictor, MinNormPredictor, RidgePredictor,
};
pub use selection::{
    component_test_error, input_distance, selection_report, spearman, DownstreamTask,
    SelectionConfig, STREAM_COMPONENT_ERROR, STREAM_SELECTION_TRIAL,
};
pub use table::{format_value, index_coord, ResultTable, TableRow};
