//! Error metrics, evaluation reports, file formats and SVG figures.

pub mod io;
mod metrics;
pub mod plot;

pub use metrics::{
    evaluate, improvement_percent, score_model, score_ode, sse_z, sse_z_per_state, EvalReport,
    ModelScores, TrajectoryRecord,
};
pub use plot::{scatter_chart, state_chart, ScatterPoint};
