//! Sequence ingestion, execution, evaluation and reporting.

mod io;
mod metrics;
mod render;
mod runner;
mod sequence;
mod synth;

pub use io::{parse_results, read_results, write_ranking_csv, write_report, write_results};
pub use metrics::{center_error, evaluate, iou, MetricsReport, PRECISION_THRESHOLD_PX};
pub use render::{draw_rect, render_overlay};
pub use runner::{run_tracker, run_tracker_observed, RunReport, RunResult};
pub use sequence::{load_sequence, parse_groundtruth, polygon_to_rect, Frames, Sequence};
pub use synth::{same_luminance_color, synth_sequence, Background, Distractor, SynthSpec, TargetPattern};
