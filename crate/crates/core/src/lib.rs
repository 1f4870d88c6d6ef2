//! Online event segmentation for active perception, built on synchronized
//! dynamical systems.
//!
//! The default scenario is a camera tracking a ball rolling over a sequence
//! of ramps. The camera never sees the present: its percept is delayed by a
//! fixed processing lag. Two response systems run against that delayed
//! percept. An adaptive response identifies the drive parameters online and
//! exposes a scalar prediction error; an anticipating response with delayed
//! self-feedback locks onto the percept one lag ahead, so the camera
//! controller can act on an estimate of the present. Spikes of the
//! normalized prediction error mark event boundaries, here changes of ramp
//! slope.
//!
//! Crate layout mirrors the pipeline:
//!
//! * [`dynsys`]: state vectors, parametric models, forward Euler, delay lines
//! * [`sync`]: the adaptive and anticipating responses
//! * [`segment`]: sliding-window statistics and boundary detection
//! * [`scenario`]: the ball/camera world and its image-plane projection
//! * [`config`], [`sim`], [`trace`], [`plot`]: the simulation harness

pub mod config;
pub mod dynsys;
pub mod plot;
pub mod scenario;
pub mod segment;
pub mod sim;
pub mod sync;
pub mod trace;

mod error;

pub use config::{load_config, parse_config, Preset, SimConfig};
pub use dynsys::{euler_step, eval_parametric, DelayLine, Matrix, ParamVec, StateVec, SystemModel};
pub use error::Error;
pub use plot::emit_plots;
pub use scenario::{
    drive_deriv, image_model, pd_controller, scenario_step, segment_index, slope_change_times,
    theta_for_slope, ControllerGains, RampSegment, ScenarioState,
};
pub use segment::{b_metric, detect, DetectorConfig, EventBoundary, WindowStats};
pub use sim::{run_simulation, EventLog, SimOutput, Simulation, TraceRecord};
pub use sync::{
    chen_controller, learning_update, lyapunov_v, AdaptiveResponse, AnticipatingResponse,
    PredictionError,
};
pub use trace::{write_events, write_ground_truth, write_trace};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
