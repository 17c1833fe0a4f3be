//! Config-driven scenario runs: load, sweep the trajectory frame by frame,
//! export maps, detections and the localization track.
//!
//! Frame `k` is taken at `start_time + k·frame_period`. Files written to the
//! output directory:
//!
//! | file                     | content                                          |
//! |--------------------------|--------------------------------------------------|
//! | `manifest.toml`          | resolved config; valid input for a rerun         |
//! | `frame_XXXX.bin`         | baseband frame (see [`crate::matrix_io`])        |
//! | `rdmap_XXXX.{bin,csv}`   | range-Doppler power map                          |
//! | `rdmap_blur_XXXX.*`      | the same after the Gaussian blur                 |
//! | `detections_XXXX.csv`    | detected peaks                                   |
//! | `paths_XXXX.txt`         | channel paths and reflector returns              |
//! | `trajectory.csv`         | true and estimated track, running mean error     |
//!
//! The filter gets odometry from consecutive true poses and the forward
//! speed of the current pose.

mod config;
mod run;
pub mod units;

pub use config::{ChannelOptions, DspOptions, ExportOptions, PfOptions, ScenarioConfig};
pub use run::{
    forward_speed, odometry_between, process_frame, process_frame_file, replay_detections, run_scenario, run_with,
    trace_dump, validate_config, FrameOutput, Processed, RunSummary, Simulator, PF_SEED_SALT,
};
