//! 3D multi-object tracking with a Gaussian-divergence association cost.
//!
//! Detections and tracks are treated as Gaussians over
//! `(x, y, z, θ, l, w, h)`. A constant-velocity Kalman filter carries each
//! track; association uses a heading-penalised Jensen–Shannon divergence
//! scaled by the track's mean covariance, matched greedily.
//!
//! ```
//! use ugtrack::gaussian::{js_divergence, GaussianNd};
//!
//! let p = GaussianNd::from_diagonal(&[0.0], &[1.0]).unwrap();
//! let q = GaussianNd::from_diagonal(&[1.0], &[1.0]).unwrap();
//! let d = js_divergence(&p, &q).unwrap();
//! assert!(d > 0.0 && d < std::f64::consts::LN_2);
//! ```

pub mod angle;
pub mod association;
pub mod config;
pub mod cost;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod lifecycle;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod simulator;

pub use config::{ClassSettings, Gates, TrackerConfig};
pub use cost::{CostKind, HeadingMode};
pub use error::{Error, Result};
pub use lifecycle::{EmittedTrack, LifecycleConfig, TrackStatus};
pub use motion::{ClassLabel, Detection, NoiseConfig, TrackState};
pub use pipeline::{assemble_frames, run_sequence, FrameData, FrameOutput, Pose, RawDetection, RunStats, Tracker};
