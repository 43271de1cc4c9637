//! Constant-velocity Kalman model for 3D boxes.
//!
//! Observation vector: `(x, y, z, θ, l, w, h)`.
//! Track state: the observation followed by `(ẋ, ẏ, ż)`.

mod calibrate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};

pub use calibrate::{calibrate, CalibrationSet, MatchedPair, TruthTrack, VARIANCE_FLOOR};

pub const OBS_DIM: usize = 7;
pub const STATE_DIM: usize = 10;

/// Index of the heading inside both the observation and the state.
pub const HEADING: usize = 3;

/// Box dimensions never drop below this after an update (meters).
pub const MIN_DIMENSION: f64 = 0.05;

pub type Vector7 = SVector<f64, OBS_DIM>;
pub type Matrix7 = SMatrix<f64, OBS_DIM, OBS_DIM>;
pub type Vector10 = SVector<f64, STATE_DIM>;
pub type Matrix10 = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type Matrix7x10 = SMatrix<f64, OBS_DIM, STATE_DIM>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Car,
    Pedestrian,
    Cyclist,
    Bicycle,
    Motorcycle,
    Bus,
    Truck,
    Trailer,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 8] = [
        ClassLabel::Car,
        ClassLabel::Pedestrian,
        ClassLabel::Cyclist,
        ClassLabel::Bicycle,
        ClassLabel::Motorcycle,
        ClassLabel::Bus,
        ClassLabel::Truck,
        ClassLabel::Trailer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Car => "car",
            ClassLabel::Pedestrian => "pedestrian",
            ClassLabel::Cyclist => "cyclist",
            ClassLabel::Bicycle => "bicycle",
            ClassLabel::Motorcycle => "motorcycle",
            ClassLabel::Bus => "bus",
            ClassLabel::Truck => "truck",
            ClassLabel::Trailer => "trailer",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassLabel::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown class `{s}`")))
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One observed 3D box.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u64,
    pub class: ClassLabel,
    pub state: Vector7,
    pub cov: Matrix7,
    pub score: f64,
}

impl Detection {
    /// Validates the box and wraps its heading into `(-π, π]`.
    pub fn new(frame: u64, class: ClassLabel, mut state: Vector7, cov: Matrix7, score: f64) -> Result<Self> {
        if state.iter().chain(cov.iter()).any(|v| !v.is_finite()) || !score.is_finite() {
            return Err(Error::InvalidInput("non-finite detection field".into()));
        }
        if state[4] <= 0.0 || state[5] <= 0.0 || state[6] <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "box dimensions must be positive, got l={} w={} h={}",
                state[4], state[5], state[6]
            )));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidInput(format!("score {score} outside [0, 1]")));
        }
        state[HEADING] = wrap_angle(state[HEADING]);
        Ok(Self {
            frame,
            class,
            state,
            cov,
            score,
        })
    }

    /// Builds a detection whose covariance is the per-class diagonal.
    pub fn with_class_noise(frame: u64, class: ClassLabel, state: Vector7, score: f64, noise: &NoiseConfig) -> Result<Self> {
        let cov = Matrix7::from_diagonal(&Vector7::from(noise.class(class)?.det_var));
        Self::new(frame, class, state, cov, score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub mean: Vector10,
    pub cov: Matrix10,
}

impl TrackState {
    /// The observed part of the mean.
    pub fn observed(&self) -> Vector7 {
        self.mean.fixed_rows::<OBS_DIM>(0).into_owned()
    }

    pub fn observed_cov(&self) -> Matrix7 {
        self.cov.fixed_view::<OBS_DIM, OBS_DIM>(0, 0).into_owned()
    }
}

/// Per-class noise statistics. All entries are variances.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassNoise {
    /// Detection covariance diagonal.
    pub det_var: [f64; OBS_DIM],
    /// Initial velocity variances for new tracks.
    pub kin_var: [f64; 3],
    /// Process noise diagonal.
    pub q_var: [f64; STATE_DIM],
    /// Measurement noise diagonal.
    pub r_var: [f64; OBS_DIM],
}

impl ClassNoise {
    pub fn validate(&self, class: ClassLabel) -> Result<()> {
        let groups: [(&str, &[f64]); 4] = [
            ("det_var", &self.det_var),
            ("kin_var", &self.kin_var),
            ("q_var", &self.q_var),
            ("r_var", &self.r_var),
        ];
        for (name, values) in groups {
            if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Config(format!(
                    "class `{class}`: {name} entries must be finite and > 0, found {bad}"
                )));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> Matrix10 {
        Matrix10::from_diagonal(&Vector10::from(self.q_var))
    }

    pub fn r(&self) -> Matrix7 {
        Matrix7::from_diagonal(&Vector7::from(self.r_var))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Frame period in seconds.
    pub dt: f64,
    pub classes: BTreeMap<ClassLabel, ClassNoise>,
}

impl NoiseConfig {
    pub fn class(&self, class: ClassLabel) -> Result<&ClassNoise> {
        self.classes
            .get(&class)
            .ok_or_else(|| Error::Config(format!("no noise entry for class `{class}`")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        for (class, noise) in &self.classes {
            noise.validate(*class)?;
        }
        Ok(())
    }
}

/// Observation selector: picks the first seven state entries.
pub fn observation_matrix() -> Matrix7x10 {
    Matrix7x10::identity()
}

/// Constant-velocity transition for period `dt`.
pub fn transition_matrix(dt: f64) -> Matrix10 {
    let mut a = Matrix10::identity();
    a[(0, 7)] = dt;
    a[(1, 8)] = dt;
    a[(2, 9)] = dt;
    a
}

/// Starts a track at the detection with zero velocity.
pub fn init_track(d: &Detection, noise: &NoiseConfig) -> Result<TrackState> {
    let class = noise.class(d.class)?;
    let mut mean = Vector10::zeros();
    mean.fixed_rows_mut::<OBS_DIM>(0).copy_from(&d.state);
    let mut cov = Matrix10::zeros();
    cov.fixed_view_mut::<OBS_DIM, OBS_DIM>(0, 0).copy_from(&d.cov);
    for (i, v) in class.kin_var.iter().enumerate() {
        cov[(OBS_DIM + i, OBS_DIM + i)] = *v;
    }
    Ok(TrackState { mean, cov })
}

pub fn predict(t: &TrackState, noise: &ClassNoise, dt: f64) -> TrackState {
    let a = transition_matrix(dt);
    let mut mean = a * t.mean;
    mean[HEADING] = wrap_angle(mean[HEADING]);
    let cov = a * t.cov * a.transpose() + noise.q();
    TrackState {
        mean,
        cov: symmetrize(&cov),
    }
}

pub fn update(t: &TrackState, d: &Detection, noise: &ClassNoise) -> Result<TrackState> {
    let h = observation_matrix();
    let pht = t.cov * h.transpose();
    let s = h * pht + noise.r();
    let s_chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("innovation covariance is not positive definite".into()))?;
    // K = P Hᵀ S⁻¹, computed as (S⁻¹ H P)ᵀ since S is symmetric
    let gain = s_chol.solve(&pht.transpose()).transpose();

    let mut innovation = d.state - h * t.mean;
    innovation[HEADING] = wrap_angle(innovation[HEADING]);

    let mut mean = t.mean + gain * innovation;
    mean[HEADING] = wrap_angle(mean[HEADING]);
    for i in 4..OBS_DIM {
        mean[i] = mean[i].max(MIN_DIMENSION);
    }
    let cov = (Matrix10::identity() - gain * h) * t.cov;
    Ok(TrackState {
        mean,
        cov: symmetrize(&cov),
    })
}

fn symmetrize(m: &Matrix10) -> Matrix10 {
    (m + m.transpose()) * 0.5
}
