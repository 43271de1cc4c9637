//! Association costs between a detection and a predicted track.
//!
//! Tracks are compared in observation space: the 10-dim state is projected
//! through the same selector the Kalman update uses.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::gaussian::{js_divergence, GaussianNd};
use crate::motion::{ClassNoise, Detection, TrackState, HEADING};

/// How the heading residual between a detection and a track is folded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadingMode {
    /// Box orientation is ambiguous by π; residual folded into `[-π/2, π/2]`.
    #[default]
    Flip,
    /// Residual kept in `(-π, π]`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostKind {
    /// Heading-penalized JS divergence scaled by the track's mean covariance.
    #[default]
    Guided,
    /// Heading-penalized JS divergence alone.
    Modified,
    /// Mahalanobis distance of the innovation.
    Mahalanobis,
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [CostKind::Guided, CostKind::Modified, CostKind::Mahalanobis];

    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::Guided => "guided",
            CostKind::Modified => "modified",
            CostKind::Mahalanobis => "mahalanobis",
        }
    }
}

impl HeadingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HeadingMode::Flip => "flip",
            HeadingMode::Full => "full",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for HeadingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CostKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown cost kind `{s}`")))
    }
}

impl FromStr for HeadingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip" => Ok(HeadingMode::Flip),
            "full" => Ok(HeadingMode::Full),
            _ => Err(Error::InvalidInput(format!("unknown heading mode `{s}`"))),
        }
    }
}

/// Cost settings resolved for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig {
    pub heading_mode: HeadingMode,
    /// Pairs with cost at or above this are never associated.
    pub gate_threshold: f64,
    pub kind: CostKind,
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate_threshold.is_finite() && self.gate_threshold > 0.0) {
            return Err(Error::Config(format!(
                "gate threshold must be finite and > 0, got {}",
                self.gate_threshold
            )));
        }
        Ok(())
    }
}

/// `N(H·mean, H·cov·Hᵀ)`.
pub fn project_track(t: &TrackState) -> Result<GaussianNd> {
    observation_gaussian(t.observed().as_slice(), &t.observed_cov())
}

pub fn detection_gaussian(d: &Detection) -> Result<GaussianNd> {
    observation_gaussian(d.state.as_slice(), &d.cov)
}

fn observation_gaussian(mean: &[f64], cov: &crate::motion::Matrix7) -> Result<GaussianNd> {
    GaussianNd::new(
        DVector::from_column_slice(mean),
        DMatrix::from_column_slice(7, 7, cov.as_slice()),
    )
}

/// Heading difference `θd − θt`, folded according to `mode`.
pub fn wrap_heading_residual(theta_d: f64, theta_t: f64, mode: HeadingMode) -> f64 {
    let delta = wrap_angle(theta_d - theta_t);
    match mode {
        HeadingMode::Full => delta,
        HeadingMode::Flip if delta.abs() > FRAC_PI_2 => delta - delta.signum() * PI,
        HeadingMode::Flip => delta,
    }
}

/// `α = 2 − cos Δθ`; in `[1, 2]` for flip mode, `[1, 3]` for full mode.
pub fn heading_penalty(theta_d: f64, theta_t: f64, mode: HeadingMode) -> f64 {
    2.0 - wrap_heading_residual(theta_d, theta_t, mode).cos()
}

/// Heading-penalized JS divergence between a detection and a projected track.
///
/// Inside the divergence the track heading is replaced by the representative
/// nearest the detection heading, so angle wrap never shows up as distance.
pub fn modified_divergence(d: &Detection, t: &TrackState, mode: HeadingMode) -> Result<f64> {
    let theta_d = d.state[HEADING];
    let theta_t = t.mean[HEADING];
    let residual = wrap_heading_residual(theta_d, theta_t, mode);
    let mut track_mean = t.observed();
    track_mean[HEADING] = theta_d - residual;

    let det = detection_gaussian(d)?;
    let track = observation_gaussian(track_mean.as_slice(), &t.observed_cov())?;
    Ok(js_divergence(&det, &track)? * (2.0 - residual.cos()))
}

/// Average of the position and size variances; heading variance excluded.
pub fn mean_covariance(t: &TrackState) -> f64 {
    [0, 1, 2, 4, 5, 6].iter().map(|&i| t.cov[(i, i)]).sum::<f64>() / 6.0
}

/// Modified divergence scaled by the track's mean covariance.
pub fn guided_cost(d: &Detection, t: &TrackState, cfg: &CostConfig) -> Result<f64> {
    Ok(modified_divergence(d, t, cfg.heading_mode)? * mean_covariance(t))
}

/// `sqrt(rᵀ S⁻¹ r)` with `S = H P Hᵀ + R`.
pub fn mahalanobis_cost(d: &Detection, t: &TrackState, noise: &ClassNoise) -> Result<f64> {
    let mut r = d.state - t.observed();
    r[HEADING] = wrap_angle(r[HEADING]);
    let s = t.observed_cov() + noise.r();
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("innovation covariance is not positive definite".into()))?;
    Ok(r.dot(&chol.solve(&r)).max(0.0).sqrt())
}

/// Cost of the configured kind, before gating.
pub fn pair_cost(d: &Detection, t: &TrackState, cfg: &CostConfig, noise: &ClassNoise) -> Result<f64> {
    match cfg.kind {
        CostKind::Guided => guided_cost(d, t, cfg),
        CostKind::Modified => modified_divergence(d, t, cfg.heading_mode),
        CostKind::Mahalanobis => mahalanobis_cost(d, t, noise),
    }
}
