//! Per-frame orchestration: world transform, predict, associate, manage.

use nalgebra::{Matrix3, Vector3};

use crate::angle::wrap_angle;
use crate::association::{build_cost_matrix, greedy_match, Assignment};
use crate::config::TrackerConfig;
use crate::cost::mean_covariance;
use crate::error::{Error, Result};
use crate::lifecycle::{step_lifecycle, EmittedTrack, IdAllocator, TrackRecord, TrackStatus};
use crate::motion::{predict, ClassLabel, Detection, NoiseConfig, Vector7, HEADING};

/// Tolerance on `RᵀR = I` for pose rotations.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// Rigid sensor-to-world transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite pose".into()));
        }
        let err = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if err > ORTHONORMAL_TOLERANCE || rotation.determinant() <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "pose rotation is not a proper orthonormal matrix (|RᵀR - I| = {err:.3e})"
            )));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(t: [f64; 3]) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::from(t),
        }
    }

    /// Rotation about the vertical axis.
    pub fn yaw_translation(yaw: f64, t: [f64; 3]) -> Self {
        Self {
            rotation: nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), yaw).into_inner(),
            translation: Vector3::from(t),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn yaw(&self) -> f64 {
        self.rotation[(1, 0)].atan2(self.rotation[(0, 0)])
    }
}

/// A detection as read from disk, before covariance assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDetection {
    pub frame: u64,
    pub class: ClassLabel,
    pub state: Vector7,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    pub frame: u64,
    pub pose: Pose,
    pub detections: Vec<RawDetection>,
}

/// Moves a sensor-frame detection into the world frame.
pub fn transform_to_world(d: &Detection, pose: &Pose) -> Result<Detection> {
    let r = pose.rotation;
    let p = r * Vector3::new(d.state[0], d.state[1], d.state[2]) + pose.translation;
    let mut state = d.state;
    state[0] = p.x;
    state[1] = p.y;
    state[2] = p.z;
    state[HEADING] = wrap_angle(state[HEADING] + pose.yaw());

    let mut cov = d.cov;
    let rotated = r * cov.fixed_view::<3, 3>(0, 0) * r.transpose();
    cov.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotated);
    // cross terms between position and the other entries rotate once
    let cross = r * cov.fixed_view::<3, 4>(0, 3);
    cov.fixed_view_mut::<3, 4>(0, 3).copy_from(&cross);
    cov.fixed_view_mut::<4, 3>(3, 0).copy_from(&cross.transpose());
    Detection::new(d.frame, d.class, state, cov, d.score)
}

/// Per-track diagnostic for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub id: u64,
    pub class: ClassLabel,
    pub status: TrackStatus,
    pub state: Vector7,
    pub mean_covariance: f64,
    /// World-frame detection the track was updated with this frame.
    pub detection: Option<Vector7>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameOutput {
    pub frame: u64,
    /// Reported tracks, ascending id.
    pub tracks: Vec<EmittedTrack>,
    /// Every live track, ascending id.
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub frames: usize,
    pub born: usize,
    pub died: usize,
    pub skipped_frames: usize,
    pub unknown_class_detections: usize,
    pub below_floor_detections: usize,
}

/// Tracker state for one sequence.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    noise: NoiseConfig,
    tracks: Vec<TrackRecord>,
    ids: IdAllocator,
    last_frame: Option<u64>,
    stats: RunStats,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = cfg.noise_config();
        Ok(Self {
            cfg,
            noise,
            tracks: Vec::new(),
            ids: IdAllocator::default(),
            last_frame: None,
            stats: RunStats::default(),
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[TrackRecord] {
        &self.tracks
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    fn predict_all(&mut self) -> Result<()> {
        for t in &mut self.tracks {
            t.state = predict(&t.state, self.noise.class(t.class)?, self.noise.dt);
        }
        Ok(())
    }

    /// Advances the tracker to `frame.frame` and returns what it reports.
    pub fn process_frame(&mut self, frame: &FrameData) -> Result<FrameOutput> {
        self.process_frame_inner(frame).map_err(|e| e.at_frame(frame.frame))
    }

    fn process_frame_inner(&mut self, frame: &FrameData) -> Result<FrameOutput> {
        if let Some(last) = self.last_frame {
            if frame.frame <= last {
                return Err(Error::Sequencing(format!(
                    "frame {} arrived after frame {last}",
                    frame.frame
                )));
            }
            // frames with no data at all: coast and count the miss
            for skipped in last + 1..frame.frame {
                self.predict_all()?;
                let tracks = std::mem::take(&mut self.tracks);
                let assignment = Assignment {
                    unmatched_tracks: (0..tracks.len()).collect(),
                    ..Assignment::default()
                };
                let out = step_lifecycle(tracks, &assignment, &[], &self.cfg.lifecycle, &self.noise, &mut self.ids, skipped)?;
                self.tracks = out.tracks;
                self.stats.died += out.died;
                self.stats.skipped_frames += 1;
            }
            self.predict_all()?;
        }
        self.last_frame = Some(frame.frame);
        self.stats.frames += 1;

        let mut detections = Vec::with_capacity(frame.detections.len());
        for raw in &frame.detections {
            if !self.cfg.classes.contains_key(&raw.class) {
                self.stats.unknown_class_detections += 1;
                continue;
            }
            if raw.score < self.cfg.lifecycle.score_floor {
                self.stats.below_floor_detections += 1;
                continue;
            }
            let sensor = Detection::with_class_noise(frame.frame, raw.class, raw.state, raw.score, &self.noise)?;
            detections.push(transform_to_world(&sensor, &frame.pose)?);
        }

        let cfg = &self.cfg;
        let costs = build_cost_matrix(&self.tracks, &detections, |c| cfg.cost_config(c), &self.noise)?;
        let assignment = greedy_match(&costs);

        let tracks = std::mem::take(&mut self.tracks);
        let matched_ids: Vec<(u64, usize)> = assignment.matches.iter().map(|&(j, i, _)| (tracks[j].id, i)).collect();
        let out = step_lifecycle(tracks, &assignment, &detections, &cfg.lifecycle, &self.noise, &mut self.ids, frame.frame)?;
        self.tracks = out.tracks;
        self.stats.born += out.born;
        self.stats.died += out.died;

        let trace = self
            .tracks
            .iter()
            .map(|t| TraceEntry {
                id: t.id,
                class: t.class,
                status: t.status,
                state: t.state.observed(),
                mean_covariance: mean_covariance(&t.state),
                detection: matched_ids
                    .iter()
                    .find(|(id, _)| *id == t.id)
                    .map(|(_, i)| detections[*i].state)
                    .or_else(|| (t.age == 0).then(|| t.state.observed())),
            })
            .collect();

        Ok(FrameOutput {
            frame: frame.frame,
            tracks: out.emitted,
            trace,
        })
    }
}

/// Joins a pose file and a detection file into per-frame inputs. Every
/// pose frame is processed, with or without detections; detections need
/// a pose for their frame.
pub fn assemble_frames(poses: Vec<(u64, Pose)>, detections: Vec<(u64, Vec<RawDetection>)>) -> Result<Vec<FrameData>> {
    let mut dets = detections.into_iter().peekable();
    let mut out = Vec::with_capacity(poses.len());
    for (frame, pose) in poses {
        let mut data = FrameData {
            frame,
            pose,
            detections: Vec::new(),
        };
        if let Some((f, _)) = dets.peek() {
            if *f < frame {
                return Err(Error::InvalidInput(format!("detections at frame {f} have no pose")));
            }
        }
        if let Some((_, d)) = dets.next_if(|(f, _)| *f == frame) {
            data.detections = d;
        }
        out.push(data);
    }
    if let Some((f, _)) = dets.next() {
        return Err(Error::InvalidInput(format!("detections at frame {f} have no pose")));
    }
    Ok(out)
}

/// Runs a whole sequence. Identical inputs give identical outputs.
pub fn run_sequence<'a>(
    frames: impl IntoIterator<Item = &'a FrameData>,
    cfg: &TrackerConfig,
) -> Result<(Vec<FrameOutput>, RunStats)> {
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut out = Vec::new();
    for frame in frames {
        out.push(tracker.process_frame(frame)?);
    }
    Ok((out, tracker.stats().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::Matrix7;
    use std::f64::consts::FRAC_PI_2;

    fn det(x: f64, y: f64, theta: f64) -> Detection {
        let mut cov = Matrix7::identity() * 0.1;
        cov[(0, 0)] = 0.4;
        Detection::new(0, ClassLabel::Car, Vector7::from([x, y, 0.0, theta, 4.0, 2.0, 1.5]), cov, 0.9).unwrap()
    }

    #[test]
    fn identity_pose_is_a_no_op() {
        let d = det(1.0, 2.0, 0.3);
        assert_eq!(transform_to_world(&d, &Pose::identity()).unwrap(), d);
    }

    #[test]
    fn translation_moves_center_only() {
        let d = det(1.0, 2.0, 0.3);
        let w = transform_to_world(&d, &Pose::translation([5.0, 0.0, 0.0])).unwrap();
        assert_eq!(w.state[0], 6.0);
        assert_eq!(w.state[HEADING], 0.3);
        assert_eq!(w.cov, d.cov);
    }

    #[test]
    fn quarter_turn() {
        let d = det(1.0, 0.0, 0.0);
        let w = transform_to_world(&d, &Pose::yaw_translation(FRAC_PI_2, [0.0; 3])).unwrap();
        assert!((w.state[0]).abs() < 1e-12);
        assert!((w.state[1] - 1.0).abs() < 1e-12);
        assert!((w.state[HEADING] - FRAC_PI_2).abs() < 1e-12);
        // x variance becomes y variance
        assert!((w.cov[(1, 1)] - 0.4).abs() < 1e-12);
        assert!((w.cov[(0, 0)] - 0.1).abs() < 1e-12);
        assert_eq!(w.state.fixed_rows::<3>(4), d.state.fixed_rows::<3>(4));
    }

    #[test]
    fn frames_follow_poses() {
        let raw = |frame| RawDetection {
            frame,
            class: ClassLabel::Car,
            state: Vector7::from([0.0, 0.0, 0.0, 0.0, 4.0, 2.0, 1.5]),
            score: 0.9,
        };
        let poses: Vec<_> = (0..4).map(|f| (f, Pose::identity())).collect();
        let frames = assemble_frames(poses.clone(), vec![(1, vec![raw(1)]), (3, vec![raw(3), raw(3)])]).unwrap();
        assert_eq!(frames.iter().map(|f| f.detections.len()).collect::<Vec<_>>(), vec![0, 1, 0, 2]);
        assert!(assemble_frames(poses.clone(), vec![(7, vec![raw(7)])]).is_err());
        assert!(assemble_frames(poses[1..].to_vec(), vec![(0, vec![raw(0)])]).is_err());
    }

    #[test]
    fn pose_validation() {
        let skew = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Pose::new(skew, Vector3::zeros()).is_err());
        let mirror = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Pose::new(mirror, Vector3::zeros()).is_err());
        assert!(Pose::new(Matrix3::identity(), Vector3::new(f64::NAN, 0.0, 0.0)).is_err());
    }
}
