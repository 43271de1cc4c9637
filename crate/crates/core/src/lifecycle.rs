//! Track birth and death bookkeeping.
//!
//! New tracks start tentative and become confirmed after `min_hits`
//! consecutive associations (the birth detection counts as the first).
//! A confirmed track that misses turns disappeared and keeps coasting on
//! predictions; any track is dropped once its consecutive misses exceed
//! `max_age`.

use std::fmt;
use std::str::FromStr;

use crate::association::Assignment;
use crate::error::{Error, Result};
use crate::motion::{init_track, update, ClassLabel, Detection, NoiseConfig, TrackState, Vector7};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Disappeared,
}

impl TrackStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackStatus::Tentative => "tentative",
            TrackStatus::Confirmed => "confirmed",
            TrackStatus::Disappeared => "disappeared",
        }
    }
}

impl fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tentative" => Ok(TrackStatus::Tentative),
            "confirmed" => Ok(TrackStatus::Confirmed),
            "disappeared" => Ok(TrackStatus::Disappeared),
            _ => Err(Error::InvalidInput(format!("unknown track status `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub id: u64,
    pub class: ClassLabel,
    pub state: TrackState,
    pub status: TrackStatus,
    /// Consecutive associations.
    pub hits: u32,
    /// Consecutive frames without association.
    pub misses: u32,
    /// Frames since birth.
    pub age: u32,
    pub last_score: f64,
}

impl TrackRecord {
    pub fn is_emittable(&self, cfg: &LifecycleConfig) -> bool {
        match self.status {
            TrackStatus::Confirmed => true,
            TrackStatus::Disappeared => cfg.emit_predicted,
            TrackStatus::Tentative => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleConfig {
    /// Consecutive hits needed to confirm a track.
    pub min_hits: u32,
    /// Consecutive misses tolerated before removal.
    pub max_age: u32,
    /// Detections scoring below this are dropped before association.
    pub score_floor: f64,
    /// Whether coasting (disappeared) tracks are reported.
    pub emit_predicted: bool,
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_hits < 1 {
            return Err(Error::Config("min_hits must be >= 1".into()));
        }
        if self.max_age < 1 {
            return Err(Error::Config("max_age must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.score_floor) {
            return Err(Error::Config(format!("score_floor {} outside [0, 1]", self.score_floor)));
        }
        Ok(())
    }
}

/// One reported track in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedTrack {
    pub frame: u64,
    pub id: u64,
    pub class: ClassLabel,
    /// World-frame `(x, y, z, θ, l, w, h)`.
    pub state: Vector7,
    pub score: f64,
    pub status: TrackStatus,
}

#[derive(Debug, Clone, Default)]
pub struct LifecycleOutcome {
    pub tracks: Vec<TrackRecord>,
    pub emitted: Vec<EmittedTrack>,
    pub born: usize,
    pub died: usize,
}

/// Hands out track ids; never reuses one within a sequence.
#[derive(Debug, Clone, Default)]
pub struct IdAllocator {
    next: u64,
}

impl IdAllocator {
    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

/// Applies one frame's association outcome to the track set.
pub fn step_lifecycle(
    tracks: Vec<TrackRecord>,
    assignment: &Assignment,
    detections: &[Detection],
    cfg: &LifecycleConfig,
    noise: &NoiseConfig,
    ids: &mut IdAllocator,
    frame: u64,
) -> Result<LifecycleOutcome> {
    let mut matched_det: Vec<Option<usize>> = vec![None; tracks.len()];
    let mut det_taken = vec![false; detections.len()];
    for &(j, i, _) in &assignment.matches {
        if j >= tracks.len() || i >= detections.len() {
            return Err(Error::Invariant(format!(
                "assignment pair ({j}, {i}) out of range for {} tracks / {} detections",
                tracks.len(),
                detections.len()
            )));
        }
        if matched_det[j].replace(i).is_some() || std::mem::replace(&mut det_taken[i], true) {
            return Err(Error::Invariant(format!("assignment reuses track {j} or detection {i}")));
        }
    }
    if let Some(&i) = assignment.unmatched_detections.iter().find(|&&i| i >= detections.len()) {
        return Err(Error::Invariant(format!("unmatched detection {i} out of range")));
    }
    if let Some(&j) = assignment.unmatched_tracks.iter().find(|&&j| j >= tracks.len()) {
        return Err(Error::Invariant(format!("unmatched track {j} out of range")));
    }

    let mut outcome = LifecycleOutcome::default();
    for (mut track, det_index) in tracks.into_iter().zip(matched_det) {
        track.age += 1;
        match det_index {
            Some(i) => {
                let det = &detections[i];
                if det.class != track.class {
                    return Err(Error::Invariant(format!(
                        "track {} ({}) matched to a {} detection",
                        track.id, track.class, det.class
                    )));
                }
                track.state = update(&track.state, det, noise.class(track.class)?)?;
                track.hits += 1;
                track.misses = 0;
                track.last_score = det.score;
                track.status = match track.status {
                    TrackStatus::Tentative if track.hits >= cfg.min_hits => TrackStatus::Confirmed,
                    TrackStatus::Tentative => TrackStatus::Tentative,
                    TrackStatus::Confirmed | TrackStatus::Disappeared => TrackStatus::Confirmed,
                };
            }
            None => {
                track.misses += 1;
                track.hits = 0;
                if track.status == TrackStatus::Confirmed {
                    track.status = TrackStatus::Disappeared;
                }
                if track.misses > cfg.max_age {
                    outcome.died += 1;
                    continue;
                }
            }
        }
        outcome.tracks.push(track);
    }

    for (i, det) in detections.iter().enumerate() {
        if det_taken[i] {
            continue;
        }
        let status = if cfg.min_hits <= 1 {
            TrackStatus::Confirmed
        } else {
            TrackStatus::Tentative
        };
        outcome.tracks.push(TrackRecord {
            id: ids.next_id(),
            class: det.class,
            state: init_track(det, noise)?,
            status,
            hits: 1,
            misses: 0,
            age: 0,
            last_score: det.score,
        });
        outcome.born += 1;
    }

    outcome.emitted = outcome
        .tracks
        .iter()
        .filter(|t| t.is_emittable(cfg))
        .map(|t| EmittedTrack {
            frame,
            id: t.id,
            class: t.class,
            state: t.state.observed(),
            score: t.last_score,
            status: t.status,
        })
        .collect();
    outcome.emitted.sort_by_key(|e| e.id);
    Ok(outcome)
}
