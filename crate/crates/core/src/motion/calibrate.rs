//! Noise statistics from labeled data: measurement residuals against truth and
//! constant-velocity prediction residuals on truth trajectories.

use std::collections::{BTreeMap, BTreeSet};

use super::{ClassLabel, ClassNoise, NoiseConfig, Vector7, HEADING, OBS_DIM, STATE_DIM};
use crate::angle::wrap_angle;
use crate::error::{Error, Result};

/// Calibrated variances never go below this, so the result always validates.
pub const VARIANCE_FLOOR: f64 = 1e-12;

const MIN_SAMPLES: usize = 30;

/// Ground-truth trajectory of one object, in frame order.
#[derive(Debug, Clone)]
pub struct TruthTrack {
    pub id: u64,
    pub class: ClassLabel,
    pub states: Vec<(u64, Vector7)>,
}

/// A detection paired with the truth box it was generated from.
#[derive(Debug, Clone)]
pub struct MatchedPair {
    pub class: ClassLabel,
    pub detection: Vector7,
    pub truth: Vector7,
}

#[derive(Debug, Clone, Default)]
pub struct CalibrationSet {
    pub tracks: Vec<TruthTrack>,
    pub pairs: Vec<MatchedPair>,
}

#[derive(Default)]
struct ClassSamples {
    measurement: Vec<Vector7>,
    transition: Vec<[f64; STATE_DIM]>,
    velocity: Vec<[f64; 3]>,
}

pub fn calibrate(data: &CalibrationSet, dt: f64) -> Result<NoiseConfig> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    let mut per_class: BTreeMap<ClassLabel, ClassSamples> = BTreeMap::new();

    for pair in &data.pairs {
        let mut r = pair.detection - pair.truth;
        r[HEADING] = wrap_angle(r[HEADING]);
        per_class.entry(pair.class).or_default().measurement.push(r);
    }

    for track in &data.tracks {
        let samples = per_class.entry(track.class).or_default();
        let frames: BTreeSet<u64> = track.states.iter().map(|(f, _)| *f).collect();
        if frames.len() != track.states.len() {
            return Err(Error::InvalidInput(format!("truth track {} repeats a frame", track.id)));
        }
        let mut states = track.states.clone();
        states.sort_by_key(|(f, _)| *f);

        let velocity = |a: &Vector7, b: &Vector7| -> [f64; 3] {
            [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt, (b[2] - a[2]) / dt]
        };
        for w in states.windows(2) {
            if w[1].0 == w[0].0 + 1 {
                samples.velocity.push(velocity(&w[0].1, &w[1].1));
            }
        }
        for w in states.windows(3) {
            if w[1].0 != w[0].0 + 1 || w[2].0 != w[1].0 + 1 {
                continue;
            }
            let v_prev = velocity(&w[0].1, &w[1].1);
            let v_now = velocity(&w[1].1, &w[2].1);
            let (prev, now) = (&w[1].1, &w[2].1);
            let mut r = [0.0; STATE_DIM];
            for i in 0..3 {
                r[i] = now[i] - (prev[i] + v_prev[i] * dt);
                r[OBS_DIM + i] = v_now[i] - v_prev[i];
            }
            r[HEADING] = wrap_angle(now[HEADING] - prev[HEADING]);
            for i in 4..OBS_DIM {
                r[i] = now[i] - prev[i];
            }
            samples.transition.push(r);
        }
    }

    let mut classes = BTreeMap::new();
    for (class, s) in per_class {
        let short = |what: &str, n: usize| Error::Calibration {
            class: class.to_string(),
            reason: format!("{n} {what}, need at least {MIN_SAMPLES}"),
        };
        if s.measurement.len() < MIN_SAMPLES {
            return Err(short("matched detection-truth pairs", s.measurement.len()));
        }
        if s.transition.len() < MIN_SAMPLES {
            return Err(short("truth transitions", s.transition.len()));
        }
        let r_var: [f64; OBS_DIM] = variances(s.measurement.iter().map(|v| v.as_slice()));
        let q_var: [f64; STATE_DIM] = variances(s.transition.iter().map(|v| v.as_slice()));
        let kin_var: [f64; 3] = variances(s.velocity.iter().map(|v| v.as_slice()));
        classes.insert(
            class,
            ClassNoise {
                det_var: r_var,
                kin_var,
                q_var,
                r_var,
            },
        );
    }
    Ok(NoiseConfig { dt, classes })
}

/// Column-wise unbiased sample variance, floored at [`VARIANCE_FLOOR`].
fn variances<'a, const N: usize>(rows: impl Iterator<Item = &'a [f64]> + Clone) -> [f64; N] {
    let n = rows.clone().count() as f64;
    let mut mean = [0.0; N];
    for row in rows.clone() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let mut var = [0.0; N];
    for row in rows {
        for i in 0..N {
            var[i] += (row[i] - mean[i]).powi(2) / (n - 1.0);
        }
    }
    var.map(|v| v.max(VARIANCE_FLOOR))
}
