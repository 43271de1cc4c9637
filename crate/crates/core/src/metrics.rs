//! CLEAR MOT metrics and AMOTA with center-distance matching in the
//! horizontal plane.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::KittiRecord;
use crate::motion::{CalibrationSet, ClassLabel, MatchedPair, TruthTrack};
use crate::pipeline::RawDetection;

/// Default matching radius in meters.
pub const DEFAULT_RADIUS: f64 = 2.0;

/// Number of recall targets in the AMOTA sweep.
pub const RECALL_POINTS: usize = 40;

/// Most score thresholds evaluated in an AMOTA sweep.
pub const MAX_THRESHOLDS: usize = 200;

/// Truth-to-prediction correspondence in one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    pub frame: u64,
    /// `(truth id, predicted id, distance)`.
    pub matches: Vec<(u64, u64, f64)>,
    pub unmatched_truth: Vec<u64>,
    pub unmatched_predictions: Vec<u64>,
}

fn planar_distance(a: &KittiRecord, b: &KittiRecord) -> f64 {
    (a.state[0] - b.state[0]).hypot(a.state[1] - b.state[1])
}

/// Greedy nearest-centre matching within `radius`, same class only.
/// Ties go to the smaller distance, then the lower truth id, then the
/// lower predicted id.
pub fn match_frame(gt: &[KittiRecord], pred: &[KittiRecord], radius: f64) -> FrameMatch {
    let mut pairs = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            if g.class != p.class {
                continue;
            }
            let d = planar_distance(g, p);
            if d <= radius {
                pairs.push((d, g.id, p.id, gi, pi));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut out = FrameMatch {
        frame: gt.first().or(pred.first()).map_or(0, |r| r.frame),
        ..FrameMatch::default()
    };
    for (d, gid, pid, gi, pi) in pairs {
        if !gt_used[gi] && !pred_used[pi] {
            gt_used[gi] = true;
            pred_used[pi] = true;
            out.matches.push((gid, pid, d));
        }
    }
    out.unmatched_truth = gt.iter().zip(&gt_used).filter(|(_, u)| !**u).map(|(g, _)| g.id).collect();
    out.unmatched_predictions = pred.iter().zip(&pred_used).filter(|(_, u)| !**u).map(|(p, _)| p.id).collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ClearMetrics {
    pub gt: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub idsw: usize,
    pub mota: f64,
    /// Mean matched centre distance in meters; 0 with no matches.
    pub motp: f64,
    pub recall: f64,
}

/// Accumulates frame correspondences in frame order.
pub fn clear_metrics(frames: &[FrameMatch]) -> Result<ClearMetrics> {
    let mut m = ClearMetrics::default();
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    let mut dist_sum = 0.0;
    for f in frames {
        m.gt += f.matches.len() + f.unmatched_truth.len();
        m.tp += f.matches.len();
        m.fn_ += f.unmatched_truth.len();
        m.fp += f.unmatched_predictions.len();
        for &(gid, pid, d) in &f.matches {
            dist_sum += d;
            if let Some(prev) = last_match.insert(gid, pid) {
                if prev != pid {
                    m.idsw += 1;
                }
            }
        }
    }
    if m.gt == 0 {
        return Err(Error::InvalidInput("MOTA is undefined without ground truth".into()));
    }
    m.mota = 1.0 - (m.fn_ + m.fp + m.idsw) as f64 / m.gt as f64;
    m.motp = if m.tp > 0 { dist_sum / m.tp as f64 } else { 0.0 };
    m.recall = m.tp as f64 / m.gt as f64;
    Ok(m)
}

fn by_frame(records: &[KittiRecord]) -> BTreeMap<u64, Vec<KittiRecord>> {
    let mut out: BTreeMap<u64, Vec<KittiRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.frame).or_default().push(r.clone());
    }
    out
}

/// Matches every frame present in either input.
pub fn match_sequence(truth: &[KittiRecord], tracks: &[KittiRecord], radius: f64) -> Vec<FrameMatch> {
    let gt = by_frame(truth);
    let pred = by_frame(tracks);
    let frames: BTreeSet<u64> = gt.keys().chain(pred.keys()).copied().collect();
    let empty = Vec::new();
    frames
        .into_iter()
        .map(|f| {
            let mut m = match_frame(gt.get(&f).unwrap_or(&empty), pred.get(&f).unwrap_or(&empty), radius);
            m.frame = f;
            m
        })
        .collect()
}

pub fn evaluate(truth: &[KittiRecord], tracks: &[KittiRecord], radius: f64) -> Result<ClearMetrics> {
    clear_metrics(&match_sequence(truth, tracks, radius))
}

/// One point of the AMOTA sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallPoint {
    pub recall_target: f64,
    /// Score threshold used, or `None` when the recall is unreachable.
    pub threshold: Option<f64>,
    pub motar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmotaReport {
    pub amota: f64,
    pub points: Vec<RecallPoint>,
}

/// `clamp(1 − (IDSW + FP + FN − (1 − r)·P) / (r·P), 0, 1)`.
pub fn motar(m: &ClearMetrics, recall_target: f64) -> f64 {
    let p = m.gt as f64;
    let errors = (m.idsw + m.fp + m.fn_) as f64 - (1.0 - recall_target) * p;
    (1.0 - errors / (recall_target * p)).clamp(0.0, 1.0)
}

/// Candidate thresholds: distinct scores, thinned evenly by rank to at most
/// [`MAX_THRESHOLDS`], always keeping the lowest.
fn thresholds(tracks: &[KittiRecord]) -> Vec<f64> {
    let mut scores: Vec<f64> = tracks.iter().map(|t| t.score).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    if scores.len() <= MAX_THRESHOLDS {
        return scores;
    }
    let n = scores.len();
    (0..MAX_THRESHOLDS)
        .map(|k| scores[(k * (n - 1)) / (MAX_THRESHOLDS - 1)])
        .collect()
}

/// Sweeps score thresholds; at each of the 40 recall targets `k/40` uses
/// the highest threshold reaching that recall. Unreachable targets score 0.
pub fn amota(truth: &[KittiRecord], tracks: &[KittiRecord], radius: f64) -> Result<AmotaReport> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("AMOTA is undefined without ground truth".into()));
    }
    let sweep: Vec<(f64, ClearMetrics)> = thresholds(tracks)
        .into_iter()
        .map(|s| {
            let kept: Vec<KittiRecord> = tracks.iter().filter(|t| t.score >= s).cloned().collect();
            evaluate(truth, &kept, radius).map(|m| (s, m))
        })
        .collect::<Result<_>>()?;
    let points: Vec<RecallPoint> = (1..=RECALL_POINTS)
        .map(|k| {
            let r = k as f64 / RECALL_POINTS as f64;
            // sweep runs from the highest threshold down
            match sweep.iter().find(|(_, m)| m.recall >= r - 1e-12) {
                Some((s, m)) => RecallPoint {
                    recall_target: r,
                    threshold: Some(*s),
                    motar: motar(m, r),
                },
                None => RecallPoint {
                    recall_target: r,
                    threshold: None,
                    motar: 0.0,
                },
            }
        })
        .collect();
    let amota = points.iter().map(|p| p.motar).sum::<f64>() / RECALL_POINTS as f64;
    Ok(AmotaReport { amota, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub radius: f64,
    pub overall: ClearMetrics,
    pub per_class: BTreeMap<String, ClearMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amota: Option<AmotaReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_class_amota: BTreeMap<String, f64>,
}

/// Overall and per-class CLEAR metrics, optionally with AMOTA. Classes
/// without truth are left out of the per-class table but their tracks
/// still count as false positives overall.
pub fn report(truth: &[KittiRecord], tracks: &[KittiRecord], radius: f64, with_amota: bool) -> Result<MetricsReport> {
    let overall = evaluate(truth, tracks, radius)?;
    let classes: BTreeSet<ClassLabel> = truth.iter().map(|r| r.class).collect();
    let mut per_class = BTreeMap::new();
    let mut per_class_amota = BTreeMap::new();
    for class in classes {
        let t: Vec<KittiRecord> = truth.iter().filter(|r| r.class == class).cloned().collect();
        let p: Vec<KittiRecord> = tracks.iter().filter(|r| r.class == class).cloned().collect();
        per_class.insert(class.to_string(), evaluate(&t, &p, radius)?);
        if with_amota {
            per_class_amota.insert(class.to_string(), amota(&t, &p, radius)?.amota);
        }
    }
    Ok(MetricsReport {
        radius,
        overall,
        per_class,
        amota: with_amota.then(|| amota(truth, tracks, radius)).transpose()?,
        per_class_amota,
    })
}

/// Pairs each detection with the truth box it lies closest to (same
/// matching rule as the evaluator) and groups truth into trajectories.
pub fn calibration_set(truth: &[KittiRecord], detections: &[RawDetection], radius: f64) -> CalibrationSet {
    let mut tracks: BTreeMap<u64, TruthTrack> = BTreeMap::new();
    for r in truth {
        tracks
            .entry(r.id)
            .or_insert_with(|| TruthTrack {
                id: r.id,
                class: r.class,
                states: Vec::new(),
            })
            .states
            .push((r.frame, r.state));
    }
    let as_records: Vec<KittiRecord> = detections
        .iter()
        .enumerate()
        .map(|(i, d)| KittiRecord {
            frame: d.frame,
            id: i as u64,
            class: d.class,
            state: d.state,
            score: d.score,
        })
        .collect();
    let truth_index: HashMap<(u64, u64), &KittiRecord> = truth.iter().map(|r| ((r.frame, r.id), r)).collect();
    let mut pairs = Vec::new();
    for m in match_sequence(truth, &as_records, radius) {
        for (gid, did, _) in m.matches {
            let t = truth_index[&(m.frame, gid)];
            pairs.push(MatchedPair {
                class: t.class,
                detection: as_records[did as usize].state,
                truth: t.state,
            });
        }
    }
    CalibrationSet {
        tracks: tracks.into_values().collect(),
        pairs,
    }
}
