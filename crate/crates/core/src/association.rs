//! Gated cost matrices and greedy one-to-one matching.

use std::collections::BTreeSet;

use crate::cost::{pair_cost, CostConfig};
use crate::error::{Error, Result};
use crate::lifecycle::TrackRecord;
use crate::motion::{ClassLabel, Detection, NoiseConfig};

/// Pairwise costs, rows = tracks, columns = detections. Gated or
/// cross-class pairs hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_tracks: usize,
    n_detections: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n_tracks: usize, n_detections: usize) -> Self {
        Self {
            n_tracks,
            n_detections,
            costs: vec![f64::INFINITY; n_tracks * n_detections],
        }
    }

    /// Builds from rows; any negative or NaN entry is rejected.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_detections = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), n_detections);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n_detections {
                return Err(Error::InvalidInput("ragged cost matrix".into()));
            }
            for (i, &c) in row.iter().enumerate() {
                m.set(j, i, c)?;
            }
        }
        Ok(m)
    }

    pub fn n_tracks(&self) -> usize {
        self.n_tracks
    }

    pub fn n_detections(&self) -> usize {
        self.n_detections
    }

    pub fn get(&self, track: usize, detection: usize) -> f64 {
        self.costs[track * self.n_detections + detection]
    }

    pub fn set(&mut self, track: usize, detection: usize, cost: f64) -> Result<()> {
        if cost.is_nan() || cost < 0.0 {
            return Err(Error::InvalidInput(format!(
                "cost ({track}, {detection}) = {cost} must be non-negative"
            )));
        }
        self.costs[track * self.n_detections + detection] = cost;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// `(track index, detection index, cost)` in commit order.
    pub matches: Vec<(usize, usize, f64)>,
    pub unmatched_tracks: BTreeSet<usize>,
    pub unmatched_detections: BTreeSet<usize>,
}

/// Evaluates the configured cost for every same-class pair and gates it.
///
/// `cost_for` resolves the per-class cost settings (the gate differs by class).
pub fn build_cost_matrix(
    tracks: &[TrackRecord],
    detections: &[Detection],
    cost_for: impl Fn(ClassLabel) -> Result<CostConfig>,
    noise: &NoiseConfig,
) -> Result<CostMatrix> {
    let mut m = CostMatrix::new(tracks.len(), detections.len());
    for (j, track) in tracks.iter().enumerate() {
        let cfg = cost_for(track.class)?;
        let class_noise = noise.class(track.class)?;
        for (i, det) in detections.iter().enumerate() {
            if det.class != track.class {
                continue;
            }
            let cost = pair_cost(det, &track.state, &cfg, class_noise).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("track {} vs detection {i}: {msg}", track.id)),
                other => other,
            })?;
            if cost < cfg.gate_threshold {
                m.set(j, i, cost)?;
            }
        }
    }
    Ok(m)
}

/// Commits pairs in ascending cost order (ties: lower track, then lower
/// detection index) whenever both sides are still free.
pub fn greedy_match(m: &CostMatrix) -> Assignment {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for j in 0..m.n_tracks {
        for i in 0..m.n_detections {
            let c = m.get(j, i);
            if c.is_finite() {
                candidates.push((c, j, i));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut track_used = vec![false; m.n_tracks];
    let mut det_used = vec![false; m.n_detections];
    let mut matches = Vec::new();
    for (c, j, i) in candidates {
        if !track_used[j] && !det_used[i] {
            track_used[j] = true;
            det_used[i] = true;
            matches.push((j, i, c));
        }
    }
    Assignment {
        matches,
        unmatched_tracks: (0..m.n_tracks).filter(|&j| !track_used[j]).collect(),
        unmatched_detections: (0..m.n_detections).filter(|&i| !det_used[i]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{CostKind, HeadingMode};
    use crate::lifecycle::TrackStatus;
    use crate::motion::{init_track, ClassNoise, Matrix7, Vector7};
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    fn noise() -> NoiseConfig {
        let n = ClassNoise {
            det_var: [0.1; 7],
            kin_var: [1.0; 3],
            q_var: [0.01; 10],
            r_var: [0.1; 7],
        };
        NoiseConfig {
            dt: 0.1,
            classes: [(ClassLabel::Car, n.clone()), (ClassLabel::Pedestrian, n)].into_iter().collect(),
        }
    }

    fn det(class: ClassLabel, x: f64) -> Detection {
        Detection::new(
            0,
            class,
            Vector7::from([x, 0.0, 0.0, 0.0, 4.0, 2.0, 1.5]),
            Matrix7::identity() * 0.1,
            0.9,
        )
        .unwrap()
    }

    fn record(class: ClassLabel, x: f64) -> TrackRecord {
        let d = det(class, x);
        TrackRecord {
            id: 0,
            class,
            state: init_track(&d, &noise()).unwrap(),
            status: TrackStatus::Tentative,
            hits: 1,
            misses: 0,
            age: 0,
            last_score: 0.9,
        }
    }

    fn cfg(kind: CostKind, gate: f64) -> impl Fn(ClassLabel) -> Result<CostConfig> {
        move |_| {
            Ok(CostConfig {
                heading_mode: HeadingMode::Flip,
                gate_threshold: gate,
                kind,
            })
        }
    }

    #[test]
    fn empty_inputs() {
        let m = build_cost_matrix(&[], &[det(ClassLabel::Car, 0.0)], cfg(CostKind::Guided, 5.0), &noise()).unwrap();
        assert_eq!((m.n_tracks(), m.n_detections()), (0, 1));
        let m = build_cost_matrix(&[record(ClassLabel::Car, 0.0)], &[], cfg(CostKind::Guided, 5.0), &noise()).unwrap();
        assert_eq!((m.n_tracks(), m.n_detections()), (1, 0));
        assert!(greedy_match(&m).matches.is_empty());
    }

    #[test]
    fn single_pair_below_gate() {
        let t = record(ClassLabel::Car, 0.0);
        let d = det(ClassLabel::Car, 0.3);
        let m = build_cost_matrix(&[t.clone()], &[d.clone()], cfg(CostKind::Guided, 5.0), &noise()).unwrap();
        let expected = crate::cost::guided_cost(&d, &t.state, &cfg(CostKind::Guided, 5.0)(ClassLabel::Car).unwrap()).unwrap();
        assert_eq!(m.get(0, 0), expected);

        let gated = build_cost_matrix(&[t], &[d], cfg(CostKind::Guided, expected), &noise()).unwrap();
        assert_eq!(gated.get(0, 0), INF);
    }

    #[test]
    fn cross_class_is_masked() {
        let m = build_cost_matrix(
            &[record(ClassLabel::Car, 0.0)],
            &[det(ClassLabel::Pedestrian, 0.0)],
            cfg(CostKind::Mahalanobis, 1e9),
            &noise(),
        )
        .unwrap();
        assert_eq!(m.get(0, 0), INF);
    }

    #[test]
    fn greedy_is_not_optimal_assignment() {
        let m = CostMatrix::from_rows(&[vec![1.0, 3.0], vec![2.0, INF]]).unwrap();
        let a = greedy_match(&m);
        assert_eq!(a.matches, vec![(0, 0, 1.0)]);
        assert_eq!(a.unmatched_tracks, [1].into_iter().collect());
        assert_eq!(a.unmatched_detections, [1].into_iter().collect());
    }

    #[test]
    fn diagonal_and_fully_gated() {
        let m = CostMatrix::from_rows(&[vec![1.0, INF], vec![INF, 2.0]]).unwrap();
        assert_eq!(greedy_match(&m).matches, vec![(0, 0, 1.0), (1, 1, 2.0)]);
        let gated = CostMatrix::from_rows(&[vec![INF, INF], vec![INF, INF]]).unwrap();
        let a = greedy_match(&gated);
        assert!(a.matches.is_empty());
        assert_eq!(a.unmatched_tracks.len(), 2);
        assert_eq!(a.unmatched_detections.len(), 2);
    }

    #[test]
    fn ties_prefer_lower_indices() {
        let m = CostMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(greedy_match(&m).matches, vec![(0, 0, 1.0), (1, 1, 1.0)]);
    }

    #[test]
    fn rejects_negative_costs() {
        assert!(CostMatrix::from_rows(&[vec![-1.0]]).is_err());
        assert!(CostMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![3 => 0.0f64..10.0, 1 => Just(INF)], c),
                r,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn one_to_one_partition(rows in matrix_strategy()) {
            let m = CostMatrix::from_rows(&rows).unwrap();
            let a = greedy_match(&m);
            let mut tracks = BTreeSet::new();
            let mut dets = BTreeSet::new();
            for &(j, i, c) in &a.matches {
                prop_assert!(tracks.insert(j));
                prop_assert!(dets.insert(i));
                prop_assert_eq!(c, m.get(j, i));
            }
            prop_assert!(tracks.is_disjoint(&a.unmatched_tracks));
            prop_assert!(dets.is_disjoint(&a.unmatched_detections));
            prop_assert_eq!(tracks.len() + a.unmatched_tracks.len(), m.n_tracks());
            prop_assert_eq!(dets.len() + a.unmatched_detections.len(), m.n_detections());

            let min = rows.iter().flatten().copied().filter(|c| c.is_finite()).fold(INF, f64::min);
            if min.is_finite() {
                prop_assert_eq!(a.matches[0].2, min);
            }
        }
    }
}
