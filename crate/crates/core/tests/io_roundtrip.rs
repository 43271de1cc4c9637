use std::path::Path;

use proptest::prelude::*;
use ugtrack::io::{
    load_config, parse_config, parse_detections, parse_poses_str, parse_tracks_str, render_config, save_config,
    write_detections, write_poses, write_truth, KittiRecord,
};
use ugtrack::motion::Vector7;
use ugtrack::{ClassLabel, CostKind, HeadingMode, Pose, RawDetection, TrackerConfig};

const CLASSES: [ClassLabel; 3] = [ClassLabel::Car, ClassLabel::Pedestrian, ClassLabel::Cyclist];

fn shipped() -> TrackerConfig {
    load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.conf")).unwrap()
}

fn class() -> impl Strategy<Value = ClassLabel> {
    prop::sample::select(CLASSES.to_vec())
}

fn boxed() -> impl Strategy<Value = Vector7> {
    (
        prop::array::uniform3(-500.0..500.0f64),
        -3.1..3.1f64,
        prop::array::uniform3(0.1..20.0f64),
    )
        .prop_map(|(p, t, d)| Vector7::from([p[0], p[1], p[2], t, d[0], d[1], d[2]]))
}

fn detections() -> impl Strategy<Value = Vec<RawDetection>> {
    prop::collection::vec((0u64..3, class(), boxed(), 0.0..=1.0f64), 0..40).prop_map(|v| {
        let mut frame = 0;
        v.into_iter()
            .map(|(step, class, state, score)| {
                frame += step;
                RawDetection {
                    frame,
                    class,
                    state,
                    score,
                }
            })
            .collect()
    })
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-9..1e-3f64, 1e-3..10.0f64, 10.0..1e4f64]
}

fn config() -> impl Strategy<Value = TrackerConfig> {
    (
        positive(),
        prop::sample::select(CostKind::ALL.to_vec()),
        prop::sample::select(vec![HeadingMode::Flip, HeadingMode::Full]),
        1u32..10,
        1u32..30,
        0.0..=1.0f64,
        any::<bool>(),
        prop::collection::vec(positive(), 3 * 30),
    )
        .prop_map(|(dt, kind, mode, min_hits, max_age, floor, emit, values)| {
            let mut cfg = shipped();
            cfg.dt = dt;
            cfg.cost_kind = kind;
            cfg.heading_mode = mode;
            cfg.lifecycle.min_hits = min_hits;
            cfg.lifecycle.max_age = max_age;
            cfg.lifecycle.score_floor = floor;
            cfg.lifecycle.emit_predicted = emit;
            let mut it = values.into_iter();
            for s in cfg.classes.values_mut() {
                let n = &mut s.noise;
                for v in n.det_var.iter_mut().chain(&mut n.kin_var).chain(&mut n.q_var).chain(&mut n.r_var) {
                    *v = it.next().unwrap();
                }
                s.gates.guided = it.next().unwrap();
                s.gates.modified = it.next().unwrap();
                s.gates.mahalanobis = it.next().unwrap();
            }
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn detections_survive_a_file_round_trip(dets in detections()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.txt");
        let mut buf = Vec::new();
        write_detections(&mut buf, &dets).unwrap();
        std::fs::write(&path, &buf).unwrap();
        let back: Vec<RawDetection> = parse_detections(&path).unwrap().into_iter().flat_map(|(_, g)| g).collect();
        prop_assert_eq!(back.len(), dets.len());
        for (a, b) in back.iter().zip(&dets) {
            prop_assert_eq!(a.frame, b.frame);
            prop_assert_eq!(a.class, b.class);
            prop_assert!((a.state - b.state).amax() <= 5e-7);
            prop_assert!((a.score - b.score).abs() <= 5e-7);
        }
    }

    #[test]
    fn poses_round_trip(entries in prop::collection::vec((1u64..5, -3.0..3.0f64, prop::array::uniform3(-1e3..1e3f64)), 0..20)) {
        let mut frame = 0;
        let poses: Vec<(u64, Pose)> = entries
            .into_iter()
            .map(|(step, yaw, t)| {
                frame += step;
                (frame, Pose::yaw_translation(yaw, t))
            })
            .collect();
        let mut buf = Vec::new();
        write_poses(&mut buf, &poses).unwrap();
        let back = parse_poses_str(std::str::from_utf8(&buf).unwrap(), "p").unwrap();
        prop_assert_eq!(back.len(), poses.len());
        for ((fa, a), (fb, b)) in back.iter().zip(&poses) {
            prop_assert_eq!(fa, fb);
            prop_assert!((a.rotation() - b.rotation()).amax() <= 5e-10);
            prop_assert!((a.translation_vector() - b.translation_vector()).amax() <= 5e-10);
        }
    }

    #[test]
    fn config_round_trips_exactly(cfg in config()) {
        let text = render_config(&cfg);
        prop_assert_eq!(parse_config(&text, "c").unwrap(), cfg);
    }

    #[test]
    fn truth_round_trips(raw in prop::collection::btree_map((0u64..20, 0u64..50), (class(), boxed()), 0..60)) {
        let records: Vec<KittiRecord> = raw
            .into_iter()
            .map(|((frame, id), (class, state))| KittiRecord { frame, id, class, state, score: 1.0 })
            .collect();
        let mut buf = Vec::new();
        write_truth(&mut buf, &records).unwrap();
        let back = parse_tracks_str(std::str::from_utf8(&buf).unwrap(), "t").unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!((a.frame, a.id, a.class), (b.frame, b.id, b.class));
            prop_assert!((a.state - b.state).amax() <= 5e-7);
        }
    }
}

#[test]
fn shipped_config_survives_save_and_load() {
    let cfg = shipped();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.conf");
    save_config(&path, &cfg).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);
}

#[test]
fn missing_file_error_names_the_path() {
    let err = load_config(Path::new("/nonexistent/tracker.conf")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/tracker.conf"), "{err}");
}
