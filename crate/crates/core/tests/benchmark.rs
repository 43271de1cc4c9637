use std::collections::BTreeSet;
use std::path::Path;

use ugtrack::io::{parse_detections, parse_poses, parse_tracks};
use ugtrack::simulator::{
    generate_truth, load_scenario, render_detections, write_scene, DETECTIONS_FILE, POSES_FILE, TRUTH_FILE,
};

fn shipped_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/benchmark.toml")
}

#[test]
fn shipped_benchmark_has_twenty_occluded_scenes() {
    let scenes = load_scenario(&shipped_path()).unwrap();
    assert_eq!(scenes.len(), 20);
    let seeds: BTreeSet<u64> = scenes.iter().map(|s| s.seed).collect();
    assert_eq!(seeds.len(), 20);
    for s in &scenes {
        assert_eq!(s.objects.len(), 10);
        for o in &s.objects {
            assert_eq!(o.occlusions.len(), 1);
            let [a, b] = o.occlusions[0];
            assert!((3..=8).contains(&(b - a + 1)), "occlusion {a}..={b}");
        }
        let truth = generate_truth(s).unwrap();
        let r = render_detections(s, &truth).unwrap();
        // everyone is hidden at some point, so detections fall short of truth
        let visible: usize = r.log.iter().map(|l| l.visible).sum();
        assert!(visible < truth.len());
    }
}

#[test]
fn loading_twice_is_identical() {
    assert_eq!(load_scenario(&shipped_path()).unwrap(), load_scenario(&shipped_path()).unwrap());
}

#[test]
fn written_scene_parses_back() {
    let scene = load_scenario(&shipped_path()).unwrap().remove(3);
    let dir = tempfile::tempdir().unwrap();
    let rendered = write_scene(dir.path(), &scene).unwrap();
    let dets: usize = parse_detections(&dir.path().join(DETECTIONS_FILE)).unwrap().iter().map(|(_, g)| g.len()).sum();
    assert_eq!(dets, rendered.detections.len());
    assert_eq!(parse_poses(&dir.path().join(POSES_FILE)).unwrap().len() as u64, scene.n_frames);
    let truth = generate_truth(&scene).unwrap();
    let back = parse_tracks(&dir.path().join(TRUTH_FILE)).unwrap();
    assert_eq!(back.len(), truth.len());
    for (a, b) in back.iter().zip(&truth) {
        assert_eq!((a.frame, a.id, a.class), (b.frame, b.id, b.class));
        assert!((a.state - b.state).amax() <= 5e-7);
    }
}
