//! A coasting track gets less certain and cheaper to reach from a distant
//! detection, under the shipped configuration.

use std::path::Path;

use ugtrack::cost::{mean_covariance, modified_divergence};
use ugtrack::io::load_config;
use ugtrack::motion::{init_track, predict, update, Vector7};
use ugtrack::{ClassLabel, Detection, TrackState, TrackerConfig};

fn shipped() -> TrackerConfig {
    load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.conf")).unwrap()
}

fn converged(cfg: &TrackerConfig, class: ClassLabel, size: [f64; 3]) -> TrackState {
    let noise = cfg.noise_config();
    let class_noise = noise.class(class).unwrap().clone();
    let at = |frame| {
        Detection::with_class_noise(frame, class, Vector7::from([0.0, 0.0, 0.0, 0.0, size[0], size[1], size[2]]), 0.9, &noise)
            .unwrap()
    };
    let mut t = init_track(&at(0), &noise).unwrap();
    for frame in 1..40 {
        t = predict(&t, &class_noise, cfg.dt);
        t = update(&t, &at(frame), &class_noise).unwrap();
    }
    t
}

#[test]
fn coasting_raises_mean_covariance_and_lowers_distant_cost() {
    let cfg = shipped();
    let cases = [
        (ClassLabel::Car, [4.5, 1.9, 1.6]),
        (ClassLabel::Pedestrian, [0.8, 0.6, 1.75]),
        (ClassLabel::Cyclist, [1.8, 0.7, 1.7]),
    ];
    let offsets = [[2.0, 0.0], [2.0, 2.0], [0.0, 3.0], [4.0, 3.0]];
    for (class, size) in cases {
        let noise = cfg.noise_config();
        let class_noise = noise.class(class).unwrap().clone();
        for off in offsets {
            let det = Detection::with_class_noise(
                0,
                class,
                Vector7::from([off[0], off[1], 0.0, 0.0, size[0], size[1], size[2]]),
                0.9,
                &noise,
            )
            .unwrap();
            let mut t = converged(&cfg, class, size);
            let mut prev_cov = mean_covariance(&t);
            let mut prev_cost = f64::INFINITY;
            for k in 1..=10 {
                t = predict(&t, &class_noise, cfg.dt);
                let cov = mean_covariance(&t);
                let cost = modified_divergence(&det, &t, cfg.heading_mode).unwrap();
                assert!(cov > prev_cov, "{class} k={k}: mean covariance {cov} after {prev_cov}");
                assert!(cost <= prev_cost, "{class} offset {off:?} k={k}: cost {cost} after {prev_cost}");
                prev_cov = cov;
                prev_cost = cost;
            }
        }
    }
}
