//! Runs every association cost on a scenario and prints CLEAR totals.
//!
//! ```text
//! cargo run --release -p ugtrack-core --example ablation -- config/default.conf scenarios/benchmark.toml
//! cargo run --release -p ugtrack-core --example ablation -- CONFIG SCENARIO guided 0.5,1,2
//! ```

use std::path::Path;

use ugtrack::io::{load_config, track_records};
use ugtrack::metrics::{evaluate, ClearMetrics, DEFAULT_RADIUS};
use ugtrack::simulator::{load_scenario, simulate_frames};
use ugtrack::{run_sequence, CostKind, TrackerConfig};

fn totals(cfg: &TrackerConfig, scenes: &[ugtrack::simulator::ScenarioConfig]) -> ugtrack::Result<ClearMetrics> {
    let mut all_truth = Vec::new();
    let mut all_tracks = Vec::new();
    for (i, scene) in scenes.iter().enumerate() {
        let (truth, frames) = simulate_frames(scene)?;
        let (out, _) = run_sequence(&frames, cfg)?;
        // keep ids distinct across scenes
        let offset = (i as u64) << 32;
        all_truth.extend(truth.into_iter().map(|mut r| {
            r.id += offset;
            r.frame += offset;
            r
        }));
        all_tracks.extend(track_records(&out).into_iter().map(|mut r| {
            r.id += offset;
            r.frame += offset;
            r
        }));
    }
    evaluate(&all_truth, &all_tracks, DEFAULT_RADIUS)
}

fn print(label: &str, m: &ClearMetrics) {
    println!(
        "{label:<24} MOTA {:.4}  MOTP {:.3}  FP {:>5}  FN {:>5}  IDSW {:>4}  recall {:.3}",
        m.mota, m.motp, m.fp, m.fn_, m.idsw, m.recall
    );
}

fn main() -> ugtrack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = args.first().map_or("config/default.conf", String::as_str);
    let scenario = args.get(1).map_or("scenarios/benchmark.toml", String::as_str);
    let base = load_config(Path::new(config))?;
    let scenes = load_scenario(Path::new(scenario))?;

    if let (Some(kind), Some(gates)) = (args.get(2), args.get(3)) {
        let kind: CostKind = kind.parse().map_err(|_| ugtrack::Error::InvalidInput(format!("unknown cost `{kind}`")))?;
        for gate in gates.split(',') {
            let gate: f64 = gate.parse().map_err(|_| ugtrack::Error::InvalidInput(format!("bad gate `{gate}`")))?;
            let mut cfg = base.with_cost_kind(kind);
            for settings in cfg.classes.values_mut() {
                settings.gates.set(kind, gate);
            }
            print(&format!("{kind} gate {gate}"), &totals(&cfg, &scenes)?);
        }
        return Ok(());
    }
    for kind in CostKind::ALL {
        print(kind.as_str(), &totals(&base.with_cost_kind(kind), &scenes)?);
    }
    Ok(())
}
