use std::path::{Path, PathBuf};

use ugtrack::io::{load_config, parse_config, parse_detections, parse_tracks, save_config};
use ugtrack::metrics::{calibration_set, DEFAULT_RADIUS};
use ugtrack::motion::{calibrate, CalibrationSet};
use ugtrack::simulator::{DETECTIONS_FILE, TRUTH_FILE};
use ugtrack::{RawDetection, TrackerConfig};

use crate::error::CliError;
use crate::scenes::scene_dirs;

const SHIPPED: &str = include_str!("../../../config/default.conf");

#[derive(clap::Args)]
pub struct Args {
    /// Truth file, or a directory of scene subdirectories holding truth.txt.
    #[arg(long)]
    pub truth: PathBuf,
    /// Detection file, or a directory of scene subdirectories holding
    /// detections.txt.
    #[arg(long)]
    pub detections: PathBuf,
    /// Where to write the calibrated configuration.
    #[arg(long)]
    pub out: PathBuf,
    /// Configuration supplying everything except the noise statistics;
    /// the shipped default when absent.
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Center-distance radius for pairing detections with truth, meters.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
}

fn scene_set(truth: &Path, detections: &Path, radius: f64) -> Result<CalibrationSet, CliError> {
    let truth = parse_tracks(truth)?;
    let dets: Vec<RawDetection> = parse_detections(detections)?.into_iter().flat_map(|(_, g)| g).collect();
    Ok(calibration_set(&truth, &dets, radius))
}

pub fn run(a: &Args) -> Result<(), CliError> {
    if !(a.radius.is_finite() && a.radius > 0.0) {
        return Err(CliError::Input(format!("--radius must be > 0, got {}", a.radius)));
    }
    let base: TrackerConfig = match &a.base {
        Some(path) => load_config(path)?,
        None => parse_config(SHIPPED, "<shipped default config>")?,
    };
    let data = if a.truth.is_dir() {
        let mut all = CalibrationSet::default();
        for (name, dir) in scene_dirs(&a.truth, TRUTH_FILE)? {
            let det_path = a.detections.join(&name).join(DETECTIONS_FILE);
            if !det_path.is_file() {
                return Err(CliError::Input(format!("scene {name}: {} is missing", det_path.display())));
            }
            let s = scene_set(&dir.join(TRUTH_FILE), &det_path, a.radius)?;
            all.tracks.extend(s.tracks);
            all.pairs.extend(s.pairs);
        }
        all
    } else {
        scene_set(&a.truth, &a.detections, a.radius)?
    };
    let noise = calibrate(&data, base.dt)?;
    let cfg = base.with_noise(&noise)?;
    save_config(&a.out, &cfg)?;
    for (class, s) in &cfg.classes {
        let r = &s.noise.r_var;
        println!(
            "{class}: r_var x {:.4} y {:.4} z {:.4} theta {:.4} l {:.4} w {:.4} h {:.4}",
            r[0], r[1], r[2], r[3], r[4], r[5], r[6]
        );
    }
    Ok(())
}
