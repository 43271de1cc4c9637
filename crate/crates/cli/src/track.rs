use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use ugtrack::io::{load_config, parse_detections, parse_poses, render_config, write_trace, write_tracks};
use ugtrack::simulator::{DETECTIONS_FILE, POSES_FILE};
use ugtrack::{assemble_frames, run_sequence, TrackerConfig};

use crate::error::CliError;
use crate::scenes::scene_dirs;
use crate::write_file;

pub const TRACKS_FILE: &str = "tracks.txt";
pub const TRACE_FILE: &str = "trace.txt";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(clap::Args)]
pub struct Args {
    /// Detection file, or a directory of scene subdirectories each holding
    /// detections.txt and poses.txt.
    #[arg(long)]
    pub detections: PathBuf,
    /// Pose file. Not used in directory mode.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[arg(long)]
    pub config: PathBuf,
    /// Output track file; an output directory in directory mode, where every
    /// scene gets tracks.txt, trace.txt and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-frame trace of every live track (input for plot-data).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON run summary.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub detections: String,
    pub poses: String,
    pub config: String,
    /// SHA-256 of the normalized configuration text.
    pub config_hash: String,
    pub frames: usize,
    pub tracks_born: usize,
    pub tracks_died: usize,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

pub fn config_hash(cfg: &TrackerConfig) -> String {
    Sha256::digest(render_config(cfg).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Outputs<'a> {
    tracks: &'a Path,
    trace: Option<&'a Path>,
    summary: Option<&'a Path>,
}

fn track_one(detections: &Path, poses: &Path, config: &Path, cfg: &TrackerConfig, out: Outputs) -> Result<(), CliError> {
    let started = Instant::now();
    let frames = assemble_frames(parse_poses(poses)?, parse_detections(detections)?)?;
    let (output, stats) = run_sequence(&frames, cfg)?;

    let mut buf = Vec::new();
    write_tracks(&mut buf, &output)?;
    write_file(out.tracks, &buf)?;
    if let Some(path) = out.trace {
        let mut buf = Vec::new();
        write_trace(&mut buf, &output)?;
        write_file(path, &buf)?;
    }
    if let Some(path) = out.summary {
        let mut warnings = Vec::new();
        if stats.unknown_class_detections > 0 {
            warnings.push(format!(
                "{} detections of classes without a config section were dropped",
                stats.unknown_class_detections
            ));
        }
        if stats.below_floor_detections > 0 {
            warnings.push(format!("{} detections below score_floor were dropped", stats.below_floor_detections));
        }
        if stats.skipped_frames > 0 {
            warnings.push(format!("{} missing frame indices were coasted", stats.skipped_frames));
        }
        let summary = RunSummary {
            detections: detections.display().to_string(),
            poses: poses.display().to_string(),
            config: config.display().to_string(),
            config_hash: config_hash(cfg),
            frames: stats.frames,
            tracks_born: stats.born,
            tracks_died: stats.died,
            wall_time_s: started.elapsed().as_secs_f64(),
            warnings,
        };
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    Ok(())
}

pub fn run(a: &Args) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    if a.detections.is_dir() {
        if a.poses.is_some() || a.trace.is_some() || a.summary.is_some() {
            return Err(CliError::Input(
                "--poses, --trace and --summary are per-file options; directory mode writes all three per scene".into(),
            ));
        }
        let scenes = scene_dirs(&a.detections, DETECTIONS_FILE)?;
        return scenes.par_iter().try_for_each(|(name, dir)| {
            let out = a.out.join(name);
            track_one(
                &dir.join(DETECTIONS_FILE),
                &dir.join(POSES_FILE),
                &a.config,
                &cfg,
                Outputs {
                    tracks: &out.join(TRACKS_FILE),
                    trace: Some(&out.join(TRACE_FILE)),
                    summary: Some(&out.join(SUMMARY_FILE)),
                },
            )
            .map_err(|e| match e {
                CliError::Input(msg) => CliError::Input(format!("scene {name}: {msg}")),
                other => other,
            })
        });
    }
    let poses = a
        .poses
        .as_deref()
        .ok_or_else(|| CliError::Input("--poses is required when --detections is a file".into()))?;
    track_one(
        &a.detections,
        poses,
        &a.config,
        &cfg,
        Outputs {
            tracks: &a.out,
            trace: a.trace.as_deref(),
            summary: a.summary.as_deref(),
        },
    )
}
