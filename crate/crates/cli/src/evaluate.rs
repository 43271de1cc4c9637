use std::path::{Path, PathBuf};

use ugtrack::io::{parse_tracks, KittiRecord};
use ugtrack::metrics::{report, DEFAULT_RADIUS};
use ugtrack::simulator::TRUTH_FILE;

use crate::error::CliError;
use crate::scenes::scene_dirs;
use crate::track::TRACKS_FILE;
use crate::write_file;

#[derive(clap::Args)]
pub struct Args {
    /// Track file, or a directory of scene subdirectories holding tracks.txt.
    #[arg(long)]
    pub tracks: PathBuf,
    /// Truth file, or a directory of scene subdirectories holding truth.txt.
    #[arg(long)]
    pub truth: PathBuf,
    /// Center-distance match radius in meters.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    /// Also sweep score thresholds and report AMOTA.
    #[arg(long)]
    pub amota: bool,
    /// JSON report destination; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn frame_range(records: &[KittiRecord]) -> Option<(u64, u64)> {
    let lo = records.iter().map(|r| r.frame).min()?;
    let hi = records.iter().map(|r| r.frame).max()?;
    Some((lo, hi))
}

fn check_overlap(tracks: &Path, truth: &Path, t: &[KittiRecord], g: &[KittiRecord]) -> Result<(), CliError> {
    if let (Some((a0, a1)), Some((b0, b1))) = (frame_range(t), frame_range(g)) {
        if a1 < b0 || b1 < a0 {
            return Err(CliError::Input(format!(
                "frame ranges do not overlap: {} covers {a0}..={a1}, {} covers {b0}..={b1}",
                tracks.display(),
                truth.display()
            )));
        }
    }
    Ok(())
}

/// Reads every scene and shifts frames and ids so scenes never collide.
fn pooled(a: &Args) -> Result<(Vec<KittiRecord>, Vec<KittiRecord>), CliError> {
    let mut tracks = Vec::new();
    let mut truth = Vec::new();
    for (i, (name, dir)) in scene_dirs(&a.truth, TRUTH_FILE)?.into_iter().enumerate() {
        let track_path = a.tracks.join(&name).join(TRACKS_FILE);
        if !track_path.is_file() {
            return Err(CliError::Input(format!("scene {name}: {} is missing", track_path.display())));
        }
        let truth_path = dir.join(TRUTH_FILE);
        let t = parse_tracks(&track_path)?;
        let g = parse_tracks(&truth_path)?;
        check_overlap(&track_path, &truth_path, &t, &g)?;
        let offset = (i as u64) << 32;
        let shift = |mut r: KittiRecord| {
            r.frame += offset;
            r.id += offset;
            r
        };
        tracks.extend(t.into_iter().map(shift));
        truth.extend(g.into_iter().map(shift));
    }
    Ok((tracks, truth))
}

pub fn run(a: &Args) -> Result<(), CliError> {
    if !(a.radius.is_finite() && a.radius > 0.0) {
        return Err(CliError::Input(format!("--radius must be > 0, got {}", a.radius)));
    }
    let (tracks, truth) = if a.truth.is_dir() {
        pooled(a)?
    } else {
        let t = parse_tracks(&a.tracks)?;
        let g = parse_tracks(&a.truth)?;
        check_overlap(&a.tracks, &a.truth, &t, &g)?;
        (t, g)
    };
    let rep = report(&truth, &tracks, a.radius, a.amota)?;
    let json = format!("{}\n", serde_json::to_string_pretty(&rep).expect("report serializes"));
    match &a.out {
        Some(path) => {
            write_file(path, json.as_bytes())?;
            let m = &rep.overall;
            println!(
                "MOTA {:.4}  MOTP {:.3}  FP {}  FN {}  IDSW {}  recall {:.3}{}",
                m.mota,
                m.motp,
                m.fp,
                m.fn_,
                m.idsw,
                m.recall,
                rep.amota.as_ref().map_or(String::new(), |r| format!("  AMOTA {:.4}", r.amota))
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}
