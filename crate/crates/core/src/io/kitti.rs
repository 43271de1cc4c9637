use std::io::Write;
use std::path::Path;

use super::{data_lines, fmt6, read_file, Fields};
use crate::error::{Error, Result};
use crate::motion::{ClassLabel, Vector7};
use crate::pipeline::FrameOutput;

/// One line of a KITTI-style track or ground-truth file.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiRecord {
    pub frame: u64,
    pub id: u64,
    pub class: ClassLabel,
    /// `(x, y, z, θ, l, w, h)`.
    pub state: Vector7,
    pub score: f64,
}

fn kitti_name(class: ClassLabel) -> String {
    let s = class.as_str();
    let mut out = s[..1].to_ascii_uppercase();
    out.push_str(&s[1..]);
    out
}

fn write_record<W: Write>(out: &mut W, r: &KittiRecord) -> Result<()> {
    let s = &r.state;
    writeln!(
        out,
        "{} {} {} -1 -1 -10 -1 -1 -1 -1 {} {} {} {} {} {} {} {}",
        r.frame,
        r.id,
        kitti_name(r.class),
        fmt6(s[6]),
        fmt6(s[5]),
        fmt6(s[4]),
        fmt6(s[0]),
        fmt6(s[1]),
        fmt6(s[2]),
        fmt6(s[3]),
        fmt6(r.score)
    )
    .map_err(|e| Error::io("<tracks>", e))
}

/// Reported tracks as records, ids ascending within each frame.
pub fn track_records(frames: &[FrameOutput]) -> Vec<KittiRecord> {
    let mut out = Vec::new();
    for f in frames {
        let start = out.len();
        out.extend(f.tracks.iter().map(|t| KittiRecord {
            frame: t.frame,
            id: t.id,
            class: t.class,
            state: t.state,
            score: t.score,
        }));
        out[start..].sort_by_key(|r: &KittiRecord| r.id);
    }
    out
}

/// Writes tracker output, one line per reported track, ids ascending
/// within each frame.
pub fn write_tracks<W: Write>(mut out: W, frames: &[FrameOutput]) -> Result<()> {
    for r in track_records(frames) {
        write_record(&mut out, &r)?;
    }
    Ok(())
}

/// Writes records sorted by `(frame, id)`.
pub fn write_truth<W: Write>(mut out: W, records: &[KittiRecord]) -> Result<()> {
    let mut sorted: Vec<_> = records.iter().collect();
    sorted.sort_by_key(|r| (r.frame, r.id));
    for r in sorted {
        write_record(&mut out, r)?;
    }
    Ok(())
}

pub fn parse_tracks(path: &Path) -> Result<Vec<KittiRecord>> {
    parse_tracks_str(&read_file(path)?, &path.display().to_string())
}

pub fn parse_tracks_str(text: &str, source: &str) -> Result<Vec<KittiRecord>> {
    let mut out: Vec<KittiRecord> = Vec::new();
    for (line_no, line) in data_lines(text) {
        let f = Fields::split(source, line_no, line);
        f.expect_len(18)?;
        let frame: u64 = f.parse(0, "frame")?;
        let id: u64 = f.parse(1, "track id")?;
        let class: ClassLabel = f.parse(2, "class")?;
        for k in 3..10 {
            f.float(k, "image field")?;
        }
        let h = f.float(10, "h")?;
        let w = f.float(11, "w")?;
        let l = f.float(12, "l")?;
        for (k, v) in [(10, h), (11, w), (12, l)] {
            if v <= 0.0 {
                return Err(f.error(f.column(k), format!("dimension must be positive, got {v}")));
            }
        }
        let state = Vector7::from([
            f.float(13, "x")?,
            f.float(14, "y")?,
            f.float(15, "z")?,
            f.float(16, "theta")?,
            l,
            w,
            h,
        ]);
        let score = f.float(17, "score")?;
        if let Some(prev) = out.last() {
            if frame < prev.frame {
                return Err(f.error(1, format!("frame {frame} after frame {}; frames must be nondecreasing", prev.frame)));
            }
            if frame == prev.frame && id <= prev.id {
                return Err(f.error(f.column(1), format!("track id {id} repeated or out of order in frame {frame}")));
            }
        }
        out.push(KittiRecord {
            frame,
            id,
            class,
            state,
            score,
        });
    }
    Ok(out)
}
