use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{data_lines, read_file, Fields};
use crate::error::{Error, Result};
use crate::pipeline::Pose;

pub fn parse_poses(path: &Path) -> Result<Vec<(u64, Pose)>> {
    parse_poses_str(&read_file(path)?, &path.display().to_string())
}

/// Frames must be strictly increasing.
pub fn parse_poses_str(text: &str, source: &str) -> Result<Vec<(u64, Pose)>> {
    let mut out: Vec<(u64, Pose)> = Vec::new();
    for (line_no, line) in data_lines(text) {
        let f = Fields::split(source, line_no, line);
        f.expect_len(13)?;
        let frame: u64 = f.parse(0, "frame")?;
        let mut rot = Matrix3::zeros();
        let mut t = Vector3::zeros();
        for row in 0..3 {
            for col in 0..4 {
                let v = f.float(1 + row * 4 + col, "pose entry")?;
                if col == 3 {
                    t[row] = v;
                } else {
                    rot[(row, col)] = v;
                }
            }
        }
        let pose = Pose::new(rot, t).map_err(|e| f.wrap(1, e))?;
        if let Some((last, _)) = out.last() {
            if frame <= *last {
                return Err(f.error(1, format!("frame {frame} after frame {last}; frames must increase")));
            }
        }
        out.push((frame, pose));
    }
    Ok(out)
}

pub fn write_poses<W: Write>(mut out: W, poses: &[(u64, Pose)]) -> Result<()> {
    for (frame, pose) in poses {
        let r = pose.rotation();
        let t = pose.translation_vector();
        let mut line = frame.to_string();
        for row in 0..3 {
            for col in 0..3 {
                line.push(' ');
                line.push_str(&format!("{:.9}", r[(row, col)]));
            }
            line.push(' ');
            line.push_str(&format!("{:.9}", t[row]));
        }
        writeln!(out, "{line}").map_err(|e| Error::io("<poses>", e))?;
    }
    Ok(())
}
