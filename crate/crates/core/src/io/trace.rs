use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::{data_lines, fmt6, read_file, Fields};
use crate::error::{Error, Result};
use crate::lifecycle::TrackStatus;
use crate::motion::{ClassLabel, Vector7};
use crate::pipeline::FrameOutput;

/// One line of a trace file: a live track's state and the detection it
/// absorbed, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub frame: u64,
    pub id: u64,
    pub class: ClassLabel,
    pub status: TrackStatus,
    pub state: Vector7,
    pub mean_covariance: f64,
    pub detection: Option<Vector3<f64>>,
}

pub fn write_trace<W: Write>(mut out: W, frames: &[FrameOutput]) -> Result<()> {
    for f in frames {
        for t in &f.trace {
            let s = &t.state;
            let det = match &t.detection {
                Some(d) => format!("{} {} {}", fmt6(d[0]), fmt6(d[1]), fmt6(d[2])),
                None => "- - -".to_string(),
            };
            writeln!(
                out,
                "{} {} {} {} {} {} {} {} {} {} {} {:.9} {}",
                f.frame,
                t.id,
                t.class,
                t.status,
                fmt6(s[0]),
                fmt6(s[1]),
                fmt6(s[2]),
                fmt6(s[3]),
                fmt6(s[4]),
                fmt6(s[5]),
                fmt6(s[6]),
                t.mean_covariance,
                det
            )
            .map_err(|e| Error::io("<trace>", e))?;
        }
    }
    Ok(())
}

pub fn parse_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    parse_trace_str(&read_file(path)?, &path.display().to_string())
}

pub fn parse_trace_str(text: &str, source: &str) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (line_no, line) in data_lines(text) {
        let f = Fields::split(source, line_no, line);
        f.expect_len(15)?;
        let mut state = Vector7::zeros();
        for k in 0..7 {
            state[k] = f.float(4 + k, "state entry")?;
        }
        let mean_covariance = f.float(11, "mean covariance")?;
        let absent = (12..15).filter(|&k| f.raw(k) == "-").count();
        let detection = match absent {
            3 => None,
            0 => Some(Vector3::new(
                f.float(12, "detection x")?,
                f.float(13, "detection y")?,
                f.float(14, "detection z")?,
            )),
            _ => return Err(f.error(f.column(12), "detection columns must be all numbers or all `-`")),
        };
        out.push(TraceRecord {
            frame: f.parse(0, "frame")?,
            id: f.parse(1, "track id")?,
            class: f.parse(2, "class")?,
            status: f.parse(3, "status")?,
            state,
            mean_covariance,
            detection,
        });
    }
    Ok(out)
}
