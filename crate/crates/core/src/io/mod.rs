//! Plain-text file formats.
//!
//! * detections: `frame class x y z theta l w h score`
//! * poses: `frame r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz`
//! * tracks / truth (KITTI tracking layout):
//!   `frame id class -1 -1 -10 -1 -1 -1 -1 h w l x y z theta score`
//! * trace: `frame id class status x y z theta l w h mean_cov det_x det_y det_z`
//! * configuration: `key = value` lines with `[class <name>]` sections
//!
//! Blank lines and lines starting with `#` are ignored in every format.
//! Parsers reject NaN and infinities.

mod config;
mod detections;
mod kitti;
mod poses;
mod trace;

use std::path::Path;
use std::str::FromStr;

pub use config::{load_config, parse_config, render_config, save_config};
pub use detections::{parse_detections, parse_detections_str, write_detections};
pub use kitti::{parse_tracks, parse_tracks_str, track_records, write_tracks, write_truth, KittiRecord};
pub use poses::{parse_poses, parse_poses_str, write_poses};
pub use trace::{parse_trace, parse_trace_str, write_trace, TraceRecord};

use crate::error::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Whitespace-separated fields of one line, with 1-based columns.
pub(crate) struct Fields<'a> {
    source: &'a str,
    line: usize,
    fields: Vec<(usize, &'a str)>,
}

impl<'a> Fields<'a> {
    pub(crate) fn split(source: &'a str, line_no: usize, line: &'a str) -> Self {
        let mut fields = Vec::new();
        let mut start = None;
        for (pos, ch) in line.char_indices() {
            match (ch.is_whitespace(), start) {
                (true, Some(s)) => {
                    fields.push((s + 1, &line[s..pos]));
                    start = None;
                }
                (false, None) => start = Some(pos),
                _ => {}
            }
        }
        if let Some(s) = start {
            fields.push((s + 1, &line[s..]));
        }
        Self {
            source,
            line: line_no,
            fields,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.fields.len()
    }

    pub(crate) fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: self.line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn expect_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(self.error(1, format!("expected {n} fields, found {}", self.len())));
        }
        Ok(())
    }

    pub(crate) fn column(&self, index: usize) -> usize {
        self.fields[index].0
    }

    pub(crate) fn raw(&self, index: usize) -> &'a str {
        self.fields[index].1
    }

    pub(crate) fn parse<T: FromStr>(&self, index: usize, what: &str) -> Result<T> {
        let (col, text) = self.fields[index];
        text.parse()
            .map_err(|_| self.error(col, format!("invalid {what} `{text}`")))
    }

    pub(crate) fn float(&self, index: usize, what: &str) -> Result<f64> {
        let v: f64 = self.parse(index, what)?;
        if !v.is_finite() {
            return Err(self.error(self.column(index), format!("{what} must be finite, got `{}`", self.raw(index))));
        }
        Ok(v)
    }

    /// Re-anchors a domain error at a column of this line.
    pub(crate) fn wrap(&self, index: usize, err: Error) -> Error {
        match err {
            Error::Parse { .. } => err,
            other => self.error(self.column(index), other.to_string()),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

pub(crate) fn fmt6(v: f64) -> String {
    // avoid "-0.000000" so equal values always print identically
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}
