use std::io::Write;
use std::path::Path;

use super::{data_lines, fmt6, read_file, Fields};
use crate::error::{Error, Result};
use crate::motion::{ClassLabel, Vector7};
use crate::pipeline::RawDetection;

/// Reads a detection file and groups it by frame.
pub fn parse_detections(path: &Path) -> Result<Vec<(u64, Vec<RawDetection>)>> {
    parse_detections_str(&read_file(path)?, &path.display().to_string())
}

pub fn parse_detections_str(text: &str, source: &str) -> Result<Vec<(u64, Vec<RawDetection>)>> {
    let mut frames: Vec<(u64, Vec<RawDetection>)> = Vec::new();
    for (line_no, line) in data_lines(text) {
        let f = Fields::split(source, line_no, line);
        f.expect_len(10)?;
        let frame: u64 = f.parse(0, "frame")?;
        let class: ClassLabel = f.parse(1, "class")?;
        let mut state = Vector7::zeros();
        let names = ["x", "y", "z", "theta", "l", "w", "h"];
        for (k, name) in names.iter().enumerate() {
            state[k] = f.float(k + 2, name)?;
        }
        for k in 4..7 {
            if state[k] <= 0.0 {
                return Err(f.error(f.column(k + 2), format!("dimension {} must be positive", names[k])));
            }
        }
        let score = f.float(9, "score")?;
        if !(0.0..=1.0).contains(&score) {
            return Err(f.error(f.column(9), format!("score {score} outside [0, 1]")));
        }
        let det = RawDetection {
            frame,
            class,
            state,
            score,
        };
        match frames.last_mut() {
            Some((last, group)) if *last == frame => group.push(det),
            Some((last, _)) if *last > frame => {
                return Err(f.error(1, format!("frame {frame} after frame {last}; frames must be nondecreasing")));
            }
            _ => frames.push((frame, vec![det])),
        }
    }
    Ok(frames)
}

pub fn write_detections<W: Write>(mut out: W, detections: &[RawDetection]) -> Result<()> {
    for d in detections {
        let s = &d.state;
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {}",
            d.frame,
            d.class,
            fmt6(s[0]),
            fmt6(s[1]),
            fmt6(s[2]),
            fmt6(s[3]),
            fmt6(s[4]),
            fmt6(s[5]),
            fmt6(s[6]),
            fmt6(d.score)
        )
        .map_err(|e| Error::io("<detections>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert!(parse_detections_str("", "d").unwrap().is_empty());
        assert!(parse_detections_str("# only a comment\n\n", "d").unwrap().is_empty());
    }

    #[test]
    fn one_line() {
        let frames = parse_detections_str("3 car 1.5 -2 0.25 0.1 4.2 1.8 1.6 0.93\n", "d").unwrap();
        assert_eq!(frames.len(), 1);
        let (frame, dets) = &frames[0];
        assert_eq!(*frame, 3);
        assert_eq!(dets[0].class, ClassLabel::Car);
        assert_eq!(dets[0].state, Vector7::from([1.5, -2.0, 0.25, 0.1, 4.2, 1.8, 1.6]));
        assert_eq!(dets[0].score, 0.93);
    }

    #[test]
    fn grouping_and_ordering() {
        let text = "0 car 0 0 0 0 1 1 1 0.5\n0 pedestrian 1 1 0 0 1 1 1 0.5\n2 car 0 0 0 0 1 1 1 0.5\n";
        let frames = parse_detections_str(text, "d").unwrap();
        assert_eq!(frames.iter().map(|(f, d)| (*f, d.len())).collect::<Vec<_>>(), vec![(0, 2), (2, 1)]);
        let backwards = "2 car 0 0 0 0 1 1 1 0.5\n1 car 0 0 0 0 1 1 1 0.5\n";
        assert!(parse_detections_str(backwards, "d").is_err());
    }

    #[test]
    fn errors_name_line_and_column() {
        let text = "0 car 0 0 0 0 1 1 1 0.5\n1 car 0 0 0 0 1 1 1\n";
        match parse_detections_str(text, "dets.txt").unwrap_err() {
            Error::Parse { path, line, .. } => {
                assert_eq!(path, "dets.txt");
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
        match parse_detections_str("0 car 0 0 0 0 -1 1 1 0.5", "d").unwrap_err() {
            Error::Parse { column, .. } => assert_eq!(column, 15),
            other => panic!("{other:?}"),
        }
        assert!(parse_detections_str("0 car 0 0 0 0 1 1 1 1.5", "d").is_err());
        assert!(parse_detections_str("0 car nan 0 0 0 1 1 1 0.5", "d").is_err());
        assert!(parse_detections_str("0 car inf 0 0 0 1 1 1 0.5", "d").is_err());
        assert!(parse_detections_str("0 van 0 0 0 0 1 1 1 0.5", "d").is_err());
    }

    #[test]
    fn write_then_parse() {
        let dets = vec![RawDetection {
            frame: 4,
            class: ClassLabel::Pedestrian,
            state: Vector7::from([1.234_567_4, -0.5, 0.0, 3.0, 0.8, 0.6, 1.7]),
            score: 0.75,
        }];
        let mut buf = Vec::new();
        write_detections(&mut buf, &dets).unwrap();
        let back = parse_detections_str(std::str::from_utf8(&buf).unwrap(), "d").unwrap();
        assert!((back[0].1[0].state - dets[0].state).amax() < 1e-6);
    }
}
