use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use ugtrack::io::{parse_trace, parse_tracks, KittiRecord, TraceRecord};
use ugtrack::metrics::DEFAULT_RADIUS;

use crate::error::CliError;
use crate::write_file;

#[derive(clap::Args)]
pub struct Args {
    /// Trace file written by `track --trace`.
    #[arg(long)]
    pub tracks: PathBuf,
    /// Optional truth file; the truth object is the one the track sits on
    /// (same class, within 2 m) most often.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Track id to tabulate.
    #[arg(long)]
    pub object: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn dist(a: &TraceRecord, b: &KittiRecord) -> f64 {
    ((a.state[0] - b.state[0]).powi(2) + (a.state[1] - b.state[1]).powi(2) + (a.state[2] - b.state[2]).powi(2)).sqrt()
}

/// The truth id nearest the track in the most frames; ties go to the lower id.
fn truth_object(rows: &[&TraceRecord], truth: &[KittiRecord]) -> Option<u64> {
    let mut by_frame: BTreeMap<u64, Vec<&KittiRecord>> = BTreeMap::new();
    for r in truth {
        by_frame.entry(r.frame).or_default().push(r);
    }
    let mut votes: BTreeMap<u64, usize> = BTreeMap::new();
    for row in rows {
        let nearest = by_frame
            .get(&row.frame)
            .into_iter()
            .flatten()
            .filter(|g| g.class == row.class)
            .map(|g| (dist(row, g), g.id))
            .filter(|(d, _)| *d <= DEFAULT_RADIUS)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, id)) = nearest {
            *votes.entry(id).or_default() += 1;
        }
    }
    votes.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(id, _)| id)
}

fn xyz(v: Option<[f64; 3]>) -> String {
    match v {
        Some([x, y, z]) => format!("{x:.6} {y:.6} {z:.6}"),
        None => "- - -".into(),
    }
}

pub fn run(a: &Args) -> Result<(), CliError> {
    let trace = parse_trace(&a.tracks)?;
    let rows: Vec<&TraceRecord> = trace.iter().filter(|r| r.id == a.object).collect();
    if rows.is_empty() {
        return Err(CliError::Input(format!("track {} does not appear in {}", a.object, a.tracks.display())));
    }
    let truth = a.truth.as_deref().map(parse_tracks).transpose()?.unwrap_or_default();
    let truth_id = truth_object(&rows, &truth);
    let truth_at: BTreeMap<u64, [f64; 3]> = truth
        .iter()
        .filter(|r| Some(r.id) == truth_id)
        .map(|r| (r.frame, [r.state[0], r.state[1], r.state[2]]))
        .collect();

    let mut out = String::from(
        "# frame truth_x truth_y truth_z det_x det_y det_z track_x track_y track_z mean_cov status\n",
    );
    if let Some(id) = truth_id {
        writeln!(out, "# truth object {id}").expect("string write");
    }
    for r in rows {
        writeln!(
            out,
            "{} {} {} {} {:.9} {}",
            r.frame,
            xyz(truth_at.get(&r.frame).copied()),
            xyz(r.detection.map(|d| [d.x, d.y, d.z])),
            xyz(Some([r.state[0], r.state[1], r.state[2]])),
            r.mean_covariance,
            r.status
        )
        .expect("string write");
    }
    write_file(&a.out, out.as_bytes())
}
