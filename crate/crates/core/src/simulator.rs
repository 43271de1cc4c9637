//! Seeded synthetic scenes: piecewise constant-velocity ground truth,
//! occlusion windows, noisy detections, misses and clutter.
//!
//! Randomness is split into independent streams (noise, misses, clutter,
//! scores) derived from the scene seed, so changing e.g. the clutter rate
//! leaves the noise draws untouched. Noise, miss and score draws are taken
//! for every object-frame, visible or not.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::io::{write_detections, write_poses, write_truth, KittiRecord};
use crate::motion::{ClassLabel, Vector7, MIN_DIMENSION};
use crate::pipeline::{FrameData, Pose, RawDetection};

const NOISE_STREAM: u64 = 1;
const MISS_STREAM: u64 = 2;
const CLUTTER_STREAM: u64 = 3;
const SCORE_STREAM: u64 = 4;

/// Score ranges for real and clutter detections.
pub const VISIBLE_SCORE: (f64, f64) = (0.7, 1.0);
pub const CLUTTER_SCORE: (f64, f64) = (0.1, 0.5);

/// Axis-aligned box clutter is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityChange {
    /// First frame moving with the new velocity.
    pub frame: u64,
    pub velocity: [f64; 3],
    /// New heading; unchanged when absent.
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: u64,
    pub class: ClassLabel,
    /// `(x, y, z, θ, l, w, h)` at frame `start`.
    pub initial: [f64; 7],
    pub velocity: [f64; 3],
    #[serde(default)]
    pub start: u64,
    /// Last frame the object exists in (inclusive); defaults to the scene end.
    #[serde(default)]
    pub end: Option<u64>,
    #[serde(default)]
    pub changes: Vec<VelocityChange>,
    /// Inclusive `[first, last]` frame windows without detections.
    #[serde(default)]
    pub occlusions: Vec<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_frames: u64,
    pub dt: f64,
    #[serde(default)]
    pub miss_rate: f64,
    /// Expected clutter detections per frame.
    #[serde(default)]
    pub clutter_rate: f64,
    pub workspace: Workspace,
    /// Per-class detection noise variances over `(x, y, z, θ, l, w, h)`.
    #[serde(default)]
    pub noise: BTreeMap<ClassLabel, [f64; 7]>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(0.0..=1.0).contains(&self.miss_rate) {
            return bad(format!("miss_rate {} outside [0, 1]", self.miss_rate));
        }
        if !(self.clutter_rate.is_finite() && self.clutter_rate >= 0.0) {
            return bad(format!("clutter_rate must be finite and >= 0, got {}", self.clutter_rate));
        }
        let ws = &self.workspace;
        if (0..3).any(|k| !(ws.min[k].is_finite() && ws.max[k].is_finite() && ws.min[k] < ws.max[k])) {
            return bad(format!("workspace box is empty: min {:?}, max {:?}", ws.min, ws.max));
        }
        for (class, var) in &self.noise {
            if var.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad(format!("noise for class `{class}` must be finite and >= 0"));
            }
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return bad(format!("object id {} used more than once", o.id));
            }
            if !self.noise.contains_key(&o.class) {
                return bad(format!("object {}: no noise entry for class `{}`", o.id, o.class));
            }
            if o.initial.iter().chain(&o.velocity).any(|v| !v.is_finite()) {
                return bad(format!("object {}: non-finite initial state or velocity", o.id));
            }
            if o.initial[4..].iter().any(|v| *v <= 0.0) {
                return bad(format!("object {}: dimensions must be positive", o.id));
            }
            if o.end.is_some_and(|e| e < o.start) {
                return bad(format!("object {}: end before start", o.id));
            }
            let mut prev = o.start;
            for c in &o.changes {
                if c.frame <= prev || c.velocity.iter().chain(&c.theta).any(|v| !v.is_finite()) {
                    return bad(format!(
                        "object {}: velocity changes must have finite values and increasing frames after start",
                        o.id
                    ));
                }
                prev = c.frame;
            }
            if o.occlusions.iter().any(|[a, b]| a > b) {
                return bad(format!("object {}: occlusion window with first > last", o.id));
            }
        }
        Ok(())
    }

    fn last_frame(&self, o: &ObjectSpec) -> Option<u64> {
        let scene_last = self.n_frames.checked_sub(1)?;
        Some(o.end.map_or(scene_last, |e| e.min(scene_last)))
    }
}

fn occluded(o: &ObjectSpec, frame: u64) -> bool {
    o.occlusions.iter().any(|[a, b]| (*a..=*b).contains(&frame))
}

/// Exact per-frame states of every object, sorted by `(frame, id)`, with score 1.
pub fn generate_truth(cfg: &ScenarioConfig) -> Result<Vec<KittiRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for o in &cfg.objects {
        let Some(last) = cfg.last_frame(o) else { continue };
        let mut state = Vector7::from(o.initial);
        state[3] = wrap_angle(state[3]);
        let mut velocity = o.velocity;
        let mut changes = o.changes.iter().peekable();
        for frame in o.start..=last {
            if frame > o.start {
                if let Some(c) = changes.next_if(|c| c.frame == frame) {
                    velocity = c.velocity;
                    if let Some(theta) = c.theta {
                        state[3] = wrap_angle(theta);
                    }
                }
                // integrate from the previous frame with the velocity in force
                // for this step
                for k in 0..3 {
                    state[k] += velocity[k] * cfg.dt;
                }
            }
            out.push(KittiRecord {
                frame,
                id: o.id,
                class: o.class,
                state,
                score: 1.0,
            });
        }
    }
    out.sort_by_key(|r| (r.frame, r.id));
    Ok(out)
}

/// Per-frame bookkeeping of how the detections came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameLog {
    pub frame: u64,
    pub visible: usize,
    pub missed: usize,
    pub clutter: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rendered {
    pub detections: Vec<RawDetection>,
    pub log: Vec<FrameLog>,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn typical_size(class: ClassLabel) -> [f64; 3] {
    match class {
        ClassLabel::Car => [4.5, 1.9, 1.6],
        ClassLabel::Pedestrian => [0.8, 0.6, 1.75],
        ClassLabel::Cyclist | ClassLabel::Bicycle | ClassLabel::Motorcycle => [1.8, 0.7, 1.7],
        ClassLabel::Bus => [11.0, 2.9, 3.5],
        ClassLabel::Truck => [7.0, 2.5, 3.0],
        ClassLabel::Trailer => [10.0, 2.8, 3.8],
    }
}

/// Turns truth into detections: noise for visible objects, random misses
/// and Poisson clutter. Truth must come from [`generate_truth`] on `cfg`.
pub fn render_detections(cfg: &ScenarioConfig, truth: &[KittiRecord]) -> Result<Rendered> {
    cfg.validate()?;
    let objects: BTreeMap<u64, &ObjectSpec> = cfg.objects.iter().map(|o| (o.id, o)).collect();
    let mut noise_rng = stream(cfg.seed, NOISE_STREAM);
    let mut miss_rng = stream(cfg.seed, MISS_STREAM);
    let mut clutter_rng = stream(cfg.seed, CLUTTER_STREAM);
    let mut score_rng = stream(cfg.seed, SCORE_STREAM);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let clutter_classes: Vec<ClassLabel> = if cfg.noise.is_empty() {
        vec![ClassLabel::Car]
    } else {
        cfg.noise.keys().copied().collect()
    };
    let poisson = (cfg.clutter_rate > 0.0)
        .then(|| Poisson::new(cfg.clutter_rate))
        .transpose()
        .map_err(|e| Error::Config(format!("clutter_rate: {e}")))?;

    let mut out = Rendered::default();
    let mut by_frame: BTreeMap<u64, Vec<&KittiRecord>> = BTreeMap::new();
    for r in truth {
        by_frame.entry(r.frame).or_default().push(r);
    }

    for frame in 0..cfg.n_frames {
        let mut log = FrameLog {
            frame,
            ..FrameLog::default()
        };
        for r in by_frame.get(&frame).into_iter().flatten() {
            let spec = objects
                .get(&r.id)
                .ok_or_else(|| Error::InvalidInput(format!("truth id {} is not in the scenario", r.id)))?;
            let var = cfg.noise[&spec.class];
            let mut state = r.state;
            for k in 0..7 {
                state[k] += var[k].sqrt() * std_normal.sample(&mut noise_rng);
            }
            let missed = miss_rng.random::<f64>() < cfg.miss_rate;
            let score = score_rng.random_range(VISIBLE_SCORE.0..VISIBLE_SCORE.1);
            if occluded(spec, frame) {
                continue;
            }
            if missed {
                log.missed += 1;
                continue;
            }
            log.visible += 1;
            state[3] = wrap_angle(state[3]);
            for k in 4..7 {
                state[k] = state[k].max(MIN_DIMENSION);
            }
            out.detections.push(RawDetection {
                frame,
                class: r.class,
                state,
                score,
            });
        }

        let n_clutter = poisson.as_ref().map_or(0, |p| p.sample(&mut clutter_rng) as usize);
        let ws = &cfg.workspace;
        for _ in 0..n_clutter {
            let class = clutter_classes[clutter_rng.random_range(0..clutter_classes.len())];
            let size = typical_size(class);
            let mut state = Vector7::zeros();
            for k in 0..3 {
                state[k] = clutter_rng.random_range(ws.min[k]..ws.max[k]);
            }
            state[3] = wrap_angle(clutter_rng.random_range(-PI..PI));
            for k in 0..3 {
                state[4 + k] = size[k] * clutter_rng.random_range(0.8..1.2);
            }
            out.detections.push(RawDetection {
                frame,
                class,
                state,
                score: clutter_rng.random_range(CLUTTER_SCORE.0..CLUTTER_SCORE.1),
            });
        }
        log.clutter = n_clutter;
        out.log.push(log);
    }
    Ok(out)
}

/// Truth plus ready-to-track frames (identity poses) for one scene.
pub fn simulate_frames(cfg: &ScenarioConfig) -> Result<(Vec<KittiRecord>, Vec<FrameData>)> {
    let truth = generate_truth(cfg)?;
    let rendered = render_detections(cfg, &truth)?;
    let mut frames: Vec<FrameData> = (0..cfg.n_frames)
        .map(|frame| FrameData {
            frame,
            pose: Pose::identity(),
            detections: Vec::new(),
        })
        .collect();
    for d in rendered.detections {
        frames[d.frame as usize].detections.push(d);
    }
    Ok((truth, frames))
}

/// Paths of one scene's files inside its directory.
pub const DETECTIONS_FILE: &str = "detections.txt";
pub const POSES_FILE: &str = "poses.txt";
pub const TRUTH_FILE: &str = "truth.txt";

/// Writes `detections.txt`, `poses.txt` (identity) and `truth.txt` into `dir`.
pub fn write_scene(dir: &Path, cfg: &ScenarioConfig) -> Result<Rendered> {
    let truth = generate_truth(cfg)?;
    let rendered = render_detections(cfg, &truth)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let poses: Vec<(u64, Pose)> = (0..cfg.n_frames).map(|f| (f, Pose::identity())).collect();

    let mut buf = Vec::new();
    write_detections(&mut buf, &rendered.detections)?;
    write_file(&dir.join(DETECTIONS_FILE), &buf)?;
    buf.clear();
    write_poses(&mut buf, &poses)?;
    write_file(&dir.join(POSES_FILE), &buf)?;
    buf.clear();
    write_truth(&mut buf, &truth)?;
    write_file(&dir.join(TRUTH_FILE), &buf)?;
    Ok(rendered)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Procedural crossing-traffic benchmark: objects pass near a shared
/// intersection, each hidden once for a few frames around its crossing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub seed: u64,
    pub scenes: usize,
    pub objects_per_scene: usize,
    pub n_frames: u64,
    pub dt: f64,
    /// Inclusive range of occlusion lengths in frames.
    pub occlusion: [u64; 2],
    /// Frames every object is visible for before its occlusion may start.
    pub warmup: u64,
    pub miss_rate: f64,
    pub clutter_rate: f64,
    pub workspace: Workspace,
    /// Relative frequency of each class.
    pub class_weights: BTreeMap<ClassLabel, f64>,
    pub noise: BTreeMap<ClassLabel, [f64; 7]>,
    /// Inclusive speed range per class, m/s.
    pub speed: BTreeMap<ClassLabel, [f64; 2]>,
    /// Largest distance by which a path misses the intersection centre.
    pub lateral_offset: f64,
    /// Chance that an object turns as it crosses.
    #[serde(default)]
    pub turn_probability: f64,
    /// Inclusive range of turn magnitudes in radians; the side is random.
    #[serde(default)]
    pub turn_angle: [f64; 2],
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.occlusion[0] > self.occlusion[1] {
            return bad("occlusion range has first > last".into());
        }
        if self.n_frames == 0 || !(self.dt > 0.0) {
            return bad("benchmark needs n_frames > 0 and dt > 0".into());
        }
        if self.class_weights.is_empty() || self.class_weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("class_weights must be nonempty, finite and >= 0".into());
        }
        if self.class_weights.values().sum::<f64>() <= 0.0 {
            return bad("class_weights sum to zero".into());
        }
        for class in self.class_weights.keys() {
            match self.speed.get(class) {
                Some([lo, hi]) if lo.is_finite() && hi.is_finite() && 0.0 < *lo && lo <= hi => {}
                _ => return bad(format!("speed range for class `{class}` missing or invalid")),
            }
        }
        if !(self.lateral_offset.is_finite() && self.lateral_offset >= 0.0) {
            return bad("lateral_offset must be finite and >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.turn_probability) {
            return bad(format!("turn_probability {} outside [0, 1]", self.turn_probability));
        }
        let [a, b] = self.turn_angle;
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b) {
            return bad("turn_angle must satisfy 0 <= first <= last".into());
        }
        Ok(())
    }

    /// Expands this description into concrete scenes. Deterministic in `seed`.
    pub fn scenes(&self) -> Result<Vec<ScenarioConfig>> {
        self.validate()?;
        let mut layout = ChaCha8Rng::seed_from_u64(self.seed);
        let classes: Vec<(ClassLabel, f64)> = self.class_weights.iter().map(|(c, w)| (*c, *w)).collect();
        let total: f64 = classes.iter().map(|(_, w)| w).sum();
        let duration = (self.n_frames - 1) as f64 * self.dt;
        let mut scenes = Vec::with_capacity(self.scenes);
        for _ in 0..self.scenes {
            let mut objects = Vec::with_capacity(self.objects_per_scene);
            for id in 0..self.objects_per_scene as u64 {
                let mut pick = layout.random::<f64>() * total;
                let mut class = classes[classes.len() - 1].0;
                for (c, w) in &classes {
                    if pick < *w {
                        class = *c;
                        break;
                    }
                    pick -= w;
                }
                let [lo, hi] = self.speed[&class];
                let speed = layout.random_range(lo..=hi);
                let heading = layout.random_range(-PI..PI);
                let offset = layout.random_range(-self.lateral_offset..=self.lateral_offset);
                let t_cross = layout.random_range(0.25 * duration..=0.75 * duration);
                let turns = layout.random::<f64>() < self.turn_probability;
                let turn = layout.random_range(self.turn_angle[0]..=self.turn_angle[1])
                    * if layout.random::<bool>() { 1.0 } else { -1.0 };
                let (c, s) = (heading.cos(), heading.sin());
                let size = typical_size(class);
                let cross_frame = (t_cross / self.dt).round() as u64;
                let before = [c * speed, s * speed, 0.0];
                let heading_after = wrap_angle(heading + turn);
                let after = [heading_after.cos() * speed, heading_after.sin() * speed, 0.0];
                // closest approach to the centre at time t_cross
                let origin = [-s * offset - c * speed * t_cross, c * offset - s * speed * t_cross];
                let path = piecewise_path(origin, before, turns.then_some((cross_frame + 1, after)), self.dt, self.n_frames);
                let Some((start, end)) = visible_span(&path, &self.workspace) else { continue };
                let p = path[start as usize];
                let initial = [p[0], p[1], size[2] / 2.0, heading, size[0], size[1], size[2]];
                let changes = if turns && start <= cross_frame && cross_frame < end {
                    vec![VelocityChange {
                        frame: cross_frame + 1,
                        velocity: after,
                        theta: Some(heading_after),
                    }]
                } else {
                    vec![]
                };
                let (velocity, initial) = if turns && start > cross_frame {
                    let mut turned = initial;
                    turned[3] = heading_after;
                    (after, turned)
                } else {
                    (before, initial)
                };

                let len = layout.random_range(self.occlusion[0]..=self.occlusion[1]);
                let first = cross_frame.saturating_sub(len / 2).max(start + self.warmup);
                let last = first + len - 1;
                let occlusions = if len > 0 && last < end { vec![[first, last]] } else { vec![] };

                objects.push(ObjectSpec {
                    id,
                    class,
                    initial,
                    velocity,
                    start,
                    end: Some(end),
                    changes,
                    occlusions,
                });
            }
            scenes.push(ScenarioConfig {
                seed: layout.random(),
                n_frames: self.n_frames,
                dt: self.dt,
                miss_rate: self.miss_rate,
                clutter_rate: self.clutter_rate,
                workspace: self.workspace,
                noise: self.noise.clone(),
                objects,
            });
        }
        Ok(scenes)
    }
}

/// Planar positions for frames `0..n`, switching velocity at `turn.0`.
fn piecewise_path(origin: [f64; 2], before: [f64; 3], turn: Option<(u64, [f64; 3])>, dt: f64, n: u64) -> Vec<[f64; 2]> {
    let mut p = origin;
    (0..n)
        .map(|f| {
            if f > 0 {
                let v = match turn {
                    Some((at, after)) if f >= at => after,
                    _ => before,
                };
                p[0] += v[0] * dt;
                p[1] += v[1] * dt;
            }
            p
        })
        .collect()
}

/// First contiguous run of frames whose position lies inside the
/// workspace footprint.
fn visible_span(path: &[[f64; 2]], ws: &Workspace) -> Option<(u64, u64)> {
    let inside = |p: &[f64; 2]| ws.min[0] <= p[0] && p[0] <= ws.max[0] && ws.min[1] <= p[1] && p[1] <= ws.max[1];
    let start = path.iter().position(inside)?;
    let len = path[start..].iter().take_while(|p| inside(p)).count();
    Some((start as u64, (start + len - 1) as u64))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    benchmark: Option<BenchmarkSpec>,
    #[serde(default)]
    scenes: Vec<ScenarioConfig>,
}

/// Reads a scenario file: either a `[benchmark]` table or `[[scenes]]`
/// entries, not both.
pub fn parse_scenario(text: &str, source: &str) -> Result<Vec<ScenarioConfig>> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                (line, column)
            })
            .unwrap_or((0, 0));
        Error::Parse {
            path: source.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let scenes = match (file.benchmark, file.scenes.is_empty()) {
        (Some(b), true) => b.scenes()?,
        (None, false) => file.scenes,
        (Some(_), false) => {
            return Err(Error::Config(format!("{source}: give either [benchmark] or [[scenes]], not both")));
        }
        (None, true) => return Err(Error::Config(format!("{source}: no [benchmark] or [[scenes]] found"))),
    };
    for (i, s) in scenes.iter().enumerate() {
        s.validate().map_err(|e| Error::Config(format!("{source}: scene {i}: {e}")))?;
    }
    Ok(scenes)
}

pub fn load_scenario(path: &Path) -> Result<Vec<ScenarioConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

/// Directory name of scene `index`.
pub fn scene_dir_name(index: usize) -> String {
    format!("scene_{index:03}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_object(noise: [f64; 7]) -> ScenarioConfig {
        ScenarioConfig {
            seed: 11,
            n_frames: 10,
            dt: 0.1,
            miss_rate: 0.0,
            clutter_rate: 0.0,
            workspace: Workspace {
                min: [-50.0, -50.0, -2.0],
                max: [50.0, 50.0, 2.0],
            },
            noise: BTreeMap::from([(ClassLabel::Car, noise)]),
            objects: vec![ObjectSpec {
                id: 0,
                class: ClassLabel::Car,
                initial: [0.0, 0.0, 0.0, 0.0, 4.0, 1.8, 1.5],
                velocity: [1.0, 0.0, 0.0],
                start: 0,
                end: None,
                changes: vec![],
                occlusions: vec![],
            }],
        }
    }

    #[test]
    fn constant_velocity_positions() {
        let truth = generate_truth(&one_object([0.0; 7])).unwrap();
        assert_eq!(truth.len(), 10);
        for (k, r) in truth.iter().enumerate() {
            assert_eq!(r.frame, k as u64);
            assert!((r.state[0] - 0.1 * k as f64).abs() < 1e-12);
            assert_eq!(r.score, 1.0);
        }
    }

    #[test]
    fn zero_objects_and_zero_frames() {
        let mut cfg = one_object([0.0; 7]);
        cfg.objects.clear();
        assert!(generate_truth(&cfg).unwrap().is_empty());
        let mut cfg = one_object([0.0; 7]);
        cfg.n_frames = 0;
        let truth = generate_truth(&cfg).unwrap();
        assert!(truth.is_empty());
        assert!(render_detections(&cfg, &truth).unwrap().detections.is_empty());
    }

    #[test]
    fn noiseless_detections_equal_truth() {
        let cfg = one_object([0.0; 7]);
        let truth = generate_truth(&cfg).unwrap();
        let r = render_detections(&cfg, &truth).unwrap();
        assert_eq!(r.detections.len(), truth.len());
        for (d, t) in r.detections.iter().zip(&truth) {
            assert_eq!(d.state, t.state);
            assert!((VISIBLE_SCORE.0..VISIBLE_SCORE.1).contains(&d.score));
        }
    }

    #[test]
    fn occluded_frames_have_no_detection() {
        let mut cfg = one_object([0.0; 7]);
        cfg.objects[0].occlusions = vec![[3, 5]];
        let truth = generate_truth(&cfg).unwrap();
        let r = render_detections(&cfg, &truth).unwrap();
        let frames: Vec<u64> = r.detections.iter().map(|d| d.frame).collect();
        assert_eq!(frames, vec![0, 1, 2, 6, 7, 8, 9]);
    }

    #[test]
    fn velocity_change() {
        let mut cfg = one_object([0.0; 7]);
        cfg.objects[0].changes = vec![VelocityChange {
            frame: 5,
            velocity: [0.0, 2.0, 0.0],
            theta: Some(PI / 2.0),
        }];
        let truth = generate_truth(&cfg).unwrap();
        assert!((truth[4].state[0] - 0.4).abs() < 1e-12);
        assert!((truth[5].state[1] - 0.2).abs() < 1e-12);
        assert!((truth[5].state[0] - 0.4).abs() < 1e-12);
        assert_eq!(truth[5].state[3], PI / 2.0);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut cfg = one_object([0.0; 7]);
        cfg.objects.push(cfg.objects[0].clone());
        assert!(matches!(generate_truth(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn noise_std_matches_configuration() {
        let mut cfg = one_object([0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        cfg.n_frames = 10_000;
        cfg.objects[0].velocity = [0.0; 3];
        let truth = generate_truth(&cfg).unwrap();
        let r = render_detections(&cfg, &truth).unwrap();
        let xs: Vec<f64> = r.detections.iter().map(|d| d.state[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        assert!((0.48..=0.52).contains(&std), "std {std}");
    }

    #[test]
    fn clutter_does_not_perturb_noise() {
        let mut cfg = one_object([0.1; 7]);
        let truth = generate_truth(&cfg).unwrap();
        let clean = render_detections(&cfg, &truth).unwrap();
        cfg.clutter_rate = 3.0;
        cfg.miss_rate = 0.3;
        let noisy = render_detections(&cfg, &truth).unwrap();
        for d in noisy.detections.iter().filter(|d| d.score >= VISIBLE_SCORE.0) {
            assert!(clean.detections.contains(d));
        }
        for log in &noisy.log {
            let n = noisy.detections.iter().filter(|d| d.frame == log.frame).count();
            assert_eq!(n, log.visible + log.clutter);
            assert_eq!(log.visible + log.missed, 1);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = one_object([0.1; 7]);
        let truth = generate_truth(&cfg).unwrap();
        assert_eq!(render_detections(&cfg, &truth).unwrap(), render_detections(&cfg, &truth).unwrap());
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(render_detections(&cfg, &truth).unwrap(), render_detections(&other, &truth).unwrap());
    }

    #[test]
    fn scenario_toml() {
        let text = r#"
[[scenes]]
seed = 3
n_frames = 5
dt = 0.1
workspace = { min = [-10, -10, -1], max = [10, 10, 1] }
noise = { car = [0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01] }

[[scenes.objects]]
id = 1
class = "car"
initial = [0, 0, 0, 0, 4, 1.8, 1.5]
velocity = [1, 0, 0]
occlusions = [[2, 3]]
"#;
        let scenes = parse_scenario(text, "s.toml").unwrap();
        assert_eq!(scenes.len(), 1);
        assert_eq!(scenes[0].objects[0].occlusions, vec![[2, 3]]);

        let typo = text.replace("velocity =", "velocty =");
        match parse_scenario(&typo, "s.toml").unwrap_err() {
            Error::Parse { line, .. } => assert!(line > 0),
            other => panic!("{other:?}"),
        }
    }
}
