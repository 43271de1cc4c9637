use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::read_file;
use crate::config::{ClassSettings, Gates, TrackerConfig};
use crate::error::{Error, Result};
use crate::lifecycle::LifecycleConfig;
use crate::motion::{ClassLabel, ClassNoise};

const GLOBAL_KEYS: [&str; 7] = [
    "dt",
    "cost_kind",
    "heading_mode",
    "min_hits",
    "max_age",
    "score_floor",
    "emit_predicted",
];

const CLASS_KEYS: [&str; 7] = [
    "det_var",
    "kin_var",
    "q_var",
    "r_var",
    "gate_guided",
    "gate_modified",
    "gate_mahalanobis",
];

struct Entry<'a> {
    line: usize,
    column: usize,
    value: &'a str,
}

struct Section<'a> {
    entries: HashMap<&'a str, Entry<'a>>,
}

struct Parser<'a> {
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn missing(&self, section: &str, key: &str) -> Error {
        Error::Config(format!("{}: [{section}] is missing required key `{key}`", self.source))
    }

    fn entry<'s>(&self, sec: &'s Section<'a>, name: &str, key: &str) -> Result<&'s Entry<'a>> {
        sec.entries.get(key).ok_or_else(|| self.missing(name, key))
    }

    fn float(&self, sec: &Section<'a>, name: &str, key: &str) -> Result<f64> {
        let e = self.entry(sec, name, key)?;
        self.float_at(e, key, e.value, e.column)
    }

    fn float_at(&self, e: &Entry<'a>, key: &str, text: &str, column: usize) -> Result<f64> {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(e.line, column, format!("`{key}`: expected a finite number, got `{text}`"))),
        }
    }

    fn floats<const N: usize>(&self, sec: &Section<'a>, name: &str, key: &str) -> Result<[f64; N]> {
        let e = self.entry(sec, name, key)?;
        let mut out = [0.0; N];
        let mut count = 0;
        let base = e.value.as_ptr() as usize;
        for tok in e.value.split_whitespace() {
            let column = e.column + (tok.as_ptr() as usize - base);
            if count == N {
                return Err(self.err(e.line, column, format!("`{key}`: expected {N} values, found more")));
            }
            out[count] = self.float_at(e, key, tok, column)?;
            count += 1;
        }
        if count != N {
            return Err(self.err(e.line, e.column, format!("`{key}`: expected {N} values, found {count}")));
        }
        Ok(out)
    }

    fn parsed<T: std::str::FromStr>(&self, sec: &Section<'a>, name: &str, key: &str, what: &str) -> Result<T> {
        let e = self.entry(sec, name, key)?;
        e.value
            .parse()
            .map_err(|_| self.err(e.line, e.column, format!("`{key}`: expected {what}, got `{}`", e.value)))
    }

    fn range_err(&self, sec: &Section<'a>, key: &str, err: Error) -> Error {
        match (err, sec.entries.get(key)) {
            (Error::Config(msg), Some(e)) => self.err(e.line, e.column, msg),
            (other, _) => other,
        }
    }
}

/// Parses configuration text. `source` names the text in errors.
pub fn parse_config(text: &str, source: &str) -> Result<TrackerConfig> {
    let p = Parser { source };
    let mut global: Option<Section> = None;
    let mut classes: Vec<(ClassLabel, Section)> = Vec::new();
    // which section new keys go to: None = before any header
    let mut current: Option<Option<ClassLabel>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        if let Some(inner) = trimmed.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| p.err(line_no, indent + 1, "unterminated section header"))?
                .trim();
            let mut words = inner.split_whitespace();
            match (words.next(), words.next(), words.next()) {
                (Some("global"), None, None) => {
                    if global.is_some() {
                        return Err(p.err(line_no, indent + 1, "duplicate section [global]"));
                    }
                    global = Some(Section {
                        entries: HashMap::new(),
                    });
                    current = Some(None);
                }
                (Some("class"), Some(name), None) => {
                    let class: ClassLabel = name
                        .parse()
                        .map_err(|e: Error| p.err(line_no, indent + 1, e.to_string()))?;
                    if classes.iter().any(|(c, _)| *c == class) {
                        return Err(p.err(line_no, indent + 1, format!("duplicate section [class {class}]")));
                    }
                    classes.push((
                        class,
                        Section {
                            entries: HashMap::new(),
                        },
                    ));
                    current = Some(Some(class));
                }
                _ => {
                    return Err(p.err(line_no, indent + 1, format!("unknown section [{inner}]")));
                }
            }
            continue;
        }

        let eq = trimmed
            .find('=')
            .ok_or_else(|| p.err(line_no, indent + 1, "expected `key = value`"))?;
        let key = trimmed[..eq].trim();
        let value = trimmed[eq + 1..].trim();
        let value_col = indent + eq + 1 + (trimmed[eq + 1..].len() - trimmed[eq + 1..].trim_start().len()) + 1;
        if value.is_empty() {
            return Err(p.err(line_no, value_col, format!("`{key}` has no value")));
        }
        let entry = Entry {
            line: line_no,
            column: value_col,
            value,
        };
        let (section, allowed, label) = match current {
            None => return Err(p.err(line_no, indent + 1, format!("key `{key}` appears before any section"))),
            Some(None) => (global.as_mut().expect("global section open"), &GLOBAL_KEYS[..], "global".to_string()),
            Some(Some(class)) => (
                &mut classes.iter_mut().find(|(c, _)| *c == class).expect("class section open").1,
                &CLASS_KEYS[..],
                format!("class {class}"),
            ),
        };
        if !allowed.contains(&key) {
            return Err(p.err(line_no, indent + 1, format!("unknown key `{key}` in [{label}]")));
        }
        if section.entries.insert(key, entry).is_some() {
            return Err(p.err(line_no, indent + 1, format!("duplicate key `{key}` in [{label}]")));
        }
    }

    let g = global.ok_or_else(|| Error::Config(format!("{source}: missing [global] section")))?;
    let lifecycle = LifecycleConfig {
        min_hits: p.parsed(&g, "global", "min_hits", "a nonnegative integer")?,
        max_age: p.parsed(&g, "global", "max_age", "a nonnegative integer")?,
        score_floor: p.float(&g, "global", "score_floor")?,
        emit_predicted: p.parsed(&g, "global", "emit_predicted", "`true` or `false`")?,
    };
    let dt = p.float(&g, "global", "dt")?;
    if dt <= 0.0 {
        let e = &g.entries["dt"];
        return Err(p.err(e.line, e.column, format!("`dt` must be > 0, got {dt}")));
    }
    if let Err(err) = lifecycle.validate() {
        let key = ["min_hits", "max_age", "score_floor"]
            .into_iter()
            .find(|k| err.to_string().contains(k))
            .unwrap_or("min_hits");
        return Err(p.range_err(&g, key, err));
    }

    let mut out = BTreeMap::new();
    for (class, sec) in &classes {
        let name = format!("class {class}");
        let noise = ClassNoise {
            det_var: p.floats(sec, &name, "det_var")?,
            kin_var: p.floats(sec, &name, "kin_var")?,
            q_var: p.floats(sec, &name, "q_var")?,
            r_var: p.floats(sec, &name, "r_var")?,
        };
        if let Err(err) = noise.validate(*class) {
            let key = CLASS_KEYS[..4]
                .iter()
                .find(|k| err.to_string().contains(*k))
                .copied()
                .unwrap_or("det_var");
            return Err(p.range_err(sec, key, err));
        }
        let gates = Gates {
            guided: p.float(sec, &name, "gate_guided")?,
            modified: p.float(sec, &name, "gate_modified")?,
            mahalanobis: p.float(sec, &name, "gate_mahalanobis")?,
        };
        for key in ["gate_guided", "gate_modified", "gate_mahalanobis"] {
            let v = p.float(sec, &name, key)?;
            if v <= 0.0 {
                let e = &sec.entries[key];
                return Err(p.err(e.line, e.column, format!("`{key}` must be > 0, got {v}")));
            }
        }
        out.insert(*class, ClassSettings { noise, gates });
    }

    let cfg = TrackerConfig {
        dt,
        cost_kind: p.parsed(&g, "global", "cost_kind", "guided, modified or mahalanobis")?,
        heading_mode: p.parsed(&g, "global", "heading_mode", "flip or full")?,
        lifecycle,
        classes: out,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<TrackerConfig> {
    parse_config(&read_file(path)?, &path.display().to_string())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

/// Renders a configuration that [`parse_config`] reads back exactly.
pub fn render_config(cfg: &TrackerConfig) -> String {
    let mut s = String::new();
    let l = &cfg.lifecycle;
    let _ = writeln!(s, "[global]");
    let _ = writeln!(s, "dt = {:?}", cfg.dt);
    let _ = writeln!(s, "cost_kind = {}", cfg.cost_kind);
    let _ = writeln!(s, "heading_mode = {}", cfg.heading_mode);
    let _ = writeln!(s, "min_hits = {}", l.min_hits);
    let _ = writeln!(s, "max_age = {}", l.max_age);
    let _ = writeln!(s, "score_floor = {:?}", l.score_floor);
    let _ = writeln!(s, "emit_predicted = {}", l.emit_predicted);
    for (class, settings) in &cfg.classes {
        let n = &settings.noise;
        let _ = writeln!(s, "\n[class {class}]");
        let _ = writeln!(s, "det_var = {}", join(&n.det_var));
        let _ = writeln!(s, "kin_var = {}", join(&n.kin_var));
        let _ = writeln!(s, "q_var = {}", join(&n.q_var));
        let _ = writeln!(s, "r_var = {}", join(&n.r_var));
        let _ = writeln!(s, "gate_guided = {:?}", settings.gates.guided);
        let _ = writeln!(s, "gate_modified = {:?}", settings.gates.modified);
        let _ = writeln!(s, "gate_mahalanobis = {:?}", settings.gates.mahalanobis);
    }
    s
}

pub fn save_config(path: &Path, cfg: &TrackerConfig) -> Result<()> {
    std::fs::write(path, render_config(cfg)).map_err(|e| Error::io(path, e))
}
