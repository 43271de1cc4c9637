//! Complete tracker configuration: frame period, cost selection, lifecycle
//! and per-class noise and gates.

use std::collections::BTreeMap;

use crate::cost::{CostConfig, CostKind, HeadingMode};
use crate::error::{Error, Result};
use crate::lifecycle::LifecycleConfig;
use crate::motion::{ClassLabel, ClassNoise, NoiseConfig};

/// Gate thresholds for each cost kind. Costs differ in scale, so each kind
/// carries its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gates {
    pub guided: f64,
    pub modified: f64,
    pub mahalanobis: f64,
}

impl Gates {
    pub fn for_kind(&self, kind: CostKind) -> f64 {
        match kind {
            CostKind::Guided => self.guided,
            CostKind::Modified => self.modified,
            CostKind::Mahalanobis => self.mahalanobis,
        }
    }

    pub fn set(&mut self, kind: CostKind, value: f64) {
        match kind {
            CostKind::Guided => self.guided = value,
            CostKind::Modified => self.modified = value,
            CostKind::Mahalanobis => self.mahalanobis = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSettings {
    pub noise: ClassNoise,
    pub gates: Gates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Frame period in seconds.
    pub dt: f64,
    pub cost_kind: CostKind,
    pub heading_mode: HeadingMode,
    pub lifecycle: LifecycleConfig,
    pub classes: BTreeMap<ClassLabel, ClassSettings>,
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise_config().validate()?;
        self.lifecycle.validate()?;
        if self.classes.is_empty() {
            return Err(Error::Config("at least one class section is required".into()));
        }
        for (class, settings) in &self.classes {
            for kind in CostKind::ALL {
                let gate = settings.gates.for_kind(kind);
                if !(gate.is_finite() && gate > 0.0) {
                    return Err(Error::Config(format!(
                        "class `{class}`: gate_{kind} must be finite and > 0, got {gate}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn noise_config(&self) -> NoiseConfig {
        NoiseConfig {
            dt: self.dt,
            classes: self.classes.iter().map(|(c, s)| (*c, s.noise.clone())).collect(),
        }
    }

    pub fn cost_config(&self, class: ClassLabel) -> Result<CostConfig> {
        let settings = self
            .classes
            .get(&class)
            .ok_or_else(|| Error::Config(format!("no section for class `{class}`")))?;
        Ok(CostConfig {
            heading_mode: self.heading_mode,
            gate_threshold: settings.gates.for_kind(self.cost_kind),
            kind: self.cost_kind,
        })
    }

    /// Same configuration with a different association cost.
    pub fn with_cost_kind(&self, kind: CostKind) -> Self {
        Self {
            cost_kind: kind,
            ..self.clone()
        }
    }

    /// Replaces the noise entries with calibrated ones, keeping gates.
    pub fn with_noise(&self, noise: &NoiseConfig) -> Result<Self> {
        let mut out = self.clone();
        out.dt = noise.dt;
        out.classes.clear();
        for (class, n) in &noise.classes {
            let gates = self
                .classes
                .get(class)
                .ok_or_else(|| Error::Config(format!("base configuration has no section for class `{class}`")))?
                .gates;
            out.classes.insert(
                *class,
                ClassSettings {
                    noise: n.clone(),
                    gates,
                },
            );
        }
        Ok(out)
    }
}
