//! Second-order carrier phase loop.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dsp::Sample;
use crate::error::{Error, Result};
use crate::modem::Constellation;

pub const DEFAULT_KP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarrierMode {
    /// Decision-free tracking loop.
    Pll,
    /// De-rotate by the channel's true phase trajectory.
    Oracle,
    /// No phase correction.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseDetector {
    /// Fourth-power detector `Im(-y^4) / (4 |E c^4|)`.
    FourthPower,
    /// Decision-directed `Im(y conj(d)) / |d|^2`.
    DecisionDirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarrierConfig {
    pub mode: CarrierMode,
    pub kp: f64,
    pub ki: f64,
    pub detector: PhaseDetector,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self {
            mode: CarrierMode::Pll,
            kp: DEFAULT_KP,
            ki: DEFAULT_KP * DEFAULT_KP / 4.0,
            detector: PhaseDetector::FourthPower,
        }
    }
}

impl CarrierConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!(
                    "carrier {name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Proportional-integral phase tracker.
#[derive(Debug, Clone)]
pub struct Dpll {
    kp: f64,
    ki: f64,
    detector: PhaseDetector,
    theta: f64,
    freq: f64,
    fourth_scale: f64,
    constellation: Constellation,
}

impl Dpll {
    pub fn new(cfg: &CarrierConfig, constellation: &Constellation) -> Result<Self> {
        cfg.validate()?;
        let m4 = constellation.fourth_moment().norm();
        if m4 <= 0.0 {
            return Err(Error::param("constellation has no fourth-power carrier"));
        }
        Ok(Self {
            kp: cfg.kp,
            ki: cfg.ki,
            detector: cfg.detector,
            theta: 0.0,
            freq: 0.0,
            fourth_scale: 1.0 / (4.0 * m4),
            constellation: constellation.clone(),
        })
    }

    /// Current phase estimate in `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.theta
    }

    /// Current frequency estimate in radians per symbol.
    pub fn frequency(&self) -> f64 {
        self.freq
    }

    /// Phase error for a de-rotated sample; approximately the residual phase
    /// for small errors.
    pub fn detect(&self, y: Sample) -> f64 {
        match self.detector {
            PhaseDetector::FourthPower => (-y.powi(4)).im * self.fourth_scale,
            PhaseDetector::DecisionDirected => {
                let d = self.constellation.point(self.constellation.decide(y));
                (y * d.conj()).im / d.norm_sqr()
            }
        }
    }

    /// De-rotates `x` with the current estimate, then advances the loop.
    pub fn step(&mut self, x: Sample) -> Sample {
        let y = x * Sample::from_polar(1.0, -self.theta);
        let e = self.detect(y);
        self.freq += self.ki * e;
        self.theta = wrap_phase(self.theta + self.freq + self.kp * e);
        y
    }
}
