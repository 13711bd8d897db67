//! Baud-spaced constant-modulus equalizer.

use serde::{Deserialize, Serialize};

use crate::dsp::Sample;
use crate::error::{Error, Result};

pub const DEFAULT_TAPS: usize = 21;
pub const DEFAULT_ALPHA_E: f64 = 9e-4;
/// Tap energy above which the equalizer is declared diverged.
pub const DIVERGENCE_ENERGY: f64 = 1e3;

/// Which output drives the tap update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateSignal {
    /// Phase-corrected output `y = x e^{-j theta}`.
    #[default]
    Corrected,
    /// Equalizer output `x`, ahead of carrier correction. Tolerates a
    /// frequency offset, which rotates the corrected-output gradient.
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EqualizerConfig {
    pub taps: usize,
    pub alpha_e: f64,
    pub update: UpdateSignal,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        Self {
            taps: DEFAULT_TAPS,
            alpha_e: DEFAULT_ALPHA_E,
            update: UpdateSignal::Corrected,
        }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taps < 3 || self.taps.is_multiple_of(2) {
            return Err(Error::param(format!(
                "equalizer length must be odd and >= 3, got {}",
                self.taps
            )));
        }
        if !(self.alpha_e.is_finite() && self.alpha_e >= 0.0) {
            return Err(Error::param(format!(
                "alpha_e must be >= 0, got {}",
                self.alpha_e
            )));
        }
        Ok(())
    }
}

/// Filter `x = w^T r` over the last `p` symbols, adapted by
/// `w <- w - alpha_e (|y|^2 - R) y r*`.
///
/// The register holds the newest symbol at index 0.
#[derive(Debug, Clone)]
pub struct CmaEqualizer {
    w: Vec<Sample>,
    reg: Vec<Sample>,
    alpha_e: f64,
    r2: f64,
    updates: usize,
}

impl CmaEqualizer {
    /// Center-spike initialization for dispersion constant `r2`.
    pub fn new(cfg: &EqualizerConfig, r2: f64) -> Result<Self> {
        cfg.validate()?;
        if !(r2.is_finite() && r2 > 0.0) {
            return Err(Error::param(format!(
                "dispersion constant must be > 0, got {r2}"
            )));
        }
        let mut w = vec![Sample::new(0.0, 0.0); cfg.taps];
        w[cfg.taps / 2] = Sample::new(1.0, 0.0);
        Ok(Self {
            reg: vec![Sample::new(0.0, 0.0); cfg.taps],
            w,
            alpha_e: cfg.alpha_e,
            r2,
            updates: 0,
        })
    }

    /// Starts from `taps` instead of the center spike; the length must match
    /// the configuration.
    pub fn with_taps(cfg: &EqualizerConfig, r2: f64, taps: &[Sample]) -> Result<Self> {
        let mut eq = Self::new(cfg, r2)?;
        if taps.len() != cfg.taps {
            return Err(Error::LengthMismatch {
                left: cfg.taps,
                right: taps.len(),
            });
        }
        eq.w.copy_from_slice(taps);
        Ok(eq)
    }

    pub fn taps(&self) -> &[Sample] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn center(&self) -> usize {
        self.w.len() / 2
    }

    pub fn tap_energy(&self) -> f64 {
        self.w.iter().map(|t| t.norm_sqr()).sum()
    }

    /// Shifts `r` into the register and returns the filter output.
    pub fn filter(&mut self, r: Sample) -> Sample {
        self.reg.rotate_right(1);
        self.reg[0] = r;
        self.output()
    }

    /// Output for the current register without shifting.
    pub fn output(&self) -> Sample {
        self.w.iter().zip(&self.reg).map(|(w, r)| w * r).sum()
    }

    /// CMA update using `y`, the output after any phase correction.
    ///
    /// `symbol` only labels the divergence error.
    pub fn update(&mut self, y: Sample, symbol: usize) -> Result<()> {
        let g = self.alpha_e * (y.norm_sqr() - self.r2) * y;
        for (w, r) in self.w.iter_mut().zip(&self.reg) {
            *w -= g * r.conj();
        }
        self.updates += 1;
        let energy = self.tap_energy();
        if !energy.is_finite() || energy > DIVERGENCE_ENERGY {
            return Err(Error::Diverged { symbol, energy });
        }
        Ok(())
    }

    pub fn updates(&self) -> usize {
        self.updates
    }
}
