//! Link impairment simulator: timing offset and clock drift, carrier
//! frequency offset with Wiener phase noise, static symbol-spaced multipath
//! and AWGN, applied in that order.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dsp::{self, Sample, SampleStream};
use crate::error::{Error, Result};

/// Half-width (input samples) of the resampling kernel; 64 taps in total.
pub const RESAMPLER_HALF_WIDTH: usize = 48;
const RESAMPLER_BETA: f64 = 15.0;
const WINDOW_TABLE: usize = 1 << 16;

const STREAM_PHASE_NOISE: u64 = 1;
const STREAM_AWGN: u64 = 2;

/// Impairments applied to the transmitted baseband.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentSpec {
    /// Static timing offset as a fraction of the symbol period, in `[-0.5, 0.5]`.
    pub tau0: f64,
    /// Sample-clock frequency offset (ppm).
    pub clock_ppm: f64,
    /// Carrier frequency offset (Hz).
    pub cfo_hz: f64,
    /// Wiener phase-noise 3 dB linewidth (Hz).
    pub pn_linewidth_hz: f64,
    /// Symbol-rate SNR (Es/N0, dB); `None` means noiseless.
    pub snr_db: Option<f64>,
    /// Symbol-spaced channel taps as `[re, im]` pairs; `None` means identity.
    pub isi_taps: Option<Vec<[f64; 2]>>,
    pub seed: u64,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        Self {
            tau0: 0.0,
            clock_ppm: 0.0,
            cfo_hz: 0.0,
            pn_linewidth_hz: 0.0,
            snr_db: None,
            isi_taps: None,
            seed: 0,
        }
    }
}

impl ImpairmentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0.abs() <= 0.5) {
            return Err(Error::param(format!(
                "tau0 must lie in [-0.5, 0.5], got {}",
                self.tau0
            )));
        }
        if !(self.pn_linewidth_hz >= 0.0) {
            return Err(Error::param("phase-noise linewidth must be non-negative"));
        }
        if !self.clock_ppm.is_finite() || !self.cfo_hz.is_finite() {
            return Err(Error::param("clock and carrier offsets must be finite"));
        }
        if let Some(s) = self.snr_db {
            if s.is_nan() {
                return Err(Error::param("SNR must not be NaN"));
            }
        }
        if let Some(t) = &self.isi_taps {
            if t.is_empty() {
                return Err(Error::param("ISI taps must be nonempty when present"));
            }
        }
        Ok(())
    }

    pub fn isi(&self) -> Option<Vec<Complex64>> {
        self.isi_taps
            .as_ref()
            .map(|t| t.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Channel output plus the carrier phase that was applied to each sample.
#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub stream: SampleStream,
    pub phase: Vec<f64>,
}

/// Runs the full impairment chain. `symbol_rate_hz` converts Hz quantities
/// to per-sample increments.
pub fn apply(
    x: &SampleStream,
    spec: &ImpairmentSpec,
    symbol_rate_hz: f64,
) -> Result<ChannelOutput> {
    spec.validate()?;
    let timed = apply_timing(x, spec.tau0, spec.clock_ppm)?;
    let fs = symbol_rate_hz * timed.rate();
    let phase = phase_trajectory(
        timed.len(),
        spec.cfo_hz,
        spec.pn_linewidth_hz,
        fs,
        spec.seed,
    );
    let mut y = apply_phase(&timed, &phase);
    if let Some(taps) = spec.isi() {
        y = apply_isi(&y, &taps)?;
    }
    if let Some(snr) = spec.snr_db {
        if !y.is_empty() {
            y = apply_awgn(&y, snr, spec.seed)?;
        }
    }
    Ok(ChannelOutput { stream: y, phase })
}

fn window_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let half = RESAMPLER_HALF_WIDTH as f64;
        (0..=WINDOW_TABLE)
            .map(|i| dsp::kaiser(i as f64 / WINDOW_TABLE as f64 * half, half, RESAMPLER_BETA))
            .collect()
    })
}

#[inline]
fn window(t: f64) -> f64 {
    let table = window_table();
    let u = t.abs() / RESAMPLER_HALF_WIDTH as f64 * WINDOW_TABLE as f64;
    let i = u as usize;
    if i >= WINDOW_TABLE {
        return 0.0;
    }
    let f = u - i as f64;
    table[i] + (table[i + 1] - table[i]) * f
}

/// Windowed-sinc interpolation of `x` at fractional index `pos`; samples
/// outside the buffer count as zero.
fn interpolate(x: &[Sample], pos: f64) -> Sample {
    let base = pos.floor();
    let frac = pos - base;
    let base = base as i64;
    if frac == 0.0 {
        return if base >= 0 && (base as usize) < x.len() {
            x[base as usize]
        } else {
            Sample::new(0.0, 0.0)
        };
    }
    let h = RESAMPLER_HALF_WIDTH as i64;
    // sin(pi (m - frac)) = (-1)^(m+1) sin(pi frac)
    let s = (PI * frac).sin() / PI;
    let mut acc = Sample::new(0.0, 0.0);
    for m in (-h + 1)..=h {
        let idx = base + m;
        if idx < 0 || idx as usize >= x.len() {
            continue;
        }
        let t = m as f64 - frac;
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        acc += x[idx as usize] * (sign * s / t * window(t));
    }
    acc
}

/// Resamples on the grid `t_k = k (1 + ppm 1e-6) / sps + tau0` (symbol
/// periods) with a 96-tap Kaiser-windowed sinc.
///
/// The output keeps the input's nominal time axis, so a positive `tau0`
/// makes every feature appear `tau0` symbols earlier.
pub fn apply_timing(x: &SampleStream, tau0: f64, clock_ppm: f64) -> Result<SampleStream> {
    if !(tau0.abs() <= 0.5) {
        return Err(Error::param(format!(
            "tau0 must lie in [-0.5, 0.5], got {tau0}"
        )));
    }
    if x.rate() < 2.0 {
        return Err(Error::param(
            "timing impairment needs at least 2 samples per symbol",
        ));
    }
    if tau0 == 0.0 && clock_ppm == 0.0 {
        return Ok(x.clone());
    }
    let step = 1.0 + clock_ppm * 1e-6;
    let offset = tau0 * x.rate();
    let last = x.len() as f64 - 1.0;
    let n_out = if x.is_empty() || last < offset {
        0
    } else {
        ((last - offset) / step).floor() as usize + 1
    };
    let out = (0..n_out)
        .map(|k| interpolate(x.samples(), k as f64 * step + offset))
        .collect();
    Ok(SampleStream::from_parts(out, x.rate(), x.origin()))
}

/// Carrier phase per sample: `2 pi cfo n / fs` plus a Wiener process with
/// increment variance `2 pi linewidth / fs`.
pub fn phase_trajectory(
    n: usize,
    cfo_hz: f64,
    linewidth_hz: f64,
    fs_hz: f64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_PHASE_NOISE);
    let sigma = (2.0 * PI * linewidth_hz / fs_hz).sqrt();
    let w = 2.0 * PI * cfo_hz / fs_hz;
    let mut wiener = 0.0;
    (0..n)
        .map(|k| {
            let p = w * k as f64 + wiener;
            if sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                wiener += sigma * z;
            }
            p
        })
        .collect()
}

/// Multiplies sample `n` by `e^{j phase[n]}`.
pub fn apply_phase(x: &SampleStream, phase: &[f64]) -> SampleStream {
    let rotated = x
        .samples()
        .iter()
        .zip(phase)
        .map(|(s, &p)| s * Complex64::from_polar(1.0, p))
        .collect();
    SampleStream::from_parts(rotated, x.rate(), x.origin())
}

/// CFO and phase noise at `sample_rate_hz`.
pub fn apply_cfo_pn(
    x: &SampleStream,
    cfo_hz: f64,
    linewidth_hz: f64,
    sample_rate_hz: f64,
    seed: u64,
) -> Result<SampleStream> {
    if !(sample_rate_hz > 0.0) {
        return Err(Error::param("sample rate must be positive"));
    }
    if !(linewidth_hz >= 0.0) {
        return Err(Error::param("phase-noise linewidth must be non-negative"));
    }
    let phase = phase_trajectory(x.len(), cfo_hz, linewidth_hz, sample_rate_hz, seed);
    Ok(apply_phase(x, &phase))
}

/// Adds circular complex Gaussian noise so that the symbol-rate SNR
/// (Es/N0 after a unit-energy matched filter) equals `snr_db`.
///
/// Per-sample noise variance is `P * sps / 10^(snr/10)` with `P` the measured
/// mean sample power.
pub fn apply_awgn(x: &SampleStream, snr_db: f64, seed: u64) -> Result<SampleStream> {
    if x.is_empty() {
        return Err(Error::Empty("apply_awgn input"));
    }
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let variance = x.power() * x.rate() / 10f64.powf(snr_db / 10.0);
    let sigma = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_AWGN);
    Ok(x.map(|s| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        s + Complex64::new(re, im) * sigma
    }))
}

/// Symbol-spaced FIR channel applied at the stream rate: tap `k` acts at a
/// delay of `k` symbols (`k * sps` samples). Length and origin are kept.
pub fn apply_isi(x: &SampleStream, taps: &[Complex64]) -> Result<SampleStream> {
    if taps.is_empty() {
        return Err(Error::param("ISI taps must be nonempty"));
    }
    let sps = x.rate().round();
    if (x.rate() - sps).abs() > 1e-9 || sps < 1.0 {
        return Err(Error::param(
            "ISI channel needs an integer samples-per-symbol rate",
        ));
    }
    let sps = sps as usize;
    let n = x.len();
    let s = x.samples();
    let out = (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .filter_map(|(k, t)| i.checked_sub(k * sps).map(|j| s[j] * t))
                .sum()
        })
        .collect();
    Ok(SampleStream::from_parts(out, x.rate(), x.origin()))
}
