//! Sample buffers, FIR filtering, root-raised-cosine design and integer
//! rate changes.
//!
//! Every stream carries its own time axis: `origin` is the time (in symbol
//! periods) of the first sample and `rate` the number of samples per symbol.
//! Filters in [`FilterMode::Centered`] mode shift `origin` by the group delay
//! so that features stay at the same absolute time through a cascade.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One complex baseband sample.
pub type Sample = Complex64;

/// Contiguous complex samples at a declared rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    samples: Vec<Sample>,
    rate: f64,
    origin: f64,
}

impl SampleStream {
    /// Builds a stream, rejecting non-finite samples and non-positive rates.
    pub fn new(samples: Vec<Sample>, rate: f64) -> Result<Self> {
        Self::with_origin(samples, rate, 0.0)
    }

    pub fn with_origin(samples: Vec<Sample>, rate: f64, origin: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::param(format!(
                "stream rate must be positive, got {rate}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::param("stream origin must be finite"));
        }
        if let Some(index) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            rate,
            origin,
        })
    }

    /// Internal constructor for outputs of finite arithmetic on finite inputs.
    pub(crate) fn from_parts(samples: Vec<Sample>, rate: f64, origin: f64) -> Self {
        debug_assert!(rate > 0.0);
        Self {
            samples,
            rate,
            origin,
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    /// Samples per symbol.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Symbol time of the first sample.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Symbol time of sample `index`.
    pub fn time_of(&self, index: usize) -> f64 {
        self.origin + index as f64 / self.rate
    }

    /// Sub-stream `[start, end)`; the origin moves with the cut.
    pub fn slice(&self, start: usize, end: usize) -> SampleStream {
        let end = end.min(self.samples.len());
        let start = start.min(end);
        Self::from_parts(
            self.samples[start..end].to_vec(),
            self.rate,
            self.time_of(start),
        )
    }

    /// Mean power per sample.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub(crate) fn map(&self, f: impl FnMut(&Sample) -> Sample) -> SampleStream {
        Self::from_parts(self.samples.iter().map(f).collect(), self.rate, self.origin)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Taps {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Finite impulse response filter with real or complex taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Taps,
}

/// Output time alignment of [`fir_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// Causal convolution; the origin is unchanged, so the output lags by the group delay.
    Full,
    /// Same samples as `Full`, with the origin moved back by the group delay.
    #[default]
    Centered,
}

impl FirFilter {
    pub fn real(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("filter needs at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("filter taps must be finite"));
        }
        Ok(Self {
            taps: Taps::Real(taps),
        })
    }

    pub fn complex(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("filter needs at least one tap"));
        }
        if taps.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(Error::param("filter taps must be finite"));
        }
        Ok(Self {
            taps: Taps::Complex(taps),
        })
    }

    pub fn len(&self) -> usize {
        match &self.taps {
            Taps::Real(t) => t.len(),
            Taps::Complex(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Group delay in samples, `(len - 1) / 2`.
    pub fn group_delay(&self) -> f64 {
        (self.len() as f64 - 1.0) / 2.0
    }

    /// Real taps, if the filter is real.
    pub fn real_taps(&self) -> Option<&[f64]> {
        match &self.taps {
            Taps::Real(t) => Some(t),
            Taps::Complex(_) => None,
        }
    }

    /// Taps as complex numbers.
    pub fn taps(&self) -> Vec<Complex64> {
        match &self.taps {
            Taps::Real(t) => t.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            Taps::Complex(t) => t.clone(),
        }
    }

    /// Sum of squared tap magnitudes.
    pub fn energy(&self) -> f64 {
        match &self.taps {
            Taps::Real(t) => t.iter().map(|v| v * v).sum(),
            Taps::Complex(t) => t.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    /// One output of the full convolution, `sum_k h[k] x[j - k]`.
    #[inline]
    fn output_at(&self, x: &[Sample], j: usize) -> Sample {
        let lo = (j + 1).saturating_sub(x.len());
        match &self.taps {
            Taps::Real(h) => {
                let hi = h.len().min(j + 1);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in lo..hi {
                    acc += x[j - k] * h[k];
                }
                acc
            }
            Taps::Complex(h) => {
                let hi = h.len().min(j + 1);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in lo..hi {
                    acc += x[j - k] * h[k];
                }
                acc
            }
        }
    }
}

/// Designs a unit-energy root-raised-cosine filter with `span * sps + 1` taps.
pub fn design_rrc(rolloff: f64, span_symbols: usize, sps: usize) -> Result<FirFilter> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::param(format!(
            "rolloff must lie in [0, 1], got {rolloff}"
        )));
    }
    if span_symbols == 0 {
        return Err(Error::param("RRC span must be at least one symbol"));
    }
    if sps == 0 {
        return Err(Error::param("samples per symbol must be positive"));
    }
    let n = span_symbols * sps;
    let half = n as f64 / 2.0;
    let mut taps: Vec<f64> = (0..=n)
        .map(|k| rrc_impulse((k as f64 - half) / sps as f64, rolloff))
        .collect();
    // Symmetrize exactly; the closed form is evaluated at mirrored arguments.
    for k in 0..taps.len() / 2 {
        let m = 0.5 * (taps[k] + taps[n - k]);
        taps[k] = m;
        taps[n - k] = m;
    }
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    FirFilter::real(taps)
}

/// Continuous RRC impulse response at `t` symbol periods (unnormalized).
fn rrc_impulse(t: f64, beta: f64) -> f64 {
    const EPS: f64 = 1e-9;
    if t.abs() < EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < EPS {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Linear convolution of `x` with `f`; output length `len(x) + len(f) - 1`.
pub fn fir_filter(x: &SampleStream, f: &FirFilter, mode: FilterMode) -> Result<SampleStream> {
    if x.is_empty() {
        return Err(Error::Empty("fir_filter input"));
    }
    let n_out = x.len() + f.len() - 1;
    let out: Vec<Sample> = (0..n_out).map(|j| f.output_at(x.samples(), j)).collect();
    Ok(SampleStream::from_parts(
        out,
        x.rate(),
        output_origin(x, f, mode),
    ))
}

/// `decimate(fir_filter(x, f, mode), factor, phase)` without computing the
/// discarded outputs. Bit-identical to the two-step form.
pub fn fir_filter_decimated(
    x: &SampleStream,
    f: &FirFilter,
    mode: FilterMode,
    factor: usize,
    phase: usize,
) -> Result<SampleStream> {
    if x.is_empty() {
        return Err(Error::Empty("fir_filter input"));
    }
    if factor == 0 {
        return Err(Error::param("decimation factor must be positive"));
    }
    let n_out = x.len() + f.len() - 1;
    let out: Vec<Sample> = (phase..n_out)
        .step_by(factor)
        .map(|j| f.output_at(x.samples(), j))
        .collect();
    let origin = output_origin(x, f, mode) + phase as f64 / x.rate();
    Ok(SampleStream::from_parts(
        out,
        x.rate() / factor as f64,
        origin,
    ))
}

fn output_origin(x: &SampleStream, f: &FirFilter, mode: FilterMode) -> f64 {
    match mode {
        FilterMode::Full => x.origin(),
        FilterMode::Centered => x.origin() - f.group_delay() / x.rate(),
    }
}

/// Zero-stuffing interpolation: `factor - 1` zeros after every sample.
pub fn upsample(x: &SampleStream, factor: usize) -> Result<SampleStream> {
    if factor == 0 {
        return Err(Error::param("upsampling factor must be positive"));
    }
    let mut out = vec![Sample::new(0.0, 0.0); x.len() * factor];
    for (i, s) in x.samples().iter().enumerate() {
        out[i * factor] = *s;
    }
    Ok(SampleStream::from_parts(
        out,
        x.rate() * factor as f64,
        x.origin(),
    ))
}

/// Keeps every `factor`-th sample starting at `phase`.
pub fn decimate(x: &SampleStream, factor: usize, phase: usize) -> Result<SampleStream> {
    if factor == 0 {
        return Err(Error::param("decimation factor must be positive"));
    }
    let out: Vec<Sample> = x
        .samples()
        .iter()
        .skip(phase)
        .step_by(factor)
        .copied()
        .collect();
    Ok(SampleStream::from_parts(
        out,
        x.rate() / factor as f64,
        x.time_of(phase),
    ))
}

/// Modified Bessel function of the first kind, order zero.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let y = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser window value at offset `t` from the center, for half-width `half`.
pub(crate) fn kaiser(t: f64, half: f64, beta: f64) -> f64 {
    let r = t / half;
    if r.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(beta * (1.0 - r * r).sqrt()) / bessel_i0(beta)
}

/// Kaiser parameter for a given stopband attenuation in dB.
pub(crate) fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser-windowed sinc lowpass with unit DC gain.
///
/// `cutoff` and `transition` are in cycles per sample; the tap count follows
/// the Kaiser estimate and is forced odd.
pub fn design_lowpass(cutoff: f64, transition: f64, atten_db: f64) -> Result<FirFilter> {
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::param(format!(
            "lowpass cutoff must lie in (0, 0.5), got {cutoff}"
        )));
    }
    if !(transition > 0.0) {
        return Err(Error::param("lowpass transition width must be positive"));
    }
    let beta = kaiser_beta(atten_db);
    let mut n = ((atten_db - 7.95) / (14.36 * transition)).ceil().max(3.0) as usize;
    if n.is_multiple_of(2) {
        n += 1;
    }
    let half = (n - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 - half;
            let sinc = if t == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * t).sin() / (PI * t)
            };
            sinc * kaiser(t, half + 1.0, beta)
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    FirFilter::real(taps)
}
