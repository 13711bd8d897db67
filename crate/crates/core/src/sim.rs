//! End-to-end runs: transmitter, channel, capture boundary, receiver and
//! measurement, plus sweeps and S-curve extraction over them.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carrier::{CarrierConfig, CarrierMode, Dpll};
use crate::channel::{self, ImpairmentSpec};
use crate::dsp::{self, FilterMode, Sample, SampleStream};
use crate::equalizer::{CmaEqualizer, EqualizerConfig, UpdateSignal};
use crate::error::{Error, Result};
use crate::io::{self, CaptureData, CaptureFormat, CaptureMeta};
use crate::metrics::{self, RunReport, ScurveTable, TracePoint};
use crate::modem::{self, Constellation, IfConfig, Prbs23};
use crate::sync::{TedKind, TimingLoop, TimingLoopState, DEFAULT_TED_GATE};

pub const DEFAULT_SYMBOLS: usize = 21_010;
pub const DEFAULT_SYMBOL_RATE_HZ: f64 = 5e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Transmitted symbols per frame.
    pub symbols: usize,
    /// Symbols excluded from every metric.
    pub skip: usize,
    /// Seeds the bit source; the channel seed is derived from it.
    pub seed: u64,
    pub symbol_rate_hz: f64,
    pub modulation: ModulationConfig,
    pub rrc: RrcConfig,
    pub front_end: FrontEndConfig,
    pub impairments: ImpairmentSpec,
    pub timing: TimingConfig,
    pub equalizer: EqualizerConfig,
    pub carrier: CarrierConfig,
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationConfig {
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrcConfig {
    pub rolloff: f64,
    /// Filter span in symbols.
    pub span: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontEndMode {
    /// Complex baseband at `sps` samples per symbol.
    Bb,
    /// Real IF passband at `fs_hz`, converted back to baseband.
    If,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndConfig {
    pub mode: FrontEndMode,
    /// Samples per symbol in baseband mode.
    pub sps: usize,
    pub f_if_hz: f64,
    pub fs_hz: f64,
    pub phi_bb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub ted: TedKind,
    /// Loop step; the detector's default when absent.
    pub alpha_c: Option<f64>,
    /// Symbols for which tap-domain detectors are held at zero.
    pub gate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Where the CLI writes the JSON report.
    pub report: Option<PathBuf>,
    /// Capture payload written at the receiver input.
    pub dump: Option<PathBuf>,
    /// Include a decimated loop trace in the report.
    pub trace: bool,
    pub trace_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            symbols: DEFAULT_SYMBOLS,
            skip: metrics::DEFAULT_SKIP,
            seed: 1,
            symbol_rate_hz: DEFAULT_SYMBOL_RATE_HZ,
            modulation: ModulationConfig::default(),
            rrc: RrcConfig::default(),
            front_end: FrontEndConfig::default(),
            impairments: ImpairmentSpec::default(),
            timing: TimingConfig::default(),
            equalizer: EqualizerConfig::default(),
            carrier: CarrierConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self { order: 16 }
    }
}

impl Default for RrcConfig {
    fn default() -> Self {
        Self {
            rolloff: 0.25,
            span: 16,
        }
    }
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self {
            mode: FrontEndMode::Bb,
            sps: 4,
            f_if_hz: 5e9,
            fs_hz: 160e9,
            phi_bb: 0.0,
        }
    }
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            ted: TedKind::CmaFull,
            alpha_c: None,
            gate: DEFAULT_TED_GATE,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: None,
            dump: None,
            trace: false,
            trace_every: 100,
        }
    }
}

impl TimingConfig {
    pub fn alpha_c(&self) -> f64 {
        self.alpha_c.unwrap_or_else(|| self.ted.default_alpha_c())
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_text(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Copy with the loop step made explicit.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.timing.alpha_c = Some(self.timing.alpha_c());
        c
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::qam(self.modulation.order)
    }

    /// Samples per symbol at the channel.
    pub fn channel_sps(&self) -> Result<usize> {
        match self.front_end.mode {
            FrontEndMode::Bb => Ok(self.front_end.sps),
            FrontEndMode::If => {
                let r = self.front_end.fs_hz / self.symbol_rate_hz;
                if (r - r.round()).abs() > 1e-9 || r < 2.0 {
                    return Err(Error::Config(format!(
                        "IF sample rate must be an integer multiple (>= 2) of the symbol rate, got {r}"
                    )));
                }
                Ok(r.round() as usize)
            }
        }
    }

    pub fn if_config(&self) -> IfConfig {
        IfConfig {
            f_if_hz: self.front_end.f_if_hz,
            fs_hz: self.front_end.fs_hz,
            phi_bb: self.front_end.phi_bb,
            bandwidth_hz: (1.0 + self.rrc.rolloff) * self.symbol_rate_hz,
        }
    }

    /// Capture sample rate.
    pub fn capture_rate_hz(&self) -> Result<f64> {
        Ok(self.channel_sps()? as f64 * self.symbol_rate_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Parameter(m) => Error::Config(m),
            other => other,
        };
        if self.symbols == 0 || self.skip >= self.symbols {
            return Err(Error::Config(format!(
                "need symbols > skip, got symbols={} skip={}",
                self.symbols, self.skip
            )));
        }
        if !(self.symbol_rate_hz.is_finite() && self.symbol_rate_hz > 0.0) {
            return Err(Error::Config("symbol_rate_hz must be > 0".into()));
        }
        self.constellation().map_err(cfg_err)?;
        if !(0.0..=1.0).contains(&self.rrc.rolloff) || self.rrc.span == 0 {
            return Err(Error::Config(
                "rrc needs rolloff in [0, 1] and span >= 1".into(),
            ));
        }
        let sps = self.channel_sps()?;
        if sps < 2 || sps % 2 != 0 {
            return Err(Error::Config(format!(
                "samples per symbol must be even and >= 2, got {sps}"
            )));
        }
        if self.front_end.mode == FrontEndMode::If {
            self.if_config().validate().map_err(cfg_err)?;
        }
        self.impairments.validate().map_err(cfg_err)?;
        self.equalizer.validate().map_err(cfg_err)?;
        self.carrier.validate().map_err(cfg_err)?;
        let a = self.timing.alpha_c();
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Config(format!("alpha_c must be >= 0, got {a}")));
        }
        if self.outputs.trace && self.outputs.trace_every == 0 {
            return Err(Error::Config("trace_every must be positive".into()));
        }
        Ok(())
    }

    fn channel_seed(&self) -> u64 {
        self.seed
            .wrapping_mul(0xD129_0BD5_5C4F_3A1B)
            .wrapping_add(self.impairments.seed.rotate_left(29))
            ^ 0x5EED
    }
}

/// Transmitted labels and the shaped baseband at the channel rate.
pub fn transmit(cfg: &RunConfig) -> Result<(Vec<usize>, SampleStream)> {
    let c = cfg.constellation()?;
    let sps = cfg.channel_sps()?;
    let bits = Prbs23::new(cfg.seed).bits(cfg.symbols * c.bits_per_symbol());
    let labels = labels_from_bits(&bits, c.bits_per_symbol());
    let syms = modem::map_bits(&bits, &c)?;
    let g = dsp::design_rrc(cfg.rrc.rolloff, cfg.rrc.span, sps)?;
    Ok((labels, modem::shape_pulse(&syms, &g, sps)?))
}

fn labels_from_bits(bits: &[u8], k: usize) -> Vec<usize> {
    bits.chunks(k)
        .map(|w| w.iter().fold(0usize, |a, &b| (a << 1) | b as usize))
        .collect()
}

/// What crosses the capture boundary, plus the simulator's ground truth.
#[derive(Debug, Clone)]
pub struct Capture {
    pub data: CaptureData,
    pub meta: CaptureMeta,
    /// Carrier phase applied by the channel, per channel sample.
    pub phase: Vec<f64>,
}

/// Transmitter and channel up to the `f32` capture boundary.
pub fn simulate_capture(cfg: &RunConfig) -> Result<(Vec<usize>, Capture)> {
    cfg.validate()?;
    let (labels, tx) = transmit(cfg)?;
    let mut spec = cfg.impairments.clone();
    spec.seed = cfg.channel_seed();
    let ch = channel::apply(&tx, &spec, cfg.symbol_rate_hz)?;
    let rate = cfg.capture_rate_hz()?;
    let (data, center) = match cfg.front_end.mode {
        FrontEndMode::Bb => (
            CaptureData::Complex(io::quantize_f32(ch.stream.samples())),
            0.0,
        ),
        FrontEndMode::If => {
            let pb = modem::if_upconvert(&ch.stream, &cfg.if_config())?;
            (
                CaptureData::Real(io::quantize_f32_real(&pb)),
                cfg.front_end.f_if_hz,
            )
        }
    };
    let mut meta = CaptureMeta::new(rate, center, data.format());
    meta.description = format!(
        "simulated {}-QAM frame, seed {}",
        cfg.modulation.order, cfg.seed
    );
    meta.origin_symbols = Some(ch.stream.origin());
    Ok((
        labels,
        Capture {
            data,
            meta,
            phase: ch.phase,
        },
    ))
}

/// Matched filter and decimation to two samples per symbol, sliced so the
/// first sample sits at symbol time 0.
pub fn front_end(data: &CaptureData, origin: f64, cfg: &RunConfig) -> Result<SampleStream> {
    let sps = cfg.channel_sps()?;
    let bb = match data {
        CaptureData::Complex(v) => SampleStream::with_origin(v.clone(), sps as f64, origin)?,
        CaptureData::Real(v) => modem::if_downconvert(v, &cfg.if_config(), sps as f64, origin)?,
    };
    if bb.is_empty() {
        return Err(Error::Empty("capture payload"));
    }
    let g = dsp::design_rrc(cfg.rrc.rolloff, cfg.rrc.span, sps)?;
    let factor = sps / 2;
    let o = bb.origin() - g.group_delay() / sps as f64;
    let q = 2.0 * o;
    let phase = ((q.ceil() - q) / 2.0 * sps as f64).round() as usize;
    let rx = dsp::fir_filter_decimated(&bb, &g, FilterMode::Centered, factor, phase)?;
    let start = -2.0 * rx.origin();
    if (start - start.round()).abs() > 1e-6 || start < 0.0 {
        return Err(Error::Config(format!(
            "capture origin {origin} does not place a sample on the half-symbol grid at time 0"
        )));
    }
    let start = start.round() as usize;
    let end = (start + 2 * cfg.symbols + 2).min(rx.len());
    if start >= end {
        return Err(Error::Empty("received frame"));
    }
    Ok(rx.slice(start, end))
}

/// Channel phase as a function of symbol time, for oracle de-rotation.
struct PhaseOracle<'a> {
    phase: &'a [f64],
    origin: f64,
    rate: f64,
    offset: f64,
}

impl PhaseOracle<'_> {
    fn at(&self, t: f64) -> f64 {
        if self.phase.is_empty() {
            return self.offset;
        }
        let i = ((t - self.origin) * self.rate).round().max(0.0) as usize;
        self.phase[i.min(self.phase.len() - 1)] + self.offset
    }
}

/// Per-symbol receiver output.
#[derive(Debug)]
pub struct ReceiverOutput {
    /// Equalized, phase-corrected symbols.
    pub y: Vec<Sample>,
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    /// Residual ISI of the taps after each symbol.
    pub isi: Vec<f64>,
    pub theta: Vec<f64>,
    pub taps: Vec<Sample>,
    pub timing: TimingLoopState,
    /// Set when the equalizer diverged; the vectors stop there.
    pub failure: Option<Error>,
}

/// Timing loop, equalizer and carrier loop over a two-sample-per-symbol stream.
pub fn run_receiver(
    rx: &SampleStream,
    cfg: &RunConfig,
    c: &Constellation,
) -> Result<ReceiverOutput> {
    receive(rx, cfg, c, None)
}

fn receive(
    rx: &SampleStream,
    cfg: &RunConfig,
    c: &Constellation,
    oracle: Option<&PhaseOracle<'_>>,
) -> Result<ReceiverOutput> {
    if cfg.carrier.mode == CarrierMode::Oracle && oracle.is_none() {
        return Err(Error::Config(
            "oracle carrier mode needs the simulated phase trajectory".into(),
        ));
    }
    let mut tl = TimingLoop::new(cfg.timing.ted, cfg.timing.alpha_c(), cfg.timing.gate);
    let mut eq = CmaEqualizer::new(&cfg.equalizer, c.dispersion_constant())?;
    let mut pll = Dpll::new(&cfg.carrier, c)?;
    let center = eq.center();
    let n_max = cfg.symbols;
    let mut out = ReceiverOutput {
        y: Vec::with_capacity(n_max),
        eps: Vec::with_capacity(n_max),
        mu: Vec::with_capacity(n_max),
        isi: Vec::with_capacity(n_max),
        theta: Vec::with_capacity(n_max),
        taps: Vec::new(),
        timing: *tl.state(),
        failure: None,
    };
    let mut positions = Vec::with_capacity(n_max);
    while out.y.len() < n_max {
        let Some(s) = tl.step(rx.samples(), Some(eq.taps()))? else {
            break;
        };
        let n = out.y.len();
        positions.push(s.position);
        let x = eq.filter(s.strobe);
        let (y, theta) = match cfg.carrier.mode {
            CarrierMode::Pll => {
                let th = pll.phase();
                (pll.step(x), th)
            }
            CarrierMode::Oracle => {
                let p = positions[n.saturating_sub(center)];
                let th = oracle
                    .expect("checked above")
                    .at(rx.origin() + p / rx.rate());
                (x * Sample::from_polar(1.0, -th), th)
            }
            CarrierMode::Off => (x, 0.0),
        };
        let update = match cfg.equalizer.update {
            UpdateSignal::Corrected => eq.update(y, n),
            UpdateSignal::Output => eq.update(x, n),
        };
        out.y.push(y);
        out.eps.push(s.eps);
        out.mu.push(tl.state().mu);
        out.theta.push(theta);
        out.isi
            .push(metrics::residual_isi(eq.taps()).unwrap_or(1.0));
        if let Err(e) = update {
            out.failure = Some(e);
            break;
        }
    }
    out.taps = eq.taps().to_vec();
    out.timing = *tl.state();
    Ok(out)
}

/// Receiver and metrics over a capture, given the transmitted labels.
fn analyze_capture(
    labels: &[usize],
    data: &CaptureData,
    origin: f64,
    cfg: &RunConfig,
    phase: Option<&[f64]>,
) -> Result<RunReport> {
    let cfg = cfg.resolved();
    let c = cfg.constellation()?;
    let rx = front_end(data, origin, &cfg)?;
    let oracle = phase.map(|p| PhaseOracle {
        phase: p,
        origin,
        rate: cfg.channel_sps().map(|s| s as f64).unwrap_or(1.0),
        offset: match cfg.front_end.mode {
            FrontEndMode::Bb => 0.0,
            FrontEndMode::If => cfg.front_end.phi_bb,
        },
    });
    let r = receive(&rx, &cfg, &c, oracle.as_ref())?;
    Ok(build_report(labels, &r, &cfg, &c))
}

fn build_report(
    labels: &[usize],
    r: &ReceiverOutput,
    cfg: &RunConfig,
    c: &Constellation,
) -> RunReport {
    let decided: Vec<usize> = r.y.iter().map(|&v| c.decide(v)).collect();
    let mut status = "ok".to_string();
    let mut error = r.failure.as_ref().map(|e| e.to_string());
    if r.failure.is_some() {
        status = "diverged".into();
    }
    let align = metrics::align_labels(labels, &decided, c, cfg.skip).ok();
    if let Some(a) = &align {
        if !a.locked() && r.failure.is_none() {
            status = "loss-of-lock".into();
            error = Some(
                Error::LossOfLock(format!(
                    "symbol agreement fell to {:.1}%",
                    100.0 * a.min_agreement
                ))
                .to_string(),
            );
        }
    } else if r.failure.is_none() {
        status = "loss-of-lock".into();
        error =
            Some(Error::LossOfLock("receiver produced no post-skip symbols".into()).to_string());
    }
    let evm = metrics::evm(&r.y, c, cfg.skip).ok();
    let trace = cfg.outputs.trace.then(|| {
        (0..r.y.len())
            .step_by(cfg.outputs.trace_every)
            .map(|n| TracePoint {
                symbol: n,
                mu: r.mu[n],
                eps: r.eps[n],
                theta: r.theta[n],
                residual_isi: r.isi[n],
            })
            .collect()
    });
    RunReport {
        status,
        error,
        ted: cfg.timing.ted,
        ber: align.as_ref().map(|a| a.ber()),
        bit_errors: align.as_ref().map_or(0, |a| a.bit_errors),
        bits_measured: align.as_ref().map_or(0, |a| a.bits),
        evm_percent: evm,
        residual_isi: metrics::residual_isi(&r.taps).ok(),
        symbols_measured: align.as_ref().map_or(0, |a| a.symbols),
        symbols_total: r.y.len(),
        convergence_symbol: metrics::convergence_symbol(&r.isi, metrics::CONVERGENCE_WINDOW),
        ops: metrics::op_count(cfg.timing.ted, cfg.equalizer.taps),
        ambiguity: align.as_ref().map(|a| a.ambiguity),
        lag: align.as_ref().map(|a| a.final_lag),
        nco_skips: r.timing.skips,
        nco_stalls: r.timing.stalls,
        final_mu: r.timing.mu,
        final_taps: r.taps.iter().map(|t| [t.re, t.im]).collect(),
        trace,
        config: cfg.clone(),
    }
}

/// Full simulated run. Writes the capture when `outputs.dump` is set.
///
/// Equalizer divergence and loss of lock are reported through
/// `RunReport::status`, not as errors.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunReport> {
    let (labels, cap) = simulate_capture(cfg)?;
    if let Some(path) = &cfg.outputs.dump {
        io::write_capture(&cap.data, &cap.meta, path)?;
    }
    let origin = cap.meta.origin_symbols.unwrap_or(0.0);
    analyze_capture(&labels, &cap.data, origin, cfg, Some(&cap.phase))
}

/// Runs the receiver on a capture file. The transmitted reference is
/// regenerated from `cfg.seed`.
pub fn cmd_analyze(path: &Path, cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.carrier.mode == CarrierMode::Oracle {
        return Err(Error::Config(
            "oracle carrier mode is unavailable for recorded captures".into(),
        ));
    }
    let (data, meta) = io::read_capture(path)?;
    let expected_format = match cfg.front_end.mode {
        FrontEndMode::Bb => CaptureFormat::Complex,
        FrontEndMode::If => CaptureFormat::Real,
    };
    if meta.format != expected_format {
        return Err(Error::Config(format!(
            "capture holds {:?} samples but the front end expects {:?}",
            meta.format, expected_format
        )));
    }
    let expected = cfg.capture_rate_hz()?;
    if (meta.sample_rate_hz - expected).abs() > 1e-9 * expected {
        return Err(Error::RateMismatch {
            capture: meta.sample_rate_hz,
            expected,
        });
    }
    if expected_format == CaptureFormat::Real
        && (meta.center_freq_hz - cfg.front_end.f_if_hz).abs() > 1e-9 * cfg.front_end.f_if_hz
    {
        return Err(Error::Config(format!(
            "capture IF {} Hz differs from configured {} Hz",
            meta.center_freq_hz, cfg.front_end.f_if_hz
        )));
    }
    let c = cfg.constellation()?;
    let bits = Prbs23::new(cfg.seed).bits(cfg.symbols * c.bits_per_symbol());
    let labels = labels_from_bits(&bits, c.bits_per_symbol());
    let origin = meta.origin_symbols.unwrap_or(-(cfg.rrc.span as f64) / 2.0);
    analyze_capture(&labels, &data, origin, cfg, None)
}

/// Per-symbol detector output with the loop open (`alpha_c = 0`) at a static offset.
pub fn open_loop_ted_output(cfg: &RunConfig, ted: TedKind, tau: f64) -> Result<Vec<f64>> {
    let mut c = cfg.clone();
    c.timing.ted = ted;
    c.timing.alpha_c = Some(0.0);
    c.impairments.tau0 = tau;
    let (_, cap) = simulate_capture(&c)?;
    let k = c.constellation()?;
    let rx = front_end(&cap.data, cap.meta.origin_symbols.unwrap_or(0.0), &c)?;
    let oracle = PhaseOracle {
        phase: &cap.phase,
        origin: cap.meta.origin_symbols.unwrap_or(0.0),
        rate: c.channel_sps()? as f64,
        offset: 0.0,
    };
    let r = receive(&rx, &c, &k, Some(&oracle))?;
    if let Some(e) = r.failure {
        return Err(e);
    }
    Ok(r.eps)
}

pub fn cmd_scurve(cfg: &RunConfig, ted: TedKind, tau_grid: &[f64]) -> Result<ScurveTable> {
    cfg.validate()?;
    metrics::scurve(ted, tau_grid, cfg)
}

/// Evenly spaced grid from `start` to `stop` inclusive.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Config(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    Ted(Vec<TedKind>),
    SnrDb(Vec<f64>),
    Tau(Vec<f64>),
    Ppm(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Ted(_) => "ted",
            SweepAxis::SnrDb(_) => "snr_db",
            SweepAxis::Tau(_) => "tau0",
            SweepAxis::Ppm(_) => "clock_ppm",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Ted(v) => v.len(),
            SweepAxis::SnrDb(v) | SweepAxis::Tau(v) | SweepAxis::Ppm(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses `ted=all`, `ted=gardner,cma-full`, `snr=10,20` or `tau=-0.4:0.4:0.05`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, values) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep axis '{s}' is not name=values")))?;
        let nums = || -> Result<Vec<f64>> {
            if values.trim().is_empty() {
                return Ok(Vec::new());
            }
            let parts: Vec<&str> = values.split(':').collect();
            if parts.len() == 3 {
                let p = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number '{x}': {e}")))
                };
                return grid(p(parts[0])?, p(parts[1])?, p(parts[2])?);
            }
            values
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number '{x}': {e}")))
                })
                .collect()
        };
        let axis = match name.trim() {
            "ted" => {
                if values.trim() == "all" {
                    Ok(SweepAxis::Ted(TedKind::ALL.to_vec()))
                } else {
                    values
                        .split(',')
                        .filter(|v| !v.trim().is_empty())
                        .map(|v| {
                            v.trim()
                                .parse::<TedKind>()
                                .map_err(|e| Error::Config(e.to_string()))
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(SweepAxis::Ted)
                }
            }
            "snr" | "snr_db" => nums().map(SweepAxis::SnrDb),
            "tau" | "tau0" => nums().map(SweepAxis::Tau),
            "ppm" | "clock_ppm" => nums().map(SweepAxis::Ppm),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }?;
        if axis.is_empty() {
            return Err(Error::Config(format!("sweep axis '{s}' has no values")));
        }
        Ok(axis)
    }

    fn point(&self, base: &RunConfig, i: usize) -> (RunConfig, String) {
        let mut c = base.clone();
        let label = match self {
            SweepAxis::Ted(v) => {
                c.timing.ted = v[i];
                v[i].to_string()
            }
            SweepAxis::SnrDb(v) => {
                c.impairments.snr_db = Some(v[i]);
                v[i].to_string()
            }
            SweepAxis::Tau(v) => {
                c.impairments.tau0 = v[i];
                v[i].to_string()
            }
            SweepAxis::Ppm(v) => {
                c.impairments.clock_ppm = v[i];
                v[i].to_string()
            }
        };
        (c, label)
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis: String,
    pub value: String,
    pub ted: String,
    pub ber: Option<f64>,
    pub evm: Option<f64>,
    pub residual_isi: Option<f64>,
    pub convergence_symbol: Option<usize>,
    pub nco_skips: Option<usize>,
    pub nco_stalls: Option<usize>,
    pub status: String,
}

/// Runs every sweep point; results are in axis order whatever the
/// execution order.
pub fn sweep_reports(
    base: &RunConfig,
    axis: &SweepAxis,
    parallel: bool,
) -> Result<Vec<Result<RunReport>>> {
    if axis.is_empty() {
        return Err(Error::Config("empty sweep axis".into()));
    }
    let run = |i: usize| cmd_simulate(&axis.point(base, i).0);
    Ok(if parallel {
        (0..axis.len()).into_par_iter().map(run).collect()
    } else {
        (0..axis.len()).map(run).collect()
    })
}

pub fn cmd_sweep(base: &RunConfig, axis: &SweepAxis) -> Result<Vec<SweepRow>> {
    let reports = sweep_reports(base, axis, true)?;
    Ok(reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let (c, value) = axis.point(base, i);
            match r {
                Ok(r) => SweepRow {
                    index: i,
                    axis: axis.name().into(),
                    value,
                    ted: r.ted.to_string(),
                    ber: r.ber,
                    evm: r.evm_percent,
                    residual_isi: r.residual_isi,
                    convergence_symbol: Some(r.convergence_symbol),
                    nco_skips: Some(r.nco_skips),
                    nco_stalls: Some(r.nco_stalls),
                    status: r.status,
                },
                Err(e) => SweepRow {
                    index: i,
                    axis: axis.name().into(),
                    value,
                    ted: c.timing.ted.to_string(),
                    ber: None,
                    evm: None,
                    residual_isi: None,
                    convergence_symbol: None,
                    nco_skips: None,
                    nco_stalls: None,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect())
}
