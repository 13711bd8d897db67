//! Clock recovery: cubic Farrow interpolator, first-order NCO loop and the
//! timing error detectors.
//!
//! The loop consumes a stream at two samples per symbol. For symbol `n` it
//! interpolates the Baud-spaced strobe at input position `base_index + mu`
//! and, for detectors that need it, the half-symbol sample one input sample
//! earlier. After the detector runs, `mu` moves by `alpha_c * eps`; a wrap
//! past 1 skips an input sample, a wrap below 0 stalls one. A positive
//! detector output therefore moves the sampling instant later.

use serde::{Deserialize, Serialize};

use crate::dsp::Sample;
use crate::error::{Error, Result};

/// CMA-family detector output is held at zero for this many symbols while
/// the equalizer taps form.
pub const DEFAULT_TED_GATE: usize = 500;

/// Loop step for detectors that read equalizer taps.
pub const ALPHA_C_CMA: f64 = 1.3e-4;
/// Loop step for detectors that read interpolated samples.
pub const ALPHA_C_SAMPLE: f64 = 1e-2;

/// The seven timing error detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TedKind {
    /// Negated real sum of the off-center equalizer taps.
    CmaFull,
    /// As `CmaFull` plus the imaginary parts.
    CmaComplex,
    /// Negated real sum of the two taps adjacent to the center.
    CmaModified,
    Gardner,
    Abs,
    SignMm,
    ModifiedAbs,
}

/// Real multiplications and additions per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub multiplications: usize,
    pub additions: usize,
}

impl TedKind {
    pub const ALL: [TedKind; 7] = [
        TedKind::CmaFull,
        TedKind::CmaComplex,
        TedKind::CmaModified,
        TedKind::Gardner,
        TedKind::Abs,
        TedKind::SignMm,
        TedKind::ModifiedAbs,
    ];

    /// True when the detector reads equalizer taps rather than samples.
    pub fn uses_taps(self) -> bool {
        matches!(
            self,
            TedKind::CmaFull | TedKind::CmaComplex | TedKind::CmaModified
        )
    }

    /// True when the detector needs the half-symbol sample.
    pub fn uses_mid_sample(self) -> bool {
        matches!(self, TedKind::Gardner | TedKind::Abs | TedKind::ModifiedAbs)
    }

    pub fn default_alpha_c(self) -> f64 {
        if self.uses_taps() {
            ALPHA_C_CMA
        } else {
            ALPHA_C_SAMPLE
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TedKind::CmaFull => "cma-full",
            TedKind::CmaComplex => "cma-complex",
            TedKind::CmaModified => "cma-modified",
            TedKind::Gardner => "gardner",
            TedKind::Abs => "abs",
            TedKind::SignMm => "sign-mm",
            TedKind::ModifiedAbs => "modified-abs",
        }
    }

    pub fn parse(s: &str) -> Option<TedKind> {
        TedKind::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Per-symbol operation count for an equalizer of length `p`.
    ///
    /// The CMA-complex detector sums `2(p - 1)` terms.
    pub fn op_count(self, p: usize) -> OpCount {
        let (multiplications, additions) = match self {
            TedKind::Gardner => (2, 3),
            TedKind::Abs => (1, 2),
            TedKind::SignMm => (2, 1),
            TedKind::ModifiedAbs => (2, 1),
            TedKind::CmaFull => (0, p.saturating_sub(2)),
            TedKind::CmaModified => (0, 1),
            TedKind::CmaComplex => (0, (2 * p).saturating_sub(3)),
        };
        OpCount {
            multiplications,
            additions,
        }
    }
}

impl std::fmt::Display for TedKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TedKind::parse(s).ok_or_else(|| Error::param(format!("unknown TED '{s}'")))
    }
}

/// Cubic Lagrange interpolation in Farrow form.
///
/// `history` holds `x[-1], x[0], x[1], x[2]`; the result approximates the
/// signal at `x[0] + mu` input samples.
pub fn farrow_interp(history: &[Sample; 4], mu: f64) -> Sample {
    assert!(
        (0.0..1.0).contains(&mu),
        "fractional delay {mu} outside [0, 1)"
    );
    let [xm1, x0, x1, x2] = *history;
    let c1 = -xm1 / 3.0 - x0 / 2.0 + x1 - x2 / 6.0;
    let c2 = (xm1 + x1) / 2.0 - x0;
    let c3 = (x2 - xm1) / 6.0 + (x0 - x1) / 2.0;
    ((c3 * mu + c2) * mu + c1) * mu + x0
}

/// State of the first-order timing loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingLoopState {
    /// Fractional delay in input-sample units, `[0, 1)`.
    pub mu: f64,
    /// Input index of the sample just before the current strobe.
    pub base_index: i64,
    pub alpha_c: f64,
    /// Last detector output.
    pub eps_prev: f64,
    /// Symbols emitted so far.
    pub symbols: usize,
    /// Wraps of `mu` past 1 (one input sample skipped each).
    pub skips: usize,
    /// Wraps of `mu` below 0 (one input sample repeated each).
    pub stalls: usize,
    /// CMA-family detector output is zero while `symbols < gate`.
    pub gate: usize,
    last_strobe: Sample,
}

impl TimingLoopState {
    pub fn new(alpha_c: f64) -> Self {
        Self {
            mu: 0.0,
            base_index: 0,
            alpha_c,
            eps_prev: 0.0,
            symbols: 0,
            skips: 0,
            stalls: 0,
            gate: DEFAULT_TED_GATE,
            last_strobe: Sample::new(0.0, 0.0),
        }
    }

    pub fn with_gate(mut self, gate: usize) -> Self {
        self.gate = gate;
        self
    }

    /// Fractional input position of the next strobe.
    pub fn position(&self) -> f64 {
        self.base_index as f64 + self.mu
    }

    /// Net input samples skipped minus stalled.
    pub fn net_wraps(&self) -> i64 {
        self.skips as i64 - self.stalls as i64
    }
}

/// Applies `mu <- mu + alpha_c * eps`, normalizes `mu` into `[0, 1)` with
/// skips/stalls, and advances `base_index` by one symbol (two input samples).
pub fn loop_filter_update(state: TimingLoopState, eps: f64) -> TimingLoopState {
    let mut s = state;
    s.eps_prev = eps;
    let mu = s.mu + s.alpha_c * eps;
    let wraps = mu.floor();
    let mut mu = mu - wraps;
    // mu - floor(mu) can round up to exactly 1.0 for tiny negative inputs.
    let mut wraps = wraps as i64;
    if mu >= 1.0 {
        mu = 0.0;
        wraps += 1;
    }
    s.mu = mu;
    if wraps > 0 {
        s.skips += wraps as usize;
    } else {
        s.stalls += (-wraps) as usize;
    }
    s.base_index += 2 + wraps;
    s
}

/// Full tap detector: `-sum_{k != center} Re w_k`.
pub fn ted_cma_full(w: &[Sample]) -> Result<f64> {
    let c = center_index(w, 1)?;
    Ok(-w
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != c)
        .map(|(_, t)| t.re)
        .sum::<f64>())
}

/// `-(sum_{k != center} Re w_k + sum_{k != center} Im w_k)`.
pub fn ted_cma_complex(w: &[Sample]) -> Result<f64> {
    let c = center_index(w, 1)?;
    let (re, im) = w
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != c)
        .fold((0.0, 0.0), |(a, b), (_, t)| (a + t.re, b + t.im));
    Ok(-(re + im))
}

/// `-(Re w_{center-1} + Re w_{center+1})`.
pub fn ted_cma_modified(w: &[Sample]) -> Result<f64> {
    let c = center_index(w, 3)?;
    Ok(-(w[c - 1].re + w[c + 1].re))
}

fn center_index(w: &[Sample], min_len: usize) -> Result<usize> {
    if w.len().is_multiple_of(2) || w.len() < min_len {
        return Err(Error::param(format!(
            "tap vector needs odd length >= {min_len}, got {}",
            w.len()
        )));
    }
    Ok(w.len() / 2)
}

/// Gardner: `Re{(y_prev - y_curr) conj(y_mid)}`.
pub fn ted_gardner(y_prev: Sample, y_mid: Sample, y_curr: Sample) -> f64 {
    ((y_prev - y_curr) * y_mid.conj()).re
}

/// Signed Mueller & Muller, both arms:
/// `sgn(a[n-1]) a[n] - sgn(a[n]) a[n-1]` for `a` in {Re, Im}.
pub fn ted_sign_mm(y_prev: Sample, y_curr: Sample) -> f64 {
    let arm = |p: f64, c: f64| sgn(p) * c - sgn(c) * p;
    arm(y_prev.re, y_curr.re) + arm(y_prev.im, y_curr.im)
}

/// Magnitude early/late detector: `|y_mid| (|y_curr| - |y_prev|)` with the
/// L1 magnitude `|Re| + |Im|`.
pub fn ted_abs(y_prev: Sample, y_mid: Sample, y_curr: Sample) -> f64 {
    let l1 = |y: Sample| y.re.abs() + y.im.abs();
    l1(y_mid) * (l1(y_curr) - l1(y_prev))
}

/// Hard-decision Gardner: `sum_arms (sgn(a_prev) - sgn(a_curr)) a_mid`.
pub fn ted_modified_abs(y_prev: Sample, y_mid: Sample, y_curr: Sample) -> f64 {
    (sgn(y_prev.re) - sgn(y_curr.re)) * y_mid.re + (sgn(y_prev.im) - sgn(y_curr.im)) * y_mid.im
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Samples available to sample-domain detectors for one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TedSamples {
    pub prev: Sample,
    pub mid: Sample,
    pub curr: Sample,
}

/// Dispatches a sample-domain detector.
pub fn ted_baseline(kind: TedKind, s: &TedSamples) -> Result<f64> {
    match kind {
        TedKind::Gardner => Ok(ted_gardner(s.prev, s.mid, s.curr)),
        TedKind::Abs => Ok(ted_abs(s.prev, s.mid, s.curr)),
        TedKind::SignMm => Ok(ted_sign_mm(s.prev, s.curr)),
        TedKind::ModifiedAbs => Ok(ted_modified_abs(s.prev, s.mid, s.curr)),
        k => Err(Error::param(format!(
            "{k} reads equalizer taps, not samples"
        ))),
    }
}

/// Dispatches a tap-domain detector.
pub fn ted_from_taps(kind: TedKind, w: &[Sample]) -> Result<f64> {
    match kind {
        TedKind::CmaFull => ted_cma_full(w),
        TedKind::CmaComplex => ted_cma_complex(w),
        TedKind::CmaModified => ted_cma_modified(w),
        k => Err(Error::param(format!(
            "{k} reads samples, not equalizer taps"
        ))),
    }
}

/// One Baud-spaced output of the timing loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolOut {
    pub strobe: Sample,
    pub mid: Sample,
    /// Detector output computed for this symbol.
    pub eps: f64,
    /// Fractional input position the strobe was taken at.
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SyncStep {
    Symbol {
        out: SymbolOut,
        state: TimingLoopState,
    },
    /// The Farrow history for the next strobe is not yet buffered.
    NeedMoreInput,
}

fn history(input: &[Sample], base: i64) -> [Sample; 4] {
    let at = |i: i64| {
        if i < 0 {
            Sample::new(0.0, 0.0)
        } else {
            input[i as usize]
        }
    };
    [at(base - 1), at(base), at(base + 1), at(base + 2)]
}

/// Produces one symbol from a two-samples-per-symbol `input` and advances the loop.
///
/// Indices before the start of `input` read as zero. Tap-domain detectors
/// read `eq_taps` (the equalizer taps in force for this symbol).
pub fn sync_step(
    input: &[Sample],
    state: &TimingLoopState,
    ted: TedKind,
    eq_taps: Option<&[Sample]>,
) -> Result<SyncStep> {
    let base = state.base_index;
    if base + 2 >= input.len() as i64 {
        return Ok(SyncStep::NeedMoreInput);
    }
    let strobe = farrow_interp(&history(input, base), state.mu);
    let mid = farrow_interp(&history(input, base - 1), state.mu);
    let eps = if ted.uses_taps() {
        let taps =
            eq_taps.ok_or_else(|| Error::param(format!("{ted} needs the equalizer taps")))?;
        if state.symbols < state.gate {
            0.0
        } else {
            ted_from_taps(ted, taps)?
        }
    } else {
        ted_baseline(
            ted,
            &TedSamples {
                prev: state.last_strobe,
                mid,
                curr: strobe,
            },
        )?
    };
    let out = SymbolOut {
        strobe,
        mid,
        eps,
        position: state.position(),
    };
    let mut next = loop_filter_update(*state, eps);
    next.symbols += 1;
    next.last_strobe = strobe;
    Ok(SyncStep::Symbol { out, state: next })
}

/// Owning wrapper around [`sync_step`].
#[derive(Debug, Clone)]
pub struct TimingLoop {
    state: TimingLoopState,
    ted: TedKind,
}

impl TimingLoop {
    pub fn new(ted: TedKind, alpha_c: f64, gate: usize) -> Self {
        Self {
            state: TimingLoopState::new(alpha_c).with_gate(gate),
            ted,
        }
    }

    pub fn state(&self) -> &TimingLoopState {
        &self.state
    }

    pub fn ted(&self) -> TedKind {
        self.ted
    }

    /// Next symbol, or `None` when `input` is exhausted.
    pub fn step(
        &mut self,
        input: &[Sample],
        eq_taps: Option<&[Sample]>,
    ) -> Result<Option<SymbolOut>> {
        match sync_step(input, &self.state, self.ted, eq_taps)? {
            SyncStep::Symbol { out, state } => {
                self.state = state;
                Ok(Some(out))
            }
            SyncStep::NeedMoreInput => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Sample {
        Sample::new(re, im)
    }

    fn poly_history(coef: [f64; 4], t0: f64) -> ([Sample; 4], impl Fn(f64) -> f64) {
        let p = move |t: f64| coef[0] + coef[1] * t + coef[2] * t * t + coef[3] * t * t * t;
        let h = [
            c(p(t0 - 1.0), 0.0),
            c(p(t0), 0.0),
            c(p(t0 + 1.0), 0.0),
            c(p(t0 + 2.0), 0.0),
        ];
        (h, p)
    }

    #[test]
    fn farrow_node_is_exact() {
        let h = [c(0.3, -1.0), c(1.7, 0.2), c(-0.4, 0.9), c(2.0, 2.0)];
        assert_eq!(farrow_interp(&h, 0.0), h[1]);
    }

    #[test]
    fn farrow_reproduces_ramp() {
        let (h, p) = poly_history([0.5, 2.0, 0.0, 0.0], 3.0);
        for i in 0..100 {
            let mu = i as f64 / 100.0;
            assert!((farrow_interp(&h, mu).re - p(3.0 + mu)).abs() < 1e-12);
        }
    }

    #[test]
    fn farrow_reproduces_cubic() {
        // Oracle: direct evaluation of t^3.
        let (h, p) = poly_history([0.0, 0.0, 0.0, 1.0], 2.0);
        let mu = 0.37;
        let want = p(2.0 + mu);
        assert!(((farrow_interp(&h, mu).re - want) / want).abs() < 1e-9);
    }

    #[test]
    #[should_panic]
    fn farrow_rejects_mu_out_of_range() {
        farrow_interp(&[c(0.0, 0.0); 4], 1.0);
    }

    #[test]
    fn loop_update_examples() {
        let mut s = TimingLoopState::new(0.01);
        s = loop_filter_update(s, 0.5);
        assert!((s.mu - 0.005).abs() < 1e-15);
        assert_eq!(s.base_index, 2);

        let s0 = TimingLoopState {
            mu: 0.3,
            ..TimingLoopState::new(0.01)
        };
        let s1 = loop_filter_update(s0, 0.0);
        assert_eq!(s1.mu, 0.3);
        assert_eq!(s1.base_index, 2);
        assert_eq!((s1.skips, s1.stalls), (0, 0));

        let s0 = TimingLoopState {
            mu: 0.999,
            ..TimingLoopState::new(0.01)
        };
        let s1 = loop_filter_update(s0, 0.5);
        assert!((s1.mu - 0.004).abs() < 1e-12);
        assert_eq!(s1.base_index, 3);
        assert_eq!(s1.skips, 1);

        let s0 = TimingLoopState {
            mu: 0.002,
            ..TimingLoopState::new(0.01)
        };
        let s1 = loop_filter_update(s0, -0.5);
        assert!((s1.mu - 0.997).abs() < 1e-12);
        assert_eq!(s1.base_index, 1);
        assert_eq!(s1.stalls, 1);
    }

    #[test]
    fn cma_detector_examples() {
        let w = [c(0.1, 0.0), c(1.0, 0.0), c(-0.3, 0.0)];
        assert!((ted_cma_full(&w).unwrap() - 0.2).abs() < 1e-15);
        let w = [c(0.1, 0.2), c(1.0, 0.0), c(-0.3, -0.2)];
        assert!((ted_cma_complex(&w).unwrap() - 0.2).abs() < 1e-15);
        let w = [
            c(0.5, 0.0),
            c(0.1, 0.0),
            c(1.0, 0.0),
            c(-0.3, 0.0),
            c(0.4, 0.0),
        ];
        assert!((ted_cma_modified(&w).unwrap() - 0.2).abs() < 1e-15);

        let mut spike = vec![c(0.0, 0.0); 21];
        spike[10] = c(1.0, 0.0);
        assert_eq!(ted_cma_full(&spike).unwrap(), 0.0);
        assert_eq!(ted_cma_complex(&spike).unwrap(), 0.0);
        assert_eq!(ted_cma_modified(&spike).unwrap(), 0.0);

        assert!(ted_cma_full(&[c(1.0, 0.0); 4]).is_err());
        assert!(ted_cma_modified(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn imaginary_perturbation_ignored_by_real_projection() {
        let mut w = vec![
            c(0.05, 0.0),
            c(-0.1, 0.0),
            c(1.0, 0.0),
            c(0.2, 0.0),
            c(0.0, 0.0),
        ];
        let before = ted_cma_full(&w).unwrap();
        w[0].im += 0.7;
        w[4].im -= 0.3;
        assert_eq!(ted_cma_full(&w).unwrap(), before);
    }

    #[test]
    fn complex_equals_full_on_real_taps() {
        let w = [
            c(0.2, 0.0),
            c(-0.1, 0.0),
            c(0.9, 0.0),
            c(0.05, 0.0),
            c(-0.3, 0.0),
        ];
        assert_eq!(ted_cma_complex(&w).unwrap(), ted_cma_full(&w).unwrap());
    }

    #[test]
    fn gardner_examples() {
        assert_eq!(ted_gardner(c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)), 0.0);
        assert!((ted_gardner(c(1.0, 0.0), c(0.2, 0.0), c(-1.0, 0.0)) - 0.4).abs() < 1e-15);
        let y = c(0.7, -0.3);
        assert_eq!(ted_gardner(y, y, y), 0.0);
    }

    #[test]
    fn sign_mm_examples() {
        let y = c(0.6, -0.2);
        assert_eq!(ted_sign_mm(y, y), 0.0);
        assert!((ted_sign_mm(c(1.0, 0.0), c(0.5, 0.0)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn baselines_vanish_on_zeros() {
        let z = c(0.0, 0.0);
        let s = TedSamples {
            prev: z,
            mid: z,
            curr: z,
        };
        for k in [
            TedKind::Gardner,
            TedKind::Abs,
            TedKind::SignMm,
            TedKind::ModifiedAbs,
        ] {
            assert_eq!(ted_baseline(k, &s).unwrap(), 0.0);
        }
        assert!(ted_baseline(TedKind::CmaFull, &s).is_err());
    }

    #[test]
    fn op_counts() {
        assert_eq!(
            TedKind::CmaFull.op_count(21),
            OpCount {
                multiplications: 0,
                additions: 19
            }
        );
        assert_eq!(
            TedKind::CmaModified.op_count(21),
            OpCount {
                multiplications: 0,
                additions: 1
            }
        );
        assert_eq!(
            TedKind::Gardner.op_count(21),
            OpCount {
                multiplications: 2,
                additions: 3
            }
        );
    }

    #[test]
    fn ted_names_round_trip() {
        for k in TedKind::ALL {
            assert_eq!(k.name().parse::<TedKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("mm".parse::<TedKind>().is_err());
    }

    fn ramp_input(n: usize) -> Vec<Sample> {
        (0..n)
            .map(|k| c((k as f64 * 0.3).sin(), (k as f64 * 0.17).cos()))
            .collect()
    }

    #[test]
    fn frozen_loop_keeps_mu() {
        let input = ramp_input(400);
        let mut state = TimingLoopState {
            mu: 0.4,
            ..TimingLoopState::new(0.0)
        };
        let mut n = 0;
        while let SyncStep::Symbol { out, state: next } =
            sync_step(&input, &state, TedKind::Gardner, None).unwrap()
        {
            assert_eq!(next.mu, 0.4);
            assert_eq!(out.position, 2.0 * n as f64 + 0.4);
            state = next;
            n += 1;
        }
        assert_eq!(state.base_index, 2 * n as i64);
        assert!(n >= 198);
    }

    #[test]
    fn underrun_is_not_an_error() {
        let input = ramp_input(2);
        assert_eq!(
            sync_step(&input, &TimingLoopState::new(0.01), TedKind::Gardner, None).unwrap(),
            SyncStep::NeedMoreInput
        );
    }

    #[test]
    fn cma_detector_is_gated_then_needs_taps() {
        let input = ramp_input(100);
        let mut w = vec![c(0.0, 0.0); 5];
        w[2] = c(1.0, 0.0);
        w[0] = c(0.5, 0.0);
        let mut lp = TimingLoop::new(TedKind::CmaFull, 0.01, 3);
        for i in 0..6 {
            let out = lp.step(&input, Some(&w)).unwrap().unwrap();
            if i < 3 {
                assert_eq!(out.eps, 0.0);
            } else {
                assert_eq!(out.eps, -0.5);
            }
        }
        assert!(lp.step(&input, None).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn farrow_exact_on_cubics(a in -3.0f64..3.0, b in -3.0f64..3.0, c2 in -3.0f64..3.0,
                                      d in -3.0f64..3.0, t0 in -5.0f64..5.0, mu in 0.0f64..1.0) {
                let (h, p) = poly_history([a, b, c2, d], t0);
                let want = p(t0 + mu);
                let got = farrow_interp(&h, mu).re;
                let scale = 1.0 + [a, b, c2, d].iter().map(|v| v.abs()).sum::<f64>() * 250.0;
                prop_assert!((got - want).abs() <= 1e-12 * scale);
            }

            #[test]
            fn nco_bookkeeping(eps in prop::collection::vec(-40.0f64..40.0, 1..400), alpha in 0.0f64..0.05) {
                let mut s = TimingLoopState::new(alpha);
                for (n, e) in eps.iter().enumerate() {
                    s = loop_filter_update(s, *e);
                    prop_assert!((0.0..1.0).contains(&s.mu));
                    let expect = 2 * (n as i64 + 1) + s.skips as i64 - s.stalls as i64;
                    prop_assert_eq!(s.base_index, expect);
                }
            }

            #[test]
            fn loop_gain_is_linear(eps in prop::collection::vec(-1.0f64..1.0, 1..50)) {
                let mut a = TimingLoopState { mu: 0.5, ..TimingLoopState::new(1e-4) };
                let mut b = TimingLoopState { mu: 0.5, ..TimingLoopState::new(2e-4) };
                for e in &eps {
                    let (ma, mb) = (a.mu, b.mu);
                    a = loop_filter_update(a, *e);
                    b = loop_filter_update(b, *e);
                    prop_assert!(((b.mu - mb) - 2.0 * (a.mu - ma)).abs() < 1e-12);
                }
            }
        }
    }
}
