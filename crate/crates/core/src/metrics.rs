//! Receiver figures of merit: bit error ratio with ambiguity resolution,
//! EVM, residual ISI of a tap vector, convergence index and TED S-curves.

use serde::{Deserialize, Serialize};

use crate::dsp::Sample;
use crate::error::{Error, Result};
use crate::modem::{Ambiguity, Constellation};
use crate::sim::RunConfig;
use crate::sync::{OpCount, TedKind};

/// Symbols skipped before any metric is accumulated.
pub const DEFAULT_SKIP: usize = 2000;
/// Window used by [`convergence_symbol`].
pub const CONVERGENCE_WINDOW: usize = 1000;
/// Block length of the sequential symbol aligner.
pub const ALIGN_BLOCK: usize = 1000;
/// Largest lag tried when acquiring the alignment.
pub const ALIGN_MAX_LAG: i64 = 64;

/// Bit error ratio between two equally long bit sequences after `skip` bits,
/// minimized over the rotation/conjugation ambiguity of `c`.
///
/// Both sequences must hold whole symbols.
pub fn ber(tx_bits: &[u8], rx_bits: &[u8], c: &Constellation, skip: usize) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::LengthMismatch {
            left: tx_bits.len(),
            right: rx_bits.len(),
        });
    }
    let k = c.bits_per_symbol();
    if !tx_bits.len().is_multiple_of(k) || !skip.is_multiple_of(k) {
        return Err(Error::param(format!(
            "bit sequences must hold whole {k}-bit symbols"
        )));
    }
    if skip >= tx_bits.len() {
        return Err(Error::Empty("post-skip bit window"));
    }
    let labels = |b: &[u8]| -> Vec<usize> {
        b.chunks(k)
            .map(|w| w.iter().fold(0usize, |acc, &v| (acc << 1) | v as usize))
            .collect()
    };
    let tx = labels(&tx_bits[skip..]);
    let rx = labels(&rx_bits[skip..]);
    let best = Ambiguity::all()
        .map(|t| {
            tx.iter()
                .zip(&rx)
                .map(|(&a, &b)| (c.transform_label(a, t) ^ b).count_ones() as usize)
                .sum::<usize>()
        })
        .min()
        .unwrap_or(0);
    Ok(best as f64 / (tx.len() * k) as f64)
}

/// Outcome of aligning received labels against the transmitted sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub bit_errors: usize,
    pub bits: usize,
    pub symbols: usize,
    /// Received index minus transmitted index at the start of the window.
    pub initial_lag: i64,
    pub final_lag: i64,
    pub ambiguity: Ambiguity,
    /// Smallest per-block symbol agreement seen.
    pub min_agreement: f64,
}

impl Alignment {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    /// True when every block agreed on more than half its symbols.
    pub fn locked(&self) -> bool {
        self.min_agreement > 0.5
    }
}

/// Aligns decided labels `rx` (from index `skip` on) with `tx`, tracking
/// symbol slips of one per block, and counts bit errors.
///
/// The lag and ambiguity are acquired on the first block by exhaustive
/// search over `|lag| <= ALIGN_MAX_LAG` and the eight ambiguities.
pub fn align_labels(
    tx: &[usize],
    rx: &[usize],
    c: &Constellation,
    skip: usize,
) -> Result<Alignment> {
    if skip >= rx.len() {
        return Err(Error::Empty("post-skip symbol window"));
    }
    if tx.is_empty() {
        return Err(Error::Empty("transmitted symbols"));
    }
    let tx_at = |i: i64| -> Option<usize> {
        if i >= 0 && (i as usize) < tx.len() {
            Some(tx[i as usize])
        } else {
            None
        }
    };
    // Bit errors and compared-symbol count of rx[range] against tx[n - lag].
    let score = |lo: usize, hi: usize, lag: i64, t: Ambiguity| -> (usize, usize, usize) {
        let (mut errs, mut agree, mut cmp) = (0, 0, 0);
        for (n, &r) in rx.iter().enumerate().take(hi).skip(lo) {
            if let Some(s) = tx_at(n as i64 - lag) {
                let d = (c.transform_label(s, t) ^ r).count_ones() as usize;
                errs += d;
                agree += (d == 0) as usize;
                cmp += 1;
            }
        }
        (errs, agree, cmp)
    };

    let first_hi = (skip + ALIGN_BLOCK).min(rx.len());
    let mut best: Option<(usize, i64, Ambiguity)> = None;
    for t in Ambiguity::all() {
        for lag in -ALIGN_MAX_LAG..=ALIGN_MAX_LAG {
            let (_, agree, _) = score(skip, first_hi, lag, t);
            if best.is_none_or(|(a, _, _)| agree > a) {
                best = Some((agree, lag, t));
            }
        }
    }
    let (_, initial_lag, amb) = best.expect("search space is nonempty");

    let k = c.bits_per_symbol();
    let mut lag = initial_lag;
    let mut bit_errors = 0;
    let mut symbols = 0;
    let mut min_agreement = 1.0f64;
    let mut lo = skip;
    while lo < rx.len() {
        let hi = (lo + ALIGN_BLOCK).min(rx.len());
        // Prefix sums of (errors, agreements, compared) per candidate lag.
        let prefix = |lg: i64| -> Vec<(usize, usize, usize)> {
            let mut acc = vec![(0, 0, 0)];
            for n in lo..hi {
                let (e, a, c) = score(n, n + 1, lg, amb);
                let last = acc[acc.len() - 1];
                acc.push((last.0 + e, last.1 + a, last.2 + c));
            }
            acc
        };
        let cur = prefix(lag);
        let end = hi - lo;
        let mut chosen = (cur[end].0, cur[end].1, cur[end].2, lag);
        for cand in [lag - 1, lag + 1] {
            let other = prefix(cand);
            // Old lag before the split, candidate lag from the split on.
            for m in 0..=end {
                let e = cur[m].0 + other[end].0 - other[m].0;
                if e < chosen.0 {
                    chosen = (
                        e,
                        cur[m].1 + other[end].1 - other[m].1,
                        cur[m].2 + other[end].2 - other[m].2,
                        cand,
                    );
                }
            }
        }
        let (e, agree, cmp, new_lag) = chosen;
        bit_errors += e;
        symbols += cmp;
        if cmp > 0 {
            min_agreement = min_agreement.min(agree as f64 / cmp as f64);
        }
        lag = new_lag;
        lo = hi;
    }
    Ok(Alignment {
        bit_errors,
        bits: symbols * k,
        symbols,
        initial_lag,
        final_lag: lag,
        ambiguity: amb,
        min_agreement,
    })
}

/// Phase that best maps `y` onto the constellation: a fourth-power estimate
/// refined by decision-directed averaging.
pub fn resolve_phase(y: &[Sample], c: &Constellation) -> f64 {
    let m4: Sample = y.iter().map(|v| v.powi(4)).sum();
    let mut phi = if m4.norm() > 0.0 {
        (-m4).arg() / 4.0
    } else {
        0.0
    };
    for _ in 0..3 {
        let rot = Sample::from_polar(1.0, -phi);
        let corr: Sample = y
            .iter()
            .map(|v| {
                let z = v * rot;
                z * c.point(c.decide(z)).conj()
            })
            .sum();
        if corr.norm() == 0.0 {
            break;
        }
        phi += corr.arg();
    }
    phi
}

/// RMS error vector magnitude (percent of the constellation RMS) of `y[skip..]`
/// after constant-phase resolution.
pub fn evm(y: &[Sample], c: &Constellation, skip: usize) -> Result<f64> {
    if skip >= y.len() {
        return Err(Error::Empty("post-skip EVM window"));
    }
    let w = &y[skip..];
    let rot = Sample::from_polar(1.0, -resolve_phase(w, c));
    let err: f64 = w
        .iter()
        .map(|v| {
            let z = v * rot;
            (z - c.point(c.decide(z))).norm_sqr()
        })
        .sum::<f64>()
        / w.len() as f64;
    Ok(100.0 * (err / c.mean_power()).sqrt())
}

/// Off-center tap energy over total tap energy.
pub fn residual_isi(w: &[Sample]) -> Result<f64> {
    if w.len().is_multiple_of(2) {
        return Err(Error::param(format!(
            "tap vector length must be odd, got {}",
            w.len()
        )));
    }
    let total: f64 = w.iter().map(|t| t.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::param(
            "residual ISI is undefined for an all-zero tap vector",
        ));
    }
    let center = w[w.len() / 2].norm_sqr();
    Ok(((total - center) / total).clamp(0.0, 1.0))
}

/// First index from which `trace` stays within a factor 1.5 of its final
/// value for `window` consecutive entries; `trace.len()` when it never does.
pub fn convergence_symbol(trace: &[f64], window: usize) -> usize {
    let Some(&last) = trace.last() else {
        return 0;
    };
    let (lo, hi) = (last / 1.5, last * 1.5);
    let mut run = 0;
    for (i, &v) in trace.iter().enumerate() {
        if v >= lo && v <= hi {
            run += 1;
            if run >= window {
                return i + 1 - run;
            }
        } else {
            run = 0;
        }
    }
    if run == trace.len() {
        0
    } else {
        trace.len()
    }
}

/// Per-symbol detector cost for an equalizer of length `p`.
pub fn op_count(ted: TedKind, p: usize) -> OpCount {
    ted.op_count(p)
}

/// Per-run measurement record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `ok`, `diverged` or `loss-of-lock`.
    pub status: String,
    pub error: Option<String>,
    pub ted: TedKind,
    /// Metrics are absent when the run ended before they could be measured.
    pub ber: Option<f64>,
    pub bit_errors: usize,
    pub bits_measured: usize,
    pub evm_percent: Option<f64>,
    pub residual_isi: Option<f64>,
    pub symbols_measured: usize,
    pub symbols_total: usize,
    pub convergence_symbol: usize,
    pub ops: OpCount,
    pub ambiguity: Option<Ambiguity>,
    pub lag: Option<i64>,
    pub nco_skips: usize,
    pub nco_stalls: usize,
    pub final_mu: f64,
    pub final_taps: Vec<[f64; 2]>,
    pub trace: Option<Vec<TracePoint>>,
    pub config: RunConfig,
}

impl RunReport {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Decimated per-symbol loop state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub symbol: usize,
    pub mu: f64,
    pub eps: f64,
    pub theta: f64,
    pub residual_isi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScurvePoint {
    pub tau: f64,
    pub mean_eps: f64,
    /// Standard error of the mean.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScurveTable {
    pub ted: TedKind,
    pub points: Vec<ScurvePoint>,
    /// Linear-interpolated sign change nearest to `tau = 0`.
    pub zero_crossing: Option<f64>,
    /// Least-squares slope of mean output over `|tau| <= 0.1`.
    pub slope_at_zero: f64,
}

/// Open-loop (`alpha_c = 0`) mean detector output at each static offset.
pub fn scurve(ted: TedKind, tau_grid: &[f64], cfg: &RunConfig) -> Result<ScurveTable> {
    if tau_grid.is_empty() {
        return Err(Error::Config("empty tau grid".into()));
    }
    let points = tau_grid
        .iter()
        .map(|&tau| {
            let eps = crate::sim::open_loop_ted_output(cfg, ted, tau)?;
            let w = &eps[cfg.skip.min(eps.len())..];
            if w.is_empty() {
                return Err(Error::Empty("post-skip S-curve window"));
            }
            let n = w.len() as f64;
            let mean = w.iter().sum::<f64>() / n;
            let var = w.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
            Ok(ScurvePoint {
                tau,
                mean_eps: mean,
                std_err: (var / n).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_scurve(ted, points))
}

/// Fills in the zero crossing and slope of a measured S-curve.
pub fn summarize_scurve(ted: TedKind, points: Vec<ScurvePoint>) -> ScurveTable {
    let near: Vec<&ScurvePoint> = points
        .iter()
        .filter(|p| p.tau.abs() <= 0.1 + 1e-12)
        .collect();
    let slope_at_zero = if near.len() >= 2 {
        let n = near.len() as f64;
        let mt = near.iter().map(|p| p.tau).sum::<f64>() / n;
        let me = near.iter().map(|p| p.mean_eps).sum::<f64>() / n;
        let sxy: f64 = near.iter().map(|p| (p.tau - mt) * (p.mean_eps - me)).sum();
        let sxx: f64 = near.iter().map(|p| (p.tau - mt).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let zero_crossing = sorted
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.mean_eps == 0.0 {
                Some(a.tau)
            } else if a.mean_eps.signum() != b.mean_eps.signum() {
                Some(a.tau - a.mean_eps * (b.tau - a.tau) / (b.mean_eps - a.mean_eps))
            } else {
                None
            }
        })
        .min_by(|x, y| x.abs().total_cmp(&y.abs()));
    ScurveTable {
        ted,
        points,
        zero_crossing,
        slope_at_zero,
    }
}

/// Offsets over which a detector must restore the loop.
pub const CAPTURE_RANGE: (f64, f64) = (0.05, 0.3);

/// A positive detector output moves the strobe later and a positive channel
/// offset makes the signal arrive earlier, so the loop restores only when the
/// mean output falls through zero as the offset grows: negative slope at the
/// origin and `mean_eps * tau < 0` for every grid point with
/// `CAPTURE_RANGE.0 <= |tau| <= CAPTURE_RANGE.1`.
pub fn validate_loop_sign(table: &ScurveTable) -> Result<()> {
    let fail = || Error::LoopSign {
        ted: table.ted.to_string(),
        slope: table.slope_at_zero,
    };
    if !(table.slope_at_zero < 0.0) {
        return Err(fail());
    }
    let (lo, hi) = CAPTURE_RANGE;
    let wrong_side = table
        .points
        .iter()
        .filter(|p| p.tau.abs() >= lo - 1e-12 && p.tau.abs() <= hi + 1e-12)
        .any(|p| p.mean_eps * p.tau >= 0.0);
    if wrong_side {
        return Err(fail());
    }
    Ok(())
}
