//! Tracking a 50 ppm sample-clock offset; the NCO wraps account for the
//! accumulated slip.

use baudsync::sim::{self, RunConfig};
use baudsync::TedKind;

fn main() -> baudsync::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.symbols = 100_000;
    cfg.timing.ted = TedKind::Gardner;
    cfg.impairments.clock_ppm = 50.0;
    cfg.impairments.snr_db = Some(30.0);
    cfg.outputs.trace = true;
    cfg.outputs.trace_every = 10_000;
    let r = sim::cmd_simulate(&cfg)?;
    for p in r.trace.as_deref().unwrap_or_default() {
        println!("symbol {:>6}  mu {:.3}", p.symbol, p.mu);
    }
    println!(
        "{}: ber {:.2e}, {} skips, {} stalls, net {} samples (predicted {})",
        r.status,
        r.ber.unwrap_or(f64::NAN),
        r.nco_skips,
        r.nco_stalls,
        r.nco_stalls as i64 - r.nco_skips as i64,
        2.0 * cfg.symbols as f64 * 50e-6
    );
    Ok(())
}
