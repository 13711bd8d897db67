//! Full receiver chain at a static timing offset: clock recovery, CMA
//! equalizer and carrier loop, comparing tap-driven and sample-driven
//! detectors.

use baudsync::sim::{self, RunConfig};
use baudsync::TedKind;

fn main() -> baudsync::Result<()> {
    println!(
        "{:>13} {:>8} {:>10} {:>8} {:>9} {:>8}",
        "ted", "status", "ber", "evm %", "isi", "mu"
    );
    for ted in [
        TedKind::CmaFull,
        TedKind::CmaModified,
        TedKind::Gardner,
        TedKind::SignMm,
    ] {
        let mut cfg = RunConfig::default();
        cfg.timing.ted = ted;
        cfg.impairments.tau0 = 0.3;
        let r = sim::cmd_simulate(&cfg)?;
        println!(
            "{:>13} {:>8} {:>10.2e} {:>8.2} {:>9.5} {:>8.4}",
            ted.name(),
            r.status,
            r.ber.unwrap_or(f64::NAN),
            r.evm_percent.unwrap_or(f64::NAN),
            r.residual_isi.unwrap_or(f64::NAN),
            r.final_mu
        );
    }
    Ok(())
}
