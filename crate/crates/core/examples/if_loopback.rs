//! Real IF capture at 160 GSa/s with a 5 GHz carrier, received through the
//! digital downconverter.

use baudsync::sim::{self, FrontEndMode, RunConfig};
use baudsync::TedKind;

fn main() -> baudsync::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.symbols = 8000;
    cfg.front_end.mode = FrontEndMode::If;
    cfg.front_end.phi_bb = 0.7;
    cfg.timing.ted = TedKind::Gardner;
    cfg.impairments.tau0 = -0.2;
    cfg.impairments.snr_db = Some(24.0);
    let (_, capture) = sim::simulate_capture(&cfg)?;
    println!(
        "capture: {} real samples at {:.0} GSa/s around {:.0} GHz",
        capture.data.len(),
        capture.meta.sample_rate_hz / 1e9,
        capture.meta.center_freq_hz / 1e9
    );
    let r = sim::cmd_simulate(&cfg)?;
    println!(
        "{}: ber {:.2e}, evm {:.2} %, ambiguity {:?}",
        r.status,
        r.ber.unwrap_or(f64::NAN),
        r.evm_percent.unwrap_or(f64::NAN),
        r.ambiguity
    );
    Ok(())
}
