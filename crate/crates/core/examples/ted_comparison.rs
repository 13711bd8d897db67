//! Detector comparison on a mildly dispersive channel, as a CSV table.

use baudsync::io::to_csv;
use baudsync::sim::{self, RunConfig, SweepAxis};
use baudsync::TedKind;

fn main() -> baudsync::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.impairments.tau0 = 0.25;
    cfg.impairments.snr_db = Some(25.0);
    cfg.impairments.isi_taps = Some(vec![[1.0, 0.0], [0.2, 0.1]]);
    let rows = sim::cmd_sweep(&cfg, &SweepAxis::Ted(TedKind::ALL.to_vec()))?;
    print!("{}", to_csv(&rows)?);
    Ok(())
}
