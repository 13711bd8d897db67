//! Open-loop S-curves of every timing error detector.

use baudsync::metrics::validate_loop_sign;
use baudsync::sim::{self, RunConfig};
use baudsync::TedKind;

fn main() -> baudsync::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.symbols = 12_000;
    let grid = sim::grid(-0.3, 0.3, 0.1)?;
    print!("{:>13}", "tau");
    for t in &grid {
        print!(" {t:>9.2}");
    }
    println!("  verdict");
    for ted in TedKind::ALL {
        let table = sim::cmd_scurve(&cfg, ted, &grid)?;
        print!("{:>13}", ted.name());
        for p in &table.points {
            print!(" {:>+9.4}", p.mean_eps);
        }
        match validate_loop_sign(&table) {
            Ok(()) => println!("  restoring (slope {:+.3})", table.slope_at_zero),
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}
