//! Writes a receiver-input capture with its sidecar and analyzes it offline.

use baudsync::io;
use baudsync::sim::{self, RunConfig};

fn main() -> baudsync::Result<()> {
    let dir = std::env::temp_dir().join("baudsync-capture-example");
    let path = dir.join("frame.iq");
    let mut cfg = RunConfig::default();
    cfg.symbols = 8000;
    cfg.impairments.tau0 = 0.15;
    cfg.impairments.snr_db = Some(22.0);
    cfg.outputs.dump = Some(path.clone());

    let live = sim::cmd_simulate(&cfg)?;
    let (data, meta) = io::read_capture(&path)?;
    println!(
        "{} samples, sidecar {}",
        data.len(),
        io::sidecar_path(&path).display()
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    );

    let replay = sim::cmd_analyze(&path, &cfg)?;
    println!("live   ber {:?} evm {:?}", live.ber, live.evm_percent);
    println!("replay ber {:?} evm {:?}", replay.ber, replay.evm_percent);
    println!("reports identical: {}", live.to_json() == replay.to_json());
    Ok(())
}
