//! Blind CMA equalization of a static two-tap channel.

use baudsync::channel;
use baudsync::equalizer::{CmaEqualizer, EqualizerConfig};
use baudsync::metrics;
use baudsync::modem::{self, Constellation, Prbs23};
use baudsync::Sample;

fn main() -> baudsync::Result<()> {
    let q = Constellation::qam(16)?;
    let bits = Prbs23::new(7).bits(20_000 * q.bits_per_symbol());
    let tx = modem::map_bits(&bits, &q)?;
    let h = [Sample::new(1.0, 0.0), Sample::new(0.3, 0.1)];
    let rx = channel::apply_isi(&tx, &h)?;

    let mut eq = CmaEqualizer::new(&EqualizerConfig::default(), q.dispersion_constant())?;
    let mut out = Vec::with_capacity(rx.len());
    println!("{:>7} {:>12} {:>8}", "symbol", "tap ISI", "EVM %");
    for (n, &r) in rx.samples().iter().enumerate() {
        let y = eq.filter(r);
        eq.update(y, n)?;
        out.push(y);
        if (n + 1) % 2500 == 0 {
            let window = &out[n + 1 - 2000..];
            println!(
                "{:>7} {:>12.5} {:>8.2}",
                n + 1,
                metrics::residual_isi(eq.taps())?,
                metrics::evm(window, &q, 0)?
            );
        }
    }
    println!("centre taps: {:?}", &eq.taps()[8..13]);
    Ok(())
}
