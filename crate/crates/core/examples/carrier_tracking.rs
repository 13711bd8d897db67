//! Fourth-power DPLL pulling in a carrier frequency offset with phase noise.

use baudsync::carrier::{CarrierConfig, Dpll};
use baudsync::channel;
use baudsync::metrics;
use baudsync::modem::{self, Constellation, Prbs23};

fn main() -> baudsync::Result<()> {
    let q = Constellation::qam(16)?;
    let symbol_rate = 5e9;
    let cfo = 2e6;
    let bits = Prbs23::new(3).bits(30_000 * q.bits_per_symbol());
    let tx = modem::map_bits(&bits, &q)?;
    let rx = channel::apply_awgn(
        &channel::apply_cfo_pn(&tx, cfo, 1e4, symbol_rate, 5)?,
        28.0,
        6,
    )?;

    let mut pll = Dpll::new(&CarrierConfig::default(), &q)?;
    let y: Vec<_> = rx.samples().iter().map(|&x| pll.step(x)).collect();
    let want = 2.0 * std::f64::consts::PI * cfo / symbol_rate;
    println!(
        "frequency estimate {:.4e} rad/symbol (true {want:.4e})",
        pll.frequency()
    );
    for start in [0, 1000, 5000, 25_000] {
        println!(
            "evm over [{start}, {}): {:.2} %",
            start + 5000,
            metrics::evm(&y[start..start + 5000], &q, 0)?
        );
    }
    Ok(())
}
