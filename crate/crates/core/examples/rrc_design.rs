//! Designs the root-raised-cosine pair and checks the cascade is Nyquist.

use baudsync::dsp::{self, FilterMode};
use baudsync::SampleStream;

fn main() -> baudsync::Result<()> {
    let sps = 4;
    let g = dsp::design_rrc(0.25, 16, sps)?;
    println!(
        "taps {}, energy {:.12}, group delay {} samples",
        g.len(),
        g.energy(),
        g.group_delay()
    );

    let mut impulse = vec![baudsync::Sample::new(0.0, 0.0); 2 * g.len()];
    impulse[0] = baudsync::Sample::new(1.0, 0.0);
    let once = dsp::fir_filter(
        &SampleStream::new(impulse, sps as f64)?,
        &g,
        FilterMode::Full,
    )?;
    let rc = dsp::fir_filter(&once, &g, FilterMode::Full)?;
    let peak = g.len() - 1;
    println!("symbol-spaced samples of the raised cosine:");
    for k in -4i64..=4 {
        let v = rc.samples()[(peak as i64 + k * sps as i64) as usize];
        println!("  {k:>2} T  {:+.3e}", v.re);
    }
    Ok(())
}
