//! Uncoded 16-QAM bit error rate over AWGN against the Gray-code
//! approximation.

use baudsync::channel;
use baudsync::dsp::{self, FilterMode};
use baudsync::modem::{self, Constellation, Prbs23};
use baudsync::{Sample, SampleStream};
use statrs::distribution::{ContinuousCDF, Normal};

fn main() -> baudsync::Result<()> {
    let q = Constellation::qam(16)?;
    let normal = Normal::standard();
    let sps = 4;
    let g = dsp::design_rrc(0.25, 16, sps)?;
    let n_sym = 250_000;
    let bits = Prbs23::new(11).bits(n_sym * q.bits_per_symbol());
    let tx = modem::shape_pulse(&modem::map_bits(&bits, &q)?, &g, sps)?;
    println!("{:>8} {:>12} {:>12}", "Eb/N0", "measured", "analytic");
    for ebn0_db in [6.0, 8.0, 10.0, 12.0] {
        let esn0_db = ebn0_db + 10.0 * 4f64.log10();
        let mf = dsp::fir_filter(
            &channel::apply_awgn(&tx, esn0_db, 1)?,
            &g,
            FilterMode::Centered,
        )?;
        let start = (-mf.origin() * sps as f64).round() as usize;
        let y: Vec<Sample> = (0..n_sym).map(|k| mf.samples()[start + k * sps]).collect();
        let rx = modem::demap_symbols(&SampleStream::new(y, 1.0)?, &q);
        let errors = bits.iter().zip(&rx).filter(|(a, b)| a != b).count();
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        println!(
            "{ebn0_db:>6.1}dB {:>12.3e} {:>12.3e}",
            errors as f64 / bits.len() as f64,
            0.75 * normal.sf((0.8 * ebn0).sqrt())
        );
    }
    Ok(())
}
