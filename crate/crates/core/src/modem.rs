//! Square QAM mapping, pulse shaping and the IF up/down conversion pair.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, FilterMode, FirFilter, Sample, SampleStream};
use crate::error::{Error, Result};

/// Gray-labelled square QAM constellation scaled to unit mean power.
///
/// A label's upper half of bits (MSB first) selects the in-phase level and
/// the lower half the quadrature level; each half is a Gray-coded PAM index,
/// level `2 * gray_to_binary(bits) - (L - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_axis: u32,
    levels: usize,
    points: Vec<Complex64>,
    scale: f64,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn binary_to_gray(b: usize) -> usize {
    b ^ (b >> 1)
}

impl Constellation {
    /// Square QAM of order 4, 16 or 64.
    pub fn qam(order: usize) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => return Err(Error::param(format!("unsupported QAM order {order}"))),
        };
        let levels = 1usize << bits_per_axis;
        // Mean power of the raw odd-integer lattice is 2(L^2 - 1)/3.
        let raw_power = 2.0 * ((levels * levels) as f64 - 1.0) / 3.0;
        let scale = 1.0 / raw_power.sqrt();
        let mask = levels - 1;
        let points = (0..order)
            .map(|label| {
                let i = gray_to_binary(label >> bits_per_axis);
                let q = gray_to_binary(label & mask);
                let lvl = |idx: usize| (2 * idx) as f64 - (levels - 1) as f64;
                Complex64::new(lvl(i), lvl(q)) * scale
            })
            .collect();
        Ok(Self {
            order,
            bits_per_axis,
            levels,
            points,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    /// Factor applied to the odd-integer lattice.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Minimum distance between points.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    /// `E|c|^2` over the table.
    pub fn mean_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// CMA dispersion constant `E|c|^4 / E|c|^2`.
    pub fn dispersion_constant(&self) -> f64 {
        let m4 = self
            .points
            .iter()
            .map(|p| p.norm_sqr().powi(2))
            .sum::<f64>()
            / self.order as f64;
        m4 / self.mean_power()
    }

    /// `E[c^4]`, real and non-positive for square QAM.
    pub fn fourth_moment(&self) -> Complex64 {
        self.points.iter().map(|p| p.powu(4)).sum::<Complex64>() / self.order as f64
    }

    fn axis_index(&self, v: f64) -> usize {
        let idx = ((v / self.scale + (self.levels - 1) as f64) / 2.0).round();
        idx.clamp(0.0, (self.levels - 1) as f64) as usize
    }

    /// Label of the nearest point (per-axis slicing).
    pub fn decide(&self, y: Sample) -> usize {
        let i = binary_to_gray(self.axis_index(y.re));
        let q = binary_to_gray(self.axis_index(y.im));
        (i << self.bits_per_axis) | q
    }

    /// Label after applying an ambiguity transform to the point of `label`.
    pub fn transform_label(&self, label: usize, t: Ambiguity) -> usize {
        self.decide(t.apply(self.points[label]))
    }

    fn push_bits(&self, label: usize, out: &mut Vec<u8>) {
        let n = self.bits_per_symbol();
        for b in (0..n).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// Bits of `label`, MSB first.
    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.bits_per_symbol());
        self.push_bits(label, &mut v);
        v
    }
}

/// Phase/conjugation ambiguity of a blind receiver on square QAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ambiguity {
    /// Number of counter-clockwise quarter turns.
    pub quarter_turns: u8,
    /// Conjugate before rotating.
    pub conjugate: bool,
}

impl Ambiguity {
    /// All eight members of the group.
    pub fn all() -> impl Iterator<Item = Ambiguity> {
        (0..8u8).map(|k| Ambiguity {
            quarter_turns: k % 4,
            conjugate: k >= 4,
        })
    }

    pub fn apply(&self, y: Sample) -> Sample {
        let y = if self.conjugate { y.conj() } else { y };
        match self.quarter_turns % 4 {
            0 => y,
            1 => Sample::new(-y.im, y.re),
            2 => -y,
            _ => Sample::new(y.im, -y.re),
        }
    }
}

/// Maps bits (one `0`/`1` per byte) to unit-power symbols, one per `log2(order)` bits.
pub fn map_bits(bits: &[u8], c: &Constellation) -> Result<SampleStream> {
    let k = c.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::param(format!(
            "{} bits do not divide into {k}-bit symbols",
            bits.len()
        )));
    }
    let symbols = bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            c.point(label)
        })
        .collect();
    Ok(SampleStream::from_parts(symbols, 1.0, 0.0))
}

/// Hard minimum-distance decisions back to bits.
pub fn demap_symbols(y: &SampleStream, c: &Constellation) -> Vec<u8> {
    let mut out = Vec::with_capacity(y.len() * c.bits_per_symbol());
    for s in y.samples() {
        c.push_bits(c.decide(*s), &mut out);
    }
    out
}

/// Upsamples symbols by `sps` and filters with `g`, time-aligned so symbol
/// `k` peaks at symbol time `k`.
pub fn shape_pulse(symbols: &SampleStream, g: &FirFilter, sps: usize) -> Result<SampleStream> {
    let up = dsp::upsample(symbols, sps)?;
    dsp::fir_filter(&up, g, FilterMode::Centered)
}

/// IF conversion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfConfig {
    /// IF carrier frequency (Hz).
    pub f_if_hz: f64,
    /// IF sample rate (Hz).
    pub fs_hz: f64,
    /// Receiver baseband mixing phase (rad).
    pub phi_bb: f64,
    /// Two-sided occupied bandwidth of the baseband signal (Hz).
    pub bandwidth_hz: f64,
}

impl IfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz > 0.0 && self.f_if_hz >= 0.0 && self.bandwidth_hz >= 0.0) {
            return Err(Error::param("IF rates and bandwidth must be non-negative"));
        }
        let top = self.f_if_hz + self.bandwidth_hz / 2.0;
        if self.fs_hz <= 2.0 * top {
            return Err(Error::param(format!(
                "IF sample rate {} Hz aliases a signal reaching {} Hz",
                self.fs_hz, top
            )));
        }
        if self.f_if_hz <= self.bandwidth_hz / 2.0 {
            return Err(Error::param(
                "IF carrier must exceed half the signal bandwidth",
            ));
        }
        Ok(())
    }

    /// Kaiser lowpass (130 dB) that keeps the baseband and removes the image at `-2 f_if`.
    ///
    /// Cutoff sits at `f_if`, midway between the band edge and the image edge.
    pub fn image_reject_filter(&self) -> Result<FirFilter> {
        self.validate()?;
        let cutoff = self.f_if_hz / self.fs_hz;
        let transition = 2.0 * (self.f_if_hz - self.bandwidth_hz / 2.0) / self.fs_hz;
        dsp::design_lowpass(
            cutoff,
            transition.min(2.0 * cutoff).min(1.0 - 2.0 * cutoff),
            130.0,
        )
    }

    fn carrier(&self, n: usize) -> Complex64 {
        let cycles = (self.f_if_hz / self.fs_hz * n as f64).fract();
        Complex64::from_polar(1.0, 2.0 * PI * cycles)
    }
}

/// Real passband signal `Re{ bb(n) e^{j 2 pi f_if n / fs} }`.
pub fn if_upconvert(bb: &SampleStream, cfg: &IfConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(bb
        .samples()
        .iter()
        .enumerate()
        .map(|(n, s)| (s * cfg.carrier(n)).re)
        .collect())
}

/// Complex baseband from a real IF capture.
///
/// Mixes by `2 e^{-j 2 pi f_if n / fs}`, removes the image with
/// [`IfConfig::image_reject_filter`] (group delay compensated, same length as
/// the input) and applies the `e^{j phi_bb}` phase term.
pub fn if_downconvert(pb: &[f64], cfg: &IfConfig, sps: f64, origin: f64) -> Result<SampleStream> {
    let lp = cfg.image_reject_filter()?;
    let taps = lp.real_taps().expect("lowpass is real");
    let mixed: Vec<Complex64> = pb
        .iter()
        .enumerate()
        .map(|(n, &v)| cfg.carrier(n).conj() * (2.0 * v))
        .collect();
    let rot = Complex64::from_polar(1.0, cfg.phi_bb);
    let gd = (taps.len() - 1) / 2;
    let n = mixed.len();
    let out = (0..n)
        .map(|j| {
            let center = j + gd;
            let lo = (center + 1).saturating_sub(n);
            let hi = taps.len().min(center + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in lo..hi {
                acc += mixed[center - k] * taps[k];
            }
            acc * rot
        })
        .collect();
    SampleStream::with_origin(out, sps, origin)
}

/// PRBS-23 (x^23 + x^18 + 1) bit source.
#[derive(Debug, Clone)]
pub struct Prbs23 {
    state: u32,
}

impl Prbs23 {
    /// Seeds the register from `seed`; a zero register is replaced by all ones.
    pub fn new(seed: u64) -> Self {
        let mixed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ seed;
        let mut state = (mixed & 0x7F_FFFF) as u32;
        if state == 0 {
            state = 0x7F_FFFF;
        }
        Self { state }
    }

    pub fn next_bit(&mut self) -> u8 {
        let bit = ((self.state >> 22) ^ (self.state >> 17)) & 1;
        self.state = ((self.state << 1) | bit) & 0x7F_FFFF;
        bit as u8
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.next_bit()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qam16_scale_from_lattice_enumeration() {
        // Oracle: enumerate the raw {+-1, +-3}^2 lattice.
        let lv = [-3.0f64, -1.0, 1.0, 3.0];
        let raw: f64 = lv
            .iter()
            .flat_map(|&a| lv.iter().map(move |&b| a * a + b * b))
            .sum::<f64>()
            / 16.0;
        assert_eq!(raw, 10.0);
        let c = Constellation::qam(16).unwrap();
        assert!((c.scale() - 1.0 / raw.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unit_power_and_distinct_points() {
        for order in [4, 16, 64] {
            let c = Constellation::qam(order).unwrap();
            assert!((c.mean_power() - 1.0).abs() < 1e-12);
            for i in 0..order {
                for j in 0..i {
                    assert!((c.point(i) - c.point(j)).norm() > 1e-9);
                }
            }
        }
        assert!(Constellation::qam(32).is_err());
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for order in [4, 16, 64] {
            let c = Constellation::qam(order).unwrap();
            let d = c.min_distance();
            for i in 0..order {
                for j in 0..order {
                    if ((c.point(i) - c.point(j)).norm() - d).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "order {order}: {i} vs {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn qam16_gray_table() {
        // Documented labelling: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 per axis.
        let c = Constellation::qam(16).unwrap();
        let s = 1.0 / 10f64.sqrt();
        assert_eq!(c.point(0b0000), Complex64::new(-3.0, -3.0) * s);
        assert_eq!(c.point(0b0111), Complex64::new(-1.0, 1.0) * s);
        assert_eq!(c.point(0b0110), Complex64::new(-1.0, 3.0) * s);
        assert_eq!(c.point(0b1110), Complex64::new(1.0, 3.0) * s);
        assert_eq!(c.point(0b1011), Complex64::new(3.0, 1.0) * s);
    }

    #[test]
    fn sixteen_words_map_to_sixteen_points() {
        let c = Constellation::qam(16).unwrap();
        let bits: Vec<u8> = (0..16usize).flat_map(|w| c.label_bits(w)).collect();
        let y = map_bits(&bits, &c).unwrap();
        assert_eq!(y.len(), 16);
        assert!((y.power() - 1.0).abs() < 1e-12);
        assert_eq!(demap_symbols(&y, &c), bits);
    }

    #[test]
    fn ragged_bits_rejected() {
        let c = Constellation::qam(16).unwrap();
        assert!(map_bits(&[1, 0, 1], &c).is_err());
    }

    #[test]
    fn perturbation_inside_decision_region() {
        let c = Constellation::qam(16).unwrap();
        let half = c.min_distance() / 2.0;
        for label in 0..16 {
            for &(dr, di) in &[(0.9, 0.0), (-0.9, 0.3), (0.6, -0.6), (0.0, 0.95)] {
                let y = c.point(label) + Complex64::new(dr, di) * half * 0.99;
                assert_eq!(c.decide(y), label);
            }
        }
    }

    #[test]
    fn ambiguity_group_preserves_constellation() {
        let c = Constellation::qam(16).unwrap();
        for t in Ambiguity::all() {
            let mut seen = [false; 16];
            for l in 0..16 {
                let m = c.transform_label(l, t);
                assert!((t.apply(c.point(l)) - c.point(m)).norm() < 1e-12);
                seen[m] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn single_symbol_shapes_to_taps() {
        let g = dsp::design_rrc(0.25, 16, 4).unwrap();
        let s = SampleStream::new(vec![Complex64::new(1.0, 0.0)], 1.0).unwrap();
        let y = shape_pulse(&s, &g, 4).unwrap();
        assert_eq!(&y.samples()[..g.len()], &g.taps()[..]);
        assert_eq!(y.rate(), 4.0);
        assert_eq!(y.origin(), -8.0);
    }

    #[test]
    fn two_symbols_superpose() {
        let g = dsp::design_rrc(0.25, 8, 4).unwrap();
        let one = |k: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); 2];
            v[k] = Complex64::new(1.0, 0.0);
            shape_pulse(&SampleStream::new(v, 1.0).unwrap(), &g, 4).unwrap()
        };
        let both = shape_pulse(
            &SampleStream::new(vec![Complex64::new(1.0, 0.0); 2], 1.0).unwrap(),
            &g,
            4,
        )
        .unwrap();
        let (a, b) = (one(0), one(1));
        for i in 0..both.len() {
            assert!((both.samples()[i] - a.samples()[i] - b.samples()[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn matched_filter_recovers_symbols() {
        // Oracle: the RRC cascade is Nyquist, so symbol-spaced samples of the
        // matched-filter output reproduce the symbols up to truncation ISI.
        let c = Constellation::qam(16).unwrap();
        let bits = Prbs23::new(3).bits(4 * 400);
        let syms = map_bits(&bits, &c).unwrap();
        let g = dsp::design_rrc(0.25, 16, 4).unwrap();
        let tx = shape_pulse(&syms, &g, 4).unwrap();
        let rx = dsp::fir_filter(&tx, &g, FilterMode::Centered).unwrap();
        let start = (-rx.origin() * 4.0).round() as usize;
        let mut err = 0.0;
        let mut pow = 0.0;
        for k in 20..380 {
            let y = rx.samples()[start + 4 * k];
            err += (y - syms.samples()[k]).norm_sqr();
            pow += syms.samples()[k].norm_sqr();
        }
        assert!((err / pow).sqrt() < 3e-3, "{}", (err / pow).sqrt());
    }

    fn if_cfg(phi: f64) -> IfConfig {
        IfConfig {
            f_if_hz: 5e9,
            fs_hz: 160e9,
            phi_bb: phi,
            bandwidth_hz: 6.25e9,
        }
    }

    #[test]
    fn upconvert_of_constants() {
        let cfg = if_cfg(0.0);
        let one = SampleStream::new(vec![Complex64::new(1.0, 0.0); 64], 32.0).unwrap();
        let j = SampleStream::new(vec![Complex64::new(0.0, 1.0); 64], 32.0).unwrap();
        let a = if_upconvert(&one, &cfg).unwrap();
        let b = if_upconvert(&j, &cfg).unwrap();
        for n in 0..64 {
            let w = 2.0 * PI * cfg.f_if_hz * n as f64 / cfg.fs_hz;
            assert!((a[n] - w.cos()).abs() < 1e-12);
            assert!((b[n] + w.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn alias_check() {
        let mut cfg = if_cfg(0.0);
        cfg.fs_hz = 12e9;
        let s = SampleStream::new(vec![Complex64::new(1.0, 0.0); 4], 32.0).unwrap();
        assert!(if_upconvert(&s, &cfg).is_err());
    }

    #[test]
    fn downconvert_carrier_and_phase() {
        let cfg = if_cfg(0.0);
        let n = 2000;
        let pb: Vec<f64> = (0..n)
            .map(|k| (2.0 * PI * cfg.f_if_hz * k as f64 / cfg.fs_hz).cos())
            .collect();
        let y0 = if_downconvert(&pb, &cfg, 32.0, 0.0).unwrap();
        let y1 = if_downconvert(&pb, &if_cfg(PI / 2.0), 32.0, 0.0).unwrap();
        let rot = Complex64::from_polar(1.0, PI / 2.0);
        for k in 400..1600 {
            assert!((y0.samples()[k] - Complex64::new(1.0, 0.0)).norm() < 1e-3);
            assert!((y1.samples()[k] - y0.samples()[k] * rot).norm() < 1e-12);
        }
    }

    #[test]
    fn prbs_is_balanced_and_seeded() {
        let a = Prbs23::new(1).bits(1 << 16);
        let b = Prbs23::new(2).bits(1 << 16);
        assert_ne!(a, b);
        let ones = a.iter().filter(|&&v| v == 1).count() as f64 / a.len() as f64;
        assert!((ones - 0.5).abs() < 0.01);
        assert_eq!(Prbs23::new(1).bits(100), a[..100]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn map_demap_round_trip(order_idx in 0usize..3, raw in prop::collection::vec(0u8..2, 0..300)) {
                let c = Constellation::qam([4, 16, 64][order_idx]).unwrap();
                let k = c.bits_per_symbol();
                let bits = &raw[..raw.len() / k * k];
                let y = map_bits(bits, &c).unwrap();
                prop_assert_eq!(demap_symbols(&y, &c), bits.to_vec());
            }
        }
    }
}
