//! Cubic Farrow interpolation of a sampled tone at fractional offsets.

use std::f64::consts::PI;

use baudsync::sync::farrow_interp;
use baudsync::Sample;

fn main() {
    let f = 0.05;
    let x: Vec<Sample> = (0..8)
        .map(|n| Sample::from_polar(1.0, 2.0 * PI * f * n as f64))
        .collect();
    println!("{:>5} {:>24} {:>10}", "mu", "interpolated", "error");
    for i in 0..8 {
        let mu = i as f64 / 8.0;
        let y = farrow_interp(&[x[2], x[3], x[4], x[5]], mu);
        let want = Sample::from_polar(1.0, 2.0 * PI * f * (3.0 + mu));
        println!(
            "{mu:>5.3} {:>11.6} {:>+11.6}j {:>10.2e}",
            y.re,
            y.im,
            (y - want).norm()
        );
    }

    // Any cubic is reproduced exactly.
    let p = |t: f64| 0.5 - t + 0.25 * t * t - 0.125 * t * t * t;
    let h = [-1.0, 0.0, 1.0, 2.0].map(|t| Sample::new(p(t), 0.0));
    let y = farrow_interp(&h, 0.37);
    println!("cubic at 0.37: {:.15} (exact {:.15})", y.re, p(0.37));
}
