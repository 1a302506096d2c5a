//! Periodogram and band powers of a two-tone test signal.

use std::f64::consts::PI;

use vigilance::dsp::{band_power, periodogram};
use vigilance::eeg::default_bands;
use vigilance::signal::UniformSeries;

fn main() -> vigilance::Result<()> {
    let fs = 250.0;
    // 10 Hz at amplitude 2 (power 2) plus 20 Hz at amplitude 1 (power 0.5)
    let x: Vec<f64> = (0..1000)
        .map(|i| {
            let t = i as f64 / fs;
            2.0 * (2.0 * PI * 10.0 * t).sin() + (2.0 * PI * 20.0 * t).sin()
        })
        .collect();
    let psd = periodogram(&UniformSeries::from_rate(fs, x)?)?;
    println!("resolution {} Hz, total power {:.6}", psd.df, psd.total_power());
    for b in default_bands() {
        println!(
            "{:>6} [{:>4}, {:>4}) Hz: {:.6}",
            b.name,
            b.lo,
            b.hi,
            band_power(&psd, b.lo, b.hi)?
        );
    }
    Ok(())
}
