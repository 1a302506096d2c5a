//! Butterworth designs used by the pipeline and their zero-phase gain.

use vigilance::dsp::{butterworth, filtfilt, FilterKind};
use vigilance::signal::UniformSeries;

fn main() -> vigilance::Result<()> {
    let fs = 250.0;
    let designs = [
        ("EEG band-pass", FilterKind::Bandpass, 4, vec![0.1, 80.0]),
        ("60 Hz band-stop", FilterKind::Bandstop, 2, vec![59.5, 60.5]),
        ("pupil band-pass", FilterKind::Bandpass, 3, vec![0.01, 0.1]),
        ("QRS band-pass", FilterKind::Bandpass, 2, vec![5.0, 15.0]),
    ];
    for (name, kind, order, cut) in designs {
        let f = butterworth(kind, order, &cut, fs)?;
        println!(
            "{name}: {} sections, stable {}, |H| at 0.05/10/60 Hz = {:.4} {:.4} {:.4}",
            f.sections.len(),
            f.is_stable(),
            f.magnitude(0.05),
            f.magnitude(10.0),
            f.magnitude(60.0)
        );
    }

    // forward-backward filtering squares the gain and cancels the phase
    let f = butterworth(FilterKind::Lowpass, 4, &[10.0], fs)?;
    let x: Vec<f64> = (0..2500)
        .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).sin())
        .collect();
    let y = filtfilt(&f, &UniformSeries::from_rate(fs, x)?)?;
    let peak = y.samples()[1000..1500].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!(
        "10 Hz through a 10 Hz low-pass twice: amplitude {peak:.4} (|H|^2 = {:.4})",
        f.magnitude(10.0).powi(2)
    );
    Ok(())
}
