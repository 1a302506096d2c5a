//! R-peak detection and windowed heart rate against the generator's truth.

use vigilance::cardiac::{detect_r_peaks, heart_rate_windows};
use vigilance::signal::WindowGrid;
use vigilance::synth::{gen_session, TruthParams};

fn main() -> vigilance::Result<()> {
    let params = TruthParams {
        duration_s: 180.0,
        channels: vec!["Fz".into()],
        ..TruthParams::default()
    };
    let s = gen_session(2, &params)?;
    let peaks = detect_r_peaks(&s.ecg)?;
    println!(
        "{} peaks detected, {} true beats",
        peaks.len(),
        s.truth.beat_times.len()
    );

    let grid = WindowGrid::covering(0.0, 180.0, 4.0)?;
    let hr = heart_rate_windows(&peaks, &grid)?;
    let worst = hr
        .bpm
        .iter()
        .zip(&s.truth.heart_rate)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    for (t, (b, truth)) in grid
        .window_start_times
        .iter()
        .zip(hr.bpm.iter().zip(&s.truth.heart_rate))
        .take(6)
    {
        println!("{t:5.0} s  {b:6.2} bpm  (truth {truth:6.2})");
    }
    println!("largest error over {} windows: {worst:.3} bpm", hr.bpm.len());
    Ok(())
}
