//! Preprocesses a synthetic EEG session and prints the first band-feature rows.

use vigilance::dsp::PsdOptions;
use vigilance::eeg::{
    default_bands, eeg_preprocess, extract_band_features, EegPreprocessConfig, DEFAULT_CHANNELS,
};
use vigilance::signal::WindowGrid;
use vigilance::synth::{gen_session, TruthParams};

fn main() -> vigilance::Result<()> {
    let params = TruthParams {
        duration_s: 120.0,
        ..TruthParams::default()
    };
    let s = gen_session(1, &params)?;
    let clean = eeg_preprocess(&s.eeg, &EegPreprocessConfig::default())?;
    // drop the first 6 s, as the pipeline does
    let grid = WindowGrid::covering(6.0, clean.duration() - 6.0, 4.0)?;
    let table = extract_band_features(
        &clean,
        &DEFAULT_CHANNELS,
        &grid,
        &default_bands(),
        PsdOptions::default(),
    )?;
    println!(
        "{} windows; vigilance, alpha, beta, alpha ratio:",
        table.rows.len()
    );
    for r in table.rows.iter().take(8) {
        let v = s.truth.vigilance_at(r.start_time + 2.0);
        println!(
            "{:6.1} s  v={v:.3}  {:8.3} {:8.3} {:7.3}",
            r.start_time, r.alpha_power, r.beta_power, r.alpha_ratio
        );
    }
    Ok(())
}
