//! Generates one synthetic session and writes it as CSV files.
//!
//! Usage: `cargo run --example synth_session -- [out_dir] [seed]`

use std::path::PathBuf;

use vigilance::io::write_session;
use vigilance::synth::{gen_session, TruthParams};

fn main() -> vigilance::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vigilance_session"));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let s = gen_session(seed, &TruthParams::default())?;
    write_session(&out, &s)?;
    let v = &s.truth.vigilance;
    println!(
        "seed {seed}: {} EEG channels x {} samples, {} beats, vigilance in [{:.2}, {:.2}]",
        s.eeg.channels().len(),
        s.eeg.len(),
        s.truth.beat_times.len(),
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    );
    println!("written to {}", out.display());
    Ok(())
}
