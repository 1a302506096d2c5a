//! Removes a trigger-locked gradient artifact with average artifact subtraction.

use vigilance::dsp::periodogram;
use vigilance::eeg::aas_subtract;
use vigilance::synth::{gen_session, TruthParams};

fn main() -> vigilance::Result<()> {
    let params = TruthParams {
        duration_s: 120.0,
        channels: vec!["Oz".into()],
        gradient_amplitude: 200.0,
        ..TruthParams::default()
    };
    let s = gen_session(7, &params)?;
    let raw = &s.eeg.channels()[0];
    let cleaned = aas_subtract(raw, &s.triggers, 25, 0.0)?;

    let (before, after) = (periodogram(raw)?, periodogram(&cleaned)?);
    for f in [20.5, 41.0] {
        let k = (f / before.df).round() as usize;
        println!(
            "{f:>5} Hz bin: {:.3e} -> {:.3e} ({:.1} dB)",
            before.values[k],
            after.values[k],
            10.0 * (before.values[k] / after.values[k]).log10()
        );
    }
    println!("{} triggers, template of 25 epochs", s.triggers.len());
    Ok(())
}
