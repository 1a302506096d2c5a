//! Blink gaps, the exclusion rule and the windowed pupil signal.

use vigilance::pupil::{check_exclusion, pupil_preprocess, PupilConfig};
use vigilance::signal::WindowGrid;
use vigilance::synth::{gen_session, TruthParams};

fn main() -> vigilance::Result<()> {
    for blinks in [12.0, 60.0, 120.0] {
        let params = TruthParams {
            duration_s: 240.0,
            channels: vec!["Fz".into()],
            blink_rate_per_min: blinks,
            ..TruthParams::default()
        };
        let s = gen_session(5, &params)?;
        let gaps = s.pupil.gap_report();
        println!(
            "{blinks:>5} blinks/min: {} gaps, longest {} samples, missing {:.3} -> {:?}",
            gaps.gaps.len(),
            gaps.largest_gap,
            gaps.missing_fraction,
            check_exclusion(&s.pupil)
        );
        if check_exclusion(&s.pupil).is_keep() {
            let grid = WindowGrid::covering(6.0, 232.0, 4.0)?;
            let v = pupil_preprocess(&s.pupil, &grid, &PupilConfig::default())?;
            let head: Vec<String> = v.values.iter().take(6).map(|x| format!("{x:.2}")).collect();
            println!("       first windows: {}", head.join(" "));
        }
    }
    Ok(())
}
