//! Double-gamma HRF and a regressor built from a 4-s feature.

use vigilance::regressor::{hrf_kernel, make_regressor};
use vigilance::signal::{FeatureVector, WindowGrid};

fn main() -> vigilance::Result<()> {
    let k = hrf_kernel(2.0)?;
    let line: Vec<String> = k.samples.iter().map(|v| format!("{v:.3}")).collect();
    println!("HRF at TR 2 s: {}", line.join(" "));

    // a block of raised feature between 40 and 60 s
    let grid = WindowGrid::covering(0.0, 120.0, 4.0)?;
    let values = grid
        .window_start_times
        .iter()
        .map(|&t| if (40.0..60.0).contains(&t) { 1.0 } else { 0.0 })
        .collect();
    let f = FeatureVector {
        name: "beta_power".into(),
        grid,
        values,
    };
    let r = make_regressor(&f, 120.0, 2.0)?;
    println!("{} samples; regressor:", r.values.len());
    print!("{}", r.to_csv());
    Ok(())
}
