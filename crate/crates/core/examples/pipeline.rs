//! Full analysis over a synthetic manifest, printing the group table.
//!
//! Usage: `cargo run --release --example pipeline -- [runs] [subjects] [out_dir]`

use std::path::PathBuf;

use vigilance::pipeline::{run_pipeline, write_outputs, Manifest, PipelineConfig, RunOptions};

fn main() -> vigilance::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let subjects = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vigilance_pipeline"));

    let result = run_pipeline(
        &Manifest::synthetic(runs, subjects),
        &PipelineConfig::default(),
        RunOptions::default(),
    )?;
    for r in &result.rows {
        println!(
            "{:<12} {:>11} vs {:<10} rho {:+.3}  p_adj {:.2e} {}",
            r.run_id, r.feature, r.target, r.rho, r.p_adj, r.stars
        );
    }
    for g in &result.group {
        println!(
            "{:<22} mean r {:+.3}  t({}) {:+.3}  p {:.2e}  d {:+.3}",
            g.feature, g.mean_r, g.df, g.t, g.p_two_sided, g.cohens_d
        );
    }
    if let Some(note) = &result.group_note {
        println!("note: {note}");
    }
    write_outputs(&result, &out)?;
    println!("outputs in {}", out.display());
    Ok(())
}
