use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vigilance::cardiac::{detect_r_peaks_with, heart_rate_windows};
use vigilance::dsp::{butterworth, periodogram, FilterKind};
use vigilance::eeg::extract_band_features;
use vigilance::io;
use vigilance::pipeline::{
    self, read_corr_rows, run_pipeline, write_outputs, Manifest, PipelineConfig, RunOptions,
    EXIT_ALL_EXCLUDED,
};
use vigilance::pupil::{check_exclusion, pupil_preprocess, Exclusion};
use vigilance::regressor::make_regressor_with;
use vigilance::signal::{FeatureVector, UniformSeries, WindowGrid};
use vigilance::stats::{aggregate_within_subject, group_test, shapiro_wilk, spearman, CorrResult};
use vigilance::synth::{gen_session, TruthParams};
use vigilance::{Error, Result};

#[derive(Parser)]
#[command(
    name = "vigilance",
    version,
    about = "Vigilance features from EEG, pupil and ECG"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic session (or a manifest of sessions)
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator settings as JSON (missing keys keep their defaults)
        #[arg(long)]
        params: Option<PathBuf>,
        /// Zero every coupling gain
        #[arg(long)]
        null: bool,
        /// Write this many runs plus `manifest.json`
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value_t = 1)]
        subjects: usize,
    },
    /// Preprocess EEG and write per-window band features
    EegFeatures {
        #[arg(long)]
        eeg: PathBuf,
        /// Volume-trigger times for gradient artifact subtraction
        #[arg(long)]
        markers: Option<PathBuf>,
        /// ECG used to locate R-peaks for cardiac artifact subtraction
        #[arg(long)]
        ecg: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the designed filters as JSON into this directory
        #[arg(long)]
        filters_out: Option<PathBuf>,
    },
    /// Clean a pupil trace and write its window means
    Pupil {
        #[arg(long)]
        pupil: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write the gap report as JSON
        #[arg(long)]
        gaps_out: Option<PathBuf>,
    },
    /// Detect R-peaks and write windowed heart rate
    EcgHr {
        #[arg(long)]
        ecg: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        peaks_out: Option<PathBuf>,
    },
    /// Spearman correlation of two columns, given as FILE:COLUMN
    Correlate {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Group statistics from a per-run correlation table
    Group {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// HRF regressor from one feature column
    Regressor {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        column: String,
        /// Analysed duration in seconds (default: the window span)
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write `t_sec,value` CSV instead of a 1D column
        #[arg(long)]
        csv: bool,
    },
    /// One-sided periodogram of a sample CSV column
    Psd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole analysis over a manifest
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0: one per core)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Base seed for synthetic manifest entries
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-render SVG and summary CSV from a pipeline output directory
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn grid_after_trim(s: &UniformSeries, cfg: &PipelineConfig) -> Result<WindowGrid> {
    WindowGrid::covering(
        s.start_time() + cfg.trim_s,
        s.duration() - cfg.trim_s,
        cfg.window_s,
    )
}

fn split_column(spec: &str) -> Result<(PathBuf, String)> {
    let (file, col) = spec
        .rsplit_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("expected FILE:COLUMN, got `{spec}`")))?;
    Ok((PathBuf::from(file), col.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Synth {
            out,
            seed,
            params,
            null,
            runs,
            subjects,
        } => {
            let mut p: TruthParams = match &params {
                Some(path) => io::read_json(path)?,
                None => TruthParams::default(),
            };
            if null {
                p.gains = vigilance::synth::Gains::zero();
            }
            match runs {
                None => io::write_session(&out, &gen_session(seed, &p)?)?,
                Some(n) => {
                    let mut m = Manifest::synthetic(n, subjects);
                    for (i, e) in m.runs.iter_mut().enumerate() {
                        let dir = Path::new(&e.run_id);
                        io::write_session(&out.join(dir), &gen_session(seed.wrapping_add(i as u64), &p)?)?;
                        e.synthetic = None;
                        e.eeg = Some(dir.join("eeg.csv"));
                        e.pupil = Some(dir.join("pupil.csv"));
                        e.ecg = Some(dir.join("ecg.csv"));
                        e.markers = Some(dir.join("triggers.txt"));
                    }
                    io::write_json(&out.join("manifest.json"), &m)?;
                }
            }
        }
        Cmd::EegFeatures {
            eeg,
            markers,
            ecg,
            config: c,
            out,
            filters_out,
        } => {
            let cfg = config(&c)?;
            let raw = io::read_eeg_csv(&eeg)?;
            let triggers = markers.map(|m| io::read_markers(&m)).transpose()?;
            let peaks = match ecg {
                Some(e) => Some(detect_r_peaks_with(&io::read_ecg_csv(&e)?, &cfg.cardiac)?),
                None => None,
            };
            let rec = pipeline::clean_eeg(
                &raw,
                triggers.as_ref().map(|m| m.times()),
                peaks.as_ref().map(|p| &p.times[..]),
                &cfg,
            )?;
            if let Some(dir) = filters_out {
                let fs = rec.sample_rate();
                for &c in &cfg.notch_centers_hz {
                    let h = cfg.notch_width_hz / 2.0;
                    let f = butterworth(FilterKind::Bandstop, cfg.notch_order, &[c - h, c + h], fs)?;
                    io::write_text(&dir.join(format!("bandstop_{c}.json")), &io::filter_to_json(&f)?)?;
                }
                let f = butterworth(FilterKind::Bandpass, cfg.bandpass_order, &cfg.bandpass_hz, fs)?;
                io::write_text(&dir.join("bandpass.json"), &io::filter_to_json(&f)?)?;
            }
            let grid = grid_after_trim(&rec.channels()[0], &cfg)?;
            let channels: Vec<&str> = cfg.channels.iter().map(String::as_str).collect();
            let table = extract_band_features(&rec, &channels, &grid, &cfg.bands, cfg.psd)?;
            io::write_text(&out, &table.to_csv())?;
        }
        Cmd::Pupil {
            pupil,
            config: c,
            out,
            gaps_out,
        } => {
            let cfg = config(&c)?;
            let g = io::read_pupil_csv(&pupil)?;
            if let Some(p) = gaps_out {
                io::write_json(&p, &g.gap_report())?;
            }
            if let Exclusion::Exclude { reason } = check_exclusion(&g) {
                eprintln!("excluded: {reason}");
                return Ok(ExitCode::from(EXIT_ALL_EXCLUDED as u8));
            }
            let s = UniformSeries::new(g.start_time, g.dt, vec![0.0; g.len()])?;
            let grid = grid_after_trim(&s, &cfg)?;
            let v = pupil_preprocess(&g, &grid, &cfg.pupil)?;
            let mut text = String::from("window_start_sec,pupil\n");
            for (t, x) in grid.window_start_times.iter().zip(&v.values) {
                text.push_str(&format!("{t},{x}\n"));
            }
            io::write_text(&out, &text)?;
        }
        Cmd::EcgHr {
            ecg,
            config: c,
            out,
            peaks_out,
        } => {
            let cfg = config(&c)?;
            let s = io::read_ecg_csv(&ecg)?;
            let peaks = detect_r_peaks_with(&s, &cfg.cardiac)?;
            if let Some(p) = peaks_out {
                io::write_text(&p, &io::peaks_to_text(&peaks))?;
            }
            let hr = heart_rate_windows(&peaks, &grid_after_trim(&s, &cfg)?)?;
            io::write_text(&out, &hr.to_csv())?;
        }
        Cmd::Correlate { x, y } => {
            let (fx, cx) = split_column(&x)?;
            let (fy, cy) = split_column(&y)?;
            let a = io::read_csv_column(&fx, &cx)?;
            let b = io::read_csv_column(&fy, &cy)?;
            let mut r = spearman(&a, &b)?;
            r.feature = format!("{cx}_vs_{cy}");
            let sw = |v: &[f64]| shapiro_wilk(v).ok();
            let report = serde_json::json!({
                "correlation": r,
                "shapiro_wilk": { cx: sw(&a), cy: sw(&b) },
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Cmd::Group {
            input,
            config: c,
            out,
        } => {
            let cfg = config(&c)?;
            let rows = read_corr_rows(&input)?;
            let subject_of: HashMap<String, String> = rows
                .iter()
                .map(|r| (r.run_id.clone(), r.subject_id.clone()))
                .collect();
            let mut stats = Vec::new();
            for (f, t) in pipeline::PAIRS {
                let per_run: Vec<CorrResult> = rows
                    .iter()
                    .filter(|r| r.feature == f && r.target == t)
                    .map(|r| CorrResult {
                        run_id: r.run_id.clone(),
                        feature: pipeline::pair_label(f, t),
                        rho: r.rho,
                        n: r.n,
                        p_two_sided: r.p_raw,
                    })
                    .collect();
                if per_run.is_empty() {
                    continue;
                }
                let subj = aggregate_within_subject(&per_run, &subject_of, cfg.aggregation)?;
                let r: Vec<f64> = subj.iter().map(|s| s.r).collect();
                stats.push(group_test(&pipeline::pair_label(f, t), &r)?);
            }
            let text = serde_json::to_string_pretty(&stats)? + "\n";
            match out {
                Some(p) => io::write_text(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Cmd::Regressor {
            features,
            column,
            duration,
            config: c,
            out,
            csv,
        } => {
            let cfg = config(&c)?;
            let starts = io::read_csv_column(&features, "window_start_sec")?;
            let values = io::read_csv_column(&features, &column)?;
            let start = *starts
                .first()
                .ok_or_else(|| Error::InvalidInput("feature table has no rows".into()))?;
            let grid = WindowGrid::new(start, cfg.window_s, values.len())?;
            let duration = duration.unwrap_or(values.len() as f64 * cfg.window_s);
            let fv = FeatureVector {
                name: column.clone(),
                grid,
                values,
            };
            let r = make_regressor_with(&fv, duration, cfg.tr_s, cfg.hrf)?;
            io::write_text(&out, &if csv { r.to_csv() } else { r.to_1d() })?;
        }
        Cmd::Psd { input, column, out } => {
            let t = io::read_sample_csv(&input, false)?;
            let idx = t
                .labels
                .iter()
                .position(|l| *l == column)
                .ok_or_else(|| Error::InvalidInput(format!("no `{column}` column")))?;
            let s = UniformSeries::new(t.start_time, t.dt, t.columns[idx].clone())?;
            io::write_text(&out, &periodogram(&s)?.to_csv())?;
        }
        Cmd::Pipeline {
            manifest,
            config: c,
            out,
            jobs,
            seed,
        } => {
            let cfg = config(&c)?;
            let m = Manifest::load(&manifest)?;
            let result = run_pipeline(&m, &cfg, RunOptions { jobs, seed })?;
            write_outputs(&result, &out)?;
            if let Some(note) = &result.group_note {
                eprintln!("note: {note}");
            }
            if result.all_excluded() {
                return Ok(ExitCode::from(EXIT_ALL_EXCLUDED as u8));
            }
        }
        Cmd::Report { dir, config: c } => {
            let cfg = config(&c)?;
            let rows = read_corr_rows(&dir.join("per_run_correlations.csv"))?;
            let group_path = dir.join("group_stats.json");
            let group = if group_path.exists() {
                io::read_json(&group_path)?
            } else {
                Vec::new()
            };
            vigilance::report::write_report(&dir.join("report"), &rows, &group, cfg.aggregation)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
