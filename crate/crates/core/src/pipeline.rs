//! Manifest-driven batch analysis: per-run preprocessing and features,
//! within-run correlations, group inference and regressors.
//!
//! Runs are processed in parallel, but every aggregate is a fold over run
//! results in manifest order, so output bytes never depend on scheduling.

use crate::num::Num;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cardiac::{detect_r_peaks_with, heart_rate_windows, DetectorConfig, RPeaks};
use crate::dsp::PsdOptions;
use crate::eeg::{
    aas_subtract, default_bands, eeg_preprocess, extract_band_features, BandDefinition, EegPreprocessConfig,
    EegRecording, FeatureTable, DEFAULT_CHANNELS,
};
use crate::error::{Error, Result};
use crate::io;
use crate::pupil::{check_exclusion, pupil_preprocess, Exclusion, GappySeries, PupilConfig};
use crate::regressor::{make_regressor_with, HrfParams, Regressor};
use crate::signal::{DecimateConfig, EventMarkers, FeatureVector, UniformSeries, WindowGrid};
use crate::stats::{
    aggregate_within_subject, bonferroni, fisher_z, group_test, shapiro_wilk, significance_stars, spearman,
    two_sample_t_test, Aggregation, CorrResult, GroupStats, TwoSampleTest,
};
use crate::synth::{gen_session, SyntheticSession, TruthParams};

/// Exit status when every run in the manifest was excluded.
pub const EXIT_ALL_EXCLUDED: i32 = 3;

/// Feature/target pairs correlated within each run.
pub const PAIRS: [(&str, &str); 4] = [
    ("alpha_power", "pupil"),
    ("beta_power", "pupil"),
    ("alpha_ratio", "pupil"),
    ("beta_power", "heart_rate"),
];

/// Features turned into HRF regressors.
pub const REGRESSOR_FEATURES: [&str; 2] = ["beta_power", "pupil"];

pub fn pair_label(feature: &str, target: &str) -> String {
    format!("{feature}_vs_{target}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AasConfig {
    /// Epochs averaged into each sliding template.
    pub template_len: usize,
    /// Offset from R-peak to the start of each cardiac epoch.
    pub delay_s: f64,
    /// Subtract the volume-trigger locked gradient artifact when markers are given.
    pub gradient: bool,
    /// Subtract the R-peak locked ballistocardiogram artifact.
    pub bcg: bool,
}

impl Default for AasConfig {
    fn default() -> Self {
        Self {
            template_len: 25,
            delay_s: 0.21,
            gradient: true,
            bcg: true,
        }
    }
}

/// Every numeric constant of the analysis, with its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub channels: Vec<String>,
    pub bands: Vec<BandDefinition>,
    pub target_rate_hz: f64,
    pub decimate: DecimateConfig,
    pub notch_centers_hz: Vec<f64>,
    pub notch_width_hz: f64,
    pub notch_order: usize,
    pub bandpass_hz: [f64; 2],
    pub bandpass_order: usize,
    pub aas: AasConfig,
    pub psd: PsdOptions,
    pub pupil: PupilConfig,
    pub cardiac: DetectorConfig,
    pub trim_s: f64,
    pub window_s: f64,
    pub tr_s: f64,
    pub hrf: HrfParams,
    pub aggregation: Aggregation,
    pub alpha: f64,
    /// Generator settings for synthetic manifest entries.
    pub synth: TruthParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let eeg = EegPreprocessConfig::default();
        Self {
            channels: DEFAULT_CHANNELS.iter().map(|c| c.to_string()).collect(),
            bands: default_bands(),
            target_rate_hz: eeg.target_rate_hz,
            decimate: eeg.decimate,
            notch_centers_hz: eeg.notch_centers_hz,
            notch_width_hz: eeg.notch_width_hz,
            notch_order: eeg.notch_order,
            bandpass_hz: eeg.bandpass_hz,
            bandpass_order: eeg.bandpass_order,
            aas: AasConfig::default(),
            psd: PsdOptions::default(),
            pupil: PupilConfig::default(),
            cardiac: DetectorConfig::default(),
            trim_s: 6.0,
            window_s: 4.0,
            tr_s: 2.0,
            hrf: HrfParams::default(),
            aggregation: Aggregation::MeanR,
            alpha: 0.05,
            synth: TruthParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn eeg(&self) -> EegPreprocessConfig {
        EegPreprocessConfig {
            target_rate_hz: self.target_rate_hz,
            decimate: self.decimate,
            notch_centers_hz: self.notch_centers_hz.clone(),
            notch_width_hz: self.notch_width_hz,
            notch_order: self.notch_order,
            bandpass_hz: self.bandpass_hz,
            bandpass_order: self.bandpass_order,
        }
    }

    /// This config with a JSON object of overrides merged in.
    pub fn with_overrides(&self, patch: &Value) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        merge_json(&mut v, patch);
        Ok(serde_json::from_value(v)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        io::read_json(path)
    }
}

/// Recursive object merge; non-object values in `patch` replace those in `base`.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Added to the pipeline seed to give this run's generator seed.
    #[serde(default)]
    pub seed_offset: u64,
    /// Overrides merged into the configured generator settings.
    #[serde(default)]
    pub params: Option<Value>,
}

/// One run: either recorded files or a synthetic session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub run_id: String,
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eeg: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pupil: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecg: Option<PathBuf>,
    /// Volume-trigger times for gradient artifact subtraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markers: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    /// Per-run overrides of the pipeline config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub runs: Vec<RunEntry>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: Manifest = io::read_json(path)?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    /// `n_runs` synthetic runs spread round-robin over `n_subjects` subjects,
    /// with seed offsets `0..n_runs`.
    pub fn synthetic(n_runs: usize, n_subjects: usize) -> Self {
        let n_subjects = n_subjects.max(1);
        let runs = (0..n_runs)
            .map(|i| {
                let subject = i % n_subjects + 1;
                let run = i / n_subjects + 1;
                RunEntry {
                    run_id: format!("sub{subject:02}_run{run}"),
                    subject_id: format!("sub{subject:02}"),
                    eeg: None,
                    pupil: None,
                    ecg: None,
                    markers: None,
                    synthetic: Some(SyntheticSpec {
                        seed_offset: i as u64,
                        params: None,
                    }),
                    config: None,
                }
            })
            .collect();
        Self {
            runs,
            base_dir: PathBuf::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::invalid("manifest lists no runs"));
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.runs {
            if !seen.insert(r.run_id.as_str()) {
                return Err(Error::invalid(format!("duplicate run id '{}'", r.run_id)));
            }
            let files = r.eeg.is_some() && r.pupil.is_some() && r.ecg.is_some();
            if r.synthetic.is_some() == files || (r.synthetic.is_some() && r.eeg.is_some()) {
                return Err(Error::invalid(format!(
                    "run '{}' must give either eeg, pupil and ecg files or a synthetic entry",
                    r.run_id
                )));
            }
        }
        Ok(())
    }
}

/// Raw signals of one run.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub eeg: EegRecording,
    pub pupil: GappySeries,
    pub ecg: UniformSeries,
    pub triggers: Option<EventMarkers>,
}

impl From<SyntheticSession> for RunInputs {
    fn from(s: SyntheticSession) -> Self {
        Self {
            eeg: s.eeg,
            pupil: s.pupil,
            ecg: s.ecg,
            triggers: Some(s.triggers),
        }
    }
}

impl RunInputs {
    pub fn load(entry: &RunEntry, base_dir: &Path, cfg: &PipelineConfig, seed: u64) -> Result<Self> {
        if let Some(spec) = &entry.synthetic {
            let mut params = cfg.synth.clone();
            if let Some(p) = &spec.params {
                let mut v = serde_json::to_value(&params)?;
                merge_json(&mut v, p);
                params = serde_json::from_value(v)?;
            }
            return Ok(gen_session(seed.wrapping_add(spec.seed_offset), &params)?.into());
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| base_dir.join(p));
        Ok(Self {
            eeg: io::read_eeg_csv(&path(&entry.eeg).unwrap())?,
            pupil: io::read_pupil_csv(&path(&entry.pupil).unwrap())?,
            ecg: io::read_ecg_csv(&path(&entry.ecg).unwrap())?,
            triggers: path(&entry.markers).map(|p| io::read_markers(&p)).transpose()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityRow {
    pub variable: String,
    pub w: f64,
    pub p_value: f64,
}

/// Everything computed for one retained run.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub table: FeatureTable,
    /// One entry per [`PAIRS`] element, in that order.
    pub correlations: Vec<CorrResult>,
    pub normality: Vec<NormalityRow>,
    pub regressors: Vec<Regressor>,
    pub peaks: RPeaks,
    pub hr_interpolated: Vec<bool>,
    pub missing_fraction: f64,
}

/// Markers whose epochs (minimum spacing long, starting `delay` after the
/// marker) lie inside the series.
pub fn markers_in_bounds(s: &UniformSeries, markers: &[f64], delay: f64) -> Vec<f64> {
    let n = s.len() as i64;
    let mut kept: Vec<f64> = markers.to_vec();
    loop {
        let starts: Vec<i64> = kept.iter().map(|&t| s.index_of(t + delay)).collect();
        let Some(len) = starts.windows(2).map(|w| w[1] - w[0]).min() else {
            return kept;
        };
        let next: Vec<f64> = kept
            .iter()
            .zip(&starts)
            .filter(|(_, &st)| st >= 0 && st + len <= n)
            .map(|(&t, _)| t)
            .collect();
        if next.len() == kept.len() {
            return kept;
        }
        kept = next;
    }
}

fn aas_all(rec: &EegRecording, markers: &[f64], template_len: usize, delay: f64) -> Result<EegRecording> {
    let kept = markers_in_bounds(&rec.channels()[0], markers, delay);
    if kept.len() < 2 {
        log::warn!("fewer than 2 usable markers; artifact subtraction skipped");
        return Ok(rec.clone());
    }
    let m = EventMarkers::new(kept)?;
    rec.try_map(|c| aas_subtract(c, &m, template_len, delay))
}

/// Gradient subtraction at the recorded rate (when triggers are given),
/// decimation, band-stops and band-pass, then cardiac subtraction (when
/// R-peak times are given).
pub fn clean_eeg(
    rec: &EegRecording,
    triggers: Option<&[f64]>,
    r_peaks: Option<&[f64]>,
    cfg: &PipelineConfig,
) -> Result<EegRecording> {
    let mut eeg = match triggers {
        Some(t) => aas_all(rec, t, cfg.aas.template_len, 0.0)?,
        None => rec.clone(),
    };
    eeg = eeg_preprocess(&eeg, &cfg.eeg())?;
    if let Some(p) = r_peaks {
        eeg = aas_all(&eeg, p, cfg.aas.template_len, cfg.aas.delay_s)?;
    }
    Ok(eeg)
}

/// Window grid shared by all modalities: starts `trim_s` into the run and
/// ends with the shortest modality.
pub fn analysis_grid(inputs: &RunInputs, cfg: &PipelineConfig) -> Result<(WindowGrid, f64)> {
    let start = inputs.eeg.start_time() + cfg.trim_s;
    let end = [
        inputs.eeg.start_time() + inputs.eeg.duration(),
        inputs.pupil.start_time + inputs.pupil.duration(),
        inputs.ecg.start_time() + inputs.ecg.duration(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let duration = end - start;
    let grid = WindowGrid::covering(start, duration, cfg.window_s)?;
    if grid.n_windows < 3 {
        return Err(Error::invalid(format!(
            "only {} analysis windows after trimming; need at least 3",
            grid.n_windows
        )));
    }
    Ok((grid, duration))
}

/// Full per-run analysis. Returns [`Error::Excluded`] for runs failing the
/// missing-data rule.
pub fn analyze_run(run_id: &str, inputs: &RunInputs, cfg: &PipelineConfig) -> Result<RunAnalysis> {
    if let Exclusion::Exclude { reason } = check_exclusion(&inputs.pupil) {
        return Err(Error::Excluded(reason));
    }
    let missing_fraction = inputs.pupil.gap_report().missing_fraction;
    let (grid, duration) = analysis_grid(inputs, cfg)?;

    let peaks = detect_r_peaks_with(&inputs.ecg, &cfg.cardiac)?;
    let triggers = inputs.triggers.as_ref().filter(|_| cfg.aas.gradient);
    let eeg = clean_eeg(
        &inputs.eeg,
        triggers.map(|m| m.times()),
        cfg.aas.bcg.then_some(&peaks.times[..]),
        cfg,
    )?;

    let channels: Vec<&str> = cfg.channels.iter().map(String::as_str).collect();
    let mut table = extract_band_features(&eeg, &channels, &grid, &cfg.bands, cfg.psd)?;
    let pupil = pupil_preprocess(&inputs.pupil, &grid, &cfg.pupil)?;
    let hr = heart_rate_windows(&peaks, &grid)?;
    table.pupil = Some(pupil.values);
    table.heart_rate = Some(hr.bpm.clone());

    let column = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::invalid(format!("unknown column '{name}'")))
    };
    let mut correlations = Vec::with_capacity(PAIRS.len());
    for (f, t) in PAIRS {
        let mut c = spearman(&column(f)?, &column(t)?)?;
        c.run_id = run_id.to_string();
        c.feature = pair_label(f, t);
        correlations.push(c);
    }

    let mut normality = Vec::new();
    for name in ["alpha_power", "beta_power", "alpha_ratio", "pupil", "heart_rate"] {
        // constant columns have no defined statistic; leave them out
        if let Ok(sw) = shapiro_wilk(&column(name)?) {
            normality.push(NormalityRow {
                variable: name.to_string(),
                w: sw.w,
                p_value: sw.p_value,
            });
        }
    }

    let mut regressors = Vec::new();
    for name in REGRESSOR_FEATURES {
        let fv = FeatureVector {
            name: name.to_string(),
            grid: grid.clone(),
            values: column(name)?,
        };
        let mut r = make_regressor_with(&fv, duration, cfg.tr_s, cfg.hrf)?;
        r.run_id = run_id.to_string();
        regressors.push(r);
    }

    Ok(RunAnalysis {
        table,
        correlations,
        normality,
        regressors,
        peaks,
        hr_interpolated: hr.interpolated,
        missing_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRun {
    pub run_id: String,
    pub subject_id: String,
    pub reason: String,
}

/// One line of `per_run_correlations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub run_id: String,
    pub subject_id: String,
    pub feature: String,
    pub target: String,
    pub rho: f64,
    pub n: usize,
    pub p_raw: f64,
    pub p_adj: f64,
    pub stars: String,
}

pub const CORR_HEADER: &str = "run_id,subject_id,feature,target,rho,n,p_raw,p_adj,stars";

pub fn corr_rows_to_csv(rows: &[CorrRow]) -> String {
    let mut out = format!("{CORR_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.subject_id,
            r.feature,
            r.target,
            Num(r.rho),
            r.n,
            Num(r.p_raw),
            Num(r.p_adj),
            r.stars
        ));
    }
    out
}

pub fn read_corr_rows(path: &Path) -> Result<Vec<CorrRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg: e.to_string(),
    })?;
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| Error::Parse {
                path: path.to_path_buf(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                msg: e.to_string(),
            })
        })
        .collect()
}

/// Pooled and Welch comparison of two features' subject-level z values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureComparison {
    pub first: String,
    pub second: String,
    pub test: TwoSampleTest,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub config: PipelineConfig,
    /// Retained runs in manifest order.
    pub runs: Vec<(RunEntry, RunAnalysis)>,
    pub excluded: Vec<ExcludedRun>,
    pub rows: Vec<CorrRow>,
    pub group: Vec<GroupStats>,
    pub comparisons: Vec<FeatureComparison>,
    /// Why group statistics are absent, if they are.
    pub group_note: Option<String>,
}

impl PipelineOutput {
    pub fn all_excluded(&self) -> bool {
        self.runs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub seed: u64,
}

enum Outcome {
    Done(Box<RunAnalysis>),
    Excluded(String),
}

fn process(entry: &RunEntry, base_dir: &Path, cfg: &PipelineConfig, seed: u64) -> Result<Outcome> {
    let cfg = match &entry.config {
        Some(patch) => cfg.with_overrides(patch)?,
        None => cfg.clone(),
    };
    let inputs = RunInputs::load(entry, base_dir, &cfg, seed)?;
    match analyze_run(&entry.run_id, &inputs, &cfg) {
        Ok(a) => Ok(Outcome::Done(Box::new(a))),
        Err(Error::Excluded(reason)) => Ok(Outcome::Excluded(reason)),
        Err(e @ (Error::NoCardiacActivity | Error::ZeroVariance(_) | Error::TooShort { .. })) => {
            Ok(Outcome::Excluded(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

/// Bonferroni across runs for each pair, then subject aggregation and the
/// one-sample test per pair.
pub fn summarize(
    runs: &[(RunEntry, RunAnalysis)],
    cfg: &PipelineConfig,
) -> Result<(
    Vec<CorrRow>,
    Vec<GroupStats>,
    Vec<FeatureComparison>,
    Option<String>,
)> {
    let subject_of: HashMap<String, String> = runs
        .iter()
        .map(|(e, _)| (e.run_id.clone(), e.subject_id.clone()))
        .collect();
    let mut rows = Vec::new();
    let mut per_pair: Vec<Vec<CorrResult>> = vec![Vec::new(); PAIRS.len()];
    for (k, _) in PAIRS.iter().enumerate() {
        let results: Vec<&CorrResult> = runs.iter().map(|(_, a)| &a.correlations[k]).collect();
        let p: Vec<f64> = results.iter().map(|c| c.p_two_sided).collect();
        let adj = bonferroni(&p)?;
        for (c, pa) in results.iter().zip(adj) {
            per_pair[k].push((*c).clone());
            let (f, t) = PAIRS[k];
            rows.push(CorrRow {
                run_id: c.run_id.clone(),
                subject_id: subject_of[&c.run_id].clone(),
                feature: f.to_string(),
                target: t.to_string(),
                rho: c.rho,
                n: c.n,
                p_raw: c.p_two_sided,
                p_adj: pa,
                stars: if pa < cfg.alpha {
                    significance_stars(pa).to_string()
                } else {
                    String::new()
                },
            });
        }
    }
    // manifest order within each pair block
    let n_subjects = {
        let mut s: Vec<&String> = subject_of.values().collect();
        s.sort();
        s.dedup();
        s.len()
    };
    if n_subjects < 2 {
        let note = format!("group test needs at least 2 subjects, have {n_subjects}");
        return Ok((rows, Vec::new(), Vec::new(), Some(note)));
    }
    let mut group = Vec::new();
    let mut z_by_pair = Vec::new();
    for (k, (f, t)) in PAIRS.iter().enumerate() {
        let subj = aggregate_within_subject(&per_pair[k], &subject_of, cfg.aggregation)?;
        let r: Vec<f64> = subj.iter().map(|s| s.r).collect();
        group.push(group_test(&pair_label(f, t), &r)?);
        z_by_pair.push(r.iter().map(|&v| fisher_z(v)).collect::<Result<Vec<_>>>()?);
    }
    let comparisons = vec![FeatureComparison {
        first: pair_label(PAIRS[0].0, PAIRS[0].1),
        second: pair_label(PAIRS[1].0, PAIRS[1].1),
        test: two_sample_t_test(&z_by_pair[0], &z_by_pair[1])?,
    }];
    Ok((rows, group, comparisons, None))
}

pub fn run_pipeline(manifest: &Manifest, cfg: &PipelineConfig, opts: RunOptions) -> Result<PipelineOutput> {
    manifest.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<Outcome>> = pool.install(|| {
        use rayon::prelude::*;
        manifest
            .runs
            .par_iter()
            .map(|e| process(e, &manifest.base_dir, cfg, opts.seed))
            .collect()
    });
    let mut runs = Vec::new();
    let mut excluded = Vec::new();
    for (entry, outcome) in manifest.runs.iter().zip(outcomes) {
        match outcome.map_err(|e| match e {
            Error::InvalidInput(msg) => Error::invalid(format!("run '{}': {msg}", entry.run_id)),
            other => other,
        })? {
            Outcome::Done(a) => runs.push((entry.clone(), *a)),
            Outcome::Excluded(reason) => {
                log::info!("run {} excluded: {reason}", entry.run_id);
                excluded.push(ExcludedRun {
                    run_id: entry.run_id.clone(),
                    subject_id: entry.subject_id.clone(),
                    reason,
                })
            }
        }
    }
    let (rows, group, comparisons, group_note) = if runs.is_empty() {
        (
            Vec::new(),
            Vec::new(),
            Vec::new(),
            Some("every run was excluded".to_string()),
        )
    } else {
        summarize(&runs, cfg)?
    };
    Ok(PipelineOutput {
        config: cfg.clone(),
        runs,
        excluded,
        rows,
        group,
        comparisons,
        group_note,
    })
}

/// Writes every result file under `dir`. Nothing here depends on the clock.
pub fn write_outputs(out: &PipelineOutput, dir: &Path) -> Result<()> {
    io::write_json(&dir.join("excluded.json"), &out.excluded)?;
    io::write_json(&dir.join("config_used.json"), &out.config)?;
    if out.all_excluded() {
        return Ok(());
    }
    io::write_text(
        &dir.join("per_run_correlations.csv"),
        &corr_rows_to_csv(&out.rows),
    )?;
    if out.group_note.is_none() {
        io::write_json(&dir.join("group_stats.json"), &out.group)?;
        io::write_json(&dir.join("group_comparisons.json"), &out.comparisons)?;
    }
    let mut normality = String::from("run_id,variable,w,p_value,normal\n");
    for (entry, a) in &out.runs {
        io::write_text(
            &dir.join("features").join(format!("{}.csv", entry.run_id)),
            &a.table.to_csv(),
        )?;
        for r in &a.regressors {
            io::write_text(
                &dir.join("regressors")
                    .join(format!("{}_{}.1D", r.run_id, r.feature)),
                &r.to_1d(),
            )?;
        }
        for n in &a.normality {
            normality.push_str(&format!(
                "{},{},{},{},{}\n",
                entry.run_id,
                n.variable,
                Num(n.w),
                Num(n.p_value),
                n.p_value >= out.config.alpha
            ));
        }
    }
    io::write_text(&dir.join("normality.csv"), &normality)?;
    crate::report::write_report(&dir.join("report"), &out.rows, &out.group, out.config.aggregation)
}
