//! Pupil-size cleaning: gap detection, moving-median fill, slow band-pass and
//! the missing-data exclusion rule.

use serde::{Deserialize, Serialize};

use crate::dsp::{butterworth, filtfilt, FilterKind};
use crate::error::{Error, Result};
use crate::signal::{window_mean_on, FeatureVector, UniformSeries, WindowGrid};

/// Uniform series with an explicit missing-sample mask.
#[derive(Debug, Clone, PartialEq)]
pub struct GappySeries {
    pub start_time: f64,
    pub dt: f64,
    samples: Vec<f64>,
    missing: Vec<bool>,
}

impl GappySeries {
    /// Missing samples may hold any value, including NaN.
    pub fn new(start_time: f64, dt: f64, samples: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        if samples.len() != missing.len() {
            return Err(Error::invalid("mask length differs from sample length"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("series must hold at least one sample"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("sample interval must be positive"));
        }
        if let Some(i) = (0..samples.len()).find(|&i| !missing[i] && !samples[i].is_finite()) {
            return Err(Error::invalid(format!("non-finite unmasked sample at {i}")));
        }
        Ok(Self {
            start_time,
            dt,
            samples,
            missing,
        })
    }

    /// Non-finite values become missing.
    pub fn from_raw(start_time: f64, dt: f64, raw: Vec<f64>) -> Result<Self> {
        let missing = raw.iter().map(|v| !v.is_finite()).collect();
        Self::new(start_time, dt, raw, missing)
    }

    pub fn from_series(s: &UniformSeries) -> Self {
        Self {
            start_time: s.start_time(),
            dt: s.dt(),
            samples: s.samples().to_vec(),
            missing: vec![false; s.len()],
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// Sample values with missing entries as NaN.
    pub fn values_with_nan(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(&self.missing)
            .map(|(&v, &m)| if m { f64::NAN } else { v })
            .collect()
    }

    pub fn gap_report(&self) -> GapReport {
        let mut gaps = Vec::new();
        let mut i = 0;
        while i < self.missing.len() {
            if self.missing[i] {
                let start = i;
                while i < self.missing.len() && self.missing[i] {
                    i += 1;
                }
                gaps.push(Gap {
                    start,
                    len: i - start,
                });
            } else {
                i += 1;
            }
        }
        let n_missing: usize = gaps.iter().map(|g| g.len).sum();
        GapReport {
            largest_gap: gaps.iter().map(|g| g.len).max().unwrap_or(0),
            n_missing,
            n_samples: self.len(),
            missing_fraction: n_missing as f64 / self.len() as f64,
            gaps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
    pub largest_gap: usize,
    pub n_missing: usize,
    pub n_samples: usize,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Exclusion {
    Keep,
    Exclude { reason: String },
}

impl Exclusion {
    pub fn is_keep(&self) -> bool {
        matches!(self, Exclusion::Keep)
    }

    /// Exclude iff strictly more than one third of the run is missing.
    pub fn from_fraction(missing_fraction: f64) -> Self {
        if missing_fraction > 1.0 / 3.0 {
            Exclusion::Exclude {
                reason: format!("missing fraction {missing_fraction:.3} exceeds one third"),
            }
        } else {
            Exclusion::Keep
        }
    }
}

/// Counts are compared exactly (`3 * missing > n`), so a run at precisely
/// one third missing is kept.
pub fn check_exclusion(g: &GappySeries) -> Exclusion {
    let r = g.gap_report();
    if 3 * r.n_missing > r.n_samples {
        Exclusion::Exclude {
            reason: format!("missing fraction {:.3} exceeds one third", r.missing_fraction),
        }
    } else {
        Exclusion::Keep
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Replaces each missing sample by the median of the valid samples in a
/// centred window of `max(3, 2 * largest_gap)` samples.
///
/// For an even window `w` the window spans `[i - w/2, i + w/2 - 1]`. It is
/// truncated at the series ends; when it holds no valid sample it grows by
/// one on each side until it does.
pub fn fill_missing_moving_median(g: &GappySeries) -> Result<UniformSeries> {
    let report = g.gap_report();
    if report.n_missing == g.len() {
        return Err(Error::invalid("every sample is missing"));
    }
    let w = (2 * report.largest_gap).max(3) as i64;
    let n = g.len() as i64;
    let mut out = g.samples.clone();
    let mut buf = Vec::with_capacity(w as usize);
    for gap in &report.gaps {
        for i in gap.start..gap.start + gap.len {
            let i = i as i64;
            let mut lo = i - w / 2;
            let mut hi = lo + w - 1;
            loop {
                buf.clear();
                let a = lo.max(0) as usize;
                let b = hi.min(n - 1) as usize;
                buf.extend((a..=b).filter(|&k| !g.missing[k]).map(|k| g.samples[k]));
                if !buf.is_empty() {
                    break;
                }
                lo -= 1;
                hi += 1;
            }
            out[i as usize] = median(&mut buf);
        }
    }
    Ok(UniformSeries::new(g.start_time, g.dt, out)?.with_label("pupil"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PupilConfig {
    pub band_hz: [f64; 2],
    pub order: usize,
}

impl Default for PupilConfig {
    fn default() -> Self {
        Self {
            band_hz: [0.01, 0.1],
            order: 3,
        }
    }
}

/// Fill, zero-phase band-pass, band-passed trace (before windowing).
pub fn clean_pupil(g: &GappySeries, cfg: &PupilConfig) -> Result<UniformSeries> {
    if let Exclusion::Exclude { reason } = check_exclusion(g) {
        return Err(Error::Excluded(reason));
    }
    let filled = fill_missing_moving_median(g)?;
    let bp = butterworth(FilterKind::Bandpass, cfg.order, &cfg.band_hz, 1.0 / g.dt)?;
    filtfilt(&bp, &filled)
}

/// Exclusion check, fill, band-pass, then the mean of every window of `grid`.
pub fn pupil_preprocess(g: &GappySeries, grid: &WindowGrid, cfg: &PupilConfig) -> Result<FeatureVector> {
    let clean = clean_pupil(g, cfg)?;
    let mut v = window_mean_on(&clean, grid)?;
    v.name = "pupil".into();
    Ok(v)
}
