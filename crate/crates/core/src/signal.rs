//! Time-series types, anti-aliased decimation and fixed-window averaging.

use serde::{Deserialize, Serialize};

use crate::dsp::{butterworth, filtfilt_slice, pad_len, FilterKind};
use crate::error::{Error, Result};

/// Window length used throughout the pipeline, in seconds.
pub const DEFAULT_WINDOW_S: f64 = 4.0;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    start_time: f64,
    dt: f64,
    samples: Vec<f64>,
    label: String,
}

impl UniformSeries {
    pub fn new(start_time: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!(
                "sample interval must be positive, got {dt}"
            )));
        }
        if !start_time.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("series must hold at least one sample"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            start_time,
            dt,
            samples,
            label: String::new(),
        })
    }

    pub fn from_rate(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(0.0, 1.0 / sample_rate_hz, samples)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same grid and label, new values. Lengths may differ.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            start_time: self.start_time,
            dt: self.dt,
            samples,
            label: self.label.clone(),
        }
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `N * dt`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time + i as f64 * self.dt
    }

    /// Index of the sample nearest to time `t`, unclamped.
    pub fn index_of(&self, t: f64) -> i64 {
        ((t - self.start_time) / self.dt).round() as i64
    }

    /// Drops the first `seconds` of the series.
    pub fn trim_start(&self, seconds: f64) -> Result<Self> {
        if seconds < 0.0 {
            return Err(Error::invalid("trim must be non-negative"));
        }
        let k = (seconds / self.dt).round() as usize;
        if k >= self.len() {
            return Err(Error::TooShort {
                what: "series to trim",
                needed: k + 1,
                got: self.len(),
            });
        }
        Ok(Self {
            start_time: self.start_time + k as f64 * self.dt,
            dt: self.dt,
            samples: self.samples[k..].to_vec(),
            label: self.label.clone(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }
}

/// Sorted event times in seconds (volume triggers, R-peaks).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventMarkers(Vec<f64>);

impl EventMarkers {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("marker times must be finite"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("marker times must be sorted"));
        }
        Ok(Self(times))
    }

    /// Evenly spaced markers `start, start + period, ...` strictly before `end`.
    pub fn periodic(start: f64, period: f64, end: f64) -> Self {
        let n = ((end - start) / period - 1e-9).ceil().max(0.0) as usize;
        Self((0..n).map(|i| start + i as f64 * period).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self(self.0.iter().map(|t| t + by).collect())
    }
}

/// Contiguous, equal, non-overlapping analysis windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowGrid {
    pub window_len: f64,
    pub n_windows: usize,
    pub window_start_times: Vec<f64>,
}

impl WindowGrid {
    pub fn new(start_time: f64, window_len: f64, n_windows: usize) -> Result<Self> {
        if !(window_len.is_finite() && window_len > 0.0) {
            return Err(Error::invalid("window length must be positive"));
        }
        Ok(Self {
            window_len,
            n_windows,
            window_start_times: (0..n_windows)
                .map(|i| start_time + i as f64 * window_len)
                .collect(),
        })
    }

    /// All complete windows of `window_len` inside `duration` seconds.
    pub fn covering(start_time: f64, duration: f64, window_len: f64) -> Result<Self> {
        if !(window_len.is_finite() && window_len > 0.0) {
            return Err(Error::invalid("window length must be positive"));
        }
        let n = (duration / window_len + 1e-9).floor().max(0.0) as usize;
        Self::new(start_time, window_len, n)
    }

    /// Grid of complete windows over a series.
    pub fn for_series(s: &UniformSeries, window_len: f64) -> Result<Self> {
        let spw = samples_per_window(s.dt(), window_len)?;
        Self::new(s.start_time(), window_len, s.len() / spw)
    }

    pub fn start_time(&self) -> f64 {
        self.window_start_times.first().copied().unwrap_or_default()
    }

    pub fn end_time(&self) -> f64 {
        self.start_time() + self.n_windows as f64 * self.window_len
    }

    pub fn centres(&self) -> Vec<f64> {
        self.window_start_times
            .iter()
            .map(|t| t + self.window_len / 2.0)
            .collect()
    }

    /// Index of the window holding time `t`, if any.
    pub fn window_of(&self, t: f64) -> Option<usize> {
        let rel = (t - self.start_time()) / self.window_len;
        if rel < 0.0 {
            return None;
        }
        let i = rel.floor() as usize;
        (i < self.n_windows).then_some(i)
    }
}

/// One value per analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub name: String,
    pub grid: WindowGrid,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn samples_per_window(dt: f64, window_len: f64) -> Result<usize> {
    if !(window_len.is_finite() && window_len > 0.0) {
        return Err(Error::invalid("window length must be positive"));
    }
    let spw = (window_len / dt).round();
    if spw < 1.0 || (spw * dt - window_len).abs() > 1e-6 * window_len.max(dt) {
        return Err(Error::invalid(format!(
            "window of {window_len} s is not a whole number of {dt} s samples"
        )));
    }
    Ok(spw as usize)
}

/// Arithmetic mean of every complete window; a trailing partial window is dropped.
pub fn window_mean(s: &UniformSeries, window_len: f64) -> Result<FeatureVector> {
    let grid = WindowGrid::for_series(s, window_len)?;
    window_mean_on(s, &grid)
}

/// Window means on an explicit grid, which must lie inside the series.
pub fn window_mean_on(s: &UniformSeries, grid: &WindowGrid) -> Result<FeatureVector> {
    let spw = samples_per_window(s.dt(), grid.window_len)?;
    if grid.n_windows == 0 {
        return Err(Error::TooShort {
            what: "series for one analysis window",
            needed: spw,
            got: s.len(),
        });
    }
    let offset = s.index_of(grid.start_time());
    let end = offset + (grid.n_windows * spw) as i64;
    if offset < 0 || end > s.len() as i64 {
        return Err(Error::invalid(format!(
            "window grid [{}, {}) s lies outside the series",
            grid.start_time(),
            grid.end_time()
        )));
    }
    let x = &s.samples()[offset as usize..end as usize];
    let values = x
        .chunks_exact(spw)
        .map(|w| w.iter().sum::<f64>() / spw as f64)
        .collect();
    Ok(FeatureVector {
        name: s.label().to_string(),
        grid: grid.clone(),
        values,
    })
}

/// Anti-alias settings for [`decimate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecimateConfig {
    pub order: usize,
    /// Low-pass corner as a fraction of the output sample rate.
    pub cutoff_fraction: f64,
}

impl Default for DecimateConfig {
    fn default() -> Self {
        Self {
            order: 8,
            cutoff_fraction: 0.4,
        }
    }
}

/// Zero-phase Butterworth low-pass then every `factor`-th sample.
pub fn decimate(s: &UniformSeries, factor: usize) -> Result<UniformSeries> {
    decimate_with(s, factor, DecimateConfig::default())
}

pub fn decimate_with(s: &UniformSeries, factor: usize, cfg: DecimateConfig) -> Result<UniformSeries> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be at least 1"));
    }
    if factor == 1 {
        return Ok(s.clone());
    }
    let new_rate = s.sample_rate() / factor as f64;
    let lp = butterworth(
        FilterKind::Lowpass,
        cfg.order,
        &[cfg.cutoff_fraction * new_rate],
        s.sample_rate(),
    )?;
    if s.len() <= pad_len(&lp) {
        return Err(Error::TooShort {
            what: "series for anti-alias filtering",
            needed: pad_len(&lp) + 1,
            got: s.len(),
        });
    }
    let filtered = filtfilt_slice(&lp, s.samples())?;
    let n_out = s.len() / factor;
    let samples = filtered.iter().step_by(factor).take(n_out).copied().collect();
    Ok(UniformSeries {
        start_time: s.start_time,
        dt: s.dt * factor as f64,
        samples,
        label: s.label.clone(),
    })
}
