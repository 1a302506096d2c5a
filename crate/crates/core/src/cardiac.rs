//! R-peak detection and 4-s heart-rate vectors.
//!
//! The detector is a zero-phase variant of the Pan-Tompkins chain: band-pass,
//! central difference, squaring, centred moving integration, then an adaptive
//! threshold at a fraction of the running median of accepted peak heights
//! with a refractory period. Everything is centred so detections carry no
//! group delay.

use crate::num::Num;
use serde::{Deserialize, Serialize};

use crate::dsp::{butterworth, filtfilt_slice, FilterKind};
use crate::error::{Error, Result};
use crate::signal::{UniformSeries, WindowGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub band_hz: [f64; 2],
    pub band_order: usize,
    pub integration_s: f64,
    pub refractory_s: f64,
    pub threshold_fraction: f64,
    /// Number of recent accepted peaks in the running median.
    pub history: usize,
    /// Segment length used to seed the threshold.
    pub learning_s: f64,
    /// Half-width of the search for the band-passed maximum around a detection.
    pub search_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            band_hz: [5.0, 15.0],
            band_order: 2,
            integration_s: 0.15,
            refractory_s: 0.2,
            threshold_fraction: 0.5,
            history: 8,
            learning_s: 2.0,
            search_s: 0.1,
        }
    }
}

/// Detected beat times, strictly increasing and at least a refractory apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RPeaks {
    pub times: Vec<f64>,
    pub indices: Vec<usize>,
}

impl RPeaks {
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("peak times must be strictly increasing"));
        }
        Ok(Self {
            indices: Vec::new(),
            times,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// One time per line.
    pub fn to_text(&self) -> String {
        self.times.iter().map(|&t| format!("{}\n", Num(t))).collect()
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn percentile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(s.len() - 1);
    s[i] + (pos - i as f64) * (s[j] - s[i])
}

pub fn detect_r_peaks(ecg: &UniformSeries) -> Result<RPeaks> {
    detect_r_peaks_with(ecg, &DetectorConfig::default())
}

pub fn detect_r_peaks_with(ecg: &UniformSeries, cfg: &DetectorConfig) -> Result<RPeaks> {
    let fs = ecg.sample_rate();
    if fs < 100.0 {
        return Err(Error::invalid(format!(
            "ECG sample rate must be at least 100 samp/s, got {fs}"
        )));
    }
    if ecg.duration() < 5.0 {
        return Err(Error::TooShort {
            what: "ECG (5 s)",
            needed: (5.0 * fs).ceil() as usize,
            got: ecg.len(),
        });
    }
    let x = ecg.samples();
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var < 1e-18 {
        return Err(Error::NoCardiacActivity);
    }

    let bp_filter = butterworth(FilterKind::Bandpass, cfg.band_order, &cfg.band_hz, fs)?;
    let bp = filtfilt_slice(&bp_filter, x)?;

    let mut energy = vec![0.0; n];
    for i in 1..n - 1 {
        let d = (bp[i + 1] - bp[i - 1]) / 2.0;
        energy[i] = d * d;
    }

    let w = ((cfg.integration_s * fs).round() as usize).max(1);
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + energy[i];
    }
    let integ: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (lo + w).min(n);
            (prefix[hi] - prefix[lo]) / w as f64
        })
        .collect();

    let refractory = (cfg.refractory_s * fs).round() as usize;
    let seg = ((cfg.learning_s * fs).round() as usize).max(1);
    let seg_max: Vec<f64> = integ
        .chunks(seg)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut history = vec![percentile(&seg_max, 0.75)];
    if history[0] <= 0.0 {
        return Err(Error::NoCardiacActivity);
    }

    let mut accepted: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        if !(integ[i] > integ[i - 1] && integ[i] >= integ[i + 1]) {
            continue;
        }
        let thr = cfg.threshold_fraction * median(&history);
        if integ[i] < thr {
            continue;
        }
        match accepted.last() {
            Some(&last) if i - last < refractory => {
                if integ[i] > integ[last] {
                    *accepted.last_mut().unwrap() = i;
                    *history.last_mut().unwrap() = integ[i];
                }
            }
            _ => {
                accepted.push(i);
                history.push(integ[i]);
                if history.len() > cfg.history {
                    history.remove(0);
                }
            }
        }
    }

    // locate the band-passed maximum near each detection
    let radius = (cfg.search_s * fs).round() as usize;
    let mut indices: Vec<usize> = Vec::with_capacity(accepted.len());
    for &c in &accepted {
        let lo = c.saturating_sub(radius);
        let hi = (c + radius).min(n - 1);
        let k = (lo..=hi).max_by(|&a, &b| bp[a].total_cmp(&bp[b])).unwrap();
        match indices.last() {
            Some(&prev) if k <= prev || k - prev < refractory => {
                if bp[k] > bp[prev] {
                    *indices.last_mut().unwrap() = k;
                }
            }
            _ => indices.push(k),
        }
    }

    Ok(RPeaks {
        times: indices.iter().map(|&i| ecg.time_at(i)).collect(),
        indices,
    })
}

/// Windowed heart rate; `interpolated[i]` marks windows that received no RR
/// interval and copy their nearest populated neighbour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeartRateVector {
    pub grid: WindowGrid,
    pub bpm: Vec<f64>,
    pub interpolated: Vec<bool>,
}

impl HeartRateVector {
    /// Windows whose rate lies in the physiological range (20, 250) bpm.
    pub fn valid(&self) -> Vec<bool> {
        self.bpm.iter().map(|&b| b > 20.0 && b < 250.0).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_start_sec,bpm,interpolated\n");
        for ((t, b), f) in self
            .grid
            .window_start_times
            .iter()
            .zip(&self.bpm)
            .zip(&self.interpolated)
        {
            out.push_str(&format!("{},{},{f}\n", Num(*t), Num(*b)));
        }
        out
    }
}

/// Per window, `60 / mean(RR)` over the RR intervals whose midpoint falls in it.
pub fn heart_rate_windows(peaks: &RPeaks, grid: &WindowGrid) -> Result<HeartRateVector> {
    if peaks.len() < 2 {
        return Err(Error::invalid(format!(
            "heart rate needs at least 2 R-peaks, got {}",
            peaks.len()
        )));
    }
    let mut sum = vec![0.0; grid.n_windows];
    let mut count = vec![0usize; grid.n_windows];
    for w in peaks.times.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        if let Some(i) = grid.window_of(mid) {
            sum[i] += w[1] - w[0];
            count[i] += 1;
        }
    }
    let filled: Vec<usize> = (0..grid.n_windows).filter(|&i| count[i] > 0).collect();
    if filled.is_empty() {
        return Err(Error::invalid("no RR interval falls inside the window grid"));
    }
    let own: Vec<f64> = (0..grid.n_windows)
        .map(|i| {
            if count[i] > 0 {
                60.0 / (sum[i] / count[i] as f64)
            } else {
                f64::NAN
            }
        })
        .collect();
    let bpm = (0..grid.n_windows)
        .map(|i| {
            if count[i] > 0 {
                return own[i];
            }
            // nearest populated window, earlier one on ties
            let j = *filled
                .iter()
                .min_by_key(|&&j| (j as i64 - i as i64).abs())
                .unwrap();
            own[j]
        })
        .collect();
    Ok(HeartRateVector {
        grid: grid.clone(),
        bpm,
        interpolated: count.iter().map(|&c| c == 0).collect(),
    })
}
