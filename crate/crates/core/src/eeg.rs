//! EEG cleaning (average artifact subtraction, notch and band-pass filtering)
//! and per-window band-power features averaged over a channel subset.

use crate::num::Num;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{band_power, butterworth, filtfilt, FilterKind, Periodogram, PsdOptions};
use crate::error::{Error, Result};
use crate::signal::{
    decimate_with, samples_per_window, DecimateConfig, EventMarkers, UniformSeries, WindowGrid,
};

/// Frontal and occipital channels used for the default feature set.
pub const DEFAULT_CHANNELS: [&str; 6] = ["F3", "F4", "Fz", "O1", "O2", "Oz"];

/// Equal-grid multichannel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    channels: Vec<UniformSeries>,
}

impl EegRecording {
    /// Channels are identified by their series labels.
    pub fn new(channels: Vec<UniformSeries>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::invalid("recording has no channels"))?;
        for c in &channels[1..] {
            if c.len() != first.len()
                || (c.dt() - first.dt()).abs() > 1e-12 * first.dt()
                || (c.start_time() - first.start_time()).abs() > 1e-9
            {
                return Err(Error::invalid(format!(
                    "channel '{}' is not on the same grid as '{}'",
                    c.label(),
                    first.label()
                )));
            }
        }
        for (i, c) in channels.iter().enumerate() {
            if c.label().is_empty() {
                return Err(Error::invalid(format!("channel {i} has no label")));
            }
            if channels[..i].iter().any(|o| o.label() == c.label()) {
                return Err(Error::invalid(format!("duplicate channel '{}'", c.label())));
            }
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[UniformSeries] {
        &self.channels
    }

    pub fn labels(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.label()).collect()
    }

    pub fn channel(&self, label: &str) -> Option<&UniformSeries> {
        self.channels.iter().find(|c| c.label() == label)
    }

    pub fn sample_rate(&self) -> f64 {
        self.channels[0].sample_rate()
    }

    pub fn dt(&self) -> f64 {
        self.channels[0].dt()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.channels[0].start_time()
    }

    pub fn duration(&self) -> f64 {
        self.channels[0].duration()
    }

    /// Applies `f` to every channel in parallel, keeping channel order.
    pub fn try_map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&UniformSeries) -> Result<UniformSeries> + Sync,
    {
        let channels = self
            .channels
            .par_iter()
            .map(|c| f(c).map(|s| s.with_label(c.label())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels)
    }

    pub fn trim_start(&self, seconds: f64) -> Result<Self> {
        self.try_map(|c| c.trim_start(seconds))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl BandDefinition {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            lo,
            hi,
        }
    }
}

/// delta [0.5, 4), theta [4, 7), alpha [7, 13), beta [13, 30) Hz.
pub fn default_bands() -> Vec<BandDefinition> {
    vec![
        BandDefinition::new("delta", 0.5, 4.0),
        BandDefinition::new("theta", 4.0, 7.0),
        BandDefinition::new("alpha", 7.0, 13.0),
        BandDefinition::new("beta", 13.0, 30.0),
    ]
}

/// Epoch-locked artifact removal.
///
/// Each marker opens an epoch at `marker + delay` whose length is the
/// shortest marker spacing. From every epoch the mean of the
/// `template_len` epochs around it (itself included, clamped at the ends of
/// the recording) is subtracted. Samples outside every epoch are untouched.
pub fn aas_subtract(
    ch: &UniformSeries,
    markers: &EventMarkers,
    template_len: usize,
    delay: f64,
) -> Result<UniformSeries> {
    if markers.len() < 2 {
        return Err(Error::invalid(format!(
            "artifact subtraction needs at least 2 markers, got {}",
            markers.len()
        )));
    }
    if template_len == 0 {
        return Err(Error::invalid("template length must be at least 1 epoch"));
    }
    let starts: Vec<i64> = markers.times().iter().map(|&t| ch.index_of(t + delay)).collect();
    let epoch_len = starts.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    if epoch_len < 1 {
        return Err(Error::invalid("markers closer than one sample"));
    }
    let n = ch.len() as i64;
    if let Some(bad) = starts.iter().position(|&s| s < 0 || s + epoch_len > n) {
        return Err(Error::invalid(format!(
            "epoch of marker {} ({} s) runs outside the series",
            bad,
            markers.times()[bad]
        )));
    }

    let l = epoch_len as usize;
    let m = starts.len();
    let k = template_len.min(m);
    let x = ch.samples();
    let epoch = |i: usize| &x[starts[i] as usize..starts[i] as usize + l];

    let mut out = x.to_vec();
    let mut template = vec![0.0; l];
    for i in 0..m {
        let lo = i.saturating_sub(k / 2).min(m - k);
        template.iter_mut().for_each(|t| *t = 0.0);
        for e in lo..lo + k {
            template.iter_mut().zip(epoch(e)).for_each(|(t, v)| *t += v);
        }
        let s0 = starts[i] as usize;
        for (j, t) in template.iter().enumerate() {
            out[s0 + j] -= t / k as f64;
        }
    }
    Ok(ch.with_samples(out))
}

/// Settings for [`eeg_preprocess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EegPreprocessConfig {
    pub target_rate_hz: f64,
    pub decimate: DecimateConfig,
    pub notch_centers_hz: Vec<f64>,
    pub notch_width_hz: f64,
    pub notch_order: usize,
    pub bandpass_hz: [f64; 2],
    pub bandpass_order: usize,
}

impl Default for EegPreprocessConfig {
    fn default() -> Self {
        let mut notch = slice_harmonics(20.5, 80.0);
        notch.extend([26.0, 60.0]);
        Self {
            target_rate_hz: 250.0,
            decimate: DecimateConfig::default(),
            notch_centers_hz: notch,
            notch_width_hz: 1.0,
            notch_order: 2,
            bandpass_hz: [0.1, 80.0],
            bandpass_order: 4,
        }
    }
}

/// Multiples of `fundamental` up to `limit` Hz.
pub fn slice_harmonics(fundamental: f64, limit: f64) -> Vec<f64> {
    (1..)
        .map(|k| k as f64 * fundamental)
        .take_while(|&f| f <= limit)
        .collect()
}

/// Decimates to the target rate, then applies zero-phase band-stops at every
/// notch centre and a zero-phase band-pass.
pub fn eeg_preprocess(rec: &EegRecording, cfg: &EegPreprocessConfig) -> Result<EegRecording> {
    let fs = rec.sample_rate();
    let ratio = fs / cfg.target_rate_hz;
    let factor = ratio.round();
    if (ratio - factor).abs() > 1e-6 || factor < 1.0 {
        return Err(Error::invalid(format!(
            "sample rate {fs} Hz is not an integer multiple of {} Hz",
            cfg.target_rate_hz
        )));
    }
    let factor = factor as usize;
    let out_rate = fs / factor as f64;

    let mut filters = Vec::with_capacity(cfg.notch_centers_hz.len() + 1);
    for &c in &cfg.notch_centers_hz {
        let half = cfg.notch_width_hz / 2.0;
        filters.push(butterworth(
            FilterKind::Bandstop,
            cfg.notch_order,
            &[c - half, c + half],
            out_rate,
        )?);
    }
    filters.push(butterworth(
        FilterKind::Bandpass,
        cfg.bandpass_order,
        &cfg.bandpass_hz,
        out_rate,
    )?);

    rec.try_map(|c| {
        let mut s = decimate_with(c, factor, cfg.decimate)?;
        for f in &filters {
            s = filtfilt(f, &s)?;
        }
        Ok(s)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EegFeatureRow {
    pub window: usize,
    pub start_time: f64,
    pub alpha_power: f64,
    pub beta_power: f64,
    /// `alpha / (delta + theta)`, NaN when the denominator is zero.
    pub alpha_ratio: f64,
}

/// Per-window features of one run. Pupil and heart-rate columns are
/// attached by the pipeline once those modalities are processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub grid: WindowGrid,
    pub rows: Vec<EegFeatureRow>,
    pub pupil: Option<Vec<f64>>,
    pub heart_rate: Option<Vec<f64>>,
}

impl FeatureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        match name {
            "alpha_power" => Some(self.rows.iter().map(|r| r.alpha_power).collect()),
            "beta_power" => Some(self.rows.iter().map(|r| r.beta_power).collect()),
            "alpha_ratio" => Some(self.rows.iter().map(|r| r.alpha_ratio).collect()),
            "pupil" => self.pupil.clone(),
            "heart_rate" => self.heart_rate.clone(),
            _ => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_start_sec,alpha_power,beta_power,alpha_ratio");
        if self.pupil.is_some() {
            out.push_str(",pupil");
        }
        if self.heart_rate.is_some() {
            out.push_str(",heart_rate");
        }
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}",
                Num(r.start_time),
                Num(r.alpha_power),
                Num(r.beta_power),
                Num(r.alpha_ratio)
            ));
            if let Some(p) = &self.pupil {
                out.push_str(&format!(",{}", Num(p[i])));
            }
            if let Some(h) = &self.heart_rate {
                out.push_str(&format!(",{}", Num(h[i])));
            }
            out.push('\n');
        }
        out
    }
}

/// Per window: periodogram of each selected channel, band power per band,
/// mean over channels; then alpha, beta and alpha/(delta+theta).
pub fn extract_band_features(
    rec: &EegRecording,
    channels: &[&str],
    grid: &WindowGrid,
    bands: &[BandDefinition],
    psd: PsdOptions,
) -> Result<FeatureTable> {
    let missing: Vec<String> = channels
        .iter()
        .filter(|c| rec.channel(c).is_none())
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingChannels(missing));
    }
    if channels.is_empty() {
        return Err(Error::invalid("no channels selected"));
    }
    let band = |name: &str| {
        bands
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::invalid(format!("band '{name}' is not defined")))
    };
    let (delta, theta, alpha, beta) = (band("delta")?, band("theta")?, band("alpha")?, band("beta")?);

    let spw = samples_per_window(rec.dt(), grid.window_len)?;
    if spw < 2 {
        return Err(Error::invalid("analysis window holds fewer than 2 samples"));
    }
    let offset = rec.channels()[0].index_of(grid.start_time());
    if offset < 0 || offset as usize + grid.n_windows * spw > rec.len() {
        return Err(Error::invalid("window grid lies outside the recording"));
    }
    let offset = offset as usize;
    let estimator = Periodogram::new(spw, psd)?;
    let selected: Vec<&UniformSeries> = channels.iter().map(|c| rec.channel(c).unwrap()).collect();

    let rows = (0..grid.n_windows)
        .into_par_iter()
        .map(|w| {
            let lo = offset + w * spw;
            let mut mean = vec![0.0; bands.len()];
            for ch in &selected {
                let p = estimator.one_sided(&ch.samples()[lo..lo + spw], rec.dt())?;
                for (m, b) in mean.iter_mut().zip(bands) {
                    *m += band_power(&p, b.lo, b.hi)?;
                }
            }
            mean.iter_mut().for_each(|m| *m /= selected.len() as f64);
            let denom = mean[delta] + mean[theta];
            Ok(EegFeatureRow {
                window: w,
                start_time: grid.window_start_times[w],
                alpha_power: mean[alpha],
                beta_power: mean[beta],
                alpha_ratio: if denom > 0.0 {
                    mean[alpha] / denom
                } else {
                    f64::NAN
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FeatureTable {
        grid: grid.clone(),
        rows,
        pupil: None,
        heart_rate: None,
    })
}
