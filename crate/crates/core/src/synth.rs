//! Deterministic coupled EEG / pupil / ECG sessions with known latent vigilance.
//!
//! Every signal draws from its own ChaCha stream, selected by hashing the
//! signal's name, so adding a signal never perturbs the others and a seed
//! reproduces a session bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cardiac::{heart_rate_windows, RPeaks};
use crate::dsp::{butterworth, sosfilt, FilterKind};
use crate::eeg::{EegRecording, DEFAULT_CHANNELS};
use crate::error::{Error, Result};
use crate::pupil::GappySeries;
use crate::signal::{EventMarkers, UniformSeries, WindowGrid};

/// Independent random stream for one named signal.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a: stable across platforms and releases
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Latent vigilance on a 4-s grid: an Ornstein-Uhlenbeck process with time
/// constant `smoothness` and stationary SD `noise`, squashed by the logistic
/// function. Starts from the stationary distribution.
pub fn gen_latent_vigilance(seed: u64, duration: f64, smoothness: f64, noise: f64) -> Result<Vec<f64>> {
    gen_latent_vigilance_on(seed, duration, 4.0, smoothness, noise)
}

pub fn gen_latent_vigilance_on(
    seed: u64,
    duration: f64,
    step: f64,
    smoothness: f64,
    noise: f64,
) -> Result<Vec<f64>> {
    if duration < 60.0 {
        return Err(Error::invalid("latent vigilance needs at least 60 s"));
    }
    if !(smoothness > 0.0 && noise >= 0.0 && step > 0.0) {
        return Err(Error::invalid(
            "smoothness and step must be positive, noise non-negative",
        ));
    }
    let n = (duration / step - 1e-9).ceil() as usize;
    let mut rng = substream(seed, "vigilance");
    let decay = (-step / smoothness).exp();
    let innov = noise * (1.0 - decay * decay).sqrt();
    let mut x = noise * rng.sample::<f64, _>(StandardNormal);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(1.0 / (1.0 + (-x).exp()));
        x = decay * x + innov * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Gains {
    /// Beta-band amplitude factor `1 + beta * v`.
    pub beta: f64,
    /// Alpha-band amplitude factor `1 + alpha * v`.
    pub alpha: f64,
    /// Pupil size change per unit vigilance, in pupil units.
    pub pupil: f64,
    /// Heart rate `60 + hr * v` bpm.
    pub hr: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            beta: 1.0,
            alpha: 0.5,
            pupil: 100.0,
            hr: 20.0,
        }
    }
}

impl Gains {
    pub fn zero() -> Self {
        Self {
            beta: 0.0,
            alpha: 0.0,
            pupil: 0.0,
            hr: 0.0,
        }
    }
}

/// RMS amplitudes (µV) of the EEG background components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EegLevels {
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub white: f64,
}

impl Default for EegLevels {
    fn default() -> Self {
        Self {
            delta: 20.0,
            theta: 10.0,
            alpha: 10.0,
            beta: 5.0,
            white: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthParams {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub channels: Vec<String>,
    pub window_s: f64,
    pub smoothness_s: f64,
    pub vigilance_noise: f64,
    /// Explicit latent vigilance per window, replacing the random walk.
    pub latent: Option<Vec<f64>>,
    pub gains: Gains,
    pub eeg: EegLevels,
    pub pupil_baseline: f64,
    /// SD of the slow (OU) pupil fluctuation independent of vigilance.
    pub pupil_noise: f64,
    pub pupil_noise_tau_s: f64,
    pub blink_rate_per_min: f64,
    pub blink_duration_s: [f64; 2],
    pub ecg_snr_db: f64,
    /// SD (bpm) of a slow heart-rate fluctuation independent of vigilance.
    pub hr_noise_bpm: f64,
    pub hr_noise_tau_s: f64,
    pub tr_s: f64,
    /// Peak amplitude of the trigger-locked 20.5 Hz artifact; 0 disables it.
    pub gradient_amplitude: f64,
    pub gradient_freq_hz: f64,
}

impl Default for TruthParams {
    fn default() -> Self {
        Self {
            duration_s: 720.0,
            sample_rate_hz: 250.0,
            channels: DEFAULT_CHANNELS.iter().map(|c| c.to_string()).collect(),
            window_s: 4.0,
            smoothness_s: 120.0,
            vigilance_noise: 1.0,
            latent: None,
            gains: Gains::default(),
            eeg: EegLevels::default(),
            pupil_baseline: 1000.0,
            pupil_noise: 5.0,
            pupil_noise_tau_s: 5.0,
            blink_rate_per_min: 12.0,
            blink_duration_s: [0.1, 0.4],
            ecg_snr_db: 10.0,
            hr_noise_bpm: 1.0,
            hr_noise_tau_s: 60.0,
            tr_s: 2.0,
            gradient_amplitude: 0.0,
            gradient_freq_hz: 20.5,
        }
    }
}

impl TruthParams {
    /// Same geometry and noise, every coupling switched off.
    pub fn null() -> Self {
        Self {
            gains: Gains::zero(),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let g = &self.gains;
        if [g.beta, g.alpha, g.pupil, g.hr].iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("coupling gains must be non-negative"));
        }
        if self.hr_noise_bpm < 0.0 || !(self.hr_noise_tau_s > 0.0) {
            return Err(Error::invalid(
                "heart-rate noise must be non-negative with positive time constant",
            ));
        }
        if self.blink_rate_per_min < 0.0 {
            return Err(Error::invalid("blink rate must be non-negative"));
        }
        let [lo, hi] = self.blink_duration_s;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::invalid("blink durations must satisfy 0 < min <= max"));
        }
        if self.channels.is_empty() {
            return Err(Error::invalid("at least one EEG channel is required"));
        }
        if !(self.sample_rate_hz >= 100.0) {
            return Err(Error::invalid("sample rate must be at least 100 samp/s"));
        }
        Ok(())
    }
}

/// Ground truth behind a synthetic session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub seed: u64,
    pub window_s: f64,
    /// Latent vigilance per window, piecewise constant in time.
    pub vigilance: Vec<f64>,
    /// Configured heart rate per window (bpm).
    pub heart_rate: Vec<f64>,
    pub beat_times: Vec<f64>,
    pub gains: Gains,
    pub eeg_levels: EegLevels,
    pub pupil_noise: f64,
    pub ecg_snr_db: f64,
}

impl SessionTruth {
    pub fn vigilance_at(&self, t: f64) -> f64 {
        self.vigilance[self.step_of(t)]
    }

    fn step_of(&self, t: f64) -> usize {
        ((t / self.window_s).floor().max(0.0) as usize).min(self.vigilance.len() - 1)
    }

    /// Configured instantaneous heart rate.
    pub fn heart_rate_at(&self, t: f64) -> f64 {
        self.heart_rate[self.step_of(t)]
    }

    /// Heart rate of the true beats on `grid`, by the same RR-midpoint rule
    /// the detector output is scored with.
    pub fn heart_rate_on(&self, grid: &WindowGrid) -> Result<Vec<f64>> {
        let peaks = RPeaks::from_times(self.beat_times.clone())?;
        Ok(heart_rate_windows(&peaks, grid)?.bpm)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub eeg: EegRecording,
    pub pupil: GappySeries,
    pub ecg: UniformSeries,
    pub triggers: EventMarkers,
    pub truth: SessionTruth,
}

fn band_noise(rng: &mut ChaCha8Rng, n: usize, band: [f64; 2], fs: f64, rms: f64) -> Result<Vec<f64>> {
    let f = butterworth(FilterKind::Bandpass, 4, &band, fs)?;
    // one second of burn-in so the causal filter starts in steady state
    let burn = fs as usize;
    let white = normals(rng, n + burn);
    let y = sosfilt(&f.sections, &white, None);
    let y = &y[burn..];
    let cur = (y.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    Ok(y.iter().map(|v| v * rms / cur).collect())
}

/// Beat times for a rate (bpm) held constant over each window.
fn beat_times(bpm: &[f64], window_s: f64, duration: f64) -> Vec<f64> {
    let mut beats = Vec::new();
    let mut phase = 0.5;
    for (w, &hr) in bpm.iter().enumerate() {
        let t0 = w as f64 * window_s;
        if t0 >= duration {
            break;
        }
        let t1 = (t0 + window_s).min(duration);
        let rate = hr / 60.0;
        let end_phase = phase + rate * (t1 - t0);
        let mut k = phase.floor() + 1.0;
        while k <= end_phase {
            beats.push(t0 + (k - phase) / rate);
            k += 1.0;
        }
        phase = end_phase;
    }
    beats
}

/// Gaussian-wave PQRST complex, amplitude in mV, offsets in seconds from R.
fn ecg_template(t: f64) -> f64 {
    const WAVES: [(f64, f64, f64); 5] = [
        (0.10, -0.16, 0.025),   // P
        (-0.12, -0.025, 0.008), // Q
        (1.00, 0.0, 0.010),     // R
        (-0.25, 0.025, 0.008),  // S
        (0.30, 0.26, 0.040),    // T
    ];
    WAVES
        .iter()
        .map(|(a, mu, sd)| a * (-0.5 * ((t - mu) / sd).powi(2)).exp())
        .sum()
}

pub fn gen_session(seed: u64, params: &TruthParams) -> Result<SyntheticSession> {
    params.validate()?;
    let fs = params.sample_rate_hz;
    let dt = 1.0 / fs;
    let n = (params.duration_s * fs).round() as usize;
    let vig = match &params.latent {
        Some(v) => {
            let need = (params.duration_s / params.window_s - 1e-9).ceil() as usize;
            if v.len() < need || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::invalid(format!(
                    "latent vigilance needs {need} values in [0, 1]"
                )));
            }
            v[..need].to_vec()
        }
        None => gen_latent_vigilance_on(
            seed,
            params.duration_s,
            params.window_s,
            params.smoothness_s,
            params.vigilance_noise,
        )?,
    };
    let window_samples = (params.window_s * fs).round() as usize;
    let v_at: Vec<f64> = (0..n)
        .map(|i| vig[(i / window_samples).min(vig.len() - 1)])
        .collect();
    let triggers = EventMarkers::periodic(0.0, params.tr_s, params.duration_s);

    // EEG
    let lv = params.eeg;
    let g = params.gains;
    let mut channels = Vec::with_capacity(params.channels.len());
    for label in &params.channels {
        let mut rng = substream(seed, &format!("eeg/{label}"));
        let delta = band_noise(&mut rng, n, [1.0, 4.0], fs, lv.delta)?;
        let theta = band_noise(&mut rng, n, [4.0, 7.0], fs, lv.theta)?;
        let alpha = band_noise(&mut rng, n, [8.0, 12.0], fs, lv.alpha)?;
        let beta = band_noise(&mut rng, n, [13.0, 30.0], fs, lv.beta)?;
        let white = normals(&mut rng, n);
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                let mut s = delta[i]
                    + theta[i]
                    + alpha[i] * (1.0 + g.alpha * v_at[i])
                    + beta[i] * (1.0 + g.beta * v_at[i])
                    + lv.white * white[i];
                if params.gradient_amplitude > 0.0 {
                    let tau = t % params.tr_s;
                    let w = 2.0 * std::f64::consts::PI * params.gradient_freq_hz * tau;
                    s += params.gradient_amplitude * (w.sin() + 0.5 * (2.0 * w).sin());
                }
                s
            })
            .collect();
        channels.push(UniformSeries::new(0.0, dt, x)?.with_label(label.as_str()));
    }
    let eeg = EegRecording::new(channels)?;

    // pupil: baseline + coupling + slow OU noise, with blink gaps
    let mut rng = substream(seed, "pupil");
    let decay = (-dt / params.pupil_noise_tau_s).exp();
    let innov = params.pupil_noise * (1.0 - decay * decay).sqrt();
    let mut ou = params.pupil_noise * rng.sample::<f64, _>(StandardNormal);
    let mut pupil: Vec<f64> = Vec::with_capacity(n);
    for &v in v_at.iter() {
        pupil.push(params.pupil_baseline + g.pupil * v + ou);
        ou = decay * ou + innov * rng.sample::<f64, _>(StandardNormal);
    }
    let mut missing = vec![false; n];
    if params.blink_rate_per_min > 0.0 {
        let mut rng = substream(seed, "blinks");
        let mean_gap = 60.0 / params.blink_rate_per_min;
        let [lo, hi] = params.blink_duration_s;
        let mut t = 0.0;
        loop {
            let u: f64 = rng.random::<f64>();
            t += -mean_gap * (1.0 - u).ln();
            if t >= params.duration_s {
                break;
            }
            let len = lo + (hi - lo) * rng.random::<f64>();
            let a = (t * fs).round() as usize;
            let b = (((t + len) * fs).round() as usize).min(n);
            missing[a.min(n)..b].iter_mut().for_each(|m| *m = true);
        }
    }
    for (p, &m) in pupil.iter_mut().zip(&missing) {
        if m {
            *p = f64::NAN;
        }
    }
    let pupil = GappySeries::new(0.0, dt, pupil, missing)?;

    // ECG
    let mut rng = substream(seed, "heart_rate");
    let decay = (-params.window_s / params.hr_noise_tau_s).exp();
    let innov = params.hr_noise_bpm * (1.0 - decay * decay).sqrt();
    let mut wander = params.hr_noise_bpm * rng.sample::<f64, _>(StandardNormal);
    let mut bpm = Vec::with_capacity(vig.len());
    for &v in &vig {
        bpm.push(60.0 + g.hr * v + wander);
        wander = decay * wander + innov * rng.sample::<f64, _>(StandardNormal);
    }
    let beats = beat_times(&bpm, params.window_s, params.duration_s);
    let mut clean = vec![0.0; n];
    let (pre, post) = ((0.4 * fs) as i64, (0.6 * fs) as i64);
    for &b in &beats {
        let c = (b * fs).floor() as i64;
        for i in (c - pre).max(0)..(c + post).min(n as i64) {
            clean[i as usize] += ecg_template(i as f64 * dt - b);
        }
    }
    let power = clean.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let sigma = (power / 10f64.powf(params.ecg_snr_db / 10.0)).sqrt();
    let mut rng = substream(seed, "ecg");
    let ecg: Vec<f64> = clean
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let ecg = UniformSeries::new(0.0, dt, ecg)?.with_label("ecg");

    Ok(SyntheticSession {
        eeg,
        pupil,
        ecg,
        triggers,
        truth: SessionTruth {
            seed,
            window_s: params.window_s,
            vigilance: vig,
            heart_rate: bpm,
            beat_times: beats,
            gains: g,
            eeg_levels: lv,
            pupil_noise: params.pupil_noise,
            ecg_snr_db: params.ecg_snr_db,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_half() {
        let v = gen_latent_vigilance(7, 720.0, 60.0, 0.0).unwrap();
        assert_eq!(v.len(), 180);
        assert!(v.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn same_seed_same_series() {
        let a = gen_latent_vigilance(11, 300.0, 60.0, 1.0).unwrap();
        let b = gen_latent_vigilance(11, 300.0, 60.0, 1.0).unwrap();
        let c = gen_latent_vigilance(12, 300.0, 60.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn short_duration_rejected() {
        assert!(gen_latent_vigilance(1, 30.0, 60.0, 1.0).is_err());
    }

    #[test]
    fn substreams_differ() {
        let mut a = substream(5, "eeg/F3");
        let mut b = substream(5, "eeg/F4");
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn beats_follow_rate() {
        let beats = beat_times(&[70.0; 30], 4.0, 120.0);
        // 70 bpm for 120 s, first beat half a period in
        assert_eq!(beats.len(), 140);
        let rr = beats[1] - beats[0];
        assert!((rr - 60.0 / 70.0).abs() < 1e-12);
    }

    #[test]
    fn negative_gain_rejected() {
        let mut p = TruthParams::default();
        p.gains.beta = -1.0;
        assert!(gen_session(1, &p).is_err());
    }
}
