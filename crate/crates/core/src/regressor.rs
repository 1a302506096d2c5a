//! HRF convolution of 4-s feature vectors onto the fMRI repetition-time grid.

use crate::num::Num;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::signal::FeatureVector;

/// Double-gamma parameters: peak shape/scale, undershoot shape/scale, ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HrfParams {
    pub peak_shape: f64,
    pub peak_scale: f64,
    pub undershoot_shape: f64,
    pub undershoot_scale: f64,
    pub undershoot_ratio: f64,
    pub duration_s: f64,
}

impl Default for HrfParams {
    fn default() -> Self {
        Self {
            peak_shape: 6.0,
            peak_scale: 1.0,
            undershoot_shape: 16.0,
            undershoot_scale: 1.0,
            undershoot_ratio: 1.0 / 6.0,
            duration_s: 32.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrfKernel {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub duration: f64,
}

fn gamma_pdf(t: f64, shape: f64, scale: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * t.ln() - t / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

/// Canonical double-gamma HRF sampled every `dt` on `[0, 32]` s, peak scaled to 1.
pub fn hrf_kernel(dt: f64) -> Result<HrfKernel> {
    hrf_kernel_with(dt, HrfParams::default())
}

pub fn hrf_kernel_with(dt: f64, p: HrfParams) -> Result<HrfKernel> {
    if !(dt > 0.0 && dt <= 2.0) {
        return Err(Error::invalid(format!(
            "HRF sample interval must be in (0, 2] s, got {dt}"
        )));
    }
    let n = (p.duration_s / dt + 1e-9).floor() as usize + 1;
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            gamma_pdf(t, p.peak_shape, p.peak_scale)
                - p.undershoot_ratio * gamma_pdf(t, p.undershoot_shape, p.undershoot_scale)
        })
        .collect();
    let peak = samples.iter().copied().fold(f64::MIN, f64::max);
    samples.iter_mut().for_each(|v| *v /= peak);
    Ok(HrfKernel {
        dt,
        samples,
        duration: p.duration_s,
    })
}

/// A feature convolved with the HRF, one value per repetition time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    pub run_id: String,
    pub feature: String,
    pub tr: f64,
    pub start_time: f64,
    pub values: Vec<f64>,
}

impl Regressor {
    /// AFNI 1D-style column, one value per line.
    pub fn to_1d(&self) -> String {
        self.values.iter().map(|&v| format!("{}\n", Num(v))).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_sec,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                Num(self.start_time + i as f64 * self.tr),
                Num(*v)
            ));
        }
        out
    }
}

/// Causal convolution `y[k] = sum_j h[j] x[k - j]`, truncated to `x.len()`.
pub fn convolve_hrf(x: &[f64], kernel: &HrfKernel) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            kernel
                .samples
                .iter()
                .take(k + 1)
                .enumerate()
                .map(|(j, h)| h * x[k - j])
                .sum()
        })
        .collect()
}

/// Resamples window values (placed at window centres) onto `t_k = start + k * tr`
/// by linear interpolation, holding the end values outside the centres.
pub fn interpolate_to_tr(feature: &FeatureVector, n_out: usize, tr: f64) -> Vec<f64> {
    let centres = feature.grid.centres();
    let v = &feature.values;
    let start = feature.grid.start_time();
    (0..n_out)
        .map(|k| {
            let t = start + k as f64 * tr;
            if t <= centres[0] {
                return v[0];
            }
            let last = centres.len() - 1;
            if t >= centres[last] {
                return v[last];
            }
            let pos = (t - centres[0]) / feature.grid.window_len;
            let i = (pos.floor() as usize).min(last - 1);
            let frac = pos - i as f64;
            v[i] + frac * (v[i + 1] - v[i])
        })
        .collect()
}

/// Feature on the analysis grid to an HRF-convolved regressor at `tr` seconds.
/// Output length is `floor(duration / tr)`.
pub fn make_regressor(feature: &FeatureVector, duration: f64, tr: f64) -> Result<Regressor> {
    make_regressor_with(feature, duration, tr, HrfParams::default())
}

pub fn make_regressor_with(
    feature: &FeatureVector,
    duration: f64,
    tr: f64,
    hrf: HrfParams,
) -> Result<Regressor> {
    if feature.values.is_empty() {
        return Err(Error::invalid("cannot build a regressor from an empty feature"));
    }
    if !(tr > 0.0) || !(duration > 0.0) {
        return Err(Error::invalid("TR and duration must be positive"));
    }
    let n_out = (duration / tr + 1e-9).floor() as usize;
    let on_grid = interpolate_to_tr(feature, n_out, tr);
    let kernel = hrf_kernel_with(tr, hrf)?;
    Ok(Regressor {
        run_id: String::new(),
        feature: feature.name.clone(),
        tr,
        start_time: feature.grid.start_time(),
        values: convolve_hrf(&on_grid, &kernel),
    })
}
