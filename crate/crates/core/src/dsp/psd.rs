//! Periodogram power spectral density and band-power integration.
//!
//! The estimate on the DFT grid `f_k = k / (N dt)` is
//! `P(f_k) = (dt / N) |sum_n x_n exp(-j 2 pi k n / N)|^2`.
//! The one-sided form doubles every bin except DC and (for even `N`) the
//! Nyquist bin, so that `sum_k P(f_k) df` equals the mean-square of `x`.

use crate::num::Num;
use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::UniformSeries;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detrend {
    #[default]
    None,
    Mean,
    Linear,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    #[default]
    None,
    Hann,
}

/// Pre-processing applied to each segment before the DFT.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsdOptions {
    pub detrend: Detrend,
    pub taper: Taper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    /// Bin spacing `1 / (N dt)`.
    pub df: f64,
    pub one_sided: bool,
    /// Half the sample rate of the source signal.
    pub nyquist: f64,
}

impl Psd {
    /// `sum_k P(f_k) df` over every bin.
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.df
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,power_density\n");
        for (f, p) in self.frequencies.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", Num(*f), Num(*p)));
        }
        out
    }
}

/// Reusable periodogram for a fixed segment length.
pub struct Periodogram {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    options: PsdOptions,
    window: Option<Vec<f64>>,
}

impl Periodogram {
    pub fn new(n: usize, options: PsdOptions) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort {
                what: "periodogram segment",
                needed: 2,
                got: n,
            });
        }
        let fft = FftPlanner::new().plan_fft_forward(n);
        let window = match options.taper {
            Taper::None => None,
            Taper::Hann => Some(
                (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                    .collect(),
            ),
        };
        Ok(Self {
            n,
            fft,
            options,
            window,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Two-sided values for every DFT bin `k = 0..N`.
    pub fn two_sided(&self, x: &[f64], dt: f64) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "periodogram planned for {} samples, got {}",
                self.n,
                x.len()
            )));
        }
        let mut buf: Vec<Complex64> = self.prepare(x).into_iter().map(Complex64::from).collect();
        self.fft.process(&mut buf);
        // With a taper, normalise by the window power so that a white input
        // keeps its density.
        let norm = match &self.window {
            None => dt / self.n as f64,
            Some(w) => dt / w.iter().map(|v| v * v).sum::<f64>(),
        };
        Ok(buf.iter().map(|c| c.norm_sqr() * norm).collect())
    }

    /// One-sided PSD on bins `k = 0..=N/2`.
    pub fn one_sided(&self, x: &[f64], dt: f64) -> Result<Psd> {
        let two = self.two_sided(x, dt)?;
        let n = self.n;
        let n_bins = n / 2 + 1;
        let df = 1.0 / (n as f64 * dt);
        let values = (0..n_bins)
            .map(|k| {
                let is_nyquist = n % 2 == 0 && k == n / 2;
                if k == 0 || is_nyquist {
                    two[k]
                } else {
                    2.0 * two[k]
                }
            })
            .collect();
        Ok(Psd {
            frequencies: (0..n_bins).map(|k| k as f64 * df).collect(),
            values,
            df,
            one_sided: true,
            nyquist: 0.5 / dt,
        })
    }

    fn prepare(&self, x: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        match self.options.detrend {
            Detrend::None => {}
            Detrend::Mean => {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter_mut().for_each(|s| *s -= m);
            }
            Detrend::Linear => {
                let n = v.len() as f64;
                let tm = (n - 1.0) / 2.0;
                let ym = v.iter().sum::<f64>() / n;
                let (mut sty, mut stt) = (0.0, 0.0);
                for (i, &y) in v.iter().enumerate() {
                    let t = i as f64 - tm;
                    sty += t * (y - ym);
                    stt += t * t;
                }
                let slope = sty / stt;
                for (i, s) in v.iter_mut().enumerate() {
                    *s -= ym + slope * (i as f64 - tm);
                }
            }
        }
        if let Some(w) = &self.window {
            v.iter_mut().zip(w).for_each(|(s, w)| *s *= w);
        }
        v
    }
}

/// One-sided periodogram of the whole series, no taper, no detrending.
pub fn periodogram(s: &UniformSeries) -> Result<Psd> {
    Periodogram::new(s.len(), PsdOptions::default())?.one_sided(s.samples(), s.dt())
}

/// Two-sided periodogram on the full DFT grid.
pub fn periodogram_two_sided(s: &UniformSeries) -> Result<Psd> {
    let p = Periodogram::new(s.len(), PsdOptions::default())?;
    let values = p.two_sided(s.samples(), s.dt())?;
    let df = 1.0 / (s.len() as f64 * s.dt());
    Ok(Psd {
        frequencies: (0..s.len()).map(|k| k as f64 * df).collect(),
        values,
        df,
        one_sided: false,
        nyquist: 0.5 / s.dt(),
    })
}

/// Rectangle-rule power in `[lo, hi)`: `sum P(f_k) df` over bins with
/// `lo <= f_k < hi`. When `hi` reaches the Nyquist frequency the Nyquist bin
/// is included, so `[0, nyquist]` integrates the whole spectrum.
pub fn band_power(p: &Psd, lo: f64, hi: f64) -> Result<f64> {
    if !p.one_sided {
        return Err(Error::invalid("band power needs a one-sided PSD"));
    }
    let tol = 1e-9 * p.nyquist;
    if !(lo >= 0.0 && lo < hi && hi <= p.nyquist + tol) {
        return Err(Error::invalid(format!(
            "band [{lo}, {hi}) must satisfy 0 <= lo < hi <= {}",
            p.nyquist
        )));
    }
    let top_closed = hi >= p.nyquist - tol;
    let sum: f64 = p
        .frequencies
        .iter()
        .zip(&p.values)
        .filter(|(&f, _)| f >= lo && (f < hi || (top_closed && f <= hi + tol)))
        .map(|(_, &v)| v)
        .sum();
    Ok(sum * p.df)
}
