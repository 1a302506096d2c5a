//! Butterworth IIR design by bilinear transform with frequency prewarping.
//!
//! Filters are realised as cascaded second-order sections. Each section is
//! normalised to unit gain at a reference frequency inside the passband
//! (DC, Nyquist or the band centre), so the cascade reaches unit passband gain
//! without ever forming the full transfer-function polynomial. At a
//! 0.01 Hz corner with 250 samp/s the expanded polynomial would lose most of
//! its significant digits; the sections do not.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Lowpass,
    Highpass,
    Bandpass,
    Bandstop,
}

impl FilterKind {
    fn n_cutoffs(self) -> usize {
        match self {
            FilterKind::Lowpass | FilterKind::Highpass => 1,
            FilterKind::Bandpass | FilterKind::Bandstop => 2,
        }
    }
}

/// One direct-form-II-transposed biquad, `a[0] == 1`.
///
/// First-order sections are stored with `b[2] == a[2] == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn order(&self) -> usize {
        if self.a[2] == 0.0 && self.b[2] == 0.0 {
            1
        } else {
            2
        }
    }

    /// Frequency response at normalised angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z1 * self.a[1] + z2 * self.a[2];
        num / den
    }

    /// Roots of the denominator in the z-plane.
    pub fn poles(&self) -> Vec<Complex64> {
        let (a1, a2) = (self.a[1], self.a[2]);
        if a2 == 0.0 {
            return vec![Complex64::new(-a1, 0.0)];
        }
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        vec![(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    fn scaled(mut self, gain: f64) -> Self {
        for b in &mut self.b {
            *b *= gain;
        }
        self
    }
}

/// A designed Butterworth filter. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IirFilter {
    pub kind: FilterKind,
    pub order: usize,
    pub cutoffs_hz: Vec<f64>,
    pub sample_rate_hz: f64,
    pub sections: Vec<Biquad>,
}

impl IirFilter {
    /// Complex response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(w))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(Biquad::poles).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    /// Total order of the digital cascade (number of poles).
    pub fn digital_order(&self) -> usize {
        self.sections.iter().map(Biquad::order).sum()
    }

    /// Expanded numerator and denominator polynomials in `z^-1`.
    pub fn transfer_function(&self) -> (Vec<f64>, Vec<f64>) {
        let mut b = vec![1.0];
        let mut a = vec![1.0];
        for s in &self.sections {
            let k = s.order() + 1;
            b = poly_mul(&b, &s.b[..k]);
            a = poly_mul(&a, &s.a[..k]);
        }
        (b, a)
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Designs a digital Butterworth filter.
///
/// `cutoffs_hz` holds one corner for low/high-pass and an ordered pair for
/// band-pass/band-stop. For band filters `order` is the order of the
/// low-pass prototype, so the digital filter has `2 * order` poles.
pub fn butterworth(
    kind: FilterKind,
    order: usize,
    cutoffs_hz: &[f64],
    sample_rate_hz: f64,
) -> Result<IirFilter> {
    if order == 0 {
        return Err(Error::invalid("filter order must be at least 1"));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if cutoffs_hz.len() != kind.n_cutoffs() {
        return Err(Error::invalid(format!(
            "{kind:?} needs {} cutoff(s), got {}",
            kind.n_cutoffs(),
            cutoffs_hz.len()
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    for &c in cutoffs_hz {
        if !(c > 0.0 && c < nyquist) {
            return Err(Error::invalid(format!(
                "cutoff {c} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)"
            )));
        }
    }
    if cutoffs_hz.len() == 2 && cutoffs_hz[0] >= cutoffs_hz[1] {
        return Err(Error::invalid(format!(
            "band edges must be strictly increasing, got {:?}",
            cutoffs_hz
        )));
    }

    let fs2 = 2.0 * sample_rate_hz;
    let warp = |f: f64| fs2 * (PI * f / sample_rate_hz).tan();
    let bilinear = |s: Complex64| (fs2 + s) / (fs2 - s);

    // Prototype poles in the upper half plane, plus the real pole for odd orders.
    let proto_pairs: Vec<Complex64> = (0..order / 2)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    let has_real = order % 2 == 1;

    let mut sections = Vec::with_capacity(order);
    match kind {
        FilterKind::Lowpass | FilterKind::Highpass => {
            let wc = warp(cutoffs_hz[0]);
            let map = |p: Complex64| match kind {
                FilterKind::Lowpass => p * wc,
                _ => wc / p,
            };
            // zeros at z = -1 (low-pass) or z = +1 (high-pass)
            let zsign = if kind == FilterKind::Lowpass { 1.0 } else { -1.0 };
            // unit gain at DC (low-pass) or Nyquist (high-pass)
            let w_ref = if kind == FilterKind::Lowpass { 0.0 } else { PI };
            for &p in &proto_pairs {
                let z = bilinear(map(p));
                let raw = Biquad {
                    b: [1.0, 2.0 * zsign, 1.0],
                    a: [1.0, -2.0 * z.re, z.norm_sqr()],
                };
                sections.push(normalise(raw, w_ref));
            }
            if has_real {
                let z = bilinear(map(Complex64::new(-1.0, 0.0)));
                let raw = Biquad {
                    b: [1.0, zsign, 0.0],
                    a: [1.0, -z.re, 0.0],
                };
                sections.push(normalise(raw, w_ref));
            }
        }
        FilterKind::Bandpass | FilterKind::Bandstop => {
            let w1 = warp(cutoffs_hz[0]);
            let w2 = warp(cutoffs_hz[1]);
            let w0sq = w1 * w2;
            let bw = w2 - w1;
            // digital image of the analog centre frequency
            let w_centre = 2.0 * (w0sq.sqrt() / fs2).atan();
            let (numer, w_ref) = if kind == FilterKind::Bandpass {
                ([1.0, 0.0, -1.0], w_centre)
            } else {
                ([1.0, -2.0 * w_centre.cos(), 1.0], 0.0)
            };
            // Each prototype pole p maps to the two roots of
            // s^2 - c s + w0^2 = 0, with c = p*bw (band-pass) or bw/p (band-stop).
            let roots = |p: Complex64| {
                let c = if kind == FilterKind::Bandpass {
                    p * bw
                } else {
                    bw / p
                };
                let disc = (c * c - 4.0 * w0sq).sqrt();
                ((c + disc) / 2.0, (c - disc) / 2.0)
            };
            for &p in &proto_pairs {
                let (s1, s2) = roots(p);
                for s in [s1, s2] {
                    let z = bilinear(s);
                    let raw = Biquad {
                        b: numer,
                        a: [1.0, -2.0 * z.re, z.norm_sqr()],
                    };
                    sections.push(normalise(raw, w_ref));
                }
            }
            if has_real {
                // The real prototype pole gives a conjugate pair for narrow
                // bands and two real poles for wide ones; either way the pair
                // forms one real section.
                let (s1, s2) = roots(Complex64::new(-1.0, 0.0));
                let (z1, z2) = (bilinear(s1), bilinear(s2));
                let raw = Biquad {
                    b: numer,
                    a: [1.0, -(z1 + z2).re, (z1 * z2).re],
                };
                sections.push(normalise(raw, w_ref));
            }
        }
    }

    Ok(IirFilter {
        kind,
        order,
        cutoffs_hz: cutoffs_hz.to_vec(),
        sample_rate_hz,
        sections,
    })
}

fn normalise(section: Biquad, w_ref: f64) -> Biquad {
    let g = section.response(w_ref).norm();
    section.scaled(1.0 / g)
}
