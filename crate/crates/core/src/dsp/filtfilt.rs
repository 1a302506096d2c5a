//! Causal and zero-phase (forward-backward) application of biquad cascades.

use crate::dsp::butterworth::{Biquad, IirFilter};
use crate::error::{Error, Result};
use crate::signal::UniformSeries;

/// Runs the cascade causally over `x`, starting from per-section states `zi`
/// (two entries per section). Passing `None` starts from rest.
pub fn sosfilt(sections: &[Biquad], x: &[f64], zi: Option<&[[f64; 2]]>) -> Vec<f64> {
    let mut y = x.to_vec();
    for (k, s) in sections.iter().enumerate() {
        let [mut z1, mut z2] = zi.map(|z| z[k]).unwrap_or([0.0, 0.0]);
        let [b0, b1, b2] = s.b;
        let [_, a1, a2] = s.a;
        for v in y.iter_mut() {
            let xin = *v;
            let out = b0 * xin + z1;
            z1 = b1 * xin - a1 * out + z2;
            z2 = b2 * xin - a2 * out;
            *v = out;
        }
    }
    y
}

/// Section states for which a unit step input is already in steady state.
pub fn sosfilt_zi(sections: &[Biquad]) -> Vec<[f64; 2]> {
    let mut gain_in = 1.0;
    sections
        .iter()
        .map(|s| {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let y = dc * gain_in;
            let z2 = b2 * gain_in - a2 * y;
            let z1 = b1 * gain_in - a1 * y + z2;
            gain_in = y;
            [z1, z2]
        })
        .collect()
}

/// Shortest padding; a series must be longer than this to be filtered.
pub fn pad_len(filter: &IirFilter) -> usize {
    3 * (filter.digital_order() + 1)
}

/// Samples for the slowest pole to decay by 1e-10.
pub fn ring_len(filter: &IirFilter) -> usize {
    let r = filter.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
    if r <= 0.0 {
        return 0;
    }
    (1e-10f64.ln() / r.ln()).ceil() as usize
}

/// Zero-phase filtering of a bare slice. See [`filtfilt`].
pub fn filtfilt_slice(filter: &IirFilter, x: &[f64]) -> Result<Vec<f64>> {
    let min_pad = pad_len(filter);
    if x.len() <= min_pad {
        return Err(Error::TooShort {
            what: "series for zero-phase filtering",
            needed: min_pad + 1,
            got: x.len(),
        });
    }
    let n = x.len();
    let pad = min_pad.max(ring_len(filter)).min(n - 1);

    // even reflection: no level step at the ends, so no slow transient
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| x[n - 1 - i]));

    let zi = sosfilt_zi(&filter.sections);
    let scaled = |v: f64| zi.iter().map(|z| [z[0] * v, z[1] * v]).collect::<Vec<_>>();

    let mut y = sosfilt(&filter.sections, &ext, Some(&scaled(ext[0])));
    y.reverse();
    let mut y = sosfilt(&filter.sections, &y, Some(&scaled(y[0])));
    y.reverse();
    Ok(y[pad..pad + n].to_vec())
}

/// Forward-backward filtering: zero net phase, magnitude `|H|^2`.
///
/// Each end is extended by an even reflection long enough for the slowest
/// pole to ring down (at least `3 * (order + 1)` samples, at most the series
/// itself), filtered from steady-state initial conditions, then trimmed.
pub fn filtfilt(filter: &IirFilter, s: &UniformSeries) -> Result<UniformSeries> {
    let y = filtfilt_slice(filter, s.samples())?;
    Ok(s.with_samples(y))
}
