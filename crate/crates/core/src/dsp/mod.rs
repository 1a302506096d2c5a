//! Filter design, zero-phase filtering, periodogram and band power.

mod butterworth;
mod filtfilt;
mod psd;

pub use butterworth::{butterworth, Biquad, FilterKind, IirFilter};
pub use filtfilt::{filtfilt, filtfilt_slice, pad_len, ring_len, sosfilt, sosfilt_zi};
pub use psd::{band_power, periodogram, periodogram_two_sided, Detrend, Periodogram, Psd, PsdOptions, Taper};
