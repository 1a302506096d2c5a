//! Multimodal vigilance estimation from simultaneous EEG, pupillometry and ECG.
//!
//! The building blocks are plain functions over immutable series:
//!
//! * [`dsp`]: Butterworth design, zero-phase filtering, periodogram, band power
//! * [`eeg`]: artifact subtraction, notch/band-pass chain, per-window band features
//! * [`pupil`]: gap fill, slow band-pass, exclusion rule
//! * [`cardiac`]: R-peak detection and windowed heart rate
//! * [`stats`]: Spearman, Shapiro-Wilk, Fisher z, t tests, aggregation
//! * [`regressor`]: HRF convolution onto the TR grid
//! * [`synth`]: coupled synthetic sessions with known ground truth
//! * [`pipeline`]: manifest-driven batch processing and reports

pub mod cardiac;
pub mod dsp;
pub mod eeg;
pub mod error;
pub mod io;
pub mod num;
pub mod pipeline;
pub mod pupil;
pub mod regressor;
pub mod report;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
