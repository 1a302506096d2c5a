//! Property tests for the invariants each module promises.

use std::f64::consts::PI;

use proptest::collection::vec;
use proptest::prelude::*;

use vigilance::cardiac::{detect_r_peaks, heart_rate_windows, RPeaks};
use vigilance::dsp::{band_power, butterworth, filtfilt, periodogram, FilterKind, PsdOptions};
use vigilance::eeg::{default_bands, extract_band_features, EegRecording, DEFAULT_CHANNELS};
use vigilance::pupil::{clean_pupil, fill_missing_moving_median, pupil_preprocess, GappySeries, PupilConfig};
use vigilance::regressor::make_regressor;
use vigilance::signal::{decimate, window_mean, FeatureVector, UniformSeries, WindowGrid};
use vigilance::stats::{fisher_z, one_sample_t_test, spearman, t_tail_two_sided};
use vigilance::synth::{gen_session, TruthParams};

fn series(x: Vec<f64>, dt: f64) -> UniformSeries {
    UniformSeries::new(0.0, dt, x).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Splitmix64, so deterministic test signals need no RNG crate.
fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_mean_is_affine(x in vec(-1e3..1e3f64, 8..200), a in -10.0..10.0f64, b in -100.0..100.0f64) {
        let spw = 4usize;
        let s = series(x.clone(), 0.25);
        let t = series(x.iter().map(|v| a * v + b).collect(), 0.25);
        let m = window_mean(&s, spw as f64 * 0.25).unwrap();
        let mt = window_mean(&t, spw as f64 * 0.25).unwrap();
        prop_assert_eq!(m.values.len(), x.len() / spw);
        for (u, v) in m.values.iter().zip(&mt.values) {
            prop_assert!((a * u + b - v).abs() <= 1e-9 * (1.0 + v.abs() + (a * u).abs()));
        }
    }

    #[test]
    fn window_count_is_floor(n in 1usize..5000, spw in 1usize..300) {
        prop_assume!(n >= spw);
        let s = series(vec![0.0; n], 0.004);
        let m = window_mean(&s, spw as f64 * 0.004).unwrap();
        prop_assert_eq!(m.values.len(), n / spw);
    }

    #[test]
    fn decimate_by_one_is_identity(seed in any::<u64>(), n in 200usize..2000) {
        let x = noise(seed, n);
        let d = decimate(&series(x.clone(), 0.002), 1).unwrap();
        prop_assert_eq!(d.samples(), &x[..]);
    }

    #[test]
    fn parseval(seed in any::<u64>(), n in 2usize..4096) {
        let x = noise(seed, n);
        let dt = 0.004;
        let p = periodogram(&series(x.clone(), dt)).unwrap();
        let lhs: f64 = p.values.iter().sum::<f64>() * p.df;
        let rhs = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn band_power_adds_over_adjacent_bands(seed in any::<u64>(), cuts in vec(0.0..125.0f64, 3)) {
        let mut c = cuts;
        c.sort_by(f64::total_cmp);
        prop_assume!(c[0] < c[1] && c[1] < c[2]);
        let p = periodogram(&series(noise(seed, 1000), 0.004)).unwrap();
        let whole = band_power(&p, c[0], c[2]).unwrap();
        let parts = band_power(&p, c[0], c[1]).unwrap() + band_power(&p, c[1], c[2]).unwrap();
        // equal bin sets; only summation order differs
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn filtfilt_keeps_symmetric_input_symmetric(seed in any::<u64>(), half in 50usize..400, order in 1usize..5) {
        let h = noise(seed, half);
        let x: Vec<f64> = h.iter().chain(h.iter().rev()).copied().collect();
        let f = butterworth(FilterKind::Lowpass, order, &[20.0], 250.0).unwrap();
        let y = filtfilt(&f, &series(x, 0.004)).unwrap();
        let y = y.samples();
        for i in 0..y.len() / 2 {
            prop_assert!((y[i] - y[y.len() - 1 - i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn lowpass_matches_prewarped_formula(order in 1usize..9, fc in 1.0..100.0f64, u in 0.0..1.0f64) {
        let fs = 250.0;
        let f = butterworth(FilterKind::Lowpass, order, &[fc], fs).unwrap();
        let freq = u * fc;
        let r = (PI * freq / fs).tan() / (PI * fc / fs).tan();
        let analytic = 1.0 / (1.0 + r.powi(2 * order as i32)).sqrt();
        prop_assert!(close(f.magnitude(freq), analytic, 0.005));
    }

    #[test]
    fn bandpass_matches_prewarped_formula(order in 1usize..5, lo in 0.5..40.0f64, width in 1.0..60.0f64, u in 0.0..1.0f64) {
        let fs = 250.0;
        let hi = lo + width;
        let f = butterworth(FilterKind::Bandpass, order, &[lo, hi], fs).unwrap();
        let freq = lo + u * width;
        let w = (PI * freq / fs).tan();
        let (w1, w2) = ((PI * lo / fs).tan(), (PI * hi / fs).tan());
        let omega = (w * w - w1 * w2) / (w * (w2 - w1));
        let analytic = 1.0 / (1.0 + omega.powi(2 * order as i32)).sqrt();
        prop_assert!(close(f.magnitude(freq), analytic, 0.005));
    }

    #[test]
    fn feature_scaling(seed in any::<u64>(), c in 0.01..100.0f64) {
        let x = noise(seed, 2000);
        let rec = |k: f64| EegRecording::new(
            DEFAULT_CHANNELS.iter().enumerate()
                .map(|(i, ch)| series(x.iter().map(|v| k * v * (1.0 + i as f64)).collect(), 0.004).with_label(*ch))
                .collect(),
        ).unwrap();
        let grid = WindowGrid::covering(0.0, 8.0, 4.0).unwrap();
        let a = extract_band_features(&rec(1.0), &DEFAULT_CHANNELS, &grid, &default_bands(), PsdOptions::default()).unwrap();
        let b = extract_band_features(&rec(c), &DEFAULT_CHANNELS, &grid, &default_bands(), PsdOptions::default()).unwrap();
        for (r, s) in a.rows.iter().zip(&b.rows) {
            prop_assert!(close(s.alpha_power, c * c * r.alpha_power, 1e-9));
            prop_assert!(close(s.beta_power, c * c * r.beta_power, 1e-9));
            prop_assert!(close(s.alpha_ratio, r.alpha_ratio, 1e-9));
        }
    }

    #[test]
    fn feature_channel_order_irrelevant(seed in any::<u64>(), rot in 0usize..6) {
        let chans: Vec<UniformSeries> = DEFAULT_CHANNELS.iter().enumerate()
            .map(|(i, ch)| series(noise(seed ^ i as u64, 1000), 0.004).with_label(*ch))
            .collect();
        let mut shuffled = chans.clone();
        shuffled.rotate_left(rot);
        let mut names = DEFAULT_CHANNELS.to_vec();
        names.rotate_left(rot);
        let grid = WindowGrid::covering(0.0, 4.0, 4.0).unwrap();
        let a = extract_band_features(&EegRecording::new(chans).unwrap(), &DEFAULT_CHANNELS, &grid, &default_bands(), PsdOptions::default()).unwrap();
        let b = extract_band_features(&EegRecording::new(shuffled).unwrap(), &names, &grid, &default_bands(), PsdOptions::default()).unwrap();
        for (r, s) in a.rows.iter().zip(&b.rows) {
            prop_assert!(close(r.beta_power, s.beta_power, 1e-12));
            prop_assert!(close(r.alpha_power, s.alpha_power, 1e-12));
        }
    }

    #[test]
    fn fill_keeps_valid_samples(x in vec(-50.0..50.0f64, 5..300), mask in vec(any::<bool>(), 5..300)) {
        let n = x.len().min(mask.len());
        let missing = mask[..n].to_vec();
        prop_assume!(missing.iter().any(|m| !m));
        let g = GappySeries::new(0.0, 0.01, x[..n].to_vec(), missing.clone()).unwrap();
        let out = fill_missing_moving_median(&g).unwrap();
        for i in 0..n {
            if !missing[i] {
                prop_assert_eq!(out.samples()[i], x[i]);
            }
        }
    }

    #[test]
    fn spearman_ignores_monotone_transforms(pairs in vec((0i32..5, 0i32..5), 3..9)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let (Ok(a), Ok(b)) = (
            spearman(&x, &y),
            spearman(&x.iter().map(|v| v.exp()).collect::<Vec<_>>(), &y.iter().map(|v| v * v * v + 2.0).collect::<Vec<_>>()),
        ) else {
            return Ok(());
        };
        prop_assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn fisher_z_is_odd(r in -0.999999..0.999999f64) {
        prop_assert_eq!(fisher_z(-r).unwrap(), -fisher_z(r).unwrap());
    }

    #[test]
    fn t_tail_decreases_in_abs_t(a in 0.0..20.0f64, b in 0.0..20.0f64, df in 1u32..200) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let df = df as f64;
        prop_assert!(t_tail_two_sided(hi, df).unwrap() <= t_tail_two_sided(lo, df).unwrap());
        prop_assert_eq!(t_tail_two_sided(-hi, df).unwrap(), t_tail_two_sided(hi, df).unwrap());
    }

    #[test]
    fn cohens_d_identity_and_sign(z in vec(-2.0..2.0f64, 2..30)) {
        let Ok(r) = one_sample_t_test(&z) else { return Ok(()); };
        let n = z.len() as f64;
        prop_assert!((r.cohens_d * n.sqrt() - r.t).abs() <= 1e-9 * (1.0 + r.t.abs()));
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        let s = one_sample_t_test(&neg).unwrap();
        prop_assert!((s.t + r.t).abs() <= 1e-12 * (1.0 + r.t.abs()));
        prop_assert!((s.cohens_d + r.cohens_d).abs() <= 1e-12 * (1.0 + r.cohens_d.abs()));
        prop_assert_eq!(s.p_two_sided, r.p_two_sided);
    }

    #[test]
    fn regressor_is_linear(f in vec(-5.0..5.0f64, 30), g in vec(-5.0..5.0f64, 30), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let grid = WindowGrid::new(0.0, 4.0, 30).unwrap();
        let fv = |v: Vec<f64>| FeatureVector { name: "x".into(), grid: grid.clone(), values: v };
        let rf = make_regressor(&fv(f.clone()), 120.0, 2.0).unwrap().values;
        let rg = make_regressor(&fv(g.clone()), 120.0, 2.0).unwrap().values;
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let rm = make_regressor(&fv(mix), 120.0, 2.0).unwrap().values;
        for k in 0..rm.len() {
            prop_assert!((rm[k] - (a * rf[k] + b * rg[k])).abs() <= 1e-9);
        }
    }

    #[test]
    fn regressor_shifts_with_feature(f in vec(-5.0..5.0f64, 40), shift in 1usize..5) {
        // with window = TR each feature value lands on one TR sample
        let grid = WindowGrid::new(0.0, 2.0, 40).unwrap();
        let fv = |v: Vec<f64>| FeatureVector { name: "x".into(), grid: grid.clone(), values: v };
        let mut shifted = vec![f[0]; shift];
        shifted.extend_from_slice(&f[..40 - shift]);
        let r = make_regressor(&fv(f.clone()), 80.0, 2.0).unwrap().values;
        let s = make_regressor(&fv(shifted), 80.0, 2.0).unwrap().values;
        // interior: past the HRF support (32 s) plus the shift
        for k in 20 + shift..40 {
            prop_assert!((s[k] - r[k - shift]).abs() <= 1e-9);
        }
    }

    #[test]
    fn regressor_is_causal(onset in 1usize..30, v in vec(0.1..5.0f64, 30)) {
        let grid = WindowGrid::new(0.0, 4.0, 30).unwrap();
        let mut x = v;
        x[..onset].iter_mut().for_each(|e| *e = 0.0);
        // also zero the window before onset, which linear interpolation reaches into
        x[onset - 1] = 0.0;
        let r = make_regressor(&FeatureVector { name: "x".into(), grid: grid.clone(), values: x }, 120.0, 2.0).unwrap();
        // first TR sample whose interpolated input can be non-zero
        let first = (grid.centres()[onset - 1] / 2.0).floor() as usize + 1;
        for k in 0..first {
            prop_assert_eq!(r.values[k], 0.0);
        }
    }

    #[test]
    fn heart_rate_has_one_value_per_window(u in vec(0.0..1.0f64, 0..40), n in 1usize..30) {
        let mut t: Vec<f64> = u.iter().map(|v| v * 4.0 * n as f64).collect();
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() < 0.3);
        prop_assume!(t.len() >= 2);
        let grid = WindowGrid::new(0.0, 4.0, n).unwrap();
        let hr = heart_rate_windows(&RPeaks::from_times(t).unwrap(), &grid).unwrap();
        prop_assert_eq!(hr.bpm.len(), n);
    }
}

fn ecg_params(duration: f64) -> TruthParams {
    TruthParams {
        duration_s: duration,
        channels: vec!["Fz".into()],
        ..TruthParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detector_shift_equivariant(seed in 0u64..1000, k in 1usize..200) {
        let ecg = gen_session(seed, &ecg_params(60.0)).unwrap().ecg;
        let x = ecg.samples();
        let dt = ecg.dt();
        let a = detect_r_peaks(&ecg).unwrap();
        let shifted = series(x[k..].to_vec(), dt);
        let b = detect_r_peaks(&shifted).unwrap();
        let idx = |t: f64| (t / dt).round() as i64;
        let interior = |t: f64| t > 10.0 && t < 50.0;
        let ia: Vec<i64> = a.times.iter().filter(|&&t| interior(t)).map(|&t| idx(t)).collect();
        let ib: Vec<i64> = b.times.iter().map(|&t| idx(t) + k as i64).filter(|&i| interior(i as f64 * dt)).collect();
        prop_assert_eq!(ia, ib);
    }

    #[test]
    fn detector_scale_invariant(seed in 0u64..1000, c in 0.01..100.0f64) {
        let ecg = gen_session(seed, &ecg_params(60.0)).unwrap().ecg;
        let a = detect_r_peaks(&ecg).unwrap();
        let b = detect_r_peaks(&ecg.map(|v| c * v)).unwrap();
        prop_assert_eq!(a.times, b.times);
    }

    #[test]
    fn synth_is_reproducible(seed in any::<u64>()) {
        let p = ecg_params(60.0);
        // Debug output of f64 round-trips, so equal strings mean equal bits (NaN included)
        let a = format!("{:?}", gen_session(seed, &p).unwrap());
        let b = format!("{:?}", gen_session(seed, &p).unwrap());
        prop_assert!(a == b);
    }

    #[test]
    fn beat_rate_tracks_configured_rate(seed in any::<u64>()) {
        let s = gen_session(seed, &ecg_params(240.0)).unwrap();
        let grid = WindowGrid::covering(0.0, 240.0, 4.0).unwrap();
        let from_beats = s.truth.heart_rate_on(&grid).unwrap();
        for (a, b) in from_beats.iter().zip(&s.truth.heart_rate) {
            prop_assert!((a - b).abs() < 0.5);
        }
    }

    #[test]
    fn gradient_artifact_repeats_every_trigger(seed in any::<u64>()) {
        let mut p = ecg_params(60.0);
        p.gradient_amplitude = 100.0;
        let with = gen_session(seed, &p).unwrap();
        p.gradient_amplitude = 0.0;
        let without = gen_session(seed, &p).unwrap();
        let d: Vec<f64> = with.eeg.channels()[0].samples().iter()
            .zip(without.eeg.channels()[0].samples())
            .map(|(a, b)| a - b)
            .collect();
        let period = (p.tr_s * p.sample_rate_hz).round() as usize;
        let trig = with.triggers.times();
        prop_assert!(trig.windows(2).all(|w| ((w[1] - w[0]) * p.sample_rate_hz - period as f64).abs() < 1.0));
        let peak = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(peak > 50.0);
        for i in 0..d.len() - period {
            prop_assert!((d[i + period] - d[i]).abs() < 1e-6 * peak);
        }
    }

    #[test]
    fn pupil_lengths_match_eeg_table(seed in any::<u64>()) {
        let s = gen_session(seed, &ecg_params(120.0)).unwrap();
        let grid = WindowGrid::covering(6.0, 112.0, 4.0).unwrap();
        let table = extract_band_features(&s.eeg, &["Fz"], &grid, &default_bands(), PsdOptions::default()).unwrap();
        let pupil = pupil_preprocess(&s.pupil, &grid, &PupilConfig::default()).unwrap();
        prop_assert_eq!(pupil.values.len(), table.rows.len());
    }

    #[test]
    fn pupil_band_pass_removes_mean(seed in any::<u64>(), level in 100.0..5000.0f64) {
        let n = 720 * 250;
        let x: Vec<f64> = noise(seed, n).iter().map(|v| level + v).collect();
        let sd = (1.0f64 / 12.0).sqrt();
        let y = clean_pupil(&GappySeries::from_raw(0.0, 0.004, x).unwrap(), &PupilConfig::default()).unwrap();
        let mean = y.samples().iter().sum::<f64>() / n as f64;
        prop_assert!(mean.abs() < 1e-3 * sd, "mean {}", mean);
    }
}
