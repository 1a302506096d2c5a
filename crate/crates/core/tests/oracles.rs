//! Worked examples checked against independent, test-side oracles.

use std::f64::consts::PI;

use vigilance::cardiac::{detect_r_peaks, heart_rate_windows};
use vigilance::dsp::PsdOptions;
use vigilance::dsp::{band_power, butterworth, filtfilt, periodogram, FilterKind, Psd};
use vigilance::eeg::{
    aas_subtract, default_bands, eeg_preprocess, extract_band_features, EegPreprocessConfig, EegRecording,
    DEFAULT_CHANNELS,
};
use vigilance::pupil::{fill_missing_moving_median, pupil_preprocess, GappySeries, PupilConfig};
use vigilance::signal::{decimate, window_mean, EventMarkers, UniformSeries, WindowGrid};
use vigilance::stats::{shapiro_wilk, spearman, two_sample_t_test};
use vigilance::synth::{gen_latent_vigilance, gen_session, Gains, TruthParams};

fn sine(freq: f64, fs: f64, n: usize, amp: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin())
        .collect()
}

/// Least-squares amplitude of a sinusoid at `freq` on samples `(t, y)`.
fn fitted_amplitude(t: &[f64], y: &[f64], freq: f64) -> f64 {
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let (s, c) = (2.0 * PI * freq * ti).sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += yi * s;
        yc += yi * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    a.hypot(b)
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// O(N^2) DFT periodogram, one-sided.
fn dft_one_sided(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let w = -2.0 * PI * (k * i) as f64 / n as f64;
                re += v * w.cos();
                im += v * w.sin();
            }
            let p = dt / n as f64 * (re * re + im * im);
            if k == 0 || 2 * k == n {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

#[test]
fn decimate_keeps_in_band_sine() {
    let x = sine(10.0, 5000.0, 20_000, 1.0);
    let s = UniformSeries::from_rate(5000.0, x).unwrap();
    let d = decimate(&s, 20).unwrap();
    assert_eq!(d.len(), 1000);
    assert!((d.dt() - 0.004).abs() < 1e-15);
    // interior: skip 0.4 s at each edge
    for i in 100..900 {
        let t = i as f64 * 0.004;
        assert!(
            (d.samples()[i] - (2.0 * PI * 10.0 * t).sin()).abs() < 0.01,
            "sample {i}"
        );
    }
}

#[test]
fn decimate_suppresses_alias() {
    let s = UniformSeries::from_rate(5000.0, sine(2000.0, 5000.0, 20_000, 1.0)).unwrap();
    let d = decimate(&s, 20).unwrap();
    assert!(rms(&d.samples()[100..900]) < 0.01);
}

#[test]
fn filtfilt_sine_gain_is_magnitude_squared() {
    let fs = 250.0;
    let bp = butterworth(FilterKind::Bandpass, 3, &[0.01, 0.1], fs).unwrap();
    let n = (720.0 * fs) as usize;
    let s = UniformSeries::from_rate(fs, sine(0.05, fs, n, 1.0)).unwrap();
    let y = filtfilt(&bp, &s).unwrap();
    let lo = (150.0 * fs) as usize;
    let hi = n - lo;
    let t: Vec<f64> = (lo..hi).map(|i| i as f64 / fs).collect();
    let amp = fitted_amplitude(&t, &y.samples()[lo..hi], 0.05);
    let h2 = bp.magnitude(0.05).powi(2);
    assert!((amp - h2).abs() / h2 < 0.02, "amp {amp}, |H|^2 {h2}");
}

#[test]
fn on_bin_sine_power() {
    let x = sine(10.0, 250.0, 1000, 1.0);
    let s = UniformSeries::new(0.0, 0.004, x.clone()).unwrap();
    let p = periodogram(&s).unwrap();
    let total: f64 = p.values.iter().sum::<f64>() * p.df;
    assert!((total - 0.5).abs() < 1e-9);
    assert!(p.values[40] * p.df >= 0.999 * 0.5);
    let oracle = dft_one_sided(&x, 0.004);
    for (a, b) in p.values.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
    }
}

#[test]
fn flat_density_band() {
    let frequencies: Vec<f64> = (0..=500).map(|k| k as f64 * 0.25).collect();
    let p = Psd {
        values: vec![1.0; frequencies.len()],
        df: 0.25,
        nyquist: 125.0,
        one_sided: true,
        frequencies,
    };
    assert!((band_power(&p, 13.0, 30.0).unwrap() - 17.0).abs() < 1e-9);
}

#[test]
fn fill_matches_brute_force_median() {
    let x: Vec<f64> = (0..100).map(f64::from).collect();
    let missing: Vec<bool> = (0..100).map(|i| (40..50).contains(&i)).collect();
    let g = GappySeries::new(0.0, 1.0, x.clone(), missing.clone()).unwrap();
    let out = fill_missing_moving_median(&g).unwrap();
    // window 2 * 10 = 20, covering [i - 10, i + 9]
    for i in 40..50 {
        let mut v: Vec<f64> = (i - 10..=i + 9).filter(|&k| !missing[k]).map(|k| x[k]).collect();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let med = if m % 2 == 1 {
            v[m / 2]
        } else {
            (v[m / 2 - 1] + v[m / 2]) / 2.0
        };
        assert_eq!(out.samples()[i], med, "sample {i}");
    }
    for i in (0..40).chain(50..100) {
        assert_eq!(out.samples()[i], x[i]);
    }
}

#[test]
fn pupil_sine_window_amplitude() {
    let fs = 250.0;
    let n = (720.0 * fs) as usize;
    let g = GappySeries::from_raw(0.0, 1.0 / fs, sine(0.05, fs, n, 1.0)).unwrap();
    let grid = WindowGrid::covering(0.0, 720.0, 4.0).unwrap();
    let v = pupil_preprocess(&g, &grid, &PupilConfig::default()).unwrap();
    assert_eq!(v.values.len(), 180);
    let bp = butterworth(FilterKind::Bandpass, 3, &[0.01, 0.1], fs).unwrap();
    // mean of a sine over a 4 s window scales it by sinc
    let w = PI * 0.05 * 4.0;
    let expected = bp.magnitude(0.05).powi(2) * w.sin() / w;
    let centres = grid.centres();
    let (lo, hi) = (40, 140);
    let amp = fitted_amplitude(&centres[lo..hi], &v.values[lo..hi], 0.05);
    assert!(
        (amp - expected).abs() / expected < 0.05,
        "amp {amp}, expected {expected}"
    );
}

#[test]
fn pupil_constant_gives_zero() {
    let g = GappySeries::from_raw(0.0, 0.004, vec![812.0; 180_000]).unwrap();
    let grid = WindowGrid::covering(0.0, 720.0, 4.0).unwrap();
    let v = pupil_preprocess(&g, &grid, &PupilConfig::default()).unwrap();
    assert!(v.values.iter().all(|x| x.abs() < 1e-6 * 812.0));
}

fn six_channels(x: &[f64], fs: f64) -> EegRecording {
    EegRecording::new(
        DEFAULT_CHANNELS
            .iter()
            .map(|c| UniformSeries::from_rate(fs, x.to_vec()).unwrap().with_label(*c))
            .collect(),
    )
    .unwrap()
}

#[test]
fn beta_sine_features() {
    let rec = six_channels(&sine(20.0, 250.0, 250 * 40, 1.0), 250.0);
    let grid = WindowGrid::covering(0.0, 40.0, 4.0).unwrap();
    let t = extract_band_features(
        &rec,
        &DEFAULT_CHANNELS,
        &grid,
        &default_bands(),
        PsdOptions::default(),
    )
    .unwrap();
    assert_eq!(t.rows.len(), 10);
    for r in &t.rows {
        assert!((r.beta_power - 0.5).abs() < 1e-9);
        assert!(r.alpha_power < 1e-6);
    }
}

#[test]
fn feature_rows_for_full_run() {
    let rec = six_channels(&vec![0.5; 250 * 720], 250.0);
    let grid = WindowGrid::covering(0.0, 720.0, 4.0).unwrap();
    let t = extract_band_features(
        &rec,
        &DEFAULT_CHANNELS,
        &grid,
        &default_bands(),
        PsdOptions::default(),
    )
    .unwrap();
    assert_eq!(t.rows.len(), 180);
}

#[test]
fn preprocess_rejects_mains() {
    let fs = 250.0;
    let n = (60.0 * fs) as usize;
    let rec = six_channels(&sine(60.0, fs, n, 1.0), fs);
    let out = eeg_preprocess(&rec, &EegPreprocessConfig::default()).unwrap();
    let input_rms = 1.0 / 2f64.sqrt();
    assert!(rms(out.channels()[0].samples()) < 0.05 * input_rms);
}

#[test]
fn preprocess_passes_alpha() {
    let fs = 250.0;
    let n = (60.0 * fs) as usize;
    let rec = six_channels(&sine(10.0, fs, n, 1.0), fs);
    let out = eeg_preprocess(&rec, &EegPreprocessConfig::default()).unwrap();
    let lo = (10.0 * fs) as usize;
    let t: Vec<f64> = (lo..n - lo).map(|i| i as f64 / fs).collect();
    let amp = fitted_amplitude(&t, &out.channels()[0].samples()[lo..n - lo], 10.0);
    assert!((amp - 1.0).abs() < 0.02, "amp {amp}");
}

#[test]
fn preprocess_removes_dc() {
    let rec = six_channels(&vec![100.0; 250 * 60], 250.0);
    let out = eeg_preprocess(&rec, &EegPreprocessConfig::default()).unwrap();
    let x = out.channels()[0].samples();
    assert!((x.iter().sum::<f64>() / x.len() as f64).abs() < 0.5);
}

#[test]
fn preprocess_decimates_from_5000() {
    let rec = six_channels(&sine(10.0, 5000.0, 5000 * 10, 1.0), 5000.0);
    let out = eeg_preprocess(&rec, &EegPreprocessConfig::default()).unwrap();
    assert_eq!(out.sample_rate(), 250.0);
    assert_eq!(out.len(), 2500);
}

#[test]
fn aas_removes_exactly_periodic_artifact() {
    let fs = 250.0;
    let period = 500;
    let shape: Vec<f64> = (0..period).map(|i| ((i * 7919) % 101) as f64 - 50.0).collect();
    let x: Vec<f64> = (0..period * 30).map(|i| shape[i % period]).collect();
    let s = UniformSeries::from_rate(fs, x).unwrap();
    let m = EventMarkers::periodic(0.0, 2.0, 60.0);
    let out = aas_subtract(&s, &m, 30, 0.0).unwrap();
    assert!(rms(out.samples()) < 1e-9);
}

#[test]
fn aas_line_and_broadband() {
    let fs = 250.0;
    let n = (120.0 * fs) as usize;
    let mut noise = Vec::with_capacity(n);
    // LCG-driven uniform noise, variance 1
    let mut state: u64 = 12345;
    for _ in 0..n {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        noise.push(((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 12f64.sqrt());
    }
    let art = sine(20.5, fs, n, 5.0);
    let x: Vec<f64> = noise.iter().zip(&art).map(|(a, b)| a + b).collect();
    let s = UniformSeries::from_rate(fs, x).unwrap();
    let m = EventMarkers::periodic(0.0, 2.0, 120.0);
    let out = aas_subtract(&s, &m, 25, 0.0).unwrap();

    let before = periodogram(&s).unwrap();
    let after = periodogram(&out).unwrap();
    let noise_psd = periodogram(&UniformSeries::from_rate(fs, noise).unwrap()).unwrap();
    let k = (20.5 / before.df).round() as usize;
    let line_db = 10.0 * (before.values[k] / after.values[k]).log10();
    assert!(line_db >= 20.0, "line attenuation {line_db} dB");
    let broadband = |p: &Psd| {
        p.values
            .iter()
            .enumerate()
            .filter(|(i, _)| i.abs_diff(k) > 2)
            .map(|(_, v)| v)
            .sum::<f64>()
    };
    let change = 10.0 * (broadband(&after) / broadband(&noise_psd)).log10();
    assert!(change.abs() < 1.0, "broadband change {change} dB");
}

#[test]
fn shapiro_fixed_sample_matches_reference() {
    let x = [
        -1.423825, 1.263728, -0.870662, -0.259173, -0.075343, -0.740885, -1.367793, 0.648893, 0.361058,
        -1.952863, 2.34741, 0.968497, -0.759387, 0.902198, -0.466953, -0.06069, 0.788844, -1.256668,
        0.575858, 1.398979, 1.322298, -0.299699, 0.902919, -1.621583, -0.158189, 0.449484, -1.343601,
        -0.081688, 1.72474, 2.618159, 0.777361, 0.828633, -0.958988, -1.209388, -1.412292, 0.541547,
        0.751939, -0.65876, -1.228675, 0.257558, 0.312903, -0.130812, 1.269983, -0.092962, -0.066151,
        -1.108214, 0.135957, 1.347078, 0.061144, 0.070915,
    ];
    let r = shapiro_wilk(&x).unwrap();
    assert!((r.w - 0.9799587540617388).abs() < 1e-4, "W {}", r.w);
    assert!((r.p_value - 0.5502254878584649).abs() < 1e-4, "p {}", r.p_value);
}

#[test]
fn spearman_worked_example() {
    let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[2.0, 1.0, 3.0, 3.0]).unwrap();
    assert_eq!(r.rho, 0.5);
}

#[test]
fn pooled_two_sample_oracle() {
    // pooled variance 1, se = sqrt(2/3)
    let r = two_sample_t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
    assert!((r.pooled.t + 1.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.pooled.df, 4.0);
    assert!((r.pooled.p_two_sided - 0.2878641347266908).abs() < 1e-9);
}

#[test]
fn window_count_for_twelve_minutes() {
    let s = UniformSeries::from_rate(250.0, vec![1.0; 180_000]).unwrap();
    assert_eq!(window_mean(&s, 4.0).unwrap().values.len(), 180);
}

#[test]
fn latent_grand_mean_near_half() {
    let total: f64 = (0..10_000u64)
        .map(|seed| {
            let v = gen_latent_vigilance(seed, 60.0, 120.0, 1.0).unwrap();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .sum();
    let m = total / 10_000.0;
    assert!((0.45..=0.55).contains(&m), "grand mean {m}");
}

fn constant_rate_params(bpm: f64, duration: f64) -> TruthParams {
    let steps = (duration / 4.0).ceil() as usize;
    TruthParams {
        duration_s: duration,
        channels: vec!["Fz".into()],
        latent: Some(vec![(bpm - 60.0) / 20.0; steps]),
        hr_noise_bpm: 0.0,
        gains: Gains {
            hr: 20.0,
            ..Gains::zero()
        },
        ..TruthParams::default()
    }
}

#[test]
fn detector_finds_synthetic_beats() {
    for seed in 0..5 {
        let s = gen_session(seed, &constant_rate_params(75.0, 60.0)).unwrap();
        let peaks = detect_r_peaks(&s.ecg).unwrap();
        let truth = &s.truth.beat_times;
        let hit = truth
            .iter()
            .filter(|&&b| peaks.times.iter().any(|&p| (p - b).abs() <= 0.05))
            .count();
        let false_pos = peaks
            .times
            .iter()
            .filter(|&&p| !truth.iter().any(|&b| (p - b).abs() <= 0.05))
            .count();
        assert!(
            hit as f64 >= 0.99 * truth.len() as f64,
            "seed {seed}: {hit}/{}",
            truth.len()
        );
        assert_eq!(false_pos, 0, "seed {seed}");
    }
}

#[test]
fn heart_rate_follows_ramp() {
    let steps = 180;
    let mut p = constant_rate_params(70.0, 720.0);
    p.latent = Some((0..steps).map(|i| i as f64 / (steps - 1) as f64).collect());
    let s = gen_session(3, &p).unwrap();
    let grid = WindowGrid::covering(0.0, 720.0, 4.0).unwrap();
    let hr = heart_rate_windows(&detect_r_peaks(&s.ecg).unwrap(), &grid).unwrap();
    for (w, &b) in hr.bpm.iter().enumerate() {
        let truth = s.truth.heart_rate[w];
        assert!((b - truth).abs() <= 1.0, "window {w}: {b} vs {truth}");
    }
}

#[test]
fn no_blinks_no_missing_samples() {
    let p = TruthParams {
        duration_s: 120.0,
        channels: vec!["Fz".into()],
        blink_rate_per_min: 0.0,
        ..TruthParams::default()
    };
    let s = gen_session(11, &p).unwrap();
    assert_eq!(s.pupil.gap_report().missing_fraction, 0.0);
}

#[test]
fn configured_rate_matches_beat_rate() {
    // OU wander is integrated per step, so the beat-derived rate stays close
    for seed in 0..20 {
        let p = TruthParams {
            channels: vec!["Fz".into()],
            ..TruthParams::default()
        };
        let s = gen_session(seed, &p).unwrap();
        let grid = WindowGrid::covering(0.0, 720.0, 4.0).unwrap();
        let from_beats = s.truth.heart_rate_on(&grid).unwrap();
        for (w, (a, b)) in from_beats.iter().zip(&s.truth.heart_rate).enumerate() {
            assert!((a - b).abs() < 0.5, "seed {seed} window {w}: {a} vs {b}");
        }
    }
}

#[test]
fn trimmed_run_regressor_length() {
    use vigilance::regressor::make_regressor;
    let grid = WindowGrid::covering(6.0, 714.0, 4.0).unwrap();
    let f = vigilance::signal::FeatureVector {
        name: "beta_power".into(),
        values: vec![0.0; grid.n_windows],
        grid,
    };
    let r = make_regressor(&f, 714.0, 2.0).unwrap();
    assert_eq!(r.values.len(), 357);
}
