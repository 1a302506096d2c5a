//! Shapiro-Wilk W test with Royston's coefficient and p-value approximations
//! (algorithm AS R94), valid for 3 <= n <= 5000.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p_value: f64,
    pub n: usize,
}

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Positive half of the antisymmetric W coefficients: `a[j]` weights
/// `x_(n-j) - x_(j+1)` for `j = 0..n/2`. They satisfy `2 * sum a^2 = 1`.
pub fn shapiro_wilk_coefficients(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let nn2 = n / 2;
    if n == 3 {
        return Ok(vec![std::f64::consts::FRAC_1_SQRT_2]);
    }
    let norm = std_normal();
    let an = n as f64;
    let m: Vec<f64> = (1..=nn2)
        .map(|i| -norm.inverse_cdf((i as f64 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) + m[0] / ssumm2;

    let mut a = vec![0.0; nn2];
    a[0] = a1;
    let (first_plain, fac) = if n > 5 {
        let a2 = poly(&C2, rsn) + m[1] / ssumm2;
        a[1] = a2;
        let fac =
            ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first_plain..nn2 {
        a[i] = m[i] / fac;
    }
    Ok(a)
}

fn check_n(n: usize) -> Result<()> {
    if !(3..=5000).contains(&n) {
        return Err(Error::invalid(format!(
            "Shapiro-Wilk needs 3 <= n <= 5000, got {n}"
        )));
    }
    Ok(())
}

pub fn shapiro_wilk(x: &[f64]) -> Result<ShapiroWilk> {
    let n = x.len();
    check_n(n)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Shapiro-Wilk input must be finite"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[n - 1] - sorted[0];
    if range <= 0.0 {
        return Err(Error::ZeroVariance("Shapiro-Wilk input is constant"));
    }

    let a = shapiro_wilk_coefficients(n)?;
    // scale by the range to keep the sums well conditioned
    let xs: Vec<f64> = sorted.iter().map(|v| v / range).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|v| (v - mean).powi(2)).sum();
    let num: f64 = a
        .iter()
        .enumerate()
        .map(|(j, aj)| aj * (xs[n - 1 - j] - xs[j]))
        .sum();
    let mut w = (num * num / ss).min(1.0);

    let p_value = if n == 3 {
        const PI6: f64 = 1.909_859_317_102_74;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        w = w.max(0.75);
        (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0)
    } else {
        let w1 = 1.0 - w;
        if w1 <= 0.0 {
            1.0
        } else {
            let an = n as f64;
            let mut y = w1.ln();
            let (m, s) = if n <= 11 {
                let gamma = poly(&G, an);
                if y >= gamma {
                    return Ok(ShapiroWilk { w, p_value: 1e-99, n });
                }
                y = -(gamma - y).ln();
                (poly(&C3, an), poly(&C4, an).exp())
            } else {
                let xx = an.ln();
                (poly(&C5, xx), poly(&C6, xx).exp())
            };
            1.0 - std_normal().cdf((y - m) / s)
        }
    };
    Ok(ShapiroWilk { w, p_value, n })
}
