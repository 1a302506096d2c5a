use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::t_tail_two_sided;

/// One within-run rank correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrResult {
    pub run_id: String,
    pub feature: String,
    pub rho: f64,
    pub n: usize,
    pub p_two_sided: f64,
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation input is constant"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with the t-approximation p-value (df = n - 2).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort {
            what: "paired sample for Spearman",
            needed: 3,
            got: n,
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("Spearman input must be finite"));
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    Ok(CorrResult {
        run_id: String::new(),
        feature: String::new(),
        rho,
        n,
        p_two_sided: rho_p_value(rho, n)?,
    })
}

/// Two-sided p for a correlation of `n` pairs via `t = r sqrt((n-2)/(1-r^2))`.
pub fn rho_p_value(rho: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid("p-value needs n >= 3"));
    }
    if rho.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    t_tail_two_sided(t, df)
}

pub fn fisher_z(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::invalid(format!("Fisher z needs |r| < 1, got {r}")));
    }
    // std atanh is not exactly odd; fold the sign so z(-r) == -z(r) bit for bit
    Ok(r.signum() * r.abs().atanh())
}
