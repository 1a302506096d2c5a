//! Group-level inference on per-subject correlations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::correlation::{fisher_z, CorrResult};
use crate::stats::special::t_tail_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSampleTest {
    pub t: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub cohens_d: f64,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// One row of the group table: r summary plus the test on Fisher z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub feature: String,
    pub mean_r: f64,
    pub sd_r: f64,
    pub t: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub cohens_d: f64,
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// `t = mean / (sd / sqrt(n))`, `df = n - 1`, Cohen's `d = mean / sd`.
pub fn one_sample_t_test(x: &[f64]) -> Result<OneSampleTest> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort {
            what: "sample for a one-sample t-test",
            needed: 2,
            got: n,
        });
    }
    let (mean, sd) = mean_sd(x);
    if sd == 0.0 {
        return Err(Error::ZeroVariance("one-sample t-test input is constant"));
    }
    let d = mean / sd;
    let t = d * (n as f64).sqrt();
    Ok(OneSampleTest {
        t,
        df: n - 1,
        p_two_sided: t_tail_two_sided(t, (n - 1) as f64)?,
        cohens_d: d,
        mean,
        sd,
        n,
    })
}

/// Fisher-z transforms the per-subject `r` values and tests their mean against 0.
pub fn group_test(feature: &str, r_values: &[f64]) -> Result<GroupStats> {
    let z = r_values
        .iter()
        .map(|&r| fisher_z(r))
        .collect::<Result<Vec<_>>>()?;
    let test = one_sample_t_test(&z)?;
    let (mean_r, sd_r) = mean_sd(r_values);
    Ok(GroupStats {
        feature: feature.to_string(),
        mean_r,
        sd_r,
        t: test.t,
        df: test.df,
        p_two_sided: test.p_two_sided,
        cohens_d: test.cohens_d,
    })
}

/// Pooled-variance and Welch two-sample t statistics, side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleTest {
    pub pooled: TTest,
    pub welch: TTest,
}

pub fn two_sample_t_test(a: &[f64], b: &[f64]) -> Result<TwoSampleTest> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::TooShort {
                what: "sample for a two-sample t-test",
                needed: 2,
                got: s.len(),
            });
        }
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, s1) = mean_sd(a);
    let (m2, s2) = mean_sd(b);
    let (v1, v2) = (s1 * s1, s2 * s2);
    let diff = m1 - m2;
    if v1 == 0.0 && v2 == 0.0 {
        if diff == 0.0 {
            return Err(Error::ZeroVariance("both samples constant and equal"));
        }
        let t = diff.signum() * f64::INFINITY;
        let pooled = TTest {
            t,
            df: n1 + n2 - 2.0,
            p_two_sided: 0.0,
        };
        return Ok(TwoSampleTest {
            pooled,
            welch: pooled,
        });
    }

    let df_pooled = n1 + n2 - 2.0;
    let sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df_pooled;
    let t_pooled = diff / (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt();

    let (q1, q2) = (v1 / n1, v2 / n2);
    let t_welch = diff / (q1 + q2).sqrt();
    let df_welch = (q1 + q2).powi(2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));

    Ok(TwoSampleTest {
        pooled: TTest {
            t: t_pooled,
            df: df_pooled,
            p_two_sided: t_tail_two_sided(t_pooled, df_pooled)?,
        },
        welch: TTest {
            t: t_welch,
            df: df_welch,
            p_two_sided: t_tail_two_sided(t_welch, df_welch)?,
        },
    })
}

/// `p_adj = min(1, p * m)`.
pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len() as f64;
    Ok(p_values.iter().map(|p| (p * m).min(1.0)).collect())
}

/// Asterisks for an adjusted p: `*` < 0.05, `**` < 0.01, `***` < 0.001.
pub fn significance_stars(p_adj: f64) -> &'static str {
    if p_adj < 0.001 {
        "***"
    } else if p_adj < 0.01 {
        "**"
    } else if p_adj < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Arithmetic mean of run-level rho, before the z-transform.
    #[default]
    MeanR,
    /// Mean of run-level Fisher z, mapped back with tanh.
    MeanZ,
}

/// Per-subject mean correlation, in order of each subject's first run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectValue {
    pub subject_id: String,
    pub r: f64,
    pub n_runs: usize,
}

pub fn aggregate_within_subject(
    per_run: &[CorrResult],
    subject_of_run: &HashMap<String, String>,
    how: Aggregation,
) -> Result<Vec<SubjectValue>> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: HashMap<&str, (f64, usize)> = HashMap::new();
    for r in per_run {
        let subject = subject_of_run
            .get(&r.run_id)
            .ok_or_else(|| Error::invalid(format!("run '{}' has no subject", r.run_id)))?;
        let v = match how {
            Aggregation::MeanR => r.rho,
            Aggregation::MeanZ => fisher_z(r.rho)?,
        };
        let e = acc.entry(subject.as_str()).or_insert_with(|| {
            order.push(subject.clone());
            (0.0, 0)
        });
        e.0 += v;
        e.1 += 1;
    }
    Ok(order
        .into_iter()
        .map(|s| {
            let (sum, k) = acc[s.as_str()];
            let m = sum / k as f64;
            let r = match how {
                Aggregation::MeanR => m,
                Aggregation::MeanZ => m.tanh(),
            };
            SubjectValue {
                subject_id: s,
                r,
                n_runs: k,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenths_oracle() {
        let z: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let r = one_sample_t_test(&z).unwrap();
        assert!((r.t - 5.745).abs() < 1e-3);
        assert!((r.cohens_d - 1.8166).abs() < 5e-4);
        assert_eq!(r.df, 9);
    }

    #[test]
    fn symmetric_input_is_null() {
        let r = one_sample_t_test(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
        assert_eq!(r.cohens_d, 0.0);
    }

    #[test]
    fn one_sample_errors() {
        assert!(one_sample_t_test(&[0.3]).is_err());
        assert!(matches!(
            one_sample_t_test(&[0.3, 0.3, 0.3]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn pooled_shift_oracle() {
        let r = two_sample_t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        // means differ by -1, both variances 1: t = -1 / sqrt(1 * (2/3))
        let expect = -1.0 / (2.0f64 / 3.0).sqrt();
        assert!((r.pooled.t - expect).abs() < 1e-12);
        assert_eq!(r.pooled.df, 4.0);
        let same = two_sample_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(same.pooled.t, 0.0);
        assert_eq!(same.pooled.p_two_sided, 1.0);
        let ten = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let other: Vec<f64> = ten.iter().map(|v| v * 1.5).collect();
        assert_eq!(two_sample_t_test(&ten, &other).unwrap().pooled.df, 18.0);
        assert!(two_sample_t_test(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn bonferroni_cases() {
        assert_eq!(bonferroni(&[0.01]).unwrap(), vec![0.01]);
        let adj = bonferroni(&[0.01, 0.04]).unwrap();
        assert!((adj[0] - 0.02).abs() < 1e-15 && (adj[1] - 0.08).abs() < 1e-15);
        let p: Vec<f64> = (0..21).map(|i| i as f64 / 100.0).collect();
        let adj = bonferroni(&p).unwrap();
        for (a, p) in adj.iter().zip(&p) {
            assert!((a - (p * 21.0).min(1.0)).abs() < 1e-12);
        }
        assert!(bonferroni(&[1.2]).is_err());
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.2), "");
        assert_eq!(significance_stars(0.04), "*");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.0001), "***");
    }

    fn run(id: &str, rho: f64) -> CorrResult {
        CorrResult {
            run_id: id.into(),
            feature: "beta_power".into(),
            rho,
            n: 178,
            p_two_sided: 0.0,
        }
    }

    #[test]
    fn aggregation() {
        let runs = vec![run("s1r1", 0.2), run("s2r1", 0.5), run("s1r2", 0.4)];
        let map: HashMap<_, _> = [("s1r1", "s1"), ("s1r2", "s1"), ("s2r1", "s2")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let v = aggregate_within_subject(&runs, &map, Aggregation::MeanR).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].subject_id, "s1");
        assert!((v[0].r - 0.3).abs() < 1e-15);
        assert_eq!(v[0].n_runs, 2);
        assert_eq!(v[1].r, 0.5);

        let z = aggregate_within_subject(&runs, &map, Aggregation::MeanZ).unwrap();
        let expect = ((0.2f64.atanh() + 0.4f64.atanh()) / 2.0).tanh();
        assert!((z[0].r - expect).abs() < 1e-15);

        let mut bad = runs.clone();
        bad.push(run("ghost", 0.1));
        assert!(aggregate_within_subject(&bad, &map, Aggregation::MeanR).is_err());
    }
}
