//! Normality gate, rank correlation, Fisher z and t-based group inference.

mod correlation;
mod inference;
mod shapiro;
mod special;

pub use correlation::{average_ranks, fisher_z, pearson, rho_p_value, spearman, CorrResult};
pub use inference::{
    aggregate_within_subject, bonferroni, group_test, one_sample_t_test, significance_stars,
    two_sample_t_test, Aggregation, GroupStats, OneSampleTest, SubjectValue, TTest, TwoSampleTest,
};
pub use shapiro::{shapiro_wilk, shapiro_wilk_coefficients, ShapiroWilk};
pub use special::{inc_beta_reg, t_tail_two_sided};
