//! Rank correlation, normality gate and the group test on Fisher z.

use vigilance::stats::{bonferroni, fisher_z, group_test, shapiro_wilk, significance_stars, spearman};

fn main() -> vigilance::Result<()> {
    let x = [1.0, 2.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0];
    let y = [2.0, 1.0, 3.0, 3.0, 4.0, 9.0, 10.0, 30.0];
    let r = spearman(&x, &y)?;
    println!("Spearman rho {:.4}, p {:.4}", r.rho, r.p_two_sided);

    let sw = shapiro_wilk(&y)?;
    println!("Shapiro-Wilk on y: W {:.4}, p {:.4}", sw.w, sw.p_value);

    let p = [0.001, 0.02, 0.3];
    for (raw, adj) in p.iter().zip(bonferroni(&p)?) {
        println!("p {raw} -> {adj:.3} {}", significance_stars(adj));
    }

    // one averaged r per subject
    let per_subject = [0.31, 0.22, 0.45, 0.18, 0.29, 0.41, 0.25, 0.36, 0.19, 0.40];
    println!("z(0.306) = {:.4}", fisher_z(0.306)?);
    let g = group_test("beta_power_vs_pupil", &per_subject)?;
    println!(
        "group: mean r {:.3}, t({}) = {:.3}, p {:.2e}, d {:.3}",
        g.mean_r, g.df, g.t, g.p_two_sided, g.cohens_d
    );
    Ok(())
}
