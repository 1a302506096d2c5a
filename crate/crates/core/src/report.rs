//! Static SVG and CSV summaries of per-run correlations and group statistics.

use crate::num::Num;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::io;
use crate::pipeline::{pair_label, CorrRow, PAIRS};
use crate::stats::{Aggregation, GroupStats};

const LEGEND: &str = "* p<0.05  ** p<0.01  *** p<0.001 (Bonferroni-adjusted across runs)";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bars of per-run rho on a [-1, 1] axis, stars at the bar end.
pub fn run_bars_svg(title: &str, rows: &[&CorrRow]) -> String {
    let row_h = 18.0;
    let (left, width) = (140.0, 400.0);
    let top = 40.0;
    let height = top + row_h * rows.len() as f64 + 50.0;
    let x_of = |r: f64| left + (r.clamp(-1.0, 1.0) + 1.0) / 2.0 * width;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        left + width + 60.0
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="13">{}</text>"#, esc(title));
    let zero = x_of(0.0);
    let bottom = top + row_h * rows.len() as f64;
    let _ = writeln!(
        s,
        r#"<line x1="{zero}" y1="{top}" x2="{zero}" y2="{bottom}" stroke="black"/>"#
    );
    for (i, r) in rows.iter().enumerate() {
        let y = top + i as f64 * row_h;
        let (x0, x1) = if r.rho >= 0.0 {
            (zero, x_of(r.rho))
        } else {
            (x_of(r.rho), zero)
        };
        let fill = if r.rho >= 0.0 { "#3b6ea8" } else { "#b0503c" };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + 13.0,
            esc(&r.run_id)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{}" width="{:.2}" height="{}" fill="{fill}"/>"#,
            y + 3.0,
            (x1 - x0).max(0.5),
            row_h - 6.0
        );
        if !r.stars.is_empty() {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}">{}</text>"#,
                x1 + 4.0,
                y + 13.0,
                r.stars
            );
        }
    }
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{tick}</text>"#,
            x_of(tick),
            bottom + 15.0
        );
    }
    let _ = writeln!(s, r#"<text x="10" y="{}">{LEGEND}</text>"#, bottom + 38.0);
    s.push_str("</svg>\n");
    s
}

/// Mean r with a one-SD whisker per feature pair.
pub fn group_bars_svg(stats: &[GroupStats], how: Aggregation) -> String {
    let col_w = 110.0;
    let (top, plot_h) = (40.0, 200.0);
    let width = 60.0 + col_w * stats.len() as f64;
    let y_of = |r: f64| top + (1.0 - (r.clamp(-1.0, 1.0) + 1.0) / 2.0) * plot_h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" font-family="sans-serif" font-size="11">"#,
        top + plot_h + 80.0
    );
    let _ = writeln!(
        s,
        r#"<text x="10" y="20" font-size="13">Group mean r (one-sample t on Fisher z)</text>"#
    );
    let zero = y_of(0.0);
    let _ = writeln!(
        s,
        r#"<line x1="40" y1="{zero}" x2="{width}" y2="{zero}" stroke="black"/>"#
    );
    for (i, g) in stats.iter().enumerate() {
        let x = 50.0 + i as f64 * col_w;
        let y = y_of(g.mean_r);
        let (y0, y1) = if g.mean_r >= 0.0 { (y, zero) } else { (zero, y) };
        let _ = writeln!(
            s,
            r##"<rect x="{x}" y="{y0:.2}" width="{}" height="{:.2}" fill="#3b6ea8"/>"##,
            col_w - 30.0,
            (y1 - y0).max(0.5)
        );
        let cx = x + (col_w - 30.0) / 2.0;
        let _ = writeln!(
            s,
            r#"<line x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#,
            y_of(g.mean_r - g.sd_r),
            y_of(g.mean_r + g.sd_r)
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{}" text-anchor="middle">{}</text>"#,
            top + plot_h + 15.0,
            esc(&g.feature.replace("_vs_", " / "))
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{}" text-anchor="middle">t={:.3} p={:.3e}</text>"#,
            top + plot_h + 30.0,
            g.t,
            g.p_two_sided
        );
    }
    let how = match how {
        Aggregation::MeanR => "runs averaged in r before Fisher z",
        Aggregation::MeanZ => "runs averaged in Fisher z",
    };
    let _ = writeln!(s, r#"<text x="10" y="{}">{how}</text>"#, top + plot_h + 60.0);
    s.push_str("</svg>\n");
    s
}

/// Per pair: runs, mean rho, runs significant after adjustment.
pub fn summary_csv(rows: &[CorrRow]) -> String {
    let mut out = String::from("feature,target,n_runs,mean_rho,n_positive,n_significant\n");
    for (f, t) in PAIRS {
        let sel: Vec<&CorrRow> = rows.iter().filter(|r| r.feature == f && r.target == t).collect();
        if sel.is_empty() {
            continue;
        }
        let mean = sel.iter().map(|r| r.rho).sum::<f64>() / sel.len() as f64;
        let pos = sel.iter().filter(|r| r.rho > 0.0).count();
        let sig = sel.iter().filter(|r| !r.stars.is_empty()).count();
        let _ = writeln!(out, "{f},{t},{},{},{pos},{sig}", sel.len(), Num(mean));
    }
    out
}

/// `summary.csv`, one SVG per feature pair and `group.svg` (when present).
pub fn write_report(dir: &Path, rows: &[CorrRow], group: &[GroupStats], how: Aggregation) -> Result<()> {
    io::write_text(&dir.join("summary.csv"), &summary_csv(rows))?;
    for (f, t) in PAIRS {
        let sel: Vec<&CorrRow> = rows.iter().filter(|r| r.feature == f && r.target == t).collect();
        if sel.is_empty() {
            continue;
        }
        let label = pair_label(f, t);
        io::write_text(
            &dir.join(format!("{label}.svg")),
            &run_bars_svg(&format!("Spearman rho per run: {f} vs {t}"), &sel),
        )?;
    }
    if !group.is_empty() {
        io::write_text(&dir.join("group.svg"), &group_bars_svg(group, how))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(run: &str, rho: f64, stars: &str) -> CorrRow {
        CorrRow {
            run_id: run.into(),
            subject_id: "s".into(),
            feature: "beta_power".into(),
            target: "pupil".into(),
            rho,
            n: 10,
            p_raw: 0.01,
            p_adj: 0.02,
            stars: stars.into(),
        }
    }

    #[test]
    fn svg_lists_every_run() {
        let rows = [row("a<1>", 0.4, "*"), row("b", -0.2, "")];
        let refs: Vec<&CorrRow> = rows.iter().collect();
        let svg = run_bars_svg("t", &refs);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;1&gt;"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }

    #[test]
    fn summary_counts() {
        let rows = [row("a", 0.4, "*"), row("b", -0.2, "")];
        let s = summary_csv(&rows);
        assert_eq!(s.lines().nth(1).unwrap(), "beta_power,pupil,2,0.1,1,1");
    }
}
