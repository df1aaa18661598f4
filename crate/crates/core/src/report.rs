//! Text renderings of an [`ExperimentReport`].

use std::fmt::Write;

use crate::evaluation::{ExperimentReport, PointSummary};

/// Compact parameter label: `1e-2`, `3.162e-2`, `10`.
pub fn format_param(v: Option<f64>) -> String {
    let Some(v) = v else { return "-".into() };
    if (1e-2..1e3).contains(&v) && (v * 1e3).fract() == 0.0 {
        return format!("{v}");
    }
    let s = format!("{v:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format has an exponent");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

fn mean_std_cell(mean: Option<f64>, std: Option<f64>) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{m:.3} ± {s:.3}"),
        _ => "failed".into(),
    }
}

fn rd_cell(p: &PointSummary) -> String {
    match (p.rd_mean, p.rd_std, p.undefined_rd_count) {
        (Some(m), Some(s), 0) => format!("{m:.3} ± {s:.3}"),
        (Some(m), Some(s), k) => format!("{m:.3} ± {s:.3} n/a({k})"),
        (None, _, k) if p.acc_mean.is_some() => format!("n/a({k})"),
        _ => "failed".into(),
    }
}

/// Fixed-width table with one row per grid point.
pub fn render_table(report: &ExperimentReport) -> String {
    let header = ["method", "epsilon", "delta", "accuracy", "RD"];
    let rows: Vec<[String; 5]> = report
        .points
        .iter()
        .map(|p| {
            [
                p.method.to_string(),
                format_param(p.epsilon),
                format_param(p.delta),
                mean_std_cell(p.acc_mean, p.acc_std),
                rd_cell(p),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset: {} rows, d = {}, sha256 {}",
        report.dataset.n_rows,
        report.dataset.d,
        &report.dataset.checksum[..report.dataset.checksum.len().min(12)]
    );
    let _ = writeln!(out, "runs per point: {}", report.runs);
    let line = |out: &mut String, cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join(" | ").trim_end());
    };
    line(&mut out, &header.map(String::from));
    let _ = writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-"));
    for r in &rows {
        line(&mut out, r);
    }
    out
}
