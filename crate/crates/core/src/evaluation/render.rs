use std::fmt::Write;

use super::{ConfusionMatrix, MetricsReport, ShiftRow};
use crate::corpus::Codebook;

fn label(code: &str, codebook: Option<&Codebook>) -> String {
    match codebook.and_then(|cb| cb.get(code)) {
        Some(cat) => format!("{code} {}", cat.label),
        None => code.to_string(),
    }
}

fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

/// Plain-text per-class table with percentages to one decimal.
pub fn render_report(report: &MetricsReport, codebook: Option<&Codebook>) -> String {
    let mut rows: Vec<[String; 5]> = report
        .per_class
        .iter()
        .map(|(code, m)| {
            [
                label(code, codebook),
                m.support.to_string(),
                pct(m.precision),
                pct(m.recall),
                pct(m.f1),
            ]
        })
        .collect();
    for (name, a) in [("micro avg", &report.micro_avg), ("macro avg", &report.macro_avg)] {
        rows.push([
            name.to_string(),
            String::new(),
            pct(a.precision),
            pct(a.recall),
            pct(a.f1),
        ]);
    }
    let header = ["Class", "Support", "Precision", "Recall", "F1"];
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let mut first = true;
        for (cell, w) in cells.iter().zip(widths) {
            if first {
                let _ = write!(out, "{cell:<w$}");
                first = false;
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
    };
    let _ = writeln!(out, "task: {}  instances: {}", report.task, report.n_instances);
    if let Some(p) = &report.positive {
        let _ = writeln!(
            out,
            "positive class: P {} R {} F1 {}",
            pct(p.precision),
            pct(p.recall),
            pct(p.f1)
        );
    }
    line(&mut out, &header);
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    if let Some(cm) = &report.confusion {
        out.push('\n');
        out.push_str(&render_confusion(cm));
    }
    out
}

/// CSV with one row per class followed by the two averages.
pub fn render_report_csv(report: &MetricsReport) -> String {
    let mut out = String::from("class,support,precision,recall,f1\n");
    for (code, m) in &report.per_class {
        let _ = writeln!(out, "{code},{},{:.3},{:.3},{:.3}", m.support, m.precision, m.recall, m.f1);
    }
    for (name, a) in [("micro_avg", &report.micro_avg), ("macro_avg", &report.macro_avg)] {
        let _ = writeln!(out, "{name},,{:.3},{:.3},{:.3}", a.precision, a.recall, a.f1);
    }
    out
}

pub fn render_confusion(cm: &ConfusionMatrix) -> String {
    let w = [cm.tp, cm.fp, cm.fn_, cm.tn]
        .iter()
        .map(|v| v.to_string().len())
        .max()
        .unwrap_or(1)
        .max(6);
    let mut out = String::new();
    let _ = writeln!(out, "{:<12}{:>w$}  {:>w$}", "", "gold+", "gold-");
    let _ = writeln!(out, "{:<12}{:>w$}  {:>w$}", "predicted+", cm.tp, cm.fp);
    let _ = writeln!(out, "{:<12}{:>w$}  {:>w$}", "predicted-", cm.fn_, cm.tn);
    out
}

pub fn render_shift(rows: &[ShiftRow], codebook: Option<&Codebook>) -> String {
    let mut out = String::new();
    let names: Vec<String> = rows.iter().map(|r| label(&r.code, codebook)).collect();
    let w = names.iter().map(|n| n.chars().count()).max().unwrap_or(5).max(8);
    let _ = writeln!(out, "{:<w$}  {:>7}  {:>7}  {:>7}", "Category", "A %", "B %", "delta");
    for (r, name) in rows.iter().zip(&names) {
        let _ = writeln!(
            out,
            "{name:<w$}  {:>7.1}  {:>7.1}  {:>+7.1}",
            r.pct_a, r.pct_b, r.delta
        );
    }
    out
}
