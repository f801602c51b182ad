use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{run, ExperimentConfig, ExperimentResult, Resources};
use crate::evaluation::Task;
use crate::rundir::RunDirectory;
use crate::{Execution, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub setup: String,
    pub train: String,
    pub test: String,
    /// Mean positive-class F1 of the identification run.
    pub id: Option<f64>,
    /// Mean macro F1 of the categorization run.
    pub cat: Option<f64>,
    pub id_best: bool,
    pub cat_best: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridTable {
    pub rows: Vec<GridRow>,
}

/// One row per (setup, train data, test data), pairing the identification
/// and categorization results of that setup. Maxima per column are flagged,
/// ties included.
pub fn grid_table(results: &[ExperimentResult]) -> GridTable {
    let mut rows: Vec<GridRow> = Vec::new();
    for r in results {
        let setup = r.plan.condition.label().to_string();
        let train = r.plan.train.label();
        let test = r.plan.test.label();
        let idx = match rows
            .iter()
            .position(|row| row.setup == setup && row.train == train && row.test == test)
        {
            Some(i) => i,
            None => {
                rows.push(GridRow {
                    setup,
                    train,
                    test,
                    id: None,
                    cat: None,
                    id_best: false,
                    cat_best: false,
                });
                rows.len() - 1
            }
        };
        let slot = match r.plan.task {
            Task::Identification => &mut rows[idx].id,
            Task::Categorization => &mut rows[idx].cat,
        };
        if slot.is_some() {
            log::warn!("{}: duplicate grid cell, keeping the first result", r.name);
        } else {
            *slot = Some(r.mean.headline());
        }
    }
    let max_of = |f: fn(&GridRow) -> Option<f64>, rows: &[GridRow]| {
        rows.iter().filter_map(f).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    let best_id = max_of(|r| r.id, &rows);
    let best_cat = max_of(|r| r.cat, &rows);
    for row in &mut rows {
        row.id_best = row.id.is_some() && row.id == best_id;
        row.cat_best = row.cat.is_some() && row.cat == best_cat;
    }
    GridTable { rows }
}

fn cell(v: Option<f64>, best: bool) -> String {
    match v {
        Some(v) => format!("{:.1}{}", v * 100.0, if best { "*" } else { "" }),
        None => "-".to_string(),
    }
}

impl GridTable {
    /// Aligned text table; `*` marks the best value of a column.
    pub fn render_text(&self) -> String {
        let header = ["Setup", "Train", "Test", "Id", "Cat"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.setup.clone(),
                    r.train.clone(),
                    r.test.clone(),
                    cell(r.id, r.id_best),
                    cell(r.cat, r.cat_best),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: [&str; 5]| {
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                if i < 3 {
                    let _ = write!(out, "{c:<w$}");
                } else {
                    let _ = write!(out, "{c:>w$}");
                }
            }
            out.push('\n');
        };
        line(header);
        for row in &body {
            line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("setup,train,test,id,cat,id_best,cat_best\n");
        let num = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.setup,
                r.train,
                r.test,
                num(r.id),
                num(r.cat),
                r.id_best,
                r.cat_best
            );
        }
        out
    }
}

/// Runs independent configurations, concurrently under a parallel strategy.
/// Results keep the input order; one failing configuration does not stop
/// the others.
pub fn run_grid(
    configs: &[ExperimentConfig],
    resources: &Resources,
    run_dir: Option<&RunDirectory>,
    exec: Execution,
) -> Vec<Result<ExperimentResult>> {
    exec.map(configs, |c| run(c, resources, run_dir, exec))
}
