//! Evaluation metrics: confusion matrices, positive-class and per-class
//! precision/recall/F1 with macro and micro aggregates, Cohen's kappa and
//! category-distribution shift.
//!
//! Undefined ratios (zero denominators) are reported as 0 and flagged with
//! `zero_division`. Macro F1 is the unweighted mean of per-class F1 scores,
//! not the F1 of macro precision and recall.

mod binary;
mod kappa;
mod multilabel;
mod render;
mod shift;

pub use binary::{binary_report, class_metrics, confusion, f1_positive, ClassMetrics, ConfusionMatrix};
pub use kappa::cohens_kappa;
pub use multilabel::{macro_average, multilabel_report, Averages};
pub use render::{render_confusion, render_report, render_report_csv, render_shift};
pub use shift::{distribution_shift, ShiftRow};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Identification,
    Categorization,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Identification => "identification",
            Task::Categorization => "categorization",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identification" | "id" => Ok(Task::Identification),
            "categorization" | "cat" => Ok(Task::Categorization),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

/// Label used for the positive class in identification reports.
pub const CLAIM_LABEL: &str = "claim";
/// Label used for the negative class in identification reports.
pub const NO_CLAIM_LABEL: &str = "no_claim";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    /// Positive-class metrics (identification only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<ClassMetrics>,
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub macro_avg: Averages,
    pub micro_avg: Averages,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    pub n_instances: usize,
}

impl MetricsReport {
    /// Positive-class F1 for identification, macro F1 for categorization.
    pub fn headline(&self) -> f64 {
        match self.task {
            Task::Identification => self.positive.as_ref().map_or(0.0, |p| p.f1),
            Task::Categorization => self.macro_avg.f1,
        }
    }

    /// Fieldwise mean over runs on the same test set. The confusion matrix is
    /// kept only when every run produced the same one.
    pub fn mean(reports: &[MetricsReport]) -> Result<MetricsReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Metric("cannot average zero reports".into()))?;
        for r in reports {
            if r.task != first.task || r.n_instances != first.n_instances {
                return Err(Error::Metric(
                    "reports to average must share task and test set size".into(),
                ));
            }
            if r.per_class.keys().ne(first.per_class.keys()) {
                return Err(Error::Metric("reports to average must share label space".into()));
            }
        }
        let positive = match &first.positive {
            Some(_) => {
                let all: Vec<ClassMetrics> = reports
                    .iter()
                    .map(|r| r.positive.clone().ok_or_else(|| Error::Metric("missing positive class".into())))
                    .collect::<Result<_>>()?;
                Some(ClassMetrics::mean(&all)?)
            }
            None => None,
        };
        let per_class = first
            .per_class
            .keys()
            .map(|k| {
                let all: Vec<ClassMetrics> = reports.iter().map(|r| r.per_class[k].clone()).collect();
                ClassMetrics::mean(&all).map(|m| (k.clone(), m))
            })
            .collect::<Result<_>>()?;
        let confusion = first
            .confusion
            .filter(|c| reports.iter().all(|r| r.confusion == Some(*c)));
        Ok(MetricsReport {
            task: first.task,
            positive,
            per_class,
            macro_avg: Averages::mean(reports.iter().map(|r| &r.macro_avg)),
            micro_avg: Averages::mean(reports.iter().map(|r| &r.micro_avg)),
            confusion,
            n_instances: first.n_instances,
        })
    }

    /// Copy with every real value rounded to `decimals` places.
    pub fn rounded(&self, decimals: i32) -> MetricsReport {
        let mut out = self.clone();
        if let Some(p) = out.positive.as_mut() {
            p.round(decimals);
        }
        for m in out.per_class.values_mut() {
            m.round(decimals);
        }
        out.macro_avg.round(decimals);
        out.micro_avg.round(decimals);
        out
    }
}

pub(crate) fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}
