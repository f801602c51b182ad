use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{round_to, Averages, MetricsReport, Task, CLAIM_LABEL, NO_CLAIM_LABEL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same matrix with positive and negative classes swapped.
    pub fn flipped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when any of the three ratios had a zero denominator.
    #[serde(default)]
    pub zero_division: bool,
}

impl ClassMetrics {
    /// Builds metrics from given precision/recall/F1 values, e.g. to
    /// re-aggregate per-class tables given only as rounded values.
    pub fn from_values(precision: f64, recall: f64, f1: f64, support: u64) -> Self {
        ClassMetrics {
            precision,
            recall,
            f1,
            support,
            zero_division: false,
        }
    }

    pub(crate) fn mean(all: &[ClassMetrics]) -> Result<ClassMetrics> {
        let first = all
            .first()
            .ok_or_else(|| Error::Metric("cannot average zero class metrics".into()))?;
        if all.iter().any(|m| m.support != first.support) {
            return Err(Error::Metric("class support differs between runs".into()));
        }
        let n = all.len() as f64;
        Ok(ClassMetrics {
            precision: all.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: all.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: all.iter().map(|m| m.f1).sum::<f64>() / n,
            support: first.support,
            zero_division: all.iter().any(|m| m.zero_division),
        })
    }

    pub(crate) fn round(&mut self, decimals: i32) {
        self.precision = round_to(self.precision, decimals);
        self.recall = round_to(self.recall, decimals);
        self.f1 = round_to(self.f1, decimals);
    }
}

/// Precision, recall and F1 from one-vs-rest counts.
pub fn class_metrics(tp: u64, fp: u64, fn_: u64) -> ClassMetrics {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fn_);
    let f1 = match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    ClassMetrics {
        precision: p.unwrap_or(0.0),
        recall: r.unwrap_or(0.0),
        f1: f1.unwrap_or(0.0),
        support: tp + fn_,
        zero_division: p.is_none() || r.is_none(),
    }
}

pub fn confusion(gold: &[bool], pred: &[bool]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::Metric(format!(
            "gold has {} labels but prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        match (g, p) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Metrics of the claim (positive) class.
pub fn f1_positive(cm: &ConfusionMatrix) -> ClassMetrics {
    class_metrics(cm.tp, cm.fp, cm.fn_)
}

/// Identification report: positive-class metrics, both classes, macro over
/// the two classes and micro (accuracy).
pub fn binary_report(gold: &[bool], pred: &[bool]) -> Result<MetricsReport> {
    let cm = confusion(gold, pred)?;
    let pos = f1_positive(&cm);
    let neg = f1_positive(&cm.flipped());
    let macro_avg = super::macro_average(&[pos.clone(), neg.clone()]);
    let micro = class_metrics(cm.tp + cm.tn, cm.fp + cm.fn_, cm.fn_ + cm.fp);
    Ok(MetricsReport {
        task: Task::Identification,
        positive: Some(pos.clone()),
        per_class: BTreeMap::from([
            (CLAIM_LABEL.to_string(), pos),
            (NO_CLAIM_LABEL.to_string(), neg),
        ]),
        macro_avg,
        micro_avg: Averages {
            precision: micro.precision,
            recall: micro.recall,
            f1: micro.f1,
        },
        confusion: Some(cm),
        n_instances: gold.len(),
    })
}
