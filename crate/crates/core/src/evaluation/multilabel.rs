use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{class_metrics, round_to, ClassMetrics, MetricsReport, Task};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Averages {
    pub(crate) fn mean<'a>(all: impl IntoIterator<Item = &'a Averages>) -> Averages {
        let mut n = 0usize;
        let mut acc = Averages::default();
        for a in all {
            n += 1;
            acc.precision += a.precision;
            acc.recall += a.recall;
            acc.f1 += a.f1;
        }
        if n == 0 {
            return acc;
        }
        let n = n as f64;
        Averages {
            precision: acc.precision / n,
            recall: acc.recall / n,
            f1: acc.f1 / n,
        }
    }

    pub(crate) fn round(&mut self, decimals: i32) {
        self.precision = round_to(self.precision, decimals);
        self.recall = round_to(self.recall, decimals);
        self.f1 = round_to(self.f1, decimals);
    }
}

/// Unweighted means of per-class precision, recall and F1, each averaged on
/// its own.
pub fn macro_average(classes: &[ClassMetrics]) -> Averages {
    if classes.is_empty() {
        return Averages::default();
    }
    let n = classes.len() as f64;
    Averages {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / n,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / n,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / n,
    }
}

/// One-vs-rest metrics for every label in `label_space`, with macro and
/// micro aggregates.
pub fn multilabel_report(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
    label_space: &[String],
) -> Result<MetricsReport> {
    if gold.len() != pred.len() {
        return Err(Error::Metric(format!(
            "gold has {} instances but prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    let index: HashMap<&str, usize> = label_space
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    if index.len() != label_space.len() {
        return Err(Error::Metric("label space contains duplicates".into()));
    }
    let lookup = |l: &String| {
        index
            .get(l.as_str())
            .copied()
            .ok_or_else(|| Error::Metric(format!("label `{l}` is not in the label space")))
    };
    let mut counts = vec![(0u64, 0u64, 0u64); label_space.len()];
    for (g, p) in gold.iter().zip(pred) {
        for l in g {
            let i = lookup(l)?;
            if p.contains(l) {
                counts[i].0 += 1;
            } else {
                counts[i].2 += 1;
            }
        }
        for l in p {
            let i = lookup(l)?;
            if !g.contains(l) {
                counts[i].1 += 1;
            }
        }
    }
    let per_class: Vec<ClassMetrics> = counts
        .iter()
        .map(|&(tp, fp, fn_)| class_metrics(tp, fp, fn_))
        .collect();
    let (tp, fp, fn_) = counts
        .iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    let micro = class_metrics(tp, fp, fn_);
    Ok(MetricsReport {
        task: Task::Categorization,
        positive: None,
        macro_avg: macro_average(&per_class),
        micro_avg: Averages {
            precision: micro.precision,
            recall: micro.recall,
            f1: micro.f1,
        },
        per_class: label_space.iter().cloned().zip(per_class).collect::<BTreeMap<_, _>>(),
        confusion: None,
        n_instances: gold.len(),
    })
}
