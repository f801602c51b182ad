//! Compatible test-set construction for a new outlet.
//!
//! The reference corpus decides *when* to sample: its most frequent months,
//! and within each month the fixed-length window holding the most reference
//! articles. The candidate pool is then restricted to those windows and to
//! articles mentioning both a topical keyword and a salient actor, and a
//! seeded sample is drawn with per-month quotas proportional to reference
//! frequency.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::matcher::Matcher;
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Validation(format!("invalid month {month}")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("validated month")
    }

    pub fn days(self) -> u32 {
        let next = if self.month == 12 {
            NaiveDate::from_ymd_opt(self.year + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(self.year, self.month + 1, 1)
        }
        .expect("valid date");
        (next - self.first_day()).num_days() as u32
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl std::str::FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        YearMonth::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Unannotated articles from the target outlet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    pub documents: Vec<Document>,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Reference articles inside the window.
    pub count: usize,
}

impl DateWindow {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

pub fn month_frequency(documents: &[Document]) -> BTreeMap<YearMonth, usize> {
    let mut freq = BTreeMap::new();
    for d in documents {
        *freq.entry(YearMonth::of(d.date)).or_default() += 1;
    }
    freq
}

/// The `k` most frequent months; ties go to the earlier month.
pub fn top_months(freq: &BTreeMap<YearMonth, usize>, k: usize) -> Vec<(YearMonth, usize)> {
    let mut months: Vec<(YearMonth, usize)> = freq.iter().map(|(m, c)| (*m, *c)).collect();
    months.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    months.truncate(k);
    months
}

/// Best `window_days`-long window starting within `month`, by number of the
/// month's own reference articles inside it; ties go to the earliest start.
/// Because of the tie rule the winner lies inside the month whenever the
/// month is at least `window_days` long.
pub fn top_window(documents: &[Document], month: YearMonth, window_days: u32) -> Result<DateWindow> {
    if window_days == 0 {
        return Err(Error::Config("window length must be at least one day".into()));
    }
    let mut dates: Vec<NaiveDate> = documents
        .iter()
        .map(|d| d.date)
        .filter(|d| YearMonth::of(*d) == month)
        .collect();
    if dates.is_empty() {
        return Err(Error::Validation(format!(
            "month {month} has no reference articles"
        )));
    }
    dates.sort_unstable();
    let span = Duration::days(i64::from(window_days) - 1);
    let mut best: Option<DateWindow> = None;
    for offset in 0..month.days() {
        let start = month.first_day() + Duration::days(i64::from(offset));
        let end = start + span;
        let count = dates.partition_point(|d| *d <= end) - dates.partition_point(|d| *d < start);
        if best.is_none_or(|b| count > b.count) {
            best = Some(DateWindow { start, end, count });
        }
    }
    Ok(best.expect("every month has at least 28 days"))
}

/// Articles mentioning at least one keyword and at least one actor.
pub fn filter_articles<M: Matcher>(
    documents: &[Document],
    keywords: &[String],
    actors: &[String],
    matcher: &M,
) -> Result<Vec<Document>> {
    if keywords.is_empty() || actors.is_empty() {
        return Err(Error::Config(
            "article filtering needs at least one keyword and one actor".into(),
        ));
    }
    Ok(documents
        .iter()
        .filter(|d| {
            let text = d.text();
            matcher.matches_any(&text, keywords) && matcher.matches_any(&text, actors)
        })
        .cloned()
        .collect())
}

/// Apportions `total` over `weights` by the largest-remainder method (ties to
/// the lower index).
pub(crate) fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| (e + 1e-9).floor() as usize).collect();
    let mut left = total.saturating_sub(out.iter().sum());
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - out[b] as f64)
            .total_cmp(&(exact[a] - out[a] as f64))
            .then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Quotas proportional to `weights`, capped by `caps`; capacity left unused
/// by a capped month is redistributed over the others.
pub(crate) fn capped_quotas(target: usize, weights: &[f64], caps: &[usize]) -> Vec<usize> {
    let mut quota = vec![0usize; weights.len()];
    let mut remaining = target.min(caps.iter().sum());
    while remaining > 0 {
        let open: Vec<usize> = (0..weights.len()).filter(|&i| quota[i] < caps[i]).collect();
        if open.is_empty() {
            break;
        }
        let w: Vec<f64> = open.iter().map(|&i| weights[i]).collect();
        let alloc = largest_remainder(remaining, &w);
        let mut progressed = false;
        for (&i, a) in open.iter().zip(alloc) {
            let add = a.min(caps[i] - quota[i]);
            if add > 0 {
                progressed = true;
            }
            quota[i] += add;
            remaining -= add;
        }
        if !progressed {
            // zero-weight months only; fill them in order
            for &i in &open {
                let add = remaining.min(caps[i] - quota[i]);
                quota[i] += add;
                remaining -= add;
            }
        }
    }
    quota
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub top_k: usize,
    pub window_days: u32,
    pub keywords: Vec<String>,
    pub actors: Vec<String>,
    pub target_size: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            top_k: 5,
            window_days: 7,
            keywords: ["migrant", "refugee", "asylum", "germany", "german", "syria", "afghan"]
                .map(String::from)
                .to_vec(),
            actors: Vec::new(),
            target_size: 36,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthPlan {
    pub month: YearMonth,
    pub reference_count: usize,
    pub window: DateWindow,
    pub eligible: usize,
    pub quota: usize,
    pub sampled: Vec<String>,
}

/// The realized sampling procedure, emitted next to the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub months: Vec<MonthPlan>,
    pub window_days: u32,
    pub keywords: Vec<String>,
    pub actors: Vec<String>,
    pub target_size: usize,
    pub seed: u64,
    pub quota_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub plan: SamplingPlan,
    pub documents: Vec<Document>,
    /// Number of documents missing from `target_size`, if any.
    pub shortfall: Option<usize>,
}

pub fn sample_test_set<M: Matcher>(
    reference: &[Document],
    pool: &CandidatePool,
    params: &SamplingParams,
    matcher: &M,
    exec: Execution,
) -> Result<SampleOutcome> {
    if pool.documents.is_empty() {
        return Err(Error::Validation(format!(
            "candidate pool `{}` is empty",
            pool.source
        )));
    }
    let freq = month_frequency(reference);
    if freq.is_empty() {
        return Err(Error::Validation("reference corpus has no articles".into()));
    }
    let months = top_months(&freq, params.top_k);
    if months.len() < params.top_k {
        log::warn!(
            "reference corpus covers only {} months, fewer than top-k {}",
            months.len(),
            params.top_k
        );
    }

    let windows: Vec<DateWindow> = exec
        .try_map(&months, |(m, _)| top_window(reference, *m, params.window_days))?;
    let filtered = filter_articles(&pool.documents, &params.keywords, &params.actors, matcher)?;

    // A document belongs to the first month (in plan order) whose window
    // contains it, so overlapping windows never yield duplicates.
    let mut taken: HashSet<&str> = HashSet::new();
    let mut eligible: Vec<Vec<&Document>> = Vec::with_capacity(months.len());
    for w in &windows {
        let mut docs: Vec<&Document> = filtered
            .iter()
            .filter(|d| w.contains(d.date) && !taken.contains(d.id.as_str()))
            .collect();
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        taken.extend(docs.iter().map(|d| d.id.as_str()));
        eligible.push(docs);
    }

    let weights: Vec<f64> = months.iter().map(|(_, c)| *c as f64).collect();
    let caps: Vec<usize> = eligible.iter().map(Vec::len).collect();
    let quotas = capped_quotas(params.target_size, &weights, &caps);

    let indices: Vec<usize> = (0..months.len()).collect();
    let sampled: Vec<Vec<Document>> = exec.map(&indices, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(i as u64);
        let mut docs = eligible[i].clone();
        docs.shuffle(&mut rng);
        docs.into_iter().take(quotas[i]).cloned().collect()
    });

    let month_plans = months
        .iter()
        .zip(&windows)
        .zip(&eligible)
        .zip(&quotas)
        .zip(&sampled)
        .map(|(((((m, c), w), e), q), s)| MonthPlan {
            month: *m,
            reference_count: *c,
            window: *w,
            eligible: e.len(),
            quota: *q,
            sampled: s.iter().map(|d| d.id.clone()).collect(),
        })
        .collect();
    let documents: Vec<Document> = sampled.into_iter().flatten().collect();
    let shortfall = params
        .target_size
        .checked_sub(documents.len())
        .filter(|&s| s > 0);
    if let Some(s) = shortfall {
        log::warn!("sample is {s} documents short of the target size {}", params.target_size);
    }
    Ok(SampleOutcome {
        plan: SamplingPlan {
            months: month_plans,
            window_days: params.window_days,
            keywords: params.keywords.clone(),
            actors: params.actors.clone(),
            target_size: params.target_size,
            seed: params.seed,
            quota_rule: "largest-remainder, proportional to reference month frequency, \
                         capped by window candidates with redistribution"
                .to_string(),
        },
        documents,
        shortfall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::PrefixStemMatcher;

    fn dated(id: &str, y: i32, m: u32, d: u32) -> Document {
        Document {
            id: id.into(),
            outlet: "ref".into(),
            date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            language: "de".into(),
            sentences: vec!["x".into()],
        }
    }

    fn with_text(id: &str, date: (i32, u32, u32), text: &str) -> Document {
        Document {
            sentences: vec![text.into()],
            ..dated(id, date.0, date.1, date.2)
        }
    }

    #[test]
    fn month_counts() {
        let docs = [
            dated("a", 2015, 9, 1),
            dated("b", 2015, 9, 2),
            dated("c", 2015, 9, 30),
            dated("d", 2015, 10, 1),
        ];
        let f = month_frequency(&docs);
        assert_eq!(f.len(), 2);
        assert_eq!(f[&YearMonth::new(2015, 9).unwrap()], 3);
        assert_eq!(f[&YearMonth::new(2015, 10).unwrap()], 1);
        assert!(month_frequency(&[]).is_empty());
    }

    #[test]
    fn uniform_months_break_ties_early() {
        let docs: Vec<Document> = (1..=12).map(|m| dated(&format!("d{m}"), 2015, m, 10)).collect();
        let top = top_months(&month_frequency(&docs), 5);
        let months: Vec<u32> = top.iter().map(|(m, _)| m.month).collect();
        assert_eq!(months, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn window_examples() {
        let sept = YearMonth::new(2015, 9).unwrap();
        let docs = [dated("a", 2015, 9, 1), dated("b", 2015, 9, 2), dated("c", 2015, 9, 3)];
        let w = top_window(&docs, sept, 7).unwrap();
        assert_eq!(w.start, NaiveDate::from_ymd_opt(2015, 9, 1).unwrap());
        assert_eq!(w.end, NaiveDate::from_ymd_opt(2015, 9, 7).unwrap());
        assert_eq!(w.count, 3);

        let docs = [dated("a", 2015, 9, 1), dated("b", 2015, 9, 20)];
        let w = top_window(&docs, sept, 7).unwrap();
        assert_eq!(w.start.day(), 1);
        assert_eq!(w.count, 1);

        let oct = YearMonth::new(2015, 10).unwrap();
        assert!(top_window(&docs, oct, 7).is_err());
        assert!(top_window(&docs, sept, 0).is_err());
    }

    #[test]
    fn next_month_articles_do_not_count() {
        let sept = YearMonth::new(2015, 9).unwrap();
        let docs = [
            dated("a", 2015, 9, 29),
            dated("b", 2015, 10, 1),
            dated("c", 2015, 10, 2),
            dated("d", 2015, 9, 2),
        ];
        let w = top_window(&docs, sept, 7).unwrap();
        assert_eq!(w.count, 1);
        assert_eq!(w.start, NaiveDate::from_ymd_opt(2015, 9, 1).unwrap());
        let late = [dated("a", 2015, 9, 30)];
        let w = top_window(&late, sept, 7).unwrap();
        assert_eq!((w.start.day(), w.end.day()), (24, 30));
    }

    #[test]
    fn filter_is_conjunctive() {
        let m = PrefixStemMatcher;
        let kw = vec!["refugee".to_string()];
        let actors = vec!["Merkel".to_string()];
        let docs = [
            with_text("keep", (2015, 9, 1), "Merkel welcomed the refugees."),
            with_text("drop", (2015, 9, 1), "The refugees arrived in Munich."),
        ];
        let out = filter_articles(&docs, &kw, &actors, &m).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "keep");
        assert!(filter_articles(&docs, &[], &actors, &m).is_err());
    }

    #[test]
    fn quotas() {
        assert_eq!(largest_remainder(36, &[5.0, 4.0, 3.0, 2.0, 1.0]), vec![12, 10, 7, 5, 2]);
        assert_eq!(largest_remainder(0, &[1.0]), vec![0]);
        assert_eq!(capped_quotas(10, &[1.0, 1.0], &[2, 20]), vec![2, 8]);
        assert_eq!(capped_quotas(10, &[1.0, 1.0], &[2, 3]), vec![2, 3]);
    }

    #[test]
    fn exact_eligible_count_returns_everything() {
        let reference: Vec<Document> = (1..=5)
            .flat_map(|m| (0..m).map(move |i| dated(&format!("r{m}-{i}"), 2015, m, 3)))
            .collect();
        let pool_docs: Vec<Document> = (1..=5)
            .map(|m| with_text(&format!("p{m}"), (2015, m, 4), "Merkel on refugee policy"))
            .collect();
        let pool = CandidatePool {
            documents: pool_docs,
            source: "guardian".into(),
        };
        let params = SamplingParams {
            actors: vec!["merkel".into()],
            target_size: 5,
            ..Default::default()
        };
        let out = sample_test_set(&reference, &pool, &params, &PrefixStemMatcher, Execution::default())
            .unwrap();
        assert_eq!(out.documents.len(), 5);
        assert_eq!(out.shortfall, None);

        let params = SamplingParams {
            target_size: 8,
            ..params
        };
        let out = sample_test_set(&reference, &pool, &params, &PrefixStemMatcher, Execution::default())
            .unwrap();
        assert_eq!(out.documents.len(), 5);
        assert_eq!(out.shortfall, Some(3));
    }

    #[test]
    fn empty_pool_is_error() {
        let pool = CandidatePool {
            documents: vec![],
            source: "g".into(),
        };
        let r = sample_test_set(
            &[dated("a", 2015, 1, 1)],
            &pool,
            &SamplingParams::default(),
            &PrefixStemMatcher,
            Execution::Sequential,
        );
        assert!(r.is_err());
    }
}
