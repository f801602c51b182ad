use serde::{Deserialize, Serialize};

use crate::matcher::Matcher;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioStatus {
    Defined,
    /// The cue occurs in false positives but in no false negative.
    Infinite,
    /// The cue occurs in no false positive; the ratio is reported as 0.
    ZeroNumerator,
    /// One of the error sets is empty.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueReport {
    pub patterns: Vec<String>,
    pub fp_matches: usize,
    pub fn_matches: usize,
    pub fp_total: usize,
    pub fn_total: usize,
    /// `(fp_matches / fp_total) / (fn_matches / fn_total)` when defined,
    /// 0 for a zero numerator, absent otherwise.
    pub ratio: Option<f64>,
    pub status: RatioStatus,
}

/// How much more often a cue occurs among false positives than among false
/// negatives, compared by rate so unequal error counts are accounted for.
pub fn cue_analysis<M: Matcher + ?Sized>(
    fp_sentences: &[String],
    fn_sentences: &[String],
    patterns: &[String],
    matcher: &M,
) -> CueReport {
    let count = |xs: &[String]| xs.iter().filter(|s| matcher.matches_any(s, patterns)).count();
    let (fp_matches, fn_matches) = (count(fp_sentences), count(fn_sentences));
    let (fp_total, fn_total) = (fp_sentences.len(), fn_sentences.len());
    let (ratio, status) = if fp_total == 0 || fn_total == 0 {
        (None, RatioStatus::Undefined)
    } else if fp_matches == 0 {
        (Some(0.0), RatioStatus::ZeroNumerator)
    } else if fn_matches == 0 {
        (None, RatioStatus::Infinite)
    } else {
        let r = (fp_matches as f64 / fp_total as f64) / (fn_matches as f64 / fn_total as f64);
        (Some(r), RatioStatus::Defined)
    };
    CueReport {
        patterns: patterns.to_vec(),
        fp_matches,
        fn_matches,
        fp_total,
        fn_total,
        ratio,
        status,
    }
}
