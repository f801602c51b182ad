//! Error analysis: token saliency, cue-word false-positive/false-negative
//! ratios, and overlap between two models' misclassifications.

mod cues;
mod overlap;
mod saliency;

pub use cues::{cue_analysis, CueReport, RatioStatus};
pub use overlap::{misclassification_overlap, monte_carlo_overlap, MonteCarloOverlap, OverlapReport};
pub use saliency::{render_saliency, saliency_from_embeddings, token_saliency, SaliencyMap, SaliencyMethod};
