//! Deterministic corpora for tests, benchmarks and demos: fixtures with the
//! size and label statistics of the German and English evaluation corpora, and a
//! generated bilingual claims corpus with a dictionary translator.

mod bilingual;
mod shaped;

pub use bilingual::{bilingual_claims, BilingualCorpus, BilingualParams};
pub use shaped::{debatenet_shaped, guardian_shaped};
