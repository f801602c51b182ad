//! Pattern matching shared by article filtering and cue analysis.
//!
//! The default [`PrefixStemMatcher`] is case-insensitive and anchors every
//! pattern token at a word start: `refugee` matches `Refugees`, `forder`
//! matches `fordert` and `Forderung`, but `fugee` matches nothing. A
//! multi-word pattern (`angela merkel`) must match consecutive words.

/// Decides whether a text mentions any of a set of patterns.
pub trait Matcher: Send + Sync {
    fn matches(&self, text: &str, pattern: &str) -> bool;

    fn matches_any(&self, text: &str, patterns: &[String]) -> bool {
        patterns.iter().any(|p| self.matches(text, p))
    }
}

/// Lowercased alphanumeric word runs of `text`.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PrefixStemMatcher;

impl PrefixStemMatcher {
    fn matches_words(text_words: &[String], pattern: &str) -> bool {
        let pat = words(pattern);
        if pat.is_empty() || pat.len() > text_words.len() {
            return false;
        }
        text_words
            .windows(pat.len())
            .any(|win| win.iter().zip(&pat).all(|(w, p)| w.starts_with(p.as_str())))
    }
}

impl Matcher for PrefixStemMatcher {
    fn matches(&self, text: &str, pattern: &str) -> bool {
        Self::matches_words(&words(text), pattern)
    }

    fn matches_any(&self, text: &str, patterns: &[String]) -> bool {
        let text_words = words(text);
        patterns.iter().any(|p| Self::matches_words(&text_words, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_stem_semantics() {
        let m = PrefixStemMatcher;
        assert!(m.matches("Thousands of Refugees arrived.", "refugee"));
        assert!(m.matches("Die SPD fordert mehr Geld", "forder"));
        assert!(m.matches("Eine Forderung der Union", "forder"));
        assert!(!m.matches("Thousands of refugees arrived.", "fugee"));
        assert!(!m.matches("", "refugee"));
        assert!(!m.matches("anything", ""));
    }

    #[test]
    fn multiword_patterns_need_consecutive_words() {
        let m = PrefixStemMatcher;
        assert!(m.matches("Chancellor Angela Merkel said", "angela merkel"));
        assert!(!m.matches("Angela said Merkel", "angela merkel"));
    }

    #[test]
    fn unicode_case_folding() {
        let m = PrefixStemMatcher;
        assert!(m.matches("FLÜCHTLINGE am Bahnhof", "flüchtling"));
    }
}
