use crate::pairwise::PairItem;
use regex::{Regex, RegexBuilder};

/// Shipped patterns for questions that ask for an approximate magnitude.
pub const DEFAULT_ESTIMATION_PATTERNS: &[&str] = &[
    r"\bapproximate(ly)?\b",
    r"\bestimat(e|ed|es|ion)\b",
    r"\bballpark\b",
    r"\broughly\b",
    r"\border of magnitude\b",
    r"\babout how (many|much)\b",
    r"\brough (guess|figure|number)\b",
    r"\bfermi\b",
];

/// Case-insensitive regex list applied to the question text.
#[derive(Debug, Clone)]
pub struct EstimationDetector {
    patterns: Vec<Regex>,
}

impl Default for EstimationDetector {
    fn default() -> Self {
        Self::from_patterns(DEFAULT_ESTIMATION_PATTERNS.iter().copied())
            .expect("default patterns compile")
    }
}

impl EstimationDetector {
    pub fn from_patterns<'a>(patterns: impl IntoIterator<Item = &'a str>) -> Result<Self, regex::Error> {
        let patterns = patterns
            .into_iter()
            .map(|p| RegexBuilder::new(p).case_insensitive(true).build())
            .collect::<Result<_, _>>()?;
        Ok(Self { patterns })
    }

    /// Detector that never fires.
    pub fn disabled() -> Self {
        Self { patterns: Vec::new() }
    }

    /// One pattern per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, regex::Error> {
        Self::from_patterns(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn fires(&self, item: &PairItem) -> bool {
        self.matches(&item.question)
    }

    pub fn matches(&self, question: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(question))
    }
}
