//! Text normalization, tokenization and stop-word filtering.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::parser::SectionKind;

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Lowercases `text`, replaces every character that is not an ASCII letter
/// or whitespace with a space, collapses whitespace runs and trims.
///
/// Letters outside `a-z`/`A-Z` count as non-letters, so the output only ever
/// contains `[a-z ]`.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_ascii_alphabetic() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Where a token sequence came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSource {
    pub doc_id: String,
    pub section: SectionKind,
    pub stopwords_removed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub source: TokenSource,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>, source: TokenSource) -> Self {
        Self { tokens, source }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits already-normalized text on single spaces.
pub fn tokenize(normalized: &str, source: TokenSource) -> TokenSequence {
    let tokens = if normalized.is_empty() {
        Vec::new()
    } else {
        normalized.split(' ').map(str::to_owned).collect()
    };
    TokenSequence::new(tokens, source)
}

/// Normalize then tokenize.
pub fn prepare(text: &str, source: TokenSource) -> TokenSequence {
    tokenize(&normalize(text), source)
}

#[derive(Debug, thiserror::Error)]
pub enum StopWordError {
    #[error("reading stop-word file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("stop-word file line {line}: {word:?} is not a lowercase a-z token")]
    InvalidWord { line: usize, word: String },
}

/// A set of stop-words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// The frozen English list shipped in `data/stopwords_en.txt`.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS).expect("bundled stop-word list is valid")
    }

    /// Parses the stop-word file format: one token per line, `#` starts a
    /// comment, blank lines ignored.
    pub fn parse(contents: &str) -> Result<Self, StopWordError> {
        let mut words = HashSet::new();
        for (idx, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !line.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(StopWordError::InvalidWord {
                    line: idx + 1,
                    word: line.to_owned(),
                });
            }
            words.insert(line.to_owned());
        }
        Ok(Self { words })
    }

    pub fn from_file(path: &Path) -> Result<Self, StopWordError> {
        let contents = fs::read_to_string(path).map_err(|source| StopWordError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&contents)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn remove_stopwords(seq: &TokenSequence, stopwords: &StopWords) -> TokenSequence {
    let tokens = seq
        .tokens
        .iter()
        .filter(|t| !stopwords.contains(t))
        .cloned()
        .collect();
    let mut source = seq.source.clone();
    source.stopwords_removed = true;
    TokenSequence::new(tokens, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn src() -> TokenSource {
        TokenSource {
            doc_id: "d".into(),
            section: SectionKind::Procedure,
            stopwords_removed: false,
        }
    }

    fn seq(words: &[&str]) -> TokenSequence {
        TokenSequence::new(words.iter().map(|w| w.to_string()).collect(), src())
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("The Court, in 1999, HELD:"), "the court in held");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("Art. 6 §1"), "art");
        assert_eq!(normalize("  multiple\t\nspaces  "), "multiple spaces");
        assert_eq!(normalize("café"), "caf");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("the court held", src()).tokens, ["the", "court", "held"]);
        assert!(tokenize("", src()).is_empty());
        let text = "a bb ccc";
        let n_spaces = text.matches(' ').count();
        assert_eq!(tokenize(text, src()).len(), n_spaces + 1);
    }

    #[test]
    fn stopword_removal() {
        let sw = StopWords::parse("the\n# comment\n\nof # trailing\n").unwrap();
        assert_eq!(sw.len(), 2);
        let out = remove_stopwords(&seq(&["the", "court", "held"]), &sw);
        assert_eq!(out.tokens, ["court", "held"]);
        assert!(out.source.stopwords_removed);
        assert!(remove_stopwords(&seq(&["the", "of", "the"]), &sw).is_empty());
        let twice = remove_stopwords(&out, &sw);
        assert_eq!(twice, out);
    }

    #[test]
    fn bundled_list_loads() {
        let sw = StopWords::bundled();
        assert!(sw.contains("the"));
        assert!(sw.contains("don"));
        assert!(!sw.contains("court"));
        assert!(sw.len() > 100);
    }

    #[test]
    fn invalid_stopword_line_reports_line() {
        let err = StopWords::parse("the\nDon't\n").unwrap_err();
        assert!(matches!(err, StopWordError::InvalidWord { line: 2, .. }));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in "\\PC{0,60}") {
            let once = normalize(&text);
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert!(once.bytes().all(|b| b == b' ' || b.is_ascii_lowercase()));
            prop_assert!(!once.contains("  "));
        }

        #[test]
        fn tokens_are_alphabetic(text in "\\PC{0,60}") {
            let toks = prepare(&text, src());
            for t in &toks.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(t.bytes().all(|b| b.is_ascii_lowercase()));
            }
        }

        #[test]
        fn removal_yields_subsequence(words in proptest::collection::vec("(the|of|a|court|held|law)", 0..20)) {
            let sw = StopWords::bundled();
            let input = TokenSequence::new(words.clone(), src());
            let out = remove_stopwords(&input, &sw);
            let mut it = input.tokens.iter();
            for t in &out.tokens {
                prop_assert!(it.any(|x| x == t));
            }
        }
    }
}
