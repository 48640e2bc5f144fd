//! Seeded synthetic judgments with planted, label-dependent signal tokens.
//!
//! Every judgment has the standard section layout. Each payload section
//! (procedure, circumstances, relevant law, law, verdict) holds
//! `tokens_per_section` pseudo-words. A token in a signal-carrying section is
//! drawn from the document label's signal pool with a per-section rate chosen
//! so that, body-wide, about `signal_rate` of tokens are signal tokens. Law and
//! verdict sections additionally carry label-specific outcome marker words
//! that never occur anywhere else; they let tests detect outcome-text leakage.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with `spec.seed`, so the
//! output is a pure function of the spec.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{DocType, DocumentCollection, RawDocument};
use crate::parser::{HeadingConfig, SectionKind};
use crate::rng;
use crate::text::StopWords;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const SYLLABLES: u64 = 70;
const MARKERS_PER_LABEL: usize = 4;
const MARKER_RATE: f64 = 0.2;
const COMMA_RATE: f64 = 0.1;

/// Sections that receive generated text, in body order.
pub const PAYLOAD_SECTIONS: [SectionKind; 5] = [
    SectionKind::Procedure,
    SectionKind::Circumstances,
    SectionKind::RelevantLaw,
    SectionKind::Law,
    SectionKind::Verdict,
];

fn default_signal_sections() -> Vec<SectionKind> {
    PAYLOAD_SECTIONS.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub articles: Vec<String>,
    pub docs_per_article_per_label: usize,
    pub background_vocab_size: usize,
    pub signal_tokens_per_label: usize,
    /// Body-wide fraction of tokens drawn from the label's signal pool.
    pub signal_rate: f64,
    pub tokens_per_section: usize,
    pub seed: u64,
    /// Payload sections that carry signal tokens.
    #[serde(default = "default_signal_sections")]
    pub signal_sections: Vec<SectionKind>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let counts = [
            ("docs_per_article_per_label", self.docs_per_article_per_label),
            ("background_vocab_size", self.background_vocab_size),
            ("signal_tokens_per_label", self.signal_tokens_per_label),
            ("tokens_per_section", self.tokens_per_section),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(SyntheticError::ZeroCount(name));
        }
        if self.articles.is_empty() {
            return Err(SyntheticError::NoArticles);
        }
        let unique: BTreeSet<&String> = self.articles.iter().collect();
        if unique.len() != self.articles.len() {
            return Err(SyntheticError::DuplicateArticle);
        }
        if !(0.0..=1.0).contains(&self.signal_rate) {
            return Err(SyntheticError::SignalRate(self.signal_rate));
        }
        if self.signal_sections.is_empty()
            || self.signal_sections.iter().any(|k| !PAYLOAD_SECTIONS.contains(k))
        {
            return Err(SyntheticError::SignalSections);
        }
        if self.section_signal_rate() > 1.0 {
            return Err(SyntheticError::SignalTooConcentrated(self.section_signal_rate()));
        }
        Ok(())
    }

    fn section_signal_rate(&self) -> f64 {
        let sections: BTreeSet<_> = self.signal_sections.iter().collect();
        self.signal_rate * PAYLOAD_SECTIONS.len() as f64 / sections.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyntheticError {
    #[error("synthetic spec: {0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("synthetic spec: no articles")]
    NoArticles,
    #[error("synthetic spec: duplicate article id")]
    DuplicateArticle,
    #[error("synthetic spec: signal_rate {0} outside [0, 1]")]
    SignalRate(f64),
    #[error("synthetic spec: signal_sections must be a non-empty subset of procedure, circumstances, relevant_law, law, verdict")]
    SignalSections,
    #[error("synthetic spec: signal sections would need a per-section signal rate of {0} > 1")]
    SignalTooConcentrated(f64),
}

/// The generated word pools.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticVocabulary {
    pub background: Vec<String>,
    pub signal_violation: Vec<String>,
    pub signal_nonviolation: Vec<String>,
    pub markers_violation: Vec<String>,
    pub markers_nonviolation: Vec<String>,
}

impl SyntheticVocabulary {
    fn build(spec: &SyntheticSpec, stopwords: &StopWords) -> Self {
        let pool = |syllables: u32, parity: Option<u64>, n: usize| -> Vec<String> {
            let modulus = SYLLABLES.pow(syllables);
            let mut out = Vec::with_capacity(n);
            let mut k = 0u64;
            while out.len() < n {
                let index = match parity {
                    Some(p) => 2 * k + p,
                    None => k,
                };
                k += 1;
                // 48271 is coprime with 70^n, so this walks every word once.
                let word = pseudo_word((index * 48_271 + 11) % modulus, syllables);
                if !stopwords.contains(&word) {
                    out.push(word);
                }
            }
            out
        };
        Self {
            background: pool(3, None, spec.background_vocab_size),
            signal_violation: pool(4, Some(0), spec.signal_tokens_per_label),
            signal_nonviolation: pool(4, Some(1), spec.signal_tokens_per_label),
            markers_violation: pool(5, Some(0), MARKERS_PER_LABEL),
            markers_nonviolation: pool(5, Some(1), MARKERS_PER_LABEL),
        }
    }

    pub fn signal(&self, violation: bool) -> &[String] {
        if violation {
            &self.signal_violation
        } else {
            &self.signal_nonviolation
        }
    }

    pub fn markers(&self, violation: bool) -> &[String] {
        if violation {
            &self.markers_violation
        } else {
            &self.markers_nonviolation
        }
    }
}

fn pseudo_word(mut index: u64, syllables: u32) -> String {
    let mut word = String::with_capacity(2 * syllables as usize);
    for _ in 0..syllables {
        let s = (index % SYLLABLES) as usize;
        index /= SYLLABLES;
        word.push(CONSONANTS[s / VOWELS.len()] as char);
        word.push(VOWELS[s % VOWELS.len()] as char);
    }
    word
}

/// Text of one generated section and the words it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionPayload {
    pub text: String,
    pub tokens: Vec<String>,
}

/// Bookkeeping for one generated judgment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticTruth {
    pub doc_id: String,
    pub article: String,
    pub violation: bool,
    /// Payload sections plus the facts section (subsection headings included).
    pub sections: BTreeMap<SectionKind, SectionPayload>,
    pub signal_tokens: usize,
    pub marker_tokens: usize,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DocumentCollection, SyntheticError> {
    generate_synthetic_with_truth(spec).map(|(c, _, _)| c)
}

pub fn generate_synthetic_with_truth(
    spec: &SyntheticSpec,
) -> Result<(DocumentCollection, Vec<SyntheticTruth>, SyntheticVocabulary), SyntheticError> {
    spec.validate()?;
    let stopwords = StopWords::bundled();
    let vocab = SyntheticVocabulary::build(spec, &stopwords);
    let headings = HeadingConfig::default();
    let section_rate = spec.section_signal_rate();
    let base_date = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let mut rng = rng::rng(spec.seed);

    let mut documents = Vec::new();
    let mut truths = Vec::new();
    for article in &spec.articles {
        for n in 0..2 * spec.docs_per_article_per_label {
            let violation = n % 2 == 0;
            let doc_id = format!("syn-{article}-{n:05}");
            let mut sections = BTreeMap::new();
            let mut signal_tokens = 0;
            let mut marker_tokens = 0;
            let mut paragraph = 1usize;
            for kind in PAYLOAD_SECTIONS {
                let carries_signal = spec.signal_sections.contains(&kind);
                let outcome = matches!(kind, SectionKind::Law | SectionKind::Verdict);
                let mut tokens = Vec::with_capacity(spec.tokens_per_section);
                for _ in 0..spec.tokens_per_section {
                    let word = if carries_signal && rng.random::<f64>() < section_rate {
                        signal_tokens += 1;
                        pick(&mut rng, vocab.signal(violation))
                    } else if outcome && rng.random::<f64>() < MARKER_RATE {
                        marker_tokens += 1;
                        pick(&mut rng, vocab.markers(violation))
                    } else {
                        pick(&mut rng, &vocab.background)
                    };
                    tokens.push(word.to_owned());
                }
                let text = render_prose(&tokens, &mut paragraph, &mut rng);
                sections.insert(kind, SectionPayload { text, tokens });
            }

            let circ_heading = headings.canonical_heading(SectionKind::Circumstances);
            let rel_heading = headings.canonical_heading(SectionKind::RelevantLaw);
            let facts_text = format!(
                "{circ_heading}\n{}\n\n{rel_heading}\n{}",
                sections[&SectionKind::Circumstances].text,
                sections[&SectionKind::RelevantLaw].text
            );
            let facts_tokens = crate::text::normalize(&circ_heading)
                .split(' ')
                .map(str::to_owned)
                .chain(sections[&SectionKind::Circumstances].tokens.iter().cloned())
                .chain(crate::text::normalize(&rel_heading).split(' ').map(str::to_owned))
                .chain(sections[&SectionKind::RelevantLaw].tokens.iter().cloned())
                .collect();
            let body = format!(
                "CASE OF SYNTHETIC APPLICANT {n} v. STATE\n\n{}\n{}\n\n{}\n\n{}\n\n{}\n{}\n\n{}\n{}\n",
                headings.canonical_heading(SectionKind::Procedure),
                sections[&SectionKind::Procedure].text,
                headings.canonical_heading(SectionKind::Facts),
                facts_text,
                headings.canonical_heading(SectionKind::Law),
                sections[&SectionKind::Law].text,
                headings.canonical_heading(SectionKind::Verdict),
                sections[&SectionKind::Verdict].text,
            );
            sections.insert(
                SectionKind::Facts,
                SectionPayload {
                    text: facts_text,
                    tokens: facts_tokens,
                },
            );

            let decision_date = base_date
                .checked_add_days(Days::new(rng.random_range(0..7300)))
                .expect("date in range");
            documents.push(RawDocument {
                doc_id: doc_id.clone(),
                doc_type: DocType::Judgment,
                articles: BTreeSet::from([article.clone()]),
                violation_by_article: BTreeMap::from([(article.clone(), violation)]),
                decision_date,
                body,
            });
            truths.push(SyntheticTruth {
                doc_id,
                article: article.clone(),
                violation,
                sections,
                signal_tokens,
                marker_tokens,
            });
        }
    }
    let provenance = format!(
        "synthetic: {} articles x 2 labels x {} judgments, seed {}",
        spec.articles.len(),
        spec.docs_per_article_per_label,
        spec.seed
    );
    Ok((DocumentCollection::new(documents, provenance), truths, vocab))
}

fn pick<'a>(rng: &mut rng::Rng, pool: &'a [String]) -> &'a str {
    &pool[rng.random_range(0..pool.len())]
}

/// Lays words out as numbered paragraphs of capitalized, punctuated sentences.
fn render_prose(tokens: &[String], paragraph: &mut usize, rng: &mut rng::Rng) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < tokens.len() {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("{}. ", *paragraph));
        *paragraph += 1;
        let sentences = rng.random_range(2..=4);
        for s in 0..sentences {
            if i >= tokens.len() {
                break;
            }
            if s > 0 {
                out.push(' ');
            }
            let len = rng.random_range(6..=14).min(tokens.len() - i);
            for (w, word) in tokens[i..i + len].iter().enumerate() {
                if w == 0 {
                    let mut chars = word.chars();
                    if let Some(first) = chars.next() {
                        out.push(first.to_ascii_uppercase());
                        out.push_str(chars.as_str());
                    }
                } else {
                    out.push(' ');
                    out.push_str(word);
                }
                if w + 1 < len && rng.random::<f64>() < COMMA_RATE {
                    out.push(',');
                }
            }
            out.push('.');
            i += len;
        }
    }
    out
}
