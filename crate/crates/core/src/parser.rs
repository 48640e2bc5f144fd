//! Segmentation of judgment bodies into named sections.
//!
//! A judgment has standard structure when it carries, in this order, a
//! procedure heading, a facts heading, the two facts subsections
//! (circumstances of the case, relevant domestic law), a law heading and the
//! operative-provisions heading that opens the verdict. Headings are matched
//! against whole trimmed lines, case-sensitively. Any other heading-like line
//! stays inside the section that encloses it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocType, RawDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Procedure,
    Facts,
    Circumstances,
    RelevantLaw,
    Law,
    Verdict,
    /// Procedure text, one space, facts text. Never stored.
    ProcedurePlusFacts,
}

impl SectionKind {
    /// Stored kinds in required document order.
    pub const STORED: [SectionKind; 6] = [
        SectionKind::Procedure,
        SectionKind::Facts,
        SectionKind::Circumstances,
        SectionKind::RelevantLaw,
        SectionKind::Law,
        SectionKind::Verdict,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SectionKind::Procedure => "procedure",
            SectionKind::Facts => "facts",
            SectionKind::Circumstances => "circumstances",
            SectionKind::RelevantLaw => "relevant_law",
            SectionKind::Law => "law",
            SectionKind::Verdict => "verdict",
            SectionKind::ProcedurePlusFacts => "procedure_plus_facts",
        }
    }

    pub fn is_stored(self) -> bool {
        self != SectionKind::ProcedurePlusFacts
    }

    fn is_subsection(self) -> bool {
        matches!(self, SectionKind::Circumstances | SectionKind::RelevantLaw)
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SectionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SectionKind::STORED
            .iter()
            .chain(std::iter::once(&SectionKind::ProcedurePlusFacts))
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown section kind {s:?}"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HeadingConfigError {
    #[error("reading heading config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing heading config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("heading config: {0} is derived and cannot have headings")]
    DerivedKind(SectionKind),
    #[error("heading config: {0} has no accepted headings")]
    Empty(SectionKind),
}

/// Accepted heading lines per stored section.
///
/// A pattern ending in `*` matches any line that equals the pattern stem or
/// starts with the stem followed by a space. For the two facts subsections a
/// leading Roman-numeral label (`"II. "`) is optional on both the pattern and
/// the line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadingConfig {
    pub headings: BTreeMap<SectionKind, Vec<String>>,
}

impl Default for HeadingConfig {
    fn default() -> Self {
        let mut headings = BTreeMap::new();
        headings.insert(SectionKind::Procedure, vec!["PROCEDURE".to_owned()]);
        headings.insert(SectionKind::Facts, vec!["THE FACTS".to_owned()]);
        headings.insert(
            SectionKind::Circumstances,
            vec!["I. THE CIRCUMSTANCES OF THE CASE".to_owned()],
        );
        headings.insert(
            SectionKind::RelevantLaw,
            vec!["II. RELEVANT DOMESTIC LAW*".to_owned()],
        );
        headings.insert(SectionKind::Law, vec!["THE LAW".to_owned()]);
        headings.insert(
            SectionKind::Verdict,
            vec!["FOR THESE REASONS, THE COURT*".to_owned()],
        );
        Self { headings }
    }
}

impl HeadingConfig {
    /// Reads a JSON object mapping section kinds to heading lists. Kinds not
    /// mentioned keep their defaults.
    pub fn from_json(json: &str) -> Result<Self, HeadingConfigError> {
        let overrides: BTreeMap<SectionKind, Vec<String>> = serde_json::from_str(json)?;
        let mut config = Self::default();
        for (kind, list) in overrides {
            if !kind.is_stored() {
                return Err(HeadingConfigError::DerivedKind(kind));
            }
            if list.is_empty() {
                return Err(HeadingConfigError::Empty(kind));
            }
            config.headings.insert(kind, list);
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, HeadingConfigError> {
        let json = fs::read_to_string(path).map_err(|source| HeadingConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&json)
    }

    /// The first heading of each kind, as a generator would emit it.
    pub fn canonical_heading(&self, kind: SectionKind) -> String {
        let first = &self.headings[&kind][0];
        first.strip_suffix('*').unwrap_or(first).to_owned()
    }

    fn matches(&self, kind: SectionKind, line: &str) -> bool {
        let Some(patterns) = self.headings.get(&kind) else {
            return false;
        };
        let line = if kind.is_subsection() {
            strip_roman_label(line)
        } else {
            line
        };
        patterns.iter().any(|p| {
            let (stem, prefix) = match p.strip_suffix('*') {
                Some(stem) => (stem, true),
                None => (p.as_str(), false),
            };
            let stem = if kind.is_subsection() {
                strip_roman_label(stem)
            } else {
                stem
            };
            line == stem
                || (prefix
                    && line
                        .strip_prefix(stem)
                        .is_some_and(|rest| rest.starts_with(' ')))
        })
    }
}

/// Drops a leading `"IV. "`-style label.
fn strip_roman_label(line: &str) -> &str {
    let numeral_len = line
        .bytes()
        .take_while(|b| matches!(b, b'I' | b'V' | b'X' | b'L' | b'C'))
        .count();
    if numeral_len == 0 {
        return line;
    }
    match line[numeral_len..].strip_prefix('.') {
        Some(rest) => rest.trim_start(),
        None => line,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("document {doc_id} is a {doc_type:?}, not a judgment")]
    NotAJudgment { doc_id: String, doc_type: DocType },
    #[error("document {doc_id}: missing section headings {missing:?}")]
    Missing {
        doc_id: String,
        missing: Vec<SectionKind>,
    },
    #[error("document {doc_id}: section headings out of order {found:?}")]
    OutOfOrder {
        doc_id: String,
        /// Kinds in the order their headings appear in the body.
        found: Vec<SectionKind>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SectionError {
    #[error("judgment {doc_id} has no {kind} section")]
    Missing { doc_id: String, kind: SectionKind },
}

/// Byte range of a section's text inside the body (heading excluded,
/// surrounding whitespace trimmed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn range(self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Label fields carried over from the raw document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentMetadata {
    pub articles: BTreeSet<String>,
    pub violation_by_article: BTreeMap<String, bool>,
    pub decision_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedJudgment {
    pub doc_id: String,
    pub body: String,
    pub sections: BTreeMap<SectionKind, Span>,
    pub metadata: JudgmentMetadata,
}

impl ParsedJudgment {
    pub fn span(&self, kind: SectionKind) -> Option<Span> {
        self.sections.get(&kind).copied()
    }

    fn stored_text(&self, kind: SectionKind) -> Result<&str, SectionError> {
        self.span(kind)
            .map(|s| &self.body[s.range()])
            .ok_or_else(|| SectionError::Missing {
                doc_id: self.doc_id.clone(),
                kind,
            })
    }
}

struct Line {
    start: usize,
    end: usize,
}

fn lines_with_offsets(body: &str) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut start = 0;
    for (idx, ch) in body.char_indices() {
        if ch == '\n' {
            lines.push(Line { start, end: idx });
            start = idx + 1;
        }
    }
    if start <= body.len() {
        lines.push(Line {
            start,
            end: body.len(),
        });
    }
    lines
}

fn trimmed_span(body: &str, start: usize, end: usize) -> Span {
    let slice = &body[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead == slice.len() {
        return Span { start, end: start };
    }
    Span {
        start: start + lead,
        end: end - trail,
    }
}

/// Locates the six stored sections of a judgment.
pub fn segment(doc: &RawDocument, config: &HeadingConfig) -> Result<ParsedJudgment, StructureError> {
    if doc.doc_type != DocType::Judgment {
        return Err(StructureError::NotAJudgment {
            doc_id: doc.doc_id.clone(),
            doc_type: doc.doc_type,
        });
    }
    let body = &doc.body;
    let lines = lines_with_offsets(body);

    // First line matching each kind; a line is claimed by at most one kind.
    let mut heading_line: BTreeMap<SectionKind, usize> = BTreeMap::new();
    for (idx, line) in lines.iter().enumerate() {
        let text = body[line.start..line.end].trim();
        if text.is_empty() {
            continue;
        }
        if let Some(kind) = SectionKind::STORED
            .iter()
            .copied()
            .find(|k| !heading_line.contains_key(k) && config.matches(*k, text))
        {
            heading_line.insert(kind, idx);
        }
    }

    let missing: Vec<SectionKind> = SectionKind::STORED
        .iter()
        .copied()
        .filter(|k| !heading_line.contains_key(k))
        .collect();
    if !missing.is_empty() {
        return Err(StructureError::Missing {
            doc_id: doc.doc_id.clone(),
            missing,
        });
    }

    let positions: Vec<usize> = SectionKind::STORED.iter().map(|k| heading_line[k]).collect();
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        let mut found: Vec<SectionKind> = SectionKind::STORED.to_vec();
        found.sort_by_key(|k| heading_line[k]);
        return Err(StructureError::OutOfOrder {
            doc_id: doc.doc_id.clone(),
            found,
        });
    }

    let content_start = |k: SectionKind| {
        let line = &lines[heading_line[&k]];
        (line.end + 1).min(body.len())
    };
    let heading_start = |k: SectionKind| lines[heading_line[&k]].start;

    use SectionKind::*;
    let bounds = [
        (Procedure, content_start(Procedure), heading_start(Facts)),
        (Facts, content_start(Facts), heading_start(Law)),
        (Circumstances, content_start(Circumstances), heading_start(RelevantLaw)),
        (RelevantLaw, content_start(RelevantLaw), heading_start(Law)),
        (Law, content_start(Law), heading_start(Verdict)),
        (Verdict, content_start(Verdict), body.len()),
    ];
    let sections = bounds
        .into_iter()
        .map(|(kind, start, end)| (kind, trimmed_span(body, start, end.max(start))))
        .collect();

    Ok(ParsedJudgment {
        doc_id: doc.doc_id.clone(),
        body: body.clone(),
        sections,
        metadata: JudgmentMetadata {
            articles: doc.articles.clone(),
            violation_by_article: doc.violation_by_article.clone(),
            decision_date: doc.decision_date,
        },
    })
}

/// True iff segmentation succeeded and every stored section is non-empty.
pub fn is_standard(result: &Result<ParsedJudgment, StructureError>) -> bool {
    match result {
        Ok(j) => SectionKind::STORED
            .iter()
            .all(|k| j.span(*k).is_some_and(|s| !s.is_empty())),
        Err(_) => false,
    }
}

pub fn section_text(j: &ParsedJudgment, kind: SectionKind) -> Result<String, SectionError> {
    match kind {
        SectionKind::ProcedurePlusFacts => {
            let procedure = j.stored_text(SectionKind::Procedure)?;
            let facts = j.stored_text(SectionKind::Facts)?;
            let mut out = String::with_capacity(procedure.len() + 1 + facts.len());
            out.push_str(procedure);
            out.push(' ');
            out.push_str(facts);
            Ok(out)
        }
        stored => j.stored_text(stored).map(str::to_owned),
    }
}

/// Procedure and facts text only; nothing from the law or verdict spans.
pub fn strip_outcome_text(j: &ParsedJudgment) -> Result<String, SectionError> {
    section_text(j, SectionKind::ProcedurePlusFacts)
}
