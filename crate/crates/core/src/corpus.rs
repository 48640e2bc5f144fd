//! Court documents with outcome metadata, their line-delimited JSON file
//! format, and a seeded generator of synthetic judgments.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

mod synthetic;

pub use synthetic::{
    generate_synthetic, generate_synthetic_with_truth, SectionPayload, SyntheticError, PAYLOAD_SECTIONS,
    SyntheticSpec, SyntheticTruth, SyntheticVocabulary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Judgment,
    Decision,
    CommunicatedCase,
    LegalSummary,
    Resolution,
    Other,
}

/// One ingested court document.
///
/// Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    pub doc_id: String,
    pub doc_type: DocType,
    pub articles: BTreeSet<String>,
    /// `true` when at least one violation of the article was found.
    pub violation_by_article: BTreeMap<String, bool>,
    pub decision_date: NaiveDate,
    pub body: String,
}

impl RawDocument {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.doc_type == DocType::Judgment && self.body.trim().is_empty() {
            return Err(InvariantViolation::EmptyJudgmentBody {
                doc_id: self.doc_id.clone(),
            });
        }
        if let Some(article) = self
            .violation_by_article
            .keys()
            .find(|a| !self.articles.contains(*a))
        {
            return Err(InvariantViolation::UntaggedViolation {
                doc_id: self.doc_id.clone(),
                article: article.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("judgment {doc_id} has an empty body")]
    EmptyJudgmentBody { doc_id: String },
    #[error("document {doc_id} records an outcome for article {article} which it is not tagged with")]
    UntaggedViolation { doc_id: String, article: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentCollection {
    pub documents: Vec<RawDocument>,
    /// Free-text note on where the documents came from. Not part of the file format.
    pub provenance: String,
}

impl DocumentCollection {
    pub fn new(documents: Vec<RawDocument>, provenance: impl Into<String>) -> Self {
        Self {
            documents,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&RawDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("corpus line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("corpus line {line}: {source}")]
    Invariant {
        line: usize,
        #[source]
        source: InvariantViolation,
    },
    #[error("corpus line {line}: duplicate doc_id {doc_id}")]
    DuplicateId { line: usize, doc_id: String },
}

/// Reads a line-delimited JSON corpus. Blank lines are skipped.
pub fn load_corpus(path: &Path) -> Result<DocumentCollection, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line)
            .map_err(|source| CorpusError::Malformed { line: line_no, source })?;
        doc.validate()
            .map_err(|source| CorpusError::Invariant { line: line_no, source })?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                doc_id: doc.doc_id,
            });
        }
        documents.push(doc);
    }
    Ok(DocumentCollection::new(
        documents,
        format!("loaded from {}", path.display()),
    ))
}

/// Serializes one document per line with fixed key order; output is a pure
/// function of the documents.
pub fn write_corpus<W: Write>(collection: &DocumentCollection, mut out: W) -> io::Result<()> {
    for doc in &collection.documents {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_corpus(collection: &DocumentCollection, path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_corpus(collection, io::BufWriter::new(file)).map_err(io_err)
}
