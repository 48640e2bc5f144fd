//! Shared inputs for the benchmarks.

use verdict_core::corpus::{generate_synthetic, PAYLOAD_SECTIONS};
use verdict_core::parser::{segment, HeadingConfig, SectionKind};
use verdict_core::selection::section_tokens;
use verdict_core::{DocType, FeatureMatrix, Label, ParsedJudgment, SyntheticSpec, TokenSequence};

pub fn judgments(docs_per_label: usize) -> Vec<ParsedJudgment> {
    let spec = SyntheticSpec {
        articles: vec!["3".into()],
        docs_per_article_per_label: docs_per_label,
        background_vocab_size: 400,
        signal_tokens_per_label: 20,
        signal_rate: 0.05,
        tokens_per_section: 60,
        seed: 1,
        signal_sections: PAYLOAD_SECTIONS.to_vec(),
    };
    let corpus = generate_synthetic(&spec).expect("valid spec");
    corpus
        .documents
        .iter()
        .filter(|d| d.doc_type == DocType::Judgment)
        .map(|d| segment(d, &HeadingConfig::default()).expect("synthetic judgments parse"))
        .collect()
}

pub fn facts(judgments: &[ParsedJudgment]) -> Vec<TokenSequence> {
    judgments
        .iter()
        .map(|j| section_tokens(j, SectionKind::Facts, None).expect("facts present"))
        .collect()
}

/// Two shifted Gaussian-ish blobs built from a fixed LCG, so the benches
/// need no RNG crate.
pub fn blobs(n: usize, d: usize) -> (FeatureMatrix, Vec<Label>) {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let v = i % 2 == 0;
        rows.push((0..d).map(|_| next() + if v { 0.3 } else { 0.0 }).collect());
        y.push(Label::from_violation(v));
    }
    let m = FeatureMatrix::from_rows(
        (0..n).map(|i| format!("r{i}")).collect(),
        (0..d).map(|j| format!("f{j}")).collect(),
        rows,
    )
    .expect("finite rows");
    (m, y)
}
