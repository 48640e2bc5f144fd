use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::models::{default_grid, AlgorithmId, Hyper, HyperSetting};
use crate::parser::SectionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureType {
    Ngram,
    Glove,
    Law2vec,
    Echr2vec,
    Doc2vec,
}

impl FeatureType {
    pub const ALL: [FeatureType; 5] = [
        FeatureType::Ngram,
        FeatureType::Glove,
        FeatureType::Law2vec,
        FeatureType::Echr2vec,
        FeatureType::Doc2vec,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::Ngram => "ngram",
            FeatureType::Glove => "glove",
            FeatureType::Law2vec => "law2vec",
            FeatureType::Echr2vec => "echr2vec",
            FeatureType::Doc2vec => "doc2vec",
        }
    }

    /// Dimensions this feature type can be built at.
    pub fn dimensions(self) -> &'static [usize] {
        match self {
            FeatureType::Ngram => &[2000],
            _ => &[100, 200],
        }
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown feature type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stopwords {
    Kept,
    Removed,
}

impl Stopwords {
    pub const ALL: [Stopwords; 2] = [Stopwords::Kept, Stopwords::Removed];

    pub fn removed(self) -> bool {
        self == Stopwords::Removed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stopwords::Kept => "kept",
            Stopwords::Removed => "removed",
        }
    }
}

/// Sections a model can be trained on, in canonical order.
pub const SELECTABLE_SECTIONS: [SectionKind; 5] = [
    SectionKind::ProcedurePlusFacts,
    SectionKind::Procedure,
    SectionKind::Facts,
    SectionKind::Circumstances,
    SectionKind::RelevantLaw,
];

fn section_rank(s: SectionKind) -> usize {
    SELECTABLE_SECTIONS
        .iter()
        .position(|k| *k == s)
        .unwrap_or(SELECTABLE_SECTIONS.len())
}

/// How a document is turned into a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub feature_type: FeatureType,
    pub dimension: usize,
    pub section: SectionKind,
    pub stopwords: Stopwords,
}

impl FeatureSpec {
    pub fn validate(&self) -> Result<(), SelectionError> {
        if !self.feature_type.dimensions().contains(&self.dimension) {
            return Err(SelectionError::InvalidConfig(format!(
                "{} features cannot have dimension {}",
                self.feature_type, self.dimension
            )));
        }
        if !SELECTABLE_SECTIONS.contains(&self.section) {
            return Err(SelectionError::InvalidConfig(format!(
                "section {} is not selectable",
                self.section
            )));
        }
        Ok(())
    }

    fn key(&self) -> (FeatureType, usize, usize, Stopwords) {
        (self.feature_type, self.dimension, section_rank(self.section), self.stopwords)
    }
}

impl Ord for FeatureSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for FeatureSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/stopwords_{}",
            self.feature_type,
            self.dimension,
            self.section,
            self.stopwords.as_str()
        )
    }
}

/// One point of the search: features plus classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub article: String,
    pub features: FeatureSpec,
    pub hyper: HyperSetting,
}

impl ExperimentConfig {
    pub fn algorithm(&self) -> AlgorithmId {
        self.hyper.algorithm()
    }

    /// Order used to break ties: feature type, dimension, section,
    /// stop-words, algorithm, then hyper-parameter values and seed.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.features
            .cmp(&other.features)
            .then_with(|| self.algorithm().cmp(&other.algorithm()))
            .then_with(|| {
                let a = self.hyper.hyper.values();
                let b = other.hyper.hyper.values();
                a.iter()
                    .zip(&b)
                    .map(|((_, x), (_, y))| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or_else(|| a.len().cmp(&b.len()))
            })
            .then_with(|| self.hyper.seed.cmp(&other.hyper.seed))
            .then_with(|| self.article.cmp(&other.article))
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "article {} {} {}", self.article, self.features, self.hyper.hyper)
    }
}

/// The axes searched for every article. Empty lists are invalid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpace {
    pub feature_types: Vec<FeatureType>,
    /// Embedding dimensions to use; n-gram features always use 2000.
    pub embedding_dimensions: Vec<usize>,
    pub sections: Vec<SectionKind>,
    pub stopwords: Vec<Stopwords>,
    /// Algorithms whose default grid settings are searched. The heuristic
    /// is never searched; listing it adds nothing.
    pub algorithms: Vec<AlgorithmId>,
}

impl ConfigSpace {
    /// Every axis value.
    pub fn full() -> Self {
        Self {
            feature_types: FeatureType::ALL.to_vec(),
            embedding_dimensions: vec![100, 200],
            sections: SELECTABLE_SECTIONS.to_vec(),
            stopwords: Stopwords::ALL.to_vec(),
            algorithms: AlgorithmId::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        let bad = |m: &str| Err(SelectionError::InvalidConfig(m.to_string()));
        if self.feature_types.is_empty()
            || self.sections.is_empty()
            || self.stopwords.is_empty()
            || self.algorithms.is_empty()
        {
            return bad("config space axes must be non-empty");
        }
        if self.embedding_dimensions.iter().any(|d| ![100, 200].contains(d)) {
            return bad("embedding dimensions must be 100 or 200");
        }
        if self.feature_types.iter().any(|t| *t != FeatureType::Ngram) && self.embedding_dimensions.is_empty() {
            return bad("embedding feature types need at least one embedding dimension");
        }
        if let Some(s) = self.sections.iter().find(|s| !SELECTABLE_SECTIONS.contains(s)) {
            return Err(SelectionError::InvalidConfig(format!("section {s} is not selectable")));
        }
        Ok(())
    }

    /// Distinct feature specs, canonically ordered.
    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        let mut out = Vec::new();
        for &feature_type in &self.feature_types {
            let dims: Vec<usize> = if feature_type == FeatureType::Ngram {
                vec![2000]
            } else {
                self.embedding_dimensions.clone()
            };
            for dimension in dims {
                for &section in &self.sections {
                    for &stopwords in &self.stopwords {
                        out.push(FeatureSpec {
                            feature_type,
                            dimension,
                            section,
                            stopwords,
                        });
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Default grid entries of the selected algorithms.
    pub fn grid(&self) -> Vec<Hyper> {
        default_grid()
            .into_iter()
            .filter(|h| self.algorithms.contains(&h.algorithm()))
            .collect()
    }

    /// Every config for `article`, canonically ordered; all models share
    /// `model_seed`.
    pub fn enumerate(&self, article: &str, model_seed: u64) -> Vec<ExperimentConfig> {
        let grid = self.grid();
        let mut out = Vec::new();
        for features in self.feature_specs() {
            for hyper in &grid {
                out.push(ExperimentConfig {
                    article: article.to_string(),
                    features,
                    hyper: HyperSetting::new(hyper.clone(), model_seed),
                });
            }
        }
        out.sort_by(ExperimentConfig::canonical_cmp);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_space_size_is_the_axis_product() {
        let space = ConfigSpace::full();
        let grid = default_grid().len();
        // ngram has one dimension, the four embedding types two each
        let want = (1 + 4 * 2) * 5 * 2 * grid;
        assert_eq!(space.enumerate("6", 0).len(), want);
        assert_eq!(want, 1170);
    }

    #[test]
    fn dimension_must_match_feature_type() {
        let spec = |feature_type, dimension| FeatureSpec {
            feature_type,
            dimension,
            section: SectionKind::Facts,
            stopwords: Stopwords::Kept,
        };
        assert!(spec(FeatureType::Ngram, 2000).validate().is_ok());
        assert!(spec(FeatureType::Ngram, 100).validate().is_err());
        assert!(spec(FeatureType::Glove, 200).validate().is_ok());
        assert!(spec(FeatureType::Doc2vec, 2000).validate().is_err());
        let mut s = spec(FeatureType::Ngram, 2000);
        s.section = SectionKind::Law;
        assert!(s.validate().is_err());
    }

    #[test]
    fn canonical_order_follows_the_axes() {
        let configs = ConfigSpace::full().enumerate("3", 1);
        assert_eq!(configs[0].features.feature_type, FeatureType::Ngram);
        assert_eq!(configs[0].features.section, SectionKind::ProcedurePlusFacts);
        assert_eq!(configs[0].algorithm(), AlgorithmId::SgdLinear);
        for w in configs.windows(2) {
            assert_eq!(w[0].canonical_cmp(&w[1]), Ordering::Less);
        }
    }

    #[test]
    fn config_json_round_trips() {
        for c in ConfigSpace::full().enumerate("2", 9).iter().step_by(37) {
            let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(c).unwrap()).unwrap();
            assert_eq!(&back, c);
        }
    }
}
