//! Pipeline configuration file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use verdict_core::dataset::DEFAULT_HOLDOUT_FRACTION;
use verdict_core::embeddings::EmbeddingParams;
use verdict_core::rng::derive_seed_str;
use verdict_core::selection::{ConfigSpace, FeatureType};
use verdict_core::SyntheticSpec;

/// Environment variable that overrides `out_dir` (a `--out` flag wins over it).
pub const OUT_DIR_ENV: &str = "PIPELINE_OUT_DIR";

fn one() -> usize {
    1
}

fn default_holdout() -> f64 {
    DEFAULT_HOLDOUT_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Corpus file in the line-delimited format. Exclusive with `synthetic`.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    pub articles: Vec<String>,
    /// Heading configuration; the built-in headings when absent.
    #[serde(default)]
    pub headings: Option<PathBuf>,
    /// Stop-word list; the bundled list when absent.
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    /// Pretrained vector files keyed `glove` / `law2vec`.
    #[serde(default)]
    pub pretrained: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub embedding: EmbeddingOverrides,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "ConfigSpace::full")]
    pub space: ConfigSpace,
    pub out_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingOverrides {
    pub word2vec_epochs: Option<usize>,
    pub doc2vec_epochs: Option<usize>,
    pub min_count: Option<u64>,
    pub negatives: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_holdout")]
    pub holdout_fraction: f64,
    /// Per-article violation ratio for the test set; the pool ratio otherwise.
    #[serde(default)]
    pub r_target: BTreeMap<String, f64>,
    /// Split seed for every article; derived from the global seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            holdout_fraction: DEFAULT_HOLDOUT_FRACTION,
            r_target: BTreeMap::new(),
            seed: None,
        }
    }
}

impl PipelineConfig {
    /// Reads and validates a config. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.corpus.as_mut().map(resolve);
        cfg.headings.as_mut().map(resolve);
        cfg.stopwords.as_mut().map(resolve);
        cfg.pretrained.values_mut().for_each(resolve);
        resolve(&mut cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        match (&self.corpus, &self.synthetic) {
            (Some(_), Some(_)) => return Err("give either corpus or synthetic, not both".into()),
            (None, None) => return Err("one of corpus or synthetic is required".into()),
            _ => {}
        }
        if let Some(spec) = &self.synthetic {
            spec.validate().map_err(|e| e.to_string())?;
            if let Some(a) = self.articles.iter().find(|a| !spec.articles.contains(a)) {
                return Err(format!("article {a} is not generated by the synthetic spec"));
            }
        }
        if self.articles.is_empty() {
            return Err("articles must not be empty".into());
        }
        if self.articles.iter().collect::<BTreeSet<_>>().len() != self.articles.len() {
            return Err("articles must be unique".into());
        }
        if let Some(k) = self.pretrained.keys().find(|k| !["glove", "law2vec"].contains(&k.as_str())) {
            return Err(format!("pretrained key {k:?} is not glove or law2vec"));
        }
        if !(self.split.holdout_fraction > 0.0 && self.split.holdout_fraction < 1.0) {
            return Err(format!("holdout_fraction {} outside (0, 1)", self.split.holdout_fraction));
        }
        for (a, r) in &self.split.r_target {
            if !self.articles.contains(a) {
                return Err(format!("r_target given for unlisted article {a}"));
            }
            if !(*r > 0.0 && *r < 1.0) {
                return Err(format!("r_target {r} for article {a} outside (0, 1)"));
            }
        }
        self.space.validate().map_err(|e| e.to_string())?;
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        for params in self.word2vec_params().values().chain(self.doc2vec_params().values()) {
            params.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn dims_for(&self, t: FeatureType) -> Vec<usize> {
        if self.space.feature_types.contains(&t) {
            self.space.embedding_dimensions.clone()
        } else {
            Vec::new()
        }
    }

    fn apply(&self, mut p: EmbeddingParams, epochs: Option<usize>) -> EmbeddingParams {
        if let Some(e) = epochs {
            p.epochs = e;
        }
        if let Some(m) = self.embedding.min_count {
            p.min_count = m;
        }
        if let Some(n) = self.embedding.negatives {
            p.negatives = n;
        }
        p
    }

    /// Word-embedding training parameters per dimension the space needs.
    pub fn word2vec_params(&self) -> BTreeMap<usize, EmbeddingParams> {
        self.dims_for(FeatureType::Echr2vec)
            .into_iter()
            .map(|d| {
                let seed = derive_seed_str(self.seed, &format!("echr2vec/{d}"));
                (d, self.apply(EmbeddingParams::word2vec(d, seed), self.embedding.word2vec_epochs))
            })
            .collect()
    }

    pub fn doc2vec_params(&self) -> BTreeMap<usize, EmbeddingParams> {
        self.dims_for(FeatureType::Doc2vec)
            .into_iter()
            .map(|d| {
                let seed = derive_seed_str(self.seed, &format!("doc2vec/{d}"));
                (d, self.apply(EmbeddingParams::doc2vec(d, seed), self.embedding.doc2vec_epochs))
            })
            .collect()
    }

    pub fn split_seed(&self, article: &str) -> u64 {
        self.split
            .seed
            .unwrap_or_else(|| derive_seed_str(self.seed, &format!("split/{article}")))
    }

    pub fn fold_seed(&self, article: &str) -> u64 {
        derive_seed_str(self.seed, &format!("folds/{article}"))
    }

    pub fn model_seed(&self, article: &str) -> u64 {
        derive_seed_str(self.seed, &format!("model/{article}"))
    }

    pub fn inference_seed(&self) -> u64 {
        derive_seed_str(self.seed, "doc2vec-infer")
    }
}

/// The bundled demo configuration.
pub fn demo_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("demo").join("demo.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PipelineConfig {
        PipelineConfig::load(&demo_config_path()).unwrap()
    }

    #[test]
    fn demo_config_is_valid() {
        let c = base();
        assert_eq!(c.articles.len(), 2);
        assert_eq!(c.workers, 1);
    }

    #[test]
    fn corpus_and_synthetic_are_exclusive() {
        let mut c = base();
        c.corpus = Some("x.jsonl".into());
        assert!(c.validate().unwrap_err().contains("not both"));
        c.corpus = None;
        c.synthetic = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn bad_ratio_and_keys_are_rejected() {
        let mut c = base();
        c.split.r_target.insert(c.articles[0].clone(), 1.0);
        assert!(c.validate().is_err());
        let mut c = base();
        c.pretrained.insert("word2vec".into(), "v.txt".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn seeds_differ_per_article_and_purpose() {
        let c = base();
        let seeds = [c.split_seed("3"), c.split_seed("6"), c.fold_seed("3"), c.model_seed("3")];
        let unique: BTreeSet<_> = seeds.iter().collect();
        assert_eq!(unique.len(), seeds.len());
    }
}
