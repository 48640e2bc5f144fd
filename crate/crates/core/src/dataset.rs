//! Per-article labelling, balanced training sets and ratio-matched test sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocType, RawDocument};
use crate::rng;

pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Violation,
    Nonviolation,
}

impl Label {
    pub fn from_violation(violation: bool) -> Self {
        if violation {
            Label::Violation
        } else {
            Label::Nonviolation
        }
    }

    pub fn is_violation(self) -> bool {
        self == Label::Violation
    }

    pub fn other(self) -> Self {
        match self {
            Label::Violation => Label::Nonviolation,
            Label::Nonviolation => Label::Violation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Violation => "violation",
            Label::Nonviolation => "nonviolation",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCase {
    pub doc_id: String,
    pub article: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticlePool {
    pub article: String,
    pub cases: Vec<LabeledCase>,
    pub v_count: usize,
    pub nv_count: usize,
}

impl ArticlePool {
    pub fn new(article: impl Into<String>, cases: Vec<LabeledCase>) -> Self {
        let v_count = cases.iter().filter(|c| c.label.is_violation()).count();
        let nv_count = cases.len() - v_count;
        Self {
            article: article.into(),
            cases,
            v_count,
            nv_count,
        }
    }

    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Violation => self.v_count,
            Label::Nonviolation => self.nv_count,
        }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub article: String,
    pub train: Vec<LabeledCase>,
    pub test: Vec<LabeledCase>,
    pub r_target: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn count(cases: &[LabeledCase], label: Label) -> usize {
        cases.iter().filter(|c| c.label == label).count()
    }

    /// Fraction of violations in the test set.
    pub fn test_ratio(&self) -> f64 {
        Self::count(&self.test, Label::Violation) as f64 / self.test.len() as f64
    }

    pub fn manifest(&self) -> SplitManifest {
        let ids = |cases: &[LabeledCase]| cases.iter().map(|c| c.doc_id.clone()).collect();
        SplitManifest {
            article: self.article.clone(),
            seed: self.seed,
            r_target: self.r_target,
            holdout_fraction: self.holdout_fraction,
            train: ids(&self.train),
            test: ids(&self.test),
        }
    }

    /// Rebuilds a split from a manifest, taking labels from `pool`.
    pub fn from_manifest(manifest: &SplitManifest, pool: &ArticlePool) -> Result<Self, DatasetError> {
        let by_id: BTreeMap<&str, &LabeledCase> =
            pool.cases.iter().map(|c| (c.doc_id.as_str(), c)).collect();
        let resolve = |ids: &[String]| {
            ids.iter()
                .map(|id| {
                    by_id
                        .get(id.as_str())
                        .map(|c| (*c).clone())
                        .ok_or_else(|| DatasetError::UnknownCase {
                            article: manifest.article.clone(),
                            doc_id: id.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(Self {
            article: manifest.article.clone(),
            train: resolve(&manifest.train)?,
            test: resolve(&manifest.test)?,
            r_target: manifest.r_target,
            holdout_fraction: manifest.holdout_fraction,
            seed: manifest.seed,
        })
    }
}

/// Everything needed to replay a split: its parameters and the chosen ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub article: String,
    pub seed: u64,
    pub r_target: f64,
    pub holdout_fraction: f64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("judgment {doc_id} is tagged with article {article} but records no outcome for it")]
    MissingOutcome { doc_id: String, article: String },
    #[error("article {article}: degenerate historical ratio {r_target}")]
    DegenerateRatio { article: String, r_target: f64 },
    #[error("article {article}: holdout fraction {holdout_fraction} outside (0, 1)")]
    InvalidHoldout { article: String, holdout_fraction: f64 },
    #[error("article {article}: pool too small ({v_count} violation, {nv_count} non-violation; need at least 2 of each)")]
    PoolTooSmall {
        article: String,
        v_count: usize,
        nv_count: usize,
    },
    #[error("article {article}: no holdout size reaches ratio {r_target} with the available cases")]
    Infeasible { article: String, r_target: f64 },
    #[error("article {article}: empty pool")]
    EmptyPool { article: String },
    #[error("article {article}: manifest names unknown case {doc_id}")]
    UnknownCase { article: String, doc_id: String },
}

/// One case per judgment tagged with `article`.
pub fn label_cases<'a, I>(docs: I, article: &str) -> Result<ArticlePool, DatasetError>
where
    I: IntoIterator<Item = &'a RawDocument>,
{
    let mut cases = Vec::new();
    for doc in docs {
        if doc.doc_type != DocType::Judgment || !doc.articles.contains(article) {
            continue;
        }
        let violation = *doc.violation_by_article.get(article).ok_or_else(|| {
            DatasetError::MissingOutcome {
                doc_id: doc.doc_id.clone(),
                article: article.to_owned(),
            }
        })?;
        cases.push(LabeledCase {
            doc_id: doc.doc_id.clone(),
            article: article.to_owned(),
            label: Label::from_violation(violation),
        });
    }
    Ok(ArticlePool::new(article, cases))
}

pub fn historical_ratio(pool: &ArticlePool) -> Result<f64, DatasetError> {
    if pool.is_empty() {
        return Err(DatasetError::EmptyPool {
            article: pool.article.clone(),
        });
    }
    Ok(pool.v_count as f64 / pool.len() as f64)
}

/// Holdout sizes chosen by [`make_split`]: `holdout` minority cases and
/// `majority_test` majority cases go to the test set, and `train_per_class`
/// cases of each label to the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub minority: Label,
    pub holdout: usize,
    pub majority_test: usize,
    pub train_per_class: usize,
}

/// Works out split sizes for a pool without drawing any cases.
///
/// The minority label is the rarer one in the pool (non-violation on ties).
/// `h = round(ρ · minority)`, at least 1, and the test set gets
/// `k = round(h · q / (1 − q))` majority cases, where `q` is the majority
/// label's share of the test set implied by `r_target`. When the majority
/// cannot supply `k` on top of its training share, `h` is lowered until it
/// can, so the test ratio always stays within rounding of `r_target`.
pub fn plan_split(
    pool: &ArticlePool,
    r_target: f64,
    holdout_fraction: f64,
) -> Result<SplitPlan, DatasetError> {
    let article = || pool.article.clone();
    if !(r_target > 0.0 && r_target < 1.0) {
        return Err(DatasetError::DegenerateRatio {
            article: article(),
            r_target,
        });
    }
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(DatasetError::InvalidHoldout {
            article: article(),
            holdout_fraction,
        });
    }
    if pool.v_count < 2 || pool.nv_count < 2 {
        return Err(DatasetError::PoolTooSmall {
            article: article(),
            v_count: pool.v_count,
            nv_count: pool.nv_count,
        });
    }
    let minority = if pool.v_count < pool.nv_count {
        Label::Violation
    } else {
        Label::Nonviolation
    };
    let m = pool.count(minority);
    let big = pool.count(minority.other());
    let q = if minority == Label::Violation {
        1.0 - r_target
    } else {
        r_target
    };
    let odds = q / (1.0 - q);
    let h0 = ((holdout_fraction * m as f64).round() as usize).clamp(1, m - 1);
    for h in (1..=h0).rev() {
        let train_per_class = m - h;
        let k = (h as f64 * odds).round() as usize;
        if k + train_per_class <= big {
            return Ok(SplitPlan {
                minority,
                holdout: h,
                majority_test: k,
                train_per_class,
            });
        }
    }
    Err(DatasetError::Infeasible {
        article: article(),
        r_target,
    })
}

/// Balanced training set plus a test set whose violation ratio matches
/// `r_target`. Cases are drawn without replacement from the pool sorted by
/// doc id, so the result does not depend on input order.
pub fn make_split(
    pool: &ArticlePool,
    r_target: f64,
    holdout_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit, DatasetError> {
    let plan = plan_split(pool, r_target, holdout_fraction)?;
    let mut sorted: Vec<&LabeledCase> = pool.cases.iter().collect();
    sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let mut minority: Vec<&LabeledCase> =
        sorted.iter().copied().filter(|c| c.label == plan.minority).collect();
    let mut majority: Vec<&LabeledCase> =
        sorted.iter().copied().filter(|c| c.label != plan.minority).collect();

    let mut rng = rng::rng(seed);
    minority.shuffle(&mut rng);
    majority.shuffle(&mut rng);

    let (min_test, min_train) = minority.split_at(plan.holdout);
    let (maj_test, rest) = majority.split_at(plan.majority_test);
    let maj_train = &rest[..plan.train_per_class];

    let collect = |a: &[&LabeledCase], b: &[&LabeledCase]| {
        let mut v: Vec<LabeledCase> = a.iter().chain(b).map(|c| (*c).clone()).collect();
        v.sort_by(|x, y| x.doc_id.cmp(&y.doc_id));
        v
    };
    Ok(DatasetSplit {
        article: pool.article.clone(),
        train: collect(min_train, maj_train),
        test: collect(min_test, maj_test),
        r_target,
        holdout_fraction,
        seed,
    })
}

/// Checks the split invariants, returning the first one that fails.
pub fn check_split(split: &DatasetSplit) -> Result<(), String> {
    let mut seen = HashSet::new();
    for c in split.train.iter().chain(&split.test) {
        if !seen.insert(c.doc_id.as_str()) {
            return Err(format!("case {} appears twice", c.doc_id));
        }
    }
    let tv = DatasetSplit::count(&split.train, Label::Violation);
    let tn = DatasetSplit::count(&split.train, Label::Nonviolation);
    if tv != tn {
        return Err(format!("training set unbalanced: {tv} vs {tn}"));
    }
    if split.test.is_empty() {
        return Err("empty test set".into());
    }
    let gap = (split.test_ratio() - split.r_target).abs();
    if gap > 1.0 / split.test.len() as f64 + 1e-12 {
        return Err(format!(
            "test ratio {} is {gap} away from {}",
            split.test_ratio(),
            split.r_target
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn pool(v: usize, nv: usize) -> ArticlePool {
        let cases = (0..v + nv)
            .map(|i| LabeledCase {
                doc_id: format!("case{i:05}"),
                article: "6".into(),
                label: Label::from_violation(i < v),
            })
            .collect();
        ArticlePool::new("6", cases)
    }

    fn doc(id: &str, article: &str, outcome: Option<bool>) -> RawDocument {
        RawDocument {
            doc_id: id.into(),
            doc_type: DocType::Judgment,
            articles: BTreeSet::from([article.to_owned()]),
            violation_by_article: outcome.map(|v| (article.to_owned(), v)).into_iter().collect(),
            decision_date: chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            body: "text".into(),
        }
    }

    #[test]
    fn labels_cases() {
        let docs = [
            doc("a", "3", Some(true)),
            doc("b", "3", Some(true)),
            doc("c", "3", Some(false)),
            doc("d", "8", Some(false)),
        ];
        let p = label_cases(&docs, "3").unwrap();
        assert_eq!((p.v_count, p.nv_count), (2, 1));
        assert!(label_cases(&docs, "14").unwrap().is_empty());
        let err = label_cases(&[doc("x", "3", None)], "3").unwrap_err();
        assert!(matches!(err, DatasetError::MissingOutcome { ref doc_id, .. } if doc_id == "x"));
    }

    #[test]
    fn ratios() {
        assert_eq!(historical_ratio(&pool(91, 9)).unwrap(), 0.91);
        assert_eq!(historical_ratio(&pool(0, 5)).unwrap(), 0.0);
        assert!(historical_ratio(&pool(0, 0)).is_err());
    }

    #[test]
    fn article_six_shape() {
        let p = pool(1043, 560);
        let split = make_split(&p, 539.0 / 595.0, 0.10, 17).unwrap();
        let c = |cases: &[LabeledCase], l| DatasetSplit::count(cases, l);
        assert_eq!(c(&split.train, Label::Violation), 504);
        assert_eq!(c(&split.train, Label::Nonviolation), 504);
        assert_eq!(c(&split.test, Label::Violation), 539);
        assert_eq!(c(&split.test, Label::Nonviolation), 56);
        check_split(&split).unwrap();
    }

    #[test]
    fn tiny_balanced_pool() {
        let split = make_split(&pool(10, 10), 0.5, 0.10, 1).unwrap();
        assert_eq!((split.train.len(), split.test.len()), (18, 2));
        assert_eq!(DatasetSplit::count(&split.test, Label::Violation), 1);
    }

    #[test]
    fn degenerate_inputs() {
        for r in [0.0, 1.0] {
            assert!(matches!(
                make_split(&pool(10, 10), r, 0.1, 1),
                Err(DatasetError::DegenerateRatio { .. })
            ));
        }
        assert!(matches!(
            make_split(&pool(1, 10), 0.5, 0.1, 1),
            Err(DatasetError::PoolTooSmall { .. })
        ));
    }

    #[test]
    fn holdout_shrinks_when_majority_runs_short() {
        // minority 100 → h0 = 10 wants k = 90 majority, but only 110 - 90 = 20
        // are left after training.
        let p = pool(110, 100);
        let plan = plan_split(&p, 0.9, 0.1).unwrap();
        assert!(plan.holdout < 10);
        assert!(plan.majority_test + plan.train_per_class <= 110);
        let split = make_split(&p, 0.9, 0.1, 3).unwrap();
        check_split(&split).unwrap();
    }

    #[test]
    fn independent_of_input_order() {
        let p = pool(40, 25);
        let mut reversed = p.clone();
        reversed.cases.reverse();
        assert_eq!(make_split(&p, 0.7, 0.1, 9).unwrap(), make_split(&reversed, 0.7, 0.1, 9).unwrap());
        assert_ne!(make_split(&p, 0.7, 0.1, 9).unwrap(), make_split(&p, 0.7, 0.1, 10).unwrap());
    }

    #[test]
    fn manifest_replays() {
        let p = pool(30, 12);
        let split = make_split(&p, 0.6, 0.1, 4).unwrap();
        let json = serde_json::to_string(&split.manifest()).unwrap();
        let m: SplitManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(DatasetSplit::from_manifest(&m, &p).unwrap(), split);
    }

    proptest! {
        #[test]
        fn invariants_hold(v in 2usize..300, nv in 2usize..300, r in 0.02f64..0.98, rho in 0.02f64..0.5, seed in any::<u64>()) {
            let p = pool(v, nv);
            match make_split(&p, r, rho, seed) {
                Ok(split) => {
                    // brute-force set checks
                    let train: BTreeSet<&str> = split.train.iter().map(|c| c.doc_id.as_str()).collect();
                    let test: BTreeSet<&str> = split.test.iter().map(|c| c.doc_id.as_str()).collect();
                    prop_assert_eq!(train.len(), split.train.len());
                    prop_assert_eq!(test.len(), split.test.len());
                    prop_assert!(train.is_disjoint(&test));
                    prop_assert!(check_split(&split).is_ok(), "{:?}", check_split(&split));
                    prop_assert_eq!(&split, &make_split(&p, r, rho, seed).unwrap());
                }
                Err(DatasetError::Infeasible { .. }) => {
                    // even a single minority holdout cannot reach the ratio
                    let m = v.min(nv);
                    let big = v.max(nv);
                    let q = if v < nv { 1.0 - r } else { r };
                    let k = (q / (1.0 - q)).round() as usize;
                    prop_assert!(k + m - 1 > big);
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
