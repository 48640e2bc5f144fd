use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{weighted_average, weighted_average_defined, Metrics};
use super::SelectionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleReport {
    pub article: String,
    pub best: ExperimentConfig,
    pub cv_mean_accuracy: f64,
    pub cv_fold_accuracies: Vec<f64>,
    pub configs_evaluated: usize,
    pub configs_failed: usize,
    pub split_seed: u64,
    pub fold_seed: u64,
    pub r_target: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub test_violations: usize,
    pub test_nonviolations: usize,
    /// Counts the heuristic's majority was taken from.
    pub heuristic_reference: (u64, u64),
    pub model: Metrics,
    pub heuristic: Metrics,
}

/// Test-size weighted averages. Precision and recall skip articles where
/// they are undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub model_accuracy: f64,
    pub heuristic_accuracy: f64,
    pub model_precision: Option<f64>,
    pub model_recall: Option<f64>,
    pub heuristic_precision: Option<f64>,
    pub heuristic_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub articles: Vec<ArticleReport>,
    pub weighted: WeightedMetrics,
}

impl MetricsReport {
    pub fn new(seed: u64, mut articles: Vec<ArticleReport>) -> Result<Self, SelectionError> {
        articles.sort_by(|a, b| a.article.cmp(&b.article));
        let weights: BTreeMap<String, f64> = articles
            .iter()
            .map(|a| (a.article.clone(), a.test_size as f64))
            .collect();
        if weights.len() != articles.len() {
            return Err(SelectionError::InvalidConfig("duplicate article in report".into()));
        }
        let plain = |f: &dyn Fn(&ArticleReport) -> f64| {
            let v = articles.iter().map(|a| (a.article.clone(), f(a))).collect();
            weighted_average(&v, &weights)
        };
        let optional = |f: &dyn Fn(&ArticleReport) -> Option<f64>| {
            let v = articles.iter().map(|a| (a.article.clone(), f(a))).collect();
            weighted_average_defined(&v, &weights)
        };
        let weighted = WeightedMetrics {
            model_accuracy: plain(&|a| a.model.accuracy)?,
            heuristic_accuracy: plain(&|a| a.heuristic.accuracy)?,
            model_precision: optional(&|a| a.model.precision)?,
            model_recall: optional(&|a| a.model.recall)?,
            heuristic_precision: optional(&|a| a.heuristic.precision)?,
            heuristic_recall: optional(&|a| a.heuristic.recall)?,
        };
        Ok(Self {
            seed,
            articles,
            weighted,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["article", "model_accuracy", "heuristic_accuracy", "precision", "recall", "test_size"])
            .expect("in-memory write");
        for a in &self.articles {
            w.write_record([
                a.article.clone(),
                a.model.accuracy.to_string(),
                a.heuristic.accuracy.to_string(),
                opt(a.model.precision),
                opt(a.model.recall),
                a.test_size.to_string(),
            ])
            .expect("in-memory write");
        }
        let total: usize = self.articles.iter().map(|a| a.test_size).sum();
        w.write_record([
            "weighted_average".to_string(),
            self.weighted.model_accuracy.to_string(),
            self.weighted.heuristic_accuracy.to_string(),
            opt(self.weighted.model_precision),
            opt(self.weighted.model_recall),
            total.to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn to_text(&self) -> String {
        let pct = |v: f64| format!("{:.4}", v);
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
        let mut s = String::new();
        let _ = writeln!(s, "Model and heuristic accuracy on the test sets (seed {})", self.seed);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>9} {:>9} {:>9} {:>9}  best config",
            "article", "test", "model", "heuristic", "precision", "recall"
        );
        for a in &self.articles {
            let _ = writeln!(
                s,
                "{:<10} {:>6} {:>9} {:>9} {:>9} {:>9}  {} {}",
                a.article,
                a.test_size,
                pct(a.model.accuracy),
                pct(a.heuristic.accuracy),
                opt(a.model.precision),
                opt(a.model.recall),
                a.best.features,
                a.best.hyper.hyper
            );
        }
        let total: usize = self.articles.iter().map(|a| a.test_size).sum();
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>9} {:>9} {:>9} {:>9}",
            "weighted",
            total,
            pct(self.weighted.model_accuracy),
            pct(self.weighted.heuristic_accuracy),
            opt(self.weighted.model_precision),
            opt(self.weighted.model_recall)
        );
        s
    }
}

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_CSV: &str = "report.csv";

/// Writes `report.json`, `report.txt` and `report.csv` into `out_dir`.
pub fn render_report(report: &MetricsReport, out_dir: &Path) -> Result<Vec<PathBuf>, SelectionError> {
    let io = |path: &Path, e: std::io::Error| SelectionError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, body) in [
        (REPORT_JSON, report.to_json()),
        (REPORT_TXT, report.to_text()),
        (REPORT_CSV, report.to_csv()),
    ] {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> Result<MetricsReport, SelectionError> {
    let err = |message: String| SelectionError::Io {
        path: path.display().to_string(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}
