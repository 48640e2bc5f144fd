//! Acceptance checks. One PASS/FAIL line per criterion; exits nonzero if
//! any fails.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use verdict_cli::{run_all, Context, PipelineConfig};
use verdict_core::dataset::{check_split, make_split, plan_split, DatasetError};
use verdict_core::embeddings::{sgns_gradients, sgns_loss};
use verdict_core::models::{fit, fit_heuristic, predict, Hyper};
use verdict_core::ngram::{build_vocab_with_capacity, count_vector, fit_scaler, transform, MinMaxScaler};
use verdict_core::parser::SectionKind;
use verdict_core::rng;
use verdict_core::selection::{evaluate, kfold, weighted_average, REPORT_JSON};
use verdict_core::text::TokenSource;
use verdict_core::{ArticlePool, FeatureMatrix, HyperSetting, Label, LabeledCase, MetricsReport, TokenSequence};

type Check = Result<String, String>;

/// (article, test violations, test non-violations).
const TEST_COUNTS: [(&str, u64, u64); 12] = [
    ("2", 58, 8),
    ("3", 175, 27),
    ("5", 168, 18),
    ("6", 539, 56),
    ("7", 4, 5),
    ("8", 93, 30),
    ("9", 5, 2),
    ("10", 45, 14),
    ("11", 14, 3),
    ("13", 138, 11),
    ("14", 20, 20),
    ("18", 1, 2),
];

fn empty_rows(n: u64) -> FeatureMatrix {
    FeatureMatrix::new((0..n).map(|i| format!("c{i}")).collect(), vec![], vec![]).unwrap()
}

fn test_labels(v: u64, nv: u64) -> Vec<Label> {
    let mut y = vec![Label::Violation; v as usize];
    y.extend(vec![Label::Nonviolation; nv as usize]);
    y
}

/// Heuristic accuracy on a test set whose counts are also the reference.
fn heuristic_counts(v: u64, nv: u64) -> Result<(u64, u64), String> {
    let m = fit_heuristic(v, nv).map_err(|e| e.to_string())?;
    let metrics = evaluate(&m, &empty_rows(v + nv), &test_labels(v, nv)).map_err(|e| e.to_string())?;
    Ok((metrics.tp + metrics.tn, metrics.total()))
}

fn c1_heuristic_weighted() -> Check {
    let mut acc = BTreeMap::new();
    let mut weights = BTreeMap::new();
    for (a, v, nv) in TEST_COUNTS {
        let (correct, total) = heuristic_counts(v, nv)?;
        acc.insert(a.to_string(), correct as f64 / total as f64);
        weights.insert(a.to_string(), total as f64);
    }
    let got = weighted_average(&acc, &weights).map_err(|e| e.to_string())?;
    // oracle: majority count per article, a tie counts half
    let correct: u64 = TEST_COUNTS.iter().map(|&(_, v, nv)| v.max(nv)).sum();
    let total: u64 = TEST_COUNTS.iter().map(|&(_, v, nv)| v + nv).sum();
    let oracle = correct as f64 / total as f64;
    let detail = format!("{got:.6} (oracle {correct}/{total} = {oracle:.6})");
    if (got - 0.8668).abs() <= 1e-4 && (got - oracle).abs() <= 1e-12 && (correct, total) == (1262, 1456) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_spot_checks() -> Check {
    let want = [
        ("6", Ratio::new(539u64, 595)),
        ("18", Ratio::new(2, 3)),
        ("14", Ratio::new(1, 2)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (a, expected) in want {
        let &(_, v, nv) = TEST_COUNTS.iter().find(|r| r.0 == a).unwrap();
        let (correct, total) = heuristic_counts(v, nv)?;
        let got = Ratio::new(correct, total);
        ok &= got == expected;
        parts.push(format!("article {a} = {correct}/{total} = {got}"));
    }
    if ok {
        Ok(parts.join(", "))
    } else {
        Err(parts.join(", "))
    }
}

fn demo_run(out: &Path) -> Result<MetricsReport, String> {
    let cfg = PipelineConfig::load(&verdict_cli::demo_config_path())?;
    if cfg.workers != 1 {
        return Err(format!("demo config has workers = {}", cfg.workers));
    }
    let ctx = Context {
        cfg,
        out: out.to_path_buf(),
        dry_run: false,
    };
    run_all(&ctx).map_err(|(s, e)| format!("stage {s}: {e}"))?;
    let text = fs::read_to_string(out.join(REPORT_JSON)).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn c3_synthetic_end_to_end(out: &Path) -> Check {
    let cfg = PipelineConfig::load(&verdict_cli::demo_config_path())?;
    let spec = cfg.synthetic.as_ref().ok_or("demo config is not synthetic")?;
    if spec.articles.len() != 2 || spec.docs_per_article_per_label != 200 || spec.signal_rate != 0.05 {
        return Err("demo config does not match the required corpus".into());
    }
    let report = demo_run(out)?;
    let mut parts = Vec::new();
    let mut ok = true;
    let mut beats_on_balanced = false;
    for a in &report.articles {
        ok &= a.model.accuracy >= 0.90;
        if a.test_violations == a.test_nonviolations && a.model.accuracy > a.heuristic.accuracy {
            beats_on_balanced = true;
        }
        parts.push(format!(
            "article {}: model {:.4} vs heuristic {:.4} ({} configs)",
            a.article, a.model.accuracy, a.heuristic.accuracy, a.configs_evaluated
        ));
    }
    let detail = parts.join("; ");
    if ok && beats_on_balanced {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c4_sgns_gradients() -> Check {
    let mut r = rng::rng(41);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dim = r.random_range(1..=32);
        let k = r.random_range(0..=8);
        let scale = r.random_range(0.1..2.0);
        let mut vecs: Vec<Vec<f64>> = (0..k + 2)
            .map(|_| (0..dim).map(|_| r.random_range(-scale..scale)).collect())
            .collect();
        let loss = |v: &[Vec<f64>]| {
            let negs: Vec<&[f64]> = v[2..].iter().map(Vec::as_slice).collect();
            sgns_loss(&v[0], &v[1], &negs)
        };
        let analytic = {
            let negs: Vec<&[f64]> = vecs[2..].iter().map(Vec::as_slice).collect();
            let g = sgns_gradients(&vecs[0], &vecs[1], &negs);
            let mut all = vec![g.center, g.context];
            all.extend(g.negatives);
            all
        };
        for (which, grad) in analytic.iter().enumerate() {
            let mut numeric = vec![0.0; dim];
            for j in 0..dim {
                let x0 = vecs[which][j];
                vecs[which][j] = x0 + h;
                let up = loss(&vecs);
                vecs[which][j] = x0 - h;
                let down = loss(&vecs);
                vecs[which][j] = x0;
                numeric[j] = (up - down) / (2.0 * h);
            }
            let diff: f64 = grad.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let denom = norm(grad).max(norm(&numeric));
            if denom > 0.0 {
                worst = worst.max(diff / denom);
            }
        }
    }
    let detail = format!("max relative error {worst:.3e}");
    if worst < 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every 1- to 4-gram with its count, by direct window enumeration.
fn brute_counts(docs: &[Vec<String>]) -> BTreeMap<Vec<String>, u64> {
    let mut counts = BTreeMap::new();
    for d in docs {
        for n in 1..=4 {
            if d.len() >= n {
                for w in d.windows(n) {
                    *counts.entry(w.to_vec()).or_insert(0) += 1;
                }
            }
        }
    }
    counts
}

fn c5_ngram_oracle() -> Check {
    let mut r = rng::rng(55);
    let mut compared = 0usize;
    for corpus in 0..100 {
        let alphabet = r.random_range(2..=40);
        let n_docs = r.random_range(1..=50);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                let len = r.random_range(0..=200);
                (0..len).map(|_| format!("w{}", r.random_range(0..alphabet))).collect()
            })
            .collect();
        let capacity = if corpus % 4 == 0 { 2000 } else { r.random_range(1..=400) };
        let seqs: Vec<TokenSequence> = docs
            .iter()
            .enumerate()
            .map(|(i, t)| {
                TokenSequence::new(
                    t.clone(),
                    TokenSource {
                        doc_id: format!("d{i}"),
                        section: SectionKind::Facts,
                        stopwords_removed: false,
                    },
                )
            })
            .collect();
        let vocab = build_vocab_with_capacity(&seqs, capacity);

        let mut expected: Vec<(Vec<String>, u64)> = brute_counts(&docs).into_iter().collect();
        expected.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        expected.truncate(capacity);
        let got: Vec<(Vec<String>, u64)> = vocab
            .entries()
            .iter()
            .map(|e| (e.ngram.clone(), e.train_count))
            .collect();
        if got != expected {
            return Err(format!("corpus {corpus}: vocabulary differs"));
        }
        for (seq, doc) in seqs.iter().zip(&docs) {
            let row = count_vector(seq, &vocab);
            for (col, (gram, _)) in expected.iter().enumerate() {
                let n = if doc.len() >= gram.len() {
                    doc.windows(gram.len()).filter(|w| *w == gram.as_slice()).count()
                } else {
                    0
                };
                if row[col] != n as f64 {
                    return Err(format!("corpus {corpus}, {}: count of {gram:?}", seq.source.doc_id));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("100 corpora, {compared} counts compared"))
}

fn pool(v: usize, nv: usize) -> ArticlePool {
    let cases = (0..v + nv)
        .map(|i| LabeledCase {
            doc_id: format!("case-{i:05}"),
            article: "a".into(),
            label: Label::from_violation(i < v),
        })
        .collect();
    ArticlePool::new("a", cases)
}

/// True when some holdout h >= 1 fits the pool, by direct search.
fn feasible(v: usize, nv: usize, r: f64) -> bool {
    let (m, big, q) = if v < nv { (v, nv, 1.0 - r) } else { (nv, v, r) };
    (1..m).any(|h| ((h as f64 * q / (1.0 - q)).round() as usize) + (m - h) <= big)
}

fn c6_split_invariants() -> Check {
    let mut r = rng::rng(66);
    let mut done = 0;
    let mut infeasible = 0;
    while done < 500 {
        let v = r.random_range(2..=400);
        let nv = r.random_range(2..=400);
        let target = r.random_range(0.05..0.95);
        let rho = r.random_range(0.02..0.5);
        let seed: u64 = r.random();
        let p = pool(v, nv);
        let split = match make_split(&p, target, rho, seed) {
            Ok(s) => s,
            Err(DatasetError::Infeasible { .. }) if !feasible(v, nv, target) => {
                infeasible += 1;
                continue;
            }
            Err(e) => return Err(format!("v={v} nv={nv} r={target}: {e}")),
        };
        check_split(&split).map_err(|e| format!("v={v} nv={nv}: {e}"))?;
        let train_v = split.train.iter().filter(|c| c.label == Label::Violation).count();
        if 2 * train_v != split.train.len() {
            return Err(format!("v={v} nv={nv}: training set not balanced"));
        }
        let train: HashSet<&str> = split.train.iter().map(|c| c.doc_id.as_str()).collect();
        if split.test.iter().any(|c| train.contains(c.doc_id.as_str())) {
            return Err(format!("v={v} nv={nv}: train and test overlap"));
        }
        let test_v = split.test.iter().filter(|c| c.label == Label::Violation).count();
        let ratio = test_v as f64 / split.test.len() as f64;
        if (ratio - target).abs() > 1.0 / split.test.len() as f64 {
            return Err(format!("v={v} nv={nv}: test ratio {ratio} vs {target}"));
        }
        done += 1;
    }

    let p = pool(1043, 560);
    let plan = plan_split(&p, 539.0 / 595.0, 0.10).map_err(|e| e.to_string())?;
    let s = make_split(&p, 539.0 / 595.0, 0.10, 6).map_err(|e| e.to_string())?;
    let test_v = s.test.iter().filter(|c| c.label == Label::Violation).count();
    let row = (plan.train_per_class, test_v, s.test.len() - test_v, s.train.len());
    let detail = format!(
        "500 splits ok ({infeasible} infeasible draws confirmed); article 6 row: train {}/class, test {} v + {} nv",
        row.0, row.1, row.2
    );
    if row == (504, 539, 56, 1008) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_kfold() -> Check {
    let mut r = rng::rng(77);
    for n in 10..=500 {
        let p = r.random_range(0.05..0.95);
        let labels: Vec<Label> = (0..n).map(|_| Label::from_violation(r.random_bool(p))).collect();
        let k = 10;
        let folds = kfold(n, k, r.random(), &labels).map_err(|e| e.to_string())?;
        let mut seen = vec![false; n];
        for f in &folds {
            for &i in f {
                if seen[i] {
                    return Err(format!("n={n}: index {i} twice"));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(format!("n={n}: folds do not cover every index"));
        }
        let spread = |xs: Vec<usize>| xs.iter().max().unwrap() - xs.iter().min().unwrap();
        if spread(folds.iter().map(Vec::len).collect()) > 1 {
            return Err(format!("n={n}: fold sizes differ by more than one"));
        }
        for class in [Label::Violation, Label::Nonviolation] {
            let per = folds
                .iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            if spread(per) > 1 {
                return Err(format!("n={n}: {class} counts differ by more than one"));
            }
        }
    }
    Ok("n = 10..=500, k = 10".into())
}

fn c8_scaling() -> Check {
    let mut r = rng::rng(88);
    for t in 0..200 {
        let rows = r.random_range(1..=30);
        let cols = r.random_range(1..=12);
        let constant_col = r.random_range(0..cols);
        let c = r.random_range(-5.0..5.0);
        let data: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|j| if j == constant_col { c } else { r.random_range(-100.0..100.0) })
                    .collect()
            })
            .collect();
        let m = FeatureMatrix::from_rows(
            (0..rows).map(|i| format!("r{i}")).collect(),
            (0..cols).map(|j| format!("c{j}")).collect(),
            data,
        )
        .unwrap();
        let s = fit_scaler(&m).map_err(|e| e.to_string())?;
        let out = transform(&m, &s).map_err(|e| e.to_string())?;
        if out.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!("trial {t}: value outside [0, 1]"));
        }
        if out.rows().any(|row| row[constant_col] != 0.0) {
            return Err(format!("trial {t}: constant column not 0"));
        }
    }
    let s = MinMaxScaler {
        min: vec![0.0],
        max: vec![4.0],
    };
    let x = FeatureMatrix::from_rows(vec!["t".into()], vec!["c".into()], vec![vec![6.0]]).unwrap();
    let v = transform(&x, &s).map_err(|e| e.to_string())?.get(0, 0);
    if v == 1.5 {
        Ok("200 random matrices; (0, 4, 6) -> 1.5".into())
    } else {
        Err(format!("(0, 4, 6) -> {v}"))
    }
}

fn c9_determinism(first: &Path, second: &Path) -> Check {
    demo_run(second)?;
    let a = fs::read(first.join(REPORT_JSON)).map_err(|e| e.to_string())?;
    let b = fs::read(second.join(REPORT_JSON)).map_err(|e| e.to_string())?;
    if a == b {
        Ok(format!("{} bytes identical", a.len()))
    } else {
        Err("report JSON differs between runs".into())
    }
}

fn c10_qda() -> Check {
    let mut r = rng::rng(1010);
    let a = Normal::new(0.0, 1.0).unwrap();
    let b = Normal::new(4.0, 1.0).unwrap();
    let mut sample = |n: usize| {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            rows.push(vec![a.sample(&mut r)]);
            y.push(Label::Nonviolation);
            rows.push(vec![b.sample(&mut r)]);
            y.push(Label::Violation);
        }
        let m = FeatureMatrix::from_rows(
            (0..2 * n).map(|i| format!("x{i}")).collect(),
            vec!["x".into()],
            rows,
        )
        .unwrap();
        (m, y)
    };
    let (x, y) = sample(500);
    let (xt, yt) = sample(500);
    let model = fit(&HyperSetting::new(Hyper::Qda { gamma: 0.0, epsilon: 1e-6 }, 0), &x, &y).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (0.0, 4.0);
    if !(model.score_row(&[lo]) < 0.0 && model.score_row(&[hi]) >= 0.0) {
        return Err("no sign change between the means".into());
    }
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        if model.score_row(&[mid]) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let acc = |x: &FeatureMatrix, y: &[Label]| -> Result<f64, String> {
        let p = predict(&model, x).map_err(|e| e.to_string())?;
        Ok(p.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64)
    };
    let (train_acc, test_acc) = (acc(&x, &y)?, acc(&xt, &yt)?);
    let detail = format!("boundary {lo:.4}, accuracy {train_acc:.4} train / {test_acc:.4} fresh sample");
    if (lo - 2.0).abs() <= 0.15 && train_acc >= 0.95 && test_acc >= 0.95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn report(n: usize, name: &str, limit: Duration, elapsed: Duration, result: Check) -> bool {
    let in_time = elapsed <= limit;
    let (ok, detail) = match result {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {n:>2} {name}: {detail} [{:.2}s, limit {}s{}]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" }
    );
    ok
}

fn timed(f: impl FnOnce() -> Check) -> (Duration, Check) {
    let t = Instant::now();
    let r = f();
    (t.elapsed(), r)
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let tmp = tempfile::tempdir().expect("temp dir");
    let first = tmp.path().join("demo-1");
    let second = tmp.path().join("demo-2");
    let mut ok = true;

    let (t, r) = timed(c1_heuristic_weighted);
    ok &= report(1, "heuristic weighted accuracy", secs(1), t, r);
    let (t, r) = timed(c2_spot_checks);
    ok &= report(2, "heuristic spot checks", secs(1), t, r);
    let (t3, r) = timed(|| c3_synthetic_end_to_end(&first));
    ok &= report(3, "synthetic end-to-end", secs(600), t3, r);
    let (t, r) = timed(c4_sgns_gradients);
    ok &= report(4, "sgns gradient oracle", secs(5), t, r);
    let (t, r) = timed(c5_ngram_oracle);
    ok &= report(5, "n-gram oracle", secs(30), t, r);
    let (t, r) = timed(c6_split_invariants);
    ok &= report(6, "split invariants", secs(10), t, r);
    let (t, r) = timed(c7_kfold);
    ok &= report(7, "k-fold properties", secs(10), t, r);
    let (t, r) = timed(c8_scaling);
    ok &= report(8, "scaling properties", secs(1), t, r);
    // The first demo run is the one from criterion 3; both runs count.
    let (t9, r) = timed(|| c9_determinism(&first, &second));
    ok &= report(9, "demo determinism", secs(1200), t3 + t9, r);
    let (t, r) = timed(c10_qda);
    ok &= report(10, "qda oracle", secs(5), t, r);

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
