use criterion::{black_box, criterion_group, criterion_main, Criterion};
use verdict_bench::{blobs, facts, judgments};
use verdict_core::embeddings::train_word_embedding;
use verdict_core::models::{fit, MaxFeatures};
use verdict_core::ngram::{build_vocab, vectorize};
use verdict_core::selection::kfold;
use verdict_core::{EmbeddingParams, Hyper, HyperSetting};

fn ngrams(c: &mut Criterion) {
    let docs = facts(&judgments(100));
    c.bench_function("ngram vocab 200 docs", |b| b.iter(|| build_vocab(black_box(&docs))));
    let vocab = build_vocab(&docs);
    c.bench_function("ngram vectorize 200 docs", |b| b.iter(|| vectorize(black_box(&docs), &vocab)));
}

fn embeddings(c: &mut Criterion) {
    let docs = facts(&judgments(50));
    let mut params = EmbeddingParams::word2vec(50, 3);
    params.epochs = 1;
    params.min_count = 1;
    let mut g = c.benchmark_group("sgns");
    g.sample_size(10);
    g.bench_function("one epoch, dim 50, 100 docs", |b| {
        b.iter(|| train_word_embedding(black_box(&docs), &params).unwrap())
    });
    g.finish();
}

fn models(c: &mut Criterion) {
    let (x, y) = blobs(400, 100);
    let mut g = c.benchmark_group("fit 400x100");
    g.sample_size(10);
    let cases = [
        Hyper::DecisionTree {
            max_depth: None,
            min_samples_leaf: 2,
        },
        Hyper::RandomForest {
            n_trees: 20,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        },
        Hyper::GradientBoosting {
            n_trees: 20,
            max_depth: 3,
            learning_rate: 0.1,
        },
        Hyper::SgdLinear {
            lambda: 1e-4,
            epochs: 20,
        },
        Hyper::Qda {
            gamma: 0.1,
            epsilon: 1e-6,
        },
    ];
    for hyper in cases {
        let setting = HyperSetting::new(hyper.clone(), 1);
        g.bench_function(hyper.algorithm().as_str(), |b| b.iter(|| fit(&setting, &x, &y).unwrap()));
    }
    g.finish();
}

fn folds(c: &mut Criterion) {
    let (_, y) = blobs(5000, 1);
    c.bench_function("kfold 5000", |b| b.iter(|| kfold(5000, 10, black_box(9), &y).unwrap()));
}

criterion_group!(benches, ngrams, embeddings, models, folds);
criterion_main!(benches);
