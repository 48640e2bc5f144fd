use super::{
    axpy, dot, logistic_coef, softplus, uniform_init, EmbeddingError, EmbeddingParams,
    NegativeTable, Vocabulary, WordEmbedding,
};
use crate::rng;
use crate::text::TokenSequence;

/// Skip-gram negative-sampling loss for one (center, context) pair:
/// `-[log σ(u_ctx·v_c) + Σ log σ(-u_neg·v_c)]`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    softplus(-dot(context, center))
        + negatives
            .iter()
            .map(|u| softplus(dot(u, center)))
            .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every input vector.
pub fn sgns_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradients {
    let mut g_center = vec![0.0; center.len()];
    let pos = logistic_coef(dot(context, center), true);
    axpy(pos, context, &mut g_center);
    let g_context = center.iter().map(|v| pos * v).collect();
    let g_neg = negatives
        .iter()
        .map(|u| {
            let c = logistic_coef(dot(u, center), false);
            axpy(c, u, &mut g_center);
            center.iter().map(|v| c * v).collect()
        })
        .collect();
    SgnsGradients {
        center: g_center,
        context: g_context,
        negatives: g_neg,
    }
}

/// One SGD step on [`sgns_loss`] for a positive pair plus sampled negatives.
/// Output rows are updated in place as each target is visited; the center
/// update is applied at the end. Negatives that hit the context word are
/// skipped.
#[allow(clippy::too_many_arguments)]
pub(super) fn sgns_step(
    input: &mut [f64],
    output: &mut [f64],
    dim: usize,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
    grad: &mut [f64],
) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let c = center as usize * dim;
    let v = &mut input[c..c + dim];
    let mut visit = |target: u32, positive: bool| {
        let t = target as usize * dim;
        let u = &mut output[t..t + dim];
        let coef = logistic_coef(dot(u, v), positive);
        axpy(coef, u, grad);
        axpy(-lr * coef, v, u);
    };
    visit(context, true);
    for &n in negatives.iter().filter(|&&n| n != context) {
        visit(n, false);
    }
    axpy(-lr, grad, v);
}

pub fn train_word_embedding(
    corpus: &[TokenSequence],
    params: &EmbeddingParams,
) -> Result<WordEmbedding, EmbeddingError> {
    params.validate()?;
    let vocab = Vocabulary::build(corpus.iter().map(|s| s.tokens.as_slice()), params.min_count)?;
    let table = NegativeTable::new(&vocab);
    let docs: Vec<Vec<u32>> = corpus.iter().map(|s| vocab.encode(&s.tokens)).collect();

    let dim = params.dim;
    let mut rng = rng::rng(params.seed);
    let mut input = uniform_init(&mut rng, vocab.len(), dim);
    let mut output = vec![0.0; vocab.len() * dim];
    let mut grad = vec![0.0; dim];
    let mut negatives = vec![0u32; params.negatives];

    let per_epoch: usize = docs.iter().map(Vec::len).sum();
    let total = (per_epoch * params.epochs).max(1) as f64;
    let mut processed = 0usize;
    for _ in 0..params.epochs {
        for doc in &docs {
            for (i, &center) in doc.iter().enumerate() {
                let lr = params.learning_rate(processed as f64 / total);
                processed += 1;
                let lo = i.saturating_sub(params.window);
                let hi = (i + params.window).min(doc.len() - 1);
                for (j, &ctx) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    for n in negatives.iter_mut() {
                        *n = table.sample(&mut rng);
                    }
                    sgns_step(&mut input, &mut output, dim, center, ctx, &negatives, lr, &mut grad);
                }
            }
        }
    }

    let mut emb = WordEmbedding::new(dim, vocab.tokens().to_vec(), input);
    emb.params = Some(params.clone());
    emb.corpus_token_count = vocab.corpus_tokens();
    Ok(emb)
}
