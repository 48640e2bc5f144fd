use rand::seq::SliceRandom;

use super::SelectionError;
use crate::dataset::Label;
use crate::rng;

/// Stratified k-fold assignment. Each class is shuffled on its own, then
/// violations followed by non-violations are dealt round-robin over the
/// folds, so fold sizes and per-class counts each differ by at most one.
/// Every fold is returned sorted.
pub fn kfold(n: usize, k: usize, seed: u64, labels: &[Label]) -> Result<Vec<Vec<usize>>, SelectionError> {
    if k < 2 || n < k {
        return Err(SelectionError::FoldCount { n, k });
    }
    if labels.len() != n {
        return Err(SelectionError::InvalidConfig(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    let mut r = rng::rng(seed);
    let mut order = Vec::with_capacity(n);
    for class in [Label::Violation, Label::Nonviolation] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut r);
        order.extend(idx);
    }
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_twenty_gives_one_of_each() {
        let labels: Vec<Label> = (0..20).map(|i| Label::from_violation(i % 2 == 0)).collect();
        let folds = kfold(20, 10, 3, &labels).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_ne!(labels[f[0]], labels[f[1]]);
        }
    }

    #[test]
    fn twenty_three_into_ten() {
        let labels = vec![Label::Violation; 23];
        let sizes: Vec<usize> = kfold(23, 10, 0, &labels).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            kfold(9, 10, 0, &[Label::Violation; 9]),
            Err(SelectionError::FoldCount { n: 9, k: 10 })
        ));
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(n in 10usize..=500, seed in any::<u64>(), p in 0.0f64..1.0) {
            let mut r = rng::rng(seed ^ 0x5eed);
            let labels: Vec<Label> = (0..n).map(|_| Label::from_violation(rand::Rng::random_bool(&mut r, p))).collect();
            let folds = kfold(n, 10, seed, &labels).unwrap();
            let mut seen = vec![0u32; n];
            for f in &folds {
                for &i in f {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for class in [Label::Violation, Label::Nonviolation] {
                let counts: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
            prop_assert_eq!(&folds, &kfold(n, 10, seed, &labels).unwrap());
        }
    }
}
