//! CART trees over weighted samples.
//!
//! Two builders share the split rule. [`build_levelwise`] grows one level at
//! a time from presorted columns and suits trees that look at every feature
//! (single trees, boosting). [`build_per_node`] sorts each node's members
//! for a random feature subset, which suits forests.
//!
//! Split rule: the candidate maximising the summed child proxy wins, ties go
//! to the lower feature index and then the lower threshold. Thresholds sit
//! halfway between adjacent distinct values. Any impure node with a split
//! that respects `min_samples_leaf` is split, even when the gain is zero.

use std::cmp::Ordering;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// Targets are 0/1; minimises weighted Gini impurity.
    Gini,
    /// Minimises squared error.
    Mse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf_value(self.leaf_index(x))
    }

    pub fn leaf_value(&self, leaf: usize) -> f64 {
        match self.nodes[leaf] {
            Node::Leaf { value } => value,
            Node::Split { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    pub fn set_leaf_value(&mut self, leaf: usize, value: f64) {
        self.nodes[leaf] = Node::Leaf { value };
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(t, left as usize).max(walk(t, right as usize))
                }
            }
        }
        walk(self, 0)
    }
}

/// Column-major copy of a feature matrix with each column's samples sorted.
///
/// Samples holding the column's most common value are not listed; builders
/// treat them as one block. For sparse count features this skips most of
/// the work.
#[derive(Debug, Clone)]
pub(crate) struct Columns {
    n: usize,
    d: usize,
    values: Vec<f64>,
    sorted: Vec<SortedColumn>,
}

#[derive(Debug, Clone)]
struct SortedColumn {
    mode: f64,
    /// Samples below the mode, ascending by (value, index).
    below: Vec<u32>,
    /// Samples above the mode, ascending by (value, index).
    above: Vec<u32>,
}

fn by_value_then_index(col: &[f64]) -> impl Fn(&u32, &u32) -> Ordering + '_ {
    move |&a, &b| {
        col[a as usize]
            .total_cmp(&col[b as usize])
            .then(a.cmp(&b))
    }
}

impl Columns {
    pub fn new(x: &FeatureMatrix) -> Self {
        let (n, d) = (x.n_rows(), x.n_cols());
        let mut values = vec![0.0; n * d];
        for (i, row) in x.rows().enumerate() {
            for (f, &v) in row.iter().enumerate() {
                values[f * n + i] = v;
            }
        }
        let mut order: Vec<u32> = Vec::with_capacity(n);
        let sorted = (0..d)
            .map(|f| {
                let col = &values[f * n..(f + 1) * n];
                order.clear();
                order.extend(0..n as u32);
                order.sort_unstable_by(by_value_then_index(col));
                // longest run of equal values; the first one on ties
                let (mut best_start, mut best_len, mut start) = (0, 0, 0);
                for k in 1..=n {
                    if k == n || col[order[k] as usize] != col[order[start] as usize] {
                        if k - start > best_len {
                            best_start = start;
                            best_len = k - start;
                        }
                        start = k;
                    }
                }
                let mode = if n == 0 { 0.0 } else { col[order[best_start] as usize] };
                SortedColumn {
                    mode,
                    below: order[..best_start].to_vec(),
                    above: order[best_start + best_len..].to_vec(),
                }
            })
            .collect();
        Self { n, d, values, sorted }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    #[inline]
    fn value(&self, f: usize, i: usize) -> f64 {
        self.values[f * self.n + i]
    }

    fn column(&self, f: usize) -> &[f64] {
        &self.values[f * self.n..(f + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    count: u32,
    w: f64,
    /// Weighted target sum.
    s: f64,
    ymin: f64,
    ymax: f64,
}

impl Default for Stats {
    fn default() -> Self {
        Self {
            count: 0,
            w: 0.0,
            s: 0.0,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        }
    }
}

impl Stats {
    #[inline]
    fn add(&mut self, w: f64, y: f64) {
        self.count += 1;
        self.w += w;
        self.s += w * y;
        self.ymin = self.ymin.min(y);
        self.ymax = self.ymax.max(y);
    }

    #[inline]
    fn minus(&self, other: &Stats) -> Stats {
        Stats {
            count: self.count - other.count,
            w: self.w - other.w,
            s: self.s - other.s,
            ymin: f64::NAN,
            ymax: f64::NAN,
        }
    }

    fn is_pure(&self) -> bool {
        self.ymin >= self.ymax
    }

    fn leaf_value(&self) -> f64 {
        if self.w > 0.0 {
            self.s / self.w
        } else {
            0.0
        }
    }
}

#[inline]
fn proxy(c: Criterion, st: &Stats) -> f64 {
    if st.w <= 0.0 {
        return 0.0;
    }
    match c {
        Criterion::Gini => {
            let neg = st.w - st.s;
            (st.s * st.s + neg * neg) / st.w
        }
        Criterion::Mse => st.s * st.s / st.w,
    }
}

#[inline]
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    feature: u32,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => match self.score.total_cmp(&o.score) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    self.feature
                        .cmp(&o.feature)
                        .then(self.threshold.total_cmp(&o.threshold))
                        == Ordering::Less
                }
            },
        }
    }
}

/// Evaluates splitting `total` into `left` and the rest.
#[inline]
fn consider(
    params: &TreeParams,
    total: &Stats,
    left: &Stats,
    feature: usize,
    threshold: f64,
    best: &mut Option<Candidate>,
) {
    let msl = params.min_samples_leaf as u32;
    if left.count < msl || total.count - left.count < msl {
        return;
    }
    let right = total.minus(left);
    let cand = Candidate {
        score: proxy(params.criterion, left) + proxy(params.criterion, &right),
        feature: feature as u32,
        threshold,
    };
    if cand.beats(best) {
        *best = Some(cand);
    }
}

fn splittable(params: &TreeParams, st: &Stats, depth: usize) -> bool {
    params.max_depth.is_none_or(|m| depth < m)
        && st.count as usize >= 2 * params.min_samples_leaf.max(1)
        && !st.is_pure()
}

struct Grown {
    tree: Tree,
    /// Leaf reached by each training sample; `u32::MAX` for zero weight.
    leaf_of: Vec<u32>,
}

pub(crate) struct Fitted {
    pub tree: Tree,
    pub leaf_of: Vec<u32>,
}

impl From<Grown> for Fitted {
    fn from(g: Grown) -> Self {
        Fitted {
            tree: g.tree,
            leaf_of: g.leaf_of,
        }
    }
}

const NONE: u32 = u32::MAX;

/// Grows a tree one level at a time, scanning every feature once per level.
pub(crate) fn build_levelwise(cols: &Columns, y: &[f64], w: &[f64], params: &TreeParams) -> Fitted {
    let n = cols.n_rows();
    let mut node_of = vec![NONE; n];
    let mut root = Stats::default();
    for i in 0..n {
        if w[i] > 0.0 {
            node_of[i] = 0;
            root.add(w[i], y[i]);
        }
    }
    let mut nodes = vec![Node::Leaf {
        value: root.leaf_value(),
    }];
    let mut stats = vec![root];
    let mut frontier: Vec<u32> = if splittable(params, &root, 0) { vec![0] } else { vec![] };
    let mut slot_of: Vec<u32> = vec![NONE];
    let mut depth = 0usize;

    while !frontier.is_empty() {
        for (s, &node) in frontier.iter().enumerate() {
            slot_of[node as usize] = s as u32;
        }
        let m = frontier.len();
        let mut best: Vec<Option<Candidate>> = vec![None; m];
        let mut acc = vec![Stats::default(); m];
        let mut last = vec![0.0f64; m];
        let mut below = vec![Stats::default(); m];
        let mut below_last = vec![0.0f64; m];

        for f in 0..cols.n_cols() {
            let sc = &cols.sorted[f];
            let col = cols.column(f);
            acc.iter_mut().for_each(|a| *a = Stats::default());
            for &i in &sc.below {
                let node = node_of[i as usize];
                if node == NONE {
                    continue;
                }
                let slot = slot_of[node as usize];
                if slot == NONE {
                    continue;
                }
                let s = slot as usize;
                let x = col[i as usize];
                if acc[s].count > 0 && x > last[s] {
                    let left = acc[s];
                    consider(params, &stats[node as usize], &left, f, midpoint(last[s], x), &mut best[s]);
                }
                acc[s].add(w[i as usize], y[i as usize]);
                last[s] = x;
            }
            below.copy_from_slice(&acc);
            below_last.copy_from_slice(&last);
            acc.iter_mut().for_each(|a| *a = Stats::default());
            for &i in sc.above.iter().rev() {
                let node = node_of[i as usize];
                if node == NONE {
                    continue;
                }
                let slot = slot_of[node as usize];
                if slot == NONE {
                    continue;
                }
                let s = slot as usize;
                let x = col[i as usize];
                if acc[s].count > 0 && x < last[s] {
                    let total = &stats[node as usize];
                    let left = total.minus(&acc[s]);
                    consider(params, total, &left, f, midpoint(x, last[s]), &mut best[s]);
                }
                acc[s].add(w[i as usize], y[i as usize]);
                last[s] = x;
            }
            for (s, &node) in frontier.iter().enumerate() {
                let total = &stats[node as usize];
                let (b, a) = (&below[s], &acc[s]);
                let mode_count = total.count - b.count - a.count;
                if mode_count > 0 {
                    if b.count > 0 {
                        consider(params, total, b, f, midpoint(below_last[s], sc.mode), &mut best[s]);
                    }
                    if a.count > 0 {
                        let left = total.minus(a);
                        consider(params, total, &left, f, midpoint(sc.mode, last[s]), &mut best[s]);
                    }
                } else if b.count > 0 && a.count > 0 {
                    consider(params, total, b, f, midpoint(below_last[s], last[s]), &mut best[s]);
                }
            }
        }

        // Create children in frontier order, left before right.
        let mut children: Vec<Option<(u32, u32)>> = vec![None; m];
        for (s, &node) in frontier.iter().enumerate() {
            if let Some(c) = best[s] {
                let l = nodes.len() as u32;
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                stats.push(Stats::default());
                stats.push(Stats::default());
                slot_of.push(NONE);
                slot_of.push(NONE);
                nodes[node as usize] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left: l,
                    right: l + 1,
                };
                children[s] = Some((l, l + 1));
            }
        }
        for i in 0..n {
            let node = node_of[i];
            if node == NONE {
                continue;
            }
            let slot = slot_of[node as usize];
            if slot == NONE {
                continue;
            }
            if let (Some((l, r)), Some(c)) = (children[slot as usize], best[slot as usize]) {
                let child = if cols.value(c.feature as usize, i) <= c.threshold { l } else { r };
                node_of[i] = child;
                stats[child as usize].add(w[i], y[i]);
            }
        }
        for &node in &frontier {
            slot_of[node as usize] = NONE;
        }
        depth += 1;
        let mut next = Vec::new();
        for (l, r) in children.into_iter().flatten() {
            for child in [l, r] {
                nodes[child as usize] = Node::Leaf {
                    value: stats[child as usize].leaf_value(),
                };
                if splittable(params, &stats[child as usize], depth) {
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    Grown {
        tree: Tree { nodes },
        leaf_of: node_of,
    }
    .into()
}

/// How many features a forest node examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FeatureBudget {
    All,
    /// Examine features in random order until this many that vary within
    /// the node have been scored.
    Sample(usize),
}

/// Grows a tree depth-first, sorting each node's members for every feature
/// it examines.
pub(crate) fn build_per_node(
    cols: &Columns,
    y: &[f64],
    w: &[f64],
    params: &TreeParams,
    budget: FeatureBudget,
    rng: &mut Rng,
) -> Fitted {
    let n = cols.n_rows();
    let d = cols.n_cols();
    let members: Vec<u32> = (0..n as u32).filter(|&i| w[i as usize] > 0.0).collect();
    let mut root = Stats::default();
    for &i in &members {
        root.add(w[i as usize], y[i as usize]);
    }
    let mut nodes = vec![Node::Leaf {
        value: root.leaf_value(),
    }];
    let mut leaf_of = vec![NONE; n];
    let mut stack = vec![(0u32, members, root, 0usize)];
    let mut features: Vec<u32> = (0..d as u32).collect();
    let mut pairs: Vec<(f64, u32)> = Vec::new();

    while let Some((node, members, total, depth)) = stack.pop() {
        let mut best: Option<Candidate> = None;
        if splittable(params, &total, depth) {
            let wanted = match budget {
                FeatureBudget::All => d,
                FeatureBudget::Sample(k) => k.min(d),
            };
            let mut scored = 0usize;
            for k in 0..d {
                if scored >= wanted {
                    break;
                }
                let f = match budget {
                    FeatureBudget::All => k,
                    FeatureBudget::Sample(_) => {
                        let j = rng.random_range(k..d);
                        features.swap(k, j);
                        features[k] as usize
                    }
                };
                pairs.clear();
                pairs.extend(members.iter().map(|&i| (cols.value(f, i as usize), i)));
                let (lo, hi) = pairs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.0), hi.max(p.0))
                });
                if lo >= hi {
                    continue;
                }
                scored += 1;
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut acc = Stats::default();
                let mut last = 0.0;
                for &(x, i) in &pairs {
                    if acc.count > 0 && x > last {
                        consider(params, &total, &acc, f, midpoint(last, x), &mut best);
                    }
                    acc.add(w[i as usize], y[i as usize]);
                    last = x;
                }
            }
        }
        match best {
            None => {
                for &i in &members {
                    leaf_of[i as usize] = node;
                }
            }
            Some(c) => {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                let (mut ls, mut rs) = (Stats::default(), Stats::default());
                for &i in &members {
                    if cols.value(c.feature as usize, i as usize) <= c.threshold {
                        left.push(i);
                        ls.add(w[i as usize], y[i as usize]);
                    } else {
                        right.push(i);
                        rs.add(w[i as usize], y[i as usize]);
                    }
                }
                let l = nodes.len() as u32;
                nodes.push(Node::Leaf {
                    value: ls.leaf_value(),
                });
                nodes.push(Node::Leaf {
                    value: rs.leaf_value(),
                });
                nodes[node as usize] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left: l,
                    right: l + 1,
                };
                stack.push((l + 1, right, rs, depth + 1));
                stack.push((l, left, ls, depth + 1));
            }
        }
    }
    Grown {
        tree: Tree { nodes },
        leaf_of,
    }
    .into()
}

/// Nested form of a tree, independent of node numbering.
#[cfg(test)]
pub(crate) fn canonical(t: &Tree) -> String {
    fn walk(t: &Tree, at: usize, out: &mut String) {
        match &t.nodes[at] {
            Node::Leaf { value } => out.push_str(&format!("L({value})")),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push_str(&format!("S({feature},{threshold},"));
                walk(t, *left as usize, out);
                out.push(',');
                walk(t, *right as usize, out);
                out.push(')');
            }
        }
    }
    let mut s = String::new();
    walk(t, 0, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix::from_rows(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            (0..d).map(|f| format!("f{f}")).collect(),
            rows.to_vec(),
        )
        .unwrap()
    }

    fn gini(depth: Option<usize>, leaf: usize) -> TreeParams {
        TreeParams {
            max_depth: depth,
            min_samples_leaf: leaf,
            criterion: Criterion::Gini,
        }
    }

    #[test]
    fn mode_block_is_the_most_common_value() {
        let m = matrix(&[vec![0.0], vec![3.0], vec![0.0], vec![-1.0], vec![0.0]]);
        let c = Columns::new(&m);
        assert_eq!(c.sorted[0].mode, 0.0);
        assert_eq!(c.sorted[0].below, vec![3]);
        assert_eq!(c.sorted[0].above, vec![1]);
    }

    #[test]
    fn xor_needs_two_levels() {
        let x = Columns::new(&matrix(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]));
        let y = [0.0, 1.0, 1.0, 0.0];
        let w = [1.0; 4];
        let t = build_levelwise(&x, &y, &w, &gini(Some(2), 1)).tree;
        assert_eq!(t.depth(), 2);
        for (row, want) in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]].iter().zip(y) {
            assert_eq!(t.predict(row), want);
        }
        // zero-gain root split goes to feature 0 at the midpoint
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn respects_limits() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let x = Columns::new(&matrix(&rows));
        let w = vec![1.0; 20];
        let t = build_levelwise(&x, &y, &w, &gini(Some(3), 1)).tree;
        assert!(t.depth() <= 3);
        let fitted = build_levelwise(&x, &y, &w, &gini(None, 3));
        let mut per_leaf = std::collections::HashMap::new();
        for &l in &fitted.leaf_of {
            *per_leaf.entry(l).or_insert(0) += 1;
        }
        assert!(per_leaf.values().all(|&c| c >= 3));
    }

    #[test]
    fn zero_weight_samples_are_ignored() {
        let x = Columns::new(&matrix(&[vec![0.0], vec![1.0], vec![2.0]]));
        let t = build_levelwise(&x, &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &gini(None, 1));
        assert_eq!(t.leaf_of[2], NONE);
        assert_eq!(t.tree.predict(&[5.0]), 1.0);
    }

    #[test]
    fn threshold_never_rounds_onto_the_upper_value() {
        let lo = 1.0_f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        assert_eq!(midpoint(lo, hi), lo);
        assert_eq!(midpoint(0.0, 1.0), 0.5);
    }

    fn random_data(seed: u64, n: usize, d: usize) -> (FeatureMatrix, Vec<f64>, Vec<f64>) {
        let mut r = rng::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| if r.random_bool(0.6) { 0.0 } else { r.random_range(0..4) as f64 })
                    .collect()
            })
            .collect();
        let y = (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let w = (0..n).map(|_| r.random_range(0..3) as f64).collect();
        (matrix(&rows), y, w)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn builders_agree_on_integer_weights(seed in any::<u64>(), n in 2usize..60, d in 1usize..6, depth in prop::option::of(1usize..6), leaf in 1usize..4) {
            let (m, y, w) = random_data(seed, n, d);
            let cols = Columns::new(&m);
            let p = gini(depth, leaf);
            let a = build_levelwise(&cols, &y, &w, &p);
            let mut r = rng::rng(seed);
            let b = build_per_node(&cols, &y, &w, &p, FeatureBudget::All, &mut r);
            prop_assert_eq!(canonical(&a.tree), canonical(&b.tree));
            for i in 0..n {
                prop_assert_eq!(a.leaf_of[i] == NONE, b.leaf_of[i] == NONE);
            }
        }

        #[test]
        fn training_leaves_match_routing(seed in any::<u64>(), n in 2usize..60, d in 1usize..6) {
            let (m, y, w) = random_data(seed, n, d);
            let cols = Columns::new(&m);
            let mut r = rng::rng(seed);
            for fitted in [
                build_levelwise(&cols, &y, &w, &gini(None, 1)),
                build_per_node(&cols, &y, &w, &gini(None, 1), FeatureBudget::Sample(1), &mut r),
            ] {
                for i in 0..n {
                    if w[i] > 0.0 {
                        prop_assert_eq!(fitted.leaf_of[i] as usize, fitted.tree.leaf_index(m.row(i)));
                    }
                }
            }
        }
    }
}
