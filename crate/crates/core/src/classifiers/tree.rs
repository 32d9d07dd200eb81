//! CART trees: Gini impurity for classification, squared error for
//! regression. Candidate thresholds are midpoints between consecutive
//! distinct values; rows with `x <= threshold` go left.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::learner::{FitError, Scorer};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until purity or `min_leaf` stops it.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(10),
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Impurity {
    Gini,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    Leaf {
        /// Sum of targets (defective count for classification).
        sum: f64,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Arena-allocated binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub(crate) fn leaf(&self, x: &[f64]) -> (f64, usize) {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { sum, count } => return (*sum, *count),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub(crate) fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Laplace-smoothed defect fraction of a classification leaf.
pub(crate) fn leaf_probability(sum: f64, count: usize) -> f64 {
    (sum + 1.0) / (count as f64 + 2.0)
}

pub(crate) fn gini(defective: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = defective / total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BestSplit {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted child impurity (Gini) or total child SSE / n (squared error).
    pub impurity: f64,
}

pub(crate) struct TreeBuilder<'a> {
    x: &'a [f64],
    y: &'a [f64],
    p: usize,
    params: TreeParams,
    impurity: Impurity,
    features_per_split: Option<usize>,
    rng: Option<Rng>,
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    /// `x` is row-major with `p` columns; `y` holds 0/1 targets for Gini.
    pub(crate) fn new(x: &'a [f64], y: &'a [f64], p: usize, params: TreeParams, impurity: Impurity) -> Self {
        TreeBuilder {
            x,
            y,
            p,
            params,
            impurity,
            features_per_split: None,
            rng: None,
            nodes: Vec::new(),
        }
    }

    /// Restrict each split to a random subset of `m` features.
    pub(crate) fn random_features(mut self, m: usize, seed: u64) -> Self {
        if m < self.p {
            self.features_per_split = Some(m);
            self.rng = Some(rng::seeded(seed));
        }
        self
    }

    pub(crate) fn build(mut self, rows: Vec<usize>) -> Tree {
        self.grow(rows, 0);
        Tree { nodes: self.nodes }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let count = rows.len();
        self.nodes.push(Node::Leaf { sum, count });

        let pure = match self.impurity {
            Impurity::Gini => sum == 0.0 || sum == count as f64,
            Impurity::SquaredError => rows.iter().all(|&r| self.y[r] == self.y[rows[0]]),
        };
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || count < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let features = self.candidate_features();
        let Some(best) = best_split(self.x, self.y, self.p, &rows, &features, self.params.min_leaf, self.impurity)
        else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x[r * self.p + best.feature] <= best.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match (self.features_per_split, self.rng.as_mut()) {
            (Some(m), Some(rng)) => {
                let mut f = sample(rng, self.p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.p).collect(),
        }
    }
}

/// Exhaustive search over `features` x midpoints. Ties keep the first
/// candidate in (feature, threshold) order.
pub(crate) fn best_split(
    x: &[f64],
    y: &[f64],
    p: usize,
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
    impurity: Impurity,
) -> Option<BestSplit> {
    let n = rows.len();
    let min_leaf = min_leaf.max(1);
    let total_sum: f64 = rows.iter().map(|&r| y[r]).sum();
    let total_sq: f64 = rows.iter().map(|&r| y[r] * y[r]).sum();
    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, f64)> = Vec::with_capacity(n);

    for &f in features {
        column.clear();
        column.extend(rows.iter().map(|&r| (x[r * p + f], y[r])));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let (mut left_sum, mut left_sq) = (0.0, 0.0);
        for i in 1..n {
            let (v_prev, y_prev) = column[i - 1];
            left_sum += y_prev;
            left_sq += y_prev * y_prev;
            let v = column[i].0;
            if v_prev == v || i < min_leaf || n - i < min_leaf {
                continue;
            }
            let (nl, nr) = (i as f64, (n - i) as f64);
            let score = match impurity {
                Impurity::Gini => (nl * gini(left_sum, nl) + nr * gini(total_sum - left_sum, nr)) / n as f64,
                Impurity::SquaredError => {
                    let right_sum = total_sum - left_sum;
                    let right_sq = total_sq - left_sq;
                    ((left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr)) / n as f64
                }
            };
            if best.is_none_or(|b| score < b.impurity) {
                let mut threshold = v_prev + (v - v_prev) / 2.0;
                if threshold >= v {
                    threshold = v_prev;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    impurity: score,
                });
            }
        }
    }
    best
}

/// Flatten a dataset into a row-major matrix and 0/1 defect targets.
pub(crate) fn design(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(data.len() * data.n_features());
    let mut y = Vec::with_capacity(data.len());
    for inst in data.instances() {
        x.extend_from_slice(&inst.features);
        y.push(if inst.label.is_defective() { 1.0 } else { 0.0 });
    }
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    params: TreeParams,
    tree: Tree,
}

impl TreeModel {
    pub fn fit(train: &Dataset, params: &TreeParams) -> Result<Self, FitError> {
        if train.is_empty() {
            return Err(FitError::EmptyDataset);
        }
        let (x, y) = design(train);
        let tree = TreeBuilder::new(&x, &y, train.n_features(), *params, Impurity::Gini)
            .build((0..train.len()).collect());
        Ok(TreeModel {
            params: *params,
            tree,
        })
    }

    pub(crate) fn from_tree(params: TreeParams, tree: Tree) -> Self {
        TreeModel { params, tree }
    }

    pub(crate) fn tree(&self) -> &Tree {
        &self.tree
    }

    /// `(feature, threshold)` of the root, or `None` for a single leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.tree.root() {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }
}

impl Scorer for TreeModel {
    fn score(&self, features: &[f64]) -> f64 {
        let (sum, count) = self.tree.leaf(features);
        leaf_probability(sum, count)
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}
