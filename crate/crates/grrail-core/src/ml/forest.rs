//! Random forest of CART trees with Gini splits, bootstrap sampling, and
//! impurity-based feature importance. Deterministic given the seed.

use crate::error::{Error, Result};
use crate::hashing::mix64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturesPerSplit {
    /// floor(sqrt(d)), at least 1.
    Sqrt,
    All,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            max_depth: None,
            min_leaf: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { prob1: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { prob1 } => return *prob1,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub n_features: usize,
    pub params: ForestParams,
    /// Impurity-based importance per feature, normalized to sum 1 when any
    /// split happened.
    pub importances: Vec<f64>,
}

impl ForestModel {
    /// Mean leaf probability of class 1 across trees.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        s / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.predict_proba(x) >= 0.5)
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: &'a ForestParams,
    k_features: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    n_root: f64,
}

impl<'a> TreeBuilder<'a> {
    fn gini(pos: f64, n: f64) -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        let p = pos / n;
        2.0 * p * (1.0 - p)
    }

    fn build(&mut self, indices: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = indices.len();
        let pos = indices.iter().filter(|&&i| self.y[i] == 1).count() as f64;
        let made_leaf = |b: &mut Self| {
            let id = b.nodes.len();
            b.nodes.push(Node::Leaf { prob1: pos / n as f64 });
            id
        };
        let pure = pos == 0.0 || pos == n as f64;
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < 2 * self.params.min_leaf {
            return made_leaf(self);
        }

        // sample candidate features without replacement
        let d = self.x[0].len();
        let candidates: Vec<usize> = rand::seq::index::sample(rng, d, self.k_features.min(d)).into_vec();

        let parent_gini = Self::gini(pos, n as f64);
        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        for &f in &candidates {
            // sort by value, stable on original index for determinism
            let mut order: Vec<usize> = indices.to_vec();
            order.sort_by(|&a, &b| {
                self.x[a][f].partial_cmp(&self.x[b][f]).unwrap().then(a.cmp(&b))
            });
            let mut left_n = 0.0;
            let mut left_pos = 0.0;
            for w in 0..n - 1 {
                let i = order[w];
                left_n += 1.0;
                if self.y[i] == 1 {
                    left_pos += 1.0;
                }
                let va = self.x[order[w]][f];
                let vb = self.x[order[w + 1]][f];
                if va == vb {
                    continue;
                }
                let right_n = n as f64 - left_n;
                if (left_n as usize) < self.params.min_leaf || (right_n as usize) < self.params.min_leaf {
                    continue;
                }
                let score = (left_n * Self::gini(left_pos, left_n)
                    + right_n * Self::gini(pos - left_pos, right_n))
                    / n as f64;
                let better = match best {
                    None => true,
                    Some((b, _, _)) => score < b,
                };
                if better {
                    // midpoint, nudged down if rounding would put vb on the
                    // left and empty the right child
                    let mut threshold = 0.5 * (va + vb);
                    if threshold >= vb {
                        threshold = va;
                    }
                    best = Some((score, f, threshold));
                }
            }
        }

        let Some((child_gini, feature, threshold)) = best else {
            return made_leaf(self);
        };

        self.importance[feature] += (n as f64 / self.n_root) * (parent_gini - child_gini);

        // partition in place, preserving relative order
        let mut left: Vec<usize> = Vec::with_capacity(n);
        let mut right: Vec<usize> = Vec::with_capacity(n);
        for &i in indices.iter() {
            if self.x[i][feature] <= threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { prob1: 0.0 }); // placeholder
        let left_id = self.build(&left, depth + 1, rng);
        let right_id = self.build(&right, depth + 1, rng);
        self.nodes[id] = Node::Split { feature, threshold, left: left_id, right: right_id };
        id
    }
}

/// Trains a forest on row-major features and binary labels.
pub fn train_forest(x: &[Vec<f64>], y: &[u8], params: &ForestParams) -> Result<ForestModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Table("features and labels must be non-empty and aligned".into()));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::Table("all rows must share a non-zero feature count".into()));
    }
    let classes: std::collections::BTreeSet<u8> = y.iter().copied().collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let k_features = match params.features_per_split {
        FeaturesPerSplit::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
        FeaturesPerSplit::All => d,
    };

    let results: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(params.seed, t as u64));
            let n = x.len();
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                x,
                y,
                params,
                k_features,
                nodes: Vec::new(),
                importance: vec![0.0; d],
                n_root: indices.len() as f64,
            };
            builder.build(&indices, 0, &mut rng);
            (Tree { nodes: builder.nodes }, builder.importance)
        })
        .collect();

    let mut importances = vec![0.0; d];
    let mut trees = Vec::with_capacity(params.n_trees);
    for (tree, imp) in results {
        for (a, b) in importances.iter_mut().zip(&imp) {
            *a += b;
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in importances.iter_mut() {
            *v /= total;
        }
    }
    Ok(ForestModel { trees, n_features: d, params: *params, importances })
}
