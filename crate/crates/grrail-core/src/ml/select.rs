//! Two-stage feature selection: a correlation pre-filter followed by
//! recursive feature elimination under the forest's impurity importance.

use super::forest::{train_forest, ForestParams};
use crate::error::{Error, Result};
use crate::hashing::mix64;

#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Surviving feature column indices, ascending.
    pub kept: Vec<usize>,
    /// Constant columns dropped up front.
    pub dropped_constant: Vec<usize>,
    pub warnings: Vec<String>,
}

const CORR_THRESHOLD: f64 = 0.95;
const RFE_DROP_FRACTION: f64 = 0.10;

/// Stage 0 drops constant columns (with a warning), stage 1 drops one of
/// each |r| > 0.95 pair (keeping the lower column index), stage 2 repeatedly
/// refits the forest and drops the 10% least-important features until at
/// most `target_k` remain.
pub fn select_features(
    x: &[Vec<f64>],
    y: &[u8],
    target_k: usize,
    forest: &ForestParams,
    seed: u64,
) -> Result<SelectionResult> {
    if x.len() < 10 {
        return Err(Error::Table(format!("selection needs >= 10 training rows, got {}", x.len())));
    }
    if target_k < 1 {
        return Err(Error::InvalidParam("target_k must be >= 1".into()));
    }
    let d = x[0].len();
    let n = x.len() as f64;

    let mut warnings = Vec::new();
    let mut dropped_constant = Vec::new();
    let mut kept: Vec<usize> = Vec::with_capacity(d);
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    for j in 0..d {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        means[j] = mean;
        stds[j] = var.sqrt();
        if var == 0.0 {
            dropped_constant.push(j);
            warnings.push(format!("dropping constant feature column {j}"));
        } else {
            kept.push(j);
        }
    }
    if kept.is_empty() {
        return Err(Error::Table("all feature columns are constant".into()));
    }

    // stage 1: correlation pre-filter, keep the lower index of each pair
    let corr = |a: usize, b: usize| -> f64 {
        let mut s = 0.0;
        for r in x {
            s += (r[a] - means[a]) * (r[b] - means[b]);
        }
        s / (n * stds[a] * stds[b])
    };
    let mut alive = vec![true; kept.len()];
    for i in 0..kept.len() {
        if !alive[i] {
            continue;
        }
        for j in (i + 1)..kept.len() {
            if alive[j] && corr(kept[i], kept[j]).abs() > CORR_THRESHOLD {
                alive[j] = false;
            }
        }
    }
    let mut kept: Vec<usize> =
        kept.iter().zip(&alive).filter(|(_, &a)| a).map(|(&k, _)| k).collect();

    // stage 2: recursive elimination
    let mut round = 0u64;
    while kept.len() > target_k {
        let sub_x: Vec<Vec<f64>> = x.iter().map(|r| kept.iter().map(|&j| r[j]).collect()).collect();
        let params = ForestParams { seed: mix64(seed, round), ..*forest };
        let model = train_forest(&sub_x, y, &params)?;
        let n_drop = ((kept.len() as f64 * RFE_DROP_FRACTION).floor() as usize)
            .max(1)
            .min(kept.len() - target_k);
        // drop the n_drop least important; ties resolved by dropping the
        // higher column index first
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by(|&a, &b| {
            model.importances[a]
                .partial_cmp(&model.importances[b])
                .unwrap()
                .then(b.cmp(&a))
        });
        let drop_set: std::collections::BTreeSet<usize> =
            order[..n_drop].iter().copied().collect();
        kept = kept
            .iter()
            .enumerate()
            .filter(|(pos, _)| !drop_set.contains(pos))
            .map(|(_, &j)| j)
            .collect();
        round += 1;
    }

    Ok(SelectionResult { kept, dropped_constant, warnings })
}
