//! Stratified cross-validation, held-out evaluation, and permutation
//! importance. Selection is re-run inside every fold so no information
//! leaks from validation rows.

use super::forest::{train_forest, ForestModel, ForestParams};
use super::select::select_features;
use super::stats::auc;
use super::{CohortTable, Split};
use crate::error::{Error, Result};
use crate::hashing::mix64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const PERMUTATION_REPEATS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct SubjectDecision {
    pub id: String,
    pub label: u8,
    pub score: f64,
    pub predicted: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// Held-out test AUC.
    pub auc: f64,
    /// Pooled out-of-fold AUC across the CV folds.
    pub cv_auc: f64,
    pub cv_accuracy_mean: f64,
    pub cv_accuracy_std: f64,
    pub test_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub selected_features: Vec<String>,
    /// Features selected inside each fold (instrumentation for the
    /// no-leakage property).
    pub fold_selected: Vec<Vec<String>>,
    pub permutation_importance: Vec<(String, f64)>,
    pub test_decisions: Vec<SubjectDecision>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub folds: usize,
    pub target_k: usize,
    pub forest: ForestParams,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { folds: 5, target_k: 20, forest: ForestParams::default(), seed: 0 }
    }
}

/// Deterministic stratified fold assignment: per-class shuffle, then deal
/// round-robin. Returns fold id per train-row position.
fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut assignment = vec![0usize; labels.len()];
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed, u64::from(class)));
        members.shuffle(&mut rng);
        for (pos, &row) in members.iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    assignment
}

fn accuracy(model: &ForestModel, x: &[Vec<f64>], y: &[u8]) -> f64 {
    let correct = x.iter().zip(y).filter(|(r, &l)| model.predict(r) == l).count();
    correct as f64 / y.len() as f64
}

fn take_columns(rows: &[&Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect()
}

/// Runs the full harness: k-fold CV on the train split (selection re-run per
/// fold), a final model fit on all train rows, one application to the test
/// split, and permutation importances on the held-out rows.
pub fn cross_validate(table: &CohortTable, cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.folds < 2 {
        return Err(Error::InvalidParam("folds must be >= 2".into()));
    }
    let train_rows: Vec<usize> = table.rows_with_split(Split::Train);
    let test_rows: Vec<usize> = table.rows_with_split(Split::Test);
    if test_rows.is_empty() {
        return Err(Error::Table("no test rows in cohort".into()));
    }
    let train_labels: Vec<u8> = train_rows.iter().map(|&i| table.rows[i].label).collect();
    for class in [0u8, 1u8] {
        let count = train_labels.iter().filter(|&&l| l == class).count();
        if count < cfg.folds {
            return Err(Error::Table(format!(
                "class {class} has {count} train subjects, need >= {} per class",
                cfg.folds
            )));
        }
    }

    let fold_of = stratified_folds(&train_labels, cfg.folds, cfg.seed);
    let mut fold_accuracies = Vec::with_capacity(cfg.folds);
    let mut fold_selected = Vec::with_capacity(cfg.folds);
    let mut oof_scores = Vec::new();
    let mut oof_labels = Vec::new();
    let mut warnings = Vec::new();

    for fold in 0..cfg.folds {
        let tr: Vec<usize> = train_rows
            .iter()
            .enumerate()
            .filter(|(pos, _)| fold_of[*pos] != fold)
            .map(|(_, &row)| row)
            .collect();
        let va: Vec<usize> = train_rows
            .iter()
            .enumerate()
            .filter(|(pos, _)| fold_of[*pos] == fold)
            .map(|(_, &row)| row)
            .collect();
        let tr_x: Vec<&Vec<f64>> = tr.iter().map(|&i| &table.rows[i].features).collect();
        let tr_y: Vec<u8> = tr.iter().map(|&i| table.rows[i].label).collect();
        let full_tr: Vec<Vec<f64>> = tr_x.iter().map(|r| (*r).clone()).collect();

        let sel = select_features(
            &full_tr,
            &tr_y,
            cfg.target_k,
            &cfg.forest,
            mix64(cfg.seed, 100 + fold as u64),
        )?;
        warnings.extend(sel.warnings.iter().cloned());
        fold_selected.push(sel.kept.iter().map(|&j| table.feature_names[j].clone()).collect());

        let params = ForestParams { seed: mix64(cfg.seed, 200 + fold as u64), ..cfg.forest };
        let model = train_forest(&take_columns(&tr_x, &sel.kept), &tr_y, &params)?;

        let va_x: Vec<&Vec<f64>> = va.iter().map(|&i| &table.rows[i].features).collect();
        let va_y: Vec<u8> = va.iter().map(|&i| table.rows[i].label).collect();
        let va_sub = take_columns(&va_x, &sel.kept);
        fold_accuracies.push(accuracy(&model, &va_sub, &va_y));
        for (row, &label) in va_sub.iter().zip(&va_y) {
            oof_scores.push(model.predict_proba(row));
            oof_labels.push(label);
        }
    }

    let cv_accuracy_mean = fold_accuracies.iter().sum::<f64>() / cfg.folds as f64;
    let cv_accuracy_std = {
        let v = fold_accuracies
            .iter()
            .map(|a| (a - cv_accuracy_mean).powi(2))
            .sum::<f64>()
            / cfg.folds as f64;
        v.sqrt()
    };
    let cv_auc = auc(&oof_scores, &oof_labels)?;

    // final model: selection and fit on all train rows, applied once to test
    let tr_x: Vec<&Vec<f64>> = train_rows.iter().map(|&i| &table.rows[i].features).collect();
    let full_tr: Vec<Vec<f64>> = tr_x.iter().map(|r| (*r).clone()).collect();
    let sel = select_features(&full_tr, &train_labels, cfg.target_k, &cfg.forest, mix64(cfg.seed, 999))?;
    warnings.extend(sel.warnings.iter().cloned());
    let params = ForestParams { seed: mix64(cfg.seed, 1000), ..cfg.forest };
    let model = train_forest(&take_columns(&tr_x, &sel.kept), &train_labels, &params)?;

    let te_x: Vec<&Vec<f64>> = test_rows.iter().map(|&i| &table.rows[i].features).collect();
    let te_y: Vec<u8> = test_rows.iter().map(|&i| table.rows[i].label).collect();
    let te_sub = take_columns(&te_x, &sel.kept);
    let test_accuracy = accuracy(&model, &te_sub, &te_y);
    let test_scores: Vec<f64> = te_sub.iter().map(|r| model.predict_proba(r)).collect();
    let test_auc = auc(&test_scores, &te_y)?;

    let test_decisions: Vec<SubjectDecision> = test_rows
        .iter()
        .zip(&te_sub)
        .map(|(&i, row)| {
            let score = model.predict_proba(row);
            SubjectDecision {
                id: table.rows[i].id.clone(),
                label: table.rows[i].label,
                score,
                predicted: u8::from(score >= 0.5),
            }
        })
        .collect();

    let selected_features: Vec<String> =
        sel.kept.iter().map(|&j| table.feature_names[j].clone()).collect();
    let imp = permutation_importance(&model, &te_sub, &te_y, mix64(cfg.seed, 3000))?;
    let permutation_importance =
        selected_features.iter().cloned().zip(imp).collect::<Vec<_>>();

    Ok(EvalReport {
        auc: test_auc,
        cv_auc,
        cv_accuracy_mean,
        cv_accuracy_std,
        test_accuracy,
        fold_accuracies,
        selected_features,
        fold_selected,
        permutation_importance,
        test_decisions,
        warnings,
    })
}

/// Mean accuracy drop over `PERMUTATION_REPEATS` seeded column shuffles on
/// held-out data, per feature of the fitted model.
pub fn permutation_importance(
    model: &ForestModel,
    x: &[Vec<f64>],
    y: &[u8],
    seed: u64,
) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Table("empty evaluation set".into()));
    }
    let d = model.n_features;
    let base = accuracy(model, x, y);
    let mut result = Vec::with_capacity(d);
    for feature in 0..d {
        let mut drop_sum = 0.0;
        for rep in 0..PERMUTATION_REPEATS {
            let mut perm: Vec<usize> = (0..x.len()).collect();
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix64(seed, (feature * PERMUTATION_REPEATS + rep) as u64));
            perm.shuffle(&mut rng);
            let mut shuffled: Vec<Vec<f64>> = x.to_vec();
            for (i, &src) in perm.iter().enumerate() {
                shuffled[i][feature] = x[src][feature];
            }
            drop_sum += base - accuracy(model, &shuffled, y);
        }
        result.push(drop_sum / PERMUTATION_REPEATS as f64);
    }
    Ok(result)
}
