//! 1-D Gaussian mixtures over ROI values: EM fitting, BIC model-order
//! selection, and the quantized cluster map.
//!
//! Initialization is evenly spaced sample quantiles plus seeded jitter;
//! variances are floored at `1e-6 * var(samples) + 1e-12`; convergence is a
//! relative log-likelihood change below 1e-6 or 300 iterations. Components
//! are canonically ordered by ascending mean so results do not depend on
//! EM's internal component order.

use crate::error::{Error, Result};
use crate::hashing::mix64;
use crate::glcm::FeatureMap;
use crate::volume::{Dims, RoiIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

const EM_MAX_ITERS: usize = 300;
const EM_REL_TOL: f64 = 1e-6;
const LN_2PI: f64 = 1.8378770664093453;

/// A fitted 1-D Gaussian mixture.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
    pub seed: u64,
}

impl GmmModel {
    pub fn component_count(&self) -> usize {
        self.means.len()
    }
}

/// Hard cluster assignment of every ROI voxel plus per-cluster summaries.
#[derive(Debug, Clone)]
pub struct ClusterMap {
    pub dims: Dims,
    pub roi: Arc<RoiIndex>,
    /// Label per ROI voxel, aligned with `roi.linear`; labels are compact,
    /// `0..selected_u`, ordered by ascending cluster mean feature value.
    pub labels: Vec<u32>,
    /// Mean feature value of each cluster (the map's g).
    pub cluster_means: Vec<f64>,
    pub member_counts: Vec<usize>,
    pub selected_u: usize,
    /// (component count, BIC) for every candidate fit, ascending M.
    pub bic_table: Vec<(usize, f64)>,
    pub seed: u64,
}

/// Fits an M-component mixture to `samples` by EM.
pub fn fit_gmm(samples: &[f64], m: usize, seed: u64) -> Result<GmmModel> {
    if m < 1 {
        return Err(Error::InvalidParam("component count must be >= 1".into()));
    }
    if samples.len() < m {
        return Err(Error::TooFewSamples { needed: m, got: samples.len() });
    }
    let n = samples.len();
    let nf = n as f64;
    let mean: f64 = samples.iter().sum::<f64>() / nf;
    let var: f64 = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    let floor = 1e-6 * var + 1e-12;

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        let t = q * (n - 1) as f64;
        let lo = t.floor() as usize;
        let hi = t.ceil() as usize;
        let frac = t - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter_scale = 1e-3 * var.sqrt();
    let mut means: Vec<f64> = (0..m)
        .map(|u| {
            let z: f64 = StandardNormal.sample(&mut rng);
            quantile((u as f64 + 0.5) / m as f64) + jitter_scale * z
        })
        .collect();
    let mut variances = vec![var.max(floor); m];
    let mut weights = vec![1.0 / m as f64; m];

    // responsibilities, row-major n x m
    let mut resp = vec![0.0f64; n * m];
    let e_step = |weights: &[f64], means: &[f64], variances: &[f64], resp: &mut [f64]| -> f64 {
        let log_w: Vec<f64> = weights.iter().map(|&w| w.max(f64::MIN_POSITIVE).ln()).collect();
        let log_norm: Vec<f64> =
            variances.iter().map(|&v| -0.5 * (LN_2PI + v.ln())).collect();
        let mut ll = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let row = &mut resp[i * m..(i + 1) * m];
            let mut mx = f64::NEG_INFINITY;
            for u in 0..m {
                let d = x - means[u];
                let lp = log_w[u] + log_norm[u] - 0.5 * d * d / variances[u];
                row[u] = lp;
                mx = mx.max(lp);
            }
            let mut s = 0.0;
            for r in row.iter_mut() {
                *r = (*r - mx).exp();
                s += *r;
            }
            for r in row.iter_mut() {
                *r /= s;
            }
            ll += mx + s.ln();
        }
        ll
    };

    let mut ll = e_step(&weights, &means, &variances, &mut resp);
    for _ in 0..EM_MAX_ITERS - 1 {
        // M-step
        for u in 0..m {
            let mut nk = 0.0;
            let mut sx = 0.0;
            for i in 0..n {
                let r = resp[i * m + u];
                nk += r;
                sx += r * samples[i];
            }
            if nk < 1e-12 {
                // collapsed component: keep its parameters, give it a
                // vanishing but positive weight
                weights[u] = 1e-300;
                continue;
            }
            let mu = sx / nk;
            let mut sv = 0.0;
            for i in 0..n {
                let d = samples[i] - mu;
                sv += resp[i * m + u] * d * d;
            }
            weights[u] = nk / nf;
            means[u] = mu;
            variances[u] = (sv / nk).max(floor);
        }
        let wsum: f64 = weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 {
            for w in weights.iter_mut() {
                *w /= wsum;
            }
        }

        let new_ll = e_step(&weights, &means, &variances, &mut resp);
        debug_assert!(
            new_ll >= ll - 1e-8 * ll.abs().max(1.0),
            "EM log-likelihood decreased: {ll} -> {new_ll}"
        );
        let rel = (new_ll - ll).abs() / ll.abs().max(1e-3);
        ll = new_ll;
        if rel < EM_REL_TOL {
            break;
        }
    }

    // canonical order: ascending mean
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap().then(a.cmp(&b)));
    let model = GmmModel {
        weights: order.iter().map(|&u| weights[u]).collect(),
        means: order.iter().map(|&u| means[u]).collect(),
        variances: order.iter().map(|&u| variances[u]).collect(),
        log_likelihood: ll,
        seed,
    };
    debug_assert!((model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(model)
}

/// Responsibilities of each component for a single value; sums to 1.
pub fn posterior(model: &GmmModel, x: f64) -> Vec<f64> {
    let m = model.component_count();
    let mut lp = vec![0.0f64; m];
    let mut mx = f64::NEG_INFINITY;
    for u in 0..m {
        let v = model.variances[u];
        let d = x - model.means[u];
        lp[u] = model.weights[u].max(f64::MIN_POSITIVE).ln() - 0.5 * (LN_2PI + v.ln()) - 0.5 * d * d / v;
        mx = mx.max(lp[u]);
    }
    let mut s = 0.0;
    for p in lp.iter_mut() {
        *p = (*p - mx).exp();
        s += *p;
    }
    for p in lp.iter_mut() {
        *p /= s;
    }
    lp
}

/// Bayesian information criterion of a fitted model: `-2 lnL + p ln n` with
/// `p = 3M - 1` free parameters for a 1-D mixture. Lower is better.
pub fn bic(model: &GmmModel, n: usize) -> f64 {
    let p = (3 * model.component_count() - 1) as f64;
    -2.0 * model.log_likelihood + p * (n as f64).ln()
}

/// Clusters a feature map: fits mixtures for every `M in 1..=u_max`, keeps
/// the BIC minimizer, hard-assigns voxels by posterior (ties to the lowest
/// component), drops empty components, and relabels compactly.
pub fn cluster_feature_map(map: &FeatureMap, u_max: usize, seed: u64) -> Result<ClusterMap> {
    cluster_roi_values(&map.values, Arc::clone(&map.roi), map.dims, u_max, seed)
}

/// The same clustering applied to any per-ROI-voxel value vector (feature
/// values or raw intensities).
pub fn cluster_roi_values(
    values: &[f64],
    roi: Arc<RoiIndex>,
    dims: Dims,
    u_max: usize,
    seed: u64,
) -> Result<ClusterMap> {
    if u_max < 1 {
        return Err(Error::InvalidParam("u_max must be >= 1".into()));
    }
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    if values.len() != roi.len() {
        return Err(Error::InvalidParam(format!(
            "value vector length {} does not match ROI size {}",
            values.len(),
            roi.len()
        )));
    }

    let n = values.len();
    let u_eff = u_max.min(n);
    let mut best: Option<(f64, GmmModel)> = None;
    let mut bic_table = Vec::with_capacity(u_eff);
    for m in 1..=u_eff {
        let model = fit_gmm(values, m, mix64(seed, m as u64))?;
        let score = bic(&model, n);
        bic_table.push((m, score));
        let better = match &best {
            None => true,
            Some((b, _)) => score < *b,
        };
        if better {
            best = Some((score, model));
        }
    }
    let (_, model) = best.expect("at least one candidate fit");

    let m = model.component_count();
    let mut labels: Vec<u32> = Vec::with_capacity(n);
    for &x in values {
        let post = posterior(&model, x);
        let mut arg = 0usize;
        let mut mx = post[0];
        for (u, &p) in post.iter().enumerate().skip(1) {
            if p > mx {
                mx = p;
                arg = u;
            }
        }
        labels.push(arg as u32);
    }

    // drop empty components, relabel compactly (ascending-mean order is
    // preserved because the model is already canonically sorted)
    let mut counts = vec![0usize; m];
    for &l in &labels {
        counts[l as usize] += 1;
    }
    let mut remap = vec![u32::MAX; m];
    let mut next = 0u32;
    for u in 0..m {
        if counts[u] > 0 {
            remap[u] = next;
            next += 1;
        }
    }
    let selected_u = next as usize;
    for l in labels.iter_mut() {
        *l = remap[*l as usize];
    }

    let mut sums = vec![0.0f64; selected_u];
    let mut member_counts = vec![0usize; selected_u];
    for (i, &l) in labels.iter().enumerate() {
        sums[l as usize] += values[i];
        member_counts[l as usize] += 1;
    }
    let cluster_means: Vec<f64> =
        sums.iter().zip(&member_counts).map(|(s, &c)| s / c as f64).collect();

    Ok(ClusterMap { dims, roi, labels, cluster_means, member_counts, selected_u, bic_table, seed })
}
