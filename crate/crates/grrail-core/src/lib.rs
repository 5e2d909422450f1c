//! Graph-radiomic lesion descriptors.
//!
//! The pipeline turns a 3D volume plus lesion mask into per-subject feature
//! vectors: voxel-wise GLCM texture maps, per-map Gaussian-mixture
//! clustering with BIC model selection, EMD-weighted cluster-centroid
//! graphs, and 15 global graph metrics per map, concatenated into a 195-dim
//! descriptor. Two ablation descriptors (65-dim aggregate radiomics and a
//! 15-dim intensity-cluster graph) and a feature-selection / random-forest
//! evaluation harness round out the library. Synthetic ellipsoid phantoms
//! provide ground truth for validation.

pub mod clustering;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod glcm;
pub mod graph;
pub mod hashing;
pub mod metrics;
pub mod ml;
pub mod phantom;
pub mod volume;

pub use config::{DescriptorKind, RunConfig};
pub use descriptor::{
    grrail, grrail_feature_names, intensity_feature_names, intensity_graph,
    radiomics_aggregate, radiomics_feature_names, DescriptorConfig, GrRAiLDescriptor,
    IntensityGraphDescriptor, Provenance, RadiomicsDescriptor,
};
pub use error::{Error, Result};
pub use glcm::{extract_feature_maps, haralick13, quantize_roi, window_cooc, CoocMatrix, FeatureId, FeatureMap, QuantizedRoi};
pub use graph::{build_graph, centroids, cluster_histogram, emd_1d, ClusterGraph, EdgePolicy, GraphEdge, GraphNode, WeightPolicy};
pub use metrics::{graph_features, GraphFeatureVector, GRAPH_METRIC_NAMES, SINGLE_NODE_ROW};
pub use clustering::{bic, cluster_feature_map, cluster_roi_values, fit_gmm, posterior, ClusterMap, GmmModel};
pub use ml::{
    auc, cross_validate, mann_whitney_u, permutation_importance, select_features, train_forest,
    two_proportion_z, CohortRow, CohortTable, EvalConfig, EvalReport, ForestModel, ForestParams,
    Split, ZTestResult,
};
pub use phantom::{cohort_spec, generate_phantom, PhantomClass, PhantomSpec, RegionTexture};
pub use volume::{
    load_mask, load_volume, resample_isotropic, validate_pair, write_raw_mask, write_raw_volume,
    Dims, ResampleMode, RoiIndex, RoiMask, VoxelGrid,
};
