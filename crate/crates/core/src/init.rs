//! User embedding initialization from item features.
//!
//! For each modality the user row is built from two degree-weighted sums over the user's
//! interacted items: one over the raw item features (local preference) and one over the
//! items' nearest K-Means centroids (global preference). The two are mixed as
//! `(1 - lambda) * item_level + lambda * cluster_level`.
//!
//! Weights are applied exactly as configured and are not renormalized. Sums are
//! accumulated in `f64`, in ascending item order, and each user row is independent, so
//! the rayon-parallel path is bitwise identical to a sequential evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{self, ClusterModel, KMeansParams};
use crate::corpus::{write_tensor, InteractionGraph, ModalityFeatures};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_LAMBDA: f64 = 0.01;
/// Suggested mixing weight when the downstream model also propagates over an item–item graph.
pub const ITEM_GRAPH_LAMBDA: f64 = 0.1;

/// Per-edge weight used when summing a user's item rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingStrategy {
    /// `1 / |N(i)|`
    #[default]
    ItemDegree,
    /// `1 / sqrt(|N(i)| |N(u)|)`
    BiDegree,
    /// `1 / |N(u)|`
    Equal,
}

impl WeightingStrategy {
    pub const ALL: [WeightingStrategy; 3] = [Self::ItemDegree, Self::BiDegree, Self::Equal];

    pub fn weight(self, user_degree: usize, item_degree: usize) -> f64 {
        match self {
            Self::ItemDegree => 1.0 / item_degree as f64,
            Self::BiDegree => 1.0 / ((item_degree as f64) * (user_degree as f64)).sqrt(),
            Self::Equal => 1.0 / user_degree as f64,
        }
    }
}

impl fmt::Display for WeightingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ItemDegree => "item-degree",
            Self::BiDegree => "bi-degree",
            Self::Equal => "equal",
        })
    }
}

impl FromStr for WeightingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "item-degree" | "itemdegree" => Ok(Self::ItemDegree),
            "bi-degree" | "bidegree" => Ok(Self::BiDegree),
            "equal" => Ok(Self::Equal),
            _ => Err(Error::param(format!("unknown weighting strategy {s:?}"))),
        }
    }
}

/// Row given to users without any interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroDegreeFallback {
    Zeros,
    /// `sum_i (1/|N(i)|) e_i / |I'|` over the items `I'` with at least one interaction.
    #[default]
    GlobalMean,
}

impl FromStr for ZeroDegreeFallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "zeros" | "zero" => Ok(Self::Zeros),
            "global-mean" | "globalmean" | "mean" => Ok(Self::GlobalMean),
            _ => Err(Error::param(format!("unknown zero-degree fallback {s:?}"))),
        }
    }
}

impl fmt::Display for ZeroDegreeFallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zeros => "zeros",
            Self::GlobalMean => "global-mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Cluster count for modalities without an entry in `k_per_modality`.
    pub default_k: usize,
    pub k_per_modality: BTreeMap<String, usize>,
    pub lambda: f64,
    pub weighting: WeightingStrategy,
    pub seeds: Vec<u64>,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
    pub fallback: ZeroDegreeFallback,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            default_k: DEFAULT_K,
            k_per_modality: BTreeMap::new(),
            lambda: DEFAULT_LAMBDA,
            weighting: WeightingStrategy::ItemDegree,
            seeds: vec![0],
            kmeans_max_iters: cluster::DEFAULT_MAX_ITERS,
            kmeans_tol: cluster::DEFAULT_TOL,
            fallback: ZeroDegreeFallback::GlobalMean,
        }
    }
}

impl InitConfig {
    pub fn k_for(&self, modality: &str) -> usize {
        self.k_per_modality.get(modality).copied().unwrap_or(self.default_k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param(format!("lambda = {} is outside [0, 1]", self.lambda)));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("at least one seed is required"));
        }
        if self.default_k == 0 || self.k_per_modality.values().any(|&k| k == 0) {
            return Err(Error::param("every K must be at least 1"));
        }
        if self.kmeans_max_iters == 0 {
            return Err(Error::param("kmeans_max_iters must be at least 1"));
        }
        if !(self.kmeans_tol >= 0.0) {
            return Err(Error::param("kmeans_tol must be non-negative"));
        }
        Ok(())
    }
}

fn fallback_row(graph: &InteractionGraph, items: &Matrix, fallback: ZeroDegreeFallback) -> Vec<f32> {
    let dim = items.cols();
    match fallback {
        ZeroDegreeFallback::Zeros => vec![0.0; dim],
        ZeroDegreeFallback::GlobalMean => {
            let mut acc = vec![0.0f64; dim];
            let mut active = 0usize;
            for (i, row) in items.iter_rows().enumerate() {
                let deg = graph.item_degree(i);
                if deg == 0 {
                    continue;
                }
                active += 1;
                let w = 1.0 / deg as f64;
                for (a, &x) in acc.iter_mut().zip(row) {
                    *a += w * x as f64;
                }
            }
            let n = active.max(1) as f64;
            acc.iter().map(|&a| (a / n) as f32).collect()
        }
    }
}

/// Degree-weighted sum of each user's interacted item rows.
pub fn aggregate(
    graph: &InteractionGraph,
    items: &Matrix,
    weighting: WeightingStrategy,
    fallback: ZeroDegreeFallback,
) -> Result<Matrix> {
    if items.rows() != graph.num_items() {
        return Err(Error::DimensionMismatch {
            context: "item matrix rows vs graph items",
            expected: graph.num_items(),
            found: items.rows(),
        });
    }
    let dim = items.cols();
    let needs_fallback = (0..graph.num_users()).any(|u| graph.user_degree(u) == 0);
    let fallback = needs_fallback.then(|| fallback_row(graph, items, fallback));

    let mut out = Matrix::zeros(graph.num_users(), dim);
    if dim == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(u, row)| {
            let neighbors = graph.user_items(u);
            if neighbors.is_empty() {
                row.copy_from_slice(fallback.as_deref().expect("computed when any user is isolated"));
                return;
            }
            let mut acc = vec![0.0f64; dim];
            for &i in neighbors {
                let w = weighting.weight(neighbors.len(), graph.item_degree(i));
                for (a, &x) in acc.iter_mut().zip(items.row(i)) {
                    *a += w * x as f64;
                }
            }
            for (o, a) in row.iter_mut().zip(acc) {
                *o = a as f32;
            }
        });
    Ok(out)
}

/// `(1 - lambda) * item_level + lambda * cluster_level`, elementwise.
pub fn fuse(item_level: &Matrix, cluster_level: &Matrix, lambda: f64) -> Result<Matrix> {
    if item_level.shape() != cluster_level.shape() {
        return Err(Error::DimensionMismatch {
            context: "fusion branches",
            expected: item_level.as_slice().len(),
            found: cluster_level.as_slice().len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param(format!("lambda = {lambda} is outside [0, 1]")));
    }
    // the endpoints return a branch untouched so signed zeros survive
    if lambda == 0.0 {
        return Ok(item_level.clone());
    }
    if lambda == 1.0 {
        return Ok(cluster_level.clone());
    }
    let keep = 1.0 - lambda;
    let data = item_level
        .as_slice()
        .iter()
        .zip(cluster_level.as_slice())
        .map(|(&a, &b)| (keep * a as f64 + lambda * b as f64) as f32)
        .collect();
    Matrix::from_vec(item_level.rows(), item_level.cols(), data)
}

/// Intermediate products for one modality.
#[derive(Debug, Clone)]
pub struct ModalityInit {
    pub item_level: Matrix,
    /// `None` when `lambda == 0` and the cluster branch was skipped.
    pub cluster_level: Option<Matrix>,
    pub clusters: Option<ClusterModel>,
    pub fused: Matrix,
}

pub fn init_modality(
    graph: &InteractionGraph,
    features: &ModalityFeatures,
    config: &InitConfig,
    seed: u64,
) -> Result<ModalityInit> {
    features.check_items(graph)?;
    let item_level = aggregate(graph, features.matrix(), config.weighting, config.fallback)?;
    if config.lambda == 0.0 {
        return Ok(ModalityInit {
            fused: item_level.clone(),
            item_level,
            cluster_level: None,
            clusters: None,
        });
    }
    let params = KMeansParams {
        k: config.k_for(features.modality()),
        seed,
        max_iters: config.kmeans_max_iters,
        tol: config.kmeans_tol,
        parallel: true,
    };
    let model = cluster::kmeans(features, &params)?;
    let aligned = cluster::align_to_clusters(features, &model)?;
    let cluster_level = aggregate(graph, aligned.matrix(), config.weighting, config.fallback)?;
    let fused = fuse(&item_level, &cluster_level, config.lambda)?;
    Ok(ModalityInit {
        item_level,
        cluster_level: Some(cluster_level),
        clusters: Some(model),
        fused,
    })
}

/// Initialized user tables, one per modality, with the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct UserInit {
    pub seed: u64,
    pub config: InitConfig,
    pub matrices: BTreeMap<String, Matrix>,
}

impl UserInit {
    pub fn get(&self, modality: &str) -> Option<&Matrix> {
        self.matrices.get(modality)
    }

    pub fn file_name(modality: &str) -> String {
        format!("user_init.{modality}.sgur")
    }

    /// Writes `user_init.<modality>.sgur` for every modality into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (modality, matrix) in &self.matrices {
            let path = dir.join(Self::file_name(modality));
            write_tensor(matrix, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn init_users(
    graph: &InteractionGraph,
    features: &[ModalityFeatures],
    config: &InitConfig,
    seed: u64,
) -> Result<UserInit> {
    config.validate()?;
    let mut matrices = BTreeMap::new();
    for f in features {
        let m = init_modality(graph, f, config, seed)?;
        if matrices.insert(f.modality().to_owned(), m.fused).is_some() {
            return Err(Error::param(format!("modality {:?} given twice", f.modality())));
        }
    }
    Ok(UserInit {
        seed,
        config: config.clone(),
        matrices,
    })
}

/// One initialization per configured seed. Results are kept separate; averaging happens on
/// downstream metrics, never on the embeddings.
pub fn init_users_multiseed(
    graph: &InteractionGraph,
    features: &[ModalityFeatures],
    config: &InitConfig,
) -> Result<Vec<UserInit>> {
    config.validate()?;
    config
        .seeds
        .iter()
        .map(|&seed| init_users(graph, features, config, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (InteractionGraph, Matrix) {
        let g = InteractionGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        let items = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        (g, items)
    }

    #[test]
    fn item_degree_hand_example() {
        let (g, items) = toy();
        let out = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::Zeros).unwrap();
        assert_eq!(out.row(0), &[2.0, 2.0]);
        assert_eq!(out.row(1), &[0.0, 2.0]);
    }

    #[test]
    fn equal_hand_example() {
        let (g, items) = toy();
        let out = aggregate(&g, &items, WeightingStrategy::Equal, ZeroDegreeFallback::Zeros).unwrap();
        assert_eq!(out.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn unit_degree_identity() {
        let g = InteractionGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        let items = Matrix::from_rows(&[vec![0.3, -1.7, 2.5]]).unwrap();
        for w in WeightingStrategy::ALL {
            let out = aggregate(&g, &items, w, ZeroDegreeFallback::Zeros).unwrap();
            assert!(out.bitwise_eq(&items));
        }
    }

    #[test]
    fn fallback_rows() {
        // user 2 has no interactions; item 2 has none either
        let g = InteractionGraph::from_edges(3, 3, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        let items = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0], vec![100.0, 100.0]]).unwrap();
        let zeros = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::Zeros).unwrap();
        assert_eq!(zeros.row(2), &[0.0, 0.0]);
        let mean = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::GlobalMean).unwrap();
        // (1/1 * [2,0] + 1/2 * [0,4]) / 2
        assert_eq!(mean.row(2), &[1.0, 1.0]);
    }

    #[test]
    fn aggregate_rejects_wrong_item_count() {
        let (g, _) = toy();
        let items = Matrix::zeros(3, 2);
        assert!(aggregate(&g, &items, WeightingStrategy::Equal, ZeroDegreeFallback::Zeros).is_err());
    }

    #[test]
    fn fuse_examples() {
        let a = Matrix::from_rows(&[vec![2.0, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 4.0]]).unwrap();
        assert_eq!(fuse(&a, &b, 0.5).unwrap().row(0), &[1.0, 3.0]);
        assert!(fuse(&a, &b, 0.0).unwrap().bitwise_eq(&a));
        assert!(fuse(&a, &b, 1.0).unwrap().bitwise_eq(&b));
        assert!(fuse(&a, &b, 1.5).unwrap_err().is_usage());
        assert!(fuse(&a, &b, -0.1).is_err());
        assert!(fuse(&a, &Matrix::zeros(1, 3), 0.5).is_err());
    }

    #[test]
    fn fuse_keeps_negative_zero_at_endpoints() {
        let a = Matrix::from_rows(&[vec![-0.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0]]).unwrap();
        assert!(fuse(&a, &b, 0.0).unwrap().bitwise_eq(&a));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("bi-degree".parse::<WeightingStrategy>().unwrap(), WeightingStrategy::BiDegree);
        assert_eq!("ItemDegree".parse::<WeightingStrategy>().unwrap(), WeightingStrategy::ItemDegree);
        assert!("popularity".parse::<WeightingStrategy>().is_err());
        for w in WeightingStrategy::ALL {
            assert_eq!(w.to_string().parse::<WeightingStrategy>().unwrap(), w);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = InitConfig::default();
        assert_eq!((c.default_k, c.lambda, c.weighting), (4, 0.01, WeightingStrategy::ItemDegree));
        c.validate().unwrap();
        c.lambda = 1.2;
        assert!(c.validate().is_err());
        c.lambda = 0.1;
        c.seeds.clear();
        assert!(c.validate().is_err());
        c.seeds.push(1);
        c.k_per_modality.insert("text".into(), 0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn per_modality_k() {
        let mut c = InitConfig::default();
        c.k_per_modality.insert("text".into(), 8);
        assert_eq!(c.k_for("text"), 8);
        assert_eq!(c.k_for("visual"), DEFAULT_K);
    }
}
