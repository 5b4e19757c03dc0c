//! Synthetic corpora with known structure for experiments and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{InteractionGraph, ModalityFeatures};
use crate::matrix::Matrix;

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `rows` points drawn uniformly from the unit sphere in `dim` dimensions.
pub fn unit_sphere(rows: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows * dim);
    for _ in 0..rows {
        data.extend(normalized(gaussian_vec(&mut rng, dim)).into_iter().map(|x| x as f32));
    }
    Matrix::from_vec(rows, dim, data).unwrap()
}

/// i.i.d. `N(0, 1/dim)` entries, the usual random embedding initialization.
pub fn gaussian_init(rows: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dim as f64).sqrt();
    let data = (0..rows * dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (z * scale) as f32
        })
        .collect();
    Matrix::from_vec(rows, dim, data).unwrap()
}

/// Uniform random bipartite graph where every user has between `min_degree` and
/// `max_degree` distinct items.
pub fn random_graph(num_users: usize, num_items: usize, min_degree: usize, max_degree: usize, seed: u64) -> InteractionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..num_users {
        let deg = rng.random_range(min_degree..=max_degree).min(num_items);
        for i in rand::seq::index::sample(&mut rng, num_items, deg) {
            edges.push((u, i));
        }
    }
    InteractionGraph::from_edges(num_users, num_items, &edges).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub num_users: usize,
    pub num_items: usize,
    pub dim: usize,
    pub groups: usize,
    /// Expected norm of the Gaussian noise added to the unit group direction before normalizing.
    pub spread: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Inverse temperature of the taste–item affinity used to pick interactions.
    pub sharpness: f64,
    pub seed: u64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            num_users: 200,
            num_items: 300,
            dim: 32,
            groups: 2,
            spread: 1.0,
            min_degree: 8,
            max_degree: 20,
            sharpness: 20.0,
            seed: 0,
        }
    }
}

/// Corpus with planted preference groups. Each item and each user belongs to one group;
/// items are unit-norm features scattered around their group's direction, and each user
/// has a taste vector scattered the same way. Users pick items without replacement with
/// probability proportional to `exp(sharpness * <taste, item>)`, so interactions follow
/// both the coarse group and the finer within-group geometry.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub graph: InteractionGraph,
    pub features: ModalityFeatures,
    pub user_group: Vec<usize>,
    pub item_group: Vec<usize>,
    pub user_taste: Matrix,
}

pub fn planted_corpus(params: &PlantedParams) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let dim = params.dim;
    let directions: Vec<Vec<f64>> = (0..params.groups)
        .map(|_| normalized(gaussian_vec(&mut rng, dim)))
        .collect();
    let noise = params.spread / (dim as f64).sqrt();
    let scatter = |group: usize, rng: &mut ChaCha8Rng| {
        let z = gaussian_vec(rng, dim);
        normalized(
            directions[group]
                .iter()
                .zip(z)
                .map(|(d, z)| d + noise * z)
                .collect(),
        )
    };

    let item_group: Vec<usize> = (0..params.num_items).map(|i| i % params.groups).collect();
    let items: Vec<Vec<f64>> = item_group.iter().map(|&g| scatter(g, &mut rng)).collect();
    let user_group: Vec<usize> = (0..params.num_users).map(|u| u % params.groups).collect();
    let tastes: Vec<Vec<f64>> = user_group.iter().map(|&g| scatter(g, &mut rng)).collect();

    let mut edges = Vec::new();
    for (u, taste) in tastes.iter().enumerate() {
        let deg = rng.random_range(params.min_degree..=params.max_degree).min(params.num_items);
        let mut weights: Vec<f64> = items
            .iter()
            .map(|e| (params.sharpness * e.iter().zip(taste).map(|(a, b)| a * b).sum::<f64>()).exp())
            .collect();
        for _ in 0..deg {
            let total: f64 = weights.iter().sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = weights.iter().rposition(|&w| w > 0.0).unwrap();
            for (i, &w) in weights.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            weights[pick] = 0.0;
            edges.push((u, pick));
        }
    }

    let to_matrix = |rows: &[Vec<f64>]| {
        let data = rows.iter().flatten().map(|&x| x as f32).collect();
        Matrix::from_vec(rows.len(), dim, data).unwrap()
    };
    PlantedCorpus {
        graph: InteractionGraph::from_edges(params.num_users, params.num_items, &edges).unwrap(),
        features: ModalityFeatures::new("planted", to_matrix(&items)).unwrap(),
        user_group,
        item_group,
        user_taste: to_matrix(&tastes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::l2_norm;

    #[test]
    fn sphere_rows_are_unit() {
        let m = unit_sphere(10, 7, 1);
        assert!(m.iter_rows().all(|r| (l2_norm(r) - 1.0).abs() < 1e-6));
    }

    #[test]
    fn planted_corpus_shape_and_affinity() {
        let c = planted_corpus(&PlantedParams::default());
        assert_eq!((c.graph.num_users(), c.graph.num_items()), (200, 300));
        let same: usize = c
            .graph
            .edges()
            .filter(|&(u, i)| c.user_group[u] == c.item_group[i])
            .count();
        assert!(same as f64 > 0.8 * c.graph.num_edges() as f64);
        assert_eq!(
            planted_corpus(&PlantedParams::default()).graph,
            c.graph,
            "generator must be deterministic"
        );
    }
}
