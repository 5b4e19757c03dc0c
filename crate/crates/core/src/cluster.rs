//! Per-modality K-Means over item features and nearest-centroid alignment.
//!
//! Seeding is k-means++ driven by a ChaCha8 stream, so a given `(features, params)` pair
//! always produces the same model. The assignment step may run on the rayon pool; each
//! item's nearest centroid is computed independently and centroid sums are accumulated
//! sequentially in item order, so parallel and sequential runs agree bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{read_tensor, write_tensor, ModalityFeatures};
use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once the relative objective improvement of an iteration falls below this.
    pub tol: f64,
    pub parallel: bool,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansParams {
            k,
            seed,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub modality: String,
    pub k: usize,
    pub seed: u64,
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub objective: f64,
    pub iterations_run: usize,
    /// Objective after seeding followed by one entry per accepted Lloyd iteration.
    pub objective_trace: Vec<f64>,
}

/// Index of the nearest centroid and its squared distance; ties go to the lowest index.
pub fn nearest_centroid(point: &[f32], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter_rows().enumerate() {
        let d = squared_distance(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign(data: &Matrix, centroids: &Matrix, parallel: bool) -> (Vec<usize>, Vec<f64>) {
    let rows: Vec<(usize, f64)> = if parallel {
        (0..data.rows())
            .into_par_iter()
            .map(|i| nearest_centroid(data.row(i), centroids))
            .collect()
    } else {
        data.iter_rows().map(|r| nearest_centroid(r, centroids)).collect()
    };
    rows.into_iter().unzip()
}

fn plus_plus_seed(data: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = data.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut min_dist: Vec<f64> = data
        .iter_rows()
        .map(|r| squared_distance(r, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = min_dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in min_dist.iter().enumerate() {
                acc += d;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` a hair below `target`; fall back to the last positive weight
            pick.unwrap_or_else(|| min_dist.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // every point coincides with a chosen center
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, d) in min_dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.row(i), data.row(next)));
        }
    }
    chosen
}

/// Recomputes centroids as cluster means. Empty clusters take the point currently farthest
/// from its assigned centroid; each such point is used at most once.
fn update_centroids(data: &Matrix, assignments: &[usize], distances: &[f64], k: usize) -> Matrix {
    let dim = data.cols();
    let mut sums = vec![0.0f64; k * dim];
    let mut counts = vec![0usize; k];
    for (row, &c) in data.iter_rows().zip(assignments) {
        counts[c] += 1;
        for (s, &x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row) {
            *s += x as f64;
        }
    }
    let mut centroids = Matrix::zeros(k, dim);
    let mut spare: Vec<usize> = (0..data.rows()).collect();
    // farthest first, lowest index on ties
    spare.sort_by(|&a, &b| distances[b].total_cmp(&distances[a]).then(a.cmp(&b)));
    let mut spare = spare.into_iter();
    for c in 0..k {
        let out = centroids.row_mut(c);
        if counts[c] > 0 {
            let n = counts[c] as f64;
            for (o, s) in out.iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                *o = (s / n) as f32;
            }
        } else if let Some(p) = spare.next() {
            out.copy_from_slice(data.row(p));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding.
pub fn kmeans(features: &ModalityFeatures, params: &KMeansParams) -> Result<ClusterModel> {
    let data = features.matrix();
    let n = data.rows();
    if params.k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if params.k > n {
        return Err(Error::param(format!("k = {} exceeds the number of items ({n})", params.k)));
    }
    if params.max_iters == 0 {
        return Err(Error::param("max_iters must be at least 1"));
    }
    if !(params.tol >= 0.0) {
        return Err(Error::param("tol must be non-negative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds = plus_plus_seed(data, params.k, &mut rng);
    let mut centroids = Matrix::zeros(params.k, data.cols());
    for (c, &i) in seeds.iter().enumerate() {
        centroids.row_mut(c).copy_from_slice(data.row(i));
    }
    let (mut assignments, mut distances) = assign(data, &centroids, params.parallel);
    let mut objective: f64 = distances.iter().sum();
    let mut trace = vec![objective];
    let mut iterations_run = 0;

    while iterations_run < params.max_iters {
        let next_centroids = update_centroids(data, &assignments, &distances, params.k);
        let (next_assign, next_dist) = assign(data, &next_centroids, params.parallel);
        let next_objective: f64 = next_dist.iter().sum();
        if next_objective > objective {
            // f32 rounding of the means can only matter once the clustering has settled
            break;
        }
        iterations_run += 1;
        let improvement = objective - next_objective;
        let unchanged = next_assign == assignments && next_centroids == centroids;
        centroids = next_centroids;
        assignments = next_assign;
        distances = next_dist;
        objective = next_objective;
        trace.push(objective);
        if unchanged || objective == 0.0 || improvement <= params.tol * (objective + improvement) {
            break;
        }
    }

    Ok(ClusterModel {
        modality: features.modality().to_owned(),
        k: params.k,
        seed: params.seed,
        centroids,
        assignments,
        objective,
        iterations_run,
        objective_trace: trace,
    })
}

/// Replaces every item row by its nearest centroid.
pub fn align_to_clusters(features: &ModalityFeatures, model: &ClusterModel) -> Result<ModalityFeatures> {
    if features.dim() != model.centroids.cols() {
        return Err(Error::DimensionMismatch {
            context: "features vs centroids",
            expected: model.centroids.cols(),
            found: features.dim(),
        });
    }
    let mut out = Matrix::zeros(features.num_items(), features.dim());
    for (i, row) in features.matrix().iter_rows().enumerate() {
        let (c, _) = nearest_centroid(row, &model.centroids);
        out.row_mut(i).copy_from_slice(model.centroids.row(c));
    }
    ModalityFeatures::new(features.modality(), out)
}

/// Paths of the three files a persisted model occupies.
pub fn model_paths(dir: &Path, stem: &str) -> [PathBuf; 3] {
    [
        dir.join(format!("{stem}.centroids.sgur")),
        dir.join(format!("{stem}.assignments.sgur")),
        dir.join(format!("{stem}.meta")),
    ]
}

impl ClusterModel {
    /// Writes centroids, assignments (as an `n × 1` float column) and a `key=value` metadata file.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let [centroids_path, assign_path, meta_path] = model_paths(dir, stem);
        write_tensor(&self.centroids, &centroids_path)?;
        let column = Matrix::from_vec(
            self.assignments.len(),
            1,
            self.assignments.iter().map(|&a| a as f32).collect(),
        )?;
        write_tensor(&column, &assign_path)?;
        let mut meta = String::new();
        let _ = writeln!(meta, "modality={}", self.modality);
        let _ = writeln!(meta, "k={}", self.k);
        let _ = writeln!(meta, "seed={}", self.seed);
        let _ = writeln!(meta, "iterations_run={}", self.iterations_run);
        let _ = writeln!(meta, "objective={:e}", self.objective);
        fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
        Ok(vec![centroids_path, assign_path, meta_path])
    }

    pub fn load(dir: &Path, stem: &str) -> Result<ClusterModel> {
        let [centroids_path, assign_path, meta_path] = model_paths(dir, stem);
        let centroids = read_tensor(&centroids_path)?;
        let column = read_tensor(&assign_path)?;
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let field = |key: &str| -> Result<&str> {
            text.lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Format(format!("{}: missing {key}", meta_path.display())))
        };
        let bad = |key: &str| Error::Format(format!("{}: malformed {key}", meta_path.display()));
        let k: usize = field("k")?.parse().map_err(|_| bad("k"))?;
        let assignments: Vec<usize> = column.as_slice().iter().map(|&a| a as usize).collect();
        if centroids.rows() != k || assignments.iter().any(|&a| a >= k) {
            return Err(Error::Format(format!("{}: inconsistent with centroid file", meta_path.display())));
        }
        Ok(ClusterModel {
            modality: field("modality")?.to_owned(),
            k,
            seed: field("seed")?.parse().map_err(|_| bad("seed"))?,
            centroids,
            assignments,
            objective: field("objective")?.parse().map_err(|_| bad("objective"))?,
            iterations_run: field("iterations_run")?.parse().map_err(|_| bad("iterations_run"))?,
            objective_trace: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(rows: &[Vec<f32>]) -> ModalityFeatures {
        ModalityFeatures::new("t", Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn parameter_errors() {
        let f = feats(&[vec![0.0], vec![1.0]]);
        assert!(kmeans(&f, &KMeansParams::new(0, 1)).unwrap_err().is_usage());
        assert!(kmeans(&f, &KMeansParams::new(3, 1)).unwrap_err().is_usage());
        let mut p = KMeansParams::new(1, 1);
        p.max_iters = 0;
        assert!(kmeans(&f, &p).is_err());
        p.max_iters = 5;
        p.tol = -1.0;
        assert!(kmeans(&f, &p).is_err());
    }

    #[test]
    fn exact_fit_when_k_equals_items() {
        let f = feats(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 5.0], vec![3.0, 3.0]]);
        let m = kmeans(&f, &KMeansParams::new(4, 9)).unwrap();
        assert_eq!(m.objective, 0.0);
        let mut seen = m.assignments.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn coincident_points_still_yield_k_centroids() {
        let f = feats(&[vec![1.0], vec![1.0], vec![1.0]]);
        let m = kmeans(&f, &KMeansParams::new(2, 0)).unwrap();
        assert_eq!(m.centroids.rows(), 2);
        assert_eq!(m.objective, 0.0);
    }

    #[test]
    fn tie_breaks_to_lowest_centroid() {
        let c = Matrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(nearest_centroid(&[0.0, 0.0], &c).0, 0);
        let model = ClusterModel {
            modality: "t".into(),
            k: 2,
            seed: 0,
            centroids: c.clone(),
            assignments: vec![0],
            objective: 0.0,
            iterations_run: 0,
            objective_trace: vec![],
        };
        let aligned = align_to_clusters(&feats(&[vec![0.0, 0.0], vec![1.0, 0.0]]), &model).unwrap();
        assert_eq!(aligned.matrix().row(0), c.row(0));
        assert_eq!(aligned.matrix().row(1), c.row(1));
        assert!(align_to_clusters(&feats(&[vec![0.0]]), &model).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let f = feats(&[vec![0.0, 1.0], vec![0.1, 1.0], vec![5.0, 5.0], vec![5.1, 4.9]]);
        let m = kmeans(&f, &KMeansParams::new(2, 3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = m.save(dir.path(), "visual").unwrap();
        assert_eq!(files.len(), 3);
        let back = ClusterModel::load(dir.path(), "visual").unwrap();
        assert!(back.centroids.bitwise_eq(&m.centroids));
        assert_eq!(back.assignments, m.assignments);
        assert_eq!(back.objective, m.objective);
        assert_eq!(back.iterations_run, m.iterations_run);
    }
}
