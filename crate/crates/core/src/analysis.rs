//! User–item magnitude gap statistics and interaction-count bucketing.

use std::fmt::Write as _;

use crate::corpus::InteractionGraph;
use crate::error::{Error, Result};
use crate::matrix::{l2_norm, Matrix};

/// Default interaction-count bucket boundaries: 1–5, 6–10, 11–20, 21+.
pub const DEFAULT_SPARSITY_EDGES: [usize; 4] = [1, 6, 11, 21];

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub user_mean_norm: f64,
    pub item_mean_norm: f64,
    pub abs_mean_diff: f64,
    /// `bins + 1` ascending edges spanning `[0, max row norm]`.
    pub bin_edges: Vec<f64>,
    /// Fraction of user rows per bin; sums to 1.
    pub user_histogram: Vec<f64>,
    pub item_histogram: Vec<f64>,
}

fn row_norms(m: &Matrix) -> Vec<f64> {
    m.iter_rows().map(l2_norm).collect()
}

fn histogram(norms: &[f64], edges: &[f64]) -> Vec<f64> {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = (edges[bins] - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &n in norms {
        let b = (((n - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = norms.len() as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

/// Mean L2 row norm of users and items, their absolute difference, and norm histograms over a
/// shared range.
pub fn semantic_gap(users: &Matrix, items: &Matrix, bins: usize) -> Result<GapStats> {
    if users.cols() != items.cols() {
        return Err(Error::DimensionMismatch {
            context: "user vs item embedding dim",
            expected: items.cols(),
            found: users.cols(),
        });
    }
    if users.rows() == 0 || items.rows() == 0 {
        return Err(Error::param("semantic gap needs non-empty user and item matrices"));
    }
    if bins == 0 {
        return Err(Error::param("bins must be at least 1"));
    }
    let user_norms = row_norms(users);
    let item_norms = row_norms(items);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let user_mean_norm = mean(&user_norms);
    let item_mean_norm = mean(&item_norms);

    let max = user_norms.iter().chain(&item_norms).copied().fold(0.0, f64::max);
    let hi = if max > 0.0 { max } else { 1.0 };
    let bin_edges: Vec<f64> = (0..=bins).map(|b| hi * b as f64 / bins as f64).collect();

    Ok(GapStats {
        user_mean_norm,
        item_mean_norm,
        abs_mean_diff: (user_mean_norm - item_mean_norm).abs(),
        user_histogram: histogram(&user_norms, &bin_edges),
        item_histogram: histogram(&item_norms, &bin_edges),
        bin_edges,
    })
}

impl GapStats {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "user_mean_norm={}", self.user_mean_norm);
        let _ = writeln!(s, "item_mean_norm={}", self.item_mean_norm);
        let _ = writeln!(s, "abs_mean_diff={}", self.abs_mean_diff);
        let _ = writeln!(s, "bins={}", self.user_histogram.len());
        s
    }

    /// `bin_left,bin_right,user_density,item_density` rows with a header line.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,user_density,item_density\n");
        for (b, (u, i)) in self.user_histogram.iter().zip(&self.item_histogram).enumerate() {
            let _ = writeln!(s, "{},{},{},{}", self.bin_edges[b], self.bin_edges[b + 1], u, i);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityBuckets {
    pub bucket_edges: Vec<usize>,
    /// Bucket per user; `None` for users below the first edge (e.g. no interactions).
    pub membership: Vec<Option<usize>>,
}

impl SparsityBuckets {
    pub fn num_buckets(&self) -> usize {
        self.bucket_edges.len()
    }

    pub fn members(&self, bucket: usize) -> Vec<usize> {
        self.membership
            .iter()
            .enumerate()
            .filter_map(|(u, b)| (*b == Some(bucket)).then_some(u))
            .collect()
    }

    pub fn label(&self, bucket: usize) -> String {
        let lo = self.bucket_edges[bucket];
        match self.bucket_edges.get(bucket + 1) {
            Some(&hi) => format!("{lo}-{}", hi - 1),
            None => format!("{lo}+"),
        }
    }
}

/// User `u` lands in bucket `j` iff `edges[j] <= |N(u)| < edges[j + 1]`; the last bucket is open.
pub fn group_by_sparsity(graph: &InteractionGraph, edges: &[usize]) -> Result<SparsityBuckets> {
    match edges.first() {
        None => return Err(Error::param("at least one bucket edge is required")),
        Some(0) => return Err(Error::param("the first bucket edge must be at least 1")),
        _ => {}
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(format!("bucket edges {edges:?} are not strictly ascending")));
    }
    let membership = (0..graph.num_users())
        .map(|u| {
            let deg = graph.user_degree(u);
            edges.iter().rposition(|&e| e <= deg)
        })
        .collect();
    Ok(SparsityBuckets {
        bucket_edges: edges.to_vec(),
        membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_matrices_have_no_gap() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        assert_eq!(semantic_gap(&m, &m, 10).unwrap().abs_mean_diff, 0.0);
    }

    #[test]
    fn constant_norm_arithmetic() {
        let items = Matrix::from_vec(5, 4, vec![1.0; 20]).unwrap();
        let users = Matrix::zeros(3, 4);
        let g = semantic_gap(&users, &items, 4).unwrap();
        assert_eq!((g.user_mean_norm, g.item_mean_norm, g.abs_mean_diff), (0.0, 2.0, 2.0));
        assert_eq!(g.user_histogram, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.item_histogram, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn gap_errors() {
        let a = Matrix::zeros(2, 3);
        assert!(semantic_gap(&a, &Matrix::zeros(2, 4), 5).is_err());
        assert!(semantic_gap(&Matrix::zeros(0, 3), &a, 5).is_err());
        assert!(semantic_gap(&a, &a, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = Matrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let csv = semantic_gap(&m, &m, 2).unwrap().histogram_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bin_left,bin_right,user_density,item_density");
        assert_eq!(lines[1], "0,2.5,0,0");
        assert_eq!(lines[2], "2.5,5,1,1");
    }

    #[test]
    fn default_edges_grouping() {
        let mut edges = Vec::new();
        (0..3).for_each(|i| edges.push((0, i)));
        (0..7).for_each(|i| edges.push((1, i)));
        let g = InteractionGraph::from_edges(3, 7, &edges).unwrap();
        let b = group_by_sparsity(&g, &[1, 6]).unwrap();
        assert_eq!(b.membership, vec![Some(0), Some(1), None]);
        assert_eq!(b.label(0), "1-5");
        assert_eq!(b.label(1), "6+");
    }

    #[test]
    fn single_open_bucket() {
        let g = InteractionGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        assert_eq!(group_by_sparsity(&g, &[1]).unwrap().membership, vec![Some(0)]);
    }

    #[test]
    fn bad_edges() {
        let g = InteractionGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        assert!(group_by_sparsity(&g, &[]).is_err());
        assert!(group_by_sparsity(&g, &[0, 5]).is_err());
        assert!(group_by_sparsity(&g, &[5, 5]).is_err());
        assert!(group_by_sparsity(&g, &[6, 1]).is_err());
    }
}
