use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

/// `|top-k ∩ relevant| / |relevant|`; `None` when nothing is relevant.
pub fn recall_at_k(ranked: &[usize], relevant: &HashSet<usize>, k: usize) -> Option<f64> {
    assert!(k >= 1, "k must be at least 1");
    if relevant.is_empty() {
        return None;
    }
    let hits = ranked.iter().take(k).filter(|i| relevant.contains(i)).count();
    Some(hits as f64 / relevant.len() as f64)
}

/// Binary-relevance NDCG: a hit at 1-based rank `r` gains `1 / log2(r + 1)`, normalized by the
/// ideal DCG over `min(k, |relevant|)` hits. `None` when nothing is relevant.
pub fn ndcg_at_k(ranked: &[usize], relevant: &HashSet<usize>, k: usize) -> Option<f64> {
    assert!(k >= 1, "k must be at least 1");
    if relevant.is_empty() {
        return None;
    }
    let discount = |rank0: usize| 1.0 / ((rank0 + 2) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, i)| relevant.contains(i))
        .map(|(r, _)| discount(r))
        // an empty f64 sum is -0.0; misses should report +0.0
        .fold(0.0, |acc, g| acc + g);
    let idcg: f64 = (0..k.min(relevant.len())).map(discount).sum();
    Some(dcg / idcg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Recall,
    Ndcg,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::Ndcg => "ndcg",
        }
    }
}

/// User-averaged metrics of one evaluation run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub recall: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub users_evaluated: usize,
}

impl RunMetrics {
    pub fn get(&self, metric: Metric, k: usize) -> Option<f64> {
        match metric {
            Metric::Recall => self.recall.get(&k).copied(),
            Metric::Ndcg => self.ndcg.get(&k).copied(),
        }
    }
}

/// Metrics across independent runs (one per seed) with mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankingMetrics {
    pub runs: Vec<RunMetrics>,
}

impl RankingMetrics {
    pub fn new(runs: Vec<RunMetrics>) -> Self {
        RankingMetrics { runs }
    }

    pub fn values(&self, metric: Metric, k: usize) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.get(metric, k)).collect()
    }

    pub fn mean(&self, metric: Metric, k: usize) -> Option<f64> {
        let v = self.values(metric, k);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Sample standard deviation (n - 1 denominator); 0 for a single run.
    pub fn std(&self, metric: Metric, k: usize) -> Option<f64> {
        let v = self.values(metric, k);
        let mean = self.mean(metric, k)?;
        if v.len() < 2 {
            return Some(0.0);
        }
        let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
        Some((ss / (v.len() - 1) as f64).sqrt())
    }

    pub fn ks(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.runs.iter().flat_map(|r| r.recall.keys().copied()).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// `metric,K,mean,std,seed_count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,K,mean,std,seed_count\n");
        for metric in [Metric::Recall, Metric::Ndcg] {
            for k in self.ks() {
                if let (Some(mean), Some(std)) = (self.mean(metric, k), self.std(metric, k)) {
                    let n = self.values(metric, k).len();
                    let _ = writeln!(s, "{},{k},{mean},{std},{n}", metric.name());
                }
            }
        }
        s
    }
}
