use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::InteractionGraph;
use crate::error::{Error, Result};

pub type Edge = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Train,
    Val,
    Test,
}

impl SplitPart {
    pub const ALL: [SplitPart; 3] = [SplitPart::Train, SplitPart::Val, SplitPart::Test];

    pub fn name(self) -> &'static str {
        match self {
            SplitPart::Train => "train",
            SplitPart::Val => "val",
            SplitPart::Test => "test",
        }
    }
}

/// Disjoint train/validation/test edge sets over one graph's index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSplit {
    pub num_users: usize,
    pub num_items: usize,
    pub train: Vec<Edge>,
    pub val: Vec<Edge>,
    pub test: Vec<Edge>,
    /// Items withheld from training entirely; empty for random splits.
    pub cold_items: Vec<usize>,
}

impl EvalSplit {
    pub fn part(&self, part: SplitPart) -> &[Edge] {
        match part {
            SplitPart::Train => &self.train,
            SplitPart::Val => &self.val,
            SplitPart::Test => &self.test,
        }
    }

    pub fn train_graph(&self) -> InteractionGraph {
        InteractionGraph::from_edges(self.num_users, self.num_items, &self.train)
            .expect("split edges are in range by construction")
    }

    /// Per-user item lists for one part, each sorted ascending.
    pub fn user_items(&self, part: SplitPart) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.num_users];
        for &(u, i) in self.part(part) {
            lists[u].push(i);
        }
        lists.iter_mut().for_each(|l| l.sort_unstable());
        lists
    }

    /// Writes `train.tsv`, `val.tsv`, `test.tsv` (and `cold_items.txt` when non-empty) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for part in SplitPart::ALL {
            let path = dir.join(format!("{}.tsv", part.name()));
            let mut s = String::new();
            let _ = writeln!(s, "# split={}", part.name());
            let _ = writeln!(s, "# shape={}x{}", self.num_users, self.num_items);
            for &(u, i) in self.part(part) {
                let _ = writeln!(s, "{u}\t{i}");
            }
            fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        if !self.cold_items.is_empty() {
            let path = dir.join("cold_items.txt");
            let s: String = self.cold_items.iter().map(|i| format!("{i}\n")).collect();
            fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn read(dir: &Path) -> Result<EvalSplit> {
        let mut parts: Vec<Vec<Edge>> = Vec::new();
        let mut shape = None;
        for part in SplitPart::ALL {
            let path = dir.join(format!("{}.tsv", part.name()));
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let perr = |line: usize, message: String| Error::Parse {
                path: path.clone(),
                line,
                message,
            };
            let mut edges = Vec::new();
            let mut saw_header = false;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim_end_matches('\r');
                if let Some(comment) = line.strip_prefix('#') {
                    let comment = comment.trim();
                    if let Some(name) = comment.strip_prefix("split=") {
                        if name != part.name() {
                            return Err(perr(n + 1, format!("header names split {name:?}")));
                        }
                        saw_header = true;
                    } else if let Some(dims) = comment.strip_prefix("shape=") {
                        let parsed = dims
                            .split_once('x')
                            .and_then(|(u, i)| Some((u.parse::<usize>().ok()?, i.parse::<usize>().ok()?)))
                            .ok_or_else(|| perr(n + 1, "malformed shape header".into()))?;
                        if shape.is_some_and(|s| s != parsed) {
                            return Err(perr(n + 1, "shape differs between split files".into()));
                        }
                        shape = Some(parsed);
                    }
                    continue;
                }
                if line.is_empty() {
                    continue;
                }
                let edge = line
                    .split_once('\t')
                    .and_then(|(u, i)| Some((u.parse().ok()?, i.parse().ok()?)))
                    .ok_or_else(|| perr(n + 1, "expected user-index<TAB>item-index".into()))?;
                edges.push(edge);
            }
            if !saw_header {
                return Err(perr(1, format!("missing \"# split={}\" header", part.name())));
            }
            parts.push(edges);
        }
        let (num_users, num_items) = shape.unwrap_or_else(|| {
            let all = parts.iter().flatten();
            let u = all.clone().map(|e| e.0 + 1).max().unwrap_or(0);
            let i = all.map(|e| e.1 + 1).max().unwrap_or(0);
            (u, i)
        });
        let cold_path = dir.join("cold_items.txt");
        let cold_items = if cold_path.exists() {
            let text = fs::read_to_string(&cold_path).map_err(|e| Error::io(&cold_path, e))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(n, l)| {
                    l.trim().parse().map_err(|_| Error::Parse {
                        path: cold_path.clone(),
                        line: n + 1,
                        message: "expected an item index".into(),
                    })
                })
                .collect::<Result<Vec<usize>>>()?
        } else {
            Vec::new()
        };
        let test = parts.pop().unwrap();
        let val = parts.pop().unwrap();
        let train = parts.pop().unwrap();
        let split = EvalSplit {
            num_users,
            num_items,
            train,
            val,
            test,
            cold_items,
        };
        split.check_invariants()?;
        Ok(split)
    }

    /// Disjointness, index range, and cold-item isolation.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for part in SplitPart::ALL {
            for &(u, i) in self.part(part) {
                if u >= self.num_users || i >= self.num_items {
                    return Err(Error::param(format!("edge ({u}, {i}) out of range")));
                }
                if !seen.insert((u, i)) {
                    return Err(Error::param(format!("edge ({u}, {i}) appears twice")));
                }
            }
        }
        let cold: HashSet<usize> = self.cold_items.iter().copied().collect();
        if self.train.iter().any(|(_, i)| cold.contains(i)) {
            return Err(Error::param("a train edge touches a cold item"));
        }
        Ok(())
    }
}

/// Per-user split: each user's items are shuffled and cut proportionally. Users with at least
/// one interaction always keep one training edge.
pub fn split_random(graph: &InteractionGraph, ratios: (f64, f64, f64), seed: u64) -> Result<EvalSplit> {
    let (tr, va, te) = ratios;
    if !(tr > 0.0 && va > 0.0 && te > 0.0) || ((tr + va + te) - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!(
            "split ratios ({tr}, {va}, {te}) must be positive and sum to 1"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for u in 0..graph.num_users() {
        let mut items = graph.user_items(u).to_vec();
        if items.is_empty() {
            continue;
        }
        items.shuffle(&mut rng);
        let n = items.len();
        let mut n_test = (n as f64 * te).round() as usize;
        let mut n_val = (n as f64 * va).round() as usize;
        while n_test + n_val >= n {
            if n_val > 0 {
                n_val -= 1;
            } else {
                n_test -= 1;
            }
        }
        let n_train = n - n_val - n_test;
        train.extend(items[..n_train].iter().map(|&i| (u, i)));
        val.extend(items[n_train..n_train + n_val].iter().map(|&i| (u, i)));
        test.extend(items[n_train + n_val..].iter().map(|&i| (u, i)));
    }
    Ok(EvalSplit {
        num_users: graph.num_users(),
        num_items: graph.num_items(),
        train,
        val,
        test,
        cold_items: Vec::new(),
    })
}

/// Item cold-start split: `floor(fraction * |I|)` items drawn uniformly lose all their edges
/// from training; the first half of them (rounded down) feed validation, the rest test.
pub fn split_cold_start(graph: &InteractionGraph, cold_fraction: f64, seed: u64) -> Result<EvalSplit> {
    if !(cold_fraction > 0.0 && cold_fraction < 1.0) {
        return Err(Error::param(format!("cold fraction {cold_fraction} must lie in (0, 1)")));
    }
    let n_cold = (cold_fraction * graph.num_items() as f64).floor() as usize;
    if n_cold == 0 {
        return Err(Error::param(format!(
            "cold fraction {cold_fraction} selects no items out of {}",
            graph.num_items()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..graph.num_items()).collect();
    order.shuffle(&mut rng);
    let mut cold_items = order[..n_cold].to_vec();
    let n_val = n_cold / 2;
    let val_items: HashSet<usize> = cold_items[..n_val].iter().copied().collect();
    let cold: HashSet<usize> = cold_items.iter().copied().collect();

    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (u, i) in graph.edges() {
        if !cold.contains(&i) {
            train.push((u, i));
        } else if val_items.contains(&i) {
            val.push((u, i));
        } else {
            test.push((u, i));
        }
    }
    if train.is_empty() {
        return Err(Error::param("cold-start split leaves no training edges"));
    }
    cold_items.sort_unstable();
    Ok(EvalSplit {
        num_users: graph.num_users(),
        num_items: graph.num_items(),
        train,
        val,
        test,
        cold_items,
    })
}

/// Cold items assigned to validation and to test, as recovered from the edge lists plus
/// any cold items without edges (which count toward neither).
pub fn cold_halves(split: &EvalSplit) -> (Vec<usize>, Vec<usize>) {
    let collect = |edges: &[Edge]| {
        let mut v: Vec<usize> = edges.iter().map(|e| e.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    (collect(&split.val), collect(&split.test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(users: usize, items: usize) -> InteractionGraph {
        let edges: Vec<Edge> = (0..users).flat_map(|u| (0..items).map(move |i| (u, i))).collect();
        InteractionGraph::from_edges(users, items, &edges).unwrap()
    }

    #[test]
    fn random_split_proportions() {
        let g = grid(10, 10);
        let s = split_random(&g, (0.8, 0.1, 0.1), 5).unwrap();
        assert_eq!(s.train.len(), 80);
        assert_eq!(s.val.len(), 10);
        assert_eq!(s.test.len(), 10);
        s.check_invariants().unwrap();
        assert_eq!(s, split_random(&g, (0.8, 0.1, 0.1), 5).unwrap());
    }

    #[test]
    fn low_degree_users_keep_a_train_edge() {
        let g = InteractionGraph::from_edges(3, 3, &[(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]).unwrap();
        let s = split_random(&g, (0.34, 0.33, 0.33), 1).unwrap();
        for u in 0..3 {
            assert!(s.train.iter().any(|e| e.0 == u));
        }
    }

    #[test]
    fn degenerate_ratios() {
        let g = grid(2, 2);
        assert!(split_random(&g, (0.8, 0.2, 0.0), 0).unwrap_err().is_usage());
        assert!(split_random(&g, (0.8, 0.1, 0.2), 0).is_err());
    }

    #[test]
    fn cold_start_ten_items() {
        let g = grid(4, 10);
        let s = split_cold_start(&g, 0.2, 3).unwrap();
        assert_eq!(s.cold_items.len(), 2);
        let (v, t) = cold_halves(&s);
        assert_eq!((v.len(), t.len()), (1, 1));
        assert!(s.train.iter().all(|e| !s.cold_items.contains(&e.1)));
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), 40);
    }

    #[test]
    fn single_cold_item() {
        let g = grid(3, 10);
        let s = split_cold_start(&g, 0.1, 0).unwrap();
        assert_eq!(s.cold_items.len(), 1);
        assert!(s.train.iter().all(|e| e.1 != s.cold_items[0]));
        assert!(split_cold_start(&g, 0.05, 0).is_err());
        assert!(split_cold_start(&g, 1.0, 0).is_err());
    }

    #[test]
    fn cold_start_cannot_empty_train() {
        // only item 0 carries edges; any cold set containing it leaves nothing to train on
        let g = InteractionGraph::from_edges(2, 2, &[(0, 0), (1, 0)]).unwrap();
        let outcomes: Vec<bool> = (0..20).map(|seed| split_cold_start(&g, 0.5, seed).is_ok()).collect();
        assert!(outcomes.contains(&false));
    }

    #[test]
    fn file_round_trip() {
        let g = grid(5, 6);
        let s = split_cold_start(&g, 0.5, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = s.write(dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let text = fs::read_to_string(dir.path().join("val.tsv")).unwrap();
        assert!(text.starts_with("# split=val\n"));
        assert_eq!(EvalSplit::read(dir.path()).unwrap(), s);
    }
}
