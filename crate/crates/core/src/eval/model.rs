//! A small LightGCN-style recommender used to compare user initializations.
//!
//! Users and items share one embedding table (users first). The readout is the mean of
//! `L + 1` layers of symmetric degree-normalized propagation over the training graph,
//! scores are dot products, and the objective is the pairwise log-sigmoid ranking loss
//! with uniformly sampled negatives, optimized with Adam. Everything runs in `f64` on a
//! single thread so that a seed fixes the whole trajectory.

use std::collections::HashSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::eval::metrics::{ndcg_at_k, recall_at_k, RunMetrics};
use crate::eval::split::{EvalSplit, SplitPart};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// How the user table starts.
#[derive(Debug, Clone, PartialEq)]
pub enum UserInitMode {
    /// Zero-mean Gaussian with standard deviation `1 / sqrt(embed_dim)`.
    Random,
    /// A precomputed `num_users × d` table, mapped to `embed_dim` with the item projection.
    Provided(Matrix),
}

/// Maps item features (and provided user tables) from feature width to `embed_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Widths must already agree.
    #[default]
    Identity,
    /// Keep the leading `embed_dim` columns.
    Truncate,
    /// Dense Gaussian map with entries `N(0, 1 / embed_dim)`.
    Gaussian { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefModelConfig {
    pub embed_dim: usize,
    pub num_layers: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub negatives_per_positive: usize,
    pub l2_reg: f64,
    /// Cutoff of the validation Recall used for early stopping.
    pub early_stop_k: usize,
    pub seed: u64,
    pub projection: Projection,
    pub init: UserInitMode,
}

/// Batch size used by the full-scale experiments this harness scales down from.
pub const FULL_SCALE_BATCH_SIZE: usize = 2048;

impl Default for RefModelConfig {
    fn default() -> Self {
        RefModelConfig {
            embed_dim: 32,
            num_layers: 2,
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 200,
            patience: 20,
            negatives_per_positive: 1,
            l2_reg: 1e-4,
            early_stop_k: 10,
            seed: 0,
            projection: Projection::Identity,
            init: UserInitMode::Random,
        }
    }
}

impl RefModelConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("embed_dim", self.embed_dim),
            ("num_layers", self.num_layers),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("patience", self.patience),
            ("negatives_per_positive", self.negatives_per_positive),
            ("early_stop_k", self.early_stop_k),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::param(format!("{name} must be at least 1")));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::param("learning_rate must be positive"));
        }
        if !(self.l2_reg >= 0.0) {
            return Err(Error::param("l2_reg must be non-negative"));
        }
        Ok(())
    }
}

/// Symmetric-normalized bipartite adjacency over `num_users + num_items` nodes.
#[derive(Debug, Clone)]
pub struct Propagation {
    num_users: usize,
    num_items: usize,
    layers: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl Propagation {
    pub fn new(num_users: usize, num_items: usize, edges: &[(usize, usize)], layers: usize) -> Self {
        let n = num_users + num_items;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, i) in edges {
            adj[u].push(num_users + i);
            adj[num_users + i].push(u);
        }
        adj.iter_mut().for_each(|a| {
            a.sort_unstable();
            a.dedup();
        });
        let degree: Vec<f64> = adj.iter().map(|a| a.len() as f64).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (v, a) in adj.iter().enumerate() {
            for &w in a {
                neighbors.push(w);
                weights.push(1.0 / (degree[v] * degree[w]).sqrt());
            }
            offsets.push(neighbors.len());
        }
        Propagation {
            num_users,
            num_items,
            layers,
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_users + self.num_items
    }

    fn spmm(&self, x: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (v, row) in out.chunks_exact_mut(dim).enumerate() {
            for e in self.offsets[v]..self.offsets[v + 1] {
                let w = self.weights[e];
                let src = &x[self.neighbors[e] * dim..(self.neighbors[e] + 1) * dim];
                for (o, &s) in row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        out
    }

    /// `(1 / (L + 1)) * sum_{l=0..L} A^l x`. The operator is symmetric, so this is also its
    /// own adjoint and maps readout gradients back to the embedding table.
    pub fn propagate(&self, x: &[f64], dim: usize) -> Vec<f64> {
        let mut acc = x.to_vec();
        let mut cur = x.to_vec();
        for _ in 0..self.layers {
            cur = self.spmm(&cur, dim);
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += c);
        }
        let scale = 1.0 / (self.layers + 1) as f64;
        acc.iter_mut().for_each(|a| *a *= scale);
        acc
    }
}

/// Node-major embedding table: users `0..num_users`, then items.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub num_users: usize,
    pub num_items: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Embeddings {
    pub fn user(&self, u: usize) -> &[f64] {
        &self.data[u * self.dim..(u + 1) * self.dim]
    }

    pub fn item(&self, i: usize) -> &[f64] {
        let n = self.num_users + i;
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.user(u), self.item(i))
    }

    pub fn user_matrix(&self) -> Matrix {
        let data = self.data[..self.num_users * self.dim].iter().map(|&x| x as f32).collect();
        Matrix::from_vec(self.num_users, self.dim, data).unwrap()
    }

    pub fn item_matrix(&self) -> Matrix {
        let data = self.data[self.num_users * self.dim..].iter().map(|&x| x as f32).collect();
        Matrix::from_vec(self.num_items, self.dim, data).unwrap()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub user: usize,
    pub pos: usize,
    pub neg: usize,
}

/// Mean pairwise loss over `triples` and its gradient with respect to the embedding table.
///
/// `loss = mean_t softplus(s(u,n) - s(u,p)) + l2_reg / 2 * mean_t (|e_u|² + |e_p|² + |e_n|²)`
/// where `s` scores propagated embeddings and the penalty applies to the raw table rows.
pub fn pairwise_loss_and_grad(
    prop: &Propagation,
    table: &[f64],
    dim: usize,
    triples: &[Triple],
    l2_reg: f64,
) -> (f64, Vec<f64>) {
    let final_emb = prop.propagate(table, dim);
    let nu = prop.num_users;
    let row = |m: &[f64], v: usize| m[v * dim..(v + 1) * dim].to_vec();
    let scale = 1.0 / triples.len() as f64;
    let mut loss = 0.0;
    let mut d_final = vec![0.0; table.len()];
    let mut grad = vec![0.0; table.len()];
    for t in triples {
        let (u, p, n) = (t.user, nu + t.pos, nu + t.neg);
        let (fu, fp, fn_) = (row(&final_emb, u), row(&final_emb, p), row(&final_emb, n));
        let x = dot(&fu, &fp) - dot(&fu, &fn_);
        loss += softplus(-x) * scale;
        // d/dx softplus(-x) = -sigmoid(-x)
        let g = -scale / (1.0 + x.exp());
        for k in 0..dim {
            d_final[u * dim + k] += g * (fp[k] - fn_[k]);
            d_final[p * dim + k] += g * fu[k];
            d_final[n * dim + k] -= g * fu[k];
        }
        if l2_reg > 0.0 {
            for v in [u, p, n] {
                let e = &table[v * dim..(v + 1) * dim];
                loss += 0.5 * l2_reg * scale * dot(e, e);
                for k in 0..dim {
                    grad[v * dim + k] += l2_reg * scale * e[k];
                }
            }
        }
    }
    let back = prop.propagate(&d_final, dim);
    grad.iter_mut().zip(back).for_each(|(g, b)| *g += b);
    (loss, grad)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

fn project(m: &Matrix, config: &RefModelConfig, what: &'static str) -> Result<Matrix> {
    let d = config.embed_dim;
    match config.projection {
        Projection::Identity if m.cols() == d => Ok(m.clone()),
        Projection::Identity => Err(Error::DimensionMismatch {
            context: what,
            expected: d,
            found: m.cols(),
        }),
        Projection::Truncate => m.truncate_cols(d),
        Projection::Gaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt()).unwrap();
            let w: Vec<f64> = (0..m.cols() * d).map(|_| normal.sample(&mut rng)).collect();
            m.project(&w, d)
        }
    }
}

/// Starting embedding table: projected item features plus the configured user init.
pub fn initial_table(split: &EvalSplit, item_features: &Matrix, config: &RefModelConfig) -> Result<Vec<f64>> {
    if item_features.rows() != split.num_items {
        return Err(Error::DimensionMismatch {
            context: "item features vs split items",
            expected: split.num_items,
            found: item_features.rows(),
        });
    }
    let d = config.embed_dim;
    let items = project(item_features, config, "item features vs embed_dim")?;
    let mut table = Vec::with_capacity((split.num_users + split.num_items) * d);
    match &config.init {
        UserInitMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x005e_ed0f_u64);
            let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt()).unwrap();
            table.extend((0..split.num_users * d).map(|_| normal.sample(&mut rng)));
        }
        UserInitMode::Provided(users) => {
            if users.rows() != split.num_users {
                return Err(Error::DimensionMismatch {
                    context: "user init rows vs split users",
                    expected: split.num_users,
                    found: users.rows(),
                });
            }
            if users.cols() != item_features.cols() && config.projection != Projection::Identity {
                return Err(Error::DimensionMismatch {
                    context: "user init vs item feature width",
                    expected: item_features.cols(),
                    found: users.cols(),
                });
            }
            let users = project(users, config, "user init vs embed_dim")?;
            table.extend(users.as_slice().iter().map(|&x| x as f64));
        }
    }
    table.extend(items.as_slice().iter().map(|&x| x as f64));
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Propagated embeddings at the best validation epoch.
    pub embeddings: Embeddings,
    /// Loss over the first epoch's triples before any update.
    pub initial_loss: f64,
    /// Mean training loss per epoch (index 0 is epoch 1).
    pub loss_trace: Vec<f64>,
    /// Validation Recall@`early_stop_k` per epoch; empty without validation edges.
    pub val_trace: Vec<f64>,
    /// 1-based epoch whose embeddings were kept.
    pub best_epoch: usize,
    pub epochs_run: usize,
}

impl TrainOutcome {
    /// First 1-based epoch whose loss is at or below `target`.
    pub fn epochs_to_reach(&self, target: f64) -> Option<usize> {
        self.loss_trace.iter().position(|&l| l <= target).map(|e| e + 1)
    }

    pub fn loss_csv(&self) -> String {
        let mut s = String::from("epoch,loss\n");
        for (e, l) in self.loss_trace.iter().enumerate() {
            s.push_str(&format!("{},{}\n", e + 1, l));
        }
        s
    }
}

fn sample_epoch(split: &EvalSplit, train_sets: &[HashSet<usize>], negatives: usize, rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let mut triples = Vec::with_capacity(split.train.len() * negatives);
    for &(user, pos) in &split.train {
        if train_sets[user].len() >= split.num_items {
            continue;
        }
        for _ in 0..negatives {
            let neg = loop {
                let cand = rng.random_range(0..split.num_items);
                if !train_sets[user].contains(&cand) {
                    break cand;
                }
            };
            triples.push(Triple { user, pos, neg });
        }
    }
    triples.shuffle(rng);
    triples
}

/// Trains on `split.train`, early-stopping on validation Recall@`early_stop_k`.
pub fn train_reference_model(split: &EvalSplit, item_features: &Matrix, config: &RefModelConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(Error::param("training split has no edges"));
    }
    let dim = config.embed_dim;
    let mut table = initial_table(split, item_features, config)?;
    let prop = Propagation::new(split.num_users, split.num_items, &split.train, config.num_layers);
    let train_sets: Vec<HashSet<usize>> = split
        .user_items(SplitPart::Train)
        .into_iter()
        .map(|v| v.into_iter().collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(table.len(), config.learning_rate);
    let to_embeddings = |table: &[f64]| Embeddings {
        num_users: split.num_users,
        num_items: split.num_items,
        dim,
        data: prop.propagate(table, dim),
    };

    let mut loss_trace = Vec::new();
    let mut val_trace = Vec::new();
    let mut best: Option<(f64, usize, Embeddings)> = None;
    let mut initial_loss = f64::NAN;

    for epoch in 1..=config.max_epochs {
        let triples = sample_epoch(split, &train_sets, config.negatives_per_positive, &mut rng);
        if triples.is_empty() {
            return Err(Error::param("no negative items available to sample"));
        }
        if epoch == 1 {
            initial_loss = pairwise_loss_and_grad(&prop, &table, dim, &triples, config.l2_reg).0;
        }
        let mut epoch_loss = 0.0;
        for batch in triples.chunks(config.batch_size) {
            let (loss, grad) = pairwise_loss_and_grad(&prop, &table, dim, batch, config.l2_reg);
            epoch_loss += loss * batch.len() as f64;
            adam.step(&mut table, &grad);
        }
        loss_trace.push(epoch_loss / triples.len() as f64);

        if split.val.is_empty() {
            continue;
        }
        let emb = to_embeddings(&table);
        let recall = evaluate_run(&emb, split, SplitPart::Val, &[config.early_stop_k])
            .recall
            .get(&config.early_stop_k)
            .copied()
            .unwrap_or(0.0);
        val_trace.push(recall);
        match &best {
            Some((score, _, _)) if recall <= *score => {}
            _ => best = Some((recall, epoch, emb)),
        }
        if epoch - best.as_ref().unwrap().1 >= config.patience {
            break;
        }
    }

    let epochs_run = loss_trace.len();
    let (best_epoch, embeddings) = match best {
        Some((_, epoch, emb)) => (epoch, emb),
        None => (epochs_run, to_embeddings(&table)),
    };
    Ok(TrainOutcome {
        embeddings,
        initial_loss,
        loss_trace,
        val_trace,
        best_epoch,
        epochs_run,
    })
}

/// Items for `user` ranked by descending score (ties: lower index first), skipping `exclude`.
pub fn rank_items(emb: &Embeddings, user: usize, exclude: &HashSet<usize>) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = (0..emb.num_items)
        .filter(|i| !exclude.contains(i))
        .map(|i| (emb.score(user, i), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, i)| i).collect()
}

/// Averages Recall@K and NDCG@K over users holding at least one edge in `part`, ranking every
/// item the user has not trained on.
pub fn evaluate_run(emb: &Embeddings, split: &EvalSplit, part: SplitPart, ks: &[usize]) -> RunMetrics {
    let train = split.user_items(SplitPart::Train);
    let target = split.user_items(part);
    let per_user: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..split.num_users)
        .into_par_iter()
        .map(|u| {
            if target[u].is_empty() {
                return None;
            }
            let exclude: HashSet<usize> = train[u].iter().copied().collect();
            let ranked = rank_items(emb, u, &exclude);
            if ranked.is_empty() {
                warn!("user {u} has no candidate items; skipped");
                return None;
            }
            let relevant: HashSet<usize> = target[u].iter().copied().collect();
            let r = ks.iter().map(|&k| recall_at_k(&ranked, &relevant, k).unwrap()).collect();
            let n = ks.iter().map(|&k| ndcg_at_k(&ranked, &relevant, k).unwrap()).collect();
            Some((r, n))
        })
        .collect();

    let mut out = RunMetrics::default();
    let mut rsum = vec![0.0; ks.len()];
    let mut nsum = vec![0.0; ks.len()];
    for (r, n) in per_user.into_iter().flatten() {
        out.users_evaluated += 1;
        rsum.iter_mut().zip(&r).for_each(|(s, v)| *s += v);
        nsum.iter_mut().zip(&n).for_each(|(s, v)| *s += v);
    }
    let denom = out.users_evaluated.max(1) as f64;
    for (j, &k) in ks.iter().enumerate() {
        out.recall.insert(k, rsum[j] / denom);
        out.ndcg.insert(k, nsum[j] / denom);
    }
    out
}

/// Test-set metrics; errors when the split has no test edges.
pub fn evaluate(emb: &Embeddings, split: &EvalSplit, ks: &[usize]) -> Result<RunMetrics> {
    if split.test.is_empty() {
        return Err(Error::param("test split has no edges"));
    }
    if ks.contains(&0) {
        return Err(Error::param("every K must be at least 1"));
    }
    Ok(evaluate_run(emb, split, SplitPart::Test, ks))
}
