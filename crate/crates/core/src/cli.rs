//! `sgur` command line: init, kmeans, gap, split, eval.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::semantic_gap;
use crate::cluster::{self, KMeansParams};
use crate::corpus::{self, read_tensor, ModalityFeatures};
use crate::error::{Error, Result};
use crate::eval::{
    self, split_cold_start, split_random, EvalSplit, Metric, Projection, RankingMetrics, RefModelConfig,
    UserInitMode,
};
use crate::init::{self, InitConfig, UserInit, WeightingStrategy, ZeroDegreeFallback};
use crate::manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sgur", version, about = "Training-free user embedding initialization from item features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build initialized user tables for every modality and seed.
    Init(InitArgs),
    /// Cluster one feature file and persist the model.
    Kmeans(KmeansArgs),
    /// Compare user and item row-norm distributions.
    Gap(GapArgs),
    /// Split an interaction file into train/val/test.
    Split(SplitArgs),
    /// Train the reference model on a split and report ranking metrics.
    Eval(EvalArgs),
}

/// `name=value` flag argument.
#[derive(Debug, Clone)]
struct Keyed<T> {
    key: String,
    value: T,
}

impl<T: FromStr> FromStr for Keyed<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (key, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
        if key.is_empty() {
            return Err(format!("empty name in {s:?}"));
        }
        let value = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
        Ok(Keyed {
            key: key.to_owned(),
            value,
        })
    }
}

#[derive(Debug, Args)]
struct InitArgs {
    /// Tab-separated `user<TAB>item` file.
    #[arg(long)]
    interactions: PathBuf,
    /// Item features as MODALITY=PATH (SGUR tensor, or CSV by extension); repeatable.
    #[arg(long = "features", required = true)]
    features: Vec<Keyed<PathBuf>>,
    /// Cluster count, either a bare number for all modalities or MODALITY=K; repeatable.
    #[arg(long = "k")]
    k: Vec<String>,
    #[arg(long, default_value_t = init::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value = "item-degree")]
    weighting: String,
    /// Comma-separated K-Means seeds; one output set per seed.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value = "global-mean")]
    fallback: String,
    #[arg(long, default_value_t = cluster::DEFAULT_MAX_ITERS)]
    kmeans_max_iters: usize,
    #[arg(long, default_value_t = cluster::DEFAULT_TOL)]
    kmeans_tol: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    #[arg(long)]
    features: PathBuf,
    /// Modality label; defaults to the feature file's stem.
    #[arg(long)]
    modality: Option<String>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = cluster::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = cluster::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct GapArgs {
    /// User embedding tensor.
    #[arg(long)]
    users: PathBuf,
    /// Item embedding tensor.
    #[arg(long)]
    items: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Where to write the histogram CSV.
    #[arg(long, default_value = "gap_histogram.csv")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitMode {
    Random,
    Coldstart,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long, value_enum)]
    mode: SplitMode,
    /// train,val,test proportions for random mode.
    #[arg(long, default_value = "0.8,0.1,0.1", value_delimiter = ',')]
    ratios: Vec<f64>,
    /// Fraction of items withheld in coldstart mode.
    #[arg(long, default_value_t = 0.2)]
    cold_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProjectionArg {
    Identity,
    Truncate,
    Gaussian,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory written by `sgur split`.
    #[arg(long)]
    split: PathBuf,
    /// Item feature tensor used to initialize the item table.
    #[arg(long)]
    features: PathBuf,
    /// `random`, or a path to a user init tensor.
    #[arg(long, default_value = "random")]
    init: String,
    #[arg(long, default_value = "5,10", value_delimiter = ',')]
    ks: Vec<usize>,
    /// Comma-separated training seeds; metrics are averaged across them.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 32)]
    embed_dim: usize,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    #[arg(long, default_value_t = 20)]
    patience: usize,
    #[arg(long, default_value_t = 1)]
    negatives: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, value_enum, default_value = "identity")]
    projection: ProjectionArg,
    /// Seed of the Gaussian projection.
    #[arg(long, default_value_t = 0)]
    projection_seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Parses `args` (including the program name), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match cli.command {
        Command::Init(a) => cmd_init(a, command_line),
        Command::Kmeans(a) => cmd_kmeans(a, command_line),
        Command::Gap(a) => cmd_gap(a),
        Command::Split(a) => cmd_split(a, command_line),
        Command::Eval(a) => cmd_eval(a, command_line),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

/// Sizes the global rayon pool from `SGUR_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("SGUR_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn init_config(a: &InitArgs) -> Result<InitConfig> {
    let mut config = InitConfig {
        lambda: a.lambda,
        weighting: a.weighting.parse::<WeightingStrategy>()?,
        seeds: a.seeds.clone(),
        kmeans_max_iters: a.kmeans_max_iters,
        kmeans_tol: a.kmeans_tol,
        fallback: a.fallback.parse::<ZeroDegreeFallback>()?,
        ..InitConfig::default()
    };
    for arg in &a.k {
        if let Ok(k) = arg.parse::<usize>() {
            config.default_k = k;
            continue;
        }
        let keyed: Keyed<usize> = arg.parse().map_err(|e: String| Error::param(format!("--k {e}")))?;
        config.k_per_modality.insert(keyed.key, keyed.value);
    }
    config.validate()?;
    Ok(config)
}

fn cmd_init(a: InitArgs, command_line: Vec<String>) -> Result<()> {
    let config = init_config(&a)?;
    let (graph, vocab) = corpus::load_interactions(&a.interactions)?;
    let mut features = Vec::new();
    for f in &a.features {
        let loaded = corpus::load_features(&f.value, &f.key)?;
        loaded.check_items(&graph)?;
        features.push(loaded);
    }
    let unknown: Vec<&String> = config
        .k_per_modality
        .keys()
        .filter(|m| !features.iter().any(|f| f.modality() == m.as_str()))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::param(format!("--k names unknown modalities {unknown:?}")));
    }

    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(command_line, serde_json::to_value(&config).unwrap());
    manifest.add_input(&a.interactions)?;
    for f in &a.features {
        manifest.add_input(&f.value)?;
    }

    let started = Instant::now();
    let inits = init::init_users_multiseed(&graph, &features, &config)?;
    let init_seconds = started.elapsed().as_secs_f64();

    for ui in &inits {
        let dir = a.out_dir.join(format!("seed-{}", ui.seed));
        create_dir(&dir)?;
        for path in ui.write(&dir)? {
            manifest.add_output(&path)?;
        }
    }
    for (name, map) in [("users.vocab", &vocab.users), ("items.vocab", &vocab.items)] {
        let path = a.out_dir.join(name);
        map.write(&path)?;
        manifest.add_output(&path)?;
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&a.out_dir.join("manifest.json"))?;

    println!(
        "initialized {} users x {} modalities x {} seed(s) (K={}, lambda={}, weighting={})",
        graph.num_users(),
        features.len(),
        inits.len(),
        describe_k(&config, &features),
        config.lambda,
        config.weighting
    );
    println!("initialization time: {init_seconds:.3} s");
    Ok(())
}

fn describe_k(config: &InitConfig, features: &[ModalityFeatures]) -> String {
    features
        .iter()
        .map(|f| format!("{}:{}", f.modality(), config.k_for(f.modality())))
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_kmeans(a: KmeansArgs, command_line: Vec<String>) -> Result<()> {
    let modality = a.modality.clone().unwrap_or_else(|| {
        a.features
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "features".to_owned())
    });
    let features = corpus::load_features(&a.features, &modality)?;
    let params = KMeansParams {
        k: a.k,
        seed: a.seed,
        max_iters: a.max_iters,
        tol: a.tol,
        parallel: true,
    };
    let started = Instant::now();
    let model = cluster::kmeans(&features, &params)?;
    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(
        command_line,
        json!({"modality": modality, "k": a.k, "seed": a.seed, "max_iters": a.max_iters, "tol": a.tol}),
    );
    manifest.add_input(&a.features)?;
    for path in model.save(&a.out_dir, &format!("kmeans.{modality}"))? {
        manifest.add_output(&path)?;
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&a.out_dir.join("manifest.json"))?;
    println!("objective={}", model.objective);
    println!("iterations={}", model.iterations_run);
    Ok(())
}

fn cmd_gap(a: GapArgs) -> Result<()> {
    let users = read_tensor(&a.users)?;
    let items = read_tensor(&a.items)?;
    let stats = semantic_gap(&users, &items, a.bins)?;
    print!("{}", stats.to_key_value());
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_text(&a.out, &stats.histogram_csv())
}

fn cmd_split(a: SplitArgs, command_line: Vec<String>) -> Result<()> {
    let (graph, vocab) = corpus::load_interactions(&a.interactions)?;
    let split = match a.mode {
        SplitMode::Random => {
            let [tr, va, te] = a.ratios[..] else {
                return Err(Error::param("--ratios takes exactly three values"));
            };
            split_random(&graph, (tr, va, te), a.seed)?
        }
        SplitMode::Coldstart => split_cold_start(&graph, a.cold_fraction, a.seed)?,
    };
    create_dir(&a.out_dir)?;
    let config = match a.mode {
        SplitMode::Random => json!({"mode": "random", "ratios": a.ratios, "seed": a.seed}),
        SplitMode::Coldstart => json!({"mode": "coldstart", "cold_fraction": a.cold_fraction, "seed": a.seed}),
    };
    let mut manifest = RunManifest::new(command_line, config);
    manifest.add_input(&a.interactions)?;
    for path in split.write(&a.out_dir)? {
        manifest.add_output(&path)?;
    }
    for (name, map) in [("users.vocab", &vocab.users), ("items.vocab", &vocab.items)] {
        let path = a.out_dir.join(name);
        map.write(&path)?;
        manifest.add_output(&path)?;
    }
    manifest.write(&a.out_dir.join("manifest.json"))?;
    println!(
        "train={} val={} test={} cold_items={}",
        split.train.len(),
        split.val.len(),
        split.test.len(),
        split.cold_items.len()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs, command_line: Vec<String>) -> Result<()> {
    if a.ks.is_empty() || a.ks.contains(&0) {
        return Err(Error::param("--ks must list positive cutoffs"));
    }
    if a.seeds.is_empty() {
        return Err(Error::param("--seeds must not be empty"));
    }
    let split = EvalSplit::read(&a.split)?;
    let items = read_tensor(&a.features)?;
    items.ensure_finite()?;
    let init = if a.init == "random" {
        UserInitMode::Random
    } else {
        let users = read_tensor(Path::new(&a.init))?;
        users.ensure_finite()?;
        UserInitMode::Provided(users)
    };
    let projection = match a.projection {
        ProjectionArg::Identity => Projection::Identity,
        ProjectionArg::Truncate => Projection::Truncate,
        ProjectionArg::Gaussian => Projection::Gaussian { seed: a.projection_seed },
    };

    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(
        command_line,
        json!({
            "init": a.init, "ks": a.ks, "seeds": a.seeds, "embed_dim": a.embed_dim,
            "layers": a.layers, "lr": a.lr, "batch_size": a.batch_size, "max_epochs": a.max_epochs,
            "patience": a.patience, "negatives": a.negatives, "l2": a.l2,
            "projection": format!("{projection:?}"),
        }),
    );
    for part in ["train.tsv", "val.tsv", "test.tsv"] {
        manifest.add_input(&a.split.join(part))?;
    }
    manifest.add_input(&a.features)?;
    if a.init != "random" {
        manifest.add_input(Path::new(&a.init))?;
    }

    let started = Instant::now();
    let mut runs = Vec::new();
    for &seed in &a.seeds {
        let config = RefModelConfig {
            embed_dim: a.embed_dim,
            num_layers: a.layers,
            learning_rate: a.lr,
            batch_size: a.batch_size,
            max_epochs: a.max_epochs,
            patience: a.patience,
            negatives_per_positive: a.negatives,
            l2_reg: a.l2,
            seed,
            projection,
            init: init.clone(),
            ..RefModelConfig::default()
        };
        let outcome = eval::train_reference_model(&split, &items, &config)?;
        let metrics = eval::evaluate(&outcome.embeddings, &split, &a.ks)?;
        let trace_path = a.out_dir.join(format!("loss_trace.seed-{seed}.csv"));
        write_text(&trace_path, &outcome.loss_csv())?;
        manifest.add_output(&trace_path)?;
        println!(
            "seed {seed}: best_epoch={} epochs_run={} {}",
            outcome.best_epoch,
            outcome.epochs_run,
            a.ks.iter()
                .map(|k| format!("recall@{k}={:.4} ndcg@{k}={:.4}", metrics.recall[k], metrics.ndcg[k]))
                .collect::<Vec<_>>()
                .join(" ")
        );
        runs.push(metrics);
    }
    let summary = RankingMetrics::new(runs);
    let metrics_path = a.out_dir.join("metrics.csv");
    write_text(&metrics_path, &summary.to_csv())?;
    manifest.add_output(&metrics_path)?;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&a.out_dir.join("manifest.json"))?;
    for metric in [Metric::Recall, Metric::Ndcg] {
        for &k in &a.ks {
            println!(
                "{}@{k}: mean={:.4} std={:.4}",
                metric.name(),
                summary.mean(metric, k).unwrap_or(f64::NAN),
                summary.std(metric, k).unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

/// Where `sgur init` writes the table for `modality` under `seed`.
pub fn user_init_path(out_dir: &Path, seed: u64, modality: &str) -> PathBuf {
    out_dir.join(format!("seed-{seed}")).join(UserInit::file_name(modality))
}
