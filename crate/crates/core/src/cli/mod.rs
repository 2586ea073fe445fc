//! Batch front end: `simulate`, `fit`, `evaluate`, `ppc`, `compare` and
//! `elicit`.
//!
//! Every subcommand resolves a [`RunConfig`] from an optional JSON file
//! (`--config`, which also accepts a `manifest.json` written by an earlier
//! run) overridden by explicit flags, and writes `manifest.json` next to its
//! outputs. Exit codes: 0 success, 2 usage or configuration error, 3
//! numerical failure, 1 anything else.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmodels::ModelKind;
use crate::error::{Error, Result};
use crate::evaluation::{fit_report, ppc, FitReport};
use crate::graph::{load_network, LoadOptions, Network, NetworkFormat};
use crate::partition::Partition;
use crate::priors::{elicit, ClusteringPrior, PriorKind};
use crate::sampler::{run_chain, run_chain_with_rng, ChainConfig, PosteriorSamples};
use crate::synthgen::{generate, ScenarioSpec};

pub const THREADS_ENV: &str = "BLOCKFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "blockforge",
    version,
    about = "Bayesian community detection with class-level latent space block models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-partition benchmark network.
    Simulate(SimulateArgs),
    /// Run one chain and write checkpoints and the trace.
    Fit(FitArgs),
    /// Summarize a fit into a report row.
    Evaluate(EvaluateArgs),
    /// Posterior predictive checks of a fit.
    Ppc(PpcArgs),
    /// Fit and evaluate a grid of model/prior combinations.
    Compare(CompareArgs),
    /// Print elicited prior hyperparameters for a network.
    Elicit(ElicitArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration or a previous manifest.json.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NetworkArgs {
    #[arg(short = 'i', long)]
    pub input: Option<PathBuf>,
    /// edge-list or dense-matrix.
    #[arg(long)]
    pub format: Option<NetworkFormat>,
    /// Node count for edge lists without a `# n=` line.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Skip the first data line of an edge list.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// cm, cdm or cbm.
    #[arg(long)]
    pub model: Option<String>,
    /// Latent dimension of the hybrid models.
    #[arg(long = "Q")]
    pub q: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PriorArgs {
    /// dm, dp, pyp or gnp.
    #[arg(long)]
    pub prior: Option<PriorKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of labels of the DM prior.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Elicit hyperparameters from the network.
    #[arg(long)]
    pub auto: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Retained draws.
    #[arg(long)]
    pub samples: Option<usize>,
    /// 100,000 burn-in sweeps, thinning 50, 10,000 draws.
    #[arg(long)]
    pub paper_scale: bool,
    /// Hold the hybrid intercept prior at N(0, 3).
    #[arg(long)]
    pub fixed_eta_variance: bool,
    /// Initial number of clusters.
    #[arg(long = "init-K")]
    pub init_k: Option<usize>,
    /// Visit nodes in random order.
    #[arg(long)]
    pub random_scan: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Preset scenario, 1 or 2.
    #[arg(long)]
    pub scenario: Option<u32>,
    /// Custom node count (with --K).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Custom community count (with --nodes).
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Output directory of a `fit` run.
    #[arg(long)]
    pub fit_dir: Option<PathBuf>,
    /// True partition, one CSV line of labels.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PpcArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long)]
    pub fit_dir: Option<PathBuf>,
    /// Replicate networks per retained draw.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long = "Q")]
    pub q: Option<usize>,
    /// DM label count.
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// `full` (3 models x 4 priors) or a list such as `cm:dp,cdm:dp`.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ElicitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// One prior; all four when omitted.
    #[arg(long)]
    pub prior: Option<PriorKind>,
    #[arg(long = "K")]
    pub k: Option<usize>,
}

/// How the clustering prior is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub prior: PriorKind,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub auto: bool,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            prior: PriorKind::Dp,
            alpha: None,
            sigma: None,
            gamma: None,
            k: None,
            auto: true,
        }
    }
}

impl PriorSpec {
    pub fn resolve(&self, g: &Network) -> Result<ClusteringPrior> {
        if self.auto {
            return elicit(self.prior, g.n(), g.mean_degree(), self.k);
        }
        let need = |x: Option<f64>, name: &str| {
            x.ok_or_else(|| {
                Error::InvalidConfig(format!("prior {} needs --{name} (or --auto)", self.prior))
            })
        };
        let prior = match self.prior {
            PriorKind::Dm => ClusteringPrior::Dm {
                alpha: need(self.alpha, "alpha")?,
                k: self
                    .k
                    .ok_or_else(|| Error::InvalidConfig("prior dm needs --K (or --auto)".into()))?,
            },
            PriorKind::Dp => ClusteringPrior::Dp {
                alpha: need(self.alpha, "alpha")?,
            },
            PriorKind::Pyp => ClusteringPrior::Pyp {
                alpha: need(self.alpha, "alpha")?,
                sigma: need(self.sigma, "sigma")?,
            },
            PriorKind::Gnp => ClusteringPrior::Gnp {
                gamma: need(self.gamma, "gamma")?,
            },
        };
        prior.validate()?;
        Ok(prior)
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub format: NetworkFormat,
    pub nodes: Option<usize>,
    pub header: bool,
    pub model: String,
    #[serde(rename = "Q")]
    pub q: usize,
    pub prior: PriorSpec,
    pub chain: ChainConfig,
    pub truth: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub fit_dir: Option<PathBuf>,
    pub scenario: Option<u32>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub replicates: usize,
    pub grid: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            format: NetworkFormat::EdgeList,
            nodes: None,
            header: false,
            model: "cdm".into(),
            q: ModelKind::DEFAULT_Q,
            prior: PriorSpec::default(),
            chain: ChainConfig::default(),
            truth: None,
            output: None,
            fit_dir: None,
            scenario: None,
            k: None,
            replicates: 1,
            grid: "full".into(),
        }
    }
}

impl RunConfig {
    /// Reads a config file; a manifest is unwrapped to its `config`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) if value.get("artifacts").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        ModelKind::parse(&self.model, self.q)
    }

    pub fn load_network(&self) -> Result<Network> {
        let input = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no input network (-i)".into()))?;
        load_network(
            input,
            self.format,
            LoadOptions {
                n: self.nodes,
                header: self.header,
            },
        )
    }

    pub fn output_dir(&self) -> Result<PathBuf> {
        let out = self
            .output
            .clone()
            .ok_or_else(|| Error::InvalidConfig("no output directory (-o)".into()))?;
        fs::create_dir_all(&out)?;
        Ok(out)
    }

    pub fn load_truth(&self) -> Result<Option<Partition>> {
        self.truth
            .as_ref()
            .map(|p| Partition::parse_csv(&fs::read_to_string(p)?))
            .transpose()
    }

    fn apply_common(&mut self, a: &CommonArgs) {
        if let Some(o) = &a.output {
            self.output = Some(o.clone());
        }
        if let Some(s) = a.seed {
            self.chain.seed = s;
        }
    }

    fn apply_network(&mut self, a: &NetworkArgs) {
        if let Some(i) = &a.input {
            self.input = Some(i.clone());
        }
        if let Some(f) = a.format {
            self.format = f;
        }
        if let Some(n) = a.nodes {
            self.nodes = Some(n);
        }
        self.header |= a.header;
    }

    fn apply_model(&mut self, a: &ModelArgs) {
        if let Some(m) = &a.model {
            self.model = m.clone();
        }
        if let Some(q) = a.q {
            self.q = q;
        }
    }

    fn apply_prior(&mut self, a: &PriorArgs) {
        let p = &mut self.prior;
        if let Some(kind) = a.prior {
            p.prior = kind;
        }
        let explicit = a.alpha.is_some() || a.sigma.is_some() || a.gamma.is_some();
        p.alpha = a.alpha.or(p.alpha);
        p.sigma = a.sigma.or(p.sigma);
        p.gamma = a.gamma.or(p.gamma);
        p.k = a.k.or(p.k);
        if explicit {
            p.auto = false;
        }
        if a.auto {
            p.auto = true;
        }
    }

    fn apply_chain(&mut self, a: &ChainArgs) {
        let c = &mut self.chain;
        if a.paper_scale {
            let p = ChainConfig::paper_scale();
            c.burn_in = p.burn_in;
            c.thin = p.thin;
            c.n_samples = p.n_samples;
        }
        if let Some(b) = a.burnin {
            c.burn_in = b;
        }
        if let Some(t) = a.thin {
            c.thin = t;
        }
        if let Some(s) = a.samples {
            c.n_samples = s;
        }
        if let Some(k) = a.init_k {
            c.init_k = Some(k);
        }
        c.fixed_eta_variance |= a.fixed_eta_variance;
        c.random_scan |= a.random_scan;
    }
}

/// Written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub artifacts: Vec<String>,
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, artifacts: &[PathBuf]) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        seed: cfg.chain.seed,
        config: cfg.clone(),
        artifacts: artifacts
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_common(common);
    Ok(cfg)
}

/// Model and prior of a fit, stored as `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub model: ModelKind,
    pub prior: ClusteringPrior,
    pub n: usize,
    pub final_step_eta: f64,
    pub final_step_u: f64,
}

/// Writes `checkpoints.jsonl`, `trace.csv` and `fit.json`.
pub fn write_fit(dir: &Path, samples: &PosteriorSamples) -> Result<Vec<PathBuf>> {
    let paths = vec![
        dir.join("checkpoints.jsonl"),
        dir.join("trace.csv"),
        dir.join("fit.json"),
    ];
    let mut buf = Vec::new();
    samples.write_checkpoints(&mut buf)?;
    fs::write(&paths[0], buf)?;
    let mut buf = Vec::new();
    samples.write_trace(&mut buf)?;
    fs::write(&paths[1], buf)?;
    let meta = FitMeta {
        model: samples.model,
        prior: samples.prior,
        n: samples.n,
        final_step_eta: samples.final_step_eta,
        final_step_u: samples.final_step_u,
    };
    fs::write(&paths[2], serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(paths)
}

/// Reads the output of [`write_fit`]. The trace is not restored.
pub fn read_fit(dir: &Path) -> Result<PosteriorSamples> {
    let meta: FitMeta = serde_json::from_str(&fs::read_to_string(dir.join("fit.json"))?)?;
    let draws =
        PosteriorSamples::read_checkpoints(&fs::read_to_string(dir.join("checkpoints.jsonl"))?)?;
    Ok(PosteriorSamples {
        model: meta.model,
        prior: meta.prior,
        n: meta.n,
        draws,
        trace: Vec::new(),
        final_step_eta: meta.final_step_eta,
        final_step_u: meta.final_step_u,
    })
}

fn simulate_cmd(a: &SimulateArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.scenario = a.scenario.or(cfg.scenario);
    cfg.nodes = a.nodes.or(cfg.nodes);
    cfg.k = a.k.or(cfg.k);
    let seed = cfg.chain.seed;
    let spec = match (cfg.nodes, cfg.k, cfg.scenario) {
        (Some(n), Some(k), _) => ScenarioSpec::planted(n, k, seed),
        (None, None, Some(s)) => ScenarioSpec::preset(s, seed)?,
        (None, None, None) => ScenarioSpec::preset(1, seed)?,
        _ => {
            return Err(Error::InvalidConfig(
                "give both --nodes and --K, or --scenario".into(),
            ))
        }
    };
    let dir = cfg.output_dir()?;
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let paths = syn.write_to(&dir)?;
    write_manifest(&dir, "simulate", &cfg, &paths)
}

fn fit_cmd(a: &FitArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.apply_network(&a.network);
    cfg.apply_model(&a.model);
    cfg.apply_prior(&a.prior);
    cfg.apply_chain(&a.chain);
    let kind = cfg.model_kind()?;
    cfg.chain.validate()?;
    let g = cfg.load_network()?;
    let prior = cfg.prior.resolve(&g)?;
    let dir = cfg.output_dir()?;
    let samples = run_chain(kind, &g, prior, &cfg.chain)?;
    let paths = write_fit(&dir, &samples)?;
    write_manifest(&dir, "fit", &cfg, &paths)
}

/// Fills network settings from the fit's manifest when not given.
fn inherit_network(cfg: &mut RunConfig) -> Result<()> {
    if cfg.input.is_some() {
        return Ok(());
    }
    if let Some(dir) = &cfg.fit_dir {
        let m = dir.join("manifest.json");
        if m.exists() {
            let fit = RunConfig::load(&m)?;
            cfg.input = fit.input;
            cfg.format = fit.format;
            cfg.nodes = fit.nodes;
            cfg.header = fit.header;
        }
    }
    Ok(())
}

fn fit_dir(cfg: &RunConfig) -> Result<&Path> {
    cfg.fit_dir
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("no fit directory (--fit-dir)".into()))
}

fn write_report(dir: &Path, stem: &str, reports: &[(String, FitReport)]) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    let mut body = format!("run_id,{}\n", FitReport::CSV_HEADER);
    for (id, r) in reports {
        body.push_str(&format!("{id},{}\n", r.csv_row()));
    }
    fs::write(&csv, body)?;
    let rows: Vec<&FitReport> = reports.iter().map(|r| &r.1).collect();
    fs::write(&json, serde_json::to_string_pretty(&rows)? + "\n")?;
    Ok(vec![csv, json])
}

fn evaluate_cmd(a: &EvaluateArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.fit_dir = a.fit_dir.clone().or(cfg.fit_dir);
    cfg.truth = a.truth.clone().or(cfg.truth);
    cfg.apply_network(&a.network);
    inherit_network(&mut cfg)?;
    let g = cfg.load_network()?;
    let samples = read_fit(fit_dir(&cfg)?)?;
    let truth = cfg.load_truth()?;
    let report = fit_report(&samples, &g, truth.as_ref())?;
    let dir = cfg.output_dir()?;
    let paths = write_report(&dir, "report", &[(run_id(cfg.chain.seed, 0), report)])?;
    write_manifest(&dir, "evaluate", &cfg, &paths)
}

fn ppc_cmd(a: &PpcArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.fit_dir = a.fit_dir.clone().or(cfg.fit_dir);
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    cfg.apply_network(&a.network);
    inherit_network(&mut cfg)?;
    let g = cfg.load_network()?;
    let samples = read_fit(fit_dir(&cfg)?)?;
    let report = ppc(&samples, &g, cfg.chain.seed, cfg.replicates)?;
    let dir = cfg.output_dir()?;
    let paths = vec![
        dir.join("ppc.csv"),
        dir.join("ppc.json"),
        dir.join("ppc_long.csv"),
    ];
    fs::write(&paths[0], report.to_csv())?;
    fs::write(&paths[1], serde_json::to_string_pretty(&report)? + "\n")?;
    fs::write(&paths[2], report.to_long_csv())?;
    write_manifest(&dir, "ppc", &cfg, &paths)
}

/// Model/prior cells of a comparison grid.
pub fn parse_grid(grid: &str, q: usize) -> Result<Vec<(ModelKind, PriorKind)>> {
    if grid == "full" {
        let models = [ModelKind::Cm, ModelKind::Cdm { q }, ModelKind::Cbm { q }];
        return Ok(models
            .iter()
            .flat_map(|&m| PriorKind::ALL.iter().map(move |&p| (m, p)))
            .collect());
    }
    grid.split(',')
        .map(|cell| {
            let (m, p) = cell.split_once(':').ok_or_else(|| {
                Error::InvalidConfig(format!("grid cell `{cell}` is not model:prior"))
            })?;
            Ok((ModelKind::parse(m.trim(), q)?, p.trim().parse()?))
        })
        .collect()
}

fn run_id(seed: u64, cell: usize) -> String {
    format!("{seed:016x}-{cell:02}")
}

/// Independent generator for grid cell `cell`.
pub fn cell_rng(seed: u64, cell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64 + 1);
    rng
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("{THREADS_ENV}={v} is not a positive integer"))
            }),
        Err(_) => Ok(None),
    }
}

/// Fits and evaluates every cell; rows come back in grid order.
pub fn run_grid(
    cells: &[(ModelKind, PriorKind)],
    g: &Network,
    truth: Option<&Partition>,
    chain: &ChainConfig,
    k_dm: Option<usize>,
) -> Result<Vec<(String, FitReport)>> {
    let job =
        |(idx, &(kind, pk)): (usize, &(ModelKind, PriorKind))| -> Result<(String, FitReport)> {
            let prior = elicit(pk, g.n(), g.mean_degree(), k_dm)?;
            let samples = run_chain_with_rng(kind, g, prior, chain, cell_rng(chain.seed, idx))?;
            Ok((run_id(chain.seed, idx), fit_report(&samples, g, truth)?))
        };
    let run = || {
        cells
            .par_iter()
            .enumerate()
            .map(job)
            .collect::<Result<Vec<_>>>()
    };
    match thread_cap()? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn compare_cmd(a: &CompareArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.apply_network(&a.network);
    cfg.apply_chain(&a.chain);
    if let Some(q) = a.q {
        cfg.q = q;
    }
    cfg.prior.k = a.k.or(cfg.prior.k);
    cfg.truth = a.truth.clone().or(cfg.truth);
    if let Some(grid) = &a.grid {
        cfg.grid = grid.clone();
    }
    cfg.chain.validate()?;
    let cells = parse_grid(&cfg.grid, cfg.q)?;
    let g = cfg.load_network()?;
    let truth = cfg.load_truth()?;
    let dir = cfg.output_dir()?;
    let rows = run_grid(&cells, &g, truth.as_ref(), &cfg.chain, cfg.prior.k)?;
    let paths = write_report(&dir, "compare", &rows)?;
    write_manifest(&dir, "compare", &cfg, &paths)
}

fn elicit_cmd(a: &ElicitArgs) -> Result<()> {
    let mut cfg = base_config(&a.common)?;
    cfg.apply_network(&a.network);
    if let Some(p) = a.prior {
        cfg.prior.prior = p;
    }
    cfg.prior.k = a.k.or(cfg.prior.k);
    let g = cfg.load_network()?;
    let kinds: Vec<PriorKind> = match a.prior {
        Some(p) => vec![p],
        None => PriorKind::ALL.to_vec(),
    };
    let priors = kinds
        .iter()
        .map(|&k| elicit(k, g.n(), g.mean_degree(), cfg.prior.k))
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for p in &priors {
        text.push_str(&serde_json::to_string(p)?);
        text.push('\n');
    }
    print!("{text}");
    if cfg.output.is_some() {
        let dir = cfg.output_dir()?;
        let path = dir.join("elicit.jsonl");
        fs::write(&path, &text)?;
        write_manifest(&dir, "elicit", &cfg, &[path])?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Ppc(a) => ppc_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Elicit(a) => elicit_cmd(a),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidPrior(_) | Error::Json(_) => 2,
        Error::Numerical(_) => 3,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("blockforge: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_full_has_twelve_cells() {
        let cells = parse_grid("full", 4).unwrap();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[5], (ModelKind::Cdm { q: 4 }, PriorKind::Dp));
        let two = parse_grid("cm:dp, cdm:gnp", 2).unwrap();
        assert_eq!(
            two,
            vec![
                (ModelKind::Cm, PriorKind::Dp),
                (ModelKind::Cdm { q: 2 }, PriorKind::Gnp)
            ]
        );
        assert!(parse_grid("cm", 2).is_err());
    }

    #[test]
    fn prior_spec_needs_params_unless_auto() {
        let g = Network::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let spec = PriorSpec {
            auto: false,
            ..PriorSpec::default()
        };
        assert!(matches!(spec.resolve(&g), Err(Error::InvalidConfig(_))));
        let spec = PriorSpec {
            alpha: Some(2.0),
            ..spec
        };
        assert_eq!(
            spec.resolve(&g).unwrap(),
            ClusteringPrior::Dp { alpha: 2.0 }
        );
    }

    #[test]
    fn flags_override_config() {
        let mut cfg = RunConfig::default();
        cfg.apply_prior(&PriorArgs {
            prior: Some(PriorKind::Pyp),
            alpha: Some(1.0),
            sigma: Some(0.2),
            ..PriorArgs::default()
        });
        assert!(!cfg.prior.auto);
        cfg.apply_chain(&ChainArgs {
            paper_scale: true,
            thin: Some(5),
            ..ChainArgs::default()
        });
        assert_eq!((cfg.chain.burn_in, cfg.chain.thin), (100_000, 5));
    }

    #[test]
    fn config_roundtrip_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            model: "cbm".into(),
            q: 2,
            ..RunConfig::default()
        };
        write_manifest(dir.path(), "fit", &cfg, &[]).unwrap();
        let back = RunConfig::load(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["blockforge", "frobnicate"]), 2);
        assert_eq!(
            main_with_args(["blockforge", "fit", "--model", "cm", "--prior", "dp"]),
            2
        );
    }
}
