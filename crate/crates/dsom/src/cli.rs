//! The `dsom` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index;

use dsom_core::baseline::{batch_som_epoch, online_som_train, NeighborhoodMetric, OnlineSomConfig};
use dsom_core::classify::{evaluate, label_neurons_with, AccuracyReport, LabelStrategy, NeuronLabels};
use dsom_core::dataset::Dataset;
use dsom_core::kernel::{compute_kernel, GridCoord, DEFAULT_DIFF_COEFF};
use dsom_core::linalg;
use dsom_core::rng::{stream_rng, Stream};
use dsom_core::trainer::{
    default_schedule, init_codebook, spherical_kmeans_from, train_from, Codebook, InitStrategy, StopReason,
    TrainConfig, TrainHistory, DEFAULT_EPSILON, DEFAULT_MAX_INNER_ITERS,
};
use dsom_core::viz::{class_region_map, correlation_map, neuron_tiles};

use crate::data::{self, Loaded, Source, SyntheticSpec};
use crate::manifest::{ConfigEcho, InputFile, PhaseRecord, RunManifest};
use crate::{config, pgm, text};

#[derive(Debug, Parser)]
#[command(name = "dsom", version, about = "Diffusion self-organizing maps on the unit hypersphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a D-SOM codebook.
    Train(TrainCmd),
    /// Write a (shifted) diffusion kernel.
    Kernel(KernelCmd),
    /// Label neurons and report classification accuracy.
    Classify(ClassifyCmd),
    /// Render correlation maps, class regions and neuron tiles.
    Viz(VizCmd),
    /// Compare D-SOM against the classical SOMs and spherical K-means.
    Bench(BenchCmd),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the numeric kernels (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// `key = value` file of flag defaults; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// IDX image file.
    #[arg(long, conflicts_with = "synthetic")]
    pub images: Option<PathBuf>,
    /// IDX label file matching --images.
    #[arg(long, requires = "images")]
    pub labels: Option<PathBuf>,
    /// Generated data, e.g. `blobs:4x50x16` or `blobs:4x50x16:50`.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Option<SyntheticSpec>,
    /// Use only the first N IDX samples.
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
}

impl DataArgs {
    fn source(&self) -> Result<Source> {
        match (&self.images, &self.synthetic) {
            (Some(images), None) => {
                Ok(Source::Idx { images: images.clone(), labels: self.labels.clone(), limit: self.limit })
            }
            (None, Some(spec)) => Ok(Source::Synthetic(*spec)),
            _ => bail!("give either --images or --synthetic"),
        }
    }
}

#[derive(Debug, Args)]
pub struct HeldOutArgs {
    /// IDX images to evaluate on (default: the training data).
    #[arg(long, requires = "test_labels")]
    pub test_images: Option<PathBuf>,
    #[arg(long, requires = "test_images")]
    pub test_labels: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Gaussian,
    Samples,
}

impl From<InitArg> for InitStrategy {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Gaussian => InitStrategy::RandomGaussian,
            InitArg::Samples => InitStrategy::SampleDraw,
        }
    }
}

pub fn init_name(s: InitStrategy) -> &'static str {
    match s {
        InitStrategy::RandomGaussian => "gaussian",
        InitStrategy::SampleDraw => "samples",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    MaxCorrelation,
    Majority,
}

impl From<StrategyArg> for LabelStrategy {
    fn from(a: StrategyArg) -> Self {
        match a {
            StrategyArg::MaxCorrelation => LabelStrategy::MaxCorrelation,
            StrategyArg::Majority => LabelStrategy::MajorityVote,
        }
    }
}

fn parse_side(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v < 2 {
        return Err("grid side must be at least 2".into());
    }
    Ok(v)
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    /// Grid side L; the map has L*L neurons.
    #[arg(long, value_parser = parse_side)]
    pub grid_side: usize,
    #[arg(long, default_value_t = DEFAULT_DIFF_COEFF)]
    pub diff_coeff: f32,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Diffusion steps per phase: `A..B` counts down from A to B, or a
    /// comma list. `L/2` stands for half the grid side.
    #[arg(long, default_value = "L/2..2")]
    pub schedule: String,
    #[arg(long, value_enum, default_value_t = InitArg::Gaussian)]
    pub init: InitArg,
    #[arg(long, default_value_t = DEFAULT_MAX_INNER_ITERS)]
    pub max_inner_iters: usize,
}

impl TrainFlags {
    fn config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            grid_side: self.grid_side,
            diff_coeff: self.diff_coeff,
            epsilon: self.epsilon,
            max_inner_iters: self.max_inner_iters,
            seed,
            init: self.init.into(),
            schedule: parse_schedule(&self.schedule, self.grid_side)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn schedule_term(t: &str, side: usize) -> Result<usize> {
    match t.trim() {
        "L" => Ok(side),
        "L/2" => Ok(side / 2),
        n => n.parse().with_context(|| format!("bad schedule entry {n:?}")),
    }
}

/// Expands a schedule string for grid side `side`.
pub fn parse_schedule(spec: &str, side: usize) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec.replace(' ', "") == "L/2..2" {
        return Ok(default_schedule(side));
    }
    if let Some((a, b)) = spec.split_once("..") {
        let (hi, lo) = (schedule_term(a, side)?, schedule_term(b, side)?);
        if hi < lo {
            bail!("schedule {spec:?} must count down");
        }
        return Ok((lo..=hi).rev().collect());
    }
    spec.split(',').map(|t| schedule_term(t, side)).collect()
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct KernelCmd {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_side)]
    pub side: usize,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_DIFF_COEFF)]
    pub coeff: f32,
    /// Shift the source to grid cell `i,j`.
    #[arg(long, value_name = "I,J")]
    pub center: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyCmd {
    #[command(flatten)]
    pub common: Common,
    /// Codebook CSV written by `dsom train`.
    #[arg(long)]
    pub codebook: PathBuf,
    /// Labeled data used to name the neurons.
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub heldout: HeldOutArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::MaxCorrelation)]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args)]
pub struct VizCmd {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub codebook: PathBuf,
    /// Labeled data for class-region masks (optional).
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::MaxCorrelation)]
    pub strategy: StrategyArg,
    /// Tile edge in pixels; defaults to sqrt(d) when d is a perfect square.
    #[arg(long)]
    pub tile_side: Option<usize>,
    /// Number of randomly picked neurons in the tile montage.
    #[arg(long, default_value_t = 100)]
    pub picks: usize,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub heldout: HeldOutArgs,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Online SOM steps (default: 10 per sample).
    #[arg(long)]
    pub online_steps: Option<usize>,
    /// Batch SOM epochs, with sigma annealed geometrically from L/2 to 0.5.
    #[arg(long, default_value_t = 20)]
    pub batch_epochs: usize,
    /// Measure the online SOM neighborhood in weight space.
    #[arg(long)]
    pub weight_space: bool,
}

/// Parses `args` (including the program name), expanding `--config`.
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    use clap::CommandFactory;
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = config::expand(args).map_err(|e| {
        Cli::command().error(clap::error::ErrorKind::Io, format!("{e:#}"))
    })?;
    let cmd = Cli::command().args_override_self(true);
    let cmd = cmd.mut_subcommands(|s| s.args_override_self(true));
    let matches = cmd.try_get_matches_from(args)?;
    use clap::FromArgMatches;
    Cli::from_arg_matches(&matches)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(c) => cmd_train(c),
        Command::Kernel(c) => cmd_kernel(c),
        Command::Classify(c) => cmd_classify(c),
        Command::Viz(c) => cmd_viz(c),
        Command::Bench(c) => cmd_bench(c),
    }
}

/// Runs `f` on a pool of `threads` workers, or the default pool.
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::Stalled => "stalled",
        StopReason::IterationCap => "iteration-cap",
    }
}

/// Output of a timed training run.
pub struct TrainRun {
    pub codebook: Codebook,
    pub history: TrainHistory,
    pub phases: Vec<PhaseRecord>,
    pub seconds: f64,
}

/// Trains with per-phase wall-clock timing.
pub fn timed_train(x: &Dataset, init: Codebook, cfg: &TrainConfig) -> Result<TrainRun> {
    let start = Instant::now();
    let mut last = start;
    let mut phase_secs: Vec<(usize, f64)> = Vec::new();
    let (codebook, history) = train_from(x, init, cfg, |ev| {
        let now = Instant::now();
        let dt = (now - last).as_secs_f64();
        last = now;
        match phase_secs.last_mut() {
            Some((s, t)) if *s == ev.steps && ev.iteration > 0 => *t += dt,
            _ => phase_secs.push((ev.steps, dt)),
        }
    })?;
    let phases = history
        .phases
        .iter()
        .zip(&phase_secs)
        .map(|(p, (_, secs))| PhaseRecord {
            steps: p.steps,
            epochs: p.epochs,
            seconds: *secs,
            final_delta: p.final_delta,
            stop: stop_name(p.stop).into(),
        })
        .collect();
    Ok(TrainRun { codebook, history, phases, seconds: start.elapsed().as_secs_f64() })
}

fn history_csv(h: &TrainHistory) -> String {
    let mut out = String::from("steps,iteration,delta\n");
    for r in &h.records {
        out.push_str(&format!("{},{},{}\n", r.steps, r.iteration, text::fmt_g6(r.delta as f64)));
    }
    out
}

fn cmd_train(c: TrainCmd) -> Result<()> {
    let cfg = c.train.config(c.common.seed)?;
    let source = c.data.source()?;
    prepare_out_dir(&c.common.out_dir)?;
    let loaded = data::load(&source, c.common.seed)?;
    let x = &loaded.dataset;
    let init = init_codebook(cfg.grid_side, x.dim(), cfg.init, cfg.seed, Some(x))?;
    let run = with_threads(c.common.threads, || timed_train(x, init, &cfg))??;

    let out = &c.common.out_dir;
    let codebook_path = out.join("codebook.csv");
    let history_path = out.join("history.csv");
    let manifest_path = out.join("manifest.json");
    text::write_matrix(&codebook_path, run.codebook.weights())?;
    fs::write(&history_path, history_csv(&run.history))?;

    let mut m = RunManifest::new("train", cfg.seed);
    m.side = cfg.grid_side;
    m.d = x.dim();
    m.config = Some(ConfigEcho::from(&cfg));
    m.data = Some(loaded.summary.clone());
    m.inputs = loaded.inputs.clone();
    m.phases = run.phases;
    m.total_seconds = run.seconds;
    m.outputs = [&codebook_path, &history_path, &manifest_path].iter().map(|p| p.display().to_string()).collect();
    m.write(&manifest_path)?;

    for p in &m.phases {
        println!(
            "T={:<3} epochs={:<4} delta={:<12} {:>8.3}s  {}",
            p.steps,
            p.epochs,
            text::fmt_g6(p.final_delta as f64),
            p.seconds,
            p.stop
        );
    }
    println!("wrote {}", codebook_path.display());
    Ok(())
}

fn parse_center(s: &str, side: usize) -> Result<GridCoord> {
    let Some((i, j)) = s.split_once(',') else { bail!("--center expects I,J") };
    let (i, j): (usize, usize) = (i.trim().parse()?, j.trim().parse()?);
    if i >= side || j >= side {
        bail!("--center {i},{j} lies outside a {side}x{side} grid");
    }
    Ok(GridCoord::new(i, j))
}

fn cmd_kernel(c: KernelCmd) -> Result<()> {
    let kernel = compute_kernel(c.side, c.coeff, c.steps)?;
    let values = match &c.center {
        Some(s) => kernel.shifted(parse_center(s, c.side)?)?,
        None => kernel.values().to_vec(),
    };
    prepare_out_dir(&c.common.out_dir)?;
    let csv = c.common.out_dir.join("kernel.csv");
    let pgm_path = c.common.out_dir.join("kernel.pgm");
    text::write_grid(&csv, &values, c.side)?;
    let map = dsom_core::viz::GrayscaleMap { side: c.side, values };
    pgm::write_map(&pgm_path, &map)?;
    println!("wrote {} and {}", csv.display(), pgm_path.display());
    Ok(())
}

/// Loads a codebook CSV, inferring the grid side from the row count.
pub fn load_codebook(path: &Path) -> Result<(Codebook, InputFile)> {
    let w = text::read_matrix(path)?;
    let side = (w.rows() as f64).sqrt().round() as usize;
    if side * side != w.rows() {
        bail!("{} has {} rows, not a square grid", path.display(), w.rows());
    }
    Ok((Codebook::from_raw(side, w)?, InputFile::hash(path)?))
}

fn evaluation_set<'a>(held: &HeldOutArgs, loaded: &'a Loaded, inputs: &mut Vec<InputFile>) -> Result<std::borrow::Cow<'a, Dataset>> {
    match (&held.test_images, &held.test_labels) {
        (Some(images), Some(labels)) => {
            let Some(mean) = &loaded.mean else {
                bail!("held-out IDX data needs IDX training data");
            };
            let (test, more) = data::load_heldout(images, labels, held.test_limit, mean)?;
            inputs.extend(more);
            Ok(std::borrow::Cow::Owned(test))
        }
        _ => Ok(std::borrow::Cow::Borrowed(&loaded.dataset)),
    }
}

fn accuracy_csv(r: &AccuracyReport) -> String {
    let mut out = String::from("class,total,correct,accuracy\n");
    for s in &r.per_class {
        out.push_str(&format!("{},{},{},{}\n", s.class, s.total, s.correct, text::fmt_g6(s.accuracy())));
    }
    out.push_str(&format!("all,{},{},{}\n", r.total, r.correct, text::fmt_g6(r.accuracy())));
    out
}

fn neuron_labels_csv(nl: &NeuronLabels, side: usize) -> String {
    let mut out = String::new();
    for row in nl.labels.chunks(side) {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn cmd_classify(c: ClassifyCmd) -> Result<()> {
    let source = c.data.source()?;
    let (u, cb_input) = load_codebook(&c.codebook)?;
    prepare_out_dir(&c.common.out_dir)?;
    let loaded = data::load(&source, c.common.seed)?;
    if loaded.dataset.labels().is_none() {
        bail!("classify needs labeled data (--labels)");
    }
    let mut inputs = vec![cb_input];
    inputs.extend(loaded.inputs.iter().cloned());
    let test = evaluation_set(&c.heldout, &loaded, &mut inputs)?;
    let strategy: LabelStrategy = c.strategy.into();
    let (nl, report) = with_threads(c.common.threads, || -> Result<_> {
        let nl = label_neurons_with(&loaded.dataset, &u, strategy)?;
        let report = evaluate(&u, &nl, &test)?;
        Ok((nl, report))
    })??;

    let out = &c.common.out_dir;
    let acc_path = out.join("accuracy.csv");
    let labels_path = out.join("neuron_labels.csv");
    let table = accuracy_csv(&report);
    fs::write(&acc_path, &table)?;
    fs::write(&labels_path, neuron_labels_csv(&nl, u.side()))?;
    print!("{table}");

    let manifest_path = out.join("classify.manifest.json");
    let mut m = RunManifest::new("classify", c.common.seed);
    m.side = u.side();
    m.d = u.dim();
    m.data = Some(loaded.summary.clone());
    m.inputs = inputs;
    m.outputs = [&acc_path, &labels_path, &manifest_path].iter().map(|p| p.display().to_string()).collect();
    m.extra.insert("accuracy".into(), report.accuracy().into());
    m.extra.insert("strategy".into(), format!("{:?}", strategy).into());
    m.write(&manifest_path)?;
    Ok(())
}

fn tile_side_for(dim: usize, requested: Option<usize>) -> Option<usize> {
    requested.or_else(|| {
        let s = (dim as f64).sqrt().round() as usize;
        (s * s == dim).then_some(s)
    })
}

fn cmd_viz(c: VizCmd) -> Result<()> {
    let (u, cb_input) = load_codebook(&c.codebook)?;
    let labeled = match (&c.data.images, &c.data.synthetic) {
        (None, None) => None,
        _ => Some(data::load(&c.data.source()?, c.common.seed)?),
    };
    prepare_out_dir(&c.common.out_dir)?;
    let out = &c.common.out_dir;
    let mut outputs = Vec::new();
    let mut inputs = vec![cb_input];

    let corr = correlation_map(&u);
    let p = out.join("correlation.pgm");
    pgm::write_map(&p, &corr)?;
    outputs.push(p);
    let p = out.join("correlation.csv");
    text::write_grid(&p, &corr.values, u.side())?;
    outputs.push(p);

    if let Some(tile) = tile_side_for(u.dim(), c.tile_side) {
        let n = c.picks.clamp(1, u.len());
        let mut rng = stream_rng(c.common.seed, Stream::NeuronPicks);
        let mut picks = index::sample(&mut rng, u.len(), n).into_vec();
        picks.sort_unstable();
        let img = neuron_tiles(&u, &picks, tile)?;
        let p = out.join("tiles.pgm");
        pgm::write(&p, &img)?;
        outputs.push(p);
    } else {
        eprintln!("note: dimension {} is not a square tile; skipping tiles.pgm", u.dim());
    }

    if let Some(loaded) = &labeled {
        if loaded.dataset.labels().is_none() {
            bail!("class regions need labeled data (--labels)");
        }
        inputs.extend(loaded.inputs.iter().cloned());
        let nl = with_threads(c.common.threads, || label_neurons_with(&loaded.dataset, &u, c.strategy.into()))??;
        let mut classes = nl.labels.clone();
        classes.sort_unstable();
        classes.dedup();
        for class in classes {
            let p = out.join(format!("class_{class}.pgm"));
            pgm::write_map(&p, &class_region_map(&nl, u.side(), class))?;
            outputs.push(p);
        }
    }

    let manifest_path = out.join("viz.manifest.json");
    outputs.push(manifest_path.clone());
    let mut m = RunManifest::new("viz", c.common.seed);
    m.side = u.side();
    m.d = u.dim();
    m.inputs = inputs;
    m.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    m.extra.insert("correlation_mean".into(), corr.mean().into());
    m.write(&manifest_path)?;
    for p in &outputs {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Mean over samples of the best dot product with any unit codebook row.
pub fn quantization_similarity(x: &Dataset, u: &Codebook) -> Result<f64> {
    let r = linalg::matmul_nt(x.samples(), u.weights())?;
    let total: f64 = r.iter_rows().map(|row| row.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64).sum();
    Ok(total / x.len() as f64)
}

struct BenchRow {
    method: &'static str,
    seconds: f64,
    iterations: usize,
    quantization: f64,
    accuracy: Option<f64>,
}

fn cmd_bench(c: BenchCmd) -> Result<()> {
    let cfg = c.train.config(c.common.seed)?;
    let source = c.data.source()?;
    prepare_out_dir(&c.common.out_dir)?;
    let loaded = data::load(&source, c.common.seed)?;
    let x = &loaded.dataset;
    let mut inputs = loaded.inputs.clone();
    let test = evaluation_set(&c.heldout, &loaded, &mut inputs)?;
    let side = cfg.grid_side;
    let init = init_codebook(side, x.dim(), cfg.init, cfg.seed, Some(x))?;

    let (rows, dsom_run) = with_threads(c.common.threads, || -> Result<_> {
        let score = |u: &Codebook| -> Result<(f64, Option<f64>)> {
            let q = quantization_similarity(x, u)?;
            let acc = match x.labels() {
                Some(_) => {
                    let nl = label_neurons_with(x, u, LabelStrategy::MaxCorrelation)?;
                    Some(evaluate(u, &nl, &test)?.accuracy())
                }
                None => None,
            };
            Ok((q, acc))
        };
        let mut rows = Vec::new();

        let run = timed_train(x, init.clone(), &cfg)?;
        let (q, a) = score(&run.codebook)?;
        rows.push(BenchRow {
            method: "dsom",
            seconds: run.seconds,
            iterations: run.history.records.len(),
            quantization: q,
            accuracy: a,
        });

        let mut ocfg = OnlineSomConfig::new(side);
        ocfg.seed = cfg.seed;
        ocfg.max_steps = c.online_steps.unwrap_or(10 * x.len());
        if c.weight_space {
            ocfg.metric = NeighborhoodMetric::WeightSpace;
        }
        let t = Instant::now();
        let (w, report) = online_som_train(x, side, init.weights(), &ocfg)?;
        let secs = t.elapsed().as_secs_f64();
        let (q, a) = score(&Codebook::from_raw(side, w)?)?;
        rows.push(BenchRow { method: "online-som", seconds: secs, iterations: report.steps, quantization: q, accuracy: a });

        let t = Instant::now();
        let mut w = init.weights().clone();
        let epochs = c.batch_epochs.max(1);
        let (s0, s1) = ((side as f64 / 2.0).max(0.5), 0.5f64);
        for e in 0..epochs {
            let frac = if epochs == 1 { 1.0 } else { e as f64 / (epochs - 1) as f64 };
            let sigma = s0 * (s1 / s0).powf(frac);
            w = batch_som_epoch(x, side, &w, sigma)?.0;
        }
        let secs = t.elapsed().as_secs_f64();
        let (q, a) = score(&Codebook::from_raw(side, w)?)?;
        rows.push(BenchRow { method: "batch-som", seconds: secs, iterations: epochs, quantization: q, accuracy: a });

        let t = Instant::now();
        let km = spherical_kmeans_from(x, init.weights().clone(), cfg.max_inner_iters)?;
        let secs = t.elapsed().as_secs_f64();
        let (q, a) = score(&Codebook::from_raw(side, km.centroids)?)?;
        rows.push(BenchRow {
            method: "spherical-kmeans",
            seconds: secs,
            iterations: km.iterations,
            quantization: q,
            accuracy: a,
        });
        Ok((rows, run))
    })??;

    let out = &c.common.out_dir;
    let mut table = String::from("method,seconds,iterations,seconds_per_iteration,quantization,accuracy\n");
    for r in &rows {
        let acc = r.accuracy.map(text::fmt_g6).unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            text::fmt_g6(r.seconds),
            r.iterations,
            text::fmt_g6(r.seconds / r.iterations.max(1) as f64),
            text::fmt_g6(r.quantization),
            acc
        ));
    }
    let mut phases = String::from("steps,epochs,seconds,final_delta,stop\n");
    for p in &dsom_run.phases {
        phases.push_str(&format!(
            "{},{},{},{},{}\n",
            p.steps,
            p.epochs,
            text::fmt_g6(p.seconds),
            text::fmt_g6(p.final_delta as f64),
            p.stop
        ));
    }
    let bench_path = out.join("bench.csv");
    let phases_path = out.join("bench_phases.csv");
    let manifest_path = out.join("bench.manifest.json");
    fs::write(&bench_path, &table)?;
    fs::write(&phases_path, phases)?;
    print!("{table}");

    let mut m = RunManifest::new("bench", cfg.seed);
    m.side = side;
    m.d = x.dim();
    m.config = Some(ConfigEcho::from(&cfg));
    m.data = Some(loaded.summary.clone());
    m.inputs = inputs;
    m.phases = dsom_run.phases;
    m.total_seconds = rows.iter().map(|r| r.seconds).sum();
    m.outputs = [&bench_path, &phases_path, &manifest_path].iter().map(|p| p.display().to_string()).collect();
    m.write(&manifest_path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("L/2..2", 20).unwrap(), (2..=10).rev().collect::<Vec<_>>());
        assert_eq!(parse_schedule("L/2..2", 3).unwrap(), vec![1]);
        assert_eq!(parse_schedule("10..2", 20).unwrap().len(), 9);
        assert_eq!(parse_schedule("5,3,0", 8).unwrap(), vec![5, 3, 0]);
        assert_eq!(parse_schedule("L..L/2", 8).unwrap(), vec![8, 7, 6, 5, 4]);
        assert!(parse_schedule("2..5", 8).is_err());
        assert!(parse_schedule("a,b", 8).is_err());
    }

    #[test]
    fn grid_side_zero_is_a_usage_error() {
        let e = parse_args(["dsom", "train", "--synthetic", "blobs:2x2x4", "--grid-side", "0"]).unwrap_err();
        assert_eq!(e.kind(), clap::error::ErrorKind::ValueValidation);
    }

    #[test]
    fn later_flags_override_earlier_ones() {
        let cli = parse_args(["dsom", "kernel", "--side", "5", "--side", "7"]).unwrap();
        let Command::Kernel(k) = cli.command else { panic!() };
        assert_eq!(k.side, 7);
    }

    #[test]
    fn defaults() {
        let cli = parse_args(["dsom", "train", "--synthetic", "blobs:2x2x4", "--grid-side", "4"]).unwrap();
        let Command::Train(t) = cli.command else { panic!() };
        assert_eq!(t.train.diff_coeff, 0.25);
        assert_eq!(t.train.epsilon, 1e-6);
        assert_eq!(t.train.max_inner_iters, 500);
        assert_eq!(t.train.schedule, "L/2..2");
        assert_eq!(t.train.init, InitArg::Gaussian);
        assert_eq!(t.common.seed, 0);
    }

    #[test]
    fn images_and_synthetic_conflict() {
        assert!(parse_args(["dsom", "train", "--grid-side", "4", "--images", "a", "--synthetic", "blobs:2x2x4"]).is_err());
    }

    #[test]
    fn center_parsing() {
        assert_eq!(parse_center("1, 2", 4).unwrap(), GridCoord::new(1, 2));
        assert!(parse_center("4,0", 4).is_err());
        assert!(parse_center("1", 4).is_err());
    }
}
