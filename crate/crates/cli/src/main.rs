mod config;
mod exit;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use sha2::{Digest, Sha256};

use tempowave::benchmarks::{generate_granell, generate_sp_temporal, GroundTruth};
use tempowave::clustering::{detect_with_basis, spectral_basis_for, DetectConfig, Mode, MultiScaleResult};
use tempowave::io::{self as tio, Evaluation, ResultRecord, Summary};
use tempowave::spectral::{read_basis, write_basis, SpectralBasis};
use tempowave::temporal_graph::{
    build_supra_system, constant_weights, lart_weights, load_temporal_network, InterLayerWeights, SupraSystem,
    TemporalNetwork,
};

use config::{BenchmarkSpec, DetectOverrides, ExperimentConfig, WeightScheme};
use exit::{Usage, EXIT_CODES_HELP};

/// Cache directory for eigendecompositions; unset disables caching.
const CACHE_ENV: &str = "TEMPOWAVE_CACHE_DIR";

pub const EDGES_FILE: &str = "edges.tsv";
pub const METADATA_FILE: &str = "metadata.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const PLOT_FILE: &str = "evaluation.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Parser)]
#[command(name = "tempowave", version, about = "Multi-scale community detection in temporal networks", after_help = EXIT_CODES_HELP)]
struct Cli {
    /// Worker threads for scales and repetitions (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic benchmark: edges.tsv, truth_<scale>.csv, metadata.json.
    Generate {
        #[command(subcommand)]
        family: GenerateFamily,
    },
    /// Detect communities at every scale of a temporal network.
    Detect(DetectArgs),
    /// Compare a detection result with planted truths.
    Evaluate(EvaluateArgs),
    /// Generate, detect and evaluate over consecutive benchmark seeds.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateCommon {
    /// JSON experiment config; its `benchmark` section supplies defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenerateFamily {
    /// Time-varying hierarchical network with small / medium / large truths.
    Sp {
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        kbar: Option<f64>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        persistence: Option<f64>,
        #[command(flatten)]
        common: GenerateCommon,
    },
    /// Grow / Merge / Mixed planted-partition models.
    Granell {
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[command(flatten)]
        common: GenerateCommon,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Ssc,
    Msc,
    Lsc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Grow,
    Merge,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Fast,
}

#[derive(Args, Default)]
struct DetectFlags {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Number of scales M.
    #[arg(long)]
    scales: Option<usize>,
    /// Random signals per sketch.
    #[arg(long)]
    eta: Option<usize>,
    /// Sketch repetitions R for stability.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Residual threshold for the informative eigenvalue, in (0, 1].
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    chebyshev_order: Option<usize>,
    /// `lart` or `constant:<omega>`.
    #[arg(long)]
    weights: Option<String>,
    /// Shorthand for `--weights constant:<omega>`.
    #[arg(long, conflicts_with = "weights")]
    omega: Option<f64>,
    /// Detection seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DetectArgs {
    /// Edge list `N <n> T <t>` header then `t i j w` rows.
    #[arg(long)]
    input: Option<PathBuf>,
    /// `t i omega` lines overriding single couplings.
    #[arg(long)]
    weight_overrides: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: DetectFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory written by `detect`.
    #[arg(long)]
    result: PathBuf,
    /// Truth label file, as `NAME=PATH` or `PATH` (name from `truth_<name>.csv`).
    #[arg(long)]
    truth: Vec<String>,
    /// Directory whose `truth_*.csv` files are all used.
    #[arg(long)]
    truth_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Benchmark seeds `first_seed .. first_seed + realizations`.
    #[arg(long, default_value_t = 10)]
    realizations: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Keep per-realization results under `<out>/seed_<s>/`.
    #[arg(long)]
    keep: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    flags: DetectFlags,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = configure_threads(cli.threads).and_then(|()| run(cli.command));
    if let Err(e) = outcome {
        eprintln!("error: {}", describe(&e));
        std::process::exit(exit::code_for(&e));
    }
}

/// The context chain down to the first library error, whose message already
/// includes its own causes.
fn describe(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if cause.is::<tempowave::Error>() {
            break;
        }
    }
    parts.join(": ")
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!(Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { family } => cmd_generate(family),
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(ExperimentConfig::load).transpose()
}

fn cmd_generate(family: GenerateFamily) -> Result<()> {
    let (spec, out) = match family {
        GenerateFamily::Sp { class, rho, kbar, layers, persistence, common } => {
            let cfg = load_config(common.config.as_deref())?;
            let mut p = match cfg.as_ref().and_then(|c| c.benchmark.clone()) {
                Some(BenchmarkSpec::Sp(p)) => p,
                Some(BenchmarkSpec::Granell(_)) => bail!(Usage("config benchmark is granell, not sp".into())),
                None => {
                    let Some(_) = class else { bail!(Usage("missing --class (ssc, msc or lsc)".into())) };
                    Default::default()
                }
            };
            if let Some(c) = class {
                p.change = match c {
                    ClassArg::Ssc => tempowave::benchmarks::ChangeClass::Ssc,
                    ClassArg::Msc => tempowave::benchmarks::ChangeClass::Msc,
                    ClassArg::Lsc => tempowave::benchmarks::ChangeClass::Lsc,
                };
            }
            p.rho = rho.unwrap_or(p.rho);
            p.k_bar = kbar.unwrap_or(p.k_bar);
            p.n_layers = layers.or(p.n_layers);
            p.persistence = persistence.unwrap_or(p.persistence);
            p.seed = resolve_seed(common.seed, cfg.as_ref())?;
            (BenchmarkSpec::Sp(p), common.out)
        }
        GenerateFamily::Granell { model, nodes, layers, common } => {
            let cfg = load_config(common.config.as_deref())?;
            let mut g = match cfg.as_ref().and_then(|c| c.benchmark.clone()) {
                Some(BenchmarkSpec::Granell(g)) => g,
                Some(BenchmarkSpec::Sp(_)) => bail!(Usage("config benchmark is sp, not granell".into())),
                None => {
                    let Some(_) = model else { bail!(Usage("missing --model (grow, merge or mixed)".into())) };
                    Default::default()
                }
            };
            if let Some(m) = model {
                g.model = match m {
                    ModelArg::Grow => tempowave::benchmarks::GranellModel::Grow,
                    ModelArg::Merge => tempowave::benchmarks::GranellModel::Merge,
                    ModelArg::Mixed => tempowave::benchmarks::GranellModel::Mixed,
                };
            }
            g.n_nodes = nodes.unwrap_or(g.n_nodes);
            g.n_layers = layers.unwrap_or(g.n_layers);
            g.seed = resolve_seed(common.seed, cfg.as_ref())?;
            (BenchmarkSpec::Granell(g), common.out)
        }
    };
    let generated = generate(&spec)?;
    write_benchmark(&out, &generated)?;
    let net = &generated.network;
    println!("N = {}  T = {}  mean degree = {:.4}", net.n_nodes(), net.n_layers(), net.mean_degree());
    Ok(())
}

/// A generated benchmark with its metadata as JSON.
struct Generated {
    network: TemporalNetwork,
    truth: GroundTruth,
    metadata: serde_json::Value,
}

fn generate(spec: &BenchmarkSpec) -> Result<Generated> {
    let invalid = |e: tempowave::Error| match e {
        tempowave::Error::Domain(msg) => anyhow::Error::new(Usage(format!("invalid benchmark parameters: {msg}"))),
        e => e.into(),
    };
    Ok(match spec {
        BenchmarkSpec::Sp(p) => {
            let b = generate_sp_temporal(p).map_err(invalid)?;
            Generated { network: b.network, truth: b.truth, metadata: serde_json::to_value(b.metadata)? }
        }
        BenchmarkSpec::Granell(g) => {
            let b = generate_granell(g).map_err(invalid)?;
            Generated { network: b.network, truth: b.truth, metadata: serde_json::to_value(b.metadata)? }
        }
    })
}

fn write_benchmark(out: &Path, b: &Generated) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    tio::write_atomic_with(&out.join(EDGES_FILE), |buf| b.network.write_edge_list(buf))?;
    for name in b.truth.scale_names() {
        tio::write_atomic_with(&out.join(tio::truth_file_name(name)), |buf| b.truth.write_csv(name, buf))?;
    }
    let mut meta = serde_json::to_vec_pretty(&b.metadata)?;
    meta.push(b'\n');
    tio::write_atomic(&out.join(METADATA_FILE), &meta)?;
    Ok(())
}

fn resolve_seed(flag: Option<u64>, cfg: Option<&ExperimentConfig>) -> Result<u64> {
    match (flag, cfg) {
        (Some(s), _) => Ok(s),
        (None, Some(c)) => c.seed.ok_or_else(|| Usage("the config file must set \"seed\"".into()).into()),
        (None, None) => bail!(Usage("a seed is required: pass --seed or a config with \"seed\"".into())),
    }
}

/// Merged detection settings.
struct Detection {
    cfg: DetectConfig,
    weights: WeightScheme,
}

fn resolve_detection(flags: &DetectFlags, file: Option<&ExperimentConfig>) -> Result<Detection> {
    let mut o = file.map(|c| c.detect.clone()).unwrap_or_default();
    let flag_overrides = DetectOverrides {
        mode: flags.mode.map(|m| match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Fast => Mode::Fast,
        }),
        n_scales: flags.scales,
        eta: flags.eta,
        repetitions: flags.repetitions,
        residual_threshold: flags.threshold,
        chebyshev_order: flags.chebyshev_order,
        weights: match (&flags.weights, flags.omega) {
            (Some(w), _) => Some(w.clone()),
            (None, Some(omega)) => Some(format!("constant:{omega}")),
            (None, None) => None,
        },
    };
    o.merge(flag_overrides);
    let seed = resolve_seed(flags.seed, file)?;
    let (cfg, weights) = o.into_config(seed)?;
    Ok(Detection { cfg, weights })
}

fn build_weights(net: &TemporalNetwork, scheme: &WeightScheme, overrides: Option<&Path>) -> Result<InterLayerWeights> {
    let mut w = match scheme {
        WeightScheme::Lart => lart_weights(net),
        WeightScheme::Constant(omega) => constant_weights(net, *omega)?,
    };
    if let Some(path) = overrides {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        w.apply_overrides(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(w)
}

fn cmd_detect(args: DetectArgs) -> Result<()> {
    let file = load_config(args.flags.config.as_deref())?;
    let det = resolve_detection(&args.flags, file.as_ref())?;
    let input = args
        .input
        .or_else(|| file.as_ref().and_then(|c| c.input.clone()))
        .ok_or_else(|| Usage("missing --input (or \"input\" in the config)".into()))?;
    let out = args
        .out
        .or_else(|| file.as_ref().and_then(|c| c.output.clone()))
        .ok_or_else(|| Usage("missing --out (or \"output\" in the config)".into()))?;
    let f = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let net = load_temporal_network(BufReader::new(f)).with_context(|| format!("reading {}", input.display()))?;
    let weights = build_weights(&net, &det.weights, args.weight_overrides.as_deref())?;
    let result = run_detection(&net, &weights, &det.cfg)?;
    let record = ResultRecord::new(&result, net.n_nodes(), net.n_layers(), &det.weights.to_string(), &det.cfg);
    tio::write_detection(&out, &record, &result.partitions)?;
    println!(
        "lambda* = {:.6e}  q = {}{}  scales [{:.6e}, {:.6e}]  -> {}",
        record.lambda_star,
        record.q_index,
        if record.lambda_capped { " (capped)" } else { "" },
        result.design.grid.s_min(),
        result.design.grid.s_max(),
        out.display()
    );
    Ok(())
}

fn run_detection(net: &TemporalNetwork, weights: &InterLayerWeights, cfg: &DetectConfig) -> Result<MultiScaleResult> {
    let sys = build_supra_system(net, weights)?;
    let basis = cached_basis(net, weights, &sys, cfg)?;
    Ok(detect_with_basis(net, &sys, &basis, cfg)?)
}

/// Eigenpairs from `$TEMPOWAVE_CACHE_DIR` when present, computed and stored
/// otherwise. The key covers the network, the couplings and the solver
/// settings.
fn cached_basis(net: &TemporalNetwork, weights: &InterLayerWeights, sys: &SupraSystem, cfg: &DetectConfig) -> Result<SpectralBasis> {
    let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(PathBuf::from) else {
        return Ok(spectral_basis_for(sys, net.n_layers(), cfg)?);
    };
    let mut hash = Sha256::new();
    let mut edges = Vec::new();
    net.write_edge_list(&mut edges)?;
    hash.update(&edges);
    for row in weights.rows() {
        for w in row {
            hash.update(w.to_le_bytes());
        }
    }
    let e = &cfg.eigen;
    hash.update(format!("{:?}|{:?}|{}|{:e}|{:?}|{}", cfg.mode, e.method, e.dense_limit, e.tol, e.max_matvecs, e.seed));
    let key: String = hash.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect();
    let path = dir.join(format!("basis-{key}.twcb"));
    if path.exists() {
        match File::open(&path).map_err(tempowave::Error::from).and_then(|f| read_basis(BufReader::new(f))) {
            Ok(b) if b.dim() == sys.dim() => {
                info!("eigenpairs from cache {}", path.display());
                return Ok(b);
            }
            Ok(_) => warn!("cache entry {} has the wrong dimension; recomputing", path.display()),
            Err(e) => warn!("unreadable cache entry {}: {e}; recomputing", path.display()),
        }
    }
    let basis = spectral_basis_for(sys, net.n_layers(), cfg)?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    tio::write_atomic_with(&path, |buf| write_basis(&basis, buf))?;
    Ok(basis)
}

fn parse_truth_arg(arg: &str) -> Result<(String, PathBuf)> {
    if let Some((name, path)) = arg.split_once('=') {
        if name.is_empty() {
            bail!(Usage(format!("empty truth name in --truth {arg}")));
        }
        return Ok((name.to_string(), PathBuf::from(path)));
    }
    let path = PathBuf::from(arg);
    let name = truth_name(&path).ok_or_else(|| Usage(format!("cannot name truth file {arg}; use NAME=PATH")))?;
    Ok((name, path))
}

fn truth_name(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_str()?;
    Some(stem.strip_prefix("truth_").unwrap_or(stem).to_string())
}

fn read_labels(path: &Path) -> Result<Vec<Vec<usize>>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    tio::read_labels_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut sources = args.truth.iter().map(|a| parse_truth_arg(a)).collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &args.truth_dir {
        let mut found = Vec::new();
        for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
            let path = entry?.path();
            let is_truth = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("truth_") && n.ends_with(".csv"));
            if is_truth {
                found.push((truth_name(&path).unwrap_or_default(), path));
            }
        }
        found.sort();
        sources.extend(found);
    }
    if sources.is_empty() {
        bail!(Usage("no truth given: use --truth or --truth-dir".into()));
    }
    let record_path = args.result.join(tio::RESULT_FILE);
    let bytes = std::fs::read(&record_path).with_context(|| format!("reading {}", record_path.display()))?;
    let record = ResultRecord::from_json(&bytes).with_context(|| format!("reading {}", record_path.display()))?;
    let evaluation = evaluate_record(&args.result, &record, &sources)?;
    write_evaluation(&args.out, &evaluation)?;
    for t in &evaluation.truths {
        println!("{}: success rate {:.4}, best scale {}", t.name, t.success_rate, t.best_scale);
    }
    Ok(())
}

fn evaluate_record(dir: &Path, record: &ResultRecord, sources: &[(String, PathBuf)]) -> Result<Evaluation> {
    let (n, t) = (record.n_nodes, record.n_layers);
    let mut truths = Vec::new();
    for (name, path) in sources {
        let labels = read_labels(path)?;
        if labels.len() != t || labels[0].len() != n {
            return Err(tempowave::Error::Consistency(format!(
                "truth {} covers N = {}, T = {} but the result has N = {n}, T = {t}",
                path.display(),
                labels[0].len(),
                labels.len()
            ))
            .into());
        }
        truths.push((name.clone(), labels));
    }
    let partitions = record
        .scales
        .iter()
        .map(|s| {
            let layers = read_labels(&dir.join(&s.labels_file))?;
            if layers.len() != t || layers[0].len() != n {
                return Err(anyhow::Error::new(tempowave::Error::Consistency(format!(
                    "{} does not cover N = {n}, T = {t}",
                    s.labels_file
                ))));
            }
            Ok(layers.into_iter().flatten().collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[usize]> = partitions.iter().map(Vec::as_slice).collect();
    let scales: Vec<f64> = record.scales.iter().map(|s| s.scale).collect();
    Ok(tio::evaluate(&refs, &scales, &truths, n, record.instability())?)
}

fn write_evaluation(out: &Path, evaluation: &Evaluation) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    tio::write_atomic(&out.join(EVALUATION_FILE), &evaluation.to_json()?)?;
    tio::write_atomic_with(&out.join(PLOT_FILE), |buf| evaluation.write_plot_csv(buf))?;
    Ok(())
}

#[derive(serde::Serialize)]
struct SweepSummary {
    benchmark: BenchmarkSpec,
    seeds: Vec<u64>,
    weights: String,
    truths: Vec<SweepTruth>,
}

#[derive(serde::Serialize)]
struct SweepTruth {
    name: String,
    success_rates: Vec<f64>,
    summary: Summary,
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let Some(path) = args.flags.config.as_deref() else {
        bail!(Usage("sweep needs --config with a \"benchmark\" section and a \"seed\"".into()));
    };
    let file = ExperimentConfig::load(path)?;
    let Some(bench) = file.benchmark.clone() else {
        bail!(Usage(format!("{} has no \"benchmark\" section", path.display())));
    };
    if args.realizations == 0 {
        bail!(Usage("--realizations must be positive".into()));
    }
    let det = resolve_detection(&args.flags, Some(&file))?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let seeds: Vec<u64> = (args.first_seed..args.first_seed + args.realizations).collect();
    let mut rates: Vec<(String, Vec<f64>)> = Vec::new();
    for &seed in &seeds {
        let spec = bench.with_seed(seed);
        let b = generate(&spec)?;
        let weights = build_weights(&b.network, &det.weights, None)?;
        let result = run_detection(&b.network, &weights, &det.cfg).with_context(|| format!("benchmark seed {seed}"))?;
        let (n, t) = (b.network.n_nodes(), b.network.n_layers());
        let refs: Vec<&[usize]> = result.partitions.iter().map(|p| p.labels.as_slice()).collect();
        let truths: Vec<(String, Vec<Vec<usize>>)> =
            b.truth.scale_names().map(|name| Ok((name.to_string(), b.truth.scale(name)?.to_vec()))).collect::<Result<_>>()?;
        let evaluation = tio::evaluate(&refs, result.scales(), &truths, n, result.instability())?;
        if args.keep {
            let dir = args.out.join(format!("seed_{seed}"));
            write_benchmark(&dir, &b)?;
            let record = ResultRecord::new(&result, n, t, &det.weights.to_string(), &det.cfg);
            tio::write_detection(&dir.join("result"), &record, &result.partitions)?;
            write_evaluation(&dir.join("evaluation"), &evaluation)?;
        }
        for te in &evaluation.truths {
            match rates.iter_mut().find(|(name, _)| *name == te.name) {
                Some((_, v)) => v.push(te.success_rate),
                None => rates.push((te.name.clone(), vec![te.success_rate])),
            }
        }
        info!("seed {seed}: {:?}", evaluation.truths.iter().map(|t| (t.name.as_str(), t.success_rate)).collect::<Vec<_>>());
    }
    let truths = rates
        .into_iter()
        .map(|(name, success_rates)| Ok(SweepTruth { summary: Summary::of(&success_rates)?, name, success_rates }))
        .collect::<Result<Vec<_>>>()?;
    let summary = SweepSummary { benchmark: bench, seeds, weights: det.weights.to_string(), truths };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    tio::write_atomic(&args.out.join(SUMMARY_FILE), &json)?;
    tio::write_atomic_with(&args.out.join(SUMMARY_CSV), |buf| {
        writeln!(buf, "truth,mean,std,n")?;
        for t in &summary.truths {
            writeln!(buf, "{},{:.4},{:.4},{}", t.name, t.summary.mean, t.summary.std, t.summary.n)?;
        }
        Ok(())
    })?;
    for t in &summary.truths {
        println!("{:<8} {:.4} ± {:.4}  (n = {})", t.name, t.summary.mean, t.summary.std, t.summary.n);
    }
    Ok(())
}
