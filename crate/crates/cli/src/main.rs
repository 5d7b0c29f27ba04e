use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pcfjudge::eval::{
    build_report, emit_report, load_listwise_dataset, load_pair_dataset, read_metrics, read_predictions, render_report,
    run_direct_pairwise, run_listwise, run_pairwise, write_predictions, EvalConfig, ExperimentOptions,
    PredictionRecord, ReportFormat,
};
use pcfjudge::judge::ListwiseGateway;
use pcfjudge::pairwise::{EstimationDetector, PairGateway};
use pcfjudge::sim::{render_simulation, simulate, SyntheticJudgeModel, DEFAULT_MARGIN, DEFAULT_SIM_SEED};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Order-robust LLM judging: permutation consensus, order-swapped pairwise
/// judging, evaluation metrics and simulation.
#[derive(Parser)]
#[command(name = "pcfjudge", version)]
struct Cli {
    /// TOML config with backends and defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Judge a listwise dataset with permutation consensus.
    JudgeListwise(ListwiseArgs),
    /// Judge a pairwise dataset with order swapping and keyed confirmation.
    JudgePairwise(PairwiseArgs),
    /// Compute metrics from prediction files.
    Score(ScoreArgs),
    /// Render metrics as a table, JSONL or plot data.
    Report(ReportArgs),
    /// Monte Carlo study of majority vote versus consensus.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// JSONL dataset.
    #[arg(long)]
    dataset: PathBuf,
    /// Keep the first N records after sorting by id.
    #[arg(long)]
    slice: Option<usize>,
    /// Backend name from the config; `mock` is always available.
    #[arg(long, default_value = "mock")]
    backend: String,
    /// Method name written into each prediction.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, conflicts_with = "no_cache")]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    /// Omit the wall-clock stamp from prediction records.
    #[arg(long)]
    no_timestamps: bool,
    /// Append to the output file instead of replacing it.
    #[arg(long)]
    append: bool,
    /// Prediction file (JSONL).
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct ListwiseArgs {
    #[command(flatten)]
    common: Common,
    /// Permutations per item; 1 gives the direct baseline.
    #[arg(long)]
    k: Option<usize>,
    /// Schedule seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Winner tie tolerance in consensus points.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct PairwiseArgs {
    #[command(flatten)]
    common: Common,
    /// File with one estimation-question regex per line.
    #[arg(long)]
    estimation_patterns: Option<PathBuf>,
    /// Single A-then-B call per pair instead of the full protocol.
    #[arg(long)]
    direct: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Prediction files; records are grouped by method.
    #[arg(long, required = true, num_args = 1..)]
    predictions: Vec<PathBuf>,
    /// Listwise dataset supplying gold labels and sources.
    #[arg(long, conflicts_with = "pair_dataset")]
    dataset: Option<PathBuf>,
    /// Pairwise dataset supplying gold labels and sources.
    #[arg(long)]
    pair_dataset: Option<PathBuf>,
    /// Method the others are compared against.
    #[arg(long)]
    baseline: Option<String>,
    /// Metrics file (JSONL); printed as a table when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics JSONL written by `score`.
    #[arg(long)]
    metrics: PathBuf,
    /// table, jsonl or plot-data.
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Probability a run tops the best candidate; repeatable.
    #[arg(long, num_args = 1.., default_values_t = [0.7])]
    q: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Runs per trial; comma-separated for a grid.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5, 7])]
    k: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Score noise standard deviation.
    #[arg(long, default_value_t = 5.0)]
    sigma: f64,
    /// Latent score advantage of the best candidate.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = DEFAULT_SIM_SEED)]
    seed: u64,
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut config = match &cli.config {
        Some(path) => EvalConfig::load(path)?,
        None => EvalConfig::default(),
    };
    match cli.command {
        Command::JudgeListwise(args) => judge_listwise(&mut config, args),
        Command::JudgePairwise(args) => judge_pairwise(&mut config, args),
        Command::Score(args) => score(args),
        Command::Report(args) => report(args),
        Command::Simulate(args) => run_simulate(args),
    }
}

fn apply_common(config: &mut EvalConfig, common: &Common) -> ExperimentOptions {
    if let Some(p) = common.parallelism {
        config.parallelism = p;
    }
    if common.no_cache {
        config.cache_dir = None;
    } else if let Some(dir) = &common.cache_dir {
        config.cache_dir = Some(dir.clone());
    }
    ExperimentOptions {
        parallelism: config.parallelism,
        timestamps: !common.no_timestamps,
    }
}

fn judge_listwise(config: &mut EvalConfig, args: ListwiseArgs) -> Result<()> {
    let options = apply_common(config, &args.common);
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t) = args.tolerance {
        config.tolerance = t;
    }
    config.validate()?;
    let items = load_listwise_dataset(&args.common.dataset, args.common.slice)?;
    let client = config.client(&args.common.backend)?;
    let judge = ListwiseGateway::new(client.clone()).with_rationale_limit(config.rationale_limit);
    let method = args.common.method.clone().unwrap_or_else(|| {
        if config.k == 1 { "direct".into() } else { format!("pcf-k{}", config.k) }
    });
    let records = run_listwise(&items, &judge, config.k, config.seed, config.tolerance, &method, options)?;
    finish(&records, &args.common, client.backend_calls())
}

fn judge_pairwise(config: &mut EvalConfig, args: PairwiseArgs) -> Result<()> {
    let options = apply_common(config, &args.common);
    config.validate()?;
    let detector = match &args.estimation_patterns {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            EstimationDetector::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => config.detector()?,
    };
    let items = load_pair_dataset(&args.common.dataset, args.common.slice)?;
    let client = config.client(&args.common.backend)?;
    let judge = PairGateway::new(client.clone());
    let records = if args.direct {
        let method = args.common.method.clone().unwrap_or_else(|| "direct".into());
        run_direct_pairwise(&items, &judge, &method, options)?
    } else {
        let method = args.common.method.clone().unwrap_or_else(|| "apoc".into());
        run_pairwise(&items, &judge, &detector, &method, options)?
    };
    finish(&records, &args.common, client.backend_calls())
}

fn finish(records: &[PredictionRecord], common: &Common, backend_calls: usize) -> Result<()> {
    write_predictions(&common.output, records, common.append)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    log::info!(
        "{} predictions written to {} ({failed} failed, {backend_calls} backend calls)",
        records.len(),
        common.output.display()
    );
    if failed > 0 {
        eprintln!("warning: {failed} of {} items could not be decided", records.len());
    }
    Ok(())
}

/// Gold index and source per item id.
type GoldTable = BTreeMap<String, (Option<usize>, Option<String>)>;

fn gold_table(args: &ScoreArgs) -> Result<Option<GoldTable>> {
    if let Some(path) = &args.dataset {
        let items = load_listwise_dataset(path, None)?;
        return Ok(Some(items.into_iter().map(|i| (i.id, (i.gold_index, i.source))).collect()));
    }
    if let Some(path) = &args.pair_dataset {
        let items = load_pair_dataset(path, None)?;
        return Ok(Some(items.into_iter().map(|i| (i.id.clone(), (i.gold(), i.source))).collect()));
    }
    Ok(None)
}

fn score(args: ScoreArgs) -> Result<()> {
    let gold = gold_table(&args)?;
    let mut by_method: Vec<(String, Vec<PredictionRecord>)> = Vec::new();
    for path in &args.predictions {
        for mut record in read_predictions(path)? {
            if let Some(gold) = &gold {
                let Some((g, source)) = gold.get(&record.item_id) else {
                    bail!("{}: item {} is not in the gold dataset", path.display(), record.item_id);
                };
                record.set_gold(*g);
                record.source = source.clone();
            }
            match by_method.iter_mut().find(|(m, _)| *m == record.method) {
                Some((_, v)) => v.push(record),
                None => by_method.push((record.method.clone(), vec![record])),
            }
        }
    }
    let baseline = match &args.baseline {
        Some(name) => Some(
            by_method
                .iter()
                .find(|(m, _)| m == name)
                .with_context(|| format!("baseline method {name:?} not found in predictions"))?,
        ),
        None => None,
    };
    let mut reports = Vec::new();
    for (method, records) in &by_method {
        let base = baseline
            .filter(|(name, _)| name != method)
            .map(|(name, recs)| (name.as_str(), recs.as_slice()));
        reports.push(build_report(method, records, base).with_context(|| format!("scoring {method}"))?);
    }
    match &args.output {
        Some(path) => emit_report(&reports, ReportFormat::Jsonl, path)?,
        None => print!("{}", render_report(&reports, ReportFormat::Table)?),
    }
    Ok(())
}

fn write_or_print(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn report(args: ReportArgs) -> Result<()> {
    let reports = read_metrics(&args.metrics)?;
    write_or_print(&render_report(&reports, args.format)?, args.output.as_deref())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut results = Vec::new();
    for &q in &args.q {
        let mut model = SyntheticJudgeModel::uniform(q, args.n, args.sigma);
        model.margin = args.margin;
        for &k in &args.k {
            results.push(simulate(&model, k, args.trials, args.seed)?);
        }
    }
    write_or_print(&render_simulation(&results, args.format), args.output.as_deref())
}
