//! `kgbench`: generate, split, annotate, evaluate and describe
//! entity-summarization benchmark datasets.
//!
//! Exit codes: 0 success, 2 input error, 3 no qualifying roots,
//! 4 unbridgeable components, 5 evaluation finished with failed roots.
//! Tables and reports go to stdout, diagnostics to stderr.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kgbench_core::annotate::{annotate_all, qualify_seeds, AnnotateError, AnnotationReport};
use kgbench_core::bundle::BundleMeta;
use kgbench_core::connect::ConnectError;
use kgbench_core::generate::{generate, GenerateError};
use kgbench_core::io::{bundle_file, find_bundle_prefix, load_annotations, load_bundle, load_graph, load_mentions, save_annotations, save_bundle};
use kgbench_core::metrics::{evaluate, format_report, write_report_csv, Cutoff};
use kgbench_core::sampler::{split_dataset, SampleError, SPLIT_NAMES};
use kgbench_core::similarity::{LexicalScorer, SimilarityScorer, WorkerScorer};
use kgbench_core::stats::dataset_stats;
use kgbench_core::summarize::Method;
use kgbench_core::{EntityId, GeneratorParams, RootEntity, SizePreset, SummarySet};

const EXIT_INPUT: u8 = 2;
const EXIT_NO_ROOTS: u8 = 3;
const EXIT_UNBRIDGEABLE: u8 = 4;
const EXIT_PARTIAL: u8 = 5;

#[derive(Parser)]
#[command(name = "kgbench", version, about = "Entity-summarization benchmark toolkit")]
struct Cli {
    /// Base directory for relative paths.
    #[arg(long, global = true, env = "KGBENCH_DATA_DIR", value_name = "DIR")]
    data_root: Option<PathBuf>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick one ground-truth triple per mentioned neighbour and keep roots
    /// with enough of them.
    Annotate(AnnotateArgs),
    /// Sample a connected bundle around the annotated roots.
    Generate(GenerateArgs),
    /// Split a bundle into train/val/test bundles, each resampled and connected.
    Split(SplitArgs),
    /// Score summarization baselines against a bundle's ground truths.
    Evaluate(EvaluateArgs),
    /// Print size, density, connectivity and degree statistics.
    Stats(StatsArgs),
}

#[derive(Args)]
struct AnnotateArgs {
    /// Directory holding the source graph CSVs.
    #[arg(long)]
    graph_dir: PathBuf,
    /// Line-delimited JSON with `root`, `abstract` and `mentions`.
    #[arg(long)]
    mentions: PathBuf,
    #[arg(long, visible_alias = "min-valid-summary-edges", default_value_t = 5)]
    min_summaries: usize,
    /// `lexical`, or `worker:<command>` to score with an external worker.
    #[arg(long, default_value = "lexical")]
    scorer: String,
    #[arg(long, visible_alias = "max-threads", default_value_t = 4)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, value_enum, conflicts_with_all = ["min_rw", "max_rw"])]
    size: Option<Size>,
    #[arg(long, visible_alias = "min-random-walk-number", requires = "max_rw")]
    min_rw: Option<u32>,
    #[arg(long, visible_alias = "max-random-walk-number", requires = "min_rw")]
    max_rw: Option<u32>,
    /// Nodes per walk, start included.
    #[arg(long, visible_alias = "random-walk-depth-len", default_value_t = 3)]
    walk_nodes: usize,
    #[arg(long, visible_alias = "bridges-number", default_value_t = 5)]
    bridges: usize,
    #[arg(long, visible_alias = "max-threads", default_value_t = 4)]
    threads: usize,
}

impl WalkArgs {
    fn params(&self, min_valid_summary_edges: usize) -> (GeneratorParams, &'static str) {
        let (limits, label) = match (self.size, self.min_rw, self.max_rw) {
            (_, Some(lo), Some(hi)) => ((lo, hi), "c"),
            (size, ..) => {
                let preset = size.unwrap_or(Size::Small).preset();
                (preset.walk_limits(), preset.label())
            }
        };
        let params = GeneratorParams {
            min_valid_summary_edges,
            random_walk_depth_len: self.walk_nodes,
            bridges_number: self.bridges,
            max_threads: self.threads,
            min_random_walk_number: limits.0,
            max_random_walk_number: limits.1,
        };
        (params, label)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Size {
    Small,
    Medium,
    Large,
}

impl Size {
    fn preset(self) -> SizePreset {
        match self {
            Size::Small => SizePreset::Small,
            Size::Medium => SizePreset::Medium,
            Size::Large => SizePreset::Large,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    source_dir: PathBuf,
    /// Directory holding `*-root-entities.csv` and `*-ground-truths.csv`
    /// in source ordinals, as written by `annotate`.
    #[arg(long)]
    roots: PathBuf,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, visible_alias = "min-valid-summary-edges", default_value_t = 5)]
    min_summaries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset name used in file prefixes; defaults to the source prefix.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    bundle_dir: PathBuf,
    #[arg(long)]
    source_dir: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.7, 0.15, 0.15])]
    fractions: Vec<f64>,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receives one subdirectory per split.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    bundle_dir: PathBuf,
    /// Method names separated by commas, or `all` for every baseline.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    method: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,dynamic")]
    cutoffs: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, visible_alias = "max-threads", default_value_t = 4)]
    threads: usize,
    /// CSV report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    bundle_dir: PathBuf,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self { code, error: error.into() }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::new(EXIT_INPUT, e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    let paths = Paths { root: cli.data_root };
    let result = match cli.command {
        Command::Annotate(a) => cmd_annotate(&paths, a),
        Command::Generate(a) => cmd_generate(&paths, a),
        Command::Split(a) => cmd_split(&paths, a),
        Command::Evaluate(a) => cmd_evaluate(&paths, a),
        Command::Stats(a) => cmd_stats(&paths, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

struct Paths {
    root: Option<PathBuf>,
}

impl Paths {
    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }
}

fn thread_pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    if threads == 0 {
        return Err(anyhow!("--threads must be at least 1"));
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn detect_prefix(dir: &Path) -> anyhow::Result<String> {
    find_bundle_prefix(dir).with_context(|| format!("no bundle in {}", dir.display()))
}

/// Prefix of the single `*-root-entities.csv` in `dir`.
fn annotation_prefix(dir: &Path) -> anyhow::Result<String> {
    let entries = fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))?;
    let mut prefixes: Vec<String> = entries
        .flatten()
        .filter_map(|e| e.file_name().to_string_lossy().strip_suffix("-root-entities.csv").map(String::from))
        .collect();
    prefixes.sort();
    match prefixes.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(anyhow!("no *-root-entities.csv in {}", dir.display())),
        many => Err(anyhow!("several annotation sets in {}: {}", dir.display(), many.join(", "))),
    }
}

fn scorer_from(spec: &str) -> anyhow::Result<Box<dyn SimilarityScorer>> {
    match spec.split_once(':') {
        None if spec == "lexical" => Ok(Box::new(LexicalScorer)),
        Some(("worker", command)) => Ok(Box::new(WorkerScorer::spawn(command)?)),
        _ => Err(anyhow!("unknown scorer `{spec}`; use `lexical` or `worker:<command>`")),
    }
}

fn sampling_failure(e: SampleError) -> Failure {
    match e {
        SampleError::Connect(c) => connect_failure(c),
        other => Failure::new(EXIT_INPUT, other),
    }
}

fn connect_failure(e: ConnectError) -> Failure {
    match e {
        e @ ConnectError::Unbridgeable { .. } => Failure::new(EXIT_UNBRIDGEABLE, e),
        other => Failure::new(EXIT_INPUT, other),
    }
}

fn cmd_annotate(paths: &Paths, a: AnnotateArgs) -> CmdResult {
    let graph_dir = paths.resolve(&a.graph_dir);
    let prefix = detect_prefix(&graph_dir)?;
    let graph = load_graph(&graph_dir, &prefix)?;
    let mentions = load_mentions(&paths.resolve(&a.mentions))?;
    let scorer = scorer_from(&a.scorer)?;

    let results = thread_pool(a.threads)?.install(|| annotate_all(&graph, &mentions, scorer.as_ref()));
    let mut annotated: Vec<(RootEntity, SummarySet)> = Vec::new();
    let mut totals = AnnotationReport::default();
    let mut unknown_roots = 0;
    for (m, result) in mentions.iter().zip(results) {
        match result {
            Ok((set, report)) => {
                totals += report;
                annotated.push((RootEntity::new(set.root(), m.category.clone()), set));
            }
            Err(AnnotateError::UnknownRoot(id)) => {
                log::warn!("root {id} is not in the graph; skipped");
                unknown_roots += 1;
            }
            Err(e) => return Err(Failure::new(EXIT_INPUT, e)),
        }
    }

    let qualified = qualify_seeds(&annotated, a.min_summaries);
    if qualified.is_empty() {
        return Err(Failure::new(
            EXIT_NO_ROOTS,
            anyhow!("no root has at least {} ground-truth triples", a.min_summaries),
        ));
    }
    let keep: HashSet<EntityId> = qualified.iter().map(|r| r.entity).collect();
    let truths = annotated
        .into_iter()
        .filter(|(r, _)| keep.contains(&r.entity))
        .map(|(r, s)| (r.entity, s))
        .collect();
    let out = paths.resolve(&a.out);
    save_annotations(&qualified, &truths, &out, &prefix)
        .with_context(|| format!("cannot write annotations to {}", out.display()))?;

    println!("mentions          {}", mentions.len());
    println!("unknown_roots     {unknown_roots}");
    println!("unresolved        {}", totals.unresolved);
    println!("not_adjacent      {}", totals.not_adjacent);
    println!("disambiguated     {}", totals.disambiguated);
    println!("qualified_roots   {}", qualified.len());
    println!("root_entities     {}", bundle_file(&out, &prefix, "root-entities").display());
    println!("ground_truths     {}", bundle_file(&out, &prefix, "ground-truths").display());
    Ok(())
}

fn cmd_generate(paths: &Paths, a: GenerateArgs) -> CmdResult {
    let source_dir = paths.resolve(&a.source_dir);
    let source_prefix = detect_prefix(&source_dir)?;
    let source = load_graph(&source_dir, &source_prefix)?;
    let roots_dir = paths.resolve(&a.roots);
    let roots_prefix = annotation_prefix(&roots_dir)?;
    let (roots, truths) = load_annotations(&roots_dir, &roots_prefix, &source)?;
    let annotated: Vec<(RootEntity, SummarySet)> = roots
        .into_iter()
        .map(|r| {
            let set = truths.get(&r.entity).cloned().unwrap_or_else(|| SummarySet::new(r.entity));
            (r, set)
        })
        .collect();

    let (params, size_label) = a.walk.params(a.min_summaries);
    let meta = BundleMeta {
        variant: a.name.unwrap_or(source_prefix),
        size: size_label.into(),
        ..BundleMeta::default()
    };
    let (bundle, report) = generate(&source, &annotated, &params, a.seed, meta).map_err(|e| match e {
        GenerateError::NoQualifyingRoots(_) => Failure::new(EXIT_NO_ROOTS, e),
        GenerateError::Sample(s) => sampling_failure(s),
        GenerateError::Connect(c) => connect_failure(c),
    })?;
    log::info!(
        "{} of {} roots qualified; {} walks sampled {} triples; {} bridge triples over {} passes",
        report.qualified,
        report.candidates,
        report.walks,
        report.sampled_triples,
        report.connect.triples_added,
        report.connect.passes
    );

    let out = paths.resolve(&a.out);
    let prefix = bundle.meta.prefix();
    save_bundle(&bundle, &out, &prefix).with_context(|| format!("cannot write bundle to {}", out.display()))?;
    println!("bundle            {}", out.join(&prefix).display());
    println!("{}", dataset_stats(&bundle));
    Ok(())
}

fn cmd_split(paths: &Paths, a: SplitArgs) -> CmdResult {
    let bundle_dir = paths.resolve(&a.bundle_dir);
    let bundle = load_bundle(&bundle_dir, &detect_prefix(&bundle_dir)?)?;
    let source_dir = paths.resolve(&a.source_dir);
    let source = load_graph(&source_dir, &detect_prefix(&source_dir)?)?;
    let fractions: [f64; 3] = a
        .fractions
        .as_slice()
        .try_into()
        .map_err(|_| anyhow!("--fractions takes exactly three values"))?;

    let explicit_walks = a.walk.size.is_some() || a.walk.min_rw.is_some();
    let params = match bundle.meta.params {
        Some(stored) if !explicit_walks => GeneratorParams {
            max_threads: a.walk.threads,
            ..stored
        },
        _ => a.walk.params(GeneratorParams::default().min_valid_summary_edges).0,
    };
    let output = split_dataset(&bundle, &source, fractions, &params, a.seed).map_err(sampling_failure)?;
    for category in &output.small_categories {
        log::warn!("category {category:?} is too small to stratify; its roots are all in train");
    }

    let out = paths.resolve(&a.out);
    println!("split  roots  entities  triples  components  path");
    for (name, b) in SPLIT_NAMES.iter().zip(&output.bundles) {
        let dir = out.join(name);
        let prefix = b.meta.prefix();
        save_bundle(b, &dir, &prefix).with_context(|| format!("cannot write {}", dir.display()))?;
        println!(
            "{name:<6} {:>5}  {:>8}  {:>7}  {:>10}  {}",
            b.roots.len(),
            b.graph.entity_count(),
            b.graph.triple_count(),
            b.graph.weakly_connected_components().len(),
            dir.display()
        );
    }
    Ok(())
}

fn cmd_evaluate(paths: &Paths, a: EvaluateArgs) -> CmdResult {
    let methods: Vec<Method> = if a.method.iter().any(|m| m == "all") {
        Method::BASELINES.to_vec()
    } else {
        a.method.iter().map(|m| m.parse()).collect::<Result<_, _>>()?
    };
    let cutoffs: Vec<Cutoff> = a.cutoffs.iter().map(|c| c.parse()).collect::<Result<_, _>>()?;
    let bundle_dir = paths.resolve(&a.bundle_dir);
    let bundle = load_bundle(&bundle_dir, &detect_prefix(&bundle_dir)?)?;
    if bundle.roots.is_empty() {
        return Err(anyhow!("bundle in {} has no root entities", bundle_dir.display()).into());
    }

    let pool = thread_pool(a.threads)?;
    let mut rows = Vec::new();
    let mut failed = 0;
    for method in methods {
        let eval = pool.install(|| {
            let summarizer = method.build(&bundle, a.seed);
            evaluate(&bundle, summarizer.as_ref(), &cutoffs)
        });
        for (root, reason) in &eval.failures {
            log::warn!("{method}: root {} failed: {reason}", bundle.graph.entity(*root).external_id);
        }
        failed += eval.failures.len();
        rows.extend(eval.rows);
    }

    if let Some(path) = &a.report {
        let path = paths.resolve(path);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        write_report_csv(&rows, BufWriter::new(file))?;
    }
    let mut stdout = io::stdout().lock();
    stdout.write_all(format_report(&rows).as_bytes())?;
    stdout.flush()?;
    if failed > 0 {
        return Err(Failure::new(EXIT_PARTIAL, anyhow!("{failed} root evaluation(s) failed")));
    }
    Ok(())
}

fn cmd_stats(paths: &Paths, a: StatsArgs) -> CmdResult {
    let dir = paths.resolve(&a.bundle_dir);
    let bundle = load_bundle(&dir, &detect_prefix(&dir)?)?;
    let stats = dataset_stats(&bundle);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
    } else {
        println!("{stats}");
    }
    Ok(())
}
