//! Command-line front end for the taxonet pipeline.
//!
//! Every stage subcommand runs in one of two modes: with `--config` it
//! executes that stage inside the configured pipeline (resolved paths,
//! manifest bookkeeping), and with direct file flags it acts as a plain
//! file-to-file transform. `run` executes all stages in order.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use taxonet_core::context::{build_contexts, read_contexts, write_contexts, ContextSpec};
use taxonet_core::dih::{compute_pairwise_features, Measure, PairwiseFeatures};
use taxonet_core::embedding::{import_embedding, train_embedding, EmbedConfig};
use taxonet_core::eval::{evaluate, LabeledPairSet};
use taxonet_core::graph::{target_vocabulary, Corpus, HinGraph, Vocabulary};
use taxonet_core::model::{
    rank_pairs, train, ContextPairSource, CorruptSlot, ModelParams, NodeFeatureTable,
    RankedPairList, TrainConfig,
};
use taxonet_core::pipeline::{
    candidate_pairs, run_pipeline, run_single_stage, CandidatePolicy, PipelineConfig, Stage,
    StageAction,
};
use taxonet_core::seeds::{extract_seed_pairs, Pattern, SeedPairSet};
use taxonet_core::synth::{
    emit_synthetic_hin, SynthConfig, EDGES_FILE, NODES_FILE, SCHEMA_FILE,
};
use taxonet_core::taxonomy::{
    build_taxonomy, RemovalPolicy, DEFAULT_TOP_EDGES, DEFAULT_TOP_TERMS,
};

#[derive(Parser)]
#[command(name = "taxonet", version, about = "Hypernymy discovery over text-rich networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Pipeline configuration file (TOML); stage subcommands run against it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configuration seed (direct mode: the stage seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Force single-threaded execution (outputs are identical either way)
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic network, corpus, and labels
    Synth(SynthArgs),
    /// Extract weak-supervision hypernym pairs from the corpus
    ExtractSeeds(ExtractSeedsArgs),
    /// Train (or import) node embedding vectors
    Embed(EmbedArgs),
    /// Materialize per-term contextual-unit indexes
    BuildContexts(BuildContextsArgs),
    /// Compute inclusion measures for candidate pairs
    ComputeFeatures(ComputeFeaturesArgs),
    /// Fit the pair scoring model on the extracted seeds
    Train(TrainArgs),
    /// Score and rank all candidate pairs with a trained model
    Score(ScoreArgs),
    /// Compute precision and rank metrics for a ranked list
    Evaluate(EvaluateArgs),
    /// Prune and cycle-break a ranked list into a DAG
    BuildTaxonomy(BuildTaxonomyArgs),
    /// Run every stage in order
    Run(RunArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write the dataset into
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    #[arg(long, default_value_t = 1)]
    terms_per_concept: usize,
    #[arg(long, default_value_t = 2000)]
    documents: usize,
    /// Probability a document tags a term of each ancestor concept
    #[arg(long, default_value_t = 0.3)]
    p_anc: f64,
    #[arg(long, default_value_t = 8)]
    docs_per_group: usize,
    /// Fraction of true pairs stated via extraction patterns in the corpus
    #[arg(long, default_value_t = 0.4)]
    hearst_fraction: f64,
}

#[derive(Args)]
struct ExtractSeedsArgs {
    /// Directory holding nodes.tsv, edges.tsv, schema.json
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Node type whose text field defines the term vocabulary
    #[arg(long, default_value = "keyword")]
    target_type: String,
    /// Take the term vocabulary from the graph (always on; accepted for
    /// interface stability)
    #[arg(long)]
    vocab_from_graph: bool,
    /// Pattern set to match ("default" is the only one available)
    #[arg(long, default_value = "default")]
    patterns: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Directory holding nodes.tsv, edges.tsv, schema.json
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Reuse vectors from an existing embedding file instead of training
    #[arg(long)]
    import: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildContextsArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "keyword")]
    target_type: String,
    /// Context definition: simplest | groupby:<node_type> | cluster:<K>
    #[arg(long = "spec")]
    specs: Vec<String>,
    /// Embedding file (required by cluster contexts)
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeFeaturesArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "keyword")]
    target_type: String,
    #[arg(long)]
    contexts: Option<PathBuf>,
    /// Candidate pairs: labels | cooccur | all
    #[arg(long, default_value = "labels")]
    candidates: String,
    /// Labels file (required by the labels candidate policy)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Inclusion measures to compute (default: m1 m2 m3 m4)
    #[arg(long = "measure")]
    measures: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "keyword")]
    target_type: String,
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    contexts: Option<PathBuf>,
    /// Pairwise feature file; its pairs widen the negative-sampling pool
    #[arg(long)]
    features: Option<PathBuf>,
    /// Inclusion measures (must match the feature file layout)
    #[arg(long = "measure")]
    measures: Vec<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Negative pairs sampled per positive
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    p_phi: Option<f64>,
    #[arg(long)]
    p_psi: Option<f64>,
    #[arg(long)]
    node_hidden: Option<usize>,
    /// Which slot negative sampling corrupts: hyponym | hypernym
    #[arg(long)]
    corrupt: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-epoch loss trace (TSV)
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "keyword")]
    target_type: String,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    ranked: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Cutoff for precision@k (repeatable)
    #[arg(long = "k")]
    ks: Vec<usize>,
    /// Seed for shuffling ties before the stable sort
    #[arg(long)]
    tie_seed: Option<u64>,
    /// Also write the metrics JSON here (always printed to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildTaxonomyArgs {
    #[arg(long)]
    ranked: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOP_TERMS)]
    top_terms: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_EDGES)]
    top_edges: usize,
    /// Cycle-edge removal policy: uniform | score_weighted
    #[arg(long, default_value = "uniform")]
    policy: String,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_dot: Option<PathBuf>,
    #[arg(long)]
    out_removed: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Rerun every stage even when recorded input hashes still match
    #[arg(long)]
    force: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let threads = if cli.global.deterministic {
        1
    } else {
        cli.global.threads
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("worker pool")?;
    }
    match cli.command {
        Command::Synth(args) => cmd_synth(&cli.global, args),
        Command::ExtractSeeds(args) => cmd_extract_seeds(&cli.global, args),
        Command::Embed(args) => cmd_embed(&cli.global, args),
        Command::BuildContexts(args) => cmd_build_contexts(&cli.global, args),
        Command::ComputeFeatures(args) => cmd_compute_features(&cli.global, args),
        Command::Train(args) => cmd_train(&cli.global, args),
        Command::Score(args) => cmd_score(&cli.global, args),
        Command::Evaluate(args) => cmd_evaluate(&cli.global, args),
        Command::BuildTaxonomy(args) => cmd_build_taxonomy(&cli.global, args),
        Command::Run(args) => cmd_run(&cli.global, args),
    }
}

/// Loads the pipeline config, applying the global seed override.
fn load_config(global: &GlobalArgs) -> Result<(PipelineConfig, PathBuf)> {
    let path = global
        .config
        .as_ref()
        .context("--config is required for this mode")?;
    let (mut config, base) = PipelineConfig::load(path)?;
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok((config, base))
}

/// Runs `stage` under the config when `--config` was given; returns false
/// when the caller should run in direct mode instead.
fn config_mode(global: &GlobalArgs, stage: Stage, direct_flags: bool) -> Result<bool> {
    if global.config.is_none() {
        return Ok(false);
    }
    if direct_flags {
        bail!(
            "pass either --config or the direct file flags for {}, not both",
            stage.name()
        );
    }
    let (config, base) = load_config(global)?;
    run_single_stage(&config, &base, stage)?;
    Ok(true)
}

fn seed_of(global: &GlobalArgs) -> u64 {
    global.seed.unwrap_or(42)
}

fn load_graph_dir(dir: &Path) -> Result<HinGraph> {
    Ok(HinGraph::load(
        &dir.join(NODES_FILE),
        &dir.join(EDGES_FILE),
        &dir.join(SCHEMA_FILE),
    )?)
}

fn load_graph_and_vocab(dir: &Path, target_type: &str) -> Result<(HinGraph, Vocabulary)> {
    let graph = load_graph_dir(dir)?;
    let vocab = target_vocabulary(&graph, target_type)?;
    Ok((graph, vocab))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required (or pass --config)"))
}

fn parse_specs(specs: &[String]) -> Result<Vec<ContextSpec>> {
    if specs.is_empty() {
        bail!("at least one --spec is required");
    }
    specs.iter().map(|s| Ok(s.parse::<ContextSpec>()?)).collect()
}

fn parse_measures(labels: &[String]) -> Result<Vec<Measure>> {
    if labels.is_empty() {
        return Ok(Measure::all().to_vec());
    }
    labels.iter().map(|l| Ok(Measure::from_label(l)?)).collect()
}

fn cmd_synth(global: &GlobalArgs, args: SynthArgs) -> Result<()> {
    let config = SynthConfig {
        depth: args.depth,
        branching: args.branching,
        terms_per_concept: args.terms_per_concept,
        documents: args.documents,
        p_anc: args.p_anc,
        docs_per_group: args.docs_per_group,
        hearst_fraction: args.hearst_fraction,
        seed: seed_of(global),
    };
    let output = emit_synthetic_hin(&config, &args.out)?;
    println!(
        "wrote {} ({} nodes, {} true pairs, {} labeled pairs)",
        args.out.display(),
        output.graph.node_count(),
        output.closure.len(),
        output.labels.len()
    );
    Ok(())
}

fn cmd_extract_seeds(global: &GlobalArgs, args: ExtractSeedsArgs) -> Result<()> {
    if args.patterns != "default" {
        bail!("only the default pattern set is available");
    }
    let direct = args.graph.is_some() || args.corpus.is_some() || args.out.is_some();
    if config_mode(global, Stage::ExtractSeeds, direct)? {
        return Ok(());
    }
    let graph_dir = require(args.graph, "graph")?;
    let corpus_path = require(args.corpus, "corpus")?;
    let out = require(args.out, "out")?;
    let (graph, vocab) = load_graph_and_vocab(&graph_dir, &args.target_type)?;
    let corpus = Corpus::load(&corpus_path)?;
    corpus.validate_against(&graph)?;
    let seeds = extract_seed_pairs(&corpus, &vocab, &Pattern::all());
    seeds.write(&out, &vocab)?;
    println!("extracted {} seed pairs to {}", seeds.len(), out.display());
    Ok(())
}

fn cmd_embed(global: &GlobalArgs, args: EmbedArgs) -> Result<()> {
    let direct = args.graph.is_some() || args.import.is_some() || args.out.is_some();
    if config_mode(global, Stage::Embed, direct)? {
        return Ok(());
    }
    let out = require(args.out, "out")?;
    let defaults = EmbedConfig::default();
    let store = match args.import {
        Some(path) => import_embedding(&path)?,
        None => {
            let graph_dir = require(args.graph, "graph")?;
            let graph = load_graph_dir(&graph_dir)?;
            let config = EmbedConfig {
                dim: args.dim.unwrap_or(defaults.dim),
                walks_per_node: args.walks_per_node.unwrap_or(defaults.walks_per_node),
                walk_length: args.walk_length.unwrap_or(defaults.walk_length),
                window: args.window.unwrap_or(defaults.window),
                negatives: args.negatives.unwrap_or(defaults.negatives),
                epochs: args.epochs.unwrap_or(defaults.epochs),
                learning_rate: args.learning_rate.unwrap_or(defaults.learning_rate),
            };
            train_embedding(&graph, &config, seed_of(global))?
        }
    };
    store.write(&out)?;
    println!("wrote vectors to {}", out.display());
    Ok(())
}

fn cmd_build_contexts(global: &GlobalArgs, args: BuildContextsArgs) -> Result<()> {
    let direct = args.graph.is_some() || !args.specs.is_empty() || args.out.is_some();
    if config_mode(global, Stage::BuildContexts, direct)? {
        return Ok(());
    }
    let graph_dir = require(args.graph, "graph")?;
    let out = require(args.out, "out")?;
    let specs = parse_specs(&args.specs)?;
    let (graph, vocab) = load_graph_and_vocab(&graph_dir, &args.target_type)?;
    let store = match &args.vectors {
        Some(path) => Some(import_embedding(path)?),
        None => None,
    };
    let contexts = build_contexts(&graph, &vocab, &specs, store.as_ref(), seed_of(global))?;
    write_contexts(&out, &contexts)?;
    println!("wrote {} context indexes to {}", contexts.len(), out.display());
    Ok(())
}

fn parse_candidates(label: &str) -> Result<CandidatePolicy> {
    match label {
        "labels" => Ok(CandidatePolicy::Labels),
        "cooccur" => Ok(CandidatePolicy::Cooccur),
        "all" => Ok(CandidatePolicy::All),
        other => bail!("unknown candidate policy {other:?} (labels | cooccur | all)"),
    }
}

fn cmd_compute_features(global: &GlobalArgs, args: ComputeFeaturesArgs) -> Result<()> {
    let direct = args.graph.is_some() || args.contexts.is_some() || args.out.is_some();
    if config_mode(global, Stage::ComputeFeatures, direct)? {
        return Ok(());
    }
    let graph_dir = require(args.graph, "graph")?;
    let contexts_path = require(args.contexts, "contexts")?;
    let out = require(args.out, "out")?;
    let policy = parse_candidates(&args.candidates)?;
    let measures = parse_measures(&args.measures)?;
    let (_graph, vocab) = load_graph_and_vocab(&graph_dir, &args.target_type)?;
    let contexts = read_contexts(&contexts_path)?;
    let pairs = candidate_pairs(policy, args.labels.as_deref(), &vocab, &contexts)?;
    if pairs.is_empty() {
        bail!("candidate policy produced no pairs to score");
    }
    let features = compute_pairwise_features(&pairs, &contexts, &measures, Default::default())?;
    features.write(&out, &vocab)?;
    println!(
        "wrote {} feature rows ({} columns) to {}",
        pairs.len(),
        features.layout().len(),
        out.display()
    );
    Ok(())
}

fn parse_corrupt(label: &str) -> Result<CorruptSlot> {
    match label {
        "hyponym" => Ok(CorruptSlot::Hyponym),
        "hypernym" => Ok(CorruptSlot::Hypernym),
        other => bail!("unknown corrupt slot {other:?} (hyponym | hypernym)"),
    }
}

fn cmd_train(global: &GlobalArgs, args: TrainArgs) -> Result<()> {
    let direct = args.graph.is_some() || args.seeds.is_some() || args.out.is_some();
    if config_mode(global, Stage::Train, direct)? {
        return Ok(());
    }
    let graph_dir = require(args.graph, "graph")?;
    let seeds_path = require(args.seeds, "seeds")?;
    let vectors_path = require(args.vectors, "vectors")?;
    let contexts_path = require(args.contexts, "contexts")?;
    let features_path = require(args.features, "features")?;
    let out = require(args.out, "out")?;
    let (_graph, vocab) = load_graph_and_vocab(&graph_dir, &args.target_type)?;
    let seeds = SeedPairSet::read(&seeds_path, &vocab)?;
    let store = import_embedding(&vectors_path)?;
    let node = NodeFeatureTable::from_store(&vocab, &store)?;
    let contexts = read_contexts(&contexts_path)?;
    let measures = parse_measures(&args.measures)?;
    let source = ContextPairSource::new(&contexts, &measures);
    let features = PairwiseFeatures::read(&features_path, &vocab)?;
    let mut extra: Vec<_> = features
        .pairs()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    extra.sort_unstable();
    extra.dedup();
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        epochs: args.epochs.unwrap_or(defaults.epochs),
        batch_size: args.batch_size.unwrap_or(defaults.batch_size),
        learning_rate: args.learning_rate.unwrap_or(defaults.learning_rate),
        negatives: args.negatives.unwrap_or(defaults.negatives),
        p_phi: args.p_phi.unwrap_or(defaults.p_phi),
        p_psi: args.p_psi.unwrap_or(defaults.p_psi),
        node_hidden: args.node_hidden.unwrap_or(defaults.node_hidden),
        corrupt: match &args.corrupt {
            Some(label) => parse_corrupt(label)?,
            None => defaults.corrupt,
        },
        seed: seed_of(global),
    };
    let trained = train(&seeds, &node, &source, &extra, &config)?;
    trained.params.save(&out)?;
    if let Some(trace_path) = &args.trace {
        let mut text = String::from("epoch\tloss\n");
        for (i, loss) in trained.trace.iter().enumerate() {
            text.push_str(&format!("{i}\t{loss}\n"));
        }
        std::fs::write(trace_path, text)
            .with_context(|| format!("writing {}", trace_path.display()))?;
    }
    let last = trained.trace.last().copied().unwrap_or(f64::NAN);
    println!("trained model written to {} (final loss {last})", out.display());
    Ok(())
}

fn cmd_score(global: &GlobalArgs, args: ScoreArgs) -> Result<()> {
    let direct = args.graph.is_some() || args.model.is_some() || args.out.is_some();
    if config_mode(global, Stage::Score, direct)? {
        return Ok(());
    }
    let graph_dir = require(args.graph, "graph")?;
    let features_path = require(args.features, "features")?;
    let vectors_path = require(args.vectors, "vectors")?;
    let model_path = require(args.model, "model")?;
    let out = require(args.out, "out")?;
    let (_graph, vocab) = load_graph_and_vocab(&graph_dir, &args.target_type)?;
    let features = PairwiseFeatures::read(&features_path, &vocab)?;
    let params = ModelParams::load(&model_path, Some(features.layout()))?;
    let store = import_embedding(&vectors_path)?;
    let node = NodeFeatureTable::from_store(&vocab, &store)?;
    let ranked = rank_pairs(&params, &features, &node, &vocab, seed_of(global))?;
    ranked.write(&out)?;
    println!("ranked {} pairs to {}", ranked.len(), out.display());
    Ok(())
}

fn cmd_evaluate(global: &GlobalArgs, args: EvaluateArgs) -> Result<()> {
    let direct = args.ranked.is_some() || args.labels.is_some();
    if config_mode(global, Stage::Evaluate, direct)? {
        return Ok(());
    }
    let ranked_path = require(args.ranked, "ranked")?;
    let labels_path = require(args.labels, "labels")?;
    let ranked = RankedPairList::read(&ranked_path)?;
    let labels = LabeledPairSet::read(&labels_path)?;
    let ks = if args.ks.is_empty() {
        vec![100, 1000]
    } else {
        args.ks.clone()
    };
    let tie_seed = args.tie_seed.unwrap_or_else(|| seed_of(global));
    let report = evaluate(&ranked, &labels, &ks, tie_seed)?;
    if let Some(out) = &args.out {
        report.write(out)?;
    }
    print!("{}", report.to_json());
    Ok(())
}

fn parse_policy(label: &str) -> Result<RemovalPolicy> {
    match label {
        "uniform" => Ok(RemovalPolicy::Uniform),
        "score_weighted" => Ok(RemovalPolicy::ScoreWeighted),
        other => bail!("unknown removal policy {other:?} (uniform | score_weighted)"),
    }
}

fn cmd_build_taxonomy(global: &GlobalArgs, args: BuildTaxonomyArgs) -> Result<()> {
    let direct = args.ranked.is_some() || args.out_json.is_some();
    if config_mode(global, Stage::BuildTaxonomy, direct)? {
        return Ok(());
    }
    let ranked_path = require(args.ranked, "ranked")?;
    let out_json = require(args.out_json, "out-json")?;
    let policy = parse_policy(&args.policy)?;
    let ranked = RankedPairList::read(&ranked_path)?;
    let dag = build_taxonomy(
        &ranked,
        args.top_terms,
        args.top_edges,
        policy,
        seed_of(global),
    )?;
    dag.write_json(&out_json)?;
    if let Some(dot) = &args.out_dot {
        dag.write_dot(dot)?;
    }
    if let Some(removed) = &args.out_removed {
        dag.write_removed(removed)?;
    }
    println!(
        "taxonomy with {} terms, {} edges ({} removed) to {}",
        dag.terms.len(),
        dag.edges.len(),
        dag.removed_edges.len(),
        out_json.display()
    );
    Ok(())
}

fn cmd_run(global: &GlobalArgs, args: RunArgs) -> Result<()> {
    let (config, base) = load_config(global)?;
    let reports = run_pipeline(&config, &base, !args.force)?;
    for report in &reports {
        let action = match report.action {
            StageAction::Ran => "ran",
            StageAction::Skipped => "skipped",
        };
        println!("{}: {}", report.stage, action);
    }
    Ok(())
}
