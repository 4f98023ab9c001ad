//! End-to-end pipeline: TOML configuration, sequential stages, and a
//! hash-based manifest for resumable runs.
//!
//! Stages run in a fixed order: extract-seeds, embed, build-contexts,
//! compute-features, train, score, evaluate, build-taxonomy. Every stage
//! reads and writes plain files; the manifest records the SHA-256 of each
//! stage's inputs and outputs plus its derived seed. Under `--resume`, a
//! stage is skipped when its recorded input hashes match the files on disk
//! and its outputs verify; an output that exists but no longer matches its
//! recorded hash aborts the run rather than silently recomputing or
//! reusing it.
//!
//! One global seed derives per-stage seeds by fixed offsets so stages are
//! individually reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::context::{build_contexts, read_contexts, write_contexts, ContextIndex, ContextSpec};
use crate::dih::{compute_pairwise_features, Measure, PairwiseFeatures};
use crate::embedding::{import_embedding, train_embedding, EmbedConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, LabeledPairSet};
use crate::graph::{target_vocabulary, write_text, Corpus, HinGraph, TermId, Vocabulary};
use crate::model::{
    rank_pairs, train, ContextPairSource, ModelParams, NodeFeatureTable, RankedPairList,
    TrainConfig,
};
use crate::seeds::{extract_seed_pairs, Pattern, SeedPairSet};
use crate::taxonomy::{build_taxonomy, RemovalPolicy, DEFAULT_TOP_EDGES, DEFAULT_TOP_TERMS};

pub const SEEDS_FILE: &str = "seeds.tsv";
pub const EMBEDDING_FILE: &str = "embedding.txt";
pub const CONTEXTS_FILE: &str = "contexts.json";
pub const FEATURES_FILE: &str = "features.tsv";
pub const MODEL_FILE: &str = "model.json";
pub const TRACE_FILE: &str = "loss_trace.tsv";
pub const RANKED_FILE: &str = "ranked.tsv";
pub const METRICS_FILE: &str = "metrics.json";
pub const TAXONOMY_JSON_FILE: &str = "taxonomy.json";
pub const TAXONOMY_DOT_FILE: &str = "taxonomy.dot";
pub const REMOVED_EDGES_FILE: &str = "removed_edges.tsv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Per-stage seed offsets from the global seed.
pub const SEED_OFFSET_EMBED: u64 = 1;
pub const SEED_OFFSET_CONTEXTS: u64 = 2;
pub const SEED_OFFSET_TRAIN: u64 = 3;
pub const SEED_OFFSET_SCORE_TIE: u64 = 4;
pub const SEED_OFFSET_EVAL_TIE: u64 = 5;
pub const SEED_OFFSET_TAXONOMY: u64 = 6;

/// Where the input dataset and the artifacts live. Relative paths resolve
/// against the configuration file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub data_dir: String,
    pub out_dir: String,
    pub nodes: Option<String>,
    pub edges: Option<String>,
    pub schema: Option<String>,
    pub corpus: Option<String>,
    pub labels: Option<String>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            data_dir: "data".into(),
            out_dir: "out".into(),
            nodes: None,
            edges: None,
            schema: None,
            corpus: None,
            labels: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub target_type: String,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            target_type: "keyword".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextsConfig {
    pub specs: Vec<String>,
}

impl Default for ContextsConfig {
    fn default() -> Self {
        ContextsConfig {
            specs: vec!["simplest".into()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasuresConfig {
    #[serde(rename = "use")]
    pub labels: Vec<String>,
}

impl Default for MeasuresConfig {
    fn default() -> Self {
        MeasuresConfig {
            labels: vec!["m1".into(), "m2".into(), "m3".into(), "m4".into()],
        }
    }
}

/// Embedding stage settings; `import` bypasses training with an external
/// vector file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSection {
    #[serde(flatten)]
    pub params: EmbedConfig,
    pub import: Option<String>,
}

/// Which ordered pairs get scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// Pairs from the labels file (terms missing from the vocabulary are
    /// skipped with a warning).
    #[default]
    Labels,
    /// Ordered pairs of terms sharing at least one context unit.
    Cooccur,
    /// Every ordered pair of distinct terms.
    All,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConfig {
    pub candidates: CandidatePolicy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub ks: Vec<usize>,
    /// Overrides the derived tie seed when set.
    pub tie_seed: Option<u64>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            ks: vec![100, 1000],
            tie_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaxonomyConfig {
    pub top_terms: usize,
    pub top_edges: usize,
    pub policy: RemovalPolicy,
}

impl Default for TaxonomyConfig {
    fn default() -> Self {
        TaxonomyConfig {
            top_terms: DEFAULT_TOP_TERMS,
            top_edges: DEFAULT_TOP_EDGES,
            policy: RemovalPolicy::Uniform,
        }
    }
}

/// Full pipeline configuration (TOML).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub graph: GraphConfig,
    pub contexts: ContextsConfig,
    pub measures: MeasuresConfig,
    pub embedding: EmbeddingSection,
    /// Trainer settings; the pipeline overrides `train.seed` with the
    /// global seed plus the train offset.
    pub train: TrainConfig,
    pub score: ScoreConfig,
    pub evaluate: EvaluateConfig,
    pub taxonomy: TaxonomyConfig,
}

impl PipelineConfig {
    /// Loads the config and returns it with the directory relative paths
    /// resolve against.
    pub fn load(path: &Path) -> Result<(PipelineConfig, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, base))
    }

    pub fn validate(&self) -> Result<()> {
        if self.contexts.specs.is_empty() {
            return Err(Error::Config("at least one context spec is required".into()));
        }
        for spec in &self.contexts.specs {
            spec.parse::<ContextSpec>()?;
        }
        if self.measures.labels.is_empty() {
            return Err(Error::Config("at least one measure is required".into()));
        }
        for label in &self.measures.labels {
            Measure::from_label(label)?;
        }
        if self.evaluate.ks.is_empty() {
            return Err(Error::Config("evaluate.ks must not be empty".into()));
        }
        Ok(())
    }

    fn context_specs(&self) -> Vec<ContextSpec> {
        self.contexts
            .specs
            .iter()
            .map(|s| s.parse().expect("validated"))
            .collect()
    }

    fn measure_list(&self) -> Vec<Measure> {
        self.measures
            .labels
            .iter()
            .map(|l| Measure::from_label(l).expect("validated"))
            .collect()
    }

    /// Digest of the canonical serialized config; changing any setting
    /// invalidates every recorded stage.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        hex_digest(canonical.as_bytes())
    }
}

/// All stage input and output locations, resolved.
#[derive(Debug, Clone)]
pub struct ResolvedPaths {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub schema: PathBuf,
    pub corpus: PathBuf,
    pub labels: PathBuf,
    pub import: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seeds: PathBuf,
    pub embedding: PathBuf,
    pub contexts: PathBuf,
    pub features: PathBuf,
    pub model: PathBuf,
    pub trace: PathBuf,
    pub ranked: PathBuf,
    pub metrics: PathBuf,
    pub taxonomy_json: PathBuf,
    pub taxonomy_dot: PathBuf,
    pub removed_edges: PathBuf,
    pub manifest: PathBuf,
}

impl ResolvedPaths {
    pub fn new(config: &PipelineConfig, base: &Path) -> ResolvedPaths {
        let data = base.join(&config.paths.data_dir);
        let out = base.join(&config.paths.out_dir);
        let pick = |explicit: &Option<String>, default: PathBuf| match explicit {
            Some(p) => base.join(p),
            None => default,
        };
        ResolvedPaths {
            nodes: pick(&config.paths.nodes, data.join("nodes.tsv")),
            edges: pick(&config.paths.edges, data.join("edges.tsv")),
            schema: pick(&config.paths.schema, data.join("schema.json")),
            corpus: pick(&config.paths.corpus, data.join("corpus.jsonl")),
            labels: pick(&config.paths.labels, data.join("labels.tsv")),
            import: config.embedding.import.as_ref().map(|p| base.join(p)),
            seeds: out.join(SEEDS_FILE),
            embedding: out.join(EMBEDDING_FILE),
            contexts: out.join(CONTEXTS_FILE),
            features: out.join(FEATURES_FILE),
            model: out.join(MODEL_FILE),
            trace: out.join(TRACE_FILE),
            ranked: out.join(RANKED_FILE),
            metrics: out.join(METRICS_FILE),
            taxonomy_json: out.join(TAXONOMY_JSON_FILE),
            taxonomy_dot: out.join(TAXONOMY_DOT_FILE),
            removed_edges: out.join(REMOVED_EDGES_FILE),
            manifest: out.join(MANIFEST_FILE),
            out_dir: out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    ExtractSeeds,
    Embed,
    BuildContexts,
    ComputeFeatures,
    Train,
    Score,
    Evaluate,
    BuildTaxonomy,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::ExtractSeeds,
        Stage::Embed,
        Stage::BuildContexts,
        Stage::ComputeFeatures,
        Stage::Train,
        Stage::Score,
        Stage::Evaluate,
        Stage::BuildTaxonomy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::ExtractSeeds => "extract-seeds",
            Stage::Embed => "embed",
            Stage::BuildContexts => "build-contexts",
            Stage::ComputeFeatures => "compute-features",
            Stage::Train => "train",
            Stage::Score => "score",
            Stage::Evaluate => "evaluate",
            Stage::BuildTaxonomy => "build-taxonomy",
        }
    }

    fn seed(&self, global: u64) -> Option<u64> {
        match self {
            Stage::ExtractSeeds => None,
            Stage::Embed => Some(global.wrapping_add(SEED_OFFSET_EMBED)),
            Stage::BuildContexts => Some(global.wrapping_add(SEED_OFFSET_CONTEXTS)),
            Stage::ComputeFeatures => None,
            Stage::Train => Some(global.wrapping_add(SEED_OFFSET_TRAIN)),
            Stage::Score => Some(global.wrapping_add(SEED_OFFSET_SCORE_TIE)),
            Stage::Evaluate => Some(global.wrapping_add(SEED_OFFSET_EVAL_TIE)),
            Stage::BuildTaxonomy => Some(global.wrapping_add(SEED_OFFSET_TAXONOMY)),
        }
    }

    fn inputs(&self, config: &PipelineConfig, paths: &ResolvedPaths) -> Vec<PathBuf> {
        let graph_files = || {
            vec![
                paths.nodes.clone(),
                paths.edges.clone(),
                paths.schema.clone(),
            ]
        };
        match self {
            Stage::ExtractSeeds => {
                let mut v = graph_files();
                v.push(paths.corpus.clone());
                v
            }
            Stage::Embed => {
                let mut v = graph_files();
                if let Some(import) = &paths.import {
                    v.push(import.clone());
                }
                v
            }
            Stage::BuildContexts => {
                let mut v = graph_files();
                let needs_vectors = config
                    .context_specs()
                    .iter()
                    .any(|s| matches!(s, ContextSpec::Cluster(_)));
                if needs_vectors {
                    v.push(paths.embedding.clone());
                }
                v
            }
            Stage::ComputeFeatures => {
                let mut v = graph_files();
                v.push(paths.contexts.clone());
                if config.score.candidates == CandidatePolicy::Labels {
                    v.push(paths.labels.clone());
                }
                v
            }
            Stage::Train => {
                let mut v = graph_files();
                v.extend([
                    paths.seeds.clone(),
                    paths.embedding.clone(),
                    paths.contexts.clone(),
                    paths.features.clone(),
                ]);
                v
            }
            Stage::Score => {
                let mut v = graph_files();
                v.extend([
                    paths.features.clone(),
                    paths.embedding.clone(),
                    paths.model.clone(),
                ]);
                v
            }
            Stage::Evaluate => vec![paths.ranked.clone(), paths.labels.clone()],
            Stage::BuildTaxonomy => vec![paths.ranked.clone()],
        }
    }

    fn outputs(&self, paths: &ResolvedPaths) -> Vec<PathBuf> {
        match self {
            Stage::ExtractSeeds => vec![paths.seeds.clone()],
            Stage::Embed => vec![paths.embedding.clone()],
            Stage::BuildContexts => vec![paths.contexts.clone()],
            Stage::ComputeFeatures => vec![paths.features.clone()],
            Stage::Train => vec![paths.model.clone(), paths.trace.clone()],
            Stage::Score => vec![paths.ranked.clone()],
            Stage::Evaluate => vec![paths.metrics.clone()],
            Stage::BuildTaxonomy => vec![
                paths.taxonomy_json.clone(),
                paths.taxonomy_dot.clone(),
                paths.removed_edges.clone(),
            ],
        }
    }

    fn execute(&self, config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
        match self {
            Stage::ExtractSeeds => stage_extract_seeds(config, paths),
            Stage::Embed => stage_embed(config, paths),
            Stage::BuildContexts => stage_build_contexts(config, paths),
            Stage::ComputeFeatures => stage_compute_features(config, paths),
            Stage::Train => stage_train(config, paths),
            Stage::Score => stage_score(config, paths),
            Stage::Evaluate => stage_evaluate(config, paths),
            Stage::BuildTaxonomy => stage_build_taxonomy(config, paths),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|stage| stage.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown stage {s:?}")))
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex_digest(&bytes))
}

const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct StageRecord {
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config_digest: String,
    stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    fn fresh(config_digest: String) -> Manifest {
        Manifest {
            version: MANIFEST_VERSION,
            config_digest,
            stages: BTreeMap::new(),
        }
    }

    /// Loads the manifest when it is usable for resuming: parseable, same
    /// version, same config digest. Otherwise starts fresh.
    fn load_or_fresh(path: &Path, config_digest: String) -> Manifest {
        let Ok(text) = std::fs::read_to_string(path) else {
            return Manifest::fresh(config_digest);
        };
        match serde_json::from_str::<Manifest>(&text) {
            Ok(m) if m.version == MANIFEST_VERSION && m.config_digest == config_digest => m,
            Ok(_) => {
                log::warn!("manifest at {} is for a different config; ignoring it", path.display());
                Manifest::fresh(config_digest)
            }
            Err(e) => {
                log::warn!("manifest at {} is unreadable ({e}); ignoring it", path.display());
                Manifest::fresh(config_digest)
            }
        }
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_text(path, &text)
    }
}

fn path_key(path: &Path, out_dir: &Path) -> String {
    match path.strip_prefix(out_dir) {
        Ok(rel) => rel.display().to_string(),
        Err(_) => path.display().to_string(),
    }
}

fn hash_paths(files: &[PathBuf], out_dir: &Path) -> Result<BTreeMap<String, String>> {
    files
        .iter()
        .map(|p| Ok((path_key(p, out_dir), hash_file(p)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageAction {
    Ran,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: &'static str,
    pub action: StageAction,
}

/// Runs all stages in order. With `resume`, stages whose recorded input
/// and output hashes still match are skipped; an output file that exists
/// but mismatches its recorded hash is an error.
pub fn run_pipeline(
    config: &PipelineConfig,
    base: &Path,
    resume: bool,
) -> Result<Vec<StageReport>> {
    config.validate()?;
    let paths = ResolvedPaths::new(config, base);
    std::fs::create_dir_all(&paths.out_dir).map_err(|e| Error::io(&paths.out_dir, e))?;
    let digest = config.digest();
    let mut manifest = if resume {
        Manifest::load_or_fresh(&paths.manifest, digest)
    } else {
        Manifest::fresh(digest)
    };
    let mut reports = Vec::with_capacity(Stage::ALL.len());
    for stage in Stage::ALL {
        let action =
            run_stage_inner(stage, config, &paths, &mut manifest, resume).inspect_err(|e| {
                log::error!("stage {} failed: {e}", stage.name());
            })?;
        manifest.write(&paths.manifest)?;
        reports.push(StageReport {
            stage: stage.name(),
            action,
        });
    }
    Ok(reports)
}

/// Runs one stage unconditionally and records it in the manifest.
pub fn run_single_stage(config: &PipelineConfig, base: &Path, stage: Stage) -> Result<()> {
    config.validate()?;
    let paths = ResolvedPaths::new(config, base);
    std::fs::create_dir_all(&paths.out_dir).map_err(|e| Error::io(&paths.out_dir, e))?;
    let mut manifest = Manifest::load_or_fresh(&paths.manifest, config.digest());
    run_stage_inner(stage, config, &paths, &mut manifest, false).inspect_err(|e| {
        log::error!("stage {} failed: {e}", stage.name());
    })?;
    manifest.write(&paths.manifest)
}

fn run_stage_inner(
    stage: Stage,
    config: &PipelineConfig,
    paths: &ResolvedPaths,
    manifest: &mut Manifest,
    resume: bool,
) -> Result<StageAction> {
    let inputs = hash_paths(&stage.inputs(config, paths), &paths.out_dir)?;
    let seed = stage.seed(config.seed);
    let outputs_paths = stage.outputs(paths);
    if resume {
        if let Some(record) = manifest.stages.get(stage.name()) {
            if record.inputs == inputs && record.seed == seed {
                let mut intact = true;
                for out in &outputs_paths {
                    let key = path_key(out, &paths.out_dir);
                    match (out.exists(), record.outputs.get(&key)) {
                        (true, Some(expected)) => {
                            if &hash_file(out)? != expected {
                                return Err(Error::CorruptedArtifact { path: out.clone() });
                            }
                        }
                        _ => {
                            intact = false;
                            break;
                        }
                    }
                }
                if intact {
                    log::info!("stage {} up to date; skipping", stage.name());
                    return Ok(StageAction::Skipped);
                }
            }
        }
    }
    log::info!("running stage {}", stage.name());
    stage.execute(config, paths)?;
    let outputs = hash_paths(&outputs_paths, &paths.out_dir)?;
    manifest.stages.insert(
        stage.name().to_string(),
        StageRecord {
            seed,
            inputs,
            outputs,
        },
    );
    Ok(StageAction::Ran)
}

fn load_graph(paths: &ResolvedPaths) -> Result<HinGraph> {
    HinGraph::load(&paths.nodes, &paths.edges, &paths.schema)
}

fn load_vocab(config: &PipelineConfig, graph: &HinGraph) -> Result<Vocabulary> {
    target_vocabulary(graph, &config.graph.target_type)
}

fn stage_extract_seeds(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let graph = load_graph(paths)?;
    let vocab = load_vocab(config, &graph)?;
    let corpus = Corpus::load(&paths.corpus)?;
    corpus.validate_against(&graph)?;
    let seeds = extract_seed_pairs(&corpus, &vocab, &Pattern::all());
    if seeds.is_empty() {
        log::warn!("no seed pairs extracted; training will fail without supervision");
    }
    seeds.write(&paths.seeds, &vocab)
}

fn stage_embed(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let store = match &paths.import {
        Some(import) => import_embedding(import)?,
        None => {
            let graph = load_graph(paths)?;
            train_embedding(
                &graph,
                &config.embedding.params,
                config.seed.wrapping_add(SEED_OFFSET_EMBED),
            )?
        }
    };
    store.write(&paths.embedding)
}

fn stage_build_contexts(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let graph = load_graph(paths)?;
    let vocab = load_vocab(config, &graph)?;
    let specs = config.context_specs();
    let needs_vectors = specs.iter().any(|s| matches!(s, ContextSpec::Cluster(_)));
    let store = if needs_vectors {
        Some(import_embedding(&paths.embedding)?)
    } else {
        None
    };
    let contexts = build_contexts(
        &graph,
        &vocab,
        &specs,
        store.as_ref(),
        config.seed.wrapping_add(SEED_OFFSET_CONTEXTS),
    )?;
    write_contexts(&paths.contexts, &contexts)
}

/// Candidate pairs under `policy`. The labels policy reads `labels_path`;
/// the cooccur policy inverts the context indexes.
pub fn candidate_pairs(
    policy: CandidatePolicy,
    labels_path: Option<&Path>,
    vocab: &Vocabulary,
    contexts: &[ContextIndex],
) -> Result<Vec<(TermId, TermId)>> {
    match policy {
        CandidatePolicy::Labels => {
            let path = labels_path.ok_or_else(|| {
                Error::InvalidParameter("labels candidate policy requires a labels file".into())
            })?;
            let labels = LabeledPairSet::read(path)?;
            let mut pairs = Vec::new();
            let mut skipped = 0usize;
            let mut seen = BTreeSet::new();
            for (h, c, _) in labels.iter() {
                match (vocab.id_of(h), vocab.id_of(c)) {
                    (Some(a), Some(b)) if a != b => {
                        if seen.insert((a, b)) {
                            pairs.push((a, b));
                        }
                    }
                    _ => skipped += 1,
                }
            }
            if skipped > 0 {
                log::warn!("{skipped} labeled pairs reference terms outside the vocabulary; skipped");
            }
            Ok(pairs)
        }
        CandidatePolicy::Cooccur => {
            let mut set: BTreeSet<(TermId, TermId)> = BTreeSet::new();
            for ctx in contexts {
                let mut unit_terms: HashMap<u32, Vec<TermId>> = HashMap::new();
                for t in vocab.ids() {
                    if let Some(units) = ctx.relevant_units(t) {
                        for &u in units {
                            unit_terms.entry(u).or_default().push(t);
                        }
                    }
                }
                for terms in unit_terms.values() {
                    for &a in terms {
                        for &b in terms {
                            if a != b {
                                set.insert((a, b));
                            }
                        }
                    }
                }
            }
            Ok(set.into_iter().collect())
        }
        CandidatePolicy::All => {
            let n = vocab.len();
            let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
            for a in vocab.ids() {
                for b in vocab.ids() {
                    if a != b {
                        pairs.push((a, b));
                    }
                }
            }
            Ok(pairs)
        }
    }
}

fn stage_compute_features(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let graph = load_graph(paths)?;
    let vocab = load_vocab(config, &graph)?;
    let contexts = read_contexts(&paths.contexts)?;
    let pairs = candidate_pairs(
        config.score.candidates,
        Some(&paths.labels),
        &vocab,
        &contexts,
    )?;
    if pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "candidate policy produced no pairs to score".into(),
        ));
    }
    let features =
        compute_pairwise_features(&pairs, &contexts, &config.measure_list(), Default::default())?;
    features.write(&paths.features, &vocab)
}

fn stage_train(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let graph = load_graph(paths)?;
    let vocab = load_vocab(config, &graph)?;
    let seeds = SeedPairSet::read(&paths.seeds, &vocab)?;
    let store = import_embedding(&paths.embedding)?;
    let node = NodeFeatureTable::from_store(&vocab, &store)?;
    let contexts = read_contexts(&paths.contexts)?;
    let measures = config.measure_list();
    let source = ContextPairSource::new(&contexts, &measures);
    let features = PairwiseFeatures::read(&paths.features, &vocab)?;
    let mut extra: Vec<TermId> = features
        .pairs()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    extra.sort_unstable();
    extra.dedup();
    let train_config = TrainConfig {
        seed: config.seed.wrapping_add(SEED_OFFSET_TRAIN),
        ..config.train.clone()
    };
    let trained = train(&seeds, &node, &source, &extra, &train_config)?;
    trained.params.save(&paths.model)?;
    let mut trace = String::from("epoch\tloss\n");
    for (i, loss) in trained.trace.iter().enumerate() {
        trace.push_str(&format!("{i}\t{loss}\n"));
    }
    write_text(&paths.trace, &trace)
}

fn stage_score(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let graph = load_graph(paths)?;
    let vocab = load_vocab(config, &graph)?;
    let features = PairwiseFeatures::read(&paths.features, &vocab)?;
    let params = ModelParams::load(&paths.model, Some(features.layout()))?;
    let store = import_embedding(&paths.embedding)?;
    let node = NodeFeatureTable::from_store(&vocab, &store)?;
    let ranked = rank_pairs(
        &params,
        &features,
        &node,
        &vocab,
        config.seed.wrapping_add(SEED_OFFSET_SCORE_TIE),
    )?;
    ranked.write(&paths.ranked)
}

fn stage_evaluate(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let ranked = RankedPairList::read(&paths.ranked)?;
    let labels = LabeledPairSet::read(&paths.labels)?;
    let tie_seed = config
        .evaluate
        .tie_seed
        .unwrap_or_else(|| config.seed.wrapping_add(SEED_OFFSET_EVAL_TIE));
    let report = evaluate(&ranked, &labels, &config.evaluate.ks, tie_seed)?;
    report.write(&paths.metrics)
}

fn stage_build_taxonomy(config: &PipelineConfig, paths: &ResolvedPaths) -> Result<()> {
    let ranked = RankedPairList::read(&paths.ranked)?;
    let dag = build_taxonomy(
        &ranked,
        config.taxonomy.top_terms,
        config.taxonomy.top_edges,
        config.taxonomy.policy,
        config.seed.wrapping_add(SEED_OFFSET_TAXONOMY),
    )?;
    dag.write_json(&paths.taxonomy_json)?;
    dag.write_dot(&paths.taxonomy_dot)?;
    dag.write_removed(&paths.removed_edges)
}
