//! Synthetic text-rich HIN generator with a planted concept hierarchy.
//!
//! A complete tree of concepts (heap indexing: children of concept `i` are
//! `B*i+1 ..= B*i+B`) carries one or more keyword terms per concept.
//! Documents are paper nodes, each owned by one concept: the first
//! `n_concepts` documents cover every concept once, the rest draw owners
//! uniformly. A document always tags its own concept's terms and tags one
//! term of each ancestor concept independently with probability `p_anc`.
//! Author nodes sit on root-to-leaf paths: each leaf gets one author whose
//! document block contains at least one document owned by every concept on
//! the path, filled round-robin to `docs_per_group` documents, so grouping
//! by author restores containment that per-document tagging destroys when
//! `p_anc` is low.
//!
//! Ground truth is the transitive closure of the tree over term pairs
//! (ancestor term → descendant term positive) plus ten sampled negatives
//! per positive: five keep the hypernym and corrupt the hyponym, five the
//! reverse. A configured fraction of the positive pairs is planted in the
//! corpus as Hearst pattern sentences, rotating over all six patterns, so
//! extractable pairs are a subset of the positives by construction.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::LabeledPairSet;
use crate::graph::{Corpus, Document, Edge, EdgeTypeDef, HinGraph, HinSchema, Node};

/// Generator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Levels below the root; depth 3 with branching 3 gives 40 concepts.
    pub depth: usize,
    pub branching: usize,
    pub terms_per_concept: usize,
    pub documents: usize,
    /// Probability that a document tags each ancestor of its own concept.
    pub p_anc: f64,
    /// Documents per author block; must cover a full root-to-leaf path.
    pub docs_per_group: usize,
    /// Fraction of ground-truth positives planted as Hearst sentences.
    pub hearst_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            depth: 3,
            branching: 3,
            terms_per_concept: 1,
            documents: 2000,
            p_anc: 0.3,
            docs_per_group: 8,
            hearst_fraction: 0.4,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn concept_count(&self) -> usize {
        let mut total = 0usize;
        let mut level = 1usize;
        for _ in 0..=self.depth {
            total += level;
            level *= self.branching;
        }
        total
    }

    fn leaf_count(&self) -> usize {
        self.branching.pow(self.depth as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.branching == 0 || self.terms_per_concept == 0 {
            return Err(Error::Config(
                "depth, branching, and terms_per_concept must be positive".into(),
            ));
        }
        for (name, p) in [("p_anc", self.p_anc), ("hearst_fraction", self.hearst_fraction)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name}={p} outside [0,1]")));
            }
        }
        if self.leaf_count() > self.documents {
            return Err(Error::Config(format!(
                "more groups ({}) than documents ({})",
                self.leaf_count(),
                self.documents
            )));
        }
        let concepts = self.concept_count();
        if self.documents < concepts {
            return Err(Error::Config(format!(
                "{} documents cannot cover {concepts} concepts",
                self.documents
            )));
        }
        if self.docs_per_group < self.depth + 1 {
            return Err(Error::Config(format!(
                "docs_per_group={} cannot cover a path of {} concepts",
                self.docs_per_group,
                self.depth + 1
            )));
        }
        Ok(())
    }
}

/// Generated dataset plus the planted structure for direct verification.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub graph: HinGraph,
    pub corpus: Corpus,
    pub labels: LabeledPairSet,
    /// (parent term, child term) surface pairs, one per tree edge and term
    /// combination.
    pub tree_edges: Vec<(String, String)>,
    /// All positive (ancestor term, descendant term) surface pairs.
    pub closure: Vec<(String, String)>,
}

fn parent_of(i: usize, branching: usize) -> Option<usize> {
    (i > 0).then(|| (i - 1) / branching)
}

fn ancestors(mut i: usize, branching: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while let Some(p) = parent_of(i, branching) {
        out.push(p);
        i = p;
    }
    out
}

fn term_surface(concept: usize, j: usize) -> String {
    format!("topic_{concept:03}_{j}")
}

const HEARST_TEMPLATES: usize = 6;

/// Pattern-final Hearst sentence for (hypernym y, hyponym x).
fn hearst_sentence(template: usize, y: &str, x: &str) -> Vec<String> {
    let words: Vec<&str> = match template % HEARST_TEMPLATES {
        0 => vec![y, "such", "as", x],
        1 => vec!["such", y, "as", x],
        2 => vec![x, "or", "other", y],
        3 => vec![x, "and", "other", y],
        4 => vec![y, "including", x],
        _ => vec![y, "especially", x],
    };
    words.into_iter().map(str::to_string).collect()
}

pub fn generate_synthetic_hin(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let concepts = config.concept_count();
    let branching = config.branching;
    let tpc = config.terms_per_concept;

    // Nodes: keywords, papers, authors.
    let schema = HinSchema {
        node_types: vec!["keyword".into(), "paper".into(), "author".into()],
        edge_types: vec![
            EdgeTypeDef {
                name: "tags".into(),
                src: "paper".into(),
                dst: "keyword".into(),
            },
            EdgeTypeDef {
                name: "writes".into(),
                src: "author".into(),
                dst: "paper".into(),
            },
        ],
    };
    let mut nodes = Vec::new();
    for c in 0..concepts {
        for j in 0..tpc {
            nodes.push(Node {
                id: format!("w{c:03}_{j}"),
                node_type: "keyword".into(),
                text_key: Some(term_surface(c, j)),
            });
        }
    }
    let paper_id = |i: usize| format!("p{i:04}");
    for i in 0..config.documents {
        nodes.push(Node {
            id: paper_id(i),
            node_type: "paper".into(),
            text_key: None,
        });
    }

    // Document ownership: one per concept first, then uniform.
    let mut owner = Vec::with_capacity(config.documents);
    for i in 0..config.documents {
        if i < concepts {
            owner.push(i);
        } else {
            owner.push(rng.random_range(0..concepts));
        }
    }
    let mut owned_docs: Vec<Vec<usize>> = vec![Vec::new(); concepts];
    for (doc, &c) in owner.iter().enumerate() {
        owned_docs[c].push(doc);
    }

    // Tag edges: own terms always, one term per ancestor with p_anc.
    let keyword_id = |c: usize, j: usize| format!("w{c:03}_{j}");
    let mut tag_edges: BTreeSet<(String, String)> = BTreeSet::new();
    for (doc, &c) in owner.iter().enumerate() {
        for j in 0..tpc {
            tag_edges.insert((paper_id(doc), keyword_id(c, j)));
        }
        for anc in ancestors(c, branching) {
            if rng.random::<f64>() < config.p_anc {
                let j = if tpc == 1 { 0 } else { rng.random_range(0..tpc) };
                tag_edges.insert((paper_id(doc), keyword_id(anc, j)));
            }
        }
    }

    // Author blocks: one author per leaf, one document owned by every path
    // concept, filled round-robin from the path's document pools.
    let leaf_start = concepts - config.leaf_count();
    let mut cursors = vec![0usize; concepts];
    let next_doc = |c: usize, cursors: &mut Vec<usize>| -> usize {
        let pool = &owned_docs[c];
        let doc = pool[cursors[c] % pool.len()];
        cursors[c] += 1;
        doc
    };
    let mut author_edges: BTreeSet<(String, String)> = BTreeSet::new();
    let author_id = |g: usize| format!("a{g:04}");
    for (g, leaf) in (leaf_start..concepts).enumerate() {
        let mut path = ancestors(leaf, branching);
        path.reverse();
        path.push(leaf);
        let mut block = BTreeSet::new();
        for &c in &path {
            block.insert(next_doc(c, &mut cursors));
        }
        let mut turn = 0usize;
        // Pools can be smaller than the block; bail once every pool is
        // exhausted of fresh documents.
        let mut stall = 0usize;
        while block.len() < config.docs_per_group && stall < path.len() {
            let c = path[turn % path.len()];
            turn += 1;
            if block.insert(next_doc(c, &mut cursors)) {
                stall = 0;
            } else {
                stall += 1;
            }
        }
        for doc in block {
            author_edges.insert((author_id(g), paper_id(doc)));
        }
    }
    for g in 0..config.leaf_count() {
        nodes.push(Node {
            id: author_id(g),
            node_type: "author".into(),
            text_key: None,
        });
    }

    let mut edges = Vec::new();
    for (src, dst) in &tag_edges {
        edges.push(Edge {
            src: src.clone(),
            dst: dst.clone(),
            edge_type: "tags".into(),
        });
    }
    for (src, dst) in &author_edges {
        edges.push(Edge {
            src: src.clone(),
            dst: dst.clone(),
            edge_type: "writes".into(),
        });
    }
    let graph = HinGraph::new(schema, nodes, edges)?;

    // Ground truth: transitive closure over term pairs.
    let mut tree_edges = Vec::new();
    let mut closure = Vec::new();
    for c in 1..concepts {
        let parent = parent_of(c, branching).expect("non-root");
        for ja in 0..tpc {
            for jb in 0..tpc {
                tree_edges.push((term_surface(parent, ja), term_surface(c, jb)));
            }
        }
        for anc in std::iter::once(parent).chain(ancestors(parent, branching)) {
            for ja in 0..tpc {
                for jb in 0..tpc {
                    closure.push((term_surface(anc, ja), term_surface(c, jb)));
                }
            }
        }
    }

    let mut labels = LabeledPairSet::new();
    let positive_set: BTreeSet<(&str, &str)> = closure
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    for (a, b) in &closure {
        labels.insert(a, b, true)?;
    }
    let all_terms: Vec<String> = (0..concepts)
        .flat_map(|c| (0..tpc).map(move |j| term_surface(c, j)))
        .collect();
    const NEGATIVES_PER_SIDE: usize = 5;
    const SAMPLING_ATTEMPTS: usize = 200;
    let mut starved = 0usize;
    let mut shortfall = 0usize;
    for (a, b) in &closure {
        for fix_hypernym in [true, false] {
            let mut emitted = 0usize;
            let mut attempts = 0usize;
            while emitted < NEGATIVES_PER_SIDE && attempts < SAMPLING_ATTEMPTS {
                attempts += 1;
                let x = &all_terms[rng.random_range(0..all_terms.len())];
                let (h, c) = if fix_hypernym { (a, x) } else { (x, b) };
                if h == c
                    || positive_set.contains(&(h.as_str(), c.as_str()))
                    || labels.get(h, c).is_some()
                {
                    continue;
                }
                labels.insert(h, c, false)?;
                emitted += 1;
            }
            if emitted < NEGATIVES_PER_SIDE {
                starved += 1;
                shortfall += NEGATIVES_PER_SIDE - emitted;
            }
        }
    }
    // Expected for upper-tree hypernyms: with every term a descendant of the
    // root, no hyponym corruption of a root pair can be negative.
    if starved > 0 {
        log::warn!(
            "negative sampling fell {shortfall} short across {starved} of {} positive-side draws \
             (shallow hypernyms exhaust their corruption candidates)",
            2 * closure.len()
        );
    }

    // Corpus: one filler sentence per document plus Hearst sentences for a
    // fraction of the positives, assigned round-robin over documents.
    let mut sentences: Vec<Vec<Vec<String>>> = (0..config.documents)
        .map(|doc| {
            vec![vec![
                "this".to_string(),
                "paper".to_string(),
                "studies".to_string(),
                term_surface(owner[doc], 0),
            ]]
        })
        .collect();
    let mut planted = closure.clone();
    planted.shuffle(&mut rng);
    let n_planted = (config.hearst_fraction * planted.len() as f64).round() as usize;
    for (i, (y, x)) in planted.iter().take(n_planted).enumerate() {
        sentences[i % config.documents].push(hearst_sentence(i, y, x));
    }
    let corpus = Corpus {
        documents: (0..config.documents)
            .map(|doc| Document {
                node_id: paper_id(doc),
                sentences: sentences[doc].clone(),
            })
            .collect(),
    };

    Ok(SynthOutput {
        graph,
        corpus,
        labels,
        tree_edges,
        closure,
    })
}

/// File names used by [`emit_synthetic_hin`] and the pipeline.
pub const NODES_FILE: &str = "nodes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const SCHEMA_FILE: &str = "schema.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const LABELS_FILE: &str = "labels.tsv";

/// Generates and writes the standard dataset files into `dir`.
pub fn emit_synthetic_hin(config: &SynthConfig, dir: &Path) -> Result<SynthOutput> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let out = generate_synthetic_hin(config)?;
    out.graph.write(
        &dir.join(NODES_FILE),
        &dir.join(EDGES_FILE),
        &dir.join(SCHEMA_FILE),
    )?;
    out.corpus.write(&dir.join(CORPUS_FILE))?;
    out.labels.write(&dir.join(LABELS_FILE))?;
    Ok(out)
}
