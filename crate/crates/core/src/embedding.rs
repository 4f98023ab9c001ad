//! Nodewise feature vectors: a default trainer based on edge-type-aware
//! random walks plus skip-gram with negative sampling, and an import path
//! for externally trained vectors.
//!
//! File format: first line `d=<int>`, then one row per node:
//! `node_id v1 v2 ... vd` (space separated decimal floats).

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{write_text, HinGraph};

/// Node-id keyed vectors with one consistent dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Self {
        FeatureStore {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn insert(&mut self, id: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: format!("vector for {id:?}"),
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector for {id:?}")));
        }
        if self.index.contains_key(id) {
            return Err(Error::DuplicateNode(id.to_string()));
        }
        self.index.insert(id.to_string(), self.ids.len());
        self.ids.push(id.to_string());
        self.vectors.push(vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.vectors[i].as_slice())
    }

    /// Vector for `id`, or an error naming the node.
    pub fn require(&self, id: &str) -> Result<&[f64]> {
        self.get(id)
            .ok_or_else(|| Error::MissingEmbedding(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .zip(&self.vectors)
            .map(|(id, v)| (id.as_str(), v.as_slice()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = format!("d={}\n", self.dim);
        for (id, v) in self.iter() {
            out.push_str(id);
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        write_text(path, &out)
    }
}

/// Parses an embedding file, validating dimension, finiteness, and id
/// uniqueness.
pub fn import_embedding(path: &Path) -> Result<FeatureStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty embedding file"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let dim: usize = header
        .strip_prefix("d=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, 1, "expected header d=<int>"))?;
    if dim == 0 {
        return Err(Error::parse(path, 1, "dimension must be positive"));
    }
    let mut store = FeatureStore::new(dim);
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let id = parts.next().unwrap_or_default();
        if id.is_empty() {
            return Err(Error::parse(path, lineno + 1, "missing node id"));
        }
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, lineno + 1, format!("bad float: {e}")))?;
        if values.len() != dim {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("row for {id:?} has {} values, expected {dim}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("row for {id:?} contains a non-finite value"),
            ));
        }
        store.insert(id, values)?;
    }
    Ok(store)
}

/// Skip-gram trainer configuration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 128,
            walks_per_node: 8,
            walk_length: 20,
            window: 4,
            negatives: 4,
            epochs: 2,
            learning_rate: 0.025,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One edge-type-aware random walk step: pick an incident edge type
/// uniformly, then a neighbor via that type uniformly, ignoring direction.
fn walk_step(graph: &HinGraph, node: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let adj = graph.adjacency(node);
    if adj.is_empty() {
        return None;
    }
    // `adj` is sorted by (edge type, neighbor), so types form runs.
    let mut type_starts: Vec<usize> = Vec::new();
    let mut last_type = None;
    for (i, &(t, _)) in adj.iter().enumerate() {
        if last_type != Some(t) {
            type_starts.push(i);
            last_type = Some(t);
        }
    }
    let pick = rng.random_range(0..type_starts.len());
    let start = type_starts[pick];
    let end = type_starts.get(pick + 1).copied().unwrap_or(adj.len());
    let (_, nbr) = adj[start + rng.random_range(0..end - start)];
    Some(nbr as usize)
}

/// Trains vectors for every node of `graph`.
///
/// Deterministic for a fixed (graph, config, seed): walks are generated and
/// consumed in node order and all updates apply in that fixed order.
/// Isolated nodes receive seeded random unit-norm vectors.
pub fn train_embedding(graph: &HinGraph, config: &EmbedConfig, seed: u64) -> Result<FeatureStore> {
    if config.dim == 0 {
        return Err(Error::InvalidParameter("embedding dim must be positive".into()));
    }
    if graph.node_count() == 0 {
        return Err(Error::InvalidParameter("cannot embed an empty graph".into()));
    }
    let n = graph.node_count();
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut input: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| (rng.random::<f64>() - 0.5) / d as f64).collect())
        .collect();
    let mut output: Vec<Vec<f64>> = vec![vec![0.0; d]; n];

    let mut walk = Vec::with_capacity(config.walk_length);
    for _epoch in 0..config.epochs {
        for start in 0..n {
            for _ in 0..config.walks_per_node {
                walk.clear();
                walk.push(start);
                while walk.len() < config.walk_length {
                    match walk_step(graph, *walk.last().expect("walk nonempty"), &mut rng) {
                        Some(next) => walk.push(next),
                        None => break,
                    }
                }
                for (c, &center) in walk.iter().enumerate() {
                    let lo = c.saturating_sub(config.window);
                    let hi = (c + config.window + 1).min(walk.len());
                    for t in lo..hi {
                        if t == c {
                            continue;
                        }
                        let target = walk[t];
                        sgns_update(
                            &mut input,
                            &mut output,
                            center,
                            target,
                            config,
                            n,
                            &mut rng,
                        );
                    }
                }
            }
        }
    }

    // Isolated nodes keep no walk signal; give them unit-norm random vectors.
    for i in 0..n {
        if graph.degree(i) == 0 {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            input[i] = if norm > 0.0 {
                v.iter().map(|x| x / norm).collect()
            } else {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            };
        }
    }

    let mut store = FeatureStore::new(d);
    for (i, vec) in input.into_iter().enumerate() {
        store.insert(&graph.node(i).id, vec)?;
    }
    Ok(store)
}

fn sgns_update(
    input: &mut [Vec<f64>],
    output: &mut [Vec<f64>],
    center: usize,
    target: usize,
    config: &EmbedConfig,
    n: usize,
    rng: &mut ChaCha8Rng,
) {
    let d = config.dim;
    let mut center_grad = vec![0.0; d];
    {
        let (ci, to) = (&input[center], &mut output[target]);
        let dot: f64 = ci.iter().zip(to.iter()).map(|(a, b)| a * b).sum();
        let g = config.learning_rate * (1.0 - sigmoid(dot));
        for k in 0..d {
            center_grad[k] += g * to[k];
            to[k] += g * ci[k];
        }
    }
    for _ in 0..config.negatives {
        let neg = rng.random_range(0..n);
        if neg == target {
            continue;
        }
        let (ci, no) = (&input[center], &mut output[neg]);
        let dot: f64 = ci.iter().zip(no.iter()).map(|(a, b)| a * b).sum();
        let g = config.learning_rate * (0.0 - sigmoid(dot));
        for k in 0..d {
            center_grad[k] += g * no[k];
            no[k] += g * ci[k];
        }
    }
    for k in 0..d {
        input[center][k] += center_grad[k];
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, HinSchema, Node};

    fn clique_graph() -> HinGraph {
        // Two disconnected 10-cliques bridged by nothing.
        let schema = HinSchema {
            node_types: vec!["item".into()],
            edge_types: vec![crate::graph::EdgeTypeDef {
                name: "rel".into(),
                src: "item".into(),
                dst: "item".into(),
            }],
        };
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for c in 0..2 {
            for i in 0..10 {
                nodes.push(Node {
                    id: format!("c{c}n{i}"),
                    node_type: "item".into(),
                    text_key: None,
                });
            }
            for i in 0..10 {
                for j in i + 1..10 {
                    edges.push(Edge {
                        src: format!("c{c}n{i}"),
                        dst: format!("c{c}n{j}"),
                        edge_type: "rel".into(),
                    });
                }
            }
        }
        HinGraph::new(schema, nodes, edges).unwrap()
    }

    fn small_config(dim: usize) -> EmbedConfig {
        EmbedConfig {
            dim,
            walks_per_node: 6,
            walk_length: 10,
            window: 3,
            negatives: 3,
            epochs: 2,
            learning_rate: 0.05,
        }
    }

    #[test]
    fn cliques_separate_in_cosine_similarity() {
        let g = clique_graph();
        let store = train_embedding(&g, &small_config(16), 11).unwrap();
        let ids: Vec<String> = g.nodes().iter().map(|n| n.id.clone()).collect();
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let sim = cosine(store.get(&ids[i]).unwrap(), store.get(&ids[j]).unwrap());
                if ids[i].starts_with("c0") == ids[j].starts_with("c0") {
                    intra.push(sim);
                } else {
                    inter.push(sim);
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} <= inter {}",
            mean(&intra),
            mean(&inter)
        );
    }

    #[test]
    fn single_edge_graph_gets_finite_vectors() {
        let schema = HinSchema {
            node_types: vec!["item".into()],
            edge_types: vec![crate::graph::EdgeTypeDef {
                name: "rel".into(),
                src: "item".into(),
                dst: "item".into(),
            }],
        };
        let g = HinGraph::new(
            schema,
            vec![
                Node { id: "a".into(), node_type: "item".into(), text_key: None },
                Node { id: "b".into(), node_type: "item".into(), text_key: None },
                Node { id: "lonely".into(), node_type: "item".into(), text_key: None },
            ],
            vec![Edge { src: "a".into(), dst: "b".into(), edge_type: "rel".into() }],
        )
        .unwrap();
        let store = train_embedding(&g, &small_config(16), 3).unwrap();
        for id in ["a", "b", "lonely"] {
            let v = store.get(id).unwrap();
            assert_eq!(v.len(), 16);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        // Isolated node got a unit-norm vector.
        let norm: f64 = store.get("lonely").unwrap().iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let g = clique_graph();
        let a = train_embedding(&g, &small_config(8), 7).unwrap();
        let b = train_embedding(&g, &small_config(8), 7).unwrap();
        assert_eq!(a, b);
        let c = train_embedding(&g, &small_config(8), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_dimensions_and_empty_graph() {
        let g = clique_graph();
        assert!(train_embedding(&g, &small_config(0), 1).is_err());
        let empty = HinGraph::new(
            HinSchema { node_types: vec!["item".into()], edge_types: vec![] },
            vec![],
            vec![],
        )
        .unwrap();
        assert!(train_embedding(&empty, &small_config(4), 1).is_err());
    }

    #[test]
    fn file_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.txt");
        let mut store = FeatureStore::new(3);
        store.insert("a", vec![1.0, -0.25, 1e-9]).unwrap();
        store.insert("b", vec![0.1 + 0.2, 2.0, 3.0]).unwrap();
        store.write(&path).unwrap();
        let loaded = import_embedding(&path).unwrap();
        assert_eq!(loaded, store);
    }

    #[test]
    fn import_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, text).unwrap();
            p
        };
        let ragged = write("ragged.txt", "d=4\na 1 2 3 4\nb 1 2 3\n");
        let err = import_embedding(&ragged).unwrap_err().to_string();
        assert!(err.contains("\"b\""), "{err}");
        let nan = write("nan.txt", "d=2\na NaN 1\n");
        assert!(import_embedding(&nan).is_err());
        let dup = write("dup.txt", "d=1\na 1\na 2\n");
        assert!(matches!(import_embedding(&dup), Err(Error::DuplicateNode(_))));
        let noheader = write("nh.txt", "a 1 2\n");
        assert!(import_embedding(&noheader).is_err());
    }
}
