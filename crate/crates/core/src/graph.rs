//! Typed graph model: schema, nodes, edges, attached corpus, and the
//! target-term vocabulary.
//!
//! On-disk formats:
//! * schema: JSON `{ "node_types": [...], "edge_types": [{"name", "src", "dst"}] }`
//! * nodes: TSV `node_id <TAB> node_type [<TAB> text_key]`
//! * edges: TSV `src_id <TAB> dst_id <TAB> edge_type`
//! * corpus: JSON lines `{ "node_id": ..., "sentences": [["tok", ...], ...] }`
//!
//! Edges are stored as given but all adjacency queries are direction-blind.
//! For a node of the target type, its surface string is the `text_key`
//! column when present and the node id otherwise, normalized by
//! [`normalize_term`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercases and collapses every whitespace run to a single space.
pub fn normalize_term(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeTypeDef {
    pub name: String,
    pub src: String,
    pub dst: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct HinSchema {
    pub node_types: Vec<String>,
    pub edge_types: Vec<EdgeTypeDef>,
}

impl HinSchema {
    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.node_types {
            if !seen.insert(t.as_str()) {
                return Err(Error::Schema(format!("duplicate node type {t:?}")));
            }
        }
        let mut names = BTreeSet::new();
        for e in &self.edge_types {
            if !names.insert(e.name.as_str()) {
                return Err(Error::Schema(format!("duplicate edge type {:?}", e.name)));
            }
            for endpoint in [&e.src, &e.dst] {
                if !self.node_types.iter().any(|t| t == endpoint) {
                    return Err(Error::Schema(format!(
                        "edge type {:?} references unknown node type {endpoint:?}",
                        e.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub node_type: String,
    pub text_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub edge_type: String,
}

/// A typed graph with direction-blind adjacency queries.
#[derive(Debug, Clone)]
pub struct HinGraph {
    schema: HinSchema,
    nodes: Vec<Node>,
    node_index: HashMap<String, usize>,
    /// (src, dst, edge type index) in input order.
    edges: Vec<(u32, u32, u32)>,
    /// Per node: (edge type index, neighbor index), sorted, deduplicated.
    adj: Vec<Vec<(u32, u32)>>,
}

impl HinGraph {
    pub fn new(schema: HinSchema, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        schema.validate()?;
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !schema.node_types.iter().any(|t| *t == n.node_type) {
                return Err(Error::UnknownNodeType(n.node_type.clone()));
            }
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(n.id.clone()));
            }
        }
        let mut edge_rows = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); nodes.len()];
        for e in &edges {
            let ti = schema
                .edge_types
                .iter()
                .position(|d| d.name == e.edge_type)
                .ok_or_else(|| Error::UnknownEdgeType(e.edge_type.clone()))?;
            let def = &schema.edge_types[ti];
            let si = *node_index
                .get(&e.src)
                .ok_or_else(|| Error::UnknownNode(e.src.clone()))?;
            let di = *node_index
                .get(&e.dst)
                .ok_or_else(|| Error::UnknownNode(e.dst.clone()))?;
            if nodes[si].node_type != def.src || nodes[di].node_type != def.dst {
                return Err(Error::Schema(format!(
                    "edge {:?} ({} -> {}) violates endpoint types of {:?} ({} -> {})",
                    e.edge_type, nodes[si].node_type, nodes[di].node_type, def.name, def.src, def.dst
                )));
            }
            edge_rows.push((si as u32, di as u32, ti as u32));
            adj[si].push((ti as u32, di as u32));
            adj[di].push((ti as u32, si as u32));
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Ok(HinGraph {
            schema,
            nodes,
            node_index,
            edges: edge_rows,
            adj,
        })
    }

    pub fn schema(&self) -> &HinSchema {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_idx(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn contains(&self, id: &str) -> bool {
        self.node_index.contains_key(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|&(s, d, t)| Edge {
            src: self.nodes[s as usize].id.clone(),
            dst: self.nodes[d as usize].id.clone(),
            edge_type: self.schema.edge_types[t as usize].name.clone(),
        })
    }

    /// Direction-blind adjacency of a node, sorted by (edge type, neighbor).
    pub fn adjacency(&self, idx: usize) -> &[(u32, u32)] {
        &self.adj[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.adj[idx].len()
    }

    /// Indexes of all nodes of `node_type`, in input order.
    pub fn nodes_of_type(&self, node_type: &str) -> Result<Vec<usize>> {
        if !self.schema.node_types.iter().any(|t| t == node_type) {
            return Err(Error::UnknownNodeType(node_type.to_string()));
        }
        Ok((0..self.nodes.len())
            .filter(|&i| self.nodes[i].node_type == node_type)
            .collect())
    }

    /// Ids of neighbors of `id` having `node_type`, ignoring edge direction,
    /// sorted and deduplicated.
    pub fn neighbors_of_type(&self, id: &str, node_type: &str) -> Result<Vec<&str>> {
        let idx = self
            .node_idx(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        if !self.schema.node_types.iter().any(|t| t == node_type) {
            return Err(Error::UnknownNodeType(node_type.to_string()));
        }
        let set: BTreeSet<&str> = self.adj[idx]
            .iter()
            .map(|&(_, n)| &self.nodes[n as usize])
            .filter(|n| n.node_type == node_type)
            .map(|n| n.id.as_str())
            .collect();
        Ok(set.into_iter().collect())
    }

    pub fn load(nodes_path: &Path, edges_path: &Path, schema_path: &Path) -> Result<Self> {
        let schema = read_schema(schema_path)?;
        let nodes = read_nodes(nodes_path)?;
        let edges = read_edges(edges_path)?;
        Self::new(schema, nodes, edges)
    }

    pub fn write(&self, nodes_path: &Path, edges_path: &Path, schema_path: &Path) -> Result<()> {
        write_schema(schema_path, &self.schema)?;
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&n.id);
            out.push('\t');
            out.push_str(&n.node_type);
            if let Some(k) = &n.text_key {
                out.push('\t');
                out.push_str(k);
            }
            out.push('\n');
        }
        write_text(nodes_path, &out)?;
        let mut out = String::new();
        for e in self.edges() {
            out.push_str(&format!("{}\t{}\t{}\n", e.src, e.dst, e.edge_type));
        }
        write_text(edges_path, &out)
    }
}

pub fn read_schema(path: &Path) -> Result<HinSchema> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let schema: HinSchema = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    schema.validate()?;
    Ok(schema)
}

pub fn write_schema(path: &Path, schema: &HinSchema) -> Result<()> {
    let mut text = serde_json::to_string_pretty(schema).expect("schema serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_nodes(path: &Path) -> Result<Vec<Node>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut nodes = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let id = cols.next().unwrap_or_default();
        let node_type = cols
            .next()
            .ok_or_else(|| Error::parse(path, lineno + 1, "expected node_id<TAB>node_type"))?;
        let text_key = cols.next().map(|s| s.to_string());
        if id.is_empty() || node_type.is_empty() {
            return Err(Error::parse(path, lineno + 1, "empty node id or type"));
        }
        nodes.push(Node {
            id: id.to_string(),
            node_type: node_type.to_string(),
            text_key,
        });
    }
    Ok(nodes)
}

pub fn read_edges(path: &Path) -> Result<Vec<Edge>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 || cols.iter().any(|c| c.is_empty()) {
            return Err(Error::parse(
                path,
                lineno + 1,
                "expected src<TAB>dst<TAB>edge_type",
            ));
        }
        edges.push(Edge {
            src: cols[0].to_string(),
            dst: cols[1].to_string(),
            edge_type: cols[2].to_string(),
        });
    }
    Ok(edges)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Index of a term in a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermId(pub u32);

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct VocabEntry {
    pub surface: String,
    pub node_id: String,
}

/// Surface-form vocabulary over the nodes of the target type.
///
/// Term ids follow node input order. When two nodes normalize to the same
/// surface, the first node keeps the term id and the collision is recorded.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    target_type: String,
    entries: Vec<VocabEntry>,
    by_surface: HashMap<String, TermId>,
    collisions: Vec<(String, String, String)>,
}

impl Vocabulary {
    pub fn target_type(&self) -> &str {
        &self.target_type
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn term(&self, id: TermId) -> Result<&VocabEntry> {
        self.entries.get(id.0 as usize).ok_or(Error::TermOutOfRange {
            term: id.0,
            len: self.entries.len(),
        })
    }

    pub fn surface(&self, id: TermId) -> &str {
        &self.entries[id.0 as usize].surface
    }

    pub fn node_id(&self, id: TermId) -> &str {
        &self.entries[id.0 as usize].node_id
    }

    /// Looks up a normalized surface string.
    pub fn id_of(&self, surface: &str) -> Option<TermId> {
        self.by_surface.get(surface).copied()
    }

    /// Looks up a raw string, normalizing it first.
    pub fn id_of_raw(&self, raw: &str) -> Option<TermId> {
        self.id_of(&normalize_term(raw))
    }

    pub fn ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.entries.len() as u32).map(TermId)
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    /// (surface, kept node id, dropped node id) for each normalization clash.
    pub fn collisions(&self) -> &[(String, String, String)] {
        &self.collisions
    }

    /// Largest number of whitespace-separated tokens in any surface.
    pub fn max_surface_tokens(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.surface.split(' ').count())
            .max()
            .unwrap_or(0)
    }
}

/// Builds the vocabulary over all nodes of `target_type`.
pub fn target_vocabulary(graph: &HinGraph, target_type: &str) -> Result<Vocabulary> {
    let idxs = graph.nodes_of_type(target_type)?;
    let mut entries: Vec<VocabEntry> = Vec::new();
    let mut by_surface: HashMap<String, TermId> = HashMap::new();
    let mut collisions = Vec::new();
    for i in idxs {
        let node = graph.node(i);
        let raw = node.text_key.as_deref().unwrap_or(&node.id);
        let surface = normalize_term(raw);
        if surface.is_empty() {
            return Err(Error::Schema(format!(
                "node {:?} of target type {target_type:?} has an empty surface",
                node.id
            )));
        }
        match by_surface.get(&surface) {
            Some(&kept) => {
                collisions.push((
                    surface.clone(),
                    entries[kept.0 as usize].node_id.clone(),
                    node.id.clone(),
                ));
            }
            None => {
                let id = TermId(entries.len() as u32);
                by_surface.insert(surface.clone(), id);
                entries.push(VocabEntry {
                    surface,
                    node_id: node.id.clone(),
                });
            }
        }
    }
    Ok(Vocabulary {
        target_type: target_type.to_string(),
        entries,
        by_surface,
        collisions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Document {
    pub node_id: String,
    pub sentences: Vec<Vec<String>>,
}

/// Ordered collection of documents, each attached to a graph node by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut documents = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad document: {e}")))?;
            documents.push(doc);
        }
        Ok(Corpus { documents })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        write_text(path, &out)
    }

    /// Checks that every document is attached to an existing node.
    pub fn validate_against(&self, graph: &HinGraph) -> Result<()> {
        for doc in &self.documents {
            if !graph.contains(&doc.node_id) {
                return Err(Error::UnknownNode(doc.node_id.clone()));
            }
        }
        Ok(())
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }
}
