//! Taxonomy DAG construction from a ranked pair list.
//!
//! Pipeline: keep the `top_terms` terms with the highest participation
//! count in the ranked list (ties broken by name), keep the `top_edges`
//! highest-scoring edges between retained terms, then repeatedly find a
//! cycle by depth-first search and delete one of its edges at random until
//! the graph is acyclic. Removed edges are logged; retained and removed
//! edges together partition the pruned edge set.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::write_text;
use crate::model::RankedPairList;

/// One directed taxonomy edge (hypernym → hyponym).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyEdge {
    pub hypernym: String,
    pub hyponym: String,
    pub score: f64,
}

/// Acyclic hypernymy graph plus the edges deleted to make it so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyDag {
    /// Terms incident to the pruned edge set, sorted.
    pub terms: Vec<String>,
    pub edges: Vec<TaxonomyEdge>,
    pub removed_edges: Vec<TaxonomyEdge>,
}

/// How cycle breaking picks the edge to delete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalPolicy {
    /// Uniform over the detected cycle's edges.
    #[default]
    Uniform,
    /// Weighted toward low scores: weight 1 + (max cycle score − score).
    ScoreWeighted,
}

pub const DEFAULT_TOP_TERMS: usize = 500;
pub const DEFAULT_TOP_EDGES: usize = 5000;

/// Builds the taxonomy DAG; deterministic under `seed`.
pub fn build_taxonomy(
    ranked: &RankedPairList,
    top_terms: usize,
    top_edges: usize,
    policy: RemovalPolicy,
    seed: u64,
) -> Result<TaxonomyDag> {
    if top_terms == 0 || top_edges == 0 {
        return Err(Error::InvalidParameter(
            "top_terms and top_edges must be positive".into(),
        ));
    }
    if ranked.is_empty() {
        log::warn!("ranked list is empty; taxonomy is empty");
        return Ok(TaxonomyDag {
            terms: vec![],
            edges: vec![],
            removed_edges: vec![],
        });
    }

    // Participation count per term, ties by name.
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in ranked.entries() {
        *counts.entry(&e.hypernym).or_default() += 1;
        *counts.entry(&e.hyponym).or_default() += 1;
    }
    let mut by_count: Vec<(&str, usize)> = counts.into_iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let retained: HashMap<&str, ()> = by_count
        .iter()
        .take(top_terms)
        .map(|&(t, _)| (t, ()))
        .collect();

    // Highest-scoring edges among retained terms, first occurrence wins.
    let mut edges: Vec<TaxonomyEdge> = Vec::new();
    let mut seen: HashMap<(&str, &str), ()> = HashMap::new();
    for e in ranked.entries() {
        if edges.len() == top_edges {
            break;
        }
        let key = (e.hypernym.as_str(), e.hyponym.as_str());
        if retained.contains_key(key.0) && retained.contains_key(key.1) && !seen.contains_key(&key)
        {
            seen.insert(key, ());
            edges.push(TaxonomyEdge {
                hypernym: e.hypernym.clone(),
                hyponym: e.hyponym.clone(),
                score: e.score,
            });
        }
    }
    if edges.is_empty() {
        log::warn!("no edges survive pruning; taxonomy is empty");
        return Ok(TaxonomyDag {
            terms: vec![],
            edges: vec![],
            removed_edges: vec![],
        });
    }

    let mut terms: Vec<String> = edges
        .iter()
        .flat_map(|e| [e.hypernym.clone(), e.hyponym.clone()])
        .collect();
    terms.sort();
    terms.dedup();
    let index: HashMap<&str, usize> = terms.iter().map(|t| t.as_str()).zip(0..).collect();

    // Adjacency over edge indices, in score order.
    let n = terms.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adj[index[e.hypernym.as_str()]].push(i);
    }
    let mut removed_flag = vec![false; edges.len()];
    let mut removed_order: Vec<usize> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while let Some(cycle) = find_cycle(&edges, &adj, &index, n, &removed_flag) {
        let victim = match policy {
            RemovalPolicy::Uniform => cycle[rng.random_range(0..cycle.len())],
            RemovalPolicy::ScoreWeighted => {
                let max = cycle
                    .iter()
                    .map(|&i| edges[i].score)
                    .fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = cycle
                    .iter()
                    .map(|&i| 1.0 + (max - edges[i].score))
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut draw = rng.random::<f64>() * total;
                let mut chosen = cycle[cycle.len() - 1];
                for (&edge, w) in cycle.iter().zip(&weights) {
                    if draw < *w {
                        chosen = edge;
                        break;
                    }
                    draw -= w;
                }
                chosen
            }
        };
        removed_flag[victim] = true;
        removed_order.push(victim);
    }

    let removed_edges: Vec<TaxonomyEdge> = removed_order.iter().map(|&i| edges[i].clone()).collect();
    let edges: Vec<TaxonomyEdge> = edges
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !removed_flag[*i])
        .map(|(_, e)| e)
        .collect();
    Ok(TaxonomyDag {
        terms,
        edges,
        removed_edges,
    })
}

/// First back-edge cycle found by DFS over live edges, as edge indices in
/// path order. Nodes are visited in sorted term order for determinism.
fn find_cycle(
    edges: &[TaxonomyEdge],
    adj: &[Vec<usize>],
    index: &HashMap<&str, usize>,
    n: usize,
    removed: &[bool],
) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; n];
    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        // Frame: (node, next child position, edge that entered the frame).
        let mut stack: Vec<(usize, usize, Option<usize>)> = vec![(start, 0, None)];
        color[start] = Color::Gray;
        while !stack.is_empty() {
            let (u, next_edge) = {
                let frame = stack.last_mut().expect("stack non-empty");
                let u = frame.0;
                let mut chosen = None;
                while frame.1 < adj[u].len() {
                    let edge_idx = adj[u][frame.1];
                    frame.1 += 1;
                    if !removed[edge_idx] {
                        chosen = Some(edge_idx);
                        break;
                    }
                }
                (u, chosen)
            };
            let Some(edge_idx) = next_edge else {
                color[u] = Color::Black;
                stack.pop();
                continue;
            };
            let v = index[edges[edge_idx].hyponym.as_str()];
            match color[v] {
                Color::White => {
                    color[v] = Color::Gray;
                    stack.push((v, 0, Some(edge_idx)));
                }
                Color::Gray => {
                    // Back edge: cycle = path edges below v plus this one.
                    let at = stack
                        .iter()
                        .position(|&(w, _, _)| w == v)
                        .expect("gray node is on the stack");
                    let mut cycle: Vec<usize> = stack[at + 1..]
                        .iter()
                        .map(|&(_, _, e)| e.expect("non-root frame has an entry edge"))
                        .collect();
                    cycle.push(edge_idx);
                    return Some(cycle);
                }
                Color::Black => {}
            }
        }
    }
    None
}

impl TaxonomyDag {
    /// Kahn topological check.
    pub fn is_acyclic(&self) -> bool {
        let index: HashMap<&str, usize> = self.terms.iter().map(|t| t.as_str()).zip(0..).collect();
        let n = self.terms.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let (Some(&u), Some(&v)) = (index.get(e.hypernym.as_str()), index.get(e.hyponym.as_str()))
            else {
                return false;
            };
            out[u].push(v);
            indeg[v] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0usize;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        seen == n
    }

    /// DOT export with score edge attributes.
    pub fn write_dot(&self, path: &Path) -> Result<()> {
        let mut out = String::from("digraph taxonomy {\n");
        for t in &self.terms {
            out.push_str(&format!("  \"{}\";\n", t.replace('"', "\\\"")));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [score={}];\n",
                e.hypernym.replace('"', "\\\""),
                e.hyponym.replace('"', "\\\""),
                e.score
            ));
        }
        out.push_str("}\n");
        write_text(path, &out)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("taxonomy serializes");
        text.push('\n');
        write_text(path, &text)
    }

    pub fn read_json(path: &Path) -> Result<TaxonomyDag> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    /// Removed-edge log: TSV `hypernym<TAB>hyponym<TAB>score`, removal order.
    pub fn write_removed(&self, path: &Path) -> Result<()> {
        let mut out = String::from("hypernym\thyponym\tscore\n");
        for e in &self.removed_edges {
            out.push_str(&format!("{}\t{}\t{}\n", e.hypernym, e.hyponym, e.score));
        }
        write_text(path, &out)
    }

    pub fn read_removed(path: &Path) -> Result<Vec<TaxonomyEdge>> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut edges = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || (lineno == 0 && line == "hypernym\thyponym\tscore") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, lineno + 1, "expected 3 columns"));
            }
            edges.push(TaxonomyEdge {
                hypernym: cols[0].to_string(),
                hyponym: cols[1].to_string(),
                score: cols[2]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad score"))?,
            });
        }
        Ok(edges)
    }
}
