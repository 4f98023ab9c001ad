//! Distributional-inclusion measures over a [`ContextIndex`] and the
//! assembly of fixed-layout pairwise feature vectors.
//!
//! For an ordered pair (t1, t2) under binary relevance, with
//! `a = |C_t1 ∩ C_t2|`, `b = |C_t2|`, `d = |C_t1|`:
//!
//! * M1 = a/b (high when t2's units are covered by t1's)
//! * M2 = sqrt((a/b) · (1 − a/d))
//! * M3 = a/b − a/d
//! * M4 = a/|C|
//!
//! Every 0/0 evaluates to 0. The convention throughout the crate is that a
//! high directed score for (t1, t2) supports "t1 is a hypernym of t2".

use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::ContextIndex;
use crate::error::{Error, Result};
use crate::graph::{write_text, TermId, Vocabulary};

/// One of the four base measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// M1: a/b.
    WeedsPrec,
    /// M2: sqrt((a/b)·(1−a/d)).
    InvCl,
    /// M3: a/b − a/d.
    ClarkeDelta,
    /// M4: a/|C|.
    Overlap,
}

impl Measure {
    pub fn all() -> [Measure; 4] {
        [
            Measure::WeedsPrec,
            Measure::InvCl,
            Measure::ClarkeDelta,
            Measure::Overlap,
        ]
    }

    /// Stable column label used in file headers and configs.
    pub fn label(self) -> &'static str {
        match self {
            Measure::WeedsPrec => "m1",
            Measure::InvCl => "m2",
            Measure::ClarkeDelta => "m3",
            Measure::Overlap => "m4",
        }
    }

    pub fn from_label(label: &str) -> Result<Measure> {
        match label {
            "m1" => Ok(Measure::WeedsPrec),
            "m2" => Ok(Measure::InvCl),
            "m3" => Ok(Measure::ClarkeDelta),
            "m4" => Ok(Measure::Overlap),
            other => Err(Error::InvalidParameter(format!("unknown measure {other:?}"))),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Measure::from_label(&s).map_err(serde::de::Error::custom)
    }
}

/// Relevance weighting hook; only binary relevance is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[non_exhaustive]
pub enum RelevanceWeighting {
    #[default]
    Binary,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn measures_from_counts(a: f64, b: f64, d: f64, total: f64) -> [f64; 4] {
    let cde_fwd = safe_div(a, b);
    let cde_rev = safe_div(a, d);
    [
        cde_fwd,
        (cde_fwd * (1.0 - cde_rev)).sqrt(),
        cde_fwd - cde_rev,
        safe_div(a, total),
    ]
}

/// All four measures for the ordered pair (t1, t2).
///
/// Errors when t1 == t2 or either term is unknown to the index.
pub fn dih_measures(ctx: &ContextIndex, t1: TermId, t2: TermId) -> Result<[f64; 4]> {
    if t1 == t2 {
        return Err(Error::InvalidParameter(format!(
            "dih_measures requires distinct terms, got {t1} twice"
        )));
    }
    let c1 = ctx.relevant_units(t1).ok_or(Error::TermOutOfRange {
        term: t1.0,
        len: ctx.n_terms(),
    })?;
    let c2 = ctx.relevant_units(t2).ok_or(Error::TermOutOfRange {
        term: t2.0,
        len: ctx.n_terms(),
    })?;
    let a = intersection_size(c1, c2) as f64;
    Ok(measures_from_counts(
        a,
        c2.len() as f64,
        c1.len() as f64,
        ctx.total_units() as f64,
    ))
}

/// Fixed column order: contexts in declaration order, measures in M1..M4
/// order within each context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    columns: Vec<(String, Measure)>,
}

impl FeatureLayout {
    pub fn new(context_ids: &[String], measures: &[Measure]) -> Self {
        let columns = context_ids
            .iter()
            .flat_map(|c| measures.iter().map(move |&m| (c.clone(), m)))
            .collect();
        FeatureLayout { columns }
    }

    pub fn from_contexts(contexts: &[ContextIndex], measures: &[Measure]) -> Self {
        let ids: Vec<String> = contexts.iter().map(|c| c.context_id().to_string()).collect();
        Self::new(&ids, measures)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[(String, Measure)] {
        &self.columns
    }

    /// Canonical string form, used as a checkpoint compatibility check and
    /// as the feature-file header tail.
    pub fn fingerprint(&self) -> String {
        self.columns
            .iter()
            .map(|(c, m)| format!("{c}|{}", m.label()))
            .collect::<Vec<_>>()
            .join("\t")
    }

    fn from_header_columns(cols: &[&str], path: &Path) -> Result<Self> {
        let mut columns = Vec::with_capacity(cols.len());
        for col in cols {
            let (ctx, label) = col
                .rsplit_once('|')
                .ok_or_else(|| Error::parse(path, 1, format!("bad feature column {col:?}")))?;
            columns.push((ctx.to_string(), Measure::from_label(label)?));
        }
        Ok(FeatureLayout { columns })
    }
}

/// Pairwise feature vectors in a fixed layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseFeatures {
    layout: FeatureLayout,
    pairs: Vec<(TermId, TermId)>,
    rows: Vec<Vec<f64>>,
    coverage_misses: u64,
}

impl PairwiseFeatures {
    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(TermId, TermId)] {
        &self.pairs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Number of (pair, context) combinations where a term was unknown to
    /// the context and the block was zero-filled.
    pub fn coverage_misses(&self) -> u64 {
        self.coverage_misses
    }

    /// TSV with a header naming every feature column.
    pub fn write(&self, path: &Path, vocab: &Vocabulary) -> Result<()> {
        let mut out = String::from("t1\tt2");
        if !self.layout.is_empty() {
            out.push('\t');
            out.push_str(&self.layout.fingerprint());
        }
        out.push('\n');
        for (i, (t1, t2)) in self.pairs.iter().enumerate() {
            out.push_str(vocab.surface(*t1));
            out.push('\t');
            out.push_str(vocab.surface(*t2));
            for v in &self.rows[i] {
                out.push('\t');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        write_text(path, &out)
    }

    /// Reads a feature file written by [`PairwiseFeatures::write`]. The
    /// coverage counter is not serialized and reads back as 0.
    pub fn read(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty feature file"))?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 2 || cols[0] != "t1" || cols[1] != "t2" {
            return Err(Error::parse(path, 1, "expected header t1<TAB>t2<TAB>..."));
        }
        let layout = FeatureLayout::from_header_columns(&cols[2..], path)?;
        let mut pairs = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 + layout.len() {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected {} columns, got {}", 2 + layout.len(), cols.len()),
                ));
            }
            let t1 = vocab
                .id_of(cols[0])
                .ok_or_else(|| Error::UnknownTerm(cols[0].to_string()))?;
            let t2 = vocab
                .id_of(cols[1])
                .ok_or_else(|| Error::UnknownTerm(cols[1].to_string()))?;
            let row: Vec<f64> = cols[2..]
                .iter()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad float: {e}")))?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(path, lineno + 1, "non-finite feature value"));
            }
            pairs.push((t1, t2));
            rows.push(row);
        }
        Ok(PairwiseFeatures {
            layout,
            pairs,
            rows,
            coverage_misses: 0,
        })
    }
}

/// Computes the feature vector of one pair under an explicit layout,
/// zero-filling context blocks that do not cover a term and counting those
/// misses.
fn pair_row(
    contexts: &[ContextIndex],
    measures: &[Measure],
    t1: TermId,
    t2: TermId,
) -> (Vec<f64>, u64) {
    let mut row = Vec::with_capacity(contexts.len() * measures.len());
    let mut misses = 0;
    for ctx in contexts {
        match (ctx.relevant_units(t1), ctx.relevant_units(t2)) {
            (Some(c1), Some(c2)) => {
                let a = intersection_size(c1, c2) as f64;
                let all = measures_from_counts(
                    a,
                    c2.len() as f64,
                    c1.len() as f64,
                    ctx.total_units() as f64,
                );
                for m in measures {
                    row.push(match m {
                        Measure::WeedsPrec => all[0],
                        Measure::InvCl => all[1],
                        Measure::ClarkeDelta => all[2],
                        Measure::Overlap => all[3],
                    });
                }
            }
            _ => {
                misses += 1;
                row.extend(std::iter::repeat(0.0).take(measures.len()));
            }
        }
    }
    (row, misses)
}

/// Assembles feature vectors for every ordered pair, in input order.
pub fn compute_pairwise_features(
    pairs: &[(TermId, TermId)],
    contexts: &[ContextIndex],
    measures: &[Measure],
    weighting: RelevanceWeighting,
) -> Result<PairwiseFeatures> {
    let RelevanceWeighting::Binary = weighting;
    if contexts.is_empty() {
        return Err(Error::InvalidParameter("no contexts configured".into()));
    }
    if measures.is_empty() {
        return Err(Error::InvalidParameter("no measures configured".into()));
    }
    for &(t1, t2) in pairs {
        if t1 == t2 {
            return Err(Error::InvalidParameter(format!("self-pair {t1} in feature input")));
        }
    }
    let results: Vec<(Vec<f64>, u64)> = pairs
        .par_iter()
        .map(|&(t1, t2)| pair_row(contexts, measures, t1, t2))
        .collect();
    let coverage_misses = results.iter().map(|(_, m)| m).sum();
    let rows = results.into_iter().map(|(r, _)| r).collect();
    Ok(PairwiseFeatures {
        layout: FeatureLayout::from_contexts(contexts, measures),
        pairs: pairs.to_vec(),
        rows,
        coverage_misses,
    })
}
