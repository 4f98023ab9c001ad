//! Ranking metrics: P@k and reciprocal-rank aggregates.
//!
//! Labeled pairs are grouped by hypernym surface. Within a group, the rank
//! of a positive counts the pair itself plus the group's non-positive
//! pairs above it; other positives are invisible to each other, matching
//! the labels' construction of independent negative sets per positive.
//! Per group, ARR is the mean reciprocal rank over its positives, LRR the
//! maximum. Macro aggregates average groups uniformly; micro aggregates
//! weight each group by its positive count.
//!
//! Evaluation aligns a ranked list to the labels first: unlabeled ranked
//! pairs are dropped, labeled pairs missing from the ranking are added at
//! score 0, and ties are re-broken with a seeded shuffle before a stable
//! descending sort.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::write_text;
use crate::model::{RankedPair, RankedPairList};

/// Labeled (hypernym, hyponym) pairs; `true` marks a positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledPairSet {
    map: BTreeMap<(String, String), bool>,
}

const LABELS_HEADER: &str = "hypernym\thyponym\tlabel";

impl LabeledPairSet {
    pub fn new() -> LabeledPairSet {
        LabeledPairSet::default()
    }

    pub fn insert(&mut self, hypernym: &str, hyponym: &str, positive: bool) -> Result<()> {
        let key = (hypernym.to_string(), hyponym.to_string());
        if self.map.contains_key(&key) {
            return Err(Error::DuplicateLabel(key.0, key.1));
        }
        self.map.insert(key, positive);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, hypernym: &str, hyponym: &str) -> Option<bool> {
        self.map
            .get(&(hypernym.to_string(), hyponym.to_string()))
            .copied()
    }

    pub fn positives(&self) -> usize {
        self.map.values().filter(|&&p| p).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, bool)> {
        self.map
            .iter()
            .map(|((h, c), &p)| (h.as_str(), c.as_str(), p))
    }

    /// TSV `hypernym<TAB>hyponym<TAB>{1,0}` with a header line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::from(LABELS_HEADER);
        out.push('\n');
        for ((h, c), &p) in &self.map {
            out.push_str(&format!("{h}\t{c}\t{}\n", if p { 1 } else { 0 }));
        }
        write_text(path, &out)
    }

    pub fn read(path: &Path) -> Result<LabeledPairSet> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut set = LabeledPairSet::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || (lineno == 0 && line == LABELS_HEADER) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, lineno + 1, "expected 3 columns"));
            }
            let positive = match cols[2] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::parse(
                        path,
                        lineno + 1,
                        format!("label must be 1 or 0, got {other:?}"),
                    ))
                }
            };
            set.insert(cols[0], cols[1], positive)?;
        }
        Ok(set)
    }
}

/// Fraction of positives among the top k ranked pairs.
pub fn precision_at_k(ranked: &RankedPairList, labels: &LabeledPairSet, k: usize) -> Result<f64> {
    if k == 0 || k > ranked.len() {
        return Err(Error::KTooLarge {
            k,
            len: ranked.len(),
        });
    }
    let mut hits = 0usize;
    for e in &ranked.entries()[..k] {
        match labels.get(&e.hypernym, &e.hyponym) {
            Some(true) => hits += 1,
            Some(false) => {}
            None => return Err(Error::UnlabeledPair(e.hypernym.clone(), e.hyponym.clone())),
        }
    }
    Ok(hits as f64 / k as f64)
}

/// The four reciprocal-rank aggregates plus bookkeeping counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub ma_marr: f64,
    pub mi_marr: f64,
    pub ma_mlrr: f64,
    pub mi_mlrr: f64,
    pub groups: usize,
    pub positives: usize,
    pub skipped_groups: usize,
}

/// Computes MaMARR, MiMARR, MaMLRR, MiMLRR over groups keyed by hypernym.
///
/// Every labeled pair must appear in `ranked`. Groups whose labels contain
/// no positive are skipped with a warning and counted.
pub fn reciprocal_rank_metrics(
    ranked: &RankedPairList,
    labels: &LabeledPairSet,
) -> Result<RankMetrics> {
    let mut position: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, e) in ranked.entries().iter().enumerate() {
        position.insert((&e.hypernym, &e.hyponym), i);
    }
    for (h, c, _) in labels.iter() {
        if !position.contains_key(&(h, c)) {
            return Err(Error::MissingRankedPair(h.to_string(), c.to_string()));
        }
    }

    // Group hypernym → positions of its ranked pairs, split by label.
    let mut group_positives: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut group_others: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (h, c, positive) in labels.iter() {
        group_positives.entry(h).or_default();
        group_others.entry(h).or_default();
        let pos = position[&(h, c)];
        if positive {
            group_positives.get_mut(h).unwrap().push(pos);
        } else {
            group_others.get_mut(h).unwrap().push(pos);
        }
    }
    // Unlabeled ranked pairs sharing a group hypernym also occupy slots.
    for (i, e) in ranked.entries().iter().enumerate() {
        if labels.get(&e.hypernym, &e.hyponym).is_none() {
            if let Some(others) = group_others.get_mut(e.hypernym.as_str()) {
                others.push(i);
            }
        }
    }

    let mut sum_arr = 0.0;
    let mut sum_lrr = 0.0;
    let mut weighted_arr = 0.0;
    let mut weighted_lrr = 0.0;
    let mut groups = 0usize;
    let mut positives = 0usize;
    let mut skipped = 0usize;
    for (h, pos_list) in &group_positives {
        if pos_list.is_empty() {
            log::warn!("group {h:?} has no positive labels; skipping");
            skipped += 1;
            continue;
        }
        let mut others = group_others[h].clone();
        others.sort_unstable();
        let mut rr_sum = 0.0;
        let mut rr_max = 0.0f64;
        for &p in pos_list {
            let above = others.partition_point(|&o| o < p);
            let rr = 1.0 / (above + 1) as f64;
            rr_sum += rr;
            rr_max = rr_max.max(rr);
        }
        let n = pos_list.len();
        let arr = rr_sum / n as f64;
        sum_arr += arr;
        sum_lrr += rr_max;
        weighted_arr += arr * n as f64;
        weighted_lrr += rr_max * n as f64;
        groups += 1;
        positives += n;
    }
    if groups == 0 {
        return Err(Error::InvalidParameter(
            "no group has a positive label; reciprocal-rank metrics are undefined".into(),
        ));
    }
    Ok(RankMetrics {
        ma_marr: sum_arr / groups as f64,
        mi_marr: weighted_arr / positives as f64,
        ma_mlrr: sum_lrr / groups as f64,
        mi_mlrr: weighted_lrr / positives as f64,
        groups,
        positives,
        skipped_groups: skipped,
    })
}

/// Alignment bookkeeping from [`align_to_labels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignStats {
    pub kept: usize,
    pub dropped_unlabeled: usize,
    pub filled_at_zero: usize,
}

/// Restricts `ranked` to labeled pairs, adds missing labeled pairs at
/// score 0, and re-breaks ties with a shuffle seeded by `tie_seed`.
pub fn align_to_labels(
    ranked: &RankedPairList,
    labels: &LabeledPairSet,
    tie_seed: u64,
) -> Result<(RankedPairList, AlignStats)> {
    let mut entries: Vec<RankedPair> = Vec::new();
    let mut seen: HashMap<(&str, &str), ()> = HashMap::new();
    let mut dropped = 0usize;
    for e in ranked.entries() {
        if labels.get(&e.hypernym, &e.hyponym).is_some() {
            seen.insert((&e.hypernym, &e.hyponym), ());
            entries.push(e.clone());
        } else {
            dropped += 1;
        }
    }
    let kept = entries.len();
    let mut filled = 0usize;
    let missing: Vec<(String, String)> = labels
        .iter()
        .filter(|(h, c, _)| !seen.contains_key(&(h, c)))
        .map(|(h, c, _)| (h.to_string(), c.to_string()))
        .collect();
    for (h, c) in missing {
        entries.push(RankedPair {
            hypernym: h,
            hyponym: c,
            score: 0.0,
        });
        filled += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
    entries.shuffle(&mut rng);
    entries.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));
    Ok((
        RankedPairList::from_sorted(entries)?,
        AlignStats {
            kept,
            dropped_unlabeled: dropped,
            filled_at_zero: filled,
        },
    ))
}

/// Full metric report, serialized as deterministic JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision_at_k: BTreeMap<u64, f64>,
    pub ma_marr: f64,
    pub mi_marr: f64,
    pub ma_mlrr: f64,
    pub mi_mlrr: f64,
    pub groups: usize,
    pub positives: usize,
    pub skipped_groups: usize,
    pub aligned_pairs: usize,
    pub dropped_unlabeled: usize,
    pub filled_at_zero: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }

    pub fn read(path: &Path) -> Result<MetricsReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

/// Aligns, then computes P@k for each requested k plus the four
/// reciprocal-rank metrics.
pub fn evaluate(
    ranked: &RankedPairList,
    labels: &LabeledPairSet,
    ks: &[usize],
    tie_seed: u64,
) -> Result<MetricsReport> {
    let (aligned, stats) = align_to_labels(ranked, labels, tie_seed)?;
    let mut p_at_k = BTreeMap::new();
    for &k in ks {
        p_at_k.insert(k as u64, precision_at_k(&aligned, labels, k)?);
    }
    let rr = reciprocal_rank_metrics(&aligned, labels)?;
    Ok(MetricsReport {
        precision_at_k: p_at_k,
        ma_marr: rr.ma_marr,
        mi_marr: rr.mi_marr,
        ma_mlrr: rr.ma_mlrr,
        mi_mlrr: rr.mi_mlrr,
        groups: rr.groups,
        positives: rr.positives,
        skipped_groups: rr.skipped_groups,
        aligned_pairs: aligned.len(),
        dropped_unlabeled: stats.dropped_unlabeled,
        filled_at_zero: stats.filled_at_zero,
    })
}
