//! Weakly supervised seed-pair extraction with lexical hypernymy patterns,
//! plus fold splitting for cross-validation.
//!
//! Six classic patterns are matched per sentence, anchored on their fixed
//! function words (matching is case-insensitive):
//!
//! * `Y such as X`    (an optional comma may precede `such`)
//! * `such Y as X`
//! * `X or other Y`
//! * `X and other Y`
//! * `Y including X`  (an optional comma may precede `including`)
//! * `Y especially X` (an optional comma may precede `especially`)
//!
//! `Y` is the hypernym slot, `X` the hyponym slot. The `Y` slot is filled
//! greedily with the longest vocabulary surface adjacent to the anchor
//! (suffix before it, or prefix after `other`); for `such Y as` the tokens
//! between `such` and `as` must be consumed entirely by one vocabulary
//! term. The `X` slot is a list scanned away from the anchor, split on
//! `,` / `and` / `or` tokens: empty elements are skipped, an element is
//! accepted only if some vocabulary term consumes it entirely, and the scan
//! stops at the first non-empty element that fails to match. The last token
//! of a candidate span may also match after stripping a plural `-s` or
//! `-es`. Pairs whose two slots resolve to the same term are dropped.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{write_text, Corpus, TermId, Vocabulary};

/// A lexical hypernymy pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    YSuchAsX,
    SuchYAsX,
    XOrOtherY,
    XAndOtherY,
    YIncludingX,
    YEspeciallyX,
}

impl Pattern {
    pub fn all() -> [Pattern; 6] {
        [
            Pattern::YSuchAsX,
            Pattern::SuchYAsX,
            Pattern::XOrOtherY,
            Pattern::XAndOtherY,
            Pattern::YIncludingX,
            Pattern::YEspeciallyX,
        ]
    }
}

/// One extracted (hypernym, hyponym) pair with its corpus frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPair {
    pub hypernym: TermId,
    pub hyponym: TermId,
    pub count: u32,
}

/// Seed pairs sorted by (hypernym, hyponym).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedPairSet {
    pairs: Vec<SeedPair>,
}

impl SeedPairSet {
    pub fn from_counts(counts: BTreeMap<(TermId, TermId), u32>) -> Self {
        let pairs = counts
            .into_iter()
            .map(|((hypernym, hyponym), count)| SeedPair {
                hypernym,
                hyponym,
                count,
            })
            .collect();
        SeedPairSet { pairs }
    }

    pub fn pairs(&self) -> &[SeedPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, hypernym: TermId, hyponym: TermId) -> bool {
        self.pairs
            .binary_search_by_key(&(hypernym, hyponym), |p| (p.hypernym, p.hyponym))
            .is_ok()
    }

    pub fn count(&self, hypernym: TermId, hyponym: TermId) -> u32 {
        self.pairs
            .binary_search_by_key(&(hypernym, hyponym), |p| (p.hypernym, p.hyponym))
            .map(|i| self.pairs[i].count)
            .unwrap_or(0)
    }

    /// TSV rows `hypernym<TAB>hyponym<TAB>count` with a header line.
    pub fn write(&self, path: &Path, vocab: &Vocabulary) -> Result<()> {
        let mut out = String::from("hypernym\thyponym\tcount\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                vocab.surface(p.hypernym),
                vocab.surface(p.hyponym),
                p.count
            ));
        }
        write_text(path, &out)
    }

    pub fn read(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut counts = BTreeMap::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || (lineno == 0 && line == "hypernym\thyponym\tcount") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, lineno + 1, "expected 3 columns"));
            }
            let hypernym = vocab
                .id_of(cols[0])
                .ok_or_else(|| Error::UnknownTerm(cols[0].to_string()))?;
            let hyponym = vocab
                .id_of(cols[1])
                .ok_or_else(|| Error::UnknownTerm(cols[1].to_string()))?;
            let count: u32 = cols[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, "bad count"))?;
            if counts.insert((hypernym, hyponym), count).is_some() {
                return Err(Error::parse(path, lineno + 1, "duplicate pair"));
            }
        }
        Ok(SeedPairSet::from_counts(counts))
    }
}

/// Greedy longest-match lookup over vocabulary surfaces.
struct SurfaceMatcher<'a> {
    vocab: &'a Vocabulary,
    max_tokens: usize,
}

impl<'a> SurfaceMatcher<'a> {
    fn new(vocab: &'a Vocabulary) -> Self {
        SurfaceMatcher {
            vocab,
            max_tokens: vocab.max_surface_tokens(),
        }
    }

    /// Matches an entire token span, trying the exact form first and then
    /// the last token with a plural `-s` / `-es` stripped.
    fn match_span(&self, tokens: &[String]) -> Option<TermId> {
        if tokens.is_empty() || tokens.len() > self.max_tokens {
            return None;
        }
        let joined = tokens.join(" ");
        if let Some(id) = self.vocab.id_of(&joined) {
            return Some(id);
        }
        let last = tokens.last().expect("span nonempty");
        for suffix in ["s", "es"] {
            if let Some(stem) = last.strip_suffix(suffix) {
                if stem.is_empty() {
                    continue;
                }
                let mut alt = tokens[..tokens.len() - 1].join(" ");
                if !alt.is_empty() {
                    alt.push(' ');
                }
                alt.push_str(stem);
                if let Some(id) = self.vocab.id_of(&alt) {
                    return Some(id);
                }
            }
        }
        None
    }

    /// Longest vocabulary term ending at `end` (exclusive).
    fn longest_suffix(&self, tokens: &[String], end: usize) -> Option<TermId> {
        let max_len = self.max_tokens.min(end);
        (1..=max_len)
            .rev()
            .find_map(|len| self.match_span(&tokens[end - len..end]))
    }

    /// Longest vocabulary term starting at `start`.
    fn longest_prefix(&self, tokens: &[String], start: usize) -> Option<TermId> {
        let max_len = self.max_tokens.min(tokens.len() - start);
        (1..=max_len)
            .rev()
            .find_map(|len| self.match_span(&tokens[start..start + len]))
    }
}

fn is_delimiter(tok: &str) -> bool {
    tok == "," || tok == "and" || tok == "or"
}

/// List elements scanning forward from `start` to the sentence end.
fn forward_list(matcher: &SurfaceMatcher, tokens: &[String], start: usize) -> Vec<TermId> {
    let mut found = Vec::new();
    let mut elem_start = start;
    let mut i = start;
    loop {
        if i == tokens.len() || is_delimiter(&tokens[i]) {
            let elem = &tokens[elem_start..i];
            if !elem.is_empty() {
                match matcher.match_span(elem) {
                    Some(id) => found.push(id),
                    None => break,
                }
            }
            if i == tokens.len() {
                break;
            }
            elem_start = i + 1;
        }
        i += 1;
    }
    found
}

/// List elements scanning backward from `end` (exclusive) to the sentence
/// start. Returned nearest-first.
fn backward_list(matcher: &SurfaceMatcher, tokens: &[String], end: usize) -> Vec<TermId> {
    let mut found = Vec::new();
    let mut elem_end = end;
    let mut i = end;
    loop {
        if i == 0 || is_delimiter(&tokens[i - 1]) {
            let elem = &tokens[i..elem_end];
            if !elem.is_empty() {
                match matcher.match_span(elem) {
                    Some(id) => found.push(id),
                    None => break,
                }
            }
            if i == 0 {
                break;
            }
            elem_end = i - 1;
        }
        i -= 1;
    }
    found
}

/// Position just before the anchor, skipping one optional comma.
fn hypernym_end(tokens: &[String], anchor: usize) -> usize {
    if anchor > 0 && tokens[anchor - 1] == "," {
        anchor - 1
    } else {
        anchor
    }
}

/// Extracts (hypernym, hyponym) occurrences from one sentence.
fn extract_from_sentence(
    matcher: &SurfaceMatcher,
    patterns: &[Pattern],
    raw_tokens: &[String],
    emit: &mut impl FnMut(TermId, TermId),
) {
    let has = |p: Pattern| patterns.contains(&p);
    let tokens: Vec<String> = raw_tokens.iter().map(|t| t.to_lowercase()).collect();
    let n = tokens.len();
    let mut emit_pair = |hypernym: TermId, hyponym: TermId| {
        if hypernym != hyponym {
            emit(hypernym, hyponym);
        }
    };
    for i in 0..n {
        match tokens[i].as_str() {
            "such" => {
                if i + 1 < n && tokens[i + 1] == "as" {
                    if has(Pattern::YSuchAsX) {
                        let end = hypernym_end(&tokens, i);
                        if let Some(hyper) = matcher.longest_suffix(&tokens, end) {
                            for hypo in forward_list(matcher, &tokens, i + 2) {
                                emit_pair(hyper, hypo);
                            }
                        }
                    }
                } else if has(Pattern::SuchYAsX) {
                    // `such Y as X`: Y must consume everything between
                    // `such` and the first matching `as`.
                    let limit = (i + 1 + matcher.max_tokens).min(n.saturating_sub(1));
                    for j in i + 2..=limit {
                        if tokens[j] != "as" {
                            continue;
                        }
                        if let Some(hyper) = matcher.match_span(&tokens[i + 1..j]) {
                            for hypo in forward_list(matcher, &tokens, j + 1) {
                                emit_pair(hyper, hypo);
                            }
                        }
                        break;
                    }
                }
            }
            "including" | "especially" => {
                let wanted = if tokens[i] == "including" {
                    Pattern::YIncludingX
                } else {
                    Pattern::YEspeciallyX
                };
                if has(wanted) {
                    let end = hypernym_end(&tokens, i);
                    if let Some(hyper) = matcher.longest_suffix(&tokens, end) {
                        for hypo in forward_list(matcher, &tokens, i + 1) {
                            emit_pair(hyper, hypo);
                        }
                    }
                }
            }
            "or" | "and" => {
                let wanted = if tokens[i] == "or" {
                    Pattern::XOrOtherY
                } else {
                    Pattern::XAndOtherY
                };
                if has(wanted) && i + 1 < n && tokens[i + 1] == "other" {
                    if let Some(hyper) = matcher.longest_prefix(&tokens, i + 2) {
                        for hypo in backward_list(matcher, &tokens, i) {
                            emit_pair(hyper, hypo);
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// Scans the corpus and aggregates pattern hits into counted seed pairs.
pub fn extract_seed_pairs(
    corpus: &Corpus,
    vocab: &Vocabulary,
    patterns: &[Pattern],
) -> SeedPairSet {
    let matcher = SurfaceMatcher::new(vocab);
    let mut counts: BTreeMap<(TermId, TermId), u32> = BTreeMap::new();
    for doc in &corpus.documents {
        for sentence in &doc.sentences {
            extract_from_sentence(&matcher, patterns, sentence, &mut |hyper, hypo| {
                *counts.entry((hyper, hypo)).or_insert(0) += 1;
            });
        }
    }
    SeedPairSet::from_counts(counts)
}

/// Splits seed pairs into `k` disjoint folds of size differing by at most
/// one, shuffled with `seed`.
pub fn split_folds(seeds: &SeedPairSet, k: usize, seed: u64) -> Result<Vec<SeedPairSet>> {
    if k < 2 {
        return Err(Error::FoldSplit("k must be at least 2".into()));
    }
    if k > seeds.len() {
        return Err(Error::FoldSplit(format!(
            "k={k} exceeds the number of seed pairs ({})",
            seeds.len()
        )));
    }
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut folds: Vec<BTreeMap<(TermId, TermId), u32>> = vec![BTreeMap::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        let p = seeds.pairs()[idx];
        folds[pos % k].insert((p.hypernym, p.hyponym), p.count);
    }
    Ok(folds.into_iter().map(SeedPairSet::from_counts).collect())
}
