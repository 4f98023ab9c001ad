//! Pair scoring model and its trainer.
//!
//! The score of an ordered pair (t1, t2) combines two branches:
//!
//! ```text
//! s(t1→t2) = φ(f_t1)ᵀ Σ φ(f_t2) + hᵀ ψ(g_t1t2)
//! ```
//!
//! * φ: one affine map `node_dim → node_hidden` followed by tanh, with
//!   dropout rate `p_phi` at train time.
//! * Σ: strictly diagonal coefficients on the node-hidden axis. With h = 0
//!   the score is symmetric in (t1, t2); direction is carried by ψ.
//! * ψ: two affine layers `N → N → N/2` (integer division), each followed
//!   by tanh and train-time dropout `p_psi`; h is the output vector.
//!
//! Training minimizes the contrastive hinge loss
//! `Σ max(0, 1 − s(pos) + s(neg))` with `L` negatives per positive sampled
//! by corrupting the hyponym slot, resampled every epoch, never emitting a
//! pair present in the seed set. Dropout uses inverted scaling, so
//! inference applies the raw parameters with no rescale.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::ContextIndex;
use crate::dih::{FeatureLayout, Measure, PairwiseFeatures};
use crate::embedding::FeatureStore;
use crate::error::{Error, Result};
use crate::graph::{write_text, TermId, Vocabulary};
use crate::seeds::SeedPairSet;

/// Shape triple (d, h_node, N); the pair branch hidden width is N/2
/// (integer division, minimum 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub node_dim: usize,
    pub node_hidden: usize,
    pub pair_dim: usize,
}

impl ModelDims {
    pub fn pair_hidden(&self) -> usize {
        (self.pair_dim / 2).max(1)
    }
}

/// Flat parameter segment offsets, in a fixed order.
#[derive(Debug, Clone, Copy)]
struct Offsets {
    w_phi: usize,
    b_phi: usize,
    sigma: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    h: usize,
    total: usize,
}

impl Offsets {
    fn of(dims: &ModelDims) -> Offsets {
        let (d, hn, n, nh) = (
            dims.node_dim,
            dims.node_hidden,
            dims.pair_dim,
            dims.pair_hidden(),
        );
        let w_phi = 0;
        let b_phi = w_phi + hn * d;
        let sigma = b_phi + hn;
        let w1 = sigma + hn;
        let b1 = w1 + n * n;
        let w2 = b1 + n;
        let b2 = w2 + nh * n;
        let h = b2 + nh;
        let total = h + nh;
        Offsets {
            w_phi,
            b_phi,
            sigma,
            w1,
            b1,
            w2,
            b2,
            h,
            total,
        }
    }
}

/// All model parameters plus the feature-layout fingerprint they were
/// trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    dims: ModelDims,
    p_phi: f64,
    p_psi: f64,
    layout_fingerprint: String,
    theta: Vec<f64>,
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    dims: ModelDims,
    p_phi: f64,
    p_psi: f64,
    layout: String,
    theta: Vec<f64>,
}

impl ModelParams {
    /// Seeded initialization: weights and biases uniform in
    /// ±1/√fan_in, Σ all ones, h all zeros.
    pub fn init(
        dims: ModelDims,
        p_phi: f64,
        p_psi: f64,
        layout_fingerprint: String,
        rng: &mut ChaCha8Rng,
    ) -> Result<ModelParams> {
        if dims.node_dim == 0 || dims.node_hidden == 0 || dims.pair_dim == 0 {
            return Err(Error::InvalidParameter("model dims must be positive".into()));
        }
        for (name, p) in [("p_phi", p_phi), ("p_psi", p_psi)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name}={p} outside [0,1)")));
            }
        }
        let off = Offsets::of(&dims);
        let mut theta = vec![0.0; off.total];
        let mut fill = |lo: usize, hi: usize, fan_in: usize, rng: &mut ChaCha8Rng| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut theta[lo..hi] {
                *v = (rng.random::<f64>() * 2.0 - 1.0) * bound;
            }
        };
        fill(off.w_phi, off.sigma, dims.node_dim, rng);
        fill(off.w1, off.w2, dims.pair_dim, rng);
        fill(off.w2, off.h, dims.pair_dim, rng);
        for v in &mut theta[off.sigma..off.w1] {
            *v = 1.0;
        }
        // h stays zero.
        Ok(ModelParams {
            dims,
            p_phi,
            p_psi,
            layout_fingerprint,
            theta,
        })
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn layout_fingerprint(&self) -> &str {
        &self.layout_fingerprint
    }

    pub fn parameter_count(&self) -> usize {
        self.theta.len()
    }

    fn offsets(&self) -> Offsets {
        Offsets::of(&self.dims)
    }

    fn seg(&self, lo: usize, len: usize) -> &[f64] {
        &self.theta[lo..lo + len]
    }

    /// Mutable access to the flat parameter vector (finite-difference
    /// probing and tests).
    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Versioned JSON checkpoint with full-precision parameters.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CheckpointFile {
            format_version: CHECKPOINT_VERSION,
            dims: self.dims,
            p_phi: self.p_phi,
            p_psi: self.p_psi,
            layout: self.layout_fingerprint.clone(),
            theta: self.theta.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("checkpoint serializes");
        text.push('\n');
        write_text(path, &text)
    }

    /// Loads a checkpoint; when `expected_layout` is given, its fingerprint
    /// must match the one recorded at save time.
    pub fn load(path: &Path, expected_layout: Option<&FeatureLayout>) -> Result<ModelParams> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if file.format_version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                expected: CHECKPOINT_VERSION,
                found: file.format_version,
            });
        }
        let off = Offsets::of(&file.dims);
        if file.theta.len() != off.total {
            return Err(Error::DimensionMismatch {
                what: "checkpoint parameter vector".into(),
                expected: off.total,
                actual: file.theta.len(),
            });
        }
        if file.theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("checkpoint parameters".into()));
        }
        if let Some(layout) = expected_layout {
            if layout.fingerprint() != file.layout {
                return Err(Error::LayoutMismatch {
                    expected: file.layout,
                    actual: layout.fingerprint(),
                });
            }
        }
        Ok(ModelParams {
            dims: file.dims,
            p_phi: file.p_phi,
            p_psi: file.p_psi,
            layout_fingerprint: file.layout,
            theta: file.theta,
        })
    }
}

/// Dropout multiplier vector: 0 with probability `p`, else 1/(1−p).
fn dropout_scales(len: usize, p: f64, rng: Option<&mut ChaCha8Rng>) -> Vec<f64> {
    match rng {
        Some(rng) if p > 0.0 => {
            let keep = 1.0 - p;
            (0..len)
                .map(|_| {
                    if rng.random::<f64>() < p {
                        0.0
                    } else {
                        1.0 / keep
                    }
                })
                .collect()
        }
        _ => vec![1.0; len],
    }
}

/// Intermediate activations of one score evaluation.
struct Cache {
    f1: Vec<f64>,
    f2: Vec<f64>,
    g: Vec<f64>,
    t1: Vec<f64>,
    s1: Vec<f64>,
    phi1: Vec<f64>,
    t2: Vec<f64>,
    s2: Vec<f64>,
    phi2: Vec<f64>,
    z1t: Vec<f64>,
    sz1: Vec<f64>,
    z1d: Vec<f64>,
    z2t: Vec<f64>,
    sz2: Vec<f64>,
    z2d: Vec<f64>,
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        out.push(dot + bias[r]);
    }
    out
}

impl ModelParams {
    fn check_inputs(&self, f1: &[f64], f2: &[f64], g: &[f64]) -> Result<()> {
        for (what, v, want) in [
            ("f1", f1, self.dims.node_dim),
            ("f2", f2, self.dims.node_dim),
            ("g12", g, self.dims.pair_dim),
        ] {
            if v.len() != want {
                return Err(Error::DimensionMismatch {
                    what: what.into(),
                    expected: want,
                    actual: v.len(),
                });
            }
        }
        Ok(())
    }

    fn forward(&self, f1: &[f64], f2: &[f64], g: &[f64], mut rng: Option<&mut ChaCha8Rng>) -> (f64, Cache) {
        let off = self.offsets();
        let (d, hn, n, nh) = (
            self.dims.node_dim,
            self.dims.node_hidden,
            self.dims.pair_dim,
            self.dims.pair_hidden(),
        );
        let w_phi = self.seg(off.w_phi, hn * d);
        let b_phi = self.seg(off.b_phi, hn);
        let sigma = self.seg(off.sigma, hn);
        let w1 = self.seg(off.w1, n * n);
        let b1 = self.seg(off.b1, n);
        let w2 = self.seg(off.w2, nh * n);
        let b2 = self.seg(off.b2, nh);
        let h = self.seg(off.h, nh);

        let node_side = |f: &[f64], rng: &mut Option<&mut ChaCha8Rng>| {
            let t: Vec<f64> = matvec(w_phi, hn, d, f, b_phi)
                .into_iter()
                .map(f64::tanh)
                .collect();
            let s = dropout_scales(hn, self.p_phi, rng.as_deref_mut());
            let phi: Vec<f64> = t.iter().zip(&s).map(|(a, b)| a * b).collect();
            (t, s, phi)
        };
        let (t1, s1, phi1) = node_side(f1, &mut rng);
        let (t2, s2, phi2) = node_side(f2, &mut rng);
        let bilinear: f64 = sigma
            .iter()
            .zip(&phi1)
            .zip(&phi2)
            .map(|((s, a), b)| s * a * b)
            .sum();

        let z1t: Vec<f64> = matvec(w1, n, n, g, b1).into_iter().map(f64::tanh).collect();
        let sz1 = dropout_scales(n, self.p_psi, rng.as_deref_mut());
        let z1d: Vec<f64> = z1t.iter().zip(&sz1).map(|(a, b)| a * b).collect();
        let z2t: Vec<f64> = matvec(w2, nh, n, &z1d, b2)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let sz2 = dropout_scales(nh, self.p_psi, rng.as_deref_mut());
        let z2d: Vec<f64> = z2t.iter().zip(&sz2).map(|(a, b)| a * b).collect();
        let pair: f64 = h.iter().zip(&z2d).map(|(a, b)| a * b).sum();

        let cache = Cache {
            f1: f1.to_vec(),
            f2: f2.to_vec(),
            g: g.to_vec(),
            t1,
            s1,
            phi1,
            t2,
            s2,
            phi2,
            z1t,
            sz1,
            z1d,
            z2t,
            sz2,
            z2d,
        };
        (bilinear + pair, cache)
    }

    /// Accumulates d(score)/d(theta) · `ds` into `grads`.
    fn backward(&self, cache: &Cache, ds: f64, grads: &mut [f64]) {
        let off = self.offsets();
        let (d, hn, n, nh) = (
            self.dims.node_dim,
            self.dims.node_hidden,
            self.dims.pair_dim,
            self.dims.pair_hidden(),
        );
        let sigma = self.seg(off.sigma, hn);
        let w2 = self.seg(off.w2, nh * n);
        let h = self.seg(off.h, nh);

        // Bilinear branch.
        for i in 0..hn {
            grads[off.sigma + i] += ds * cache.phi1[i] * cache.phi2[i];
        }
        let node_back = |t: &Vec<f64>, s: &Vec<f64>, other_phi: &Vec<f64>, f: &Vec<f64>, grads: &mut [f64]| {
            for i in 0..hn {
                let dphi = ds * sigma[i] * other_phi[i];
                let da = dphi * s[i] * (1.0 - t[i] * t[i]);
                grads[off.b_phi + i] += da;
                let row = off.w_phi + i * d;
                for j in 0..d {
                    grads[row + j] += da * f[j];
                }
            }
        };
        node_back(&cache.t1, &cache.s1, &cache.phi2, &cache.f1, grads);
        node_back(&cache.t2, &cache.s2, &cache.phi1, &cache.f2, grads);

        // Pair branch.
        let mut da2 = vec![0.0; nh];
        for i in 0..nh {
            grads[off.h + i] += ds * cache.z2d[i];
            let dz2d = ds * h[i];
            da2[i] = dz2d * cache.sz2[i] * (1.0 - cache.z2t[i] * cache.z2t[i]);
            grads[off.b2 + i] += da2[i];
            let row = off.w2 + i * n;
            for j in 0..n {
                grads[row + j] += da2[i] * cache.z1d[j];
            }
        }
        let mut dz1d = vec![0.0; n];
        for i in 0..nh {
            let row = i * n;
            for j in 0..n {
                dz1d[j] += w2[row + j] * da2[i];
            }
        }
        for j in 0..n {
            let da1 = dz1d[j] * cache.sz1[j] * (1.0 - cache.z1t[j] * cache.z1t[j]);
            grads[off.b1 + j] += da1;
            let row = off.w1 + j * n;
            for k in 0..n {
                grads[row + k] += da1 * cache.g[k];
            }
        }
    }
}

/// Scoring mode: inference is deterministic; training applies dropout
/// drawn from the provided generator.
pub enum ScoreMode<'a> {
    Infer,
    Train(&'a mut ChaCha8Rng),
}

/// Scores one ordered pair from its node vectors and pairwise features.
pub fn score(
    params: &ModelParams,
    f1: &[f64],
    f2: &[f64],
    g12: &[f64],
    mode: ScoreMode<'_>,
) -> Result<f64> {
    params.check_inputs(f1, f2, g12)?;
    let rng = match mode {
        ScoreMode::Infer => None,
        ScoreMode::Train(rng) => Some(rng),
    };
    let (s, _) = params.forward(f1, f2, g12, rng);
    Ok(s)
}

/// Inputs of one score evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInput {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub g: Vec<f64>,
}

/// One positive with its sampled negatives (all sharing the f1 slot when
/// built by the default hyponym-corrupting sampler).
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    pub pos: PairInput,
    pub negs: Vec<PairInput>,
}

/// Contrastive hinge loss `Σ max(0, 1 − s(pos) + s(neg))`, dropout off.
pub fn loss(params: &ModelParams, samples: &[LossSample]) -> Result<f64> {
    let mut total = 0.0;
    for sample in samples {
        let sp = score(params, &sample.pos.f1, &sample.pos.f2, &sample.pos.g, ScoreMode::Infer)?;
        for neg in &sample.negs {
            let sn = score(params, &neg.f1, &neg.f2, &neg.g, ScoreMode::Infer)?;
            total += (1.0 - sp + sn).max(0.0);
        }
    }
    Ok(total)
}

/// Analytic gradient of [`loss`] over the flat parameter vector.
fn loss_gradient(params: &ModelParams, samples: &[LossSample]) -> Result<Vec<f64>> {
    let mut grads = vec![0.0; params.parameter_count()];
    for sample in samples {
        params.check_inputs(&sample.pos.f1, &sample.pos.f2, &sample.pos.g)?;
        let (sp, cache_p) = params.forward(&sample.pos.f1, &sample.pos.f2, &sample.pos.g, None);
        for neg in &sample.negs {
            params.check_inputs(&neg.f1, &neg.f2, &neg.g)?;
            let (sn, cache_n) = params.forward(&neg.f1, &neg.f2, &neg.g, None);
            if 1.0 - sp + sn > 0.0 {
                params.backward(&cache_p, -1.0, &mut grads);
                params.backward(&cache_n, 1.0, &mut grads);
            }
        }
    }
    Ok(grads)
}

/// Maximum relative error between the analytic gradient and central finite
/// differences with step `epsilon`, over every parameter coordinate.
pub fn gradient_check(params: &ModelParams, samples: &[LossSample], epsilon: f64) -> Result<f64> {
    let analytic = loss_gradient(params, samples)?;
    let mut probe = params.clone();
    let mut max_rel = 0.0f64;
    for i in 0..probe.parameter_count() {
        let orig = probe.theta()[i];
        probe.theta_mut()[i] = orig + epsilon;
        let plus = loss(&probe, samples)?;
        probe.theta_mut()[i] = orig - epsilon;
        let minus = loss(&probe, samples)?;
        probe.theta_mut()[i] = orig;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let denom = (analytic[i].abs() + numeric.abs()).max(1e-8);
        max_rel = max_rel.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(max_rel)
}

/// Node vectors per term id, resolved through the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureTable {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl NodeFeatureTable {
    pub fn from_store(vocab: &Vocabulary, store: &FeatureStore) -> Result<NodeFeatureTable> {
        let rows = vocab
            .ids()
            .map(|t| store.require(vocab.node_id(t)).map(|v| v.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(NodeFeatureTable {
            dim: store.dim(),
            rows,
        })
    }

    /// All-zero table (isolates the pairwise branch in tests and ablations).
    pub fn zeros(n_terms: usize, dim: usize) -> NodeFeatureTable {
        NodeFeatureTable {
            dim,
            rows: vec![vec![0.0; dim]; n_terms],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, t: TermId) -> Result<&[f64]> {
        self.rows
            .get(t.0 as usize)
            .map(|v| v.as_slice())
            .ok_or(Error::TermOutOfRange {
                term: t.0,
                len: self.rows.len(),
            })
    }
}

/// Source of pairwise feature vectors for arbitrary ordered pairs.
pub trait PairFeatureSource: Sync {
    fn layout(&self) -> &FeatureLayout;
    /// `None` marks a coverage gap (pair unavailable in a precomputed store).
    fn features_of(&self, t1: TermId, t2: TermId) -> Option<Vec<f64>>;
}

/// Computes pair features on demand from contexts; covers every pair.
pub struct ContextPairSource<'a> {
    contexts: &'a [ContextIndex],
    measures: &'a [Measure],
    layout: FeatureLayout,
}

impl<'a> ContextPairSource<'a> {
    pub fn new(contexts: &'a [ContextIndex], measures: &'a [Measure]) -> ContextPairSource<'a> {
        ContextPairSource {
            contexts,
            measures,
            layout: FeatureLayout::from_contexts(contexts, measures),
        }
    }
}

impl PairFeatureSource for ContextPairSource<'_> {
    fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    fn features_of(&self, t1: TermId, t2: TermId) -> Option<Vec<f64>> {
        let rows = crate::dih::compute_pairwise_features(
            &[(t1, t2)],
            self.contexts,
            self.measures,
            Default::default(),
        )
        .ok()?;
        Some(rows.row(0).to_vec())
    }
}

/// Serves rows from a precomputed store; absent pairs are coverage gaps.
pub struct PrecomputedPairSource<'a> {
    features: &'a PairwiseFeatures,
    index: HashMap<(u32, u32), usize>,
}

impl<'a> PrecomputedPairSource<'a> {
    pub fn new(features: &'a PairwiseFeatures) -> PrecomputedPairSource<'a> {
        let index = features
            .pairs()
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| ((a.0, b.0), i))
            .collect();
        PrecomputedPairSource { features, index }
    }
}

impl PairFeatureSource for PrecomputedPairSource<'_> {
    fn layout(&self) -> &FeatureLayout {
        self.features.layout()
    }

    fn features_of(&self, t1: TermId, t2: TermId) -> Option<Vec<f64>> {
        self.index
            .get(&(t1.0, t2.0))
            .map(|&i| self.features.row(i).to_vec())
    }
}

/// Which slot negative sampling corrupts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptSlot {
    /// Default: keep the hypernym, replace the hyponym.
    Hyponym,
    /// Alternative reading: keep the hyponym, replace the hypernym.
    Hypernym,
}

/// Trainer hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Negative ratio L.
    pub negatives: usize,
    pub p_phi: f64,
    pub p_psi: f64,
    pub node_hidden: usize,
    pub corrupt: CorruptSlot,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.05,
            negatives: 10,
            p_phi: 0.7,
            p_psi: 0.1,
            node_hidden: 256,
            corrupt: CorruptSlot::Hyponym,
            seed: 42,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.negatives == 0 {
            return Err(Error::InvalidParameter("negatives (L) must be ≥ 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be ≥ 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning_rate must be positive".into()));
        }
        for (name, p) in [("p_phi", self.p_phi), ("p_psi", self.p_psi)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name}={p} outside [0,1)")));
            }
        }
        if self.node_hidden == 0 {
            return Err(Error::InvalidParameter("node_hidden must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Trained parameters plus the per-epoch loss trace (dropout-off loss over
/// that epoch's sampled triples, measured after the epoch's updates).
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub trace: Vec<f64>,
}

const NEGATIVE_SAMPLING_ATTEMPTS: usize = 10_000;

fn sample_negative(
    seeds: &SeedPairSet,
    pool: &[TermId],
    pos: (TermId, TermId),
    corrupt: CorruptSlot,
    rng: &mut ChaCha8Rng,
) -> Result<(TermId, TermId)> {
    let (hyper, hypo) = pos;
    for _ in 0..NEGATIVE_SAMPLING_ATTEMPTS {
        let x = pool[rng.random_range(0..pool.len())];
        let candidate = match corrupt {
            CorruptSlot::Hyponym => (hyper, x),
            CorruptSlot::Hypernym => (x, hypo),
        };
        if candidate.0 == candidate.1 || seeds.contains(candidate.0, candidate.1) {
            continue;
        }
        return Ok(candidate);
    }
    Err(Error::InvalidParameter(
        "negative sampling exhausted: every candidate pair is in the seed set".into(),
    ))
}

/// Trains the model on the seed pairs.
///
/// `extra_terms` widens the negative-sampling pool beyond the terms of the
/// seed set (typically the candidate-set terms). Deterministic under
/// `config.seed`. Errors when a node vector or a pairwise row is missing
/// for any term the trainer touches.
pub fn train<P: PairFeatureSource>(
    seeds: &SeedPairSet,
    node: &NodeFeatureTable,
    pairs: &P,
    extra_terms: &[TermId],
    config: &TrainConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("cannot train on an empty seed set".into()));
    }
    let dims = ModelDims {
        node_dim: node.dim(),
        node_hidden: config.node_hidden,
        pair_dim: pairs.layout().len(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ModelParams::init(
        dims,
        config.p_phi,
        config.p_psi,
        pairs.layout().fingerprint(),
        &mut rng,
    )?;

    let mut pool: Vec<TermId> = seeds
        .pairs()
        .iter()
        .flat_map(|p| [p.hypernym, p.hyponym])
        .chain(extra_terms.iter().copied())
        .collect();
    pool.sort_unstable();
    pool.dedup();

    let mut pair_cache: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
    let mut features_of = |t1: TermId, t2: TermId| -> Result<Vec<f64>> {
        if let Some(row) = pair_cache.get(&(t1.0, t2.0)) {
            return Ok(row.clone());
        }
        let row = pairs.features_of(t1, t2).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "pairwise features missing for ({t1}, {t2}); the precomputed store does not cover the training pairs"
            ))
        })?;
        pair_cache.insert((t1.0, t2.0), row.clone());
        Ok(row)
    };

    let mut trace = Vec::with_capacity(config.epochs);
    for _epoch in 0..config.epochs {
        // Resample negatives: L per positive, hyponym slot corrupted by
        // default, never a pair in S.
        let mut triples: Vec<((TermId, TermId), (TermId, TermId))> =
            Vec::with_capacity(seeds.len() * config.negatives);
        for p in seeds.pairs() {
            let pos = (p.hypernym, p.hyponym);
            for _ in 0..config.negatives {
                let neg = sample_negative(seeds, &pool, pos, config.corrupt, &mut rng)?;
                debug_assert!(!seeds.contains(neg.0, neg.1));
                triples.push((pos, neg));
            }
        }
        triples.shuffle(&mut rng);

        for batch in triples.chunks(config.batch_size) {
            let mut grads = vec![0.0; params.parameter_count()];
            for &(pos, neg) in batch {
                let g_pos = features_of(pos.0, pos.1)?;
                let g_neg = features_of(neg.0, neg.1)?;
                let (sp, cache_p) =
                    params.forward(node.get(pos.0)?, node.get(pos.1)?, &g_pos, Some(&mut rng));
                let (sn, cache_n) =
                    params.forward(node.get(neg.0)?, node.get(neg.1)?, &g_neg, Some(&mut rng));
                if 1.0 - sp + sn > 0.0 {
                    params.backward(&cache_p, -1.0, &mut grads);
                    params.backward(&cache_n, 1.0, &mut grads);
                }
            }
            let scale = config.learning_rate / batch.len() as f64;
            for (t, g) in params.theta.iter_mut().zip(&grads) {
                *t -= scale * g;
            }
        }

        // Dropout-off loss over this epoch's triples.
        let mut epoch_loss = 0.0;
        for &(pos, neg) in &triples {
            let g_pos = features_of(pos.0, pos.1)?;
            let g_neg = features_of(neg.0, neg.1)?;
            let (sp, _) = params.forward(node.get(pos.0)?, node.get(pos.1)?, &g_pos, None);
            let (sn, _) = params.forward(node.get(neg.0)?, node.get(neg.1)?, &g_neg, None);
            epoch_loss += (1.0 - sp + sn).max(0.0);
        }
        trace.push(epoch_loss);
    }

    Ok(TrainedModel { params, trace })
}

/// One ranked pair, surfaces resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPair {
    pub hypernym: String,
    pub hyponym: String,
    pub score: f64,
}

/// Pairs sorted by non-increasing score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedPairList {
    entries: Vec<RankedPair>,
}

impl RankedPairList {
    pub fn from_sorted(entries: Vec<RankedPair>) -> Result<RankedPairList> {
        if entries.windows(2).any(|w| w[0].score < w[1].score) {
            return Err(Error::InvalidParameter("ranked list scores must be non-increasing".into()));
        }
        Ok(RankedPairList { entries })
    }

    pub fn entries(&self) -> &[RankedPair] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// TSV `hypernym<TAB>hyponym<TAB>score` with a header line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::from("hypernym\thyponym\tscore\n");
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.hypernym, e.hyponym, e.score));
        }
        write_text(path, &out)
    }

    pub fn read(path: &Path) -> Result<RankedPairList> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || (lineno == 0 && line == "hypernym\thyponym\tscore") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, lineno + 1, "expected 3 columns"));
            }
            let score: f64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, "bad score"))?;
            if !score.is_finite() {
                return Err(Error::parse(path, lineno + 1, "non-finite score"));
            }
            entries.push(RankedPair {
                hypernym: cols[0].to_string(),
                hyponym: cols[1].to_string(),
                score,
            });
        }
        RankedPairList::from_sorted(entries).map_err(|_| {
            Error::parse(path, 0, "ranked list is not sorted by non-increasing score")
        })
    }
}

/// Scores every row of `features` and sorts descending, breaking score
/// ties with a shuffle seeded by `tie_seed`.
pub fn rank_pairs(
    params: &ModelParams,
    features: &PairwiseFeatures,
    node: &NodeFeatureTable,
    vocab: &Vocabulary,
    tie_seed: u64,
) -> Result<RankedPairList> {
    if features.layout().fingerprint() != params.layout_fingerprint() {
        return Err(Error::LayoutMismatch {
            expected: params.layout_fingerprint().to_string(),
            actual: features.layout().fingerprint(),
        });
    }
    let scores: Vec<Result<f64>> = features
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(i, &(t1, t2))| {
            score(
                params,
                node.get(t1)?,
                node.get(t2)?,
                features.row(i),
                ScoreMode::Infer,
            )
        })
        .collect();
    let mut entries = Vec::with_capacity(scores.len());
    for (i, s) in scores.into_iter().enumerate() {
        let (t1, t2) = features.pairs()[i];
        entries.push(RankedPair {
            hypernym: vocab.surface(t1).to_string(),
            hyponym: vocab.surface(t2).to_string(),
            score: s?,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
    entries.shuffle(&mut rng);
    entries.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));
    RankedPairList::from_sorted(entries)
}
