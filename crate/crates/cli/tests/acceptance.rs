//! Acceptance suite: one test per acceptance criterion, each printing one
//! PASS/FAIL line. Tolerances and runtime budgets are pinned in the code.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxonet_core::context::{build_contexts, ContextIndex, ContextSpec};
use taxonet_core::dih::{compute_pairwise_features, dih_measures, Measure};
use taxonet_core::embedding::{train_embedding, EmbedConfig};
use taxonet_core::eval::{evaluate, reciprocal_rank_metrics, LabeledPairSet};
use taxonet_core::graph::{target_vocabulary, Corpus, Document, HinGraph, HinSchema, Node, TermId};
use taxonet_core::model::{
    gradient_check, rank_pairs, train, ContextPairSource, LossSample, ModelDims, ModelParams,
    PairInput, RankedPair, RankedPairList, TrainConfig,
};
use taxonet_core::seeds::{extract_seed_pairs, Pattern, SeedPairSet};
use taxonet_core::synth::{emit_synthetic_hin, generate_synthetic_hin, SynthConfig};
use taxonet_core::taxonomy::{
    build_taxonomy, RemovalPolicy, DEFAULT_TOP_EDGES, DEFAULT_TOP_TERMS,
};

fn report(n: usize, name: &str, result: Result<(), String>) {
    match &result {
        Ok(()) => println!("ACCEPTANCE {n} ({name}): PASS"),
        Err(e) => println!("ACCEPTANCE {n} ({name}): FAIL: {e}"),
    }
    if let Err(e) = result {
        panic!("acceptance criterion {n} ({name}) failed: {e}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed <= budget, || {
        format!("{what} took {elapsed:?}, budget {budget:?}")
    })
}

/// ratio with the 0/0 convention used throughout.
fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        a / b
    }
}

#[test]
fn criterion_1_inclusion_measure_oracle_equivalence() {
    report(1, "inclusion measure oracle equivalence", (|| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for fixture in 0..500u32 {
            let units = rng.random_range(1..=20u32);
            let terms = rng.random_range(2..=10usize);
            let relevance: Vec<Vec<u32>> = (0..terms)
                .map(|_| (0..units).filter(|_| rng.random::<f64>() < 0.4).collect())
                .collect();
            let ctx = ContextIndex::new(
                format!("fixture{fixture}"),
                (0..units).map(|u| format!("u{u}")).collect(),
                relevance.clone(),
            )
            .map_err(|e| e.to_string())?;
            for t1 in 0..terms {
                for t2 in 0..terms {
                    if t1 == t2 {
                        continue;
                    }
                    let got = dih_measures(&ctx, TermId(t1 as u32), TermId(t2 as u32))
                        .map_err(|e| e.to_string())?;
                    let set1: BTreeSet<u32> = relevance[t1].iter().copied().collect();
                    let set2: BTreeSet<u32> = relevance[t2].iter().copied().collect();
                    let a = set1.intersection(&set2).count() as f64;
                    let b = set2.len() as f64;
                    let d = set1.len() as f64;
                    let want = [
                        ratio(a, b),
                        (ratio(a, b) * (1.0 - ratio(a, d))).sqrt(),
                        ratio(a, b) - ratio(a, d),
                        a / units as f64,
                    ];
                    for (m, (&g, &w)) in got.iter().zip(want.iter()).enumerate() {
                        ensure((g - w).abs() <= 1e-12, || {
                            format!(
                                "fixture {fixture} pair ({t1},{t2}) measure {m}: got {g}, oracle {w}"
                            )
                        })?;
                    }
                }
            }
        }
        within_budget(start, Duration::from_secs(5), "500 oracle fixtures")
    })());
}

#[test]
fn criterion_2_gradient_fidelity() {
    report(2, "gradient fidelity", (|| {
        let start = Instant::now();
        let dims = ModelDims {
            node_dim: 4,
            node_hidden: 6,
            pair_dim: 8,
        };
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(200 + i);
            let params = ModelParams::init(dims, 0.0, 0.0, "grid".into(), &mut rng)
                .map_err(|e| e.to_string())?;
            let mut rand_vec = |len: usize| -> Vec<f64> {
                (0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
            };
            let rand_pair = |rand_vec: &mut dyn FnMut(usize) -> Vec<f64>| PairInput {
                f1: rand_vec(4),
                f2: rand_vec(4),
                g: rand_vec(8),
            };
            let samples: Vec<LossSample> = (0..3)
                .map(|_| LossSample {
                    pos: rand_pair(&mut rand_vec),
                    negs: (0..4).map(|_| rand_pair(&mut rand_vec)).collect(),
                })
                .collect();
            let err = gradient_check(&params, &samples, 1e-5).map_err(|e| e.to_string())?;
            worst = worst.max(err);
        }
        ensure(worst < 1e-4, || {
            format!("max relative gradient error {worst:.3e} >= 1e-4")
        })?;
        within_budget(start, Duration::from_secs(30), "20 gradient checks")
    })());
}

fn ranked_list(entries: &[(&str, &str, f64)]) -> RankedPairList {
    let pairs = entries
        .iter()
        .map(|&(h, c, s)| RankedPair {
            hypernym: h.to_string(),
            hyponym: c.to_string(),
            score: s,
        })
        .collect();
    RankedPairList::from_sorted(pairs).expect("sorted fixture")
}

fn label_set(entries: &[(&str, &str, bool)]) -> LabeledPairSet {
    let mut labels = LabeledPairSet::new();
    for &(h, c, positive) in entries {
        labels.insert(h, c, positive).expect("distinct fixture pairs");
    }
    labels
}

#[test]
fn criterion_3_rank_metric_correctness() {
    report(3, "rank metric correctness", (|| {
        // Two groups: group a holds one positive behind one negative
        // (reciprocal rank 1/2); group b holds three positives and nothing
        // else (each rank 1 among non-positives).
        let ranked = ranked_list(&[
            ("a", "x1", 0.9),
            ("b", "y1", 0.8),
            ("b", "y2", 0.7),
            ("a", "x2", 0.6),
            ("b", "y3", 0.5),
        ]);
        let labels = label_set(&[
            ("a", "x1", false),
            ("a", "x2", true),
            ("b", "y1", true),
            ("b", "y2", true),
            ("b", "y3", true),
        ]);
        let m = reciprocal_rank_metrics(&ranked, &labels).map_err(|e| e.to_string())?;
        ensure(m.ma_marr == 0.75, || {
            format!("two-group MaMARR: got {}, want exactly 0.75", m.ma_marr)
        })?;
        ensure(m.mi_marr == 0.875, || {
            format!("two-group MiMARR: got {}, want exactly 0.875", m.mi_marr)
        })?;

        // Six positives interleaved with five negatives in one group:
        // positive k sits at rank k among the non-positives.
        let mut entries = Vec::new();
        let mut expected_labels = Vec::new();
        let mut score = 1.0;
        let positives = ["p1", "p2", "p3", "p4", "p5", "p6"];
        let negatives = ["n1", "n2", "n3", "n4", "n5"];
        for k in 0..6 {
            entries.push(("g", positives[k], score));
            score -= 0.05;
            if k < 5 {
                entries.push(("g", negatives[k], score));
                score -= 0.05;
            }
        }
        let labeled: Vec<(&str, &str, bool)> = entries
            .iter()
            .map(|&(g, t, _)| (g, t, t.starts_with('p')))
            .collect();
        expected_labels.extend(labeled.iter().copied());
        let ranked6 = ranked_list(&entries);
        let labels6 = label_set(&expected_labels);
        let m6 = reciprocal_rank_metrics(&ranked6, &labels6).map_err(|e| e.to_string())?;
        let want = (1..=6).map(|k| 1.0 / k as f64).sum::<f64>() / 6.0;
        ensure((m6.ma_marr - want).abs() <= 1e-5, || {
            format!("six-term MaMARR: got {}, want {want} +- 1e-5", m6.ma_marr)
        })?;
        ensure((m6.ma_marr - 0.40833).abs() <= 1e-5, || {
            format!("six-term MaMARR: got {}, want 0.40833 +- 1e-5", m6.ma_marr)
        })?;

        // Last-rank never beats best-rank aggregation on random fixtures.
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        for fixture in 0..1000 {
            let n = rng.random_range(2..=30usize);
            let groups = ["g0", "g1", "g2", "g3"];
            let mut entries: Vec<(String, String, bool, f64)> = (0..n)
                .map(|i| {
                    let g = groups[rng.random_range(0..groups.len())];
                    (
                        g.to_string(),
                        format!("t{i}"),
                        rng.random::<f64>() < 0.5,
                        rng.random::<f64>(),
                    )
                })
                .collect();
            entries[0].2 = true;
            entries.sort_by(|l, r| r.3.total_cmp(&l.3));
            let ranked = RankedPairList::from_sorted(
                entries
                    .iter()
                    .map(|(g, t, _, s)| RankedPair {
                        hypernym: g.clone(),
                        hyponym: t.clone(),
                        score: *s,
                    })
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            let mut labels = LabeledPairSet::new();
            for (g, t, positive, _) in &entries {
                labels.insert(g, t, *positive).map_err(|e| e.to_string())?;
            }
            let m = reciprocal_rank_metrics(&ranked, &labels).map_err(|e| e.to_string())?;
            ensure(m.ma_mlrr >= m.ma_marr - 1e-12, || {
                format!("fixture {fixture}: MaMLRR {} < MaMARR {}", m.ma_mlrr, m.ma_marr)
            })?;
            ensure(m.mi_mlrr >= m.mi_marr - 1e-12, || {
                format!("fixture {fixture}: MiMLRR {} < MiMARR {}", m.mi_mlrr, m.mi_marr)
            })?;
        }
        Ok(())
    })());
}

/// Concept index parsed back out of a planted term surface `topic_XXX_j`.
fn concept_of(surface: &str) -> usize {
    surface[6..9].parse().expect("planted surface")
}

#[test]
fn criterion_4_granularity_repair() {
    report(4, "granularity repair", (|| {
        let start = Instant::now();
        let config = SynthConfig {
            depth: 3,
            branching: 3,
            terms_per_concept: 1,
            documents: 2000,
            p_anc: 0.0,
            docs_per_group: 8,
            hearst_fraction: 0.4,
            seed: 404,
        };
        let out = generate_synthetic_hin(&config).map_err(|e| e.to_string())?;
        let vocab = target_vocabulary(&out.graph, "keyword").map_err(|e| e.to_string())?;
        let contexts = build_contexts(
            &out.graph,
            &vocab,
            &[ContextSpec::Simplest, ContextSpec::GroupBy("author".into())],
            None,
            405,
        )
        .map_err(|e| e.to_string())?;
        let concepts = 40usize;
        let first_leaf = concepts - 27; // depth-3 ternary tree: 27 leaves
        let mut group_m1_sum = 0.0;
        let mut leaf_edges = 0usize;
        for (parent, child) in &out.tree_edges {
            let pid = vocab.id_of(parent).expect("planted term");
            let cid = vocab.id_of(child).expect("planted term");
            if concept_of(child) >= first_leaf {
                leaf_edges += 1;
                let m1 = dih_measures(&contexts[0], pid, cid).map_err(|e| e.to_string())?[0];
                ensure(m1 == 0.0, || {
                    format!("document-level M1({parent} -> {child}) = {m1}, want exactly 0")
                })?;
            }
            group_m1_sum += dih_measures(&contexts[1], pid, cid).map_err(|e| e.to_string())?[0];
        }
        ensure(leaf_edges == 27, || {
            format!("expected 27 leaf edges, saw {leaf_edges}")
        })?;
        let group_mean = group_m1_sum / out.tree_edges.len() as f64;
        ensure(group_mean >= 0.8, || {
            format!("author-group M1 mean over planted edges = {group_mean}, want >= 0.8")
        })?;
        within_budget(start, Duration::from_secs(60), "granularity fixture")
    })());
}

struct BenchmarkScores {
    p100: f64,
    p1000: f64,
}

fn benchmark_model(
    out: &taxonet_core::synth::SynthOutput,
    specs: &[ContextSpec],
    seed: u64,
) -> Result<BenchmarkScores, String> {
    let vocab = target_vocabulary(&out.graph, "keyword").map_err(|e| e.to_string())?;
    let seeds = extract_seed_pairs(&out.corpus, &vocab, &Pattern::all());
    let embed = EmbedConfig {
        dim: 16,
        walks_per_node: 4,
        walk_length: 10,
        window: 4,
        negatives: 4,
        epochs: 2,
        learning_rate: 0.025,
    };
    let store = train_embedding(&out.graph, &embed, seed + 1).map_err(|e| e.to_string())?;
    let node = taxonet_core::model::NodeFeatureTable::from_store(&vocab, &store)
        .map_err(|e| e.to_string())?;
    let contexts =
        build_contexts(&out.graph, &vocab, specs, Some(&store), seed + 2).map_err(|e| e.to_string())?;
    let candidates: Vec<(TermId, TermId)> = out
        .labels
        .iter()
        .map(|(h, c, _)| (vocab.id_of(h).expect("label term"), vocab.id_of(c).expect("label term")))
        .collect();
    let measures = Measure::all();
    let features = compute_pairwise_features(&candidates, &contexts, &measures, Default::default())
        .map_err(|e| e.to_string())?;
    let source = ContextPairSource::new(&contexts, &measures);
    let mut extra: Vec<TermId> = candidates.iter().flat_map(|&(a, b)| [a, b]).collect();
    extra.sort_unstable();
    extra.dedup();
    let train_config = TrainConfig {
        epochs: 30,
        batch_size: 32,
        learning_rate: 0.05,
        negatives: 5,
        p_phi: 0.7,
        p_psi: 0.1,
        node_hidden: 32,
        seed: seed + 3,
        ..TrainConfig::default()
    };
    let trained = train(&seeds, &node, &source, &extra, &train_config).map_err(|e| e.to_string())?;
    let ranked =
        rank_pairs(&trained.params, &features, &node, &vocab, seed + 4).map_err(|e| e.to_string())?;
    let metrics = evaluate(&ranked, &out.labels, &[100, 1000], seed + 5).map_err(|e| e.to_string())?;
    Ok(BenchmarkScores {
        p100: metrics.precision_at_k[&100],
        p1000: metrics.precision_at_k[&1000],
    })
}

fn benchmark_baseline(
    out: &taxonet_core::synth::SynthOutput,
    seed: u64,
) -> Result<BenchmarkScores, String> {
    let vocab = target_vocabulary(&out.graph, "keyword").map_err(|e| e.to_string())?;
    let seeds = extract_seed_pairs(&out.corpus, &vocab, &Pattern::all());
    let mut entries: Vec<RankedPair> = out
        .labels
        .iter()
        .map(|(h, c, _)| {
            let hit = seeds.contains(
                vocab.id_of(h).expect("label term"),
                vocab.id_of(c).expect("label term"),
            );
            RankedPair {
                hypernym: h.to_string(),
                hyponym: c.to_string(),
                score: if hit { 1.0 } else { 0.0 },
            }
        })
        .collect();
    entries.sort_by(|l, r| r.score.total_cmp(&l.score));
    let ranked = RankedPairList::from_sorted(entries).map_err(|e| e.to_string())?;
    let metrics = evaluate(&ranked, &out.labels, &[100, 1000], seed + 5).map_err(|e| e.to_string())?;
    Ok(BenchmarkScores {
        p100: metrics.precision_at_k[&100],
        p1000: metrics.precision_at_k[&1000],
    })
}

#[test]
fn criterion_5_multi_granularity_benefit() {
    report(5, "multi granularity benefit", (|| {
        let start = Instant::now();
        let multi_specs = [
            ContextSpec::Simplest,
            ContextSpec::GroupBy("author".into()),
            ContextSpec::Cluster(8),
        ];
        let single_specs = [ContextSpec::Simplest];
        let mut multi_p100 = Vec::new();
        let mut single_p100 = Vec::new();
        let mut multi_p1000 = Vec::new();
        let mut single_p1000 = Vec::new();
        let mut base_p1000 = Vec::new();
        for run in 0..10u64 {
            let seed = 500 + run * 100;
            let config = SynthConfig {
                depth: 3,
                branching: 4,
                terms_per_concept: 1,
                documents: 200,
                p_anc: 0.3,
                docs_per_group: 8,
                hearst_fraction: 0.4,
                seed,
            };
            let out = generate_synthetic_hin(&config).map_err(|e| e.to_string())?;
            let multi = benchmark_model(&out, &multi_specs, seed)?;
            let single = benchmark_model(&out, &single_specs, seed)?;
            let base = benchmark_baseline(&out, seed)?;
            multi_p100.push(multi.p100);
            single_p100.push(single.p100);
            multi_p1000.push(multi.p1000);
            single_p1000.push(single.p1000);
            base_p1000.push(base.p1000);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (m100, s100) = (mean(&multi_p100), mean(&single_p100));
        let (m1000, s1000, b1000) = (mean(&multi_p1000), mean(&single_p1000), mean(&base_p1000));
        let detail = format!(
            "multi P@100 {multi_p100:.3?} (mean {m100:.3}), single P@100 {single_p100:.3?} \
             (mean {s100:.3}), multi P@1000 mean {m1000:.3}, single P@1000 mean {s1000:.3}, \
             baseline P@1000 mean {b1000:.3}"
        );
        println!("  benchmark detail: {detail}");
        ensure(m100 >= s100 + 0.10, || {
            format!("multi-context P@100 advantage below 0.10: {detail}")
        })?;
        ensure(m1000 > b1000, || {
            format!("multi-context P@1000 does not beat the pattern baseline: {detail}")
        })?;
        ensure(s1000 > b1000, || {
            format!("single-context P@1000 does not beat the pattern baseline: {detail}")
        })?;
        within_budget(start, Duration::from_secs(600), "10-seed benchmark")
    })());
}

fn fixture_vocab(surfaces: &[&str]) -> (HinGraph, taxonet_core::graph::Vocabulary) {
    let schema = HinSchema {
        node_types: vec!["keyword".into()],
        edge_types: vec![],
    };
    let nodes = surfaces
        .iter()
        .enumerate()
        .map(|(i, s)| Node {
            id: format!("k{i}"),
            node_type: "keyword".into(),
            text_key: Some((*s).into()),
        })
        .collect();
    let graph = HinGraph::new(schema, nodes, vec![]).expect("fixture graph");
    let vocab = target_vocabulary(&graph, "keyword").expect("fixture vocab");
    (graph, vocab)
}

#[test]
fn criterion_6_pattern_extraction_exactness() {
    report(6, "pattern extraction exactness", (|| {
        let (_graph, vocab) = fixture_vocab(&[
            "animal",
            "panda",
            "red panda",
            "mammal",
            "bird",
            "sparrow",
            "machine learning",
            "deep learning",
            "neural network",
            "network",
            "algorithm",
            "data structure",
            "tree",
            "graph",
            "heap",
            "virus",
            "disease",
        ]);
        let sentences: [&str; 30] = [
            "we study animals such as pandas and sparrows",
            "mammals , such as red pandas",
            "such algorithms as heaps , trees , graphs",
            "such machine learning as deep learning",
            "such fast algorithms as heaps",
            "pandas or other mammals live here",
            "red pandas , sparrows and other animals are protected",
            "birds or other dinosaurs",
            "diseases including viruses",
            "mammals , including red pandas and pandas",
            "birds , especially sparrows",
            "animals such as pandas , crocodiles , sparrows",
            "pandas such as pandas",
            "Animals such as Pandas",
            "animals such as , pandas",
            "such as pandas",
            "neural networks such as graphs",
            "algorithms including neural networks",
            "animals such as pandas and birds such as sparrows",
            "pandas or sparrows",
            "pandas and sparrows",
            "animals including crocodiles and pandas",
            "many mammals , especially red pandas",
            "such trees as heaps or graphs",
            "diseases especially viruses",
            "pandas , , and other animals",
            "graphs or other data structures",
            "networks such as trees",
            "he compared heaps and other data structures yesterday",
            "algorithms , such as machine learning and deep learning",
        ];
        let documents = sentences
            .chunks(10)
            .enumerate()
            .map(|(i, chunk)| Document {
                node_id: format!("d{i}"),
                sentences: chunk
                    .iter()
                    .map(|s| s.split(' ').map(String::from).collect())
                    .collect(),
            })
            .collect();
        let corpus = Corpus { documents };
        let got = extract_seed_pairs(&corpus, &vocab, &Pattern::all());
        let expected: &[(&str, &str, u32)] = &[
            ("animal", "panda", 6),
            ("animal", "red panda", 1),
            ("animal", "sparrow", 2),
            ("algorithm", "deep learning", 1),
            ("algorithm", "graph", 1),
            ("algorithm", "heap", 1),
            ("algorithm", "machine learning", 1),
            ("algorithm", "neural network", 1),
            ("algorithm", "tree", 1),
            ("bird", "sparrow", 2),
            ("data structure", "graph", 1),
            ("disease", "virus", 2),
            ("machine learning", "deep learning", 1),
            ("mammal", "panda", 2),
            ("mammal", "red panda", 3),
            ("network", "tree", 1),
            ("neural network", "graph", 1),
            ("tree", "graph", 1),
            ("tree", "heap", 1),
        ];
        let mut counts = std::collections::BTreeMap::new();
        for &(h, c, n) in expected {
            counts.insert(
                (vocab.id_of(h).expect("fixture term"), vocab.id_of(c).expect("fixture term")),
                n,
            );
        }
        let want = SeedPairSet::from_counts(counts);
        if got != want {
            let show = |set: &SeedPairSet| -> Vec<(String, String, u32)> {
                set.pairs()
                    .iter()
                    .map(|p| {
                        (
                            vocab.surface(p.hypernym).to_string(),
                            vocab.surface(p.hyponym).to_string(),
                            p.count,
                        )
                    })
                    .collect()
            };
            return Err(format!(
                "extraction mismatch:\n got: {:?}\nwant: {:?}",
                show(&got),
                show(&want)
            ));
        }
        ensure(got.len() == 19, || format!("expected 19 pairs, got {}", got.len()))
    })());
}

#[test]
fn criterion_7_taxonomy_validity() {
    report(7, "taxonomy validity", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(700);
        for fixture in 0..200u64 {
            let terms = 30;
            let mut seen = BTreeSet::new();
            let mut entries = Vec::new();
            for _ in 0..150 {
                let a = rng.random_range(0..terms);
                let b = rng.random_range(0..terms);
                if a != b && seen.insert((a, b)) {
                    entries.push((a, b, rng.random::<f64>()));
                }
            }
            for _ in 0..3 {
                let mut cycle: Vec<usize> = (0..terms).collect();
                cycle.shuffle(&mut rng);
                let len = rng.random_range(2..=4usize);
                for i in 0..len {
                    let a = cycle[i];
                    let b = cycle[(i + 1) % len];
                    if a != b && seen.insert((a, b)) {
                        entries.push((a, b, rng.random::<f64>()));
                    }
                }
            }
            entries.sort_by(|l, r| r.2.total_cmp(&l.2));
            let ranked = RankedPairList::from_sorted(
                entries
                    .iter()
                    .map(|&(a, b, s)| RankedPair {
                        hypernym: format!("t{a:02}"),
                        hyponym: format!("t{b:02}"),
                        score: s,
                    })
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            let dag = build_taxonomy(
                &ranked,
                DEFAULT_TOP_TERMS,
                DEFAULT_TOP_EDGES,
                RemovalPolicy::Uniform,
                fixture,
            )
            .map_err(|e| e.to_string())?;
            ensure(dag.is_acyclic(), || format!("fixture {fixture}: cyclic output"))?;
            let again = build_taxonomy(
                &ranked,
                DEFAULT_TOP_TERMS,
                DEFAULT_TOP_EDGES,
                RemovalPolicy::Uniform,
                fixture,
            )
            .map_err(|e| e.to_string())?;
            ensure(dag.removed_edges == again.removed_edges, || {
                format!("fixture {fixture}: removed-edge log not reproducible")
            })?;
            let input: BTreeSet<(&str, &str)> = ranked
                .entries()
                .iter()
                .map(|e| (e.hypernym.as_str(), e.hyponym.as_str()))
                .collect();
            for e in dag.edges.iter().chain(dag.removed_edges.iter()) {
                ensure(input.contains(&(e.hypernym.as_str(), e.hyponym.as_str())), || {
                    format!("fixture {fixture}: edge not from the input list")
                })?;
            }
        }

        // Default caps bind on an oversized input.
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        let terms = 550;
        while entries.len() < 7000 {
            let a = rng.random_range(0..terms);
            let b = rng.random_range(0..terms);
            if a != b && seen.insert((a, b)) {
                entries.push((a, b, rng.random::<f64>()));
            }
        }
        entries.sort_by(|l, r| r.2.total_cmp(&l.2));
        let ranked = RankedPairList::from_sorted(
            entries
                .iter()
                .map(|&(a, b, s)| RankedPair {
                    hypernym: format!("t{a:03}"),
                    hyponym: format!("t{b:03}"),
                    score: s,
                })
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let dag = build_taxonomy(
            &ranked,
            DEFAULT_TOP_TERMS,
            DEFAULT_TOP_EDGES,
            RemovalPolicy::Uniform,
            7,
        )
        .map_err(|e| e.to_string())?;
        ensure(dag.is_acyclic(), || "oversized fixture: cyclic output".into())?;
        let participants: BTreeSet<&str> = dag
            .edges
            .iter()
            .chain(dag.removed_edges.iter())
            .flat_map(|e| [e.hypernym.as_str(), e.hyponym.as_str()])
            .collect();
        ensure(participants.len() <= DEFAULT_TOP_TERMS, || {
            format!(
                "top_terms not honored: {} terms participate, cap {}",
                participants.len(),
                DEFAULT_TOP_TERMS
            )
        })?;
        ensure(
            dag.edges.len() + dag.removed_edges.len() == DEFAULT_TOP_EDGES,
            || {
                format!(
                    "top_edges not honored: {} retained + {} removed != {}",
                    dag.edges.len(),
                    dag.removed_edges.len(),
                    DEFAULT_TOP_EDGES
                )
            },
        )
    })());
}

#[test]
fn criterion_8_end_to_end_determinism() {
    report(8, "end-to-end determinism", (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let base = dir.path();
        let synth = SynthConfig {
            depth: 2,
            branching: 3,
            terms_per_concept: 1,
            documents: 60,
            p_anc: 0.3,
            docs_per_group: 4,
            hearst_fraction: 0.6,
            seed: 800,
        };
        let config_toml = r#"
seed = 801

[contexts]
specs = ["simplest", "groupby:author", "cluster:4"]

[embedding]
dim = 8
walks_per_node = 2
walk_length = 8
epochs = 1

[train]
epochs = 5
node_hidden = 8
negatives = 3

[evaluate]
ks = [10]

[taxonomy]
top_terms = 50
top_edges = 200
"#;
        for side in ["a", "b"] {
            let side_dir = base.join(side);
            emit_synthetic_hin(&synth, &side_dir.join("data")).map_err(|e| e.to_string())?;
            std::fs::write(side_dir.join("config.toml"), config_toml).map_err(|e| e.to_string())?;
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_taxonet"))
                .args(["run", "--config"])
                .arg(side_dir.join("config.toml"))
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("pipeline run failed on side {side}"))?;
        }
        for artifact in [
            "ranked.tsv",
            "metrics.json",
            "taxonomy.json",
            "taxonomy.dot",
            "removed_edges.tsv",
        ] {
            let a = std::fs::read(base.join("a/out").join(artifact)).map_err(|e| e.to_string())?;
            let b = std::fs::read(base.join("b/out").join(artifact)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{artifact} differs between identical runs"))?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_9_feature_grid_shape() {
    report(9, "feature grid shape", (|| {
        let contexts: Vec<ContextIndex> = (0..6)
            .map(|i| {
                ContextIndex::new(
                    format!("c{i}"),
                    vec!["u0".into(), "u1".into(), "u2".into()],
                    vec![vec![0, 1], vec![1, 2], vec![0]],
                )
                .expect("fixture context")
            })
            .collect();
        let pairs = [(TermId(0), TermId(1)), (TermId(2), TermId(0))];
        let features =
            compute_pairwise_features(&pairs, &contexts, &Measure::all(), Default::default())
                .map_err(|e| e.to_string())?;
        ensure(features.layout().len() == 24, || {
            format!("layout width {} != 24", features.layout().len())
        })?;
        for i in 0..features.len() {
            ensure(features.row(i).len() == 24, || {
                format!("row {i} has {} components", features.row(i).len())
            })?;
        }
        let columns = features.layout().columns();
        for (i, (ctx, measure)) in columns.iter().enumerate() {
            let want_ctx = format!("c{}", i / 4);
            let want_measure = Measure::all()[i % 4];
            ensure(ctx == &want_ctx && *measure == want_measure, || {
                format!("column {i} is ({ctx}, {measure:?}), want ({want_ctx}, {want_measure:?})")
            })?;
        }
        Ok(())
    })());
}
