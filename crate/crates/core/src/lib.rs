//! Hypernymy discovery over text-rich heterogeneous information networks.
//!
//! The library turns a typed graph whose nodes carry text (papers, authors,
//! venues, keywords, ...) into a ranked list of hypernym candidate pairs and
//! finally a taxonomy DAG. The stages are:
//!
//! 1. [`graph`]: load the typed graph, its schema, and the attached corpus;
//!    derive the target-term vocabulary.
//! 2. [`seeds`]: extract weakly supervised (hypernym, hyponym) seed pairs
//!    from the corpus with lexical patterns.
//! 3. [`embedding`]: learn node vectors with edge-type-aware random walks
//!    and skip-gram, or import externally trained vectors.
//! 4. [`context`]: build contextual-unit indexes at several granularities
//!    (raw neighbors, grouped by node type, clustered by embedding).
//! 5. [`dih`]: score term pairs with distributional inclusion measures in
//!    every context granularity, producing a fixed feature layout.
//! 6. [`model`]: train a scoring model (diagonal bilinear term over
//!    transformed node vectors plus a two-layer pairwise term) with a
//!    contrastive hinge loss, then rank candidate pairs.
//! 7. [`eval`]: precision-at-k and reciprocal-rank metrics over labeled
//!    pairs with seeded tie-breaking.
//! 8. [`taxonomy`]: prune the ranked list and break cycles to obtain a DAG.
//! 9. [`synth`]: generate a synthetic benchmark network with a planted
//!    concept tree and ground-truth labels.
//! 10. [`pipeline`]: a staged, resumable runner that wires the above
//!     together behind a TOML config and a hash manifest.
//!
//! All randomized steps take explicit `u64` seeds and are bitwise
//! reproducible for a fixed seed, input, and thread-independent code path.

pub mod context;
pub mod dih;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod seeds;
pub mod synth;
pub mod taxonomy;

pub use error::{Error, Result};
