//! Computing with finitely generated subgroups of free groups via Stallings
//! foldings.
//!
//! The library builds the folding of a subgroup from any finite generating
//! set and answers structural questions about it: membership, rank and free
//! bases, directed trail decompositions, strong connectivity and positive
//! generating sets, source/sink structure, degree-3 class balance,
//! intersections through the pullback construction, and the classical rank
//! bounds on intersections (the Hanna Neumann conjecture bound, H. Neumann's
//! factor-2 bound, Burns' bound, and Tardos' 1996 bound).
//!
//! The `stallings` binary exposes the same operations over a line-oriented
//! subgroup file format, plus a seeded randomized property harness.

pub mod decomposition;
pub mod experiment;
pub mod folding;
pub mod graph;
pub mod intersection;
pub mod words;

pub use decomposition::{
    apply_automorphism, find_sources_sinks, is_positively_generated, positive_basis,
    trail_decomposition, DecompositionError, PositiveBasisOutcome, SourceSinkReport,
    TrailDecompositionOutcome,
};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentError, ExperimentReport, WordDistribution,
};
pub use folding::{
    build_rose, fold, fold_seeded, DegreeProfile, Folding, FoldingError, ParseError,
    SubgroupPresentation,
};
pub use graph::{
    is_strongly_connected, make_self_avoiding, scc, shortest_trail, strong_trail_decomposition,
    verify_decomposition, Edge, EdgeId, GraphError, LabeledDigraph, SccPartition, Trail,
    TrailDecomposition, VertexId,
};
pub use intersection::{embed_to_rank2, hnc_check, pullback, HncReport, IntersectionError};
pub use words::{Alphabet, SignedLetter, Word, WordError, MAX_RANK};
