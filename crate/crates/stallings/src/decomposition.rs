//! Constructive structure theory of foldings: source/sink detection,
//! existence of directed trail decompositions, positive generating sets and
//! positive bases, and substitution of letter images across a presentation.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::folding::{Folding, SubgroupPresentation};
use crate::graph::{
    is_strongly_connected, scc, shortest_trail, strong_trail_decomposition, Trail,
    TrailDecomposition, VertexId,
};
use crate::words::{SignedLetter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("the trivial folding has no edges to decompose")]
    TrivialFolding,
    #[error("expected {expected} letter images, got {got}")]
    ImageCountMismatch { expected: usize, got: usize },
    #[error("letter images use mismatched alphabets")]
    ImageAlphabetMismatch,
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// The source and sink vertices of a folding.
///
/// A source is a vertex whose incident edges are all outgoing, a sink one
/// whose incident edges are all incoming; isolated vertices are neither, and
/// a vertex carrying a loop never qualifies. On a rank-2 core folding every
/// non-base source or sink has undirected degree exactly 2; only a degree-1
/// base can qualify with a single edge.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SourceSinkReport {
    pub sources: BTreeSet<VertexId>,
    pub sinks: BTreeSet<VertexId>,
}

impl SourceSinkReport {
    /// Empty report: the folding is source/sink-free.
    pub fn is_empty(&self) -> bool {
        self.sources.is_empty() && self.sinks.is_empty()
    }
}

/// Find every source and sink vertex of the folding.
pub fn find_sources_sinks(f: &Folding) -> SourceSinkReport {
    let g = f.graph();
    let mut report = SourceSinkReport::default();
    for v in g.vertex_ids() {
        let ins = g.in_degree(v);
        let outs = g.out_degree(v);
        if ins == 0 && outs > 0 {
            report.sources.insert(v);
        }
        if outs == 0 && ins > 0 {
            report.sinks.insert(v);
        }
    }
    report
}

/// Result of asking for a directed trail decomposition of a folding.
#[derive(Clone, PartialEq, Debug)]
pub enum TrailDecompositionOutcome {
    Decomposition(TrailDecomposition),
    /// No decomposition exists; the report shows the blocking vertices.
    NoDecomposition(SourceSinkReport),
}

/// Construct a directed trail decomposition of a non-trivial folding, or
/// report why none exists.
///
/// A decomposition exists exactly when the folding is source/sink-free. The
/// construction seeds the covered region with strong decompositions of every
/// strongly connected component that carries edges (components of several
/// vertices, plus single vertices with loops), then repeatedly attaches the
/// remaining edges: from an uncovered edge, walk backwards along incoming
/// edges and forwards along outgoing edges until the covered region is hit
/// on both ends, always preferring the lowest edge id.
pub fn trail_decomposition(
    f: &Folding,
) -> Result<TrailDecompositionOutcome, DecompositionError> {
    let g = f.graph();
    if g.edge_count() == 0 {
        return Err(DecompositionError::TrivialFolding);
    }
    let report = find_sources_sinks(f);
    if !report.is_empty() {
        return Ok(TrailDecompositionOutcome::NoDecomposition(report));
    }

    let parts = scc(g);
    let qualifies = |i: usize| {
        let class = &parts.classes()[i];
        class.len() > 1
            || class
                .iter()
                .any(|&v| g.out_edges(v).any(|e| g.edge(e).unwrap().head == v))
    };
    let mut class_order: Vec<usize> = (0..parts.class_count()).filter(|&i| qualifies(i)).collect();
    if class_order.is_empty() {
        return Err(DecompositionError::Internal(
            "a source/sink-free graph with edges must contain a directed cycle".into(),
        ));
    }
    // The component holding the folding base comes first when it qualifies,
    // so the decomposition closes at the subgroup base whenever possible.
    if let Some(base_class) = parts.class_of(f.base()) {
        if let Some(pos) = class_order.iter().position(|&i| i == base_class) {
            class_order.remove(pos);
            class_order.insert(0, base_class);
        }
    }

    let mut trails: Vec<Trail> = Vec::new();
    let mut covered_v: BTreeSet<VertexId> = BTreeSet::new();
    let mut covered_e = BTreeSet::new();
    let mut decomposition_base: Option<VertexId> = None;

    for ci in class_order {
        let sub = parts.induced(g, ci);
        let local_base = if parts.class_of(f.base()) == Some(ci) {
            f.base()
        } else {
            *parts.classes()[ci].iter().next().unwrap()
        };
        let d = strong_trail_decomposition(&sub, local_base)
            .map_err(|e| DecompositionError::Internal(e.to_string()))?;
        if decomposition_base.is_none() && !d.trails().is_empty() {
            decomposition_base = Some(d.base());
        }
        for trail in d.trails() {
            covered_v.extend(trail.vertices(g));
            covered_e.extend(trail.edges().iter().copied());
            trails.push(trail.clone());
        }
    }

    // Attach the edges outside the strongly connected components.
    loop {
        let e = match g.edge_ids().find(|e| !covered_e.contains(e)) {
            Some(e) => e,
            None => break,
        };
        let edge = *g.edge(e).unwrap();

        let mut backward: Vec<crate::graph::EdgeId> = Vec::new();
        let mut cur = edge.tail;
        let mut guard = BTreeSet::new();
        while !covered_v.contains(&cur) {
            if !guard.insert(cur) {
                return Err(DecompositionError::Internal(
                    "backward walk trapped in an uncovered cycle".into(),
                ));
            }
            let step = g.in_edges(cur).next().ok_or_else(|| {
                DecompositionError::Internal("backward walk stuck at an uncovered vertex".into())
            })?;
            backward.push(step);
            cur = g.edge(step).unwrap().tail;
        }

        let mut forward: Vec<crate::graph::EdgeId> = Vec::new();
        let mut cur = edge.head;
        let mut guard = BTreeSet::new();
        while !covered_v.contains(&cur) {
            if !guard.insert(cur) {
                return Err(DecompositionError::Internal(
                    "forward walk trapped in an uncovered cycle".into(),
                ));
            }
            let step = g.out_edges(cur).next().ok_or_else(|| {
                DecompositionError::Internal("forward walk stuck at an uncovered vertex".into())
            })?;
            forward.push(step);
            cur = g.edge(step).unwrap().head;
        }

        backward.reverse();
        let mut edges = backward;
        edges.push(e);
        edges.extend(forward);
        let trail = Trail::new(g, edges)
            .map_err(|err| DecompositionError::Internal(err.to_string()))?;
        covered_v.extend(trail.vertices(g));
        covered_e.extend(trail.edges().iter().copied());
        trails.push(trail);
    }

    let base = decomposition_base
        .ok_or_else(|| DecompositionError::Internal("no closed trail seeded the decomposition".into()))?;
    Ok(TrailDecompositionOutcome::Decomposition(TrailDecomposition::new(base, trails)))
}

/// Result of asking for a positive basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PositiveBasisOutcome {
    /// A free basis of positive words, one per trail of a strong
    /// decomposition; its size equals the rank.
    Basis(BTreeSet<Word>),
    /// The folding is not strongly connected, so no positive generating set
    /// exists.
    NotStronglyConnected,
}

/// Compute a positive free basis of a strongly connected folding.
///
/// The basis reads one word per trail of a strong trail decomposition: the
/// closed first trail directly, and every later trail bracketed by shortest
/// directed trails from the base to its start and from its terminus back to
/// the base inside the union of the earlier trails (which is strongly
/// connected). All trails run forwards, so every word is positive.
pub fn positive_basis(f: &Folding) -> PositiveBasisOutcome {
    let g = f.graph();
    if !is_strongly_connected(g) {
        return PositiveBasisOutcome::NotStronglyConnected;
    }
    if g.edge_count() == 0 {
        return PositiveBasisOutcome::Basis(BTreeSet::new());
    }
    let d = strong_trail_decomposition(g, f.base()).expect("strongly connected");
    let trail_letters = |edges: &[crate::graph::EdgeId]| -> Vec<SignedLetter> {
        edges
            .iter()
            .map(|&e| SignedLetter::positive(g.edge(e).unwrap().label))
            .collect()
    };

    let mut basis = BTreeSet::new();
    basis.insert(
        Word::reduce(f.alphabet(), trail_letters(d.trails()[0].edges()))
            .expect("labels lie in the alphabet"),
    );
    for i in 1..d.trails().len() {
        let prefix = d.prefix_union(g, i - 1).expect("index in range");
        let trail = &d.trails()[i];
        let lead_in = shortest_trail(&prefix, f.base(), trail.start(g))
            .expect("prefix unions are strongly connected");
        let lead_out = shortest_trail(&prefix, trail.end(g), f.base())
            .expect("prefix unions are strongly connected");
        let mut letters = trail_letters(&lead_in);
        letters.extend(trail_letters(trail.edges()));
        letters.extend(trail_letters(&lead_out));
        basis.insert(Word::reduce(f.alphabet(), letters).expect("labels lie in the alphabet"));
    }
    PositiveBasisOutcome::Basis(basis)
}

/// A subgroup has a positive generating set exactly when its folding is
/// strongly connected; and then it even has a positive basis.
pub fn is_positively_generated(f: &Folding) -> bool {
    is_strongly_connected(f.graph())
}

/// Rewrite every generator by substituting `images[i]` for letter i+1
/// (inverse letters substitute the inverted image) and freely reducing.
///
/// The images are not checked to define an automorphism; this applies any
/// letter substitution, which is what testing a caller-supplied
/// automorphism needs.
pub fn apply_automorphism(
    p: &SubgroupPresentation,
    images: &[Word],
) -> Result<SubgroupPresentation, DecompositionError> {
    let rank = p.alphabet().rank() as usize;
    if images.len() != rank {
        return Err(DecompositionError::ImageCountMismatch { expected: rank, got: images.len() });
    }
    substitute_generators(p, images).map_err(|_| DecompositionError::ImageAlphabetMismatch)
}

/// Shared substitution engine: rewrite generators letter by letter through
/// `images`, over the images' (possibly different) alphabet.
pub(crate) fn substitute_generators(
    p: &SubgroupPresentation,
    images: &[Word],
) -> Result<SubgroupPresentation, WordError> {
    let target = images
        .first()
        .map(|w| w.alphabet())
        .unwrap_or_else(|| p.alphabet());
    for im in images {
        if im.alphabet() != target {
            return Err(WordError::AlphabetMismatch {
                left: target.rank(),
                right: im.alphabet().rank(),
            });
        }
    }
    let mut rewritten = Vec::with_capacity(p.generators().len());
    for gen in p.generators() {
        let mut letters = Vec::new();
        for l in gen.letters() {
            let image = &images[l.index() as usize - 1];
            if l.is_positive() {
                letters.extend(image.letters().iter().copied());
            } else {
                letters.extend(image.invert().letters().iter().copied());
            }
        }
        rewritten.push(Word::reduce(target, letters)?);
    }
    SubgroupPresentation::new(target, rewritten)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::verify_decomposition;
    use crate::words::Alphabet;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn presentation(words: &[&str]) -> SubgroupPresentation {
        let gens = words.iter().map(|w| Word::parse(f2(), w).unwrap()).collect();
        SubgroupPresentation::new(f2(), gens).unwrap()
    }

    fn word(text: &str) -> Word {
        Word::parse(f2(), text).unwrap()
    }

    #[test]
    fn sources_and_sinks_of_ab_inverse() {
        // <aB>: both edges leave the base and both enter the other vertex.
        let f = presentation(&["aB"]).folding();
        let report = find_sources_sinks(&f);
        assert_eq!(report.sources, BTreeSet::from([f.base()]));
        assert_eq!(report.sinks.len(), 1);
        assert!(!report.sinks.contains(&f.base()));
    }

    #[test]
    fn free_group_folding_is_source_sink_free() {
        let f = presentation(&["a", "b"]).folding();
        assert!(find_sources_sinks(&f).is_empty());
    }

    #[test]
    fn conjugate_pair_folding_is_source_sink_free() {
        let f = presentation(&["a", "baB"]).folding();
        assert!(find_sources_sinks(&f).is_empty());
    }

    #[test]
    fn base_spike_blocks_decomposition() {
        // <abA> folds to a two-vertex graph whose base has one outgoing
        // a-edge and nothing incoming: no decomposition can cover it.
        let f = presentation(&["abA"]).folding();
        let report = find_sources_sinks(&f);
        assert_eq!(report.sources, BTreeSet::from([f.base()]));
        match trail_decomposition(&f).unwrap() {
            TrailDecompositionOutcome::NoDecomposition(r) => assert_eq!(r, report),
            TrailDecompositionOutcome::Decomposition(_) => panic!("no decomposition exists"),
        }
    }

    #[test]
    fn decomposition_of_free_group_folding() {
        let f = presentation(&["a", "b"]).folding();
        match trail_decomposition(&f).unwrap() {
            TrailDecompositionOutcome::Decomposition(d) => {
                assert!(verify_decomposition(f.graph(), &d, false));
            }
            _ => panic!("expected a decomposition"),
        }
    }

    #[test]
    fn no_decomposition_for_source_vertex() {
        let f = presentation(&["aB"]).folding();
        match trail_decomposition(&f).unwrap() {
            TrailDecompositionOutcome::NoDecomposition(r) => assert!(!r.is_empty()),
            _ => panic!("expected no decomposition"),
        }
    }

    #[test]
    fn decomposition_for_conjugate_pair() {
        let f = presentation(&["a", "baB"]).folding();
        match trail_decomposition(&f).unwrap() {
            TrailDecompositionOutcome::Decomposition(d) => {
                assert!(verify_decomposition(f.graph(), &d, false));
                // not strongly connected, so the decomposition cannot be strong
                assert!(!verify_decomposition(f.graph(), &d, true));
            }
            _ => panic!("expected a decomposition"),
        }
    }

    #[test]
    fn trivial_folding_is_an_error() {
        let f = Folding::trivial(f2());
        assert_eq!(trail_decomposition(&f), Err(DecompositionError::TrivialFolding));
    }

    #[test]
    fn positive_basis_of_free_group() {
        match positive_basis(&presentation(&["a", "b"]).folding()) {
            PositiveBasisOutcome::Basis(b) => {
                assert_eq!(b, BTreeSet::from([word("a"), word("b")]));
            }
            _ => panic!("expected a basis"),
        }
    }

    #[test]
    fn positive_basis_round_trip_ab_ba() {
        let f = presentation(&["ab", "ba"]).folding();
        match positive_basis(&f) {
            PositiveBasisOutcome::Basis(b) => {
                assert_eq!(b.len(), f.rank());
                assert!(b.iter().all(|w| w.is_positive()));
                let refolded = SubgroupPresentation::new(f2(), b.into_iter().collect())
                    .unwrap()
                    .folding();
                assert!(f.is_isomorphic_to(&refolded));
            }
            _ => panic!("expected a basis"),
        }
    }

    #[test]
    fn positive_basis_rejects_disconnected_folding() {
        let f = presentation(&["a", "baB"]).folding();
        assert_eq!(positive_basis(&f), PositiveBasisOutcome::NotStronglyConnected);
    }

    #[test]
    fn positivity_verdicts() {
        assert!(is_positively_generated(&presentation(&["ab", "ba"]).folding()));
        assert!(!is_positively_generated(&presentation(&["aB"]).folding()));
        assert!(is_positively_generated(&presentation(&["a", "b"]).folding()));
        // the trivial subgroup is positively generated by the empty set
        assert!(is_positively_generated(&Folding::trivial(f2())));
    }

    #[test]
    fn automorphism_identity() {
        let p = presentation(&["ab", "baB"]);
        let images = vec![word("a"), word("b")];
        assert_eq!(apply_automorphism(&p, &images).unwrap(), p);
    }

    #[test]
    fn automorphism_substitution() {
        // a -> a, b -> ab applied to {bA} gives (ab)(a⁻¹) = abA
        let p = presentation(&["bA"]);
        let images = vec![word("a"), word("ab")];
        let q = apply_automorphism(&p, &images).unwrap();
        assert_eq!(q.generators(), &[word("abA")]);
    }

    #[test]
    fn automorphism_swap() {
        let p = presentation(&["ab"]);
        let images = vec![word("b"), word("a")];
        let q = apply_automorphism(&p, &images).unwrap();
        assert_eq!(q.generators(), &[word("ba")]);
    }

    #[test]
    fn automorphism_image_count_checked() {
        let p = presentation(&["ab"]);
        assert_eq!(
            apply_automorphism(&p, &[word("a")]),
            Err(DecompositionError::ImageCountMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn automorphism_images_must_share_an_alphabet() {
        let f3 = Alphabet::new(3).unwrap();
        let p = presentation(&["ab"]);
        let images = vec![word("a"), Word::parse(f3, "c").unwrap()];
        assert_eq!(
            apply_automorphism(&p, &images),
            Err(DecompositionError::ImageAlphabetMismatch)
        );
    }
}
