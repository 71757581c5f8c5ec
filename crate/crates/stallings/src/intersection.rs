//! Subgroup intersection via the pullback of two foldings, and evaluation of
//! the classical rank bounds on intersections: the Hanna Neumann conjecture
//! bound, H. Neumann's factor-2 bound, Burns' improvement, and Tardos' 1996
//! bound.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{find_sources_sinks, is_positively_generated, substitute_generators};
use crate::folding::{Folding, SubgroupPresentation};
use crate::graph::{LabeledDigraph, VertexId};
use crate::words::{Alphabet, SignedLetter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntersectionError {
    #[error("alphabet mismatch: rank {left} vs rank {right}")]
    AlphabetMismatch { left: u8, right: u8 },
}

/// Product folding of H and K restricted to the component of the paired
/// bases: the folding of the intersection subgroup.
///
/// The vertex set is built lazily by joint traversal from (1_H, 1_K); an
/// edge ((u,v) -x-> (u',v')) exists when both factors carry an x-edge, and
/// the result is trimmed to its core and canonically renumbered.
pub fn pullback(f: &Folding, k: &Folding) -> Result<Folding, IntersectionError> {
    if f.alphabet() != k.alphabet() {
        return Err(IntersectionError::AlphabetMismatch {
            left: f.alphabet().rank(),
            right: k.alphabet().rank(),
        });
    }
    let alphabet = f.alphabet();
    let fg = f.graph();
    let kg = k.graph();

    let mut product = LabeledDigraph::new(alphabet);
    let mut index: BTreeMap<(VertexId, VertexId), VertexId> = BTreeMap::new();
    let base_pair = (f.base(), k.base());
    let base = product.add_vertex();
    index.insert(base_pair, base);
    let mut queue = VecDeque::from([base_pair]);
    let mut seen_edges: BTreeSet<(crate::graph::EdgeId, crate::graph::EdgeId)> = BTreeSet::new();

    while let Some((u, v)) = queue.pop_front() {
        let here = index[&(u, v)];
        for label in alphabet.letters() {
            if let (Some(ef), Some(ek)) =
                (fg.out_edge_with_label(u, label), kg.out_edge_with_label(v, label))
            {
                let target = (fg.edge(ef).unwrap().head, kg.edge(ek).unwrap().head);
                let tv = match index.get(&target) {
                    Some(&tv) => tv,
                    None => {
                        let tv = product.add_vertex();
                        index.insert(target, tv);
                        queue.push_back(target);
                        tv
                    }
                };
                if seen_edges.insert((ef, ek)) {
                    product.add_edge(here, tv, label).expect("vertices present");
                }
            }
            if let (Some(ef), Some(ek)) =
                (fg.in_edge_with_label(u, label), kg.in_edge_with_label(v, label))
            {
                let source = (fg.edge(ef).unwrap().tail, kg.edge(ek).unwrap().tail);
                let sv = match index.get(&source) {
                    Some(&sv) => sv,
                    None => {
                        let sv = product.add_vertex();
                        index.insert(source, sv);
                        queue.push_back(source);
                        sv
                    }
                };
                if seen_edges.insert((ef, ek)) {
                    product.add_edge(sv, here, label).expect("vertices present");
                }
            }
        }
    }

    crate::folding::trim_to_core(&mut product, base);
    let folding = Folding::new(product, base).expect("pullback satisfies the folding invariants");
    Ok(folding.canonicalized())
}

/// Ranks, reduced ranks, bound values and verdicts for a pair of subgroups
/// and their intersection, plus the structural flags of each factor.
///
/// Reduced rank is max(rank - 1, 0). Every bound value is clamped at 0 so
/// rank-0/1 factors make all inequalities trivially true, and each verdict
/// states `reduced_rank_meet <= bound`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HncReport {
    pub rank_h: usize,
    pub rank_k: usize,
    pub rank_meet: usize,
    pub reduced_rank_h: usize,
    pub reduced_rank_k: usize,
    pub reduced_rank_meet: usize,
    pub bound_hn_conjecture: i64,
    pub bound_hneumann: i64,
    pub bound_burns: i64,
    pub bound_tardos96: i64,
    pub verdict_hn_conjecture: bool,
    pub verdict_hneumann: bool,
    pub verdict_burns: bool,
    pub verdict_tardos96: bool,
    pub h_positively_generated: bool,
    pub k_positively_generated: bool,
    pub h_source_sink_free: bool,
    pub k_source_sink_free: bool,
    /// Majority degree-3 class of each factor, when the alphabet has rank 2
    /// and such a class exists.
    pub majority_type_h: Option<u8>,
    pub majority_type_k: Option<u8>,
}

impl HncReport {
    /// All four verdicts hold.
    pub fn all_verdicts_hold(&self) -> bool {
        self.verdict_hn_conjecture
            && self.verdict_hneumann
            && self.verdict_burns
            && self.verdict_tardos96
    }

    /// The three proved bounds hold (everything except the conjecture).
    pub fn proved_bounds_hold(&self) -> bool {
        self.verdict_hneumann && self.verdict_burns && self.verdict_tardos96
    }
}

fn reduced_rank(rank: usize) -> usize {
    rank.saturating_sub(1)
}

/// Fold both presentations, intersect them, and evaluate every bound.
pub fn hnc_check(
    ph: &SubgroupPresentation,
    pk: &SubgroupPresentation,
) -> Result<HncReport, IntersectionError> {
    if ph.alphabet() != pk.alphabet() {
        return Err(IntersectionError::AlphabetMismatch {
            left: ph.alphabet().rank(),
            right: pk.alphabet().rank(),
        });
    }
    let fh = ph.folding();
    let fk = pk.folding();
    let meet = pullback(&fh, &fk)?;

    let rank_h = fh.rank();
    let rank_k = fk.rank();
    let rank_meet = meet.rank();
    let rh = reduced_rank(rank_h) as i64;
    let rk = reduced_rank(rank_k) as i64;
    let rm = reduced_rank(rank_meet) as i64;

    let bound_hn_conjecture = (rh * rk).max(0);
    let bound_hneumann = (2 * rh * rk).max(0);
    let bound_burns = (2 * rh * rk - rh.min(rk)).max(0);
    let bound_tardos96 = (2 * rh * rk - rh - rk + 1).max(0);

    Ok(HncReport {
        rank_h,
        rank_k,
        rank_meet,
        reduced_rank_h: rh as usize,
        reduced_rank_k: rk as usize,
        reduced_rank_meet: rm as usize,
        bound_hn_conjecture,
        bound_hneumann,
        bound_burns,
        bound_tardos96,
        verdict_hn_conjecture: rm <= bound_hn_conjecture,
        verdict_hneumann: rm <= bound_hneumann,
        verdict_burns: rm <= bound_burns,
        verdict_tardos96: rm <= bound_tardos96,
        h_positively_generated: is_positively_generated(&fh),
        k_positively_generated: is_positively_generated(&fk),
        h_source_sink_free: find_sources_sinks(&fh).is_empty(),
        k_source_sink_free: find_sources_sinks(&fk).is_empty(),
        majority_type_h: fh.neumann_majority_type().ok().flatten(),
        majority_type_k: fk.neumann_majority_type().ok().flatten(),
    })
}

/// Rewrite a presentation over F_n into F_2 through the positive embedding
/// x_i -> a^i b a^i, which preserves rank and sends positive words to
/// positive words.
pub fn embed_to_rank2(p: &SubgroupPresentation) -> SubgroupPresentation {
    let f2 = Alphabet::new(2).expect("rank 2 is valid");
    let images: Vec<Word> = (1..=p.alphabet().rank())
        .map(|i| {
            let mut letters = Vec::with_capacity(2 * i as usize + 1);
            letters.extend(std::iter::repeat_n(SignedLetter::positive(1), i as usize));
            letters.push(SignedLetter::positive(2));
            letters.extend(std::iter::repeat_n(SignedLetter::positive(1), i as usize));
            Word::reduce(f2, letters).expect("letters lie in F_2")
        })
        .collect();
    substitute_generators(p, &images).expect("uniform image alphabet")
}
