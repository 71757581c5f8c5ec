//! Stallings foldings of finitely generated subgroups of free groups.
//!
//! A folding is the rooted, deterministic, co-deterministic core graph of a
//! subgroup: the reduced words readable along closed walks at the base are
//! exactly the elements of the subgroup. Foldings are built by wedging one
//! labeled cycle per generator into a rose and repeatedly identifying
//! equal-label edge pairs that share a tail or a head.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, LabeledDigraph, VertexId};
use crate::words::{Alphabet, SignedLetter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldingError {
    #[error("presentation has no non-empty generators")]
    EmptyPresentation,
    #[error("degree-3 class counts are only defined over a rank-2 alphabet, got rank {rank}")]
    ClassCountUnavailable { rank: u8 },
    #[error("alphabet mismatch: rank {left} vs rank {right}")]
    AlphabetMismatch { left: u8, right: u8 },
    #[error("base vertex {0} is not in the graph")]
    MissingBase(VertexId),
    #[error("graph is not connected")]
    NotConnected,
    #[error("vertex {vertex} has two outgoing edges labeled {label}")]
    NotDeterministic { vertex: VertexId, label: u8 },
    #[error("vertex {vertex} has two incoming edges labeled {label}")]
    NotCoDeterministic { vertex: VertexId, label: u8 },
    #[error("non-base vertex {0} has undirected degree below 2")]
    NotCore(VertexId),
}

/// Parse failure in the line-oriented subgroup file format, with a 1-based
/// position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A finite generating set for a subgroup, all words over one alphabet.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubgroupPresentation {
    alphabet: Alphabet,
    generators: Vec<Word>,
}

impl SubgroupPresentation {
    pub fn new(alphabet: Alphabet, generators: Vec<Word>) -> Result<Self, WordError> {
        for g in &generators {
            if g.alphabet() != alphabet {
                return Err(WordError::AlphabetMismatch {
                    left: alphabet.rank(),
                    right: g.alphabet().rank(),
                });
            }
        }
        Ok(SubgroupPresentation { alphabet, generators })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    /// Generators with empty words dropped.
    pub fn nonempty_generators(&self) -> Vec<Word> {
        self.generators.iter().filter(|w| !w.is_empty()).cloned().collect()
    }

    /// Parse the subgroup file format: an `alphabet <rank>` header followed
    /// by one generator word per line, with `#` comments and blank lines
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut alphabet: Option<Alphabet> = None;
        let mut generators = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            if content.trim().is_empty() {
                continue;
            }
            let start_col = content.len() - content.trim_start().len() + 1;
            let token = content.trim();
            match alphabet {
                None => {
                    let mut parts = token.split_whitespace();
                    let keyword = parts.next().unwrap_or("");
                    let rank_text = parts.next();
                    if keyword != "alphabet" || rank_text.is_none() || parts.next().is_some() {
                        return Err(ParseError {
                            line: line_no,
                            column: start_col,
                            message: "expected 'alphabet <rank>' header".into(),
                        });
                    }
                    let rank: usize = rank_text.unwrap().parse().map_err(|_| ParseError {
                        line: line_no,
                        column: start_col,
                        message: format!("invalid rank '{}'", rank_text.unwrap()),
                    })?;
                    let a = Alphabet::new(rank).map_err(|e| ParseError {
                        line: line_no,
                        column: start_col,
                        message: e.to_string(),
                    })?;
                    alphabet = Some(a);
                }
                Some(a) => {
                    if token.split_whitespace().count() > 1 {
                        return Err(ParseError {
                            line: line_no,
                            column: start_col,
                            message: "expected a single word per line".into(),
                        });
                    }
                    let word = Word::parse(a, token).map_err(|e| {
                        let column = match e {
                            WordError::NotALetter { column, .. }
                            | WordError::LetterBeyondRank { column, .. } => start_col + column - 1,
                            _ => start_col,
                        };
                        ParseError { line: line_no, column, message: e.to_string() }
                    })?;
                    generators.push(word);
                }
            }
        }
        match alphabet {
            Some(a) => Ok(SubgroupPresentation { alphabet: a, generators }),
            None => Err(ParseError {
                line: 1,
                column: 1,
                message: "missing 'alphabet <rank>' header".into(),
            }),
        }
    }

    /// Fold this presentation into the Stallings folding of the subgroup it
    /// generates. Presentations whose generators all reduce to the empty
    /// word yield the trivial folding.
    pub fn folding(&self) -> Folding {
        if self.nonempty_generators().is_empty() {
            return Folding::trivial(self.alphabet);
        }
        let (rose, base) = build_rose(self).expect("non-empty generators");
        fold(rose, base)
    }
}

impl fmt::Display for SubgroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet {}", self.alphabet.rank())?;
        for g in &self.generators {
            if !g.is_empty() {
                writeln!(f, "{}", g)?;
            }
        }
        Ok(())
    }
}

/// Wedge of labeled cycles, one per non-empty generator, sharing the base
/// vertex. A positive letter contributes a forward edge along its cycle and
/// a negative letter a backward edge.
pub fn build_rose(p: &SubgroupPresentation) -> Result<(LabeledDigraph, VertexId), FoldingError> {
    let generators = p.nonempty_generators();
    if generators.is_empty() {
        return Err(FoldingError::EmptyPresentation);
    }
    let mut g = LabeledDigraph::new(p.alphabet());
    let base = g.add_vertex();
    for word in &generators {
        let letters = word.letters();
        let mut cur = base;
        for (i, letter) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { base } else { g.add_vertex() };
            if letter.is_positive() {
                g.add_edge(cur, next, letter.index()).expect("vertices just added");
            } else {
                g.add_edge(next, cur, letter.index()).expect("vertices just added");
            }
            cur = next;
        }
    }
    Ok((g, base))
}

/// Per-vertex degree counts of a rank-2 folding together with the four
/// degree-3 classes, keyed by the unique missing incident slot:
/// c1 = missing a-in, c2 = missing a-out, c3 = missing b-in,
/// c4 = missing b-out.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
    pub d4: usize,
    pub c1: usize,
    pub c2: usize,
    pub c3: usize,
    pub c4: usize,
}

/// A Stallings folding: rooted, deterministic, co-deterministic, core, and
/// connected.
#[derive(Clone, PartialEq, Debug)]
pub struct Folding {
    graph: LabeledDigraph,
    base: VertexId,
}

impl Folding {
    /// The folding of the trivial subgroup: a lone base vertex, no edges.
    pub fn trivial(alphabet: Alphabet) -> Folding {
        let mut graph = LabeledDigraph::new(alphabet);
        let base = graph.add_vertex();
        Folding { graph, base }
    }

    /// Validate the folding invariants on an arbitrary rooted graph.
    pub fn new(graph: LabeledDigraph, base: VertexId) -> Result<Folding, FoldingError> {
        if !graph.contains_vertex(base) {
            return Err(FoldingError::MissingBase(base));
        }
        if !graph.connected_from(base) {
            return Err(FoldingError::NotConnected);
        }
        for v in graph.vertex_ids() {
            let mut out_labels = BTreeSet::new();
            for e in graph.out_edges(v) {
                let label = graph.edge(e).unwrap().label;
                if !out_labels.insert(label) {
                    return Err(FoldingError::NotDeterministic { vertex: v, label });
                }
            }
            let mut in_labels = BTreeSet::new();
            for e in graph.in_edges(v) {
                let label = graph.edge(e).unwrap().label;
                if !in_labels.insert(label) {
                    return Err(FoldingError::NotCoDeterministic { vertex: v, label });
                }
            }
            if v != base && graph.undirected_degree(v) < 2 {
                return Err(FoldingError::NotCore(v));
            }
        }
        Ok(Folding { graph, base })
    }

    pub fn graph(&self) -> &LabeledDigraph {
        &self.graph
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn alphabet(&self) -> Alphabet {
        self.graph.alphabet()
    }

    /// Follow one letter from `v`: forward along an equally labeled edge for
    /// a positive letter, backward for a negative one.
    pub fn step(&self, v: VertexId, letter: SignedLetter) -> Option<VertexId> {
        if letter.is_positive() {
            self.graph
                .out_edge_with_label(v, letter.index())
                .map(|e| self.graph.edge(e).unwrap().head)
        } else {
            self.graph
                .in_edge_with_label(v, letter.index())
                .map(|e| self.graph.edge(e).unwrap().tail)
        }
    }

    /// True iff `w` traces a closed walk at the base, i.e. `w` lies in the
    /// subgroup. The empty word is always a member.
    pub fn membership(&self, w: &Word) -> bool {
        let mut cur = self.base;
        for &letter in w.letters() {
            match self.step(cur, letter) {
                Some(next) => cur = next,
                None => return false,
            }
        }
        cur == self.base
    }

    /// Cycle rank |E| - |V| + 1 of the core graph; the rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.graph.edge_count() + 1 - self.graph.vertex_count()
    }

    /// A free basis read off a breadth-first spanning tree: one word per
    /// non-tree edge, tracing base -> tail, the edge, then head -> base.
    pub fn spanning_tree_basis(&self) -> BTreeSet<Word> {
        let alphabet = self.alphabet();
        // parent[v] = (parent vertex, letter read walking parent -> v, tree edge)
        let mut parent: BTreeMap<VertexId, (VertexId, SignedLetter, EdgeId)> = BTreeMap::new();
        let mut tree: BTreeSet<EdgeId> = BTreeSet::new();
        let mut seen = BTreeSet::from([self.base]);
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for e in self.graph.out_edges(v) {
                let head = self.graph.edge(e).unwrap().head;
                if seen.insert(head) {
                    let letter = SignedLetter::positive(self.graph.edge(e).unwrap().label);
                    parent.insert(head, (v, letter, e));
                    tree.insert(e);
                    queue.push_back(head);
                }
            }
            for e in self.graph.in_edges(v) {
                let tail = self.graph.edge(e).unwrap().tail;
                if seen.insert(tail) {
                    let letter = SignedLetter::negative(self.graph.edge(e).unwrap().label);
                    parent.insert(tail, (v, letter, e));
                    tree.insert(e);
                    queue.push_back(tail);
                }
            }
        }

        let path_from_base = |v: VertexId| -> Vec<SignedLetter> {
            let mut letters = Vec::new();
            let mut cur = v;
            while cur != self.base {
                let (p, letter, _) = parent[&cur];
                letters.push(letter);
                cur = p;
            }
            letters.reverse();
            letters
        };

        let mut basis = BTreeSet::new();
        for e in self.graph.edge_ids() {
            if tree.contains(&e) {
                continue;
            }
            let edge = *self.graph.edge(e).unwrap();
            let mut letters = path_from_base(edge.tail);
            letters.push(SignedLetter::positive(edge.label));
            let mut back = path_from_base(edge.head);
            back.reverse();
            letters.extend(back.into_iter().map(|l| l.inverse()));
            basis.insert(Word::reduce(alphabet, letters).expect("letters within alphabet"));
        }
        basis
    }

    /// Degree counts and degree-3 class counts. Class counting needs the
    /// two-letter alphabet, where the undirected degree is at most 4 and a
    /// degree-3 vertex misses exactly one of its four incident slots.
    pub fn degree_profile(&self) -> Result<DegreeProfile, FoldingError> {
        if self.alphabet().rank() != 2 {
            return Err(FoldingError::ClassCountUnavailable { rank: self.alphabet().rank() });
        }
        let mut profile = DegreeProfile::default();
        for v in self.graph.vertex_ids() {
            match self.graph.undirected_degree(v) {
                1 => profile.d1 += 1,
                2 => profile.d2 += 1,
                3 => profile.d3 += 1,
                4 => profile.d4 += 1,
                _ => {}
            }
            if self.graph.undirected_degree(v) == 3 {
                let a_in = self.graph.in_edge_with_label(v, 1).is_some();
                let a_out = self.graph.out_edge_with_label(v, 1).is_some();
                let b_in = self.graph.in_edge_with_label(v, 2).is_some();
                let b_out = self.graph.out_edge_with_label(v, 2).is_some();
                if !a_in {
                    profile.c1 += 1;
                } else if !a_out {
                    profile.c2 += 1;
                } else if !b_in {
                    profile.c3 += 1;
                } else if !b_out {
                    profile.c4 += 1;
                }
            }
        }
        Ok(profile)
    }

    /// The 3-balance condition c1 + c3 = c2 + c4: as many 1-in/2-out
    /// degree-3 vertices as 2-in/1-out ones.
    pub fn is_3_balanced(&self) -> Result<bool, FoldingError> {
        let p = self.degree_profile()?;
        Ok(p.c1 + p.c3 == p.c2 + p.c4)
    }

    /// The degree-3 class holding a strict majority of the degree-3
    /// vertices, if any. A folding with a majority class is a candidate for
    /// membership in a counterexample pair; a 3-balanced folding never has
    /// one.
    pub fn neumann_majority_type(&self) -> Result<Option<u8>, FoldingError> {
        let p = self.degree_profile()?;
        let counts = [p.c1, p.c2, p.c3, p.c4];
        for (i, &c) in counts.iter().enumerate() {
            if 2 * c > p.d3 {
                return Ok(Some(i as u8 + 1));
            }
        }
        Ok(None)
    }

    /// Base-preserving label-preserving isomorphism test by synchronized
    /// traversal from the bases; unique if it exists because foldings are
    /// deterministic and co-deterministic.
    pub fn is_isomorphic_to(&self, other: &Folding) -> bool {
        if self.alphabet() != other.alphabet()
            || self.graph.vertex_count() != other.graph.vertex_count()
            || self.graph.edge_count() != other.graph.edge_count()
        {
            return false;
        }
        let mut fwd: BTreeMap<VertexId, VertexId> = BTreeMap::from([(self.base, other.base)]);
        let mut bwd: BTreeMap<VertexId, VertexId> = BTreeMap::from([(other.base, self.base)]);
        let mut queue = VecDeque::from([(self.base, other.base)]);
        while let Some((u, v)) = queue.pop_front() {
            for label in self.alphabet().letters() {
                for positive in [true, false] {
                    let letter = if positive {
                        SignedLetter::positive(label)
                    } else {
                        SignedLetter::negative(label)
                    };
                    let mine = self.step(u, letter);
                    let theirs = other.step(v, letter);
                    match (mine, theirs) {
                        (None, None) => {}
                        (Some(a), Some(b)) => {
                            let known_fwd = fwd.get(&a).copied();
                            let known_bwd = bwd.get(&b).copied();
                            match (known_fwd, known_bwd) {
                                (None, None) => {
                                    fwd.insert(a, b);
                                    bwd.insert(b, a);
                                    queue.push_back((a, b));
                                }
                                (Some(b2), Some(a2)) if b2 == b && a2 == a => {}
                                _ => return false,
                            }
                        }
                        _ => return false,
                    }
                }
            }
        }
        fwd.len() == self.graph.vertex_count()
    }

    /// Canonical text form: vertices renumbered by the label-ordered
    /// breadth-first traversal from the base, then one sorted line per edge.
    /// Two foldings are isomorphic exactly when their canonical texts agree.
    pub fn canonical_text(&self) -> String {
        let canon = self.canonicalized();
        let mut s = format!(
            "alphabet {}\nvertices {}\nbase 0\n",
            canon.alphabet().rank(),
            canon.graph.vertex_count()
        );
        for e in canon.graph.edge_ids() {
            let edge = canon.graph.edge(e).unwrap();
            s.push_str(&format!(
                "{} {} {}\n",
                edge.tail,
                canon.alphabet().letter_name(edge.label),
                edge.head
            ));
        }
        s
    }

    /// Renumber vertices in canonical breadth-first order (base first) and
    /// edges by (tail, label, head).
    pub fn canonicalized(&self) -> Folding {
        let (graph, base) = canonicalize(&self.graph, self.base);
        Folding { graph, base }
    }

    /// Graphviz DOT rendering with the base double-circled.
    pub fn to_dot(&self) -> String {
        self.graph.to_dot(Some(self.base))
    }
}

/// Canonical breadth-first vertex order of a deterministic, co-deterministic
/// rooted graph: from each vertex, out-edges by ascending label, then
/// in-edges by ascending label.
fn canonical_order(g: &LabeledDigraph, base: VertexId) -> Vec<VertexId> {
    let mut order = vec![base];
    let mut seen = BTreeSet::from([base]);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for label in g.alphabet().letters() {
            if let Some(e) = g.out_edge_with_label(v, label) {
                let head = g.edge(e).unwrap().head;
                if seen.insert(head) {
                    order.push(head);
                }
            }
        }
        for label in g.alphabet().letters() {
            if let Some(e) = g.in_edge_with_label(v, label) {
                let tail = g.edge(e).unwrap().tail;
                if seen.insert(tail) {
                    order.push(tail);
                }
            }
        }
    }
    order
}

fn canonicalize(g: &LabeledDigraph, base: VertexId) -> (LabeledDigraph, VertexId) {
    let order = canonical_order(g, base);
    let index: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut new = LabeledDigraph::new(g.alphabet());
    let mut new_ids = Vec::with_capacity(order.len());
    for _ in &order {
        new_ids.push(new.add_vertex());
    }
    let mut edges: Vec<(usize, u8, usize)> = g
        .edge_ids()
        .map(|e| {
            let edge = g.edge(e).unwrap();
            (index[&edge.tail], edge.label, index[&edge.head])
        })
        .collect();
    edges.sort_unstable();
    for (tail, label, head) in edges {
        new.add_edge(new_ids[tail], new_ids[head], label)
            .expect("vertices just added");
    }
    (new, new_ids[0])
}

/// How the folding process picks the next identification.
enum FoldOrder {
    /// Lowest vertex, outgoing before incoming, lowest label, lowest edges.
    Deterministic,
    /// Uniformly random choice among all current violations.
    Seeded(Box<ChaCha8Rng>),
}

/// Foldable pairs: two equal-label edges sharing a tail or a head. With
/// `all` unset, returns just the first in scan order.
fn violations(g: &LabeledDigraph, all: bool) -> Vec<(EdgeId, EdgeId)> {
    let mut found = Vec::new();
    for v in g.vertex_ids() {
        let groups: [Vec<EdgeId>; 2] = [g.out_edges(v).collect(), g.in_edges(v).collect()];
        for edges in &groups {
            let mut by_label: BTreeMap<u8, EdgeId> = BTreeMap::new();
            for &e in edges {
                let label = g.edge(e).unwrap().label;
                match by_label.get(&label) {
                    Some(&first) => {
                        found.push((first, e));
                        if !all {
                            return found;
                        }
                    }
                    None => {
                        by_label.insert(label, e);
                    }
                }
            }
        }
    }
    found
}

fn fold_process(g: &mut LabeledDigraph, base: &mut VertexId, mut order: FoldOrder) {
    loop {
        let pair = match &mut order {
            FoldOrder::Deterministic => violations(g, false).first().copied(),
            FoldOrder::Seeded(rng) => {
                let all = violations(g, true);
                if all.is_empty() {
                    None
                } else {
                    Some(all[rng.gen_range(0..all.len())])
                }
            }
        };
        let (e1, e2) = match pair {
            Some(p) => p,
            None => break,
        };
        let a = *g.edge(e1).unwrap();
        let b = *g.edge(e2).unwrap();
        debug_assert_eq!(a.label, b.label);
        if a.tail == b.tail && a.head == b.head {
            g.remove_edge(e2);
        } else if a.tail == b.tail {
            merge_keeping_base(g, base, a.head, b.head);
        } else {
            debug_assert_eq!(a.head, b.head);
            merge_keeping_base(g, base, a.tail, b.tail);
        }
    }
}

fn merge_keeping_base(g: &mut LabeledDigraph, base: &mut VertexId, x: VertexId, y: VertexId) {
    debug_assert!(x != y);
    let (survivor, absorbed) = if x == *base {
        (x, y)
    } else if y == *base {
        (y, x)
    } else {
        (x.min(y), x.max(y))
    };
    g.merge_vertices(survivor, absorbed);
    if *base == absorbed {
        *base = survivor;
    }
}

/// Iteratively delete non-base vertices of undirected degree at most 1.
pub(crate) fn trim_to_core(g: &mut LabeledDigraph, base: VertexId) {
    loop {
        let victim = g
            .vertex_ids()
            .find(|&v| v != base && g.undirected_degree(v) <= 1);
        match victim {
            Some(v) => g.remove_vertex(v),
            None => break,
        }
    }
}

/// Fold a connected rooted graph into the Stallings folding of the subgroup
/// its closed base walks spell: identify equal-label edge pairs sharing a
/// tail or a head until none remain, trim to the core, and renumber
/// canonically.
///
/// Panics if the input graph is not connected or the base is missing; the
/// terminal result does not depend on the identification order.
pub fn fold(graph: LabeledDigraph, base: VertexId) -> Folding {
    fold_with(graph, base, FoldOrder::Deterministic)
}

/// [`fold`] with identifications picked uniformly at random under a seed.
pub fn fold_seeded(graph: LabeledDigraph, base: VertexId, seed: u64) -> Folding {
    fold_with(graph, base, FoldOrder::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed))))
}

fn fold_with(mut graph: LabeledDigraph, mut base: VertexId, order: FoldOrder) -> Folding {
    assert!(graph.contains_vertex(base), "base vertex must be in the graph");
    assert!(graph.connected_from(base), "fold requires a connected input graph");
    fold_process(&mut graph, &mut base, order);
    trim_to_core(&mut graph, base);
    let (graph, base) = canonicalize(&graph, base);
    Folding::new(graph, base).expect("fold output satisfies the folding invariants")
}
