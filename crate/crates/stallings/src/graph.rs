//! Edge-labeled directed multigraphs with stable vertex/edge identities,
//! directed trails, strongly connected components, and directed trail
//! decompositions.
//!
//! Graphs here are general: loops and parallel edges are permitted, and the
//! labels are generator indices of an [`Alphabet`]. All operations are pure;
//! mutation is confined to construction (and to the folding process in the
//! `folding` module).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::words::Alphabet;

/// Stable identity of a vertex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub usize);

/// Stable identity of an edge.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("edge {0} is not in the graph")]
    UnknownEdge(EdgeId),
    #[error("label {label} out of range for alphabet of rank {rank}")]
    LabelOutOfRange { label: u8, rank: u8 },
    #[error("a trail must contain at least one edge")]
    EmptyTrail,
    #[error("edges {0} and {1} do not chain head-to-tail")]
    BrokenChain(EdgeId, EdgeId),
    #[error("edge {0} repeats in the trail")]
    RepeatedEdge(EdgeId),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("trail index {index} out of range ({count} trails)")]
    TrailIndexOutOfRange { index: usize, count: usize },
}

/// A directed labeled edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub label: u8,
}

/// Directed multigraph with loops, labeled by generator indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LabeledDigraph {
    alphabet: Alphabet,
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
    out: BTreeMap<VertexId, BTreeSet<EdgeId>>,
    inn: BTreeMap<VertexId, BTreeSet<EdgeId>>,
    next_vertex: usize,
    next_edge: usize,
}

impl LabeledDigraph {
    pub fn new(alphabet: Alphabet) -> Self {
        LabeledDigraph {
            alphabet,
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
            out: BTreeMap::new(),
            inn: BTreeMap::new(),
            next_vertex: 0,
            next_edge: 0,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.vertices.insert(id);
        self.out.insert(id, BTreeSet::new());
        self.inn.insert(id, BTreeSet::new());
        id
    }

    pub fn add_edge(&mut self, tail: VertexId, head: VertexId, label: u8) -> Result<EdgeId, GraphError> {
        if !self.vertices.contains(&tail) {
            return Err(GraphError::UnknownVertex(tail));
        }
        if !self.vertices.contains(&head) {
            return Err(GraphError::UnknownVertex(head));
        }
        if !self.alphabet.contains(label) {
            return Err(GraphError::LabelOutOfRange { label, rank: self.alphabet.rank() });
        }
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.edges.insert(id, Edge { tail, head, label });
        self.out.get_mut(&tail).unwrap().insert(id);
        self.inn.get_mut(&head).unwrap().insert(id);
        Ok(id)
    }

    /// Insert a vertex with a caller-chosen id, preserving identities when
    /// carving out subgraphs.
    fn insert_vertex_raw(&mut self, id: VertexId) {
        self.vertices.insert(id);
        self.out.entry(id).or_default();
        self.inn.entry(id).or_default();
        self.next_vertex = self.next_vertex.max(id.0 + 1);
    }

    fn insert_edge_raw(&mut self, id: EdgeId, edge: Edge) {
        debug_assert!(self.vertices.contains(&edge.tail) && self.vertices.contains(&edge.head));
        self.edges.insert(id, edge);
        self.out.get_mut(&edge.tail).unwrap().insert(id);
        self.inn.get_mut(&edge.head).unwrap().insert(id);
        self.next_edge = self.next_edge.max(id.0 + 1);
    }

    pub(crate) fn remove_edge(&mut self, id: EdgeId) {
        if let Some(edge) = self.edges.remove(&id) {
            self.out.get_mut(&edge.tail).unwrap().remove(&id);
            self.inn.get_mut(&edge.head).unwrap().remove(&id);
        }
    }

    /// Remove a vertex together with its incident edges.
    pub(crate) fn remove_vertex(&mut self, id: VertexId) {
        let incident: Vec<EdgeId> = self
            .out_edges(id)
            .chain(self.in_edges(id))
            .collect();
        for e in incident {
            self.remove_edge(e);
        }
        self.vertices.remove(&id);
        self.out.remove(&id);
        self.inn.remove(&id);
    }

    /// Redirect every edge incident to `absorbed` onto `survivor` and delete
    /// `absorbed`. Used by the folding process.
    pub(crate) fn merge_vertices(&mut self, survivor: VertexId, absorbed: VertexId) {
        debug_assert!(survivor != absorbed);
        let incident: Vec<EdgeId> = self
            .out_edges(absorbed)
            .chain(self.in_edges(absorbed))
            .collect();
        for id in incident {
            let mut edge = self.edges[&id];
            self.out.get_mut(&edge.tail).unwrap().remove(&id);
            self.inn.get_mut(&edge.head).unwrap().remove(&id);
            if edge.tail == absorbed {
                edge.tail = survivor;
            }
            if edge.head == absorbed {
                edge.head = survivor;
            }
            self.edges.insert(id, edge);
            self.out.get_mut(&edge.tail).unwrap().insert(id);
            self.inn.get_mut(&edge.head).unwrap().insert(id);
        }
        self.vertices.remove(&absorbed);
        self.out.remove(&absorbed);
        self.inn.remove(&absorbed);
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn contains_vertex(&self, id: VertexId) -> bool {
        self.vertices.contains(&id)
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges in ascending id order.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.out.get(&v).into_iter().flatten().copied()
    }

    /// Incoming edges in ascending id order.
    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.inn.get(&v).into_iter().flatten().copied()
    }

    /// Lowest-id outgoing edge at `v` carrying `label`.
    pub fn out_edge_with_label(&self, v: VertexId, label: u8) -> Option<EdgeId> {
        self.out_edges(v).find(|&e| self.edges[&e].label == label)
    }

    /// Lowest-id incoming edge at `v` carrying `label`.
    pub fn in_edge_with_label(&self, v: VertexId, label: u8) -> Option<EdgeId> {
        self.in_edges(v).find(|&e| self.edges[&e].label == label)
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out.get(&v).map_or(0, |s| s.len())
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.inn.get(&v).map_or(0, |s| s.len())
    }

    /// In-degree plus out-degree; a loop contributes 2.
    pub fn undirected_degree(&self, v: VertexId) -> usize {
        self.in_degree(v) + self.out_degree(v)
    }

    /// Subgraph induced by a vertex set, preserving identities.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> LabeledDigraph {
        let mut sub = LabeledDigraph::new(self.alphabet);
        for &v in keep {
            if self.vertices.contains(&v) {
                sub.insert_vertex_raw(v);
            }
        }
        for (&id, edge) in &self.edges {
            if keep.contains(&edge.tail) && keep.contains(&edge.head) {
                sub.insert_edge_raw(id, *edge);
            }
        }
        sub
    }

    /// True when every vertex is reachable from `start` ignoring edge
    /// directions.
    pub(crate) fn connected_from(&self, start: VertexId) -> bool {
        if !self.vertices.contains(&start) {
            return false;
        }
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in self.out_edges(v).chain(self.in_edges(v)) {
                let edge = self.edges[&e];
                for w in [edge.tail, edge.head] {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Graphviz DOT rendering, one line per edge in ascending id order. The
    /// base vertex, when given, is drawn double-circled.
    pub fn to_dot(&self, base: Option<VertexId>) -> String {
        let mut s = String::from("digraph folding {\n  rankdir=LR;\n");
        for &v in &self.vertices {
            if Some(v) == base {
                s.push_str(&format!("  {} [shape=doublecircle];\n", v));
            } else {
                s.push_str(&format!("  {};\n", v));
            }
        }
        for edge in self.edges.values() {
            s.push_str(&format!(
                "  {} -> {} [label=\"{}\"];\n",
                edge.tail,
                edge.head,
                self.alphabet.letter_name(edge.label)
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// A directed trail: a non-empty sequence of distinct edges chained
/// head-to-tail. Vertices may repeat; edges may not.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trail {
    edges: Vec<EdgeId>,
}

impl Trail {
    /// Validated constructor.
    pub fn new(g: &LabeledDigraph, edges: Vec<EdgeId>) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyTrail);
        }
        let mut seen = BTreeSet::new();
        for &e in &edges {
            if !g.contains_edge(e) {
                return Err(GraphError::UnknownEdge(e));
            }
            if !seen.insert(e) {
                return Err(GraphError::RepeatedEdge(e));
            }
        }
        for pair in edges.windows(2) {
            if g.edge(pair[0]).unwrap().head != g.edge(pair[1]).unwrap().tail {
                return Err(GraphError::BrokenChain(pair[0], pair[1]));
            }
        }
        Ok(Trail { edges })
    }

    /// Unchecked constructor; `verify_decomposition` treats invalid trails
    /// as a failed verdict rather than an error.
    pub fn from_edges(edges: Vec<EdgeId>) -> Self {
        Trail { edges }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Start vertex s(P) = tail of the first edge.
    pub fn start(&self, g: &LabeledDigraph) -> VertexId {
        g.edge(self.edges[0]).expect("trail edge in graph").tail
    }

    /// Terminus t(P) = head of the last edge.
    pub fn end(&self, g: &LabeledDigraph) -> VertexId {
        g.edge(*self.edges.last().expect("trail non-empty"))
            .expect("trail edge in graph")
            .head
    }

    pub fn is_closed(&self, g: &LabeledDigraph) -> bool {
        self.start(g) == self.end(g)
    }

    /// Every vertex visited by the trail.
    pub fn vertices(&self, g: &LabeledDigraph) -> BTreeSet<VertexId> {
        let mut vs = BTreeSet::new();
        for &e in &self.edges {
            let edge = g.edge(e).expect("trail edge in graph");
            vs.insert(edge.tail);
            vs.insert(edge.head);
        }
        vs
    }

    /// No two edges share a tail and no two edges share a head. A closed
    /// trail may still end where it starts.
    pub fn is_self_avoiding(&self, g: &LabeledDigraph) -> bool {
        let mut tails = BTreeSet::new();
        let mut heads = BTreeSet::new();
        for &e in &self.edges {
            let edge = g.edge(e).expect("trail edge in graph");
            if !tails.insert(edge.tail) || !heads.insert(edge.head) {
                return false;
            }
        }
        true
    }

    /// True when the edge sequence is a valid trail of `g`.
    fn is_valid(&self, g: &LabeledDigraph) -> bool {
        Trail::new(g, self.edges.clone()).is_ok()
    }
}

/// An ordered sequence of trails partitioning the edges of a graph, with the
/// distinguished vertex closing the first trail.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TrailDecomposition {
    base: VertexId,
    trails: Vec<Trail>,
}

impl TrailDecomposition {
    /// Unchecked constructor; use [`verify_decomposition`] to check the
    /// decomposition conditions.
    pub fn new(base: VertexId, trails: Vec<Trail>) -> Self {
        TrailDecomposition { base, trails }
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn trails(&self) -> &[Trail] {
        &self.trails
    }

    /// Subgraph spanned by the edges of trails 0..=i, preserving identities.
    pub fn prefix_union(&self, g: &LabeledDigraph, i: usize) -> Result<LabeledDigraph, GraphError> {
        if i >= self.trails.len() {
            return Err(GraphError::TrailIndexOutOfRange { index: i, count: self.trails.len() });
        }
        let mut sub = LabeledDigraph::new(g.alphabet());
        for trail in &self.trails[..=i] {
            for &e in trail.edges() {
                let edge = *g.edge(e).ok_or(GraphError::UnknownEdge(e))?;
                if !sub.contains_vertex(edge.tail) {
                    sub.insert_vertex_raw(edge.tail);
                }
                if !sub.contains_vertex(edge.head) {
                    sub.insert_vertex_raw(edge.head);
                }
                sub.insert_edge_raw(e, edge);
            }
        }
        Ok(sub)
    }
}

/// Partition of the vertices into strongly connected components. Classes are
/// ordered by their smallest vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SccPartition {
    classes: Vec<BTreeSet<VertexId>>,
    class_of: BTreeMap<VertexId, usize>,
}

impl SccPartition {
    pub fn classes(&self) -> &[BTreeSet<VertexId>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, v: VertexId) -> Option<usize> {
        self.class_of.get(&v).copied()
    }

    /// Induced subgraph of the i-th component, identities preserved.
    pub fn induced(&self, g: &LabeledDigraph, i: usize) -> LabeledDigraph {
        g.induced(&self.classes[i])
    }
}

/// Strongly connected components via Tarjan's algorithm (iterative).
pub fn scc(g: &LabeledDigraph) -> SccPartition {
    let verts: Vec<VertexId> = g.vertex_ids().collect();
    let pos: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let succ: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| {
            g.out_edges(v)
                .map(|e| pos[&g.edge(e).unwrap().head])
                .collect()
        })
        .collect();

    const UNSET: usize = usize::MAX;
    let n = verts.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut classes: Vec<BTreeSet<VertexId>> = Vec::new();

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(frame) = call.last_mut() {
            let (v, i) = *frame;
            if i == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if i < succ[v].len() {
                frame.1 += 1;
                let w = succ[v][i];
                if index[w] == UNSET {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut class = BTreeSet::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        class.insert(verts[w]);
                        if w == v {
                            break;
                        }
                    }
                    classes.push(class);
                }
            }
        }
    }

    classes.sort_by_key(|c| *c.iter().next().unwrap());
    let mut class_of = BTreeMap::new();
    for (i, class) in classes.iter().enumerate() {
        for &v in class {
            class_of.insert(v, i);
        }
    }
    SccPartition { classes, class_of }
}

/// True iff all vertices are mutually reachable. Graphs with at most one
/// vertex are strongly connected regardless of edges.
pub fn is_strongly_connected(g: &LabeledDigraph) -> bool {
    g.vertex_count() <= 1 || scc(g).class_count() == 1
}

/// Shortest directed trail from `from` to `to` by breadth-first search with
/// lowest-edge-id preference. Returns the edge sequence; empty when
/// `from == to`.
pub fn shortest_trail(g: &LabeledDigraph, from: VertexId, to: VertexId) -> Option<Vec<EdgeId>> {
    if !g.contains_vertex(from) || !g.contains_vertex(to) {
        return None;
    }
    if from == to {
        return Some(Vec::new());
    }
    let mut parent: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(v) = queue.pop_front() {
        for e in g.out_edges(v) {
            let head = g.edge(e).unwrap().head;
            if seen.insert(head) {
                parent.insert(head, e);
                if head == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let e = parent[&cur];
                        path.push(e);
                        cur = g.edge(e).unwrap().tail;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(head);
            }
        }
    }
    None
}

/// Erase cycles from a chained edge walk, keeping its endpoints. The walk
/// may repeat edges; the result is a self-avoiding trail over a subset of
/// the walk's edges. A closed walk yields a simple cycle through its start.
fn loop_erase(g: &LabeledDigraph, walk: &[EdgeId]) -> Vec<EdgeId> {
    debug_assert!(!walk.is_empty());
    let start = g.edge(walk[0]).unwrap().tail;
    let finish = g.edge(*walk.last().unwrap()).unwrap().head;
    let closed = start == finish;
    let (body, closing) = if closed {
        (&walk[..walk.len() - 1], Some(*walk.last().unwrap()))
    } else {
        (walk, None)
    };

    let mut vstack = vec![start];
    let mut estack: Vec<EdgeId> = Vec::new();
    for &e in body {
        let head = g.edge(e).unwrap().head;
        if let Some(pos) = vstack.iter().position(|&v| v == head) {
            vstack.truncate(pos + 1);
            estack.truncate(pos);
        } else {
            vstack.push(head);
            estack.push(e);
        }
    }
    if let Some(e) = closing {
        estack.push(e);
    }
    estack
}

/// Extract a self-avoiding trail from `p` with the same start and terminus,
/// using only edges of `p`. Already self-avoiding trails (including simple
/// closed ones) come back unchanged.
pub fn make_self_avoiding(g: &LabeledDigraph, p: &Trail) -> Trail {
    if p.is_self_avoiding(g) {
        return p.clone();
    }
    Trail::from_edges(loop_erase(g, p.edges()))
}

/// Build a strong directed trail decomposition of a strongly connected graph
/// rooted at `base`: self-avoiding trails, each attached to the union of its
/// predecessors at exactly its endpoints, with every prefix union strongly
/// connected.
///
/// Phase 1 grows the covered vertex set one trail at a time (lowest
/// uncovered vertex, breadth-first trail search, lowest edge id); phase 2
/// appends the remaining edges as single-edge trails in id order.
pub fn strong_trail_decomposition(
    g: &LabeledDigraph,
    base: VertexId,
) -> Result<TrailDecomposition, GraphError> {
    if !g.contains_vertex(base) {
        return Err(GraphError::UnknownVertex(base));
    }
    if !is_strongly_connected(g) {
        return Err(GraphError::NotStronglyConnected);
    }

    let mut covered_v = BTreeSet::from([base]);
    let mut covered_e: BTreeSet<EdgeId> = BTreeSet::new();
    let mut trails: Vec<Trail> = Vec::new();

    // Phase 1: cover all vertices.
    loop {
        let target = match g.vertex_ids().find(|v| !covered_v.contains(v)) {
            Some(v) => v,
            None => break,
        };
        let s = shortest_trail(g, base, target).expect("strong connectivity");
        let t = shortest_trail(g, target, base).expect("strong connectivity");
        // Clip to the segment leaving and re-entering the covered set once:
        // the last s-edge whose tail is covered through the first t-edge
        // whose head is covered.
        let j = s
            .iter()
            .rposition(|&e| covered_v.contains(&g.edge(e).unwrap().tail))
            .expect("s starts at the covered base");
        let k = t
            .iter()
            .position(|&e| covered_v.contains(&g.edge(e).unwrap().head))
            .expect("t ends at the covered base");
        let mut walk: Vec<EdgeId> = s[j..].to_vec();
        walk.extend_from_slice(&t[..=k]);
        let trail = Trail::from_edges(loop_erase(g, &walk));
        debug_assert!(trail.is_valid(g));
        covered_v.extend(trail.vertices(g));
        covered_e.extend(trail.edges().iter().copied());
        trails.push(trail);
    }

    // Phase 2: cover the remaining edges.
    let leftover: Vec<EdgeId> = g.edge_ids().filter(|e| !covered_e.contains(e)).collect();
    for e in leftover {
        covered_e.insert(e);
        trails.push(Trail::from_edges(vec![e]));
    }

    Ok(TrailDecomposition::new(base, trails))
}

/// Check the directed trail decomposition conditions literally: the trails
/// partition the edges and span the vertices, the first trail closes at the
/// base, and every later trail either meets the union of its predecessors in
/// exactly its endpoints or is disjoint from it and closed. With `strong`
/// set, disjoint later trails are rejected.
///
/// An empty trail sequence verifies only against the one-vertex edgeless
/// graph; a graph with an isolated vertex admits no decomposition.
pub fn verify_decomposition(g: &LabeledDigraph, d: &TrailDecomposition, strong: bool) -> bool {
    if d.trails.is_empty() {
        return g.edge_count() == 0 && g.vertex_count() == 1 && g.contains_vertex(d.base);
    }
    for trail in &d.trails {
        if !trail.is_valid(g) {
            return false;
        }
    }

    // Condition 1: edge partition.
    let mut seen = BTreeSet::new();
    for trail in &d.trails {
        for &e in trail.edges() {
            if !seen.insert(e) {
                return false;
            }
        }
    }
    if seen.len() != g.edge_count() {
        return false;
    }

    // Condition 2: the first trail closes at the base.
    let p0 = &d.trails[0];
    if p0.start(g) != p0.end(g) || p0.start(g) != d.base {
        return false;
    }

    // Condition 3 (and the strong refinement).
    let mut covered = p0.vertices(g);
    for trail in &d.trails[1..] {
        let vs = trail.vertices(g);
        let meet: BTreeSet<VertexId> = vs.intersection(&covered).copied().collect();
        if meet.is_empty() {
            if strong || trail.start(g) != trail.end(g) {
                return false;
            }
        } else {
            let endpoints: BTreeSet<VertexId> =
                [trail.start(g), trail.end(g)].into_iter().collect();
            if meet != endpoints {
                return false;
            }
        }
        covered.extend(vs);
    }
    covered.len() == g.vertex_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    /// Folding of <a, bab⁻¹>: a-loop at the base, b to a second vertex
    /// carrying an a-loop.
    fn two_vertex_graph() -> (LabeledDigraph, VertexId, VertexId) {
        let mut g = LabeledDigraph::new(f2());
        let base = g.add_vertex();
        let v = g.add_vertex();
        g.add_edge(base, base, 1).unwrap();
        g.add_edge(base, v, 2).unwrap();
        g.add_edge(v, v, 1).unwrap();
        (g, base, v)
    }

    #[test]
    fn scc_single_vertex_with_loops() {
        let mut g = LabeledDigraph::new(f2());
        let v = g.add_vertex();
        g.add_edge(v, v, 1).unwrap();
        g.add_edge(v, v, 2).unwrap();
        let parts = scc(&g);
        assert_eq!(parts.class_count(), 1);
        assert!(is_strongly_connected(&g));
    }

    #[test]
    fn scc_one_directed_edge() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        g.add_edge(u, v, 1).unwrap();
        let parts = scc(&g);
        assert_eq!(parts.class_count(), 2);
        assert_eq!(parts.classes()[0], BTreeSet::from([u]));
        assert_eq!(parts.classes()[1], BTreeSet::from([v]));
    }

    #[test]
    fn scc_of_conjugate_folding() {
        // 1 and v are mutually unreachable along directed paths.
        let (g, base, v) = two_vertex_graph();
        let parts = scc(&g);
        assert_eq!(parts.class_count(), 2);
        assert_eq!(parts.classes()[0], BTreeSet::from([base]));
        assert_eq!(parts.classes()[1], BTreeSet::from([v]));
        assert!(!is_strongly_connected(&g));
    }

    #[test]
    fn scc_directed_cycle() {
        let mut g = LabeledDigraph::new(f2());
        let vs: Vec<VertexId> = (0..6).map(|_| g.add_vertex()).collect();
        for i in 0..6 {
            g.add_edge(vs[i], vs[(i + 1) % 6], 1).unwrap();
        }
        assert!(is_strongly_connected(&g));
    }

    #[test]
    fn single_vertex_no_loop_is_own_class() {
        let mut g = LabeledDigraph::new(f2());
        let v = g.add_vertex();
        let parts = scc(&g);
        assert_eq!(parts.class_count(), 1);
        assert_eq!(parts.class_of(v), Some(0));
    }

    #[test]
    fn self_avoiding_excises_revisits() {
        // u -> v -> u -> w: the excursion through v is excised.
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        let w = g.add_vertex();
        let e0 = g.add_edge(u, v, 1).unwrap();
        let e1 = g.add_edge(v, u, 2).unwrap();
        let e2 = g.add_edge(u, w, 1).unwrap();
        let p = Trail::new(&g, vec![e0, e1, e2]).unwrap();
        let q = make_self_avoiding(&g, &p);
        assert_eq!(q.edges(), &[e2]);
        assert_eq!(q.start(&g), u);
        assert_eq!(q.end(&g), w);
        assert!(q.is_self_avoiding(&g));
    }

    #[test]
    fn self_avoiding_identity_cases() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        let e0 = g.add_edge(u, v, 1).unwrap();
        let e1 = g.add_edge(v, u, 2).unwrap();
        // already self-avoiding open trail
        let p = Trail::new(&g, vec![e0]).unwrap();
        assert_eq!(make_self_avoiding(&g, &p), p);
        // closed trail around a simple cycle
        let c = Trail::new(&g, vec![e0, e1]).unwrap();
        assert_eq!(make_self_avoiding(&g, &c), c);
        assert!(c.is_self_avoiding(&g));
    }

    #[test]
    fn loop_is_a_legal_trail() {
        let mut g = LabeledDigraph::new(f2());
        let v = g.add_vertex();
        let e = g.add_edge(v, v, 1).unwrap();
        let t = Trail::new(&g, vec![e]).unwrap();
        assert!(t.is_closed(&g));
        assert!(t.is_self_avoiding(&g));
    }

    #[test]
    fn decomposition_of_wedge_of_loops() {
        let mut g = LabeledDigraph::new(f2());
        let v = g.add_vertex();
        let a = g.add_edge(v, v, 1).unwrap();
        let b = g.add_edge(v, v, 2).unwrap();
        let d = strong_trail_decomposition(&g, v).unwrap();
        assert_eq!(d.trails().len(), 2);
        assert_eq!(d.trails()[0].edges(), &[a]);
        assert_eq!(d.trails()[1].edges(), &[b]);
        assert!(verify_decomposition(&g, &d, true));
    }

    #[test]
    fn decomposition_of_two_cycle() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        let e0 = g.add_edge(u, v, 1).unwrap();
        let e1 = g.add_edge(v, u, 2).unwrap();
        let d = strong_trail_decomposition(&g, u).unwrap();
        assert_eq!(d.trails().len(), 1);
        assert_eq!(d.trails()[0].edges(), &[e0, e1]);
        assert!(verify_decomposition(&g, &d, true));
    }

    #[test]
    fn decomposition_requires_strong_connectivity() {
        let (g, base, _) = two_vertex_graph();
        assert_eq!(
            strong_trail_decomposition(&g, base),
            Err(GraphError::NotStronglyConnected)
        );
    }

    #[test]
    fn verify_rejects_missing_edge() {
        let mut g = LabeledDigraph::new(f2());
        let v = g.add_vertex();
        let a = g.add_edge(v, v, 1).unwrap();
        let _b = g.add_edge(v, v, 2).unwrap();
        let d = TrailDecomposition::new(v, vec![Trail::from_edges(vec![a])]);
        assert!(!verify_decomposition(&g, &d, false));
    }

    #[test]
    fn verify_rejects_open_first_trail() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        let e0 = g.add_edge(u, v, 1).unwrap();
        let e1 = g.add_edge(v, u, 2).unwrap();
        let d = TrailDecomposition::new(
            u,
            vec![Trail::from_edges(vec![e0]), Trail::from_edges(vec![e1])],
        );
        assert!(!verify_decomposition(&g, &d, false));
    }

    #[test]
    fn prefix_union_bounds_and_extremes() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        g.add_edge(u, v, 1).unwrap();
        g.add_edge(v, u, 2).unwrap();
        g.add_edge(u, u, 1).unwrap();
        let d = strong_trail_decomposition(&g, u).unwrap();
        let whole = d.prefix_union(&g, d.trails().len() - 1).unwrap();
        assert_eq!(whole.edge_count(), g.edge_count());
        let first = d.prefix_union(&g, 0).unwrap();
        assert_eq!(first.edge_count(), d.trails()[0].len());
        assert!(matches!(
            d.prefix_union(&g, d.trails().len()),
            Err(GraphError::TrailIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn prefix_unions_strongly_connected() {
        // folding of <ab, ba>: base, x (a:base->x, b:x->base), y (b:base->y, a:y->base)
        let mut g = LabeledDigraph::new(f2());
        let base = g.add_vertex();
        let x = g.add_vertex();
        let y = g.add_vertex();
        g.add_edge(base, x, 1).unwrap();
        g.add_edge(x, base, 2).unwrap();
        g.add_edge(base, y, 2).unwrap();
        g.add_edge(y, base, 1).unwrap();
        let d = strong_trail_decomposition(&g, base).unwrap();
        assert!(verify_decomposition(&g, &d, true));
        for i in 0..d.trails().len() {
            assert!(is_strongly_connected(&d.prefix_union(&g, i).unwrap()));
        }
        for t in d.trails() {
            assert!(t.is_self_avoiding(&g));
        }
    }

    #[test]
    fn edge_and_trail_validation() {
        let mut g = LabeledDigraph::new(f2());
        let u = g.add_vertex();
        let v = g.add_vertex();
        assert_eq!(
            g.add_edge(u, VertexId(9), 1),
            Err(GraphError::UnknownVertex(VertexId(9)))
        );
        assert_eq!(g.add_edge(u, v, 3), Err(GraphError::LabelOutOfRange { label: 3, rank: 2 }));
        let e0 = g.add_edge(u, v, 1).unwrap();
        let e1 = g.add_edge(v, u, 2).unwrap();
        assert_eq!(Trail::new(&g, vec![]), Err(GraphError::EmptyTrail));
        assert_eq!(
            Trail::new(&g, vec![e0, e0]),
            Err(GraphError::RepeatedEdge(e0))
        );
        assert_eq!(
            Trail::new(&g, vec![e1, e1]),
            Err(GraphError::RepeatedEdge(e1))
        );
        assert_eq!(
            Trail::new(&g, vec![e0, EdgeId(7)]),
            Err(GraphError::UnknownEdge(EdgeId(7)))
        );
        let mut h = LabeledDigraph::new(f2());
        let w = h.add_vertex();
        let x = h.add_vertex();
        let y = h.add_vertex();
        let f0 = h.add_edge(w, x, 1).unwrap();
        let f1 = h.add_edge(w, y, 2).unwrap();
        assert_eq!(Trail::new(&h, vec![f0, f1]), Err(GraphError::BrokenChain(f0, f1)));
    }

    #[test]
    fn dot_output_is_stable() {
        let (g, base, _) = two_vertex_graph();
        let dot = g.to_dot(Some(base));
        assert_eq!(
            dot,
            "digraph folding {\n  rankdir=LR;\n  0 [shape=doublecircle];\n  1;\n  0 -> 0 [label=\"a\"];\n  0 -> 1 [label=\"b\"];\n  1 -> 1 [label=\"a\"];\n}\n"
        );
    }
}
