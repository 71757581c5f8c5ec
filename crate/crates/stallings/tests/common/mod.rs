//! Shared test oracles, independent of the folding implementation.
//!
//! Membership is checked against brute-force generator products. Products of
//! the raw generators alone can miss short subgroup elements whose shortest
//! factorization is long, so the oracle first Nielsen-reduces the generating
//! set. After reduction a product of k basis letters has free length at
//! least k, hence every subgroup element of length at most L appears among
//! the products of at most L basis letters.
//!
//! The reduction greedily applies elementary Nielsen transformations that
//! strictly decrease a word in a well-order keyed by length and then by the
//! sorted pair (left half, inverted right half). Plain length-lexicographic
//! tie-breaking is not enough: a set like {aba⁻¹, a⁻²} is stable under
//! length reduction yet a middle factor can still cancel completely. The
//! half-pair key makes one of the two boundary-rewriting moves decreasing
//! whenever a factor would vanish between two neighbours, because the two
//! halves of the vanishing factor cannot be mutually inverse.

// Each test binary uses its own subset of these helpers.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use stallings::words::{Alphabet, SignedLetter, Word};

/// Length-first, then lexicographic, comparison.
pub fn word_cmp(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.letters().cmp(b.letters()))
}

fn subword(w: &Word, range: std::ops::Range<usize>) -> Word {
    Word::reduce(w.alphabet(), w.letters()[range].iter().copied())
        .expect("subword of a reduced word")
}

/// (left half, inverted right half), the left half taking the middle letter
/// of odd-length words.
fn half_pair(w: &Word) -> (Word, Word) {
    let split = w.len().div_ceil(2);
    let left = subword(w, 0..split);
    let right_inv = subword(w, split..w.len()).invert();
    (left, right_inv)
}

/// Well-order key: length, then the sorted half pair, then the word itself.
fn key_cmp(a: &Word, b: &Word) -> Ordering {
    let by_len = a.len().cmp(&b.len());
    if by_len != Ordering::Equal {
        return by_len;
    }
    let (a1, a2) = half_pair(a);
    let (b1, b2) = half_pair(b);
    let (a_min, a_max) = if word_cmp(&a1, &a2) == Ordering::Greater { (a2, a1) } else { (a1, a2) };
    let (b_min, b_max) = if word_cmp(&b1, &b2) == Ordering::Greater { (b2, b1) } else { (b1, b2) };
    word_cmp(&a_min, &b_min)
        .then_with(|| word_cmp(&a_max, &b_max))
        .then_with(|| a.letters().cmp(b.letters()))
}

/// The key-smaller of w and w⁻¹; the canonical slot representative.
pub fn normalize(w: &Word) -> Word {
    let inv = w.invert();
    if key_cmp(&inv, w) == Ordering::Less {
        inv
    } else {
        w.clone()
    }
}

/// Number of letters cancelling at the boundary of u·v.
fn boundary_cancellation(u: &Word, v: &Word) -> usize {
    let ul = u.letters();
    let vl = v.letters();
    let mut i = 0;
    while i < ul.len() && i < vl.len() && ul[ul.len() - 1 - i].cancels(&vl[i]) {
        i += 1;
    }
    i
}

/// No element of `set`± cancels completely between two neighbours: for every
/// x, v, w in the symmetrized set with xv != 1 and vw != 1, the
/// cancellations in x·v and v·w do not together consume all of v.
fn is_half_safe(set: &[Word]) -> bool {
    let mut symmetrized: Vec<Word> = Vec::new();
    for w in set {
        symmetrized.push(w.clone());
        symmetrized.push(w.invert());
    }
    for v in &symmetrized {
        if v.len() % 2 != 0 {
            continue;
        }
        let half = v.len() / 2;
        for x in &symmetrized {
            if x.concat(v).expect("same alphabet").is_empty() {
                continue;
            }
            if boundary_cancellation(x, v) < half {
                continue;
            }
            for w in &symmetrized {
                if v.concat(w).expect("same alphabet").is_empty() {
                    continue;
                }
                if boundary_cancellation(v, w) >= half {
                    return false;
                }
            }
        }
    }
    true
}

/// Nielsen-reduce a generating set by elementary Nielsen transformations:
/// replace a generator by its product with another (either side, either
/// sign) whenever the result is smaller in the half-pair well-order, and
/// drop identities and duplicates. Every step preserves the generated
/// subgroup; termination follows because the multiset of keys strictly
/// decreases. The fixpoint is a free basis of the subgroup in which a
/// reduced product of k basis letters has free length at least k.
pub fn nielsen_reduced_basis(gens: &[Word]) -> Vec<Word> {
    let mut set: Vec<Word> = Vec::new();
    for g in gens {
        if !g.is_empty() {
            let n = normalize(g);
            if !set.contains(&n) {
                set.push(n);
            }
        }
    }
    'outer: loop {
        for j in 0..set.len() {
            for i in 0..set.len() {
                if i == j {
                    continue;
                }
                for u in [set[i].clone(), set[i].invert()] {
                    let candidates = [
                        u.concat(&set[j]).expect("same alphabet"),
                        set[j].concat(&u).expect("same alphabet"),
                    ];
                    for candidate in candidates {
                        if candidate.is_empty() {
                            // set[j] is another generator or its inverse
                            set.remove(j);
                            continue 'outer;
                        }
                        let n = normalize(&candidate);
                        if key_cmp(&n, &set[j]) == Ordering::Less {
                            if set.iter().enumerate().any(|(k, w)| k != j && *w == n) {
                                set.remove(j);
                            } else {
                                set[j] = n;
                            }
                            continue 'outer;
                        }
                    }
                }
            }
        }
        break;
    }
    assert!(
        is_half_safe(&set),
        "Nielsen reduction reached a fixpoint that is not half-safe: {set:?}"
    );
    set
}

/// All elements of the subgroup generated by `gens` expressible as reduced
/// products of at most `max_factors` generators/inverses, restricted to
/// free length at most `max_len`.
pub fn subgroup_ball(gens: &[Word], max_factors: usize, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    if gens.is_empty() {
        return out;
    }
    let alphabet = gens[0].alphabet();
    let max_gen_len = gens.iter().map(|g| g.len()).max().unwrap_or(0);
    let empty = Word::empty(alphabet);
    out.insert(empty.clone());

    // Depth-first over reduced generator words (no factor directly followed
    // by its inverse), pruning branches that cannot shrink back to max_len.
    type Frame = (Word, usize, Option<(usize, bool)>);
    let mut stack: Vec<Frame> = vec![(empty, 0, None)];
    while let Some((current, depth, last)) = stack.pop() {
        if depth == max_factors {
            continue;
        }
        for (k, g) in gens.iter().enumerate() {
            for positive in [true, false] {
                if last == Some((k, !positive)) {
                    continue;
                }
                let factor = if positive { g.clone() } else { g.invert() };
                let next = current.concat(&factor).expect("same alphabet");
                let remaining = max_factors - depth - 1;
                if next.len() > max_len + remaining * max_gen_len {
                    continue;
                }
                if next.len() <= max_len {
                    out.insert(next.clone());
                }
                stack.push((next, depth + 1, Some((k, positive))));
            }
        }
    }
    out
}

/// Every freely reduced word over `alphabet` of length at most `max_len`,
/// the empty word included.
pub fn all_reduced_words(alphabet: Alphabet, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty(alphabet)];
    let mut frontier = vec![Vec::<SignedLetter>::new()];
    for _ in 0..max_len {
        let mut next_frontier = Vec::new();
        for prefix in &frontier {
            for index in alphabet.letters() {
                for positive in [true, false] {
                    let letter = if positive {
                        SignedLetter::positive(index)
                    } else {
                        SignedLetter::negative(index)
                    };
                    if let Some(last) = prefix.last() {
                        if last.cancels(&letter) {
                            continue;
                        }
                    }
                    let mut word = prefix.clone();
                    word.push(letter);
                    out.push(Word::reduce(alphabet, word.iter().copied()).expect("in range"));
                    next_frontier.push(word);
                }
            }
        }
        frontier = next_frontier;
    }
    out
}

/// Brute-force reachability closure: reachable[i][j] by directed paths.
pub fn reachability_closure(
    vertices: &[stallings::graph::VertexId],
    g: &stallings::graph::LabeledDigraph,
) -> Vec<Vec<bool>> {
    let n = vertices.len();
    let pos = |v: stallings::graph::VertexId| vertices.iter().position(|&u| u == v).unwrap();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in g.edge_ids() {
        let edge = g.edge(e).unwrap();
        reach[pos(edge.tail)][pos(edge.head)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}
