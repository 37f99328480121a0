//! Interior pieces: successor sets, neighborhoods of words, and the search for
//! a word whose piece avoids every boundary set.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::neighbor::{NeighborFilter, NeighborGraph, ID};

pub const DEFAULT_FRONTIER_CAP: usize = 1_000_000;

/// Word over the alphabet `1..=m`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word([self.0.as_slice(), other.0.as_slice()].concat())
    }

    /// Parses digit strings such as `"214"`; every letter must lie in `1..=m`.
    pub fn parse(s: &str, m: usize) -> Result<Word, String> {
        let letters = s
            .chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d >= 1 && (d as usize) <= m => Ok(d as u8),
                _ => Err(format!("invalid letter {c:?} in word {s:?} (alphabet 1..={m})")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if letters.is_empty() {
            return Err("empty word".to_string());
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Word {
        Word(s.bytes().map(|b| b - b'0').collect())
    }
}

/// Sorted set of non-identity neighbor-graph vertices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Neighborhood(pub Vec<u32>);

impl Neighborhood {
    pub fn from_unsorted(mut v: Vec<u32>) -> Neighborhood {
        v.sort_unstable();
        v.dedup();
        Neighborhood(v)
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&(v as u32)).is_ok()
    }
}

/// Per-vertex, per-first-label successor lists of a neighbor graph, with the
/// identity's `(i, i)` loops dropped (the identity is never a neighbor).
/// Under [`NeighborFilter::Continuum`] point vertices are masked out, while
/// indices still refer to the full graph.
#[derive(Clone, Debug)]
pub struct SuccessorTable {
    m: usize,
    table: Vec<Vec<u32>>,
    /// `N_i = S({id}, i)`, the first-level neighborhoods.
    first_level: Vec<Neighborhood>,
    /// Non-identity vertices passing the filter: the start of the subset search.
    boundary: Vec<u32>,
}

impl SuccessorTable {
    pub fn new(g: &NeighborGraph, filter: NeighborFilter) -> SuccessorTable {
        let m = g.m();
        let keep = |v: usize| filter == NeighborFilter::All || v == ID || !g.is_point(v);
        let mut table = vec![Vec::new(); g.vertex_count() * m];
        for e in &g.edges {
            if e.to == ID || !keep(e.from) || !keep(e.to) {
                continue;
            }
            table[e.from * m + e.first as usize - 1].push(e.to as u32);
        }
        for list in &mut table {
            list.sort_unstable();
            list.dedup();
        }
        let first_level = (0..m)
            .map(|i| Neighborhood(table[ID * m + i].clone()))
            .collect();
        let boundary = (1..g.vertex_count()).filter(|&v| keep(v)).map(|v| v as u32).collect();
        SuccessorTable {
            m,
            table,
            first_level,
            boundary,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn boundary(&self) -> &[u32] {
        &self.boundary
    }

    /// Whether the subset state started at all boundary vertices empties along `w`.
    pub fn is_interior(&self, w: &Word) -> bool {
        let mut state = self.boundary.clone();
        for &l in w.letters() {
            if state.is_empty() {
                return true;
            }
            state = self.successor_set(&state, l);
        }
        state.is_empty()
    }

    pub fn first_level(&self, label: u8) -> &Neighborhood {
        &self.first_level[label as usize - 1]
    }

    /// `S(M, i)`: vertices reached from `M` by an edge with first label `i`.
    pub fn successor_set(&self, set: &[u32], label: u8) -> Vec<u32> {
        let i = label as usize - 1;
        let mut out: Vec<u32> = set
            .iter()
            .flat_map(|&v| self.table[v as usize * self.m + i].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `N_{wi} = N_i ∪ S(N_w, i)`.
    pub fn child_neighborhood(&self, nbh: &Neighborhood, label: u8) -> Neighborhood {
        let mut out = self.successor_set(&nbh.0, label);
        out.extend_from_slice(&self.first_level(label).0);
        Neighborhood::from_unsorted(out)
    }
}

/// `S(M, i)` over the full neighbor graph.
pub fn successor_set(g: &NeighborGraph, set: &[usize], label: u8) -> Vec<usize> {
    let table = SuccessorTable::new(g, NeighborFilter::All);
    let set: Vec<u32> = set.iter().map(|&v| v as u32).collect();
    table
        .successor_set(&set, label)
        .into_iter()
        .map(|v| v as usize)
        .collect()
}

/// Neighborhood of the piece `A_w` among same-level pieces of `A`.
pub fn neighborhood_of_word(g: &NeighborGraph, filter: NeighborFilter, w: &Word) -> Neighborhood {
    neighborhood_with_table(&SuccessorTable::new(g, filter), w)
}

pub fn neighborhood_with_table(table: &SuccessorTable, w: &Word) -> Neighborhood {
    let (&first, rest) = w.letters().split_first().expect("non-empty word");
    rest.iter().fold(table.first_level(first).clone(), |nbh, &l| {
        table.child_neighborhood(&nbh, l)
    })
}

/// Whether no edge path from a non-identity vertex carries `w` as first labels.
pub fn is_interior_word(g: &NeighborGraph, filter: NeighborFilter, w: &Word) -> bool {
    SuccessorTable::new(g, filter).is_interior(w)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InteriorError {
    #[error("subset search exceeded {cap} states without reaching the empty set")]
    FrontierExceeded { cap: usize },
    #[error("no interior word exists: the subset search closed without reaching the empty set")]
    NoInteriorWord,
}

/// Shortest word (lexicographically least among the shortest) whose subset
/// state, starting from all non-identity vertices, becomes empty.
pub fn find_interior_word(
    g: &NeighborGraph,
    filter: NeighborFilter,
    frontier_cap: usize,
) -> Result<Word, InteriorError> {
    let table = SuccessorTable::new(g, filter);
    let m = g.m() as u8;
    let start = table.boundary().to_vec();
    if start.is_empty() {
        // Disjoint pieces: every first-level piece is interior.
        return Ok(Word(vec![1]));
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::from([start.clone()]);
    let mut states: Vec<Vec<u32>> = vec![start];
    let mut queue = VecDeque::from([0usize]);
    let mut back: Vec<Option<(usize, u8)>> = vec![None];
    while let Some(k) = queue.pop_front() {
        for l in 1..=m {
            let next = table.successor_set(&states[k], l);
            if next.is_empty() {
                let mut word = vec![l];
                let mut cur = k;
                while let Some((p, letter)) = back[cur] {
                    word.push(letter);
                    cur = p;
                }
                word.reverse();
                return Ok(Word(word));
            }
            if seen.contains(&next) {
                continue;
            }
            if states.len() >= frontier_cap {
                return Err(InteriorError::FrontierExceeded { cap: frontier_cap });
            }
            seen.insert(next.clone());
            back.push(Some((k, l)));
            states.push(next);
            queue.push_back(states.len() - 1);
        }
    }
    Err(InteriorError::NoInteriorWord)
}

/// Random fallback: samples words of growing length and returns the first
/// interior one. Not minimal.
pub fn sample_interior_word(
    g: &NeighborGraph,
    filter: NeighborFilter,
    seed: u64,
    max_len: usize,
    tries: usize,
) -> Option<Word> {
    let table = SuccessorTable::new(g, filter);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = g.m() as u8;
    for len in 1..=max_len {
        for _ in 0..tries {
            let w = Word((0..len).map(|_| rng.gen_range(1..=m)).collect());
            if table.is_interior(&w) {
                return Some(w);
            }
        }
    }
    None
}

/// An interior word, with a flag telling whether it came from the exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorWitness {
    pub word: Word,
    pub minimal: bool,
}

/// Exhaustive search, falling back to random sampling when the frontier cap is hit.
pub fn interior_witness(
    g: &NeighborGraph,
    filter: NeighborFilter,
    frontier_cap: usize,
    seed: u64,
) -> Result<InteriorWitness, InteriorError> {
    match find_interior_word(g, filter, frontier_cap) {
        Ok(word) => Ok(InteriorWitness { word, minimal: true }),
        Err(InteriorError::FrontierExceeded { cap }) => sample_interior_word(g, filter, seed, 64, 10_000)
            .map(|word| InteriorWitness { word, minimal: false })
            .ok_or(InteriorError::FrontierExceeded { cap }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{Gauss, PlanarMap};
    use crate::ifs::presets;
    use crate::neighbor::{build_neighbor_graph, NeighborFilter, DEFAULT_CANDIDATE_CAP};

    const C: NeighborFilter = NeighborFilter::Continuum;

    fn chair() -> NeighborGraph {
        build_neighbor_graph(&presets::load("chair"), DEFAULT_CANDIDATE_CAP).unwrap()
    }

    fn vertex(g: &NeighborGraph, u: Gauss, t: Gauss) -> usize {
        g.index_of(&PlanarMap::new(u, false, t)).expect("vertex present")
    }

    #[test]
    fn chair_first_level_successors() {
        let g = chair();
        let m = vertex(&g, Gauss::i(), Gauss::int(0, -1));
        let n = vertex(&g, Gauss::int(0, -1), Gauss::int(0, 1));
        let p = vertex(&g, Gauss::one(), Gauss::int(-1, 0));
        let mut expect = vec![m, n, p];
        expect.sort();
        assert_eq!(successor_set(&g, &[ID], 1), expect);
    }

    #[test]
    fn chair_q_loops_on_one() {
        let g = chair();
        let q = vertex(&g, Gauss::one(), Gauss::int(1, 0));
        assert_eq!(successor_set(&g, &[q], 1), vec![q]);
    }

    #[test]
    fn empty_set_has_no_successors() {
        let g = chair();
        for i in 1..=4 {
            assert!(successor_set(&g, &[], i).is_empty());
        }
    }

    #[test]
    fn single_letters_give_first_level() {
        let g = chair();
        let table = SuccessorTable::new(&g, C);
        for i in 1..=4u8 {
            assert_eq!(
                neighborhood_of_word(&g, C, &Word(vec![i])),
                *table.first_level(i)
            );
        }
    }

    #[test]
    fn chair_interior_words() {
        let g = chair();
        // Exhaustive oracle over all words of length ≤ 2.
        let mut short: Vec<Word> = (1..=4u8).map(|a| Word(vec![a])).collect();
        short.extend((1..=4u8).flat_map(|a| (1..=4u8).map(move |b| Word(vec![a, b]))));
        let first = short.into_iter().find(|w| is_interior_word(&g, C, w)).unwrap();
        assert_eq!(first.len(), 2);
        assert_eq!(find_interior_word(&g, C, DEFAULT_FRONTIER_CAP).unwrap(), first);
        assert!(is_interior_word(&g, C, &Word::from("21")));
        assert!(is_interior_word(&g, C, &Word::from("31")));
        assert!(is_interior_word(&g, C, &Word::from("41")));
        assert!(!is_interior_word(&g, C, &Word::from("4")));
        for k in 1..8 {
            assert!(!is_interior_word(&g, C, &Word(vec![1; k])));
        }
    }

    #[test]
    fn frontier_cap_is_reported() {
        let g = chair();
        assert_eq!(
            find_interior_word(&g, C, 1),
            Err(InteriorError::FrontierExceeded { cap: 1 })
        );
        let w = interior_witness(&g, C, 1, 7).unwrap();
        assert!(!w.minimal);
        assert!(is_interior_word(&g, C, &w.word));
    }

    #[test]
    fn word_parsing() {
        assert_eq!(Word::parse("214", 4).unwrap(), Word(vec![2, 1, 4]));
        assert!(Word::parse("215", 4).is_err());
        assert!(Word::parse("", 4).is_err());
        assert_eq!(Word(vec![1, 2]).concat(&Word(vec![3])).to_string(), "123");
    }
}
