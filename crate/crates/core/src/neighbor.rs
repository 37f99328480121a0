//! The neighbor graph (boundary automaton) of a finite-type IFS.
//!
//! Vertices are the identity and the neighbor maps `h = f_v⁻¹ f_w` with
//! `A ∩ h(A) ≠ ∅`. An edge `(h, h', i, j)` records `h' = f_i⁻¹ h f_j`. The
//! construction is a breadth-first closure over exact candidate maps, pruned
//! by the displacement bound `|h(0)| ≤ 2R`, followed by removal of every
//! candidate without an infinite path.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::exact::{scalar_int, PlanarMap, Scalar};
use crate::ifs::IfsSpec;
use crate::spectral::{SparseRows, SpectralProfile};

pub const DEFAULT_CANDIDATE_CAP: usize = 100_000;

/// Vertex index of the identity map.
pub const ID: usize = 0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NeighborError {
    #[error("not of finite type: {count} candidate maps exceed the cap of {cap}")]
    NotFiniteType { cap: usize, count: usize },
    #[error("exact overlap: pieces {first} and {second} coincide")]
    OverlapDetected { first: String, second: String },
    #[error("vertex 0 is the identity and has no class")]
    IdentityVertex,
    #[error("vertex {0} out of range")]
    NoSuchVertex(usize),
}

/// Directed edge `from → to` with double label `(first, second)`, labels 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub first: u8,
    pub second: u8,
}

impl Edge {
    /// The defining `(i, i)` loops at the identity.
    pub fn is_identity_loop(&self) -> bool {
        self.from == ID && self.to == ID
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Continuum,
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexClass {
    pub kind: VertexKind,
    pub dimension: f64,
}

/// Which neighbor maps take part in neighborhoods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NeighborFilter {
    /// Only neighbors meeting the reference set in more than one point.
    Continuum,
    #[default]
    All,
}

impl std::str::FromStr for NeighborFilter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "continuum" => Ok(NeighborFilter::Continuum),
            "all" => Ok(NeighborFilter::All),
            other => Err(format!("unknown filter {other:?} (expected continuum|all)")),
        }
    }
}

impl std::fmt::Display for NeighborFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NeighborFilter::Continuum => "continuum",
            NeighborFilter::All => "all",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NeighborGraph {
    pub spec: IfsSpec,
    /// Vertex maps in BFS discovery order; index 0 is the identity.
    pub vertices: Vec<PlanarMap>,
    /// Edges, including the `(i, i)` loops at the identity.
    pub edges: Vec<Edge>,
    /// Pruning radius `R` used during construction.
    pub radius: Scalar,
    /// `None` for the identity.
    pub classes: Vec<Option<VertexClass>>,
    /// Number of candidate maps examined before pruning dead ends.
    pub candidates: usize,
}

struct Candidates {
    maps: Vec<PlanarMap>,
    index: HashMap<PlanarMap, usize>,
    /// How each candidate was first reached: `(parent, i, j)`.
    origin: Vec<Option<(usize, u8, u8)>>,
}

impl Candidates {
    fn words(&self, mut v: usize) -> (Vec<u8>, Vec<u8>) {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        while let Some((parent, i, j)) = self.origin[v] {
            left.push(i);
            right.push(j);
            v = parent;
        }
        left.reverse();
        right.reverse();
        (left, right)
    }
}

fn word_string(w: &[u8]) -> String {
    w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("")
}

/// Builds the neighbor graph, failing if more than `cap` candidate maps arise
/// or if two distinct pieces coincide.
pub fn build_neighbor_graph(spec: &IfsSpec, cap: usize) -> Result<NeighborGraph, NeighborError> {
    let m = spec.len();
    let radius = spec.attractor_radius();
    let bound = &radius * &radius * scalar_int(4);
    let maps = &spec.maps;
    let inverses: Vec<PlanarMap> = maps.iter().map(PlanarMap::invert).collect();

    let mut cands = Candidates {
        maps: vec![PlanarMap::identity()],
        index: HashMap::from([(PlanarMap::identity(), ID)]),
        origin: vec![None],
    };
    let mut cand_edges: Vec<Edge> = Vec::new();
    let mut queue = VecDeque::from([ID]);

    while let Some(h) = queue.pop_front() {
        let current = cands.maps[h].clone();
        for (i, inv) in inverses.iter().enumerate() {
            let left = inv.compose(&current);
            for (j, fj) in maps.iter().enumerate() {
                if h == ID && i == j {
                    continue;
                }
                let next = left.compose(fj);
                if next.is_identity() {
                    let (mut v, mut w) = cands.words(h);
                    v.push(i as u8 + 1);
                    w.push(j as u8 + 1);
                    return Err(NeighborError::OverlapDetected {
                        first: word_string(&v),
                        second: word_string(&w),
                    });
                }
                if next.t.norm_sq() > bound {
                    continue;
                }
                let target = match cands.index.get(&next) {
                    Some(&k) => k,
                    None => {
                        let k = cands.maps.len();
                        if k > cap {
                            return Err(NeighborError::NotFiniteType { cap, count: k });
                        }
                        cands.maps.push(next.clone());
                        cands.index.insert(next, k);
                        cands.origin.push(Some((h, i as u8 + 1, j as u8 + 1)));
                        queue.push_back(k);
                        k
                    }
                };
                cand_edges.push(Edge {
                    from: h,
                    to: target,
                    first: i as u8 + 1,
                    second: j as u8 + 1,
                });
            }
        }
    }
    let total = cands.maps.len();

    // Keep candidates with an infinite path: peel off out-degree-0 vertices.
    let mut out_degree = vec![0usize; total];
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); total];
    for e in &cand_edges {
        if e.from != ID {
            out_degree[e.from] += 1;
            reverse[e.to].push(e.from);
        }
    }
    let mut alive = vec![true; total];
    let mut dead: Vec<usize> = (1..total).filter(|&v| out_degree[v] == 0).collect();
    while let Some(v) = dead.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &u in &reverse[v] {
            out_degree[u] -= 1;
            if out_degree[u] == 0 && alive[u] {
                dead.push(u);
            }
        }
    }

    // Restrict to what the identity reaches, preserving discovery order.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); total];
    for e in &cand_edges {
        if alive[e.from] && alive[e.to] {
            adjacency[e.from].push(e.to);
        }
    }
    let mut reached = vec![false; total];
    reached[ID] = true;
    let mut stack = vec![ID];
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v] {
            if !reached[w] {
                reached[w] = true;
                stack.push(w);
            }
        }
    }
    let mut new_index = vec![usize::MAX; total];
    let mut vertices = Vec::new();
    for v in 0..total {
        if reached[v] {
            new_index[v] = vertices.len();
            vertices.push(cands.maps[v].clone());
        }
    }
    let mut edges: Vec<Edge> = (1..=m as u8)
        .map(|i| Edge {
            from: ID,
            to: ID,
            first: i,
            second: i,
        })
        .collect();
    edges.extend(cand_edges.iter().filter(|e| reached[e.from] && reached[e.to]).map(|e| Edge {
        from: new_index[e.from],
        to: new_index[e.to],
        first: e.first,
        second: e.second,
    }));

    let mut graph = NeighborGraph {
        spec: spec.clone(),
        vertices,
        edges,
        radius,
        classes: Vec::new(),
        candidates: total,
    };
    graph.classes = graph.compute_classes();
    Ok(graph)
}

impl NeighborGraph {
    pub fn m(&self) -> usize {
        self.spec.len()
    }

    pub fn ratio(&self) -> f64 {
        self.spec.ratio()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn neighbor_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Edges excluding the `(i, i)` loops at the identity.
    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_identity_loop()).count()
    }

    pub fn index_of(&self, map: &PlanarMap) -> Option<usize> {
        self.vertices.iter().position(|v| v == map)
    }

    pub fn class(&self, v: usize) -> Result<VertexClass, NeighborError> {
        if v == ID {
            return Err(NeighborError::IdentityVertex);
        }
        self.classes
            .get(v)
            .copied()
            .flatten()
            .ok_or(NeighborError::NoSuchVertex(v))
    }

    pub fn is_point(&self, v: usize) -> bool {
        matches!(self.classes.get(v), Some(Some(c)) if c.kind == VertexKind::Point)
    }

    pub fn point_count(&self) -> usize {
        (1..self.vertex_count()).filter(|&v| self.is_point(v)).count()
    }

    pub fn continuum_count(&self) -> usize {
        self.neighbor_count() - self.point_count()
    }

    fn non_identity_rows(&self) -> SparseRows {
        let mut rows: SparseRows = vec![Vec::new(); self.vertex_count()];
        for e in self.edges.iter().filter(|e| e.from != ID) {
            match rows[e.from].iter_mut().find(|x| x.0 == e.to) {
                Some(x) => x.1 += 1.0,
                None => rows[e.from].push((e.to, 1.0)),
            }
        }
        rows
    }

    fn compute_classes(&self) -> Vec<Option<VertexClass>> {
        let n = self.vertex_count();
        let rows = self.non_identity_rows();
        let profile = SpectralProfile::new(&rows);
        let log_inv_r = (1.0 / self.ratio()).ln();
        let out_degree: Vec<usize> = rows
            .iter()
            .map(|r| r.iter().map(|x| x.1 as usize).sum())
            .collect();
        // A vertex has exactly one path of every length iff everything it reaches
        // has out-degree one; this is the bounded single-chain criterion.
        let mut single_chain = vec![true; n];
        for comp in &profile.components {
            let ok = comp.iter().all(|&v| {
                out_degree[v] == 1
                    && rows[v]
                        .iter()
                        .all(|&(w, _)| profile.component_of[w] == profile.component_of[v] || single_chain[w])
            });
            for &v in comp {
                single_chain[v] = ok;
            }
        }
        (0..n)
            .map(|v| {
                if v == ID {
                    return None;
                }
                if single_chain[v] {
                    return Some(VertexClass {
                        kind: VertexKind::Point,
                        dimension: 0.0,
                    });
                }
                let rho = profile.reachable_radius[v];
                let dimension = if rho <= 1.0 { 0.0 } else { rho.ln() / log_inv_r };
                Some(VertexClass {
                    kind: VertexKind::Continuum,
                    dimension,
                })
            })
            .collect()
    }

    /// Class of a neighbor vertex: point or continuum, with the Hausdorff
    /// dimension of its boundary set `ln ρ_v / ln(1/r)`.
    pub fn classify_vertex(&self, v: usize) -> Result<VertexClass, NeighborError> {
        self.class(v)
    }

    /// Dimension of the dynamical boundary: the largest boundary-set dimension.
    pub fn boundary_dimension(&self) -> f64 {
        let rho = SpectralProfile::new(&self.non_identity_rows()).spectral_radius();
        if rho <= 1.0 {
            0.0
        } else {
            rho.ln() / (1.0 / self.ratio()).ln()
        }
    }

    /// Whether the first-level pieces form a connected intersection graph.
    pub fn is_connected(&self) -> bool {
        let m = self.m();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for e in self.edges.iter().filter(|e| e.from == ID && e.to != ID) {
            let a = find(&mut parent, e.first as usize - 1);
            let b = find(&mut parent, e.second as usize - 1);
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (1..m).all(|i| find(&mut parent, i) == root)
    }

    /// Whether the vertex set is closed under inversion, with edges
    /// `(h → h', i, j)` mirrored by `(h⁻¹ → h'⁻¹, j, i)`.
    pub fn is_inverse_closed(&self) -> bool {
        let index: HashMap<&PlanarMap, usize> =
            self.vertices.iter().enumerate().map(|(k, v)| (v, k)).collect();
        let inverse: Option<Vec<usize>> = self
            .vertices
            .iter()
            .map(|v| index.get(&v.invert()).copied())
            .collect();
        let Some(inverse) = inverse else {
            return false;
        };
        let set: std::collections::HashSet<Edge> = self.edges.iter().copied().collect();
        self.edges.iter().all(|e| {
            set.contains(&Edge {
                from: inverse[e.from],
                to: inverse[e.to],
                first: e.second,
                second: e.first,
            })
        })
    }

    /// Graph with point vertices (and their edges) removed when `filter` is
    /// `Continuum`; vertex order is preserved.
    pub fn restricted(&self, filter: NeighborFilter) -> NeighborGraph {
        if filter == NeighborFilter::All {
            return self.clone();
        }
        let keep: Vec<bool> = (0..self.vertex_count())
            .map(|v| v == ID || !self.is_point(v))
            .collect();
        let mut new_index = vec![usize::MAX; keep.len()];
        let mut vertices = Vec::new();
        let mut classes = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                new_index[v] = vertices.len();
                vertices.push(self.vertices[v].clone());
                classes.push(self.classes[v]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.from] && keep[e.to])
            .map(|e| Edge {
                from: new_index[e.from],
                to: new_index[e.to],
                ..*e
            })
            .collect();
        NeighborGraph {
            spec: self.spec.clone(),
            vertices,
            edges,
            radius: self.radius.clone(),
            classes,
            candidates: self.candidates,
        }
    }

    /// Outgoing edges of `v`.
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == v)
    }

    /// Vertex indices sorted by the canonical map order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by(|&a, &b| self.vertices[a].cmp(&self.vertices[b]));
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{Gauss, PlanarMap};
    use crate::ifs::presets;

    fn translation_ifs(ts: &[(i64, i64)]) -> IfsSpec {
        let maps = ts
            .iter()
            .map(|&(a, b)| PlanarMap::new(Gauss::ratio((1, 2), (0, 1)), false, Gauss::int(a, b)))
            .collect();
        IfsSpec::new("t", maps).unwrap()
    }

    #[test]
    fn chair_builds() {
        let g = build_neighbor_graph(&presets::load("chair"), DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(g.vertices[ID].is_identity());
        assert!(g.is_inverse_closed());
        assert!(g.is_connected());
        assert!((g.boundary_dimension() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn every_neighbor_has_an_out_edge() {
        for name in ["chair", "fractal-square", "sierpinski", "example-a"] {
            let g = build_neighbor_graph(&presets::load(name), DEFAULT_CANDIDATE_CAP).unwrap();
            for v in 1..g.vertex_count() {
                assert!(g.out_edges(v).next().is_some(), "{name} vertex {v}");
            }
        }
    }

    #[test]
    fn deterministic_order() {
        let spec = presets::load("example-a");
        let a = build_neighbor_graph(&spec, DEFAULT_CANDIDATE_CAP).unwrap();
        let b = build_neighbor_graph(&spec, DEFAULT_CANDIDATE_CAP).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn overlap_is_detected() {
        // v = 0 for all three maps: f2 f2 = f1 f3 = z/4.
        let maps = vec![
            PlanarMap::new(Gauss::ratio((0, 1), (1, 2)), false, Gauss::zero()),
            PlanarMap::new(Gauss::ratio((-1, 2), (0, 1)), false, Gauss::zero()),
            PlanarMap::new(Gauss::ratio((0, 1), (-1, 2)), false, Gauss::zero()),
        ];
        let spec = IfsSpec::new("zero", maps).unwrap();
        match build_neighbor_graph(&spec, DEFAULT_CANDIDATE_CAP) {
            Err(NeighborError::OverlapDetected { first, second }) => {
                let a = spec.word_map(&first.bytes().map(|b| b - b'0').collect::<Vec<_>>());
                let b = spec.word_map(&second.bytes().map(|b| b - b'0').collect::<Vec<_>>());
                assert_eq!(a, b);
                assert_ne!(first, second);
            }
            other => panic!("expected overlap, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_maps_overlap_at_first_level() {
        let spec = translation_ifs(&[(0, 0), (0, 0)]);
        assert!(matches!(
            build_neighbor_graph(&spec, 100),
            Err(NeighborError::OverlapDetected { .. })
        ));
    }

    #[test]
    fn cap_reports_not_finite_type() {
        let err = build_neighbor_graph(&presets::load("example-b"), 10).unwrap_err();
        assert!(matches!(err, NeighborError::NotFiniteType { cap: 10, count: 11 }));
    }

    #[test]
    fn far_translation_still_touches() {
        // z/2 and z/2 + 10 generate the segment [0, 20]; the halves meet at 10.
        let g = build_neighbor_graph(&translation_ifs(&[(0, 0), (10, 0)]), 100).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.neighbor_count(), 2);
        assert!((1..3).all(|v| g.is_point(v)));
    }

    #[test]
    fn cantor_pieces_are_disconnected() {
        let third = Gauss::ratio((1, 3), (0, 1));
        let maps = vec![
            PlanarMap::new(third.clone(), false, Gauss::zero()),
            PlanarMap::new(third, false, Gauss::int(2, 0)),
        ];
        let g = build_neighbor_graph(&IfsSpec::new("cantor", maps).unwrap(), 100).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert!(!g.is_connected());
        assert_eq!(g.boundary_dimension(), 0.0);
    }

    #[test]
    fn sierpinski_neighbors_are_points() {
        let g = build_neighbor_graph(&presets::load("sierpinski"), DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(g.neighbor_count() > 0);
        for v in 1..g.vertex_count() {
            let c = g.classify_vertex(v).unwrap();
            assert_eq!(c.kind, VertexKind::Point);
            assert_eq!(c.dimension, 0.0);
        }
        assert_eq!(g.classify_vertex(ID), Err(NeighborError::IdentityVertex));
    }

    #[test]
    fn continuum_restriction_drops_points() {
        let g = build_neighbor_graph(&presets::load("chair"), DEFAULT_CANDIDATE_CAP).unwrap();
        let c = g.restricted(NeighborFilter::Continuum);
        assert_eq!(c.vertex_count(), g.vertex_count() - g.point_count());
        assert!((1..c.vertex_count()).all(|v| !c.is_point(v)));
    }
}
