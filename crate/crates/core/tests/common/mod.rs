//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_traits::ToPrimitive;

use fractile::ifs::presets;
use fractile::interior::{find_interior_word, Neighborhood, Word};
use fractile::neighbor::{build_neighbor_graph, NeighborFilter, NeighborGraph, DEFAULT_CANDIDATE_CAP, ID};
use fractile::neighborhood::{build_neighborhood_graph, NeighborhoodGraph};
use fractile::zoom::ZoomModel;
use fractile::{IfsSpec, PlanarMap};

pub fn graph(name: &str) -> NeighborGraph {
    build_neighbor_graph(&presets::load(name), DEFAULT_CANDIDATE_CAP).unwrap()
}

pub fn words(m: usize, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=m as u8).map(move |l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    out
}

/// Whether `A` and `h(A)` come within `2·r^depth·R` at every level down to
/// `depth`, by recursive subdivision of piece pairs in floating point.
pub fn pieces_touch(spec: &IfsSpec, h: &PlanarMap, depth: u32) -> bool {
    let maps: Vec<_> = spec.maps.iter().map(PlanarMap::to_float).collect();
    let radius = spec.attractor_radius().to_f64().unwrap();
    let r = spec.ratio();
    let zero = Complex64::new(0.0, 0.0);
    let mut stack = vec![(PlanarMap::identity().to_float(), h.to_float(), 0u32)];
    while let Some((a, b, k)) = stack.pop() {
        let gap = (a.apply(zero) - b.apply(zero)).norm();
        if gap > 2.0 * r.powi(k as i32) * radius + 1e-9 {
            continue;
        }
        if k == depth {
            return true;
        }
        for f in &maps {
            for g in &maps {
                stack.push((a.compose(f), b.compose(g), k + 1));
            }
        }
    }
    false
}

/// The neighbor graph's vertices are exactly the maps `f_u⁻¹ f_v` (first letters
/// differ) whose pieces touch, for all word pairs up to length `max_len`.
pub fn check_vertex_oracle(name: &str, max_len: usize) -> usize {
    let g = graph(name);
    let spec = &g.spec;
    let mut tested: BTreeSet<PlanarMap> = BTreeSet::new();
    let mut touching_count = 0;
    for len in 1..=max_len {
        let ws = words(spec.len(), len);
        let maps: Vec<PlanarMap> = ws.iter().map(|w| spec.word_map(w)).collect();
        let inverses: Vec<PlanarMap> = maps.iter().map(PlanarMap::invert).collect();
        for (a, u) in ws.iter().enumerate() {
            for (b, v) in ws.iter().enumerate() {
                if u[0] == v[0] {
                    continue;
                }
                let h = inverses[a].compose(&maps[b]);
                if !tested.insert(h.clone()) {
                    continue;
                }
                let touching = pieces_touch(spec, &h, 10);
                let vertex = g.index_of(&h).is_some_and(|v| v != ID);
                assert_eq!(touching, vertex, "{name}: {u:?} vs {v:?} gives {h}");
                touching_count += touching as usize;
            }
        }
    }
    assert!(touching_count > 0 && touching_count < tested.len());
    tested.len()
}

/// `N_w` by definition: the vertices `f_w⁻¹ f_v` over all other words of the same length.
pub fn neighborhood_by_definition(g: &NeighborGraph, filter: NeighborFilter, w: &[u8]) -> Neighborhood {
    let fw_inv = g.spec.word_map(w).invert();
    let members = words(g.m(), w.len())
        .into_iter()
        .filter(|v| v.as_slice() != w)
        .filter_map(|v| g.index_of(&fw_inv.compose(&g.spec.word_map(&v))))
        .filter(|&k| k != ID && (filter == NeighborFilter::All || !g.is_point(k)))
        .map(|k| k as u32)
        .collect();
    Neighborhood::from_unsorted(members)
}

pub fn model(name: &str, filter: NeighborFilter, seed: Option<&str>) -> (NeighborhoodGraph, ZoomModel) {
    let g = graph(name);
    let seed = seed.map_or_else(
        || find_interior_word(&g, filter, 1_000_000).unwrap(),
        Word::from,
    );
    let ng = build_neighborhood_graph(&g, &seed, filter, usize::MAX).unwrap();
    let p = ng.substitution_matrix().stationary_distribution().unwrap();
    let zm = ZoomModel::new(&ng, &p);
    (ng, zm)
}

/// Graph structure keyed by member sets instead of interning order.
pub fn relabeled(ng: &NeighborhoodGraph) -> BTreeMap<Neighborhood, Vec<Neighborhood>> {
    (0..ng.len())
        .map(|k| {
            let succ = ng.successors(k).iter().map(|&s| ng.nbhs[s as usize].clone()).collect();
            (ng.nbhs[k].clone(), succ)
        })
        .collect()
}
