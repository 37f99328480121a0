//! Shared fixtures for the criterion benchmarks.

use fractile::ifs::presets;
use fractile::interior::{find_interior_word, Word, DEFAULT_FRONTIER_CAP};
use fractile::neighbor::DEFAULT_CANDIDATE_CAP;
use fractile::{build_neighbor_graph, IfsSpec, NeighborFilter, NeighborGraph};

/// Preset and filter pairs timed by the neighborhood benches, smallest first.
pub const NEIGHBORHOOD_FIXTURES: &[(&str, NeighborFilter)] = &[
    ("chair", NeighborFilter::Continuum),
    ("example-a-prime", NeighborFilter::All),
    ("example-b", NeighborFilter::All),
];

pub struct Fixture {
    pub spec: IfsSpec,
    pub graph: NeighborGraph,
    pub filter: NeighborFilter,
    pub seed: Word,
}

pub fn fixture(name: &str, filter: NeighborFilter) -> Fixture {
    let spec = presets::load(name);
    let graph = build_neighbor_graph(&spec, DEFAULT_CANDIDATE_CAP).expect("presets are finite type");
    let seed = find_interior_word(&graph, filter, DEFAULT_FRONTIER_CAP).expect("presets have interior words");
    Fixture {
        spec,
        graph,
        filter,
        seed,
    }
}
