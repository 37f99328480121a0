use fractile::build_neighborhood_graph;
use fractile_bench::{fixture, NEIGHBORHOOD_FIXTURES};

#[test]
fn fixtures_build_and_grow() {
    let sizes: Vec<usize> = NEIGHBORHOOD_FIXTURES
        .iter()
        .map(|&(name, filter)| {
            let f = fixture(name, filter);
            build_neighborhood_graph(&f.graph, &f.seed, f.filter, 10_000_000).unwrap().len()
        })
        .collect();
    assert_eq!(sizes, [7, 333, 6291]);
}
