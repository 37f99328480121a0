//! Random search for finite-type systems with Gaussian-integer translations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::{Gauss, PlanarMap};
use crate::ifs::IfsSpec;
use crate::neighbor::{build_neighbor_graph, NeighborError};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Linear parts of the maps; translations are sampled.
    pub rotations: Vec<Gauss>,
    pub range: i64,
    pub trials: usize,
    pub cap: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            rotations: vec![
                Gauss::ratio((0, 1), (1, 2)),
                Gauss::ratio((-1, 2), (0, 1)),
                Gauss::ratio((0, 1), (-1, 2)),
            ],
            range: 3,
            trials: 100,
            cap: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchHit {
    pub translations: Vec<(i64, i64)>,
    pub spec: IfsSpec,
    pub neighbors: usize,
    pub edges: usize,
    pub boundary_dimension: f64,
    pub connected: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchTally {
    pub finite_type: usize,
    pub overlap: usize,
    pub too_large: usize,
    pub invalid: usize,
}

pub fn system_with_translations(rotations: &[Gauss], translations: &[(i64, i64)]) -> Option<IfsSpec> {
    let maps = rotations
        .iter()
        .zip(translations)
        .map(|(u, &(a, b))| PlanarMap::new(u.clone(), false, Gauss::int(a, b)))
        .collect();
    IfsSpec::new("search", maps).ok()
}

/// Keeps a trial if its neighbor graph closes under `cap`. Deterministic per seed.
pub fn search(cfg: &SearchConfig) -> (Vec<SearchHit>, SearchTally) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut hits = Vec::new();
    let mut tally = SearchTally::default();
    for _ in 0..cfg.trials {
        let translations: Vec<(i64, i64)> = cfg
            .rotations
            .iter()
            .map(|_| {
                (
                    rng.gen_range(-cfg.range..=cfg.range),
                    rng.gen_range(-cfg.range..=cfg.range),
                )
            })
            .collect();
        let Some(spec) = system_with_translations(&cfg.rotations, &translations) else {
            tally.invalid += 1;
            continue;
        };
        match build_neighbor_graph(&spec, cfg.cap) {
            Ok(g) => {
                tally.finite_type += 1;
                hits.push(SearchHit {
                    translations,
                    neighbors: g.neighbor_count(),
                    edges: g.edge_count(),
                    boundary_dimension: g.boundary_dimension(),
                    connected: g.is_connected(),
                    spec,
                });
            }
            Err(NeighborError::OverlapDetected { .. }) => tally.overlap += 1,
            Err(_) => tally.too_large += 1,
        }
    }
    (hits, tally)
}
