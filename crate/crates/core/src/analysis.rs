//! The full pipeline from a spec to a zoomable neighborhood chain.

use thiserror::Error;

use crate::ifs::IfsSpec;
use crate::interior::{find_interior_word, InteriorError, Word, DEFAULT_FRONTIER_CAP};
use crate::neighbor::{build_neighbor_graph, NeighborError, NeighborFilter, NeighborGraph, DEFAULT_CANDIDATE_CAP};
use crate::neighborhood::{
    build_neighborhood_graph, stats, NeighborhoodError, NeighborhoodGraph, StationaryDistribution, StatsReport,
};
use crate::zoom::ZoomModel;

pub const DEFAULT_NEIGHBORHOOD_CAP: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub filter: NeighborFilter,
    pub candidate_cap: usize,
    pub frontier_cap: usize,
    pub neighborhood_cap: usize,
    /// Interior seed; found by subset search when absent.
    pub seed_word: Option<Word>,
}

impl Default for AnalysisOptions {
    fn default() -> AnalysisOptions {
        AnalysisOptions {
            filter: NeighborFilter::default(),
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            frontier_cap: DEFAULT_FRONTIER_CAP,
            neighborhood_cap: DEFAULT_NEIGHBORHOOD_CAP,
            seed_word: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Neighbor(#[from] NeighborError),
    #[error(transparent)]
    Interior(#[from] InteriorError),
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub graph: NeighborGraph,
    pub neighborhoods: NeighborhoodGraph,
    pub stationary: StationaryDistribution,
    pub stats: StatsReport,
    pub model: ZoomModel,
}

impl Analysis {
    pub fn run(spec: &IfsSpec, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
        let graph = build_neighbor_graph(spec, opts.candidate_cap)?;
        Analysis::from_graph(graph, opts)
    }

    pub fn from_graph(graph: NeighborGraph, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
        let seed = match &opts.seed_word {
            Some(w) => w.clone(),
            None => find_interior_word(&graph, opts.filter, opts.frontier_cap)?,
        };
        let neighborhoods = build_neighborhood_graph(&graph, &seed, opts.filter, opts.neighborhood_cap)?;
        let stationary = neighborhoods.substitution_matrix().stationary_distribution()?;
        let stats = stats(&neighborhoods, &stationary);
        let model = ZoomModel::new(&neighborhoods, &stationary);
        Ok(Analysis {
            graph,
            neighborhoods,
            stationary,
            stats,
            model,
        })
    }
}
