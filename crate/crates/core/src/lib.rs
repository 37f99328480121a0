//! Boundary and interior automata of finite-type self-similar sets in the plane.
//!
//! The pipeline runs from an exact [`ifs::IfsSpec`] to the [`neighbor::NeighborGraph`]
//! (which pieces touch, and how), then to an interior witness word, the
//! [`neighborhood::NeighborhoodGraph`] of interior neighborhood types with their
//! stationary frequencies, and finally the discrete magnification flow in [`zoom`].

pub mod analysis;
pub mod exact;
pub mod export;
pub mod ifs;
pub mod interior;
pub mod neighbor;
pub mod neighborhood;
pub mod render;
pub mod search;
pub mod spectral;
pub mod zoom;

pub use analysis::{Analysis, AnalysisError, AnalysisOptions};
pub use exact::{Gauss, PlanarMap, Scalar};
pub use ifs::{IfsError, IfsSpec};
pub use neighbor::{build_neighbor_graph, NeighborError, NeighborFilter, NeighborGraph};
pub use neighborhood::{build_neighborhood_graph, NeighborhoodError, NeighborhoodGraph};
pub use zoom::{Action, ZoomError, ZoomModel, ZoomState};
