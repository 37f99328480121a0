//! JSON and CSV exports. Neighbor-graph vertices keep their 0-based indices
//! (0 is id); neighborhoods are numbered `1..=K`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::ifs::map_to_json;
use crate::neighbor::{NeighborFilter, NeighborGraph, VertexKind};
use crate::neighborhood::{NeighborhoodGraph, StationaryDistribution, StatsReport};

pub fn neighbor_graph_json(g: &NeighborGraph) -> Value {
    let vertices: Vec<Value> = g
        .vertices
        .iter()
        .enumerate()
        .map(|(v, f)| {
            let (kind, dim) = match g.classes[v] {
                None => ("identity", Value::Null),
                Some(c) => (
                    match c.kind {
                        VertexKind::Point => "point",
                        VertexKind::Continuum => "continuum",
                    },
                    json!(c.dimension),
                ),
            };
            json!({ "index": v, "map": map_to_json(f), "display": f.to_string(), "kind": kind, "dimension": dim })
        })
        .collect();
    let edges: Vec<Value> = g
        .edges
        .iter()
        .map(|e| json!([e.from, e.to, e.first, e.second]))
        .collect();
    let continuum = g.restricted(NeighborFilter::Continuum);
    json!({
        "spec": g.spec.to_json(),
        "radius": g.radius.to_string(),
        "vertices": vertices,
        "edges": edges,
        "counts": {
            "neighbors": g.neighbor_count(),
            "points": g.point_count(),
            "continuum": g.continuum_count(),
            "edges": g.edge_count(),
            "continuumVertices": continuum.vertex_count(),
            "continuumEdges": continuum.edge_count(),
        },
        "boundaryDimension": g.boundary_dimension(),
        "connected": g.is_connected(),
    })
}

pub fn stats_json(st: &StatsReport) -> Value {
    json!({
        "K": st.k,
        "minNbrs": st.min_neighbors,
        "maxNbrs": st.max_neighbors,
        "avgNbrs": st.avg_neighbors,
        "bucketFreq": st.bucket_freq,
        "heavyFreq": st.heavy_freq,
        "leading": st.leading.iter().map(|&(k, p)| json!({ "index": k + 1, "p": p })).collect::<Vec<_>>(),
    })
}

pub fn neighborhood_graph_json(ng: &NeighborhoodGraph, p: &StationaryDistribution, st: &StatsReport) -> Value {
    let successor: Vec<Vec<usize>> = (0..ng.len())
        .map(|k| ng.successors(k).iter().map(|&x| x as usize + 1).collect())
        .collect();
    let substitution: Vec<[usize; 3]> = ng
        .substitution_matrix()
        .triples()
        .map(|(k, q, c)| [k + 1, q + 1, c as usize])
        .collect();
    let exact = p
        .exact
        .as_ref()
        .map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>());
    json!({
        "filter": ng.filter.to_string(),
        "seedWord": ng.seed.to_string(),
        "K": ng.len(),
        "m": ng.m(),
        "neighborhoods": ng.nbhs.iter().map(|n| n.members()).collect::<Vec<_>>(),
        "successor": successor,
        "substitution": substitution,
        "stationary": p.p,
        "stationaryExact": exact,
        "stats": stats_json(st),
    })
}

/// One row per neighborhood: `index,size,p,s1,...,sm` with 1-based indices.
pub fn neighborhood_csv(ng: &NeighborhoodGraph, p: &StationaryDistribution) -> String {
    let mut out = String::from("index,size,p");
    for i in 1..=ng.m() {
        let _ = write!(out, ",s{i}");
    }
    out.push('\n');
    for k in 0..ng.len() {
        let _ = write!(out, "{},{},{}", k + 1, ng.nbhs[k].len(), p.p[k]);
        for &s in ng.successors(k) {
            let _ = write!(out, ",{}", s + 1);
        }
        out.push('\n');
    }
    out
}
