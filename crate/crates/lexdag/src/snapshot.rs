//! JSON state export used by golden tests and the CLI.
//!
//! Field order is fixed by the struct, so two equal states serialize to
//! byte-identical JSON.

use serde::Serialize;

use crate::graph::{Digraph, VertexId};
use crate::label::Label;
use crate::ranks::RankAssignment;

#[derive(Serialize, Clone, PartialEq, Debug)]
pub struct RankSection {
    pub mode: String,
    pub q: f64,
    pub seed: u64,
    /// `[vertex, rank]` for every ranked vertex, in vertex order.
    pub vertex: Vec<(VertexId, u64)>,
    /// ArcQ only: `[arc index, rank]` for every ranked arc.
    pub arc: Vec<(usize, u64)>,
}

#[derive(Serialize, Clone, PartialEq, Debug)]
pub struct Snapshot {
    pub vertices: usize,
    /// Arcs in insertion order.
    pub arcs: Vec<(VertexId, VertexId)>,
    pub ranks: RankSection,
    /// Rendered labels (`v17#42|v3#99`), indexed by vertex.
    pub labels: Vec<String>,
    pub halted: bool,
    /// Queue variant only: per vertex, `[neighbor, cached label]` sorted by
    /// neighbor id.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caches: Option<Vec<Vec<(VertexId, String)>>>,
}

impl Snapshot {
    pub fn capture(
        graph: &Digraph,
        ranks: &RankAssignment,
        labels: &[Label],
        halted: bool,
        caches: Option<Vec<Vec<(VertexId, String)>>>,
    ) -> Snapshot {
        Snapshot {
            vertices: graph.vertex_count(),
            arcs: graph.arcs().to_vec(),
            ranks: RankSection {
                mode: ranks.mode().as_str().to_string(),
                q: ranks.q(),
                seed: ranks.seed(),
                vertex: ranks
                    .ranked_vertices()
                    .map(|(v, r)| (v, r.value()))
                    .collect(),
                arc: ranks
                    .arc_ranks()
                    .iter()
                    .enumerate()
                    .filter_map(|(i, (_, r))| r.map(|r| (i, r.value())))
                    .collect(),
            },
            labels: labels.iter().map(|l| l.to_string()).collect(),
            halted,
            caches,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }
}
