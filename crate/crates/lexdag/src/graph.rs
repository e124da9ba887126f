//! Growable directed graph storage shared by the engines and the simulator.

use std::collections::HashSet;

/// Vertex identifier; dense, 0-based.
pub type VertexId = u32;

/// Adjacency lists plus the arc list in insertion order. Duplicate arcs are
/// rejected by the callers, not here.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    out_adj: Vec<Vec<VertexId>>,
    in_adj: Vec<Vec<VertexId>>,
    arcs: Vec<(VertexId, VertexId)>,
    arc_set: HashSet<(VertexId, VertexId)>,
}

impl Digraph {
    pub fn with_vertices(n: usize) -> Digraph {
        Digraph {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            arcs: Vec::new(),
            arc_set: HashSet::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let v = self.out_adj.len() as VertexId;
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        v
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        self.arc_set.contains(&(u, v))
    }

    pub fn add_arc(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(!self.has_arc(u, v), "duplicate arc ({u}, {v})");
        self.out_adj[u as usize].push(v);
        self.in_adj[v as usize].push(u);
        self.arcs.push((u, v));
        self.arc_set.insert((u, v));
    }

    pub fn out(&self, v: VertexId) -> &[VertexId] {
        &self.out_adj[v as usize]
    }

    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_adj[v as usize]
    }

    /// Arcs in the order they were inserted.
    pub fn arcs(&self) -> &[(VertexId, VertexId)] {
        &self.arcs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_and_order() {
        let mut g = Digraph::with_vertices(3);
        g.add_arc(0, 1);
        g.add_arc(2, 1);
        assert_eq!(g.out(0), &[1]);
        assert_eq!(g.in_neighbors(1), &[0, 2]);
        assert!(g.has_arc(0, 1));
        assert!(!g.has_arc(1, 0));
        assert_eq!(g.arcs(), &[(0, 1), (2, 1)]);
        assert_eq!(g.add_vertex(), 3);
        assert_eq!(g.vertex_count(), 4);
    }
}
