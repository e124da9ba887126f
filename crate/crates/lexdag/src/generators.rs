//! Seeded insertion-sequence generators and the edge-list text format.
//!
//! Every generator is deterministic in its seed. All generated prefixes are
//! acyclic; [`append_final_cycle`] tacks one back arc onto a sequence so
//! that exactly the last insertion closes a cycle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::VertexId;
use crate::ranks::RankAssignment;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("cannot place {m} arcs in this topology")]
    TooManyArcs { m: usize },
    #[error("need at least {need} vertices, got {got}")]
    TooFewVertices { need: usize, got: usize },
    #[error("no path pair exists to close a cycle")]
    NoCyclePossible,
    #[error("malformed edge list: {0}")]
    Parse(String),
}

/// A sized arc sequence, the unit every runner consumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub n: usize,
    pub arcs: Vec<(VertexId, VertexId)>,
}

impl EdgeList {
    /// Renders the text format: `#` comments, a `n <count>` header, one
    /// `u v` arc per line with 0-based decimal ids.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n {}\n", self.n));
        for &(u, v) in &self.arcs {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<EdgeList, GenError> {
        let mut n = None;
        let mut arcs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match n {
                None => {
                    let (tag, count) = (parts.next(), parts.next());
                    if tag != Some("n") {
                        return Err(GenError::Parse(format!(
                            "line {}: expected `n <count>` header",
                            lineno + 1
                        )));
                    }
                    let count: usize = count.and_then(|c| c.parse().ok()).ok_or_else(|| {
                        GenError::Parse(format!("line {}: bad vertex count", lineno + 1))
                    })?;
                    n = Some(count);
                }
                Some(count) => {
                    let u: VertexId = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| GenError::Parse(format!("line {}: bad arc", lineno + 1)))?;
                    let v: VertexId = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| GenError::Parse(format!("line {}: bad arc", lineno + 1)))?;
                    if parts.next().is_some() {
                        return Err(GenError::Parse(format!(
                            "line {}: trailing tokens",
                            lineno + 1
                        )));
                    }
                    if u as usize >= count || v as usize >= count {
                        return Err(GenError::Parse(format!(
                            "line {}: vertex id out of range 0..{count}",
                            lineno + 1
                        )));
                    }
                    arcs.push((u, v));
                }
            }
        }
        n.map(|n| EdgeList { n, arcs })
            .ok_or_else(|| GenError::Parse("missing `n <count>` header".into()))
    }
}

/// Insertion-sequence shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// `0 -> 1 -> ... -> n-1` in path order.
    Path { n: usize },
    /// Random vertex order, `m` distinct forward arcs, insertion order
    /// shuffled. `max_out` caps each vertex's out-degree, for the sparse
    /// bounded-degree regime.
    RandomDagOrder {
        n: usize,
        m: usize,
        max_out: Option<usize>,
        seed: u64,
    },
    /// Vertices split across `layers` strata; arcs run from earlier to
    /// later layers only.
    Layered {
        n: usize,
        layers: usize,
        m: usize,
        seed: u64,
    },
    /// Every one of the `n (n-1) / 2` forward arcs of a random vertex
    /// order, shuffled.
    DenseAll { n: usize, seed: u64 },
}

impl Generator {
    pub fn generate(&self) -> Result<EdgeList, GenError> {
        match *self {
            Generator::Path { n } => {
                let arcs = (1..n as VertexId).map(|v| (v - 1, v)).collect();
                Ok(EdgeList { n, arcs })
            }
            Generator::RandomDagOrder {
                n,
                m,
                max_out,
                seed,
            } => random_dag_order(n, m, max_out, seed),
            Generator::Layered { n, layers, m, seed } => layered(n, layers, m, seed),
            Generator::DenseAll { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let order = permutation(n, &mut rng);
                let mut arcs: Vec<(VertexId, VertexId)> = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        arcs.push((order[i], order[j]));
                    }
                }
                arcs.shuffle(&mut rng);
                Ok(EdgeList { n, arcs })
            }
        }
    }
}

fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.shuffle(rng);
    order
}

fn random_dag_order(
    n: usize,
    m: usize,
    max_out: Option<usize>,
    seed: u64,
) -> Result<EdgeList, GenError> {
    if n < 2 && m > 0 {
        return Err(GenError::TooFewVertices { need: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = permutation(n, &mut rng);
    let cap = max_out.unwrap_or(usize::MAX);
    let capacity: usize = (0..n).map(|i| (n - 1 - i).min(cap)).sum();
    if m > capacity {
        return Err(GenError::TooManyArcs { m });
    }
    let mut out_count = vec![0usize; n];
    let mut present = std::collections::HashSet::new();
    let mut arcs = Vec::with_capacity(m);
    while arcs.len() < m {
        let i = rng.random_range(0..n - 1);
        if out_count[i] >= cap.min(n - 1 - i) {
            continue;
        }
        let j = rng.random_range(i + 1..n);
        if present.insert((i, j)) {
            out_count[i] += 1;
            arcs.push((order[i], order[j]));
        }
    }
    arcs.shuffle(&mut rng);
    Ok(EdgeList { n, arcs })
}

fn layered(n: usize, layers: usize, m: usize, seed: u64) -> Result<EdgeList, GenError> {
    if layers < 2 || n < layers {
        return Err(GenError::TooFewVertices {
            need: layers.max(2),
            got: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = permutation(n, &mut rng);
    // Vertex `order[i]` sits in layer `i * layers / n`.
    let layer_of = |i: usize| i * layers / n;
    let mut present = std::collections::HashSet::new();
    let mut arcs = Vec::with_capacity(m);
    let mut attempts = 0usize;
    while arcs.len() < m {
        attempts += 1;
        if attempts > 200 * m + 1000 {
            return Err(GenError::TooManyArcs { m });
        }
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if layer_of(i) < layer_of(j) && present.insert((i, j)) {
            arcs.push((order[i], order[j]));
        }
    }
    arcs.shuffle(&mut rng);
    Ok(EdgeList { n, arcs })
}

/// Reorders the arcs so sources arrive by descending rank, unranked
/// sources first (stable for ties). Every ranked source then undercuts the
/// minima its successors have seen so far — the arrival pattern that
/// maximizes label churn and message volume, where a uniformly shuffled
/// order only produces logarithmically many changes per vertex.
pub fn order_by_descending_source_rank(list: &mut EdgeList, ranks: &RankAssignment) {
    list.arcs
        .sort_by_key(|&(u, _)| std::cmp::Reverse(ranks.rank(u)));
}

/// Appends one arc that closes a cycle against the existing sequence: the
/// new arc `(x, y)` satisfies `y reaches x` through already-present arcs.
/// Among the widest-spanning reachable pairs (by topological distance) the
/// seed picks one, so a path gets closed end to end.
pub fn append_final_cycle(list: &mut EdgeList, seed: u64) -> Result<(), GenError> {
    let n = list.n;
    let mut out_adj = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(u, v) in &list.arcs {
        out_adj[u as usize].push(v);
        indeg[v as usize] += 1;
    }
    // Topological positions (the prefix is acyclic by construction).
    let mut position = vec![0usize; n];
    let mut queue: Vec<VertexId> = (0..n as VertexId)
        .filter(|&v| indeg[v as usize] == 0)
        .collect();
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        position[v as usize] = head;
        head += 1;
        for &w in &out_adj[v as usize] {
            indeg[w as usize] -= 1;
            if indeg[w as usize] == 0 {
                queue.push(w);
            }
        }
    }
    let mut best_span = 0isize;
    let mut best: Vec<(VertexId, VertexId)> = Vec::new();
    for y in 0..n as VertexId {
        let mut seen = vec![false; n];
        seen[y as usize] = true;
        let mut stack = vec![y];
        while let Some(z) = stack.pop() {
            for &w in &out_adj[z as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                    let span = position[w as usize] as isize - position[y as usize] as isize;
                    match span.cmp(&best_span) {
                        std::cmp::Ordering::Greater => {
                            best_span = span;
                            best = vec![(w, y)];
                        }
                        std::cmp::Ordering::Equal => best.push((w, y)),
                        std::cmp::Ordering::Less => {}
                    }
                }
            }
        }
    }
    if best.is_empty() {
        return Err(GenError::NoCyclePossible);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y) = best[rng.random_range(0..best.len())];
    list.arcs.push((x, y));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use crate::oracle;

    fn as_graph(list: &EdgeList) -> Digraph {
        let mut g = Digraph::with_vertices(list.n);
        for &(u, v) in &list.arcs {
            g.add_arc(u, v);
        }
        g
    }

    #[test]
    fn path_renders_in_order() {
        let list = Generator::Path { n: 3 }.generate().unwrap();
        assert_eq!(list.render(), "n 3\n0 1\n1 2\n");
    }

    #[test]
    fn dense_all_has_every_forward_arc() {
        let list = Generator::DenseAll { n: 3, seed: 1 }.generate().unwrap();
        assert_eq!(list.arcs.len(), 3);
        let g = as_graph(&list);
        assert!(oracle::static_labels(&g, &crate::ranks::full_scheme(3, 0)).is_ok());
    }

    #[test]
    fn final_cycle_arc_is_the_only_cycle() {
        let mut list = Generator::Path { n: 3 }.generate().unwrap();
        append_final_cycle(&mut list, 5).unwrap();
        assert_eq!(list.arcs.last(), Some(&(2, 0)));
        // Prefix acyclic, full list cyclic.
        let prefix = EdgeList {
            n: 3,
            arcs: list.arcs[..2].to_vec(),
        };
        assert!(
            oracle::static_labels(&as_graph(&prefix), &crate::ranks::full_scheme(3, 0)).is_ok()
        );
        assert!(oracle::static_labels(&as_graph(&list), &crate::ranks::full_scheme(3, 0)).is_err());
    }

    #[test]
    fn generators_stay_acyclic_and_deterministic() {
        let specs = [
            Generator::RandomDagOrder {
                n: 40,
                m: 120,
                max_out: None,
                seed: 7,
            },
            Generator::RandomDagOrder {
                n: 40,
                m: 100,
                max_out: Some(4),
                seed: 8,
            },
            Generator::Layered {
                n: 40,
                layers: 4,
                m: 90,
                seed: 9,
            },
            Generator::DenseAll { n: 12, seed: 10 },
        ];
        for spec in specs {
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a, b, "{spec:?} not deterministic");
            assert!(
                oracle::static_labels(&as_graph(&a), &crate::ranks::full_scheme(a.n, 0)).is_ok(),
                "{spec:?} generated a cycle"
            );
            if let Generator::RandomDagOrder {
                max_out: Some(cap), ..
            } = spec
            {
                let g = as_graph(&a);
                for v in 0..a.n as VertexId {
                    assert!(g.out(v).len() <= cap);
                }
            }
        }
    }

    #[test]
    fn rank_descent_order_sorts_sources() {
        let mut list = Generator::RandomDagOrder {
            n: 30,
            m: 80,
            max_out: None,
            seed: 4,
        }
        .generate()
        .unwrap();
        let arcs_before: std::collections::HashSet<_> = list.arcs.iter().copied().collect();
        let ranks = crate::ranks::sample_vertex_scheme(30, 0.4, 9).unwrap();
        order_by_descending_source_rank(&mut list, &ranks);
        let arcs_after: std::collections::HashSet<_> = list.arcs.iter().copied().collect();
        assert_eq!(
            arcs_before, arcs_after,
            "reordering must not alter the arc set"
        );
        for w in list.arcs.windows(2) {
            assert!(ranks.rank(w[0].0) >= ranks.rank(w[1].0));
        }
    }

    #[test]
    fn over_capacity_is_rejected() {
        assert!(matches!(
            Generator::RandomDagOrder {
                n: 4,
                m: 10,
                max_out: None,
                seed: 0
            }
            .generate(),
            Err(GenError::TooManyArcs { .. })
        ));
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let list = Generator::RandomDagOrder {
            n: 9,
            m: 14,
            max_out: None,
            seed: 3,
        }
        .generate()
        .unwrap();
        let text = format!("# generated\n{}", list.render());
        assert_eq!(EdgeList::parse(&text).unwrap(), list);

        assert!(EdgeList::parse("0 1\n").is_err());
        assert!(EdgeList::parse("n 2\n0 2\n").is_err());
        assert!(EdgeList::parse("n 2\n0\n").is_err());
        assert!(EdgeList::parse("").is_err());
    }
}
