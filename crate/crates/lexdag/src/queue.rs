//! Queue-filtered propagation for the fully ranked setting.
//!
//! With every vertex ranked, labels are pairwise distinct, so the backward
//! search degenerates to probing the tail's immediate in-neighbors. The
//! interesting change is on the forward side: each vertex `w` caches the
//! last label it saw from every out-neighbor `u` and keeps those caches in
//! a priority queue. When `l(w)` drops, `w` only messages the out-neighbors
//! whose cached label still sits above the new one; receivers always reply
//! with their current label, which repositions them in the queue. Futile
//! sends are throttled to one per receiver label epoch.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::engine::{EngineError, InsertOutcome};
use crate::graph::{Digraph, VertexId};
use crate::label::{cmp_lex, merge_for_arc, Label};
use crate::ranks::{RankAssignment, RankMode};
use crate::snapshot::Snapshot;

/// Cached out-neighbor labels plus the queue over them. Queue keys always
/// equal the stored cache entries.
#[derive(Clone, Debug, Default)]
pub struct NeighborCache {
    entries: HashMap<VertexId, Label>,
    queue: BTreeSet<(Label, VertexId)>,
}

impl NeighborCache {
    pub(crate) fn set(&mut self, u: VertexId, label: Label) {
        if let Some(old) = self.entries.insert(u, label.clone()) {
            self.queue.remove(&(old, u));
        }
        self.queue.insert((label, u));
    }

    /// Removes and returns every out-neighbor whose cached label sits
    /// strictly above `threshold`; they leave the queue until their reply
    /// re-inserts them.
    pub(crate) fn pop_above(&mut self, threshold: &Label) -> Vec<VertexId> {
        let mut popped = Vec::new();
        while let Some((label, u)) = self.queue.last().cloned() {
            if cmp_lex(&label, threshold) == std::cmp::Ordering::Greater {
                self.queue.remove(&(label, u));
                popped.push(u);
            } else {
                break;
            }
        }
        popped
    }

    pub fn cached(&self, u: VertexId) -> Option<&Label> {
        self.entries.get(&u)
    }

    pub fn iter_sorted(&self) -> Vec<(VertexId, String)> {
        let mut out: Vec<(VertexId, String)> = self
            .entries
            .iter()
            .map(|(&u, l)| (u, l.to_string()))
            .collect();
        out.sort_by_key(|&(u, _)| u);
        out
    }
}

/// Message tallies for the queue engine's own propagation.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct QueueCounters {
    pub update: u64,
    pub reply: u64,
}

pub struct QueueEngine {
    graph: Digraph,
    labels: Vec<Label>,
    ranks: RankAssignment,
    caches: Vec<NeighborCache>,
    change_counter: Vec<u64>,
    counters: QueueCounters,
    /// Futile update messages received since the vertex last changed,
    /// per arc; the queue threshold keeps each at most 1.
    futile_since_change: HashMap<(VertexId, VertexId), u64>,
    halted: bool,
}

impl QueueEngine {
    /// Requires a full ranking; partial rankings void the unique-label
    /// degeneration this engine is built on.
    pub fn new(ranks: RankAssignment) -> QueueEngine {
        assert!(
            ranks.mode() == RankMode::Full,
            "queue engine requires a full ranking"
        );
        let n = ranks.vertex_count();
        let labels = (0..n as VertexId)
            .map(|v| Label::singleton(v, ranks.rank(v)))
            .collect();
        QueueEngine {
            graph: Digraph::with_vertices(n),
            labels,
            ranks,
            caches: vec![NeighborCache::default(); n],
            change_counter: vec![0; n],
            counters: QueueCounters::default(),
            futile_since_change: HashMap::new(),
            halted: false,
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn ranks(&self) -> &RankAssignment {
        &self.ranks
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.labels[v as usize]
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn counters(&self) -> QueueCounters {
        self.counters
    }

    pub fn cache(&self, w: VertexId) -> &NeighborCache {
        &self.caches[w as usize]
    }

    pub fn change_count(&self, v: VertexId) -> u64 {
        self.change_counter[v as usize]
    }

    pub fn snapshot(&self) -> Snapshot {
        let caches = self.caches.iter().map(|c| c.iter_sorted()).collect();
        Snapshot::capture(
            &self.graph,
            &self.ranks,
            &self.labels,
            self.halted,
            Some(caches),
        )
    }

    /// Same detection semantics as the two-way engine; propagation goes
    /// through the caches.
    pub fn q_insert(&mut self, u: VertexId, v: VertexId) -> Result<InsertOutcome, EngineError> {
        if self.halted {
            return Err(EngineError::Halted);
        }
        if u == v {
            self.graph.add_arc(u, v);
            self.halted = true;
            return Ok(InsertOutcome::CycleDetected {
                witness: vec![u, u],
            });
        }
        if self.graph.has_arc(u, v) {
            return Ok(InsertOutcome::AlreadyOrdered);
        }
        let ord = cmp_lex(&self.labels[u as usize], &self.labels[v as usize]);
        if ord != std::cmp::Ordering::Greater {
            // Degenerate backward phase: probe the immediate in-neighbors.
            let mut probed: HashSet<VertexId> = HashSet::from([u]);
            let mut found = false;
            for &w in self.graph.in_neighbors(u) {
                probed.insert(w);
                if w == v {
                    found = true;
                }
            }
            if found {
                self.graph.add_arc(u, v);
                self.halted = true;
                return Ok(InsertOutcome::CycleDetected {
                    witness: vec![v, u, v],
                });
            }
            if ord == std::cmp::Ordering::Less {
                if let Some((meet, parent)) = self.forward_search(v, u, &probed) {
                    self.graph.add_arc(u, v);
                    self.halted = true;
                    let witness = self.splice(&parent, meet, u, v)?;
                    return Ok(InsertOutcome::CycleDetected { witness });
                }
            }
        }

        self.graph.add_arc(u, v);
        // Cache initialization counts as one implicit reply.
        self.caches[u as usize].set(v, self.labels[v as usize].clone());
        self.counters.reply += 1;
        let mut changes = 0u64;
        if ord == std::cmp::Ordering::Less {
            // Initial update across the new arc, then queue-driven
            // propagation from the receiver.
            let (_, c) = self.send_update(u, v);
            changes += c;
        }
        if ord == std::cmp::Ordering::Greater {
            Ok(InsertOutcome::AlreadyOrdered)
        } else {
            Ok(InsertOutcome::LabelsUpdated { changes })
        }
    }

    fn forward_search(
        &self,
        v: VertexId,
        u: VertexId,
        probed: &HashSet<VertexId>,
    ) -> Option<(VertexId, HashMap<VertexId, VertexId>)> {
        let label_u = &self.labels[u as usize];
        let mut seen = HashSet::from([v]);
        let mut parent = HashMap::new();
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(z) = queue.pop_front() {
            for &w in self.graph.out(z) {
                let first = seen.insert(w);
                if first {
                    parent.insert(w, z);
                }
                if probed.contains(&w) {
                    return Some((w, parent));
                }
                if first && cmp_lex(label_u, &self.labels[w as usize]) == std::cmp::Ordering::Less {
                    queue.push_back(w);
                }
            }
        }
        None
    }

    fn splice(
        &self,
        parent_f: &HashMap<VertexId, VertexId>,
        meet: VertexId,
        u: VertexId,
        v: VertexId,
    ) -> Result<Vec<VertexId>, EngineError> {
        // Forward segment v .. meet; the backward segment is at most one
        // arc (meet, u) since probes stop at immediate in-neighbors.
        let mut seg = vec![meet];
        let mut cur = meet;
        while cur != v {
            cur = *parent_f.get(&cur).ok_or_else(|| {
                EngineError::WitnessSplice(format!("no forward parent for {cur}"))
            })?;
            seg.push(cur);
            if seg.len() > self.graph.vertex_count() + 1 {
                return Err(EngineError::WitnessSplice("forward parent loop".into()));
            }
        }
        seg.reverse();
        let mut path = seg;
        if meet != u {
            path.push(u);
        }
        path.push(v);
        for w in path.windows(2) {
            if !self.graph.has_arc(w[0], w[1]) {
                return Err(EngineError::WitnessSplice(format!(
                    "({}, {}) is not an arc",
                    w[0], w[1]
                )));
            }
        }
        Ok(path)
    }

    /// One update message `x -> y` carrying `l(x)`, the merge at `y`, and
    /// `y`'s label reply back to `x`. Recurses into `y`'s queue when the
    /// merge changed `y`. Returns (messages sent, label changes).
    fn send_update(&mut self, x: VertexId, y: VertexId) -> (u64, u64) {
        self.counters.update += 1;
        let mut messages = 1u64;
        let src = self.labels[x as usize].clone();
        let merged = merge_for_arc(&src, &self.labels[y as usize], y, self.ranks.rank(y))
            .expect("graph is acyclic");
        let mut changes = 0u64;
        if merged != self.labels[y as usize] {
            self.labels[y as usize] = merged;
            self.change_counter[y as usize] += 1;
            changes += 1;
            self.futile_since_change.retain(|&(_, to), _| to != y);
        } else {
            let slot = self.futile_since_change.entry((x, y)).or_insert(0);
            *slot += 1;
            debug_assert!(
                *slot <= 1,
                "queue threshold broken: two futile updates {x} -> {y} in one epoch"
            );
        }
        // Label reply, cache refresh, queue reposition.
        self.counters.reply += 1;
        messages += 1;
        let current = self.labels[y as usize].clone();
        self.caches[x as usize].set(y, current);
        if changes > 0 {
            let (m, c) = self.q_propagate_current(y);
            messages += m;
            changes += c;
        }
        (messages, changes)
    }

    fn q_propagate_current(&mut self, w: VertexId) -> (u64, u64) {
        let new_label = self.labels[w as usize].clone();
        self.q_propagate(w, &new_label)
    }

    /// Sends `new_label` to exactly the out-neighbors of `w` whose cached
    /// label sits above it; counts update and reply messages and the
    /// label changes the wave causes downstream.
    pub fn q_propagate(&mut self, w: VertexId, new_label: &Label) -> (u64, u64) {
        let targets = self.caches[w as usize].pop_above(new_label);
        let mut messages = 0u64;
        let mut changes = 0u64;
        for t in targets {
            let (m, c) = self.send_update(w, t);
            messages += m;
            changes += c;
        }
        (messages, changes)
    }

    /// Maximum futile updates any arc has absorbed since its head last
    /// changed; the queue threshold keeps this at 1.
    pub fn max_futile_in_epoch(&self) -> u64 {
        self.futile_since_change
            .values()
            .copied()
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, PropagationPolicy};
    use crate::oracle;
    use crate::ranks::full_scheme;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Full scheme whose rank order follows vertex order, for readable
    /// hand traces. Draws seeds until the sampled order happens to match.
    fn ordered_scheme(n: usize) -> RankAssignment {
        (0..)
            .map(|seed| full_scheme(n, seed))
            .find(|a| (1..n as VertexId).all(|v| a.rank(v - 1) < a.rank(v)))
            .unwrap()
    }

    #[test]
    fn path_then_back_arc_detects_cycle() {
        let mut e = QueueEngine::new(ordered_scheme(3));
        assert!(!e.q_insert(0, 1).unwrap().is_cycle());
        assert!(!e.q_insert(1, 2).unwrap().is_cycle());
        match e.q_insert(2, 0).unwrap() {
            InsertOutcome::CycleDetected { witness } => assert_eq!(witness, vec![0, 1, 2, 0]),
            other => panic!("expected cycle, got {other:?}"),
        }
        assert!(e.halted());
        assert!(matches!(e.q_insert(0, 2), Err(EngineError::Halted)));
    }

    #[test]
    fn insert_merges_and_fills_cache() {
        let mut e = QueueEngine::new(ordered_scheme(2));
        match e.q_insert(0, 1).unwrap() {
            InsertOutcome::LabelsUpdated { changes } => assert_eq!(changes, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(e.label(1).len(), 2);
        assert_eq!(e.cache(0).cached(1), Some(e.label(1)));
        // The snapshot carries the cache section.
        let snap = e.snapshot().to_json();
        assert!(snap.contains("\"caches\":"), "{snap}");

        // Duplicate: no messages, no changes.
        let before = e.counters();
        assert_eq!(e.q_insert(0, 1).unwrap(), InsertOutcome::AlreadyOrdered);
        assert_eq!(e.counters(), before);
    }

    #[test]
    fn q_propagate_on_empty_queue_is_silent() {
        let mut e = QueueEngine::new(full_scheme(2, 3));
        let l = e.label(0).clone();
        assert_eq!(e.q_propagate(0, &l), (0, 0));
    }

    #[test]
    fn futile_send_suppressed_by_threshold() {
        // After the insert settles, the cache of 0 for 1 equals l(1), which
        // sits lex-below l(0); popping above l(0) finds nothing to send.
        let mut e = QueueEngine::new(ordered_scheme(2));
        e.q_insert(0, 1).unwrap();
        let before = e.counters();
        let current = e.label(0).clone();
        assert_eq!(e.q_propagate(0, &current), (0, 0));
        assert_eq!(e.counters(), before);
    }

    #[test]
    fn fan_propagation_costs_two_updates_two_replies() {
        // 1 -> {2, 3} with settled caches; a fresh apex 0 drops l(1) and
        // the queue wave out of 1 costs exactly 2 updates + 2 replies on
        // top of the initial exchange across the new arc.
        let mut e = QueueEngine::new(ordered_scheme(4));
        assert!(!e.q_insert(1, 2).unwrap().is_cycle());
        assert!(!e.q_insert(1, 3).unwrap().is_cycle());
        let before = e.counters();
        match e.q_insert(0, 1).unwrap() {
            InsertOutcome::LabelsUpdated { changes } => assert_eq!(changes, 3),
            other => panic!("unexpected {other:?}"),
        }
        let delta_update = e.counters().update - before.update;
        let delta_reply = e.counters().reply - before.reply;
        // Initial exchange: 1 update into vertex 1, its reply, and the
        // cache-init implicit reply. The fan itself: 2 updates, 2 replies.
        assert_eq!(delta_update - 1, 2);
        assert_eq!(delta_reply - 2, 2);
        assert!(e.max_futile_in_epoch() <= 1);
    }

    #[test]
    fn final_labels_agree_with_two_way_engine() {
        for seed in 0..25u64 {
            let n = 24usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37) ^ 0x51);
            let mut q_engine = QueueEngine::new(full_scheme(n, seed));
            let mut two_way = Engine::new(full_scheme(n, seed), PropagationPolicy::DepthFirst);
            for _ in 0..4 * n {
                let a = rng.random_range(0..n as u32);
                let b = rng.random_range(0..n as u32);
                if a == b {
                    continue;
                }
                let qo = q_engine.q_insert(a, b).unwrap();
                let to = two_way.insert(a, b).unwrap();
                assert_eq!(qo.is_cycle(), to.is_cycle(), "seed {seed} arc ({a},{b})");
                if qo.is_cycle() {
                    break;
                }
                assert_eq!(q_engine.labels(), two_way.labels());
                // Cache safety at quiescence.
                for w in 0..n as u32 {
                    for &u in q_engine.graph().out(w) {
                        let cached = q_engine.cache(w).cached(u).unwrap();
                        assert_ne!(
                            cmp_lex(cached, q_engine.label(u)),
                            std::cmp::Ordering::Less,
                            "cache below live label at ({w},{u})"
                        );
                    }
                }
                assert!(q_engine.max_futile_in_epoch() <= 1);
            }
        }
    }

    #[test]
    fn labels_and_detection_match_oracle_on_random_streams() {
        for seed in 0..40u64 {
            let n = 16usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e = QueueEngine::new(full_scheme(n, seed));
            for _ in 0..6 * n {
                let a = rng.random_range(0..n as u32);
                let b = rng.random_range(0..n as u32);
                if e.graph().has_arc(a, b) {
                    continue;
                }
                let expect_cycle = a == b || oracle::reaches(e.graph(), b, a);
                let out = e.q_insert(a, b).unwrap();
                assert_eq!(out.is_cycle(), expect_cycle, "seed {seed} arc ({a},{b})");
                if expect_cycle {
                    break;
                }
                let expected = oracle::static_labels(e.graph(), e.ranks()).unwrap();
                assert_eq!(e.labels(), &expected[..], "seed {seed}");
            }
        }
    }
}
