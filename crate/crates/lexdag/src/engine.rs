//! The dynamic two-way-search algorithm: maintains the digraph, per-vertex
//! labels, and same-label in-neighbor lists across arc insertions, and
//! halts permanently on the first detected cycle.
//!
//! An insertion of `(u, v)` proceeds in three steps:
//!
//! 1. If `l(u)` compares `Greater` to `l(v)` the arc already respects the
//!    weak order and nothing needs to run.
//! 2. Otherwise a *backward search* walks in-neighbors from `u`, spreading
//!    only through vertices whose label equals `l(u)`, hunting for `v`.
//!    If labels compare `Less`, a *forward search* then walks out-neighbors
//!    from `v` through lex-greater labels; meeting any vertex the backward
//!    search probed (even a pruned one) proves a `v -> u` path. Detection
//!    runs read-only over pre-insertion labels, so a detected cycle leaves
//!    the label state untouched.
//! 3. With no cycle, the arc commits and label merges propagate along
//!    out-arcs until the labels are consistent again.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Digraph, VertexId};
use crate::label::{cmp_lex, merge_for_arc, Label, LabelEntry, Rank};
use crate::ranks::{RankAssignment, RankMode};
use crate::snapshot::Snapshot;

/// Order in which pending label merges are applied. Final labels are
/// policy-independent; change counts are not.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PropagationPolicy {
    DepthFirst,
    BreadthFirst,
    RandomSeeded(u64),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InsertOutcome {
    /// The arc (or a duplicate of it) was consistent with the current
    /// labels; nothing changed.
    AlreadyOrdered,
    /// The arc was added; `changes` counts label-change events (a vertex
    /// may change more than once under some policies).
    LabelsUpdated { changes: u64 },
    /// The arc closed a cycle; the witness is a closed walk through arcs
    /// present after the insertion, containing the new arc.
    CycleDetected { witness: Vec<VertexId> },
}

impl InsertOutcome {
    pub fn is_cycle(&self) -> bool {
        matches!(self, InsertOutcome::CycleDetected { .. })
    }

    /// CSV-facing name.
    pub fn as_str(&self) -> &'static str {
        match self {
            InsertOutcome::AlreadyOrdered => "already-ordered",
            InsertOutcome::LabelsUpdated { .. } => "labels-updated",
            InsertOutcome::CycleDetected { .. } => "cycle-detected",
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EngineError {
    #[error("engine halted after cycle")]
    Halted,
    #[error("witness splice failed: {0}")]
    WitnessSplice(String),
}

/// Result of the backward phase.
pub struct BackwardSearch {
    /// True iff some probe reached `v`.
    pub found: bool,
    /// Every vertex that received a probe, pruned receivers included;
    /// always contains the initiator.
    pub probed: HashSet<VertexId>,
    /// First prober of each probed vertex; walking it leads back to the
    /// initiator along forward arcs.
    pub parent: HashMap<VertexId, VertexId>,
}

/// Result of the forward phase.
pub struct ForwardSearch {
    /// First backward-probed vertex the forward wave touched, if any.
    pub hit: Option<VertexId>,
    pub parent: HashMap<VertexId, VertexId>,
}

/// Pending `(src, dst)` merge tasks, ordered by the propagation policy.
struct Worklist {
    policy: PropagationPolicy,
    items: VecDeque<(VertexId, VertexId)>,
}

impl Worklist {
    fn new(policy: PropagationPolicy) -> Worklist {
        Worklist {
            policy,
            items: VecDeque::new(),
        }
    }

    fn push(&mut self, task: (VertexId, VertexId)) {
        self.items.push_back(task);
    }

    fn pop(&mut self, rng: &mut ChaCha8Rng) -> Option<(VertexId, VertexId)> {
        match self.policy {
            PropagationPolicy::BreadthFirst => self.items.pop_front(),
            PropagationPolicy::DepthFirst => self.items.pop_back(),
            PropagationPolicy::RandomSeeded(_) => {
                if self.items.is_empty() {
                    None
                } else {
                    let i = rng.random_range(0..self.items.len());
                    self.items.swap_remove_back(i)
                }
            }
        }
    }
}

/// Splices backward and forward parent maps into the closed walk
/// `v .. meet .. u, v`, validating every hop against the graph. Shared by
/// the sequential engine and the message simulator.
pub(crate) fn splice_witness(
    graph: &Digraph,
    parent_b: &HashMap<VertexId, VertexId>,
    parent_f: &HashMap<VertexId, VertexId>,
    meet: VertexId,
    u: VertexId,
    v: VertexId,
) -> Result<Vec<VertexId>, String> {
    let limit = graph.vertex_count() + 2;
    let mut fwd_seg = vec![meet];
    let mut cur = meet;
    while cur != v {
        cur = *parent_f
            .get(&cur)
            .ok_or_else(|| format!("no forward parent for {cur}"))?;
        fwd_seg.push(cur);
        if fwd_seg.len() > limit {
            return Err("forward parent loop".into());
        }
    }
    fwd_seg.reverse();

    let mut path = fwd_seg;
    let mut cur = meet;
    while cur != u {
        cur = *parent_b
            .get(&cur)
            .ok_or_else(|| format!("no backward parent for {cur}"))?;
        path.push(cur);
        if path.len() > 2 * limit {
            return Err("backward parent loop".into());
        }
    }
    path.push(v);
    for w in path.windows(2) {
        if !graph.has_arc(w[0], w[1]) {
            return Err(format!("({}, {}) is not an arc", w[0], w[1]));
        }
    }
    Ok(path)
}

pub struct Engine {
    graph: Digraph,
    labels: Vec<Label>,
    ranks: RankAssignment,
    same_label_preds: Vec<Vec<VertexId>>,
    change_counter: Vec<u64>,
    policy: PropagationPolicy,
    rng: ChaCha8Rng,
    halted: bool,
}

fn initial_label(ranks: &RankAssignment, v: VertexId) -> Label {
    if ranks.is_ranked(v) {
        Label::singleton(v, ranks.rank(v))
    } else {
        Label::empty()
    }
}

impl Engine {
    /// Empty graph over the assignment's vertices; a ranked vertex starts
    /// with itself as its whole label, an unranked one with the empty label.
    pub fn new(ranks: RankAssignment, policy: PropagationPolicy) -> Engine {
        let n = ranks.vertex_count();
        let labels = (0..n as VertexId)
            .map(|v| initial_label(&ranks, v))
            .collect();
        let rng = match policy {
            PropagationPolicy::RandomSeeded(seed) => ChaCha8Rng::seed_from_u64(seed),
            _ => ChaCha8Rng::seed_from_u64(0),
        };
        Engine {
            graph: Digraph::with_vertices(n),
            labels,
            ranks,
            same_label_preds: vec![Vec::new(); n],
            change_counter: vec![0; n],
            policy,
            rng,
            halted: false,
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn ranks(&self) -> &RankAssignment {
        &self.ranks
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn change_count(&self, v: VertexId) -> u64 {
        self.change_counter[v as usize]
    }

    pub fn total_changes(&self) -> u64 {
        self.change_counter.iter().sum()
    }

    /// In-neighbors whose last transmitted label matched `v`'s label.
    pub fn same_label_preds(&self, v: VertexId) -> &[VertexId] {
        &self.same_label_preds[v as usize]
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::capture(&self.graph, &self.ranks, &self.labels, self.halted, None)
    }

    /// Fresh isolated vertex, ranked according to the scheme.
    pub fn add_vertex(&mut self) -> Result<VertexId, EngineError> {
        if self.halted {
            return Err(EngineError::Halted);
        }
        let v = self.ranks.add_vertex();
        let g = self.graph.add_vertex();
        debug_assert_eq!(v, g);
        self.labels.push(initial_label(&self.ranks, v));
        self.same_label_preds.push(Vec::new());
        self.change_counter.push(0);
        Ok(v)
    }

    /// Inserts the arc `(u, v)`, reporting whether it closed a cycle. A
    /// detected cycle halts the engine permanently with labels untouched;
    /// the offending arc is still recorded so the witness walks real arcs.
    pub fn insert(&mut self, u: VertexId, v: VertexId) -> Result<InsertOutcome, EngineError> {
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
            let label_u = self.labels[u as usize].clone();
            let back = self.backward_search(u, v, &label_u);
            if back.found {
                self.graph.add_arc(u, v);
                self.halted = true;
                let witness = self.witness_cycle(&back.parent, &HashMap::new(), v, u, v)?;
                return Ok(InsertOutcome::CycleDetected { witness });
            }
            if ord == std::cmp::Ordering::Less {
                let fwd = self.forward_search(v, &label_u, &back.probed);
                if let Some(meet) = fwd.hit {
                    self.graph.add_arc(u, v);
                    self.halted = true;
                    let witness = self.witness_cycle(&back.parent, &fwd.parent, meet, u, v)?;
                    return Ok(InsertOutcome::CycleDetected { witness });
                }
            }
        }

        self.graph.add_arc(u, v);
        let mut changes = 0u64;
        if self.ranks.mode() == RankMode::ArcQ {
            let (_, lowered) = self
                .ranks
                .arc_rank_on_insert((u, v))
                .expect("mode checked above");
            if lowered {
                changes += self.repair_after_rank_decrease(v, self.ranks.rank(v));
            }
        }
        // The rank repair may have moved l(v); re-read the ordering.
        match cmp_lex(&self.labels[u as usize], &self.labels[v as usize]) {
            std::cmp::Ordering::Less => changes += self.update_propagate(u, v),
            std::cmp::Ordering::Equal => {
                if !self.same_label_preds[v as usize].contains(&u) {
                    self.same_label_preds[v as usize].push(u);
                }
            }
            std::cmp::Ordering::Greater => {}
        }
        if ord == std::cmp::Ordering::Greater && changes == 0 {
            Ok(InsertOutcome::AlreadyOrdered)
        } else {
            Ok(InsertOutcome::LabelsUpdated { changes })
        }
    }

    /// Probes in-neighbors transitively from `u`, spreading only through
    /// first-probed vertices other than `v` whose label equals `label_u`.
    /// Every probe receiver lands in `probed`; reaching `v` stops the
    /// search with `found`.
    pub fn backward_search(&self, u: VertexId, v: VertexId, label_u: &Label) -> BackwardSearch {
        let mut probed = HashSet::new();
        probed.insert(u);
        let mut parent = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(u);
        let mut found = false;
        'drain: while let Some(z) = queue.pop_front() {
            for &w in self.graph.in_neighbors(z) {
                let first = probed.insert(w);
                if first {
                    parent.insert(w, z);
                }
                if w == v {
                    found = true;
                    break 'drain;
                }
                if first && self.labels[w as usize] == *label_u {
                    queue.push_back(w);
                }
            }
        }
        BackwardSearch {
            found,
            probed,
            parent,
        }
    }

    /// Probes out-neighbors transitively from `v`, spreading through
    /// first-probed vertices with `label_u` strictly below their label.
    /// Touching any member of `probed` — pruned or not — is a hit.
    pub fn forward_search(
        &self,
        v: VertexId,
        label_u: &Label,
        probed: &HashSet<VertexId>,
    ) -> ForwardSearch {
        let mut seen = HashSet::new();
        seen.insert(v);
        let mut parent = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(v);
        while let Some(z) = queue.pop_front() {
            for &w in self.graph.out(z) {
                let first = seen.insert(w);
                if first {
                    parent.insert(w, z);
                }
                if probed.contains(&w) {
                    return ForwardSearch {
                        hit: Some(w),
                        parent,
                    };
                }
                if first && cmp_lex(label_u, &self.labels[w as usize]) == std::cmp::Ordering::Less {
                    queue.push_back(w);
                }
            }
        }
        ForwardSearch { hit: None, parent }
    }

    /// Splices the two parent maps into the closed walk
    /// `v .. meet .. u, v`. Every consecutive pair must be an arc of the
    /// committed graph; failure indicates a search bug.
    pub fn witness_cycle(
        &self,
        parent_b: &HashMap<VertexId, VertexId>,
        parent_f: &HashMap<VertexId, VertexId>,
        meet: VertexId,
        u: VertexId,
        v: VertexId,
    ) -> Result<Vec<VertexId>, EngineError> {
        splice_witness(&self.graph, parent_b, parent_f, meet, u, v)
            .map_err(EngineError::WitnessSplice)
    }

    /// Merges `l(u)` into `l(v)` across the arc and propagates further
    /// merges along out-arcs until no label changes, in policy order.
    /// Returns the number of label-change events.
    pub fn update_propagate(&mut self, u: VertexId, v: VertexId) -> u64 {
        debug_assert!(self.graph.has_arc(u, v));
        let mut work = Worklist::new(self.policy);
        work.push((u, v));
        self.drain(work)
    }

    /// Rewrites `l(v)` after its rank dropped to `new_rank` — the kept part
    /// is the old prefix with ranks below the new one, then `v` itself —
    /// and propagates from `v`. The rank assignment must already carry the
    /// new rank.
    pub fn repair_after_rank_decrease(&mut self, v: VertexId, new_rank: Rank) -> u64 {
        debug_assert_eq!(self.ranks.rank(v), new_rank);
        let old = &self.labels[v as usize];
        let mut kept: Vec<LabelEntry> = old
            .entries()
            .iter()
            .take_while(|e| e.rank < new_rank)
            .copied()
            .collect();
        kept.push(LabelEntry::new(v, new_rank));
        let repaired = Label::from_entries(kept);
        if repaired == *old {
            return 0;
        }
        self.labels[v as usize] = repaired;
        self.change_counter[v as usize] += 1;
        self.same_label_preds[v as usize].clear();
        let mut work = Worklist::new(self.policy);
        for &w in self.graph.out(v) {
            work.push((v, w));
        }
        1 + self.drain(work)
    }

    fn drain(&mut self, mut work: Worklist) -> u64 {
        let mut changes = 0;
        while let Some((x, y)) = work.pop(&mut self.rng) {
            let src = self.labels[x as usize].clone();
            let merged = merge_for_arc(&src, &self.labels[y as usize], y, self.ranks.rank(y))
                .expect("graph is acyclic; destination cannot occur in source label");
            if merged != self.labels[y as usize] {
                // The receiver adopts the merge and remembers its sender
                // only if the transmitted label *is* its new label.
                let equal_now = merged == src;
                self.labels[y as usize] = merged;
                self.change_counter[y as usize] += 1;
                changes += 1;
                let list = &mut self.same_label_preds[y as usize];
                list.clear();
                if equal_now {
                    list.push(x);
                }
                for &w in self.graph.out(y) {
                    work.push((y, w));
                }
            } else if src == self.labels[y as usize] {
                let list = &mut self.same_label_preds[y as usize];
                if !list.contains(&x) {
                    list.push(x);
                }
            } else {
                // The sender moved below the receiver's label; it no longer
                // belongs on the same-label list.
                self.same_label_preds[y as usize].retain(|&p| p != x);
            }
        }
        changes
    }
}
