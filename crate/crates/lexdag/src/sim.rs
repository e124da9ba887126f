//! Deterministic discrete-event simulator that runs the insertion protocols
//! as literal per-vertex message handlers.
//!
//! Messages travel through per-arc FIFO channels; the [`SchedulePolicy`]
//! only chooses *which channel* delivers next, so a sender's messages to one
//! receiver are never reordered while cross-channel timing stays arbitrary.
//! Each insertion runs its backward, forward, and update phases to
//! quiescence before the next arc is injected. Outcomes and final labels
//! are schedule-independent; message counts are not, and are tallied by
//! kind at send time.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{splice_witness, InsertOutcome};
use crate::graph::{Digraph, VertexId};
use crate::label::{cmp_lex, merge_for_arc, Label, LabelEntry};
use crate::queue::NeighborCache;
use crate::ranks::{RankAssignment, RankMode};
use crate::snapshot::Snapshot;

/// Which propagation protocol the vertices run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SimMode {
    /// Backward + forward search with recursive update propagation.
    TwoWay,
    /// Fully ranked variant with cached-label priority queues and label
    /// replies.
    Queue,
}

/// Delivery schedule: which channel hands over its oldest message next.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SchedulePolicy {
    Fifo,
    Lifo,
    RandomSeeded(u64),
}

impl SchedulePolicy {
    pub fn parse(name: &str, seed: u64) -> Option<SchedulePolicy> {
        match name {
            "fifo" => Some(SchedulePolicy::Fifo),
            "lifo" => Some(SchedulePolicy::Lifo),
            "random" => Some(SchedulePolicy::RandomSeeded(seed)),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulePolicy::Fifo => "fifo",
            SchedulePolicy::Lifo => "lifo",
            SchedulePolicy::RandomSeeded(_) => "random",
        }
    }
}

#[derive(Clone, Debug)]
pub enum MessageKind {
    BackwardProbe { target: VertexId, label: Label },
    ForwardProbe { label: Label },
    CycleReply,
    NoCycleReply,
    UpdateMsg { label: Label },
    LabelReply { label: Label },
}

impl MessageKind {
    pub fn name(&self) -> &'static str {
        match self {
            MessageKind::BackwardProbe { .. } => "backward",
            MessageKind::ForwardProbe { .. } => "forward",
            MessageKind::CycleReply => "cycle",
            MessageKind::NoCycleReply => "nocycle",
            MessageKind::UpdateMsg { .. } => "update",
            MessageKind::LabelReply { .. } => "reply",
        }
    }

    fn label_string(&self) -> String {
        match self {
            MessageKind::BackwardProbe { label, .. }
            | MessageKind::ForwardProbe { label }
            | MessageKind::UpdateMsg { label }
            | MessageKind::LabelReply { label } => label.to_string(),
            _ => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Message {
    pub kind: MessageKind,
    pub src: VertexId,
    pub dst: VertexId,
}

/// Per-kind message tallies. `total()` is always the sum of the kinds.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug, Serialize)]
pub struct MessageCounters {
    pub backward: u64,
    pub forward: u64,
    pub cycle: u64,
    pub nocycle: u64,
    pub update: u64,
    pub reply: u64,
}

impl MessageCounters {
    pub fn total(&self) -> u64 {
        self.backward + self.forward + self.cycle + self.nocycle + self.update + self.reply
    }

    pub fn add(&mut self, other: &MessageCounters) {
        self.backward += other.backward;
        self.forward += other.forward;
        self.cycle += other.cycle;
        self.nocycle += other.nocycle;
        self.update += other.update;
        self.reply += other.reply;
    }

    fn bump(&mut self, kind: &MessageKind) {
        match kind {
            MessageKind::BackwardProbe { .. } => self.backward += 1,
            MessageKind::ForwardProbe { .. } => self.forward += 1,
            MessageKind::CycleReply => self.cycle += 1,
            MessageKind::NoCycleReply => self.nocycle += 1,
            MessageKind::UpdateMsg { .. } => self.update += 1,
            MessageKind::LabelReply { .. } => self.reply += 1,
        }
    }

    /// CSV row fragment in the fixed counter order.
    pub fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.backward, self.forward, self.cycle, self.nocycle, self.update, self.reply
        )
    }
}

/// Header for [`counters_csv_row`].
pub const COUNTERS_CSV_HEADER: &str =
    "n,m,q,mode,policy,seed,backward,forward,cycle,nocycle,update,reply,total";

/// One counters row for debug exports, keyed by the run configuration.
#[allow(clippy::too_many_arguments)]
pub fn counters_csv_row(
    n: usize,
    m: usize,
    q: f64,
    mode: &str,
    policy: SchedulePolicy,
    seed: u64,
    counters: &MessageCounters,
) -> String {
    format!(
        "{n},{m},{q},{mode},{},{seed},{},{}",
        policy.as_str(),
        counters.csv_fields(),
        counters.total()
    )
}

/// One send event, for golden traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub kind: &'static str,
    pub src: VertexId,
    pub dst: VertexId,
    pub label: String,
}

impl TraceEvent {
    pub fn render(&self) -> String {
        format!(
            "seq={} kind={} src={} dst={} label={}",
            self.seq, self.kind, self.src, self.dst, self.label
        )
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SimError {
    #[error("engine halted after cycle")]
    Halted,
    #[error("internal simulator error: {0}")]
    Internal(String),
}

/// Per-arc FIFO channels; the policy picks which nonempty channel delivers
/// its head next.
struct Mailbox {
    channels: HashMap<(VertexId, VertexId), VecDeque<(u64, Message)>>,
    heads: BTreeMap<u64, (VertexId, VertexId)>,
    next_seq: u64,
}

impl Mailbox {
    fn new() -> Mailbox {
        Mailbox {
            channels: HashMap::new(),
            heads: BTreeMap::new(),
            next_seq: 0,
        }
    }

    fn push(&mut self, msg: Message) {
        let key = (msg.src, msg.dst);
        let seq = self.next_seq;
        self.next_seq += 1;
        let chan = self.channels.entry(key).or_default();
        if chan.is_empty() {
            self.heads.insert(seq, key);
        }
        chan.push_back((seq, msg));
    }

    fn pop(&mut self, policy: SchedulePolicy, rng: &mut Option<ChaCha8Rng>) -> Option<Message> {
        let head_seq = match policy {
            SchedulePolicy::Fifo => *self.heads.keys().next()?,
            SchedulePolicy::Lifo => *self.heads.keys().next_back()?,
            SchedulePolicy::RandomSeeded(_) => {
                if self.heads.is_empty() {
                    return None;
                }
                let i = rng
                    .as_mut()
                    .expect("random policy carries an rng")
                    .random_range(0..self.heads.len());
                *self.heads.keys().nth(i).expect("index in range")
            }
        };
        let key = self.heads.remove(&head_seq).expect("head present");
        let chan = self.channels.get_mut(&key).expect("channel present");
        let (_, msg) = chan.pop_front().expect("head message present");
        if let Some((next_seq, _)) = chan.front() {
            self.heads.insert(*next_seq, key);
        } else {
            self.channels.remove(&key);
        }
        Some(msg)
    }
}

/// The in-flight network for one insertion: mailbox plus send-side
/// bookkeeping.
struct Net {
    mailbox: Mailbox,
    policy: SchedulePolicy,
    rng: Option<ChaCha8Rng>,
    counters: MessageCounters,
    trace: Option<Vec<TraceEvent>>,
    event_seq: u64,
}

impl Net {
    fn new(policy: SchedulePolicy, insertion_index: u64, trace_on: bool, event_seq: u64) -> Net {
        let rng = match policy {
            SchedulePolicy::RandomSeeded(seed) => Some(ChaCha8Rng::seed_from_u64(
                seed ^ (insertion_index.wrapping_add(1)).wrapping_mul(0x9e3779b97f4a7c15),
            )),
            _ => None,
        };
        Net {
            mailbox: Mailbox::new(),
            policy,
            rng,
            counters: MessageCounters::default(),
            trace: trace_on.then(Vec::new),
            event_seq,
        }
    }

    fn send(&mut self, kind: MessageKind, src: VertexId, dst: VertexId) {
        self.counters.bump(&kind);
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent {
                seq: self.event_seq,
                kind: kind.name(),
                src,
                dst,
                label: kind.label_string(),
            });
        }
        self.event_seq += 1;
        self.mailbox.push(Message { kind, src, dst });
    }

    fn pop(&mut self) -> Option<Message> {
        self.mailbox.pop(self.policy, &mut self.rng)
    }
}

#[derive(Default)]
struct SearchNode {
    got_from: Vec<VertexId>,
    pending: usize,
    propagated: bool,
    resolved: bool,
    cycle_forwarded: bool,
}

pub struct Simulator {
    mode: SimMode,
    graph: Digraph,
    labels: Vec<Label>,
    ranks: RankAssignment,
    caches: Vec<NeighborCache>,
    change_counter: Vec<u64>,
    counters: MessageCounters,
    halted: bool,
    insertions: u64,
    trace_on: bool,
    trace: Vec<TraceEvent>,
    event_seq: u64,
}

impl Simulator {
    pub fn new(ranks: RankAssignment, mode: SimMode) -> Simulator {
        if mode == SimMode::Queue {
            assert!(
                ranks.mode() == RankMode::Full,
                "queue mode requires a full ranking"
            );
        }
        let n = ranks.vertex_count();
        let labels = (0..n as VertexId)
            .map(|v| {
                if ranks.is_ranked(v) {
                    Label::singleton(v, ranks.rank(v))
                } else {
                    Label::empty()
                }
            })
            .collect();
        Simulator {
            mode,
            graph: Digraph::with_vertices(n),
            labels,
            ranks,
            caches: vec![NeighborCache::default(); n],
            change_counter: vec![0; n],
            counters: MessageCounters::default(),
            halted: false,
            insertions: 0,
            trace_on: false,
            trace: Vec::new(),
            event_seq: 0,
        }
    }

    pub fn enable_trace(&mut self) {
        self.trace_on = true;
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.labels[v as usize]
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn ranks(&self) -> &RankAssignment {
        &self.ranks
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn counters(&self) -> MessageCounters {
        self.counters
    }

    pub fn change_count(&self, v: VertexId) -> u64 {
        self.change_counter[v as usize]
    }

    pub fn total_changes(&self) -> u64 {
        self.change_counter.iter().sum()
    }

    pub fn snapshot(&self) -> Snapshot {
        let caches = (self.mode == SimMode::Queue)
            .then(|| self.caches.iter().map(|c| c.iter_sorted()).collect());
        Snapshot::capture(&self.graph, &self.ranks, &self.labels, self.halted, caches)
    }

    /// Runs one insertion to quiescence, returning the outcome and the
    /// messages this insertion cost by kind.
    pub fn simulate_insert(
        &mut self,
        u: VertexId,
        v: VertexId,
        policy: SchedulePolicy,
    ) -> Result<(InsertOutcome, MessageCounters), SimError> {
        if self.halted {
            return Err(SimError::Halted);
        }
        let index = self.insertions;
        self.insertions += 1;
        let mut net = Net::new(policy, index, self.trace_on, self.event_seq);

        let outcome = self.insert_inner(u, v, &mut net)?;

        self.counters.add(&net.counters);
        self.event_seq = net.event_seq;
        if let Some(tr) = net.trace.take() {
            self.trace.extend(tr);
        }
        Ok((outcome, net.counters))
    }

    fn insert_inner(
        &mut self,
        u: VertexId,
        v: VertexId,
        net: &mut Net,
    ) -> Result<InsertOutcome, SimError> {
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
            let (found, probed, parent_b) = self.run_backward(u, v, &label_u, net);
            if found {
                self.graph.add_arc(u, v);
                self.halted = true;
                let witness = splice_witness(&self.graph, &parent_b, &HashMap::new(), v, u, v)
                    .map_err(SimError::Internal)?;
                return Ok(InsertOutcome::CycleDetected { witness });
            }
            if ord == std::cmp::Ordering::Less {
                let (meet, parent_f) = self.run_forward(v, &label_u, &probed, net);
                if let Some(meet) = meet {
                    self.graph.add_arc(u, v);
                    self.halted = true;
                    let witness = splice_witness(&self.graph, &parent_b, &parent_f, meet, u, v)
                        .map_err(SimError::Internal)?;
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
                changes += self.repair_label(v, net);
            }
        }
        changes += match self.mode {
            SimMode::TwoWay => self.run_update_two_way(u, v, net),
            SimMode::Queue => self.run_update_queue(u, v, net),
        };
        if ord == std::cmp::Ordering::Greater && changes == 0 {
            Ok(InsertOutcome::AlreadyOrdered)
        } else {
            Ok(InsertOutcome::LabelsUpdated { changes })
        }
    }

    /// Folds [`Self::simulate_insert`] over an arc list, stopping at the
    /// first cycle. Returns one record per processed insertion.
    pub fn run_sequence(
        &mut self,
        arcs: &[(VertexId, VertexId)],
        policy: SchedulePolicy,
    ) -> Result<Vec<(InsertOutcome, MessageCounters)>, SimError> {
        let mut records = Vec::new();
        for &(a, b) in arcs {
            let (outcome, delta) = self.simulate_insert(a, b, policy)?;
            let stop = outcome.is_cycle();
            records.push((outcome, delta));
            if stop {
                break;
            }
        }
        Ok(records)
    }

    fn run_backward(
        &mut self,
        u: VertexId,
        v: VertexId,
        label_u: &Label,
        net: &mut Net,
    ) -> (bool, HashSet<VertexId>, HashMap<VertexId, VertexId>) {
        let mut probed: HashSet<VertexId> = HashSet::from([u]);
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        let mut nodes: HashMap<VertexId, SearchNode> = HashMap::new();
        let mut detected = false;

        for &w in self.graph.in_neighbors(u) {
            net.send(
                MessageKind::BackwardProbe {
                    target: v,
                    label: label_u.clone(),
                },
                u,
                w,
            );
        }

        while let Some(msg) = net.pop() {
            if detected {
                continue; // cycle short-circuit: drain without propagating
            }
            let (w, z) = (msg.dst, msg.src);
            match msg.kind {
                MessageKind::BackwardProbe { target, label } => {
                    if probed.insert(w) {
                        parent.insert(w, z);
                    }
                    if w == target {
                        net.send(MessageKind::CycleReply, w, z);
                        continue;
                    }
                    debug_assert_ne!(w, u, "a probe reached its own initiator");
                    let indeg = self.graph.in_neighbors(w).len();
                    if self.labels[w as usize] == label && indeg > 0 {
                        let node = nodes.entry(w).or_default();
                        if !node.propagated {
                            node.propagated = true;
                            node.pending = indeg;
                            node.got_from.push(z);
                            let ins: Vec<VertexId> = self.graph.in_neighbors(w).to_vec();
                            for x in ins {
                                net.send(
                                    MessageKind::BackwardProbe {
                                        target,
                                        label: label.clone(),
                                    },
                                    w,
                                    x,
                                );
                            }
                        } else if node.resolved {
                            net.send(MessageKind::NoCycleReply, w, z);
                        } else {
                            node.got_from.push(z);
                        }
                    } else {
                        net.send(MessageKind::NoCycleReply, w, z);
                    }
                }
                MessageKind::NoCycleReply => {
                    if w == u {
                        continue; // the initiator just collects replies
                    }
                    let node = nodes
                        .get_mut(&w)
                        .expect("reply targets a propagating vertex");
                    node.pending -= 1;
                    if node.pending == 0 && !node.resolved && !node.cycle_forwarded {
                        node.resolved = true;
                        for z in std::mem::take(&mut node.got_from) {
                            net.send(MessageKind::NoCycleReply, w, z);
                        }
                    }
                }
                MessageKind::CycleReply => {
                    if w == u {
                        detected = true;
                        continue;
                    }
                    let node = nodes.get_mut(&w).expect("cycle reply retraces probes");
                    if !node.cycle_forwarded && !node.resolved {
                        node.cycle_forwarded = true;
                        let first = node.got_from.first().copied().expect("probed from someone");
                        net.send(MessageKind::CycleReply, w, first);
                    }
                }
                other => unreachable!("{} message in backward phase", other.name()),
            }
        }
        (detected, probed, parent)
    }

    fn run_forward(
        &mut self,
        v: VertexId,
        label_u: &Label,
        probed: &HashSet<VertexId>,
        net: &mut Net,
    ) -> (Option<VertexId>, HashMap<VertexId, VertexId>) {
        let mut seen: HashSet<VertexId> = HashSet::from([v]);
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        let mut nodes: HashMap<VertexId, SearchNode> = HashMap::new();
        let mut detected = false;
        let mut meet = None;

        for &w in self.graph.out(v) {
            net.send(
                MessageKind::ForwardProbe {
                    label: label_u.clone(),
                },
                v,
                w,
            );
        }

        while let Some(msg) = net.pop() {
            if detected {
                continue;
            }
            let (w, z) = (msg.dst, msg.src);
            match msg.kind {
                MessageKind::ForwardProbe { label } => {
                    if seen.insert(w) {
                        parent.insert(w, z);
                    }
                    if probed.contains(&w) {
                        if meet.is_none() {
                            meet = Some(w);
                        }
                        net.send(MessageKind::CycleReply, w, z);
                        continue;
                    }
                    debug_assert_ne!(w, v, "a probe reached its own initiator");
                    let outdeg = self.graph.out(w).len();
                    if cmp_lex(&label, &self.labels[w as usize]) == std::cmp::Ordering::Less
                        && outdeg > 0
                    {
                        let node = nodes.entry(w).or_default();
                        if !node.propagated {
                            node.propagated = true;
                            node.pending = outdeg;
                            node.got_from.push(z);
                            let outs: Vec<VertexId> = self.graph.out(w).to_vec();
                            for x in outs {
                                net.send(
                                    MessageKind::ForwardProbe {
                                        label: label.clone(),
                                    },
                                    w,
                                    x,
                                );
                            }
                        } else if node.resolved {
                            net.send(MessageKind::NoCycleReply, w, z);
                        } else {
                            node.got_from.push(z);
                        }
                    } else {
                        net.send(MessageKind::NoCycleReply, w, z);
                    }
                }
                MessageKind::NoCycleReply => {
                    if w == v {
                        continue;
                    }
                    let node = nodes
                        .get_mut(&w)
                        .expect("reply targets a propagating vertex");
                    node.pending -= 1;
                    if node.pending == 0 && !node.resolved && !node.cycle_forwarded {
                        node.resolved = true;
                        for z in std::mem::take(&mut node.got_from) {
                            net.send(MessageKind::NoCycleReply, w, z);
                        }
                    }
                }
                MessageKind::CycleReply => {
                    if w == v {
                        detected = true;
                        continue;
                    }
                    let node = nodes.get_mut(&w).expect("cycle reply retraces probes");
                    if !node.cycle_forwarded && !node.resolved {
                        node.cycle_forwarded = true;
                        let first = node.got_from.first().copied().expect("probed from someone");
                        net.send(MessageKind::CycleReply, w, first);
                    }
                }
                other => unreachable!("{} message in forward phase", other.name()),
            }
        }
        (
            detected.then(|| meet.expect("detection implies a meeting vertex")),
            parent,
        )
    }

    /// Rewrites `l(v)` after a rank decrease (assignment already updated)
    /// and emits the resulting update wave seeds.
    fn repair_label(&mut self, v: VertexId, net: &mut Net) -> u64 {
        let new_rank = self.ranks.rank(v);
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
        let outs: Vec<VertexId> = self.graph.out(v).to_vec();
        let label = self.labels[v as usize].clone();
        for w in outs {
            net.send(
                MessageKind::UpdateMsg {
                    label: label.clone(),
                },
                v,
                w,
            );
        }
        1 + self.drain_updates_two_way(net)
    }

    fn run_update_two_way(&mut self, u: VertexId, v: VertexId, net: &mut Net) -> u64 {
        if cmp_lex(&self.labels[u as usize], &self.labels[v as usize]) == std::cmp::Ordering::Less {
            net.send(
                MessageKind::UpdateMsg {
                    label: self.labels[u as usize].clone(),
                },
                u,
                v,
            );
            self.drain_updates_two_way(net)
        } else {
            0
        }
    }

    fn drain_updates_two_way(&mut self, net: &mut Net) -> u64 {
        let mut changes = 0;
        while let Some(msg) = net.pop() {
            let y = msg.dst;
            let label = match msg.kind {
                MessageKind::UpdateMsg { label } => label,
                other => unreachable!("{} message in update phase", other.name()),
            };
            let merged = merge_for_arc(&label, &self.labels[y as usize], y, self.ranks.rank(y))
                .expect("graph is acyclic");
            if merged != self.labels[y as usize] {
                self.labels[y as usize] = merged;
                self.change_counter[y as usize] += 1;
                changes += 1;
                let outs: Vec<VertexId> = self.graph.out(y).to_vec();
                let carried = self.labels[y as usize].clone();
                for w in outs {
                    net.send(
                        MessageKind::UpdateMsg {
                            label: carried.clone(),
                        },
                        y,
                        w,
                    );
                }
            }
        }
        changes
    }

    fn run_update_queue(&mut self, u: VertexId, v: VertexId, net: &mut Net) -> u64 {
        // Cache initialization for the new arc is one implicit reply.
        self.caches[u as usize].set(v, self.labels[v as usize].clone());
        net.counters.reply += 1;
        if let Some(trace) = &mut net.trace {
            trace.push(TraceEvent {
                seq: net.event_seq,
                kind: "reply",
                src: v,
                dst: u,
                label: self.labels[v as usize].to_string(),
            });
        }
        net.event_seq += 1;

        if cmp_lex(&self.labels[u as usize], &self.labels[v as usize]) == std::cmp::Ordering::Less {
            net.send(
                MessageKind::UpdateMsg {
                    label: self.labels[u as usize].clone(),
                },
                u,
                v,
            );
        }
        let mut changes = 0;
        while let Some(msg) = net.pop() {
            let (y, x) = (msg.dst, msg.src);
            match msg.kind {
                MessageKind::UpdateMsg { label } => {
                    let merged =
                        merge_for_arc(&label, &self.labels[y as usize], y, self.ranks.rank(y))
                            .expect("graph is acyclic");
                    let changed = merged != self.labels[y as usize];
                    if changed {
                        self.labels[y as usize] = merged;
                        self.change_counter[y as usize] += 1;
                        changes += 1;
                    }
                    net.send(
                        MessageKind::LabelReply {
                            label: self.labels[y as usize].clone(),
                        },
                        y,
                        x,
                    );
                    if changed {
                        let current = self.labels[y as usize].clone();
                        for t in self.caches[y as usize].pop_above(&current) {
                            net.send(
                                MessageKind::UpdateMsg {
                                    label: current.clone(),
                                },
                                y,
                                t,
                            );
                        }
                    }
                }
                MessageKind::LabelReply { label } => {
                    self.caches[y as usize].set(x, label);
                    // The sender may have moved below the refreshed cache
                    // entry while the exchange was in flight.
                    let current = self.labels[y as usize].clone();
                    for t in self.caches[y as usize].pop_above(&current) {
                        net.send(
                            MessageKind::UpdateMsg {
                                label: current.clone(),
                            },
                            y,
                            t,
                        );
                    }
                }
                other => unreachable!("{} message in queue update phase", other.name()),
            }
        }
        changes
    }
}
