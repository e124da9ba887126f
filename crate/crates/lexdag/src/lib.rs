//! Incremental cycle detection in growing directed acyclic graphs.
//!
//! Arcs arrive one at a time; the library reports whether each insertion
//! closes a cycle and otherwise keeps a *weak topological order* encoded in
//! per-vertex labels. A label is a sequence of ranked vertices with strictly
//! increasing ranks; its rank sequence (with an infinite sentinel appended)
//! descends lexicographically along every arc, so comparing two labels can
//! rule out the existence of a path without traversing the graph.
//!
//! The crate ships three interchangeable algorithm variants behind the
//! [`variant::Variant`] trait, selected by name at runtime:
//!
//! * `two-way-vertex` — vertices are ranked independently with probability
//!   `q`; insertions run a label-pruned backward search plus a forward
//!   search, then propagate label merges ([`engine`]).
//! * `two-way-arc` — arcs are ranked with probability `q` and a vertex's
//!   rank is the minimum rank of its ranked incoming arcs.
//! * `queue-full` — every vertex is ranked and forward propagation is
//!   filtered through per-vertex priority queues of cached neighbor labels
//!   ([`queue`]).
//!
//! [`sim`] runs the same protocols as literal per-vertex message handlers
//! under a pluggable delivery schedule and tallies messages by kind.
//! [`oracle`] recomputes labels and reachability from scratch and is the
//! ground truth every other module is tested against.

pub mod engine;
pub mod generators;
pub mod graph;
pub mod label;
pub mod oracle;
pub mod queue;
pub mod ranks;
pub mod sim;
pub mod snapshot;
pub mod variant;

pub use engine::{Engine, EngineError, InsertOutcome, PropagationPolicy};
pub use graph::{Digraph, VertexId};
pub use label::{cmp_lex, lcp, merge_for_arc, Label, LabelEntry, MergeError, Rank};
pub use queue::QueueEngine;
pub use ranks::{preset_q, QPreset, RankAssignment, RankError, RankMode};
pub use sim::{MessageCounters, MessageKind, SchedulePolicy, SimMode, Simulator};
pub use variant::{lookup_variant, variant_names, RunConfig, RunStats, Variant};
