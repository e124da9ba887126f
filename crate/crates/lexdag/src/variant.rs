//! Algorithm variants behind one trait, registered by name and selected at
//! runtime.
//!
//! A variant owns two decisions: how ranks are assigned (vertex sampling,
//! arc sampling, or full ranking) and which propagation protocol the
//! simulator runs. Everything else — detection semantics, counters,
//! snapshots — is shared machinery.

use thiserror::Error;

use crate::engine::InsertOutcome;
use crate::generators::EdgeList;
use crate::ranks::{
    arc_scheme, full_scheme, sample_vertex_scheme, QPreset, RankAssignment, RankError, RankMode,
};
use crate::sim::{MessageCounters, SchedulePolicy, SimError, SimMode, Simulator};
use crate::snapshot::Snapshot;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VariantError {
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-run knobs common to all variants.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub q: f64,
    pub rank_seed: u64,
    pub policy: SchedulePolicy,
}

/// What a run produced, independent of output format.
#[derive(Clone, Debug)]
pub struct RunStats {
    /// Outcome of the last processed insertion; `None` for an empty
    /// sequence.
    pub outcome: Option<InsertOutcome>,
    /// Insertions actually processed (a cycle stops the run early).
    pub processed: usize,
    pub counters: MessageCounters,
    pub label_changes: u64,
    pub snapshot: Snapshot,
}

impl RunStats {
    pub fn outcome_str(&self) -> &'static str {
        self.outcome.as_ref().map_or("none", |o| o.as_str())
    }
}

/// One interchangeable algorithm variant.
pub trait Variant: Sync {
    /// Registry key, also the CLI `--variant` value.
    fn name(&self) -> &'static str;

    fn rank_mode(&self) -> RankMode;

    /// Preset used when the caller specifies neither `--q` nor `--preset`.
    fn default_preset(&self) -> QPreset;

    fn sim_mode(&self) -> SimMode;

    fn build_ranks(&self, n: usize, q: f64, seed: u64) -> Result<RankAssignment, RankError>;

    /// Replays the sequence through the message simulator, stopping at the
    /// first cycle.
    fn run(&self, seq: &EdgeList, cfg: &RunConfig) -> Result<RunStats, VariantError> {
        let ranks = self.build_ranks(seq.n, cfg.q, cfg.rank_seed)?;
        let mut sim = Simulator::new(ranks, self.sim_mode());
        let records = sim.run_sequence(&seq.arcs, cfg.policy)?;
        Ok(RunStats {
            outcome: records.last().map(|(o, _)| o.clone()),
            processed: records.len(),
            counters: sim.counters(),
            label_changes: sim.total_changes(),
            snapshot: sim.snapshot(),
        })
    }
}

/// Vertices ranked independently with probability `q`; two-way search.
pub struct TwoWayVertex;

impl Variant for TwoWayVertex {
    fn name(&self) -> &'static str {
        "two-way-vertex"
    }

    fn rank_mode(&self) -> RankMode {
        RankMode::VertexQ
    }

    fn default_preset(&self) -> QPreset {
        QPreset::MsgVertex
    }

    fn sim_mode(&self) -> SimMode {
        SimMode::TwoWay
    }

    fn build_ranks(&self, n: usize, q: f64, seed: u64) -> Result<RankAssignment, RankError> {
        sample_vertex_scheme(n, q, seed)
    }
}

/// Arcs ranked with probability `q`; a vertex's rank is the minimum over
/// its ranked incoming arcs. Two-way search.
pub struct TwoWayArc;

impl Variant for TwoWayArc {
    fn name(&self) -> &'static str {
        "two-way-arc"
    }

    fn rank_mode(&self) -> RankMode {
        RankMode::ArcQ
    }

    fn default_preset(&self) -> QPreset {
        QPreset::MsgArc
    }

    fn sim_mode(&self) -> SimMode {
        SimMode::TwoWay
    }

    fn build_ranks(&self, n: usize, q: f64, seed: u64) -> Result<RankAssignment, RankError> {
        arc_scheme(n, q, seed)
    }
}

/// Every vertex ranked; propagation filtered through cached-label queues.
pub struct QueueFull;

impl Variant for QueueFull {
    fn name(&self) -> &'static str {
        "queue-full"
    }

    fn rank_mode(&self) -> RankMode {
        RankMode::Full
    }

    fn default_preset(&self) -> QPreset {
        QPreset::FullRank
    }

    fn sim_mode(&self) -> SimMode {
        SimMode::Queue
    }

    fn build_ranks(&self, n: usize, _q: f64, seed: u64) -> Result<RankAssignment, RankError> {
        Ok(full_scheme(n, seed))
    }
}

static REGISTRY: [&dyn Variant; 3] = [&TwoWayVertex, &TwoWayArc, &QueueFull];

pub fn variant_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|v| v.name()).collect()
}

pub fn lookup_variant(name: &str) -> Option<&'static dyn Variant> {
    REGISTRY.iter().copied().find(|v| v.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Generator;

    #[test]
    fn registry_resolves_names() {
        assert_eq!(
            variant_names(),
            vec!["two-way-vertex", "two-way-arc", "queue-full"]
        );
        for name in variant_names() {
            assert_eq!(lookup_variant(name).unwrap().name(), name);
        }
        assert!(lookup_variant("unknown").is_none());
    }

    #[test]
    fn every_variant_runs_a_small_sequence() {
        let seq = Generator::RandomDagOrder {
            n: 16,
            m: 30,
            max_out: None,
            seed: 5,
        }
        .generate()
        .unwrap();
        for name in variant_names() {
            let variant = lookup_variant(name).unwrap();
            let stats = variant
                .run(
                    &seq,
                    &RunConfig {
                        q: 0.4,
                        rank_seed: 9,
                        policy: SchedulePolicy::Fifo,
                    },
                )
                .unwrap();
            assert_eq!(stats.processed, seq.arcs.len(), "{name} stopped early");
            assert!(!stats.snapshot.halted);
            assert_ne!(stats.outcome_str(), "cycle-detected");
        }
    }

    #[test]
    fn queue_variant_ignores_q() {
        let seq = Generator::Path { n: 4 }.generate().unwrap();
        let v = lookup_variant("queue-full").unwrap();
        let a = v
            .run(
                &seq,
                &RunConfig {
                    q: 0.1,
                    rank_seed: 2,
                    policy: SchedulePolicy::Fifo,
                },
            )
            .unwrap();
        let b = v
            .run(
                &seq,
                &RunConfig {
                    q: 0.9,
                    rank_seed: 2,
                    policy: SchedulePolicy::Fifo,
                },
            )
            .unwrap();
        assert_eq!(a.snapshot.to_json(), b.snapshot.to_json());
    }
}
