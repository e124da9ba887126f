//! The per-run record shared by `run` (JSON) and `bench` (CSV).

use lexdag::{MessageCounters, VertexId};
use serde::Serialize;

pub const CSV_HEADER: &str =
    "n,m,q,variant,policy,seed,backward,forward,cycle,nocycle,update,reply,total_msgs,label_changes,wall_ms,outcome";

#[derive(Serialize, Clone, Debug)]
pub struct RunRecord {
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub variant: String,
    pub policy: String,
    pub seed: u64,
    pub backward: u64,
    pub forward: u64,
    pub cycle: u64,
    pub nocycle: u64,
    pub update: u64,
    pub reply: u64,
    pub total_msgs: u64,
    pub label_changes: u64,
    pub wall_ms: u64,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<VertexId>>,
}

impl RunRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        q: f64,
        variant: &str,
        policy: &str,
        seed: u64,
        counters: MessageCounters,
        label_changes: u64,
        wall_ms: u64,
        outcome: String,
        witness: Option<Vec<VertexId>>,
    ) -> RunRecord {
        RunRecord {
            n,
            m,
            q,
            variant: variant.to_string(),
            policy: policy.to_string(),
            seed,
            backward: counters.backward,
            forward: counters.forward,
            cycle: counters.cycle,
            nocycle: counters.nocycle,
            update: counters.update,
            reply: counters.reply,
            total_msgs: counters.total(),
            label_changes,
            wall_ms,
            outcome,
            witness,
        }
    }

    /// One CSV row matching [`CSV_HEADER`]; `wall_ms` is the only
    /// non-reproducible column.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.q,
            self.variant,
            self.policy,
            self.seed,
            self.backward,
            self.forward,
            self.cycle,
            self.nocycle,
            self.update,
            self.reply,
            self.total_msgs,
            self.label_changes,
            self.wall_ms,
            self.outcome
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
