//! Command-line surface.

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "lexdag",
    about = "Incremental cycle detection on growing DAGs: generators, runs, verification, benchmarks",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a seeded insertion sequence as an edge-list file.
    Gen(GenArgs),
    /// Replay one sequence under a variant and emit a JSON run record.
    Run(RunArgs),
    /// Replay a sequence with per-insertion oracle cross-checks.
    Verify(VerifyArgs),
    /// Sweep sizes x variants x presets x seeds and emit CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Sequence shape: path, random-dag, layered, dense-all.
    #[arg(long)]
    pub kind: String,

    /// Vertex count.
    #[arg(long)]
    pub n: usize,

    /// Arc count (random-dag, layered).
    #[arg(long)]
    pub m: Option<usize>,

    /// Layer count (layered).
    #[arg(long)]
    pub layers: Option<usize>,

    /// Out-degree cap (random-dag).
    #[arg(long)]
    pub max_out: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Append one back arc so exactly the last insertion closes a cycle.
    #[arg(long)]
    pub final_cycle: bool,

    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Edge-list file to replay.
    #[arg(long)]
    pub file: String,

    /// Variant name: two-way-vertex, two-way-arc, queue-full.
    #[arg(long)]
    pub variant: String,

    /// Explicit ranking probability; overrides --preset.
    #[arg(long)]
    pub q: Option<f64>,

    /// q preset: sparse32, balanced23, full, msg-vertex, msg-arc.
    #[arg(long)]
    pub preset: Option<String>,

    /// Message delivery schedule: fifo, lifo, random.
    #[arg(long, default_value = "fifo")]
    pub policy: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Print the message trace to stderr, one line per event.
    #[arg(long)]
    pub trace: bool,

    /// Write the final state snapshot (JSON) to this file.
    #[arg(long)]
    pub snapshot_out: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub file: String,

    #[arg(long)]
    pub variant: String,

    #[arg(long)]
    pub q: Option<f64>,

    #[arg(long)]
    pub preset: Option<String>,

    /// Number of rank seeds to replay under.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated vertex counts; an empty sweep emits a header-only
    /// CSV.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,

    /// Comma-separated variant names; defaults to all registered variants.
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<String>,

    /// Comma-separated q presets; each variant defaults to its own preset.
    #[arg(long, value_delimiter = ',')]
    pub preset: Vec<String>,

    /// Explicit q overriding all presets.
    #[arg(long)]
    pub q: Option<f64>,

    #[arg(long, default_value = "fifo")]
    pub policy: String,

    /// Rank/sequence seeds per configuration: runs seeds 0..N.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,

    /// Sequence shape: random-dag, dense-all, layered, path.
    #[arg(long, default_value = "random-dag")]
    pub gen: String,

    /// Arc arrival order: shuffled, or rank-descent (sources arrive by
    /// descending rank — the high-churn regime).
    #[arg(long, default_value = "shuffled")]
    pub order: String,

    /// Arcs per vertex for random-dag/layered sweeps (m = factor * n).
    #[arg(long, default_value_t = 4)]
    pub m_factor: usize,

    /// Out-degree cap for random-dag sweeps.
    #[arg(long)]
    pub max_out: Option<usize>,

    /// Layer count for layered sweeps.
    #[arg(long, default_value_t = 4)]
    pub layers: usize,

    /// Print least-squares slopes of log mean messages vs log n to stderr.
    #[arg(long)]
    pub fit: bool,

    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}
