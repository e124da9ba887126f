//! The four subcommands. Exit codes: 0 ok, 1 verification mismatch,
//! 2 usage, 3 I/O.

use std::fs;
use std::io::Write;
use std::time::Instant;

use thiserror::Error;

use lexdag::generators::{append_final_cycle, EdgeList, GenError, Generator};
use lexdag::{
    lookup_variant, preset_q, InsertOutcome, QPreset, RunConfig, SchedulePolicy, Variant,
};

use crate::args::{BenchArgs, GenArgs, RunArgs, VerifyArgs};
use crate::fit::log_log_slope;
use crate::record::{RunRecord, CSV_HEADER};
use crate::verify::verify_sequence;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn read_sequence(path: &str) -> Result<EdgeList, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    EdgeList::parse(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn write_output(path: &Option<String>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, content).map_err(|e| CliError::Io(format!("cannot write {p}: {e}")))
        }
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn resolve_variant(name: &str) -> Result<&'static dyn Variant, CliError> {
    lookup_variant(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown variant `{name}`; expected one of: {}",
            lexdag::variant_names().join(", ")
        ))
    })
}

fn resolve_policy(name: &str, seed: u64) -> Result<SchedulePolicy, CliError> {
    SchedulePolicy::parse(name, seed ^ 0x7e11).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown policy `{name}`; expected fifo, lifo or random"
        ))
    })
}

fn resolve_preset(name: &str) -> Result<QPreset, CliError> {
    QPreset::parse(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))
}

fn resolve_q(
    q: Option<f64>,
    preset: &Option<String>,
    variant: &dyn Variant,
    n: usize,
    m: usize,
) -> Result<f64, CliError> {
    if let Some(q) = q {
        if !(q > 0.0 && q <= 1.0) {
            return Err(CliError::Usage(format!("q must lie in (0, 1], got {q}")));
        }
        return Ok(q);
    }
    let preset = match preset {
        Some(name) => resolve_preset(name)?,
        None => variant.default_preset(),
    };
    preset_q(preset, n, m).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let gen = match args.kind.as_str() {
        "path" => Generator::Path { n: args.n },
        "random-dag" => Generator::RandomDagOrder {
            n: args.n,
            m: args
                .m
                .ok_or_else(|| CliError::Usage("random-dag needs --m".into()))?,
            max_out: args.max_out,
            seed: args.seed,
        },
        "layered" => Generator::Layered {
            n: args.n,
            layers: args
                .layers
                .ok_or_else(|| CliError::Usage("layered needs --layers".into()))?,
            m: args
                .m
                .ok_or_else(|| CliError::Usage("layered needs --m".into()))?,
            seed: args.seed,
        },
        "dense-all" => Generator::DenseAll {
            n: args.n,
            seed: args.seed,
        },
        other => return Err(CliError::Usage(format!("unknown generator kind `{other}`"))),
    };
    let mut list = gen.generate().map_err(|e| match e {
        GenError::Parse(msg) => CliError::Io(msg),
        other => CliError::Usage(other.to_string()),
    })?;
    if args.final_cycle {
        append_final_cycle(&mut list, args.seed ^ 0xc1c1e)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    write_output(&args.out, &list.render())
}

fn run_once(
    variant: &dyn Variant,
    seq: &EdgeList,
    q: f64,
    policy: SchedulePolicy,
    policy_name: &str,
    seed: u64,
) -> Result<(RunRecord, lexdag::snapshot::Snapshot), CliError> {
    let started = Instant::now();
    let stats = variant
        .run(
            seq,
            &RunConfig {
                q,
                rank_seed: seed,
                policy,
            },
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let wall_ms = started.elapsed().as_millis() as u64;
    let witness = match &stats.outcome {
        Some(InsertOutcome::CycleDetected { witness }) => Some(witness.clone()),
        _ => None,
    };
    let record = RunRecord::new(
        seq.n,
        seq.arcs.len(),
        q,
        variant.name(),
        policy_name,
        seed,
        stats.counters,
        stats.label_changes,
        wall_ms,
        stats.outcome_str().to_string(),
        witness,
    );
    Ok((record, stats.snapshot))
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let variant = resolve_variant(&args.variant)?;
    let seq = read_sequence(&args.file)?;
    let q = resolve_q(args.q, &args.preset, variant, seq.n, seq.arcs.len())?;
    let policy = resolve_policy(&args.policy, args.seed)?;

    if args.trace {
        // Traced run: drive the simulator directly so the events are kept.
        let ranks = variant
            .build_ranks(seq.n, q, args.seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut sim = lexdag::Simulator::new(ranks, variant.sim_mode());
        sim.enable_trace();
        sim.run_sequence(&seq.arcs, policy)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for event in sim.trace() {
            eprintln!("{}", event.render());
        }
    }

    let (record, snapshot) = run_once(variant, &seq, q, policy, &args.policy, args.seed)?;
    if let Some(path) = &args.snapshot_out {
        fs::write(path, snapshot.to_json())
            .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
    }
    println!("{}", record.to_json());
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let variant = resolve_variant(&args.variant)?;
    let seq = read_sequence(&args.file)?;
    let q = resolve_q(args.q, &args.preset, variant, seq.n, seq.arcs.len())?;
    match verify_sequence(variant, &seq, q, args.seeds) {
        Ok(checked) => {
            println!(
                "verify: OK — {} insertions checked across {} seeds (variant {}, q {})",
                checked,
                args.seeds,
                variant.name(),
                q
            );
            Ok(())
        }
        Err(m) => {
            println!("verify: FAIL — {m}");
            Err(CliError::Mismatch(m.to_string()))
        }
    }
}

fn bench_generator(args: &BenchArgs, n: usize, seed: u64) -> Result<EdgeList, CliError> {
    let gen = match args.gen.as_str() {
        "random-dag" => Generator::RandomDagOrder {
            n,
            m: args.m_factor * n,
            max_out: args.max_out,
            seed,
        },
        "dense-all" => Generator::DenseAll { n, seed },
        "layered" => Generator::Layered {
            n,
            layers: args.layers,
            m: args.m_factor * n,
            seed,
        },
        "path" => Generator::Path { n },
        other => return Err(CliError::Usage(format!("unknown generator kind `{other}`"))),
    };
    gen.generate().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let variants: Vec<&'static dyn Variant> = if args.variant.is_empty() {
        lexdag::variant_names()
            .iter()
            .map(|n| lookup_variant(n).expect("registry name"))
            .collect()
    } else {
        args.variant
            .iter()
            .map(|n| resolve_variant(n))
            .collect::<Result<_, _>>()?
    };
    // Per-variant preset lists; one `None` entry means "explicit --q, or
    // each variant's own default preset".
    let presets: Vec<Option<QPreset>> = if args.q.is_some() || args.preset.is_empty() {
        vec![None]
    } else {
        args.preset
            .iter()
            .map(|p| resolve_preset(p).map(Some))
            .collect::<Result<_, _>>()?
    };

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut rows: Vec<RunRecord> = Vec::new();
    for &n in &args.sizes {
        for variant in &variants {
            for preset in &presets {
                for seed in 0..args.seeds {
                    let mut seq = bench_generator(args, n, seed)?;
                    let m = seq.arcs.len();
                    let q = match (args.q, preset) {
                        (Some(q), _) => q,
                        (None, Some(p)) => {
                            preset_q(*p, n, m).map_err(|e| CliError::Usage(e.to_string()))?
                        }
                        (None, None) => preset_q(variant.default_preset(), n, m)
                            .map_err(|e| CliError::Usage(e.to_string()))?,
                    };
                    match args.order.as_str() {
                        "shuffled" => {}
                        "rank-descent" => {
                            let ranks = variant
                                .build_ranks(seq.n, q, seed)
                                .map_err(|e| CliError::Usage(e.to_string()))?;
                            lexdag::generators::order_by_descending_source_rank(&mut seq, &ranks);
                        }
                        other => return Err(CliError::Usage(format!("unknown order `{other}`"))),
                    }
                    let policy = resolve_policy(&args.policy, seed)?;
                    let (record, _) = run_once(*variant, &seq, q, policy, &args.policy, seed)?;
                    csv.push_str(&record.csv_row());
                    csv.push('\n');
                    rows.push(record);
                }
            }
        }
    }
    write_output(&args.out, &csv)?;

    if args.fit {
        for variant in &variants {
            let points: Vec<(f64, f64)> = args
                .sizes
                .iter()
                .map(|&n| {
                    let totals: Vec<u64> = rows
                        .iter()
                        .filter(|r| r.n == n && r.variant == variant.name())
                        .map(|r| r.total_msgs)
                        .collect();
                    let mean = totals.iter().sum::<u64>() as f64 / totals.len().max(1) as f64;
                    (n as f64, mean)
                })
                .collect();
            match log_log_slope(&points) {
                Some(slope) => eprintln!("# fit variant={} slope_n={:.4}", variant.name(), slope),
                None => eprintln!("# fit variant={} slope_n=nan", variant.name()),
            }
        }
    }
    Ok(())
}
