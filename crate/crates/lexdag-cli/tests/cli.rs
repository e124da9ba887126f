//! End-to-end checks of the binary surface: formats, outcomes, exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use lexdag::generators::EdgeList;
use lexdag::oracle;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lexdag")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("lexdag-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run_ok(args: &[&str]) -> Output {
    let out = Command::new(bin()).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "lexdag {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn gen_path_is_zero_based_and_ordered() {
    let out = run_ok(&["gen", "--kind", "path", "--n", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n 3\n0 1\n1 2\n");
}

#[test]
fn gen_dense_all_emits_every_forward_arc() {
    let out = run_ok(&["gen", "--kind", "dense-all", "--n", "3", "--seed", "5"]);
    let list = EdgeList::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(list.arcs.len(), 3);
}

#[test]
fn gen_final_cycle_closes_against_the_prefix() {
    let out = run_ok(&[
        "gen",
        "--kind",
        "random-dag",
        "--n",
        "20",
        "--m",
        "50",
        "--seed",
        "8",
        "--final-cycle",
    ]);
    let list = EdgeList::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let (last, prefix) = list.arcs.split_last().unwrap();
    let mut g = lexdag::Digraph::with_vertices(list.n);
    for &(a, b) in prefix {
        g.add_arc(a, b);
    }
    assert!(
        oracle::reaches(&g, last.1, last.0),
        "final arc {last:?} does not close a cycle"
    );
}

#[test]
fn run_path_under_full_ranking_updates_labels() {
    let file = tmp("path4.txt");
    run_ok(&[
        "gen",
        "--kind",
        "path",
        "--n",
        "4",
        "--out",
        file.to_str().unwrap(),
    ]);
    // Seed 5 samples ranks ascending along the path, so every insertion
    // lands a merge.
    let out = run_ok(&[
        "run",
        "--file",
        file.to_str().unwrap(),
        "--variant",
        "queue-full",
        "--seed",
        "5",
    ]);
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["outcome"], "labels-updated");
    assert_eq!(rec["cycle"], 0);
    assert_eq!(rec["n"], 4);
    assert_eq!(rec["m"], 3);
    assert!(rec.get("witness").is_none());
}

#[test]
fn run_reports_cycle_with_witness_and_snapshot() {
    let file = tmp("cycle4.txt");
    // 0 -> 1 -> 2 -> 3 plus the closing arc.
    std::fs::write(&file, "# four vertex cycle\nn 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let snap_file = tmp("cycle4.snapshot.json");
    let out = run_ok(&[
        "run",
        "--file",
        file.to_str().unwrap(),
        "--variant",
        "two-way-vertex",
        "--q",
        "0.5",
        "--seed",
        "11",
        "--snapshot-out",
        snap_file.to_str().unwrap(),
    ]);
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["outcome"], "cycle-detected");
    let witness: Vec<u32> = rec["witness"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as u32)
        .collect();
    assert_eq!(witness.first(), witness.last());
    assert!(witness.len() >= 3);

    let snap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&snap_file).unwrap()).unwrap();
    assert_eq!(snap["vertices"], 4);
    assert_eq!(snap["halted"], true);
    assert_eq!(snap["arcs"].as_array().unwrap().len(), 4);
    assert_eq!(snap["labels"].as_array().unwrap().len(), 4);
}

#[test]
fn run_trace_is_printed_to_stderr() {
    let file = tmp("path2.txt");
    run_ok(&[
        "gen",
        "--kind",
        "path",
        "--n",
        "2",
        "--out",
        file.to_str().unwrap(),
    ]);
    let out = run_ok(&[
        "run",
        "--file",
        file.to_str().unwrap(),
        "--variant",
        "queue-full",
        "--seed",
        "5",
        "--trace",
    ]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr
            .lines()
            .all(|l| l.starts_with("seq=") && l.contains(" kind=")),
        "unexpected trace output: {stderr}"
    );
    assert!(
        stderr.lines().count() >= 2,
        "expected update and reply events"
    );
}

#[test]
fn verify_accepts_generated_sequences() {
    let file = tmp("verify.txt");
    run_ok(&[
        "gen",
        "--kind",
        "random-dag",
        "--n",
        "24",
        "--m",
        "70",
        "--seed",
        "6",
        "--final-cycle",
        "--out",
        file.to_str().unwrap(),
    ]);
    for variant in ["two-way-vertex", "two-way-arc", "queue-full"] {
        let out = run_ok(&[
            "verify",
            "--file",
            file.to_str().unwrap(),
            "--variant",
            variant,
            "--seeds",
            "3",
        ]);
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.starts_with("verify: OK"), "{variant}: {stdout}");
    }
    // A heavily unranked instance keeps the equal-label path busy.
    let out = run_ok(&[
        "verify",
        "--file",
        file.to_str().unwrap(),
        "--variant",
        "two-way-vertex",
        "--q",
        "0.05",
        "--seeds",
        "5",
    ]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("verify: OK"));
}

#[test]
fn bench_row_counts_and_header() {
    let out = run_ok(&[
        "bench",
        "--sizes",
        "100,200,400",
        "--variant",
        "two-way-vertex",
        "--preset",
        "msg-vertex",
        "--seeds",
        "2",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], lexdag_cli::CSV_HEADER);
    assert_eq!(lines.len(), 1 + 3 * 2, "3 sizes x 2 seeds");

    // Empty sweep: header only.
    let out = run_ok(&["bench", "--variant", "queue-full"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        format!("{}\n", lexdag_cli::CSV_HEADER)
    );

    // The rank-descent order is accepted and changes message volume.
    let out = run_ok(&[
        "bench",
        "--sizes",
        "128",
        "--variant",
        "two-way-vertex",
        "--seeds",
        "2",
        "--max-out",
        "4",
        "--m-factor",
        "3",
        "--order",
        "rank-descent",
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn exit_codes_match_the_contract() {
    // 2: usage (unknown variant, impossible generator parameters).
    let out = Command::new(bin())
        .args(["run", "--file", "/dev/null", "--variant", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin())
        .args(["gen", "--kind", "random-dag", "--n", "4", "--m", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 3: I/O (missing file, malformed file).
    let out = Command::new(bin())
        .args(["run", "--file", "/no/such/file", "--variant", "queue-full"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let bad = tmp("bad.txt");
    std::fs::write(&bad, "0 1\n").unwrap();
    let out = Command::new(bin())
        .args([
            "run",
            "--file",
            bad.to_str().unwrap(),
            "--variant",
            "queue-full",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
