use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockforge"))
        .args(args)
        .current_dir(dir)
        .env_remove("BLOCKFORGE_THREADS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bin(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

const SHORT: [&str; 6] = ["--burnin", "100", "--samples", "20", "--thin", "2"];

fn simulated(dir: &Path) {
    ok(
        dir,
        &[
            "simulate", "--nodes", "30", "--K", "3", "--seed", "4", "-o", "sim",
        ],
    );
}

#[test]
fn simulate_writes_network_truth_and_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &["simulate", "--scenario", "1", "--seed", "2", "-o", "s1"],
    );
    let truth = read(d, "s1/truth.csv");
    assert_eq!(truth.trim().split(',').count(), 100);
    let blocks = read(d, "s1/blocks.csv");
    assert_eq!(blocks.lines().count(), 5);
    assert!(read(d, "s1/network.txt").starts_with("# n=100"));
    let m: serde_json::Value = serde_json::from_str(&read(d, "s1/manifest.json")).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 2);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 3);

    simulated(d);
    assert_eq!(read(d, "sim/truth.csv").trim().split(',').count(), 30);
}

#[test]
fn fit_evaluate_ppc_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    simulated(d);
    let mut args = vec![
        "fit",
        "-i",
        "sim/network.txt",
        "--model",
        "cbm",
        "--Q",
        "2",
        "--seed",
        "9",
        "-o",
        "fit",
    ];
    args.extend(SHORT);
    ok(d, &args);
    assert_eq!(read(d, "fit/checkpoints.jsonl").lines().count(), 20);
    assert_eq!(read(d, "fit/trace.csv").lines().count(), 21);

    ok(
        d,
        &[
            "evaluate",
            "--fit-dir",
            "fit",
            "--truth",
            "sim/truth.csv",
            "-o",
            "ev",
        ],
    );
    let report = read(d, "ev/report.csv");
    let mut lines = report.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("run_id,model,prior,vi_to_truth"));
    let row = lines.next().unwrap();
    assert!(row.contains(",cbm,dp,"), "{row}");
    assert!(lines.next().is_none());

    ok(
        d,
        &["ppc", "--fit-dir", "fit", "--replicates", "2", "-o", "ppc"],
    );
    let ppc = read(d, "ppc/ppc.csv");
    for stat in ["density", "mean_degree", "transitivity"] {
        assert!(ppc.lines().any(|l| l.starts_with(stat)), "{stat} missing");
    }
    // 20 draws, 2 replicates each
    let long = read(d, "ppc/ppc_long.csv");
    assert_eq!(
        long.lines().filter(|l| l.starts_with("density,")).count(),
        40
    );
}

#[test]
fn manifest_replays_a_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    simulated(d);
    let mut args = vec![
        "fit",
        "-i",
        "sim/network.txt",
        "--prior",
        "gnp",
        "--gamma",
        "0.3",
        "--seed",
        "3",
        "-o",
        "a",
    ];
    args.extend(SHORT);
    ok(d, &args);
    ok(d, &["fit", "--config", "a/manifest.json", "-o", "b"]);
    assert_eq!(
        read(d, "a/checkpoints.jsonl"),
        read(d, "b/checkpoints.jsonl")
    );
    assert_eq!(read(d, "a/trace.csv"), read(d, "b/trace.csv"));
    // an override changes the chain
    ok(
        d,
        &[
            "fit",
            "--config",
            "a/manifest.json",
            "--seed",
            "4",
            "-o",
            "c",
        ],
    );
    assert_ne!(
        read(d, "a/checkpoints.jsonl"),
        read(d, "c/checkpoints.jsonl")
    );
}

#[test]
fn compare_full_grid_is_thread_count_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    simulated(d);
    let run = |out: &str, threads: &str| {
        let mut args = vec![
            "compare",
            "-i",
            "sim/network.txt",
            "--truth",
            "sim/truth.csv",
            "--Q",
            "2",
            "--seed",
            "1",
        ];
        args.extend([
            "--burnin",
            "40",
            "--samples",
            "10",
            "--thin",
            "1",
            "-o",
            out,
        ]);
        let o = Command::new(env!("CARGO_BIN_EXE_blockforge"))
            .args(&args)
            .current_dir(d)
            .env("BLOCKFORGE_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(d, &format!("{out}/compare.csv"))
    };
    let one = run("c1", "1");
    assert_eq!(one.lines().count(), 13);
    let cells: Vec<String> = one
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).take(2).collect::<Vec<_>>().join(":"))
        .collect();
    assert_eq!(cells[0], "cm:dm");
    assert_eq!(cells[11], "cbm:gnp");
    assert!(one
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0000000000000001-00,"));
    assert_eq!(one, run("c2", "2"));

    ok(
        d,
        &[
            "compare",
            "-i",
            "sim/network.txt",
            "--grid",
            "cdm:pyp,cm:dp",
            "--burnin",
            "20",
            "--samples",
            "5",
            "-o",
            "c3",
        ],
    );
    assert_eq!(read(d, "c3/compare.csv").lines().count(), 3);
}

#[test]
fn elicit_prints_every_prior() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    simulated(d);
    let out = ok(d, &["elicit", "-i", "sim/network.txt"]);
    let kinds: Vec<String> = out
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["prior"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(kinds, ["dm", "dp", "pyp", "gnp"]);
    assert!(!d.join("manifest.json").exists());

    let out = ok(
        d,
        &[
            "elicit",
            "-i",
            "sim/network.txt",
            "--prior",
            "dm",
            "--K",
            "7",
            "-o",
            "el",
        ],
    );
    assert_eq!(out.lines().count(), 1);
    assert_eq!(read(d, "el/elicit.jsonl"), out);
    assert!(d.join("el/manifest.json").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    simulated(d);
    let code = |args: &[&str]| bin(d, args).status.code().unwrap();
    assert_eq!(code(&["fit", "--no-such-flag"]), 2);
    assert_eq!(
        code(&[
            "fit",
            "-i",
            "sim/network.txt",
            "--prior",
            "pyp",
            "--alpha",
            "1",
            "--sigma",
            "1.5",
            "-o",
            "x"
        ]),
        2
    );
    assert_eq!(
        code(&["fit", "-i", "sim/network.txt", "--model", "sbm", "-o", "x"]),
        2
    );
    assert_eq!(
        code(&["fit", "-i", "sim/network.txt", "--thin", "0", "-o", "x"]),
        2
    );
    fs::write(d.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&["fit", "--config", "bad.json"]), 2);
    assert_eq!(code(&["fit", "-i", "missing.txt", "-o", "x"]), 1);
    fs::write(d.join("broken.txt"), "1 2\n3 x\n").unwrap();
    assert_eq!(code(&["elicit", "-i", "broken.txt"]), 1);
    assert_eq!(code(&["evaluate", "-i", "sim/network.txt", "-o", "x"]), 2);
}
