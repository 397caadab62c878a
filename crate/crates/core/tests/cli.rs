use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn ips(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ips"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn analyze_to(input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "analyze",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ips(&args)
}

#[test]
fn analyze_example_reports_one_block() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = analyze_to(&fixture("paper_example.json"), &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("shape=[(2,2)] support_rank=4 unital=false"));
    let r = read_json(&out);
    assert_eq!(r["shape"], serde_json::json!([[2, 2]]));
    assert_eq!(r["support_rank"], 4);
    assert_eq!(r["fixed_dim"], 4);
    assert_eq!(r["dual_dim"], 4);
    assert!(r.get("timestamp").is_none());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = analyze_to(&fixture("paper_example.json"), out, &["--seed", "11"]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn default_output_path_sits_next_to_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("dep.json");
    fs::copy(fixture("depolarizing_qubit.json"), &input).unwrap();
    let o = ips(&["analyze", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("dep.report.json"));
    assert_eq!(r["shape"], serde_json::json!([[1, 2]]));
}

#[test]
fn unitarily_noiseless_mode_merges_rotating_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = analyze_to(
        &fixture("phase_gate.json"),
        &out,
        &["--mode", "unitarily-noiseless"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&out)["shape"], serde_json::json!([[2, 1]]));
    let o = analyze_to(&fixture("phase_gate.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        read_json(&out)["shape"],
        serde_json::json!([[1, 1], [1, 1]])
    );
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let run = |ch: &str, code: &str, mode: &str| {
        ips(&[
            "verify",
            fixture(ch).to_str().unwrap(),
            fixture(code).to_str().unwrap(),
            "--mode",
            mode,
            "--out",
            out.to_str().unwrap(),
        ])
    };
    let o = run(
        "paper_example.json",
        "paper_example_fixed_code.json",
        "noiseless",
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(read_json(&out)["report"]["verdict"], "pass");

    let o = run(
        "depolarizing_qubit.json",
        "classical_bit_code.json",
        "preserved",
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(read_json(&out)["report"]["verdict"], "fail");

    let o = run(
        "bit_flip_three_qubit.json",
        "bit_flip_code.json",
        "correctable",
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&out)["report"]["verdict"], "pass");
}

#[test]
fn bad_inputs_map_to_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{ not json").unwrap();
    assert_eq!(
        ips(&["analyze", junk.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        ips(&["analyze", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    // Kraus operators that are not trace preserving
    let not_tp = dir.path().join("not_tp.json");
    fs::write(&not_tp, r#"{"dim":1,"kraus":[[[[2.0,0.0]]]]}"#).unwrap();
    let o = ips(&["analyze", not_tp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error"));

    let o = ips(&[
        "analyze",
        fixture("paper_example.json").to_str().unwrap(),
        "--tol-eig=0",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let gen = dir.path().join("g.json");
    let o = ips(&["generate", "--shape", "9:9", "--out", gen.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generated_channels_analyze_to_their_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    for (shape, leak, seed, want) in [
        ("2:2", "1", "3", serde_json::json!([[2, 2]])),
        ("1:1,1:1", "2", "4", serde_json::json!([[1, 1], [1, 1]])),
        ("3:1,1:2", "0", "5", serde_json::json!([[3, 1], [1, 2]])),
        ("2:1", "2", "6", serde_json::json!([[2, 1]])),
    ] {
        let ch = dir.path().join(format!("g{seed}.json"));
        let o = ips(&[
            "generate",
            "--shape",
            shape,
            "--leak",
            leak,
            "--seed",
            seed,
            "--out",
            ch.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let truth = read_json(&dir.path().join(format!("g{seed}.truth.json")));
        assert_eq!(truth["shape"], want);

        let out = dir.path().join(format!("g{seed}.out.json"));
        assert_eq!(analyze_to(&ch, &out, &[]).status.code(), Some(0));
        let r = read_json(&out);
        assert_eq!(r["shape"], want);
        assert_eq!(r["support_rank"], truth["support_rank"]);
    }
}

#[test]
fn directory_mode_analyzes_every_channel() {
    let inputs = tempfile::tempdir().unwrap();
    let outputs = tempfile::tempdir().unwrap();
    for name in ["paper_example.json", "depolarizing_qubit.json"] {
        fs::copy(fixture(name), inputs.path().join(name)).unwrap();
    }
    let o = ips(&[
        "analyze",
        inputs.path().to_str().unwrap(),
        "--out",
        outputs.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("depolarizing_qubit.json: "));
    assert!(lines[1].starts_with("paper_example.json: "));
    assert!(outputs.path().join("paper_example.report.json").exists());
    assert!(outputs
        .path()
        .join("depolarizing_qubit.report.json")
        .exists());

    // one bad file makes the whole batch fail, but the rest still run
    fs::write(inputs.path().join("broken.json"), "[]").unwrap();
    let o = ips(&[
        "analyze",
        inputs.path().to_str().unwrap(),
        "--out",
        outputs.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().count(), 2);
}
