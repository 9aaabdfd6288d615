use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coarselab"));
    cmd.current_dir(root()).args(args);
    if let Some(p) = out {
        cmd.arg("--out").arg(p);
    }
    cmd.output().unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = run(args, Some(&path));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| "null".into());
    (
        o.status.code().unwrap(),
        serde_json::from_str(&text).unwrap(),
    )
}

fn corpus() -> Vec<(i32, Vec<String>)> {
    let text = std::fs::read_to_string(root().join("corpus/commands.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut parts = l.split_whitespace();
            let code = parts.next().unwrap().parse().unwrap();
            (code, parts.map(String::from).collect())
        })
        .collect()
}

#[test]
fn corpus_exit_codes() {
    for (code, args) in corpus() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&args, None);
        assert_eq!(
            o.status.code(),
            Some(code),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(
            serde_json::from_slice::<Value>(&o.stdout).is_ok(),
            "{args:?} printed no JSON"
        );
        assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
    }
}

#[test]
fn folding_report_has_delta_per_scale() {
    let (code, r) = report(&[
        "check-quotient",
        "--map",
        "corpus/folding.json",
        "--K",
        "1",
        "--scales",
        "1,2,4",
    ]);
    assert_eq!(code, 0);
    let deltas: Vec<u64> = r["scales"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["delta"].as_u64().unwrap())
        .collect();
    assert_eq!(deltas, [0, 1, 2]);
}

#[test]
fn failing_certificate_names_a_counterexample() {
    let (code, r) = report(&[
        "check-quotient",
        "--map",
        "corpus/inclusion.json",
        "--K",
        "1",
        "--scales",
        "1,2",
    ]);
    assert_eq!(code, 1);
    let fail = &r["scales"][1]["verdict"];
    assert_eq!(fail["status"], "fail");
    assert!(fail["point"].is_u64() && fail["uncovered"].is_u64());
}

#[test]
fn decompose_single_unit_is_exact() {
    let (code, r) = report(&[
        "decompose",
        "--map",
        "corpus/folding.json",
        "--K",
        "1",
        "--delta",
        "2",
        "--op",
        "corpus/e21.json",
        "--eps",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["exact"], true);
    assert_eq!(r["residual"].as_f64(), Some(0.0));
    assert_eq!(r["eps"], 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"], None).status.code(), Some(2));
    assert_eq!(
        run(
            &["check-quotient", "--map", "corpus/folding.json", "--K", "1"],
            None
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(
            &[
                "check-quotient",
                "--map",
                "missing.json",
                "--K",
                "1",
                "--scales",
                "1"
            ],
            None
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}

#[test]
fn malformed_json_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"domain\": \"Z[-19..=20]\",\n  \"codomain\": \"N[1..=40]\",\n  \"values\": [0, 1,\n}\n").unwrap();
    let o = run(
        &[
            "check-quotient",
            "--map",
            broken.to_str().unwrap(),
            "--K",
            "1",
            "--scales",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(
        &unknown,
        r#"{"domain": "N[1..=4]", "codomain": "N[1..=4]", "valuez": [0, 1, 2, 3]}"#,
    )
    .unwrap();
    let o = run(
        &[
            "check-quotient",
            "--map",
            unknown.to_str().unwrap(),
            "--K",
            "1",
            "--scales",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("valuez"));

    let triangle = dir.path().join("triangle.json");
    std::fs::write(
        &triangle,
        r#"{"label": "t", "n": 3, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}"#,
    )
    .unwrap();
    let map = dir.path().join("id.json");
    std::fs::write(
        &map,
        r#"{"domain": "t", "codomain": "t", "values": [0, 1, 2]}"#,
    )
    .unwrap();
    let o = run(
        &[
            "check-quotient",
            "--space",
            triangle.to_str().unwrap(),
            "--map",
            map.to_str().unwrap(),
            "--K",
            "1",
            "--scales",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0, 1, 2)"));
}

#[test]
fn thread_count_does_not_change_reports() {
    for (_, args) in corpus() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let one = run(&[&args[..], &["--threads", "1"]].concat(), None);
        let many = run(&[&args[..], &["--threads", "4"]].concat(), None);
        assert_eq!(one.stdout, many.stdout, "{args:?}");
    }
}

#[test]
fn point_cap_is_enforced() {
    let o = run(
        &["gen-space", "--kind", "grid", "--dim", "2", "--side", "150"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("size error"));
    let o = run(
        &[
            "gen-space",
            "--kind",
            "grid",
            "--dim",
            "2",
            "--side",
            "150",
            "--point-cap",
            "30000",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_coarselab"))
        .args(["gen-space", "--kind", "naturals", "--n", "50"])
        .env("COARSELAB_POINT_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
