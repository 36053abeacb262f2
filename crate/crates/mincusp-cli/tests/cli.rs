use std::process::{Command, Output};

fn mincusp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mincusp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_error_kind(out: &Output) -> String {
    let err = String::from_utf8(out.stderr.clone()).expect("utf-8 stderr");
    let v: serde_json::Value =
        serde_json::from_str(err.trim()).unwrap_or_else(|_| panic!("stderr not JSON: {err}"));
    v["error"]["kind"].as_str().expect("error.kind").to_string()
}

#[test]
fn census_table_counts_and_determinism() {
    let out = mincusp(&["census", "--k", "1..8", "--family", "two-chain"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "k,family,class_index,i,j,aut_order,aut_or_preserving,canonical_hash"
    );
    let expected = [1usize, 1, 2, 1, 3, 2, 4, 2];
    for (k, want) in expected.iter().enumerate().map(|(i, w)| (i + 1, w)) {
        let rows = lines
            .iter()
            .filter(|l| l.starts_with(&format!("{k},two-chain,")))
            .count();
        assert_eq!(rows, *want, "k={k}");
    }
    assert_eq!(lines.len(), 1 + expected.iter().sum::<usize>());

    // Byte-identical across reruns, and --seed does not perturb anything.
    let again = mincusp(&["census", "--k", "1..8", "--family", "two-chain"]);
    assert_eq!(out.stdout, again.stdout);
    let seeded = mincusp(&["census", "--k", "1..8", "--family", "two-chain", "--seed", "7"]);
    assert_eq!(out.stdout, seeded.stdout);
}

#[test]
fn census_oracle_agrees_for_small_k() {
    let out = mincusp(&["census", "--k", "1..2", "--oracle-upto", "2"]);
    assert!(out.status.success(), "stderr: {}", stderr_error_kind(&out));
    // The oracle is a silent cross-check; the table itself is unchanged.
    let plain = mincusp(&["census", "--k", "1..2"]);
    assert_eq!(out.stdout, plain.stdout);
}

#[test]
fn volume_table_matches_reference() {
    let out = mincusp(&["volume", "--k", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("k,volume,per_tetrahedron,lower_bound,upper_bound\n"));
    assert!(text.contains("2,9.1344744577,"), "table: {text}");

    let short = mincusp(&["volume", "--k", "2", "--precision", "4"]);
    assert!(stdout(&short).contains("2,9.1345,"), "rounded table");
}

#[test]
fn volume_json_has_roots() {
    let out = mincusp(&["volume", "--k", "2..4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let rows = v.as_array().expect("array");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["k"], 2);
    assert_eq!(rows[1]["k"], 4);
    let z1 = rows[0]["z1"].as_array().expect("z1");
    assert!((z1[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(z1[1].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn invariants_quasi_arithmetic_only_at_two() {
    let out = mincusp(&["invariants", "--k", "2..8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "header plus k = 2, 4, 6, 8");
    // k, trace degree, adjoint degree, disc, resultant, integral, quasi, arithmetic
    assert_eq!(lines[1], "2,2,1,-3,16,false,true,false");
    assert_eq!(lines[2], "4,4,2,-3,16,false,false,false");
    assert_eq!(lines[3], "6,6,3,-3,1,true,false,false");
    assert_eq!(lines[4], "8,8,4,-3,16,false,false,false");
}

#[test]
fn dehnfill_identifies_the_filled_member() {
    let out = mincusp(&["dehnfill", "--k", "2", "--cusp", "0", "--slope", "-1/2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("k,cusp,slope,partition_i,partition_j"));
    assert!(lines[1].starts_with("2,0,-1/2,0,1,"), "row: {}", lines[1]);
    assert!(lines[1].ends_with(",true"));

    let js = mincusp(&[
        "dehnfill", "--k", "2", "--cusp", "0", "--slope", "3", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&js)).expect("json");
    assert_eq!(v[0]["slope"], "3");
    assert_eq!(v[0]["partition"], serde_json::json!([0, 1]));
    assert_eq!(v[0]["spine_cells"], serde_json::json!([3, 6, 2]));
}

#[test]
fn spine_export_formats() {
    let js = mincusp(&["spine", "--k", "2", "--format", "json"]);
    assert!(js.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&js)).expect("json");
    assert_eq!(v["vertices"], 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 8);
    assert_eq!(v["faces"].as_array().unwrap().len(), 3);

    let dot = mincusp(&["spine", "--k", "2", "--format", "dot"]);
    assert!(stdout(&dot).starts_with("graph spine {"));

    let svg = mincusp(&["spine", "--k", "2", "--format", "svg"]);
    let text = stdout(&svg);
    assert!(text.starts_with("<svg"));
    assert!(text.contains("12-gon"));

    let two = mincusp(&["spine", "--k", "3", "--family", "two-chain", "--class", "1"]);
    assert!(two.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&two)).expect("json");
    assert_eq!(v["vertices"], 7);

    let csv = mincusp(&["spine", "--k", "2", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(2));
}

#[test]
fn validation_errors_are_json_on_stderr() {
    let cases: &[&[&str]] = &[
        &["dehnfill", "--k", "2", "--slope", "1/1"],
        &["dehnfill", "--k", "2", "--cusp", "5"],
        &["spine", "--k", "3"],
        &["volume", "--k", "3"],
        &["census", "--k", "8..1"],
        &["census", "--k", "2", "--format", "svg"],
        &["volume", "--k", "2", "--precision", "40"],
    ];
    for args in cases {
        let out = mincusp(args);
        assert_eq!(out.status.code(), Some(2), "args: {args:?}");
        assert_eq!(stderr_error_kind(&out), "validation", "args: {args:?}");
        assert!(out.stdout.is_empty(), "no partial output for {args:?}");
    }
    let unknown = mincusp(&["census", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(stderr_error_kind(&unknown), "validation");
}

#[test]
fn out_flag_writes_the_table() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("census.csv");
    let out = mincusp(&[
        "census",
        "--k",
        "2",
        "--family",
        "chain",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).expect("file written");
    let direct = mincusp(&["census", "--k", "2", "--family", "chain"]);
    assert_eq!(written, direct.stdout);
}

#[test]
fn verify_quick_passes() {
    let out = mincusp(&["verify", "--quick"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("ok ")).count(), 7);
    assert!(text.trim_end().ends_with("all checks passed"));
}
