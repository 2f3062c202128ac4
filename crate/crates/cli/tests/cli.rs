use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use derivo::bundle::DerivativeOp;
use derivo::descriptor::{Document, DrepDesc, LinearFieldDesc};
use serde_json::Value;

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn derivo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_derivo")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn run_in_process(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("derivo").chain(args.iter().copied());
    let code = derivo_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn so3_action_passes() {
    let o = derivo(&["check", "algebroid", sample("so3_action.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("action algebroid: pass"));
}

#[test]
fn perturbed_constants_fail_with_witness() {
    let o = derivo(&["check", "algebroid", sample("so3_broken.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("witness: J(e1, e2, e3)"), "{text}");
    assert!(text.contains("residual = [0, 1*x3, -1*x2]"), "{text}");
}

#[test]
fn malformed_input_exits_two() {
    let o = derivo(&["check", "algebroid", sample("nonsense.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`document`"));
    assert!(o.stdout.is_empty());
}

#[test]
fn diagnostics_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(sample("so3_drep.json")).unwrap().replacen(
        r#""anchor": ["0", "-x3", "x2"]"#,
        r#""anchor": ["0", "-x3", "x2 *"]"#,
        1,
    );
    std::fs::write(&path, text).unwrap();
    let (code, _, err) = run_in_process(&["check", "drep", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("`ops[0].anchor[2]`"), "{err}");

    std::fs::write(&path, r#"{"kind": "bundle", "base_dim": 1, "rank": 1}"#).unwrap();
    let (code, _, err) = run_in_process(&["check", "action", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("`kind`"), "{err}");

    let (code, _, _) = run_in_process(&["check", "nothing", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run_in_process(&["check", "algebroid", "/no/such/file.json"]);
    assert_eq!(code, 2);
}

#[test]
fn out_writes_the_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o =
        derivo(&["check", "algebroid", sample("so3_broken.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "fail");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["name"].is_string() && c["status"].is_string()));
    let failed: Vec<&Value> = checks.iter().filter(|c| c["status"] == "fail").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| c["witness"]["residual"].is_array()));
    assert!(checks.iter().filter(|c| c["status"] == "pass").all(|c| c.get("witness").is_none()));
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        derivo(&[
            "check",
            "groupoid-action",
            sample("order_two_groupoid.json").to_str().unwrap(),
            "--out",
            p.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn every_sample_has_the_expected_exit_code() {
    let cases: &[(&[&str], &str, i32)] = &[
        (&["check", "action"], "so3_action.json", 0),
        (&["check", "action"], "so3_broken.json", 1),
        (&["check", "drep"], "so3_drep.json", 0),
        (&["check", "drep"], "horizontal_drepoid.json", 0),
        (&["check", "semilinear"], "reflection_semilinear.json", 0),
        (&["check", "semilinear"], "z2_gauges.json", 1),
        (&["check", "groupoid-action"], "order_two_groupoid.json", 0),
        (&["check", "pseudolinear"], "difference_operator.json", 0),
        (&["build", "action-algebroid"], "so3_action.json", 0),
        (&["build", "action-algebroid"], "so3_broken.json", 1),
        (&["build", "doe"], "line_bundle.json", 0),
        (&["build", "trivial"], "connection_flat.json", 0),
        (&["build", "trivial"], "connection_nonflat.json", 1),
        (&["transform", "differentiate"], "rotation_family.json", 0),
        (&["transform", "lieder"], "linear_field.json", 0),
        (&["transform", "drep-to-rep"], "horizontal_drepoid.json", 2),
        (&["prequantize"], "prequantize.json", 0),
    ];
    for (args, file, expected) in cases {
        let path = sample(file);
        let mut argv: Vec<&str> = args.to_vec();
        argv.push(path.to_str().unwrap());
        let (code, out, err) = run_in_process(&argv);
        assert_eq!(code, *expected, "{argv:?}\n{out}{err}");
    }
}

#[test]
fn degree_bound_flag_overrides_document() {
    // u = d/dx + (x -> -x) pullback is twisted-Leibniz only for degree-zero
    // inputs, so the verdict depends on the bound.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(
        &path,
        r#"{"kind": "pseudolinear", "degree_bound": 0,
            "bundle": {"base_dim": 1, "rank": 1},
            "u": [{"coeff": "1", "deriv": "x1", "pullback": null}],
            "twist": [{"coeff": "1", "pullback": {"A": [[-1]], "b": [0]}}],
            "derivation": []}"#,
    )
    .unwrap();
    let (code, _, _) = run_in_process(&["check", "pseudolinear", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, _) = run_in_process(&["--degree-bound", "2", "check", "pseudolinear", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("[fail] pseudo-linearity"));
}

fn transform_to(kind: &str, input: &Path, out: &Path) {
    let (code, _, err) = run_in_process(&["transform", kind, input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn representation_transforms_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (file, there, back) in [
        ("so3_drep.json", "drep-to-rep", "rep-to-drep"),
        ("horizontal_drepoid.json", "drepoid-to-rep", "rep-to-drepoid"),
    ] {
        let rep = dir.path().join("rep.json");
        let again = dir.path().join("again.json");
        transform_to(there, &sample(file), &rep);
        let (code, out, _) = run_in_process(&["check", "rep", rep.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        transform_to(back, &rep, &again);
        assert_eq!(drep_ops(&again), drep_ops(&sample(file)), "{file}");
    }
}

fn load(path: &Path) -> Document {
    Document::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn drep_ops(path: &Path) -> Vec<DerivativeOp> {
    let doc = load(path);
    doc.body::<DrepDesc>().unwrap().build(&doc.config).unwrap().2
}

#[test]
fn linear_field_inverts_lie_derivation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.json");
    let l = dir.path().join("l.json");
    transform_to("lieder", &sample("linear_field.json"), &d);
    transform_to("linear-field", &d, &l);
    let field = |p: &PathBuf| {
        let doc = load(p);
        doc.body::<LinearFieldDesc>().unwrap().build(&doc.config).unwrap()
    };
    assert_eq!(field(&l), field(&sample("linear_field.json")));
}

#[test]
fn prequantization_lists_delta() {
    let (code, out, _) = run_in_process(&["prequantize", sample("prequantize.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("delta(1*x) ((anchor [0, -1], matrix [[0]]))"), "{out}");
    assert!(out.contains("[pass] bracket-preservation"));
}
