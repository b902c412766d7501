use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use unitlat::estimator::EstimateRow;

fn unitlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitlat")).args(args).env_remove("UNITLAT_PRECISION_BITS").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn synthetic_recovery_reports_index() {
    let v = json(&unitlat(&["recover", "--synthetic", "--dim", "2", "--index", "2", "--seed", "7", "--verify"]));
    assert_eq!(v["result"]["report"]["index"], "2");
    assert_eq!(v["result"]["report"]["verified"], true);
    assert_eq!(v["provenance"]["seed"], 7);
    assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn cyclotomic_five_regulator() {
    let v = json(&unitlat(&["recover", "--cyclotomic", "5"]));
    let reg = v["result"]["cyclotomic"]["regulator"].as_f64().unwrap();
    assert!((reg - 0.481_211_825_059_603_4).abs() < 1e-12);
}

#[test]
fn input_errors_exit_one() {
    let out = unitlat(&["recover", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let bad = scratch("bad.json", "{not json");
    assert_eq!(unitlat(&["reduce", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(unitlat(&["estimate", "--m", "0", "--logD", "3"]).status.code(), Some(1));
    assert_eq!(unitlat(&["recover", "--cyclotomic", "6"]).status.code(), Some(1));
}

#[test]
fn too_few_samples_exit_two() {
    let out = unitlat(&["recover", "--synthetic", "--dim", "4", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn excessive_noise_fails_verification() {
    let out = unitlat(&["recover", "--synthetic", "--dim", "4", "--index", "6", "--noise", "3", "--verify"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn baseline_reports_infeasible_precision() {
    let v = json(&unitlat(&["recover", "--synthetic", "--dim", "3", "--index", "4", "--mode", "baseline", "--available-bits", "8"]));
    assert_eq!(v["result"]["feasible"], false);
    assert!(v["result"]["required_q"].as_u64().unwrap() > 8);
    let v = json(&unitlat(&[
        "recover", "--synthetic", "--dim", "3", "--index", "4", "--mode", "baseline", "--available-bits", "96", "--verify",
    ]));
    assert_eq!(v["result"]["relation_check"], true);
    let gap = &v["result"]["precision_gap"];
    assert!(gap["q_baseline"].as_f64().unwrap() > gap["q_sublattice"].as_f64().unwrap());
}

#[test]
fn instance_file_round_trip() {
    let inst = unitlat::recovery::planted_instance(3, 5, 21).unwrap();
    let p = &inst.problem;
    let body = serde_json::json!({
        "b_m": unitlat::MatrixJson::from_rows(p.b_m.rows()),
        "b_l": unitlat::MatrixJson::from_rows(inst.b_l.rows()),
        "sampler": p.sampler,
        "index_bound": "5",
        "detl_bound": unitlat::linalg::format_rational(&p.detl_bound),
    });
    let path = scratch("instance.json", &body.to_string());
    let v = json(&unitlat(&["recover", "--instance", path.to_str().unwrap(), "--verify"]));
    assert_eq!(v["result"]["report"]["index"], "5");

    let wrapped = serde_json::json!({ "mode": "baseline", "instance": body, "seed": 17, "tau_log2": -64 });
    let path = scratch("experiment.json", &wrapped.to_string());
    let v = json(&unitlat(&["recover", "--instance", path.to_str().unwrap(), "--verify"]));
    assert_eq!(v["provenance"]["seed"], 17);
    assert_eq!(v["result"]["mode"], "baseline");
    assert_eq!(v["result"]["feasible"], true);
}

#[test]
fn estimate_compare_has_generic_row_near_1e20() {
    let v = json(&unitlat(&["estimate", "--cyclotomic", "10000", "--compare"]));
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let generic = rows.iter().find(|r| r["model"] == "generic").unwrap();
    let t = generic["total_log10"].as_f64().unwrap();
    assert!((19.0..=22.0).contains(&t), "{t}");
    let est = v["result"]["estimates"].as_array().unwrap();
    let lead = est.iter().find(|e| e["model"] == "generic").unwrap()["leading_term"].as_f64().unwrap();
    assert!((lead.log10() - 20.0).abs() < 1e-9);
}

#[test]
fn csv_matches_json_rows() {
    let args = ["estimate", "--m", "2,10,40", "--logD", "30", "--cyclotomic", "7,20"];
    let v = json(&unitlat(&args));
    let from_json: Vec<EstimateRow> = serde_json::from_value(v["result"]["rows"].clone()).unwrap();
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = unitlat(&csv_args);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# tool=unitlat"));
    let from_csv: Vec<EstimateRow> =
        csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(from_csv, from_json);
    assert_eq!(from_json.len(), 5);
}

#[test]
fn table_output_is_aligned_text() {
    let out = unitlat(&["estimate", "--m", "2", "--logD", "3", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("model") && lines[1].contains("log10(total)"));
    assert!(lines[2].trim_start().starts_with("generic"));
}

#[test]
fn reduce_identity_is_fixed() {
    let p = scratch("id.json", r#"{"m":2,"rows":[["1","0"],["0","1"]]}"#);
    let v = json(&unitlat(&["reduce", "--input", p.to_str().unwrap(), "--verify", "--hnf", "--snf"]));
    assert_eq!(v["result"]["reduced"]["rows"], serde_json::json!([["1", "0"], ["0", "1"]]));
    assert_eq!(v["result"]["invariant_factors"], serde_json::json!(["1", "1"]));
}

#[test]
fn reduce_gaussian_matrix() {
    let body = r#"{"rows":[[{"a":"2","b":"1","ring":"gaussian"},{"a":"0","b":"0","ring":"gaussian"}],
                          [{"a":"7","b":"3","ring":"gaussian"},{"a":"1","b":"1","ring":"gaussian"}]]}"#;
    let p = scratch("gauss.json", body);
    let v = json(&unitlat(&["reduce", "--input", p.to_str().unwrap(), "--ring", "gaussian", "--verify"]));
    assert_eq!(v["result"]["lll_reduced"], true);
    assert_eq!(unitlat(&["reduce", "--input", p.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bp_gcd_instance_gives_unit_basis() {
    let p = scratch(
        "gcd.json",
        r#"{"m":1,"mu":"1","d":"1","generators":[{"exponent":64,"mantissas":["36893488147419103232"]},{"exponent":64,"mantissas":["55340232221128654848"]}]}"#,
    );
    let v = json(&unitlat(&["bp", "--input", p.to_str().unwrap(), "--verify"]));
    let basis = &v["result"]["output"]["basis"][0];
    assert_eq!(basis["mantissas"][0].as_str().unwrap().trim_start_matches('-'), (1u128 << 64).to_string());
}

#[test]
fn exact_samples_lie_on_the_dual_lattice() {
    let p = scratch("z2.json", r#"{"m":2,"rows":[["1","0"],["0","1"]]}"#);
    let out = unitlat(&["sample", "--basis", p.to_str().unwrap(), "--delta", "0", "--count", "200", "--verify", "--precision-bits", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 202);
    assert!(lines[0]["provenance"].is_object());
    for s in &lines[1..201] {
        for m in s["y_tilde"]["mantissas"].as_array().unwrap() {
            let x: i64 = m.as_str().unwrap().parse().unwrap();
            assert_eq!(x % (1 << 20), 0);
        }
    }
    assert_eq!(lines[201]["report"]["coverage"], 1.0);
}

#[test]
fn precision_env_override_and_out_file() {
    let p = scratch("z1.json", r#"{"m":1,"rows":[["1"]]}"#);
    let dest = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join("samples.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_unitlat"))
        .args(["sample", "--basis", p.to_str().unwrap(), "--count", "1", "--out", dest.to_str().unwrap()])
        .env("UNITLAT_PRECISION_BITS", "33")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let first: Value = serde_json::from_str(std::fs::read_to_string(&dest).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["provenance"]["precision_bits"], 33);
}

#[test]
fn seed_changes_output_and_hash() {
    let a = unitlat(&["recover", "--synthetic", "--seed", "1"]).stdout;
    let b = unitlat(&["recover", "--synthetic", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn help_describes_each_subcommand() {
    for cmd in ["recover", "estimate", "reduce", "bp", "sample"] {
        let out = unitlat(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("--seed") && text.contains("--verify"), "{cmd}");
    }
}
