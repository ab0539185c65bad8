use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hrcp_core::instance::read_instance;
use hrcp_core::Clustering;

fn hrcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrcp")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` line in {stdout}"))
}

#[test]
fn gen_solve_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "x.txt");
    let labels = path(dir.path(), "x.labels");
    let out = hrcp(&[
        "gen", "--d", "2", "--n", "60", "--p", "3", "--s", "0.2", "--seed", "4", "-o", &inst, "--labels", &labels,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let x = read_instance(fs::read(&inst).unwrap().as_slice()).unwrap();
    assert_eq!((x.len(), x.dim()), (60, 2));
    assert!(fs::read_to_string(&labels).unwrap().starts_with("hrcp-labels 1"));

    let mut spans = Vec::new();
    for method in ["exact", "nm", "em", "dm"] {
        let json = path(dir.path(), &format!("{method}.json"));
        let trace = path(dir.path(), &format!("{method}.csv"));
        let out = hrcp(&["solve", "--method", method, "--p", "3", &inst, "-o", &json, "--trace", &trace]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert_eq!(field(&stdout, "method"), method);
        assert_eq!(field(&stdout, "status"), "Optimal");
        let span: f64 = field(&stdout, "span").parse().unwrap();
        let c = Clustering::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
        assert!((c.total_span() - span).abs() <= 1e-12);
        assert_eq!(c.assigned_count(), 60);
        let trace = fs::read_to_string(&trace).unwrap();
        assert!(trace.starts_with("iter,sample_size,sub_status"));
        if method == "exact" {
            assert_eq!(trace.lines().count(), 1);
        } else {
            assert!(trace.lines().count() >= 2);
        }
        spans.push(span);

        let svg = path(dir.path(), &format!("{method}.svg"));
        assert!(hrcp(&["plot", &inst, "--solution", &json, "-o", &svg]).status.success());
        let svg = fs::read_to_string(&svg).unwrap();
        assert_eq!(svg.matches("<circle").count(), 60);
        assert!(svg.matches("<rect").count() <= 3);
    }
    assert!(spans.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9), "{spans:?}");
}

#[test]
fn export_reports_model_size() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "four.txt");
    fs::write(&inst, "hrcp 1\n4 1\n0\n1\n10\n11\n").unwrap();
    let lp = path(dir.path(), "four.lp");
    let out = hrcp(&["export", "--p", "2", &inst, "-o", &lp]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&stdout, "rows"), "22");
    assert_eq!(field(&stdout, "variables"), "12");
    let text = fs::read_to_string(&lp).unwrap();
    for section in ["minimize", "st", "bounds", "binary", "end"] {
        assert!(text.lines().any(|l| l == section), "missing {section}");
    }
}

#[test]
fn bench_writes_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "spec.json");
    fs::write(&spec, r#"{"n":[20],"d":[2],"p":[2,3],"s":[0.2],"seeds":[1,2],"methods":["exact","em"]}"#).unwrap();
    let csv = path(dir.path(), "out.csv");
    let out = hrcp(&["bench", "--spec", &spec, "-o", &csv]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], hrcp_cli::bench::CSV_HEADER);
    assert_eq!(lines.len(), 1 + 8);
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 14);
        assert!(fields[7].parse::<u128>().is_ok(), "time_ms should be filled: {row}");
        assert_eq!(fields[13], "Optimal");
    }
}

#[test]
fn metrics_csv_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "x.txt");
    assert!(hrcp(&["gen", "--d", "3", "--n", "25", "--p", "2", "--s", "0.3", "-o", &inst]).status.success());
    let csv = path(dir.path(), "m.csv");
    assert!(hrcp(&["metrics", &inst, "--per-coordinate", "-o", &csv]).status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 4 + 2 * 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hrcp(&["bogus"]).status.code(), Some(2));
    assert_eq!(hrcp(&["solve", "--p", "2"]).status.code(), Some(2));
    let missing = path(dir.path(), "missing.txt");
    let out = hrcp(&["solve", "--p", "2", &missing]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    let bad = path(dir.path(), "bad.txt");
    fs::write(&bad, "hrcp 1\n3 1\n0\n1\n").unwrap();
    let out = hrcp(&["solve", "--p", "2", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let good = path(dir.path(), "good.txt");
    fs::write(&good, "hrcp 1\n2 3\n0 0 0\n1 1 1\n").unwrap();
    assert_eq!(hrcp(&["solve", "--method", "cplex", "--p", "2", &good]).status.code(), Some(1));
    assert_eq!(hrcp(&["solve", "--p", "0", &good]).status.code(), Some(1));
    let svg = path(dir.path(), "x.svg");
    assert_eq!(hrcp(&["plot", &good, "-o", &svg]).status.code(), Some(1));
}
