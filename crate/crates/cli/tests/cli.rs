use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsq"))
        .args(args)
        .env("GSQ_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const SHORT: [&str; 6] = ["--horizon", "300", "--warmup", "30", "--replications", "3"];

#[test]
fn missing_config_is_an_io_error() {
    let out = gsq(&["simulate", "does/not/exist.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config not found"));
}

#[test]
fn single_replication_is_rejected() {
    let out = gsq(&["simulate", &config("reference_loss.conf"), "--replications", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("need >= 2 for CIs"));
}

#[test]
fn invalid_config_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("reference_loss.conf")).unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, text.replacen("K = 3", "K = 9", 1)).unwrap();
    let out = gsq(&["simulate", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("K exceeds m in group 1"), "{}", stderr(&out));

    fs::write(&bad, text.replacen("p_sleep", "p_slep", 1)).unwrap();
    let out = gsq(&["simulate", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("p_slep"), "{}", stderr(&out));
}

#[test]
fn simulate_outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let report = dir.path().join(format!("report_{tag}.csv"));
        let trace = dir.path().join(format!("trace_{tag}.csv"));
        let mut args = vec!["simulate".to_string(), config("reference_buffer.conf")];
        args.extend(SHORT.map(String::from));
        args.extend(["--seed".into(), "17".into(), "--output".into(), path_str(&report).into()]);
        args.extend(["--trace".into(), path_str(&trace).into()]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = gsq(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        (fs::read(&report).unwrap(), fs::read(&trace).unwrap())
    };
    let (ra, ta) = run("a");
    let (rb, tb) = run("b");
    assert_eq!(ra, rb);
    assert_eq!(ta, tb);
    let report = String::from_utf8(ra).unwrap();
    assert!(report.starts_with("name,mean,ci_low,ci_high\nsystem_count,"));
    for metric in ["buffer_count", "sojourn_time", "virtual_service_time", "abandonment_fraction", "power_rate"] {
        assert!(report.contains(&format!("\n{metric},")), "{metric}");
    }
    assert!(String::from_utf8(ta)
        .unwrap()
        .starts_with("time,event_kind,group,system_count,buffer_count,power_rate\n"));
}

#[test]
fn analyze_writes_state_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("states.csv");
    let out = gsq(&[
        "analyze",
        &config("analytic.conf"),
        "--x",
        "2,20",
        "--moments",
        "2",
        "--output",
        path_str(&table),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let states = fs::read_to_string(&table).unwrap();
    let mut lines = states.lines();
    assert_eq!(lines.next(), Some("level,phase,i,l1,j,pi,f"));
    assert_eq!(lines.next().unwrap().split(',').take(5).collect::<Vec<_>>(), ["0", "0", "0", "S", "0"]);
    assert_eq!(states.lines().count(), 1 + 27);
    let pi_total: f64 = states
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((pi_total - 1.0).abs() < 1e-12);

    let summary = fs::read_to_string(dir.path().join("states.summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "quantity,x,value");
    assert!(rows[1].starts_with("power_rate,,"));
    assert!(rows[2].starts_with("loss_probability,,"));
    assert_eq!(rows.len(), 3 + 4);
    assert!(rows[6].starts_with("gamma_moment_2,20,"));
}

#[test]
fn analyze_rejects_out_of_scope_input() {
    let out = gsq(&["analyze", &config("reference_loss.conf"), "--x", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("analytic module supports only"));

    let out = gsq(&["analyze", &config("analytic.conf"), "--x", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x must be > 0"));
}

#[test]
fn sweep_rows_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv: PathBuf = dir.path().join("sweep.csv");
    let svg = dir.path().join("charts");
    let mut args = vec![
        "sweep".to_string(),
        config("reference_loss.conf"),
        "--lambda-low".into(),
        "16".into(),
        "--lambda-high".into(),
        "24".into(),
        "--lambda-step".into(),
        "4".into(),
        "--output".into(),
        path_str(&csv).into(),
        "--svg-dir".into(),
        path_str(&svg).into(),
    ];
    args.extend(SHORT.map(String::from));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = gsq(&refs);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(text.lines().next(), Some("lambda,metric,mean,ci_low,ci_high"));
    // empty metric list means every metric
    let metrics = 12;
    assert_eq!(rows.len(), 3 * metrics);
    let lambdas: Vec<&str> = rows.iter().step_by(metrics).map(|r| r[0]).collect();
    assert_eq!(lambdas, ["16", "20", "24"]);
    assert!(svg.join("sweep_system_count.svg").exists());
    assert!(svg.join("sweep_throughput.svg").exists());

    let system: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] == "system_count")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert!(system.windows(2).all(|w| w[1] > w[0]), "{system:?}");
}

#[test]
fn validate_generator_suite_passes() {
    let out = gsq(&["validate", "--suite", "generator"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4 of 4 checks passed"), "{text}");
}

#[test]
fn validate_oracle_suite_passes() {
    let out = gsq(&["validate", "--suite", "oracle"]);
    assert!(out.status.success());
    assert!(!String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
