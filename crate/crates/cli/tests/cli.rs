use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn telescope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telescope"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn replicate(dir: &Path) {
    let out = telescope(
        dir,
        &[
            "hard-instance",
            "--alpha",
            "0.1",
            "--delta",
            "0.25",
            "--replicate",
            "--eps-grid",
            "1e-1,1e-2,1e-3",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &[
            "run",
            "--algo",
            "sd",
            "--problem",
            "quartic",
            "--x0",
            "1.0",
            "--max-iter",
            "10000",
            "--tol",
            "1e-4",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = fs::read_to_string(dir.path().join("trace.trc")).unwrap();
    assert!(trace.starts_with('{'));
    let summary = json(&dir.path().join("trace.json"));
    assert_eq!(summary["config"]["algo"], "sd");
    assert_eq!(summary["config"]["tol"], 1e-4);
    assert_eq!(summary["summary"]["status"], "converged");
}

#[test]
fn ar2_trace_records_beta() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &[
            "run",
            "--algo",
            "ar2",
            "--problem",
            "rosenbrock",
            "--out",
            "ar2.trc",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let header = fs::read_to_string(dir.path().join("ar2.trc")).unwrap();
    let meta: Value = serde_json::from_str(header.lines().next().unwrap()).unwrap();
    assert_eq!(meta["params"]["beta"], "1.5");
}

#[test]
fn unknown_names_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = telescope(dir.path(), &["run", "--algo", "foo"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sd, tr, ar2, ds"), "{}", stderr(&out));
    let out = telescope(dir.path(), &["run", "--problem", "bar"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("rosenbrock"));
    let out = telescope(dir.path(), &["run", "--set", "nonsense=1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn linesearch_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &[
            "run",
            "--problem",
            "rosenbrock",
            "--set",
            "j_max=1",
            "--set",
            "t_init=1e6",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{ "run": { "algo": "tr", "problem": "quartic", "max_iter": 50 } }"#,
    )
    .unwrap();
    let out = telescope(
        dir.path(),
        &["--config", "cfg.json", "run", "--problem", "rosenbrock"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = json(&dir.path().join("trace.json"));
    assert_eq!(summary["config"]["algo"], "tr");
    assert_eq!(summary["config"]["problem"], "rosenbrock");
    assert_eq!(summary["config"]["max_iter"], 50);

    fs::write(
        dir.path().join("bad.json"),
        r#"{ "run": { "algoo": "tr" } }"#,
    )
    .unwrap();
    let out = telescope(dir.path(), &["--config", "bad.json", "run"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn replication_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    replicate(dir.path());
    let report = json(&dir.path().join("replication.json"));
    assert_eq!(report["all_match"], true);
    assert_eq!(report["passed"], true);
    assert_eq!(report["summary"]["backtracks"], 0);
    let measured: Vec<u64> = report["k_eps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["measured"].as_u64().unwrap())
        .collect();
    assert_eq!(measured, [22, 465, 10000]);
}

#[test]
fn audit_exit_status() {
    let dir = TempDir::new().unwrap();
    replicate(dir.path());
    let base = [
        "audit",
        "--trace",
        "replication.trc",
        "--beta",
        "2",
        "--kappa-a",
        "1",
        "--kappa-b",
        "0",
        "--kappa-c",
        "0",
    ];

    let mut args = base.to_vec();
    args.extend(["--kappa-d", "0.099"]);
    let out = telescope(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let report = json(&dir.path().join("audit.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["kappa_d"], 0.099);
    let table = fs::read_to_string(dir.path().join("k_eps.csv")).unwrap();
    assert!(table.starts_with("eps,k_eps,ell,f_gap,bound_rhs,card_lhs,card_rhs"));

    // kappa_d_hat is alpha = 0.1 here
    let mut args = base.to_vec();
    args.extend(["--kappa-d", "0.2"]);
    let out = telescope(dir.path(), &args);
    assert_eq!(code(&out), 1);
    let report = json(&dir.path().join("audit.json"));
    assert_eq!(report["succ_ok"], false);
    assert_eq!(report["succ_violation"], 0);

    let out = telescope(
        dir.path(),
        &["audit", "--trace", "missing.trc", "--kappa-d", "0.099"],
    );
    assert_eq!(code(&out), 2);
    let out = telescope(dir.path(), &["audit", "--trace", "replication.trc"]);
    assert_eq!(code(&out), 2, "kappa_d is required");
    let out = telescope(
        dir.path(),
        &[
            "audit",
            "--trace",
            "replication.trc",
            "--kappa-d",
            "0.099",
            "--eps-grid",
            "1e-2,1e-1",
        ],
    );
    assert_eq!(code(&out), 2, "grid must decrease");
}

#[test]
fn audit_constants_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    replicate(dir.path());
    fs::write(
        dir.path().join("c.json"),
        r#"{ "kappa_d": 0.2, "beta": 2 }"#,
    )
    .unwrap();
    let out = telescope(
        dir.path(),
        &[
            "audit",
            "--trace",
            "replication.trc",
            "--constants",
            "c.json",
        ],
    );
    assert_eq!(code(&out), 1);
    let out = telescope(
        dir.path(),
        &[
            "audit",
            "--trace",
            "replication.trc",
            "--constants",
            "c.json",
            "--kappa-d",
            "0.05",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(
        json(&dir.path().join("audit.json"))["constants"]["kappa_d"],
        0.05
    );
}

#[test]
fn invariant_failure_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &["hard-instance", "--alpha", "1.0", "--delta", "0.001"],
    );
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("(1 - alpha) zeta(1 + 2 delta) - 4 alpha"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn fit_examples() {
    let dir = TempDir::new().unwrap();
    let mut table = String::from("eps,k\n");
    for e in [1e-1f64, 1e-2, 1e-3, 1e-4] {
        table.push_str(&format!("{e},{}\n", e.powf(-4.0 / 3.0)));
    }
    fs::write(dir.path().join("synthetic.csv"), table).unwrap();
    let out = telescope(
        dir.path(),
        &[
            "fit",
            "--table",
            "synthetic.csv",
            "--beta",
            "2",
            "--json",
            "fit.json",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("slope 1.3333"), "{}", stdout(&out));
    let fit = json(&dir.path().join("fit.json"));
    assert!((fit["fit"]["slope"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-6);
    assert_eq!(fit["config"]["tolerance"], 0.05);

    let out = telescope(
        dir.path(),
        &["fit", "--table", "synthetic.csv", "--beta", "1"],
    );
    assert_eq!(code(&out), 1);
    let out = telescope(
        dir.path(),
        &["fit", "--table", "synthetic.csv", "--family", "AR2"],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("beta 1.5"));
    let out = telescope(
        dir.path(),
        &["fit", "--table", "synthetic.csv", "--family", "nope"],
    );
    assert_eq!(code(&out), 2);

    fs::write(dir.path().join("two.csv"), "eps,k\n0.1,10\n0.01,100\n").unwrap();
    let out = telescope(dir.path(), &["fit", "--table", "two.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn fit_on_hard_instance_table() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &[
            "hard-instance",
            "--delta",
            "0.25",
            "--eps-grid",
            "logspace:-1:-3:5",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = telescope(
        dir.path(),
        &["fit", "--table", "k_eps.csv", "--json", "fit.json"],
    );
    assert_eq!(code(&out), 0);
    let slope = json(&dir.path().join("fit.json"))["fit"]["slope"]
        .as_f64()
        .unwrap();
    assert!((1.30..=1.37).contains(&slope), "slope {slope}");

    replicate(dir.path());
    let out = telescope(
        dir.path(),
        &[
            "fit",
            "--trace",
            "replication.trc",
            "--eps-grid",
            "logspace:-1:-3:5",
            "--json",
            "fit.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let slope = json(&dir.path().join("fit.json"))["fit"]["slope"]
        .as_f64()
        .unwrap();
    assert!((1.30..=1.37).contains(&slope), "slope {slope}");
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!("{name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

#[test]
fn figure_markers_match_knot_table() {
    let dir = TempDir::new().unwrap();
    let out = telescope(
        dir.path(),
        &[
            "hard-instance",
            "--alpha",
            "0.1",
            "--delta",
            "0.001",
            "--plot-range",
            "x0:x4",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = telescope(
        dir.path(),
        &[
            "plot", "--alpha", "0.1", "--delta", "0.001", "--svg", "fig.svg",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert_eq!(
        svg,
        fs::read_to_string(dir.path().join("curve.svg")).unwrap()
    );

    let mut reader = csv::Reader::from_path(dir.path().join("knots.csv")).unwrap();
    let knots: Vec<[f64; 5]> = reader.deserialize().map(Result::unwrap).take(5).collect();
    let circles: Vec<&str> = svg.lines().filter(|l| l.contains("<circle")).collect();
    assert_eq!(circles.len(), 10);
    for (i, knot) in knots.iter().enumerate() {
        let (on_f, on_g) = (circles[i], circles[5 + i]);
        assert_eq!(attr(on_f, "data-k"), i as f64);
        assert_eq!(attr(on_f, "data-x"), knot[1]);
        assert_eq!(attr(on_f, "data-y"), knot[2]);
        assert_eq!(attr(on_g, "data-y"), knot[3]);
    }
    assert!(
        svg.matches(r#"class="fsecond""#).count() >= 2,
        "f'' drawn in pieces"
    );
}

#[test]
fn plot_modes() {
    let dir = TempDir::new().unwrap();
    let out = telescope(dir.path(), &["plot", "--plot-range", "x2:x2"]);
    assert_eq!(code(&out), 2);
    let out = telescope(dir.path(), &["plot", "--plot-range", "0.5:0.1"]);
    assert_eq!(code(&out), 2);

    let out = telescope(dir.path(), &["plot", "--csv-only"]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("curve.csv").is_file());
    assert!(!dir.path().join("curve.svg").exists());

    let out = telescope(
        dir.path(),
        &["plot", "--curve", "curve.csv", "--svg", "from_csv.svg"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("from_csv.svg").is_file());

    fs::write(dir.path().join("bad.csv"), "x,f\n1,2\n").unwrap();
    let out = telescope(dir.path(), &["plot", "--curve", "bad.csv"]);
    assert_eq!(code(&out), 2);
    fs::write(
        dir.path().join("empty.csv"),
        "x,f,fprime,fsecond_left,fsecond_right\n",
    )
    .unwrap();
    let out = telescope(dir.path(), &["plot", "--curve", "empty.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let names = [
        "knots.csv",
        "curve.csv",
        "curve.svg",
        "k_eps.csv",
        "replication.json",
        "replication.trc",
    ];
    replicate(dir.path());
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(dir.path().join(n)).unwrap())
        .collect();
    replicate(dir.path());
    for (n, bytes) in names.iter().zip(&first) {
        assert_eq!(&fs::read(dir.path().join(n)).unwrap(), bytes, "{n} changed");
    }
}
