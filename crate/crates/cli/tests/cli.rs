use std::path::Path;
use std::process::{Command, Output};

use subfrac::bernstein::BernsteinSpec;
use subfrac::kernels::HeatKernelSpec;
use subfrac::solutions::{kernel_field, Quantity};
use subfrac::subordinator::DensityEval;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subfrac"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUBFRAC_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn density_grid_has_one_row_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "eval",
            "density",
            "--spec",
            "stable:0.5",
            "--r",
            "1",
            "--t-grid",
            "0.01:100:50",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,t,value,error");
    assert_eq!(lines.len(), 51);
    let e = DensityEval::auto(BernsteinSpec::stable(0.5).unwrap());
    let fields: Vec<f64> = lines[25].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(fields[2], e.density(fields[0], fields[1]).unwrap());
}

#[test]
fn qkernel_csv_matches_library_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = run(
        &[
            "eval",
            "qkernel",
            "--kernel",
            "gaussian",
            "--beta",
            "0.5",
            "--t",
            "1",
            "--z-grid",
            "0.1:10:7",
            "-o",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let e = DensityEval::auto(BernsteinSpec::stable(0.5).unwrap());
    let zs = subfrac::validate::logspace(0.1, 10.0, 7).unwrap();
    let field = kernel_field(Quantity::Q, &HeatKernelSpec::gaussian(), &e, &[1.0], &zs).unwrap();
    let mut expected = vec![];
    field.write_csv(&mut expected).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), expected);
}

#[test]
fn output_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "eval",
        "pkernel",
        "--kernel",
        "cauchy",
        "--spec",
        "mixture:0.5@0.3,0.5@0.7",
        "--t-grid",
        "0.1:10:3",
        "--z-grid",
        "lin:0.5:2:3",
    ];
    let a = run(&args, dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    let mut one = args.to_vec();
    one.extend(["--workers", "1"]);
    let b = run(&one, dir.path());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_subfrac"))
        .args(args)
        .env("SUBFRAC_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn other_targets_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["eval", "phi", "--spec", "mixture:0.5@0.3,0.5@0.7", "--lambda", "2"],
        &[
            "eval",
            "inverse-density",
            "--beta",
            "0.3",
            "--t",
            "1",
            "--r-grid",
            "0.1:2:4",
        ],
        &["eval", "potential", "--beta", "0.5", "--t-grid", "0.1:10:3"],
        &[
            "eval",
            "solve",
            "--kernel",
            "gaussian",
            "--beta",
            "0.5",
            "--t-grid",
            "lin:0:1:9",
            "--x-grid",
            "lin:-3.14159:3.14159:5",
            "--source",
            "cos",
        ],
    ];
    let rows = [2, 5, 4, 46];
    for (args, n) in cases.iter().zip(rows) {
        let o = run(args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().count(), n, "{args:?}");
    }
    assert!(stdout(&run(cases[0], dir.path())).contains("1.4278246030286936e0"));
    let o = run(
        &["eval", "potential", "--beta", "0.5", "--t", "1", "--format", "json"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"spec": {"kind": "stable", "beta": 0.5}, "r": 1, "t-grid": "0.1:10:4"}"#,
    )
    .unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "eval", "density"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
    // flags override the file
    let o = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "eval",
            "density",
            "--t-grid",
            "0.1:10:2",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn config_errors_exit_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["eval", "density", "--spec", "stabel:0.5", "--r", "1", "--t", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stabel:0.5"));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"spec\": \"stable:0.5\",\n \"t_gird\": \"0.1:1:3\"}").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "eval", "density"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t_gird"), "{}", stderr(&o));
    std::fs::write(&cfg, "{\"spec\": \"stable:0.5\",\n \"r\": }").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "eval", "density"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = run(
        &[
            "eval",
            "density",
            "--spec",
            "stable:0.5",
            "--r",
            "1",
            "--t-grid",
            "0:1:5",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["validate", "nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3_and_name_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["eval", "density", "--spec", "stable:0.5", "--r=-1", "--t", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("density"), "{}", stderr(&o));
    let o = run(
        &[
            "eval", "qkernel", "--kernel", "cauchy", "--beta", "0.5", "--t=-1", "--z", "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "scaling", "--quick"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("[PASS]  1") && table.contains("[PASS]  2"), "{table}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("validate-scaling.json")).unwrap()).unwrap();
    assert_eq!(report["suite"], "scaling");
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
    assert!(report["version"].is_string());
}
