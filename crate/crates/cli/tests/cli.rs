use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const COLUMNS: &str = "t,P1,P2,P3,P4,Ptot,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,re_a4,im_a4";

fn fj(args: &[&str]) -> Output {
    fj_env(args, &[])
}

fn fj_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fj"));
    cmd.args(args).env_remove("FJ_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("fj runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    fj(args).status.code().unwrap()
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

const SPIN_FLIP: [&str; 8] = [
    "--lambda",
    "0.5",
    "--two-eps-over-omega",
    "3",
    "--beta",
    "0.2",
    "--t-end",
    "0.5",
];

#[test]
fn evolve_writes_trajectory_csv() {
    let (header, rows) = parse_csv(&stdout(&fj(&[&["evolve"], &SPIN_FLIP[..]].concat())));
    assert_eq!(header, COLUMNS);
    assert!(rows.len() > 10);
    assert_eq!(rows[0][..6], [0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    for r in &rows {
        assert_eq!(r.len(), 14);
        let sum: f64 = r[1..5].iter().sum();
        assert!((sum - r[5]).abs() < 1e-10);
        for k in 0..4 {
            let p = r[6 + 2 * k].powi(2) + r[7 + 2 * k].powi(2);
            assert!((p - r[1 + k]).abs() < 1e-10);
        }
    }
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn evolve_json_has_columns_and_rows() {
    let v = json(&fj(&[
        "evolve", "--t-end", "0.1", "--format", "json", "--init", "3",
    ]));
    let cols: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(cols.join(","), COLUMNS);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0].as_array().unwrap().len(), 14);
    assert_eq!(rows[0][3], 1.0);
}

#[test]
fn evolve_stride_and_amplitudes() {
    let all = parse_csv(&stdout(&fj(&["evolve", "--t-end", "0.2"]))).1;
    let strided = parse_csv(&stdout(&fj(&[
        "evolve",
        "--t-end",
        "0.2",
        "--sample-stride",
        "4",
    ])))
    .1;
    assert!(strided.len() < all.len() / 3);
    let (_, rows) = parse_csv(&stdout(&fj(&[
        "evolve",
        "--t-end",
        "0.1",
        "--init-amps",
        "0.6,0,0,0.8,0,0,0,0",
    ])));
    assert_eq!(rows[0][6..10], [0.6, 0.0, 0.0, 0.8]);
    assert!((rows[0][5] - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_output_is_deterministic() {
    let args = [&["evolve"], &SPIN_FLIP[..]].concat();
    assert_eq!(fj(&args).stdout, fj(&args).stdout);
}

#[test]
fn analytic_companion_shares_time_grid() {
    let dir = tempfile::tempdir().unwrap();
    let ana = dir.path().join("analytic.csv");
    let num = dir.path().join("numeric.csv");
    let args = [
        &[
            "evolve",
            "--analytic",
            ana.to_str().unwrap(),
            "-o",
            num.to_str().unwrap(),
        ],
        &SPIN_FLIP[..],
    ]
    .concat();
    assert!(stdout(&fj(&args)).is_empty());
    let (h1, exact) = parse_csv(&std::fs::read_to_string(&num).unwrap());
    let (h2, approx) = parse_csv(&std::fs::read_to_string(&ana).unwrap());
    assert_eq!(h1, h2);
    assert_eq!(exact.len(), approx.len());
    for (a, b) in exact.iter().zip(&approx) {
        assert_eq!(a[0], b[0]);
        assert!((a[5] - b[5]).abs() < 0.05);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["evolve", "--bogus"]), 2);
    assert_eq!(
        code(&["evolve", "--beta", "0.1", "--beta-l", "0.2", "--beta-r", "0.3"]),
        2
    );
    assert_eq!(code(&["evolve", "--beta-l", "0.2"]), 2);
    assert_eq!(code(&["evolve", "--init", "5"]), 2);
    assert_eq!(code(&["evolve", "--init-amps", "1,0"]), 2);
    assert_eq!(code(&["evolve", "--init-amps", "0,0,0,0,0,0,0,0"]), 2);
    assert_eq!(code(&["evolve", "--steps-per-period", "8"]), 2);
    assert_eq!(code(&["evolve", "--nu", "-1"]), 2);
    assert_eq!(code(&["quasienergy", "--format", "csv"]), 2);
    assert_eq!(
        code(&["scan", "--axis1", "lambda:0:1:3", "--axis2", "lambda:0:1:3"]),
        2
    );
    assert_eq!(code(&["scan", "--axis1", "lambda:0:1"]), 2);
    assert_eq!(code(&["boundary", "--axis", "beta:0:1:5"]), 2);
    assert_eq!(code(&["verify", "--suite", "nope"]), 2);
    assert_eq!(code(&["evolve", "--config", "/nonexistent/config.json"]), 2);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn non_integer_resonance_exits_3() {
    assert_eq!(code(&["quasienergy", "--Omega", "75"]), 3);
    // The exact integrator accepts any Omega; the effective model does not.
    assert_eq!(
        code(&[
            "evolve",
            "--Omega",
            "75",
            "--t-end",
            "0.1",
            "-o",
            "/dev/null"
        ]),
        0
    );
    assert_eq!(
        code(&[
            "evolve",
            "--Omega",
            "101",
            "--t-end",
            "0.1",
            "--analytic",
            "/dev/null"
        ]),
        3
    );
}

#[test]
fn divergence_exits_4() {
    let args = [
        "evolve",
        "--two-eps-over-omega",
        "0",
        "--beta",
        "5",
        "--t-end",
        "100",
        "--sample-stride",
        "1000",
    ];
    assert_eq!(code(&args), 4);
}

#[test]
fn degenerate_analytic_solution_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let ana = dir.path().join("a.csv");
    let args = [
        "evolve",
        "--two-eps-over-omega",
        "0",
        "--beta",
        "1",
        "--t-end",
        "0.1",
        "--analytic",
        ana.to_str().unwrap(),
    ];
    let out = fj(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&fj(&[
        "scan",
        "--lambda",
        "0.3",
        "--beta",
        "0.25",
        "--axis1",
        "lambda:0:2:11",
        "--axis2",
        "two_eps_over_omega:0:8:21",
        "--tol",
        "1e-7",
        "--seed",
        "9",
        "--dump-config",
    ]));
    let cfg: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(cfg["command"], "scan");
    assert_eq!(cfg["params"]["beta_l"], 0.25);
    assert_eq!(cfg["scan"]["axis1"]["count"], 11);
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, &first).unwrap();
    let second = stdout(&fj(&[
        "scan",
        "--config",
        path.to_str().unwrap(),
        "--dump-config",
    ]));
    assert_eq!(first, second);

    // Flags override the file.
    let third: Value = serde_json::from_str(&stdout(&fj(&[
        "scan",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "4",
        "--dump-config",
    ])))
    .unwrap();
    assert_eq!(third["scan"]["seed"], 4);
    assert_eq!(third["tol"], 1e-7);
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"command": "evolve", "params": {"nu": 1, "lambda": 0.5, "zeeman": 100, "omega": 50,
            "epsilon": 75, "beta_l": 0.2, "beta_r": 0.2}, "integration": {"t_end": 0.5,
            "steps_per_period": 512, "sample_stride": 1}}"#,
    )
    .unwrap();
    let from_file = fj(&["evolve", "--config", path.to_str().unwrap()]).stdout;
    assert_eq!(
        from_file,
        fj(&[&["evolve"], &SPIN_FLIP[..]].concat()).stdout
    );
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(code(&["evolve", "--config", path.to_str().unwrap()]), 2);
}

#[test]
fn quasienergy_reports_spectrum_and_verdict() {
    let v = json(&fj(&[
        "quasienergy",
        "--lambda",
        "0.5",
        "--two-eps-over-omega",
        "3",
        "--beta",
        "0.2",
    ]));
    assert_eq!(v["params"]["Omega"], 100.0);
    assert_eq!(v["couplings"]["n"], 2);
    let modes = v["quasienergies"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    for m in modes {
        assert_eq!(m["vector"].as_array().unwrap().len(), 4);
        assert!(m["energy"]["im"].as_f64().unwrap().abs() < 1e-9);
    }
    let sum_re: f64 = modes
        .iter()
        .map(|m| m["energy"]["re"].as_f64().unwrap())
        .sum();
    assert!(sum_re.abs() < 1e-9);
    assert_eq!(v["verdict"]["case"], "A");
    assert_eq!(v["verdict"]["stable"], true);
    assert!(v.get("equilibrium").is_none());

    let unstable = json(&fj(&[
        "quasienergy",
        "--lambda",
        "0.5",
        "--two-eps-over-omega",
        "1",
        "--beta",
        "0.6",
    ]));
    assert_eq!(unstable["verdict"]["case"], "D");
}

#[test]
fn quasienergy_checks_unbalanced_equilibrium() {
    let v = json(&fj(&[
        "quasienergy",
        "--lambda",
        "0.3333333333333333",
        "--two-eps-over-omega",
        "3",
        "--beta-l",
        "0.2",
        "--beta-r",
        "0.9706",
        "--equilibrium-tol",
        "1e-3",
        "--tol",
        "1e-3",
    ]));
    let eq = &v["equilibrium"];
    assert_eq!(eq["stable"], true);
    assert!(eq["matched"].is_string());
    assert!(!eq["checks"].as_array().unwrap().is_empty());
    assert_eq!(v["verdict"]["case"], "B");
}

fn small_scan(extra: &[&str], env: &[(&str, &str)]) -> Output {
    let args = [
        &[
            "scan",
            "--beta",
            "0.2",
            "--axis1",
            "lambda:0:2:21",
            "--axis2",
            "two_eps_over_omega:0:8:41",
        ],
        extra,
    ]
    .concat();
    fj_env(&args, env)
}

#[test]
fn scan_json_schema() {
    let v = json(&small_scan(&[], &[]));
    assert_eq!(v["quantity"], "re_rho_even");
    assert_eq!(v["axis1"]["name"], "lambda");
    assert_eq!(v["axis1"]["values"].as_array().unwrap().len(), 21);
    assert_eq!(v["axis2"]["name"], "two_eps_over_omega");
    for key in ["values", "verdicts", "max_im"] {
        let m = v[key].as_array().unwrap();
        assert_eq!(m.len(), 21, "{key}");
        assert!(
            m.iter().all(|row| row.as_array().unwrap().len() == 41),
            "{key}"
        );
    }
    let labels: Vec<&str> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_str().unwrap()))
        .collect();
    assert!(labels.contains(&"A") && labels.contains(&"D"));
    assert!(!v["boundary_cells"].as_array().unwrap().is_empty());
    let lines = v["boundary"].as_array().unwrap();
    assert!(!lines.is_empty());
    for line in lines {
        for pt in line.as_array().unwrap() {
            let x = pt[0].as_f64().unwrap();
            let y = pt[1].as_f64().unwrap();
            assert!((0.0..=2.0).contains(&x) && (0.0..=8.0).contains(&y));
        }
    }
    assert!(v.get("dynamics").is_none());
}

#[test]
fn scan_odd_order_and_dynamics_sample() {
    let v = json(&small_scan(
        &["--Omega", "50", "--verify-dynamics", "4", "--seed", "2"],
        &[],
    ));
    assert_eq!(v["quantity"], "re_rho_sum_odd");
    let cells = v["dynamics"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for c in cells {
        for key in ["i", "j", "case", "max_im", "max_total", "consistent"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn scan_thread_count_does_not_change_output() {
    let one = small_scan(&[], &[("FJ_THREADS", "1")]);
    let four = small_scan(&[], &[("FJ_THREADS", "4")]);
    let flag = small_scan(&["--threads", "3"], &[("FJ_THREADS", "bogus")]);
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one), stdout(&flag));
    assert_eq!(
        small_scan(&[], &[("FJ_THREADS", "bogus")]).status.code(),
        Some(2)
    );
    assert_eq!(small_scan(&["--threads", "0"], &[]).status.code(), Some(2));
}

#[test]
fn boundary_csv_and_json() {
    let text = stdout(&fj(&[
        "boundary",
        "--lambda",
        "0.5",
        "--axis",
        "two_eps_over_omega:0:8:81",
    ]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "two_eps_over_omega,boundary_beta");
    assert_eq!(rows.len(), 81);
    // Pure spin flipping at even order: the boundary is |J2(x)|.
    let at3 = rows.iter().find(|r| (r[0] - 3.0).abs() < 1e-12).unwrap();
    assert!((at3[1] - 0.486091260585891).abs() < 1e-9);

    let v = json(&fj(&[
        "boundary",
        "--axis",
        "lambda:0:2:11",
        "--format",
        "json",
    ]));
    assert_eq!(v["swept"], "lambda");
    assert_eq!(v["points"].as_array().unwrap().len(), 11);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let out = fj(&["quasienergy", "-o", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["quasienergies"].is_array());
}

fn assert_exists(dir: &Path, name: &str) {
    assert!(dir.join(name).is_file(), "missing artifact {name}");
}

#[test]
fn verify_suite_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("artifacts");
    let out = fj(&["verify", "--artifacts", art.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["suite"], "figures");
    assert_eq!(v["passed"], true);
    assert_eq!(v["failed"], 0);
    let items = v["items"].as_array().unwrap();
    assert_eq!(v["total"].as_u64().unwrap() as usize, items.len());
    for it in items {
        assert_eq!(it["passed"], true, "{it}");
        assert!(it["criterion"]["kind"].is_string());
    }
    let written = v["artifacts"].as_array().unwrap();
    assert!(!written.is_empty());
    for name in written {
        assert_exists(&art, name.as_str().unwrap());
    }
    let csv = written
        .iter()
        .find(|n| n.as_str().unwrap().ends_with(".csv"))
        .unwrap();
    let text = std::fs::read_to_string(art.join(csv.as_str().unwrap())).unwrap();
    assert!(text.starts_with(COLUMNS));
}
