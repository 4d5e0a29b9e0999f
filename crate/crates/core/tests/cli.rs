use std::process::{Command, Output};

fn ehjam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehjam")).args(args).env_remove("EHJAM_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn outage_sweep_rows_are_monotone() {
    let out = ehjam(&["outage", "--scheme", "simo", "--nrx", "2", "--p-db", "20", "--pj-db", "0:5:40", "--rate", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 9);
    for name in ["scheme", "n_t", "n_r", "P_dB", "PJ_dB", "R", "p_out_jam", "p_out_nojam", "p_out_asymptotic"] {
        column(&header, name);
    }
    let i = column(&header, "p_out_jam");
    let p: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[1] >= w[0]));
    assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn asymptote_orders_schemes() {
    let out = ehjam(&["outage", "--scheme", "miso,simo,alamouti", "--ntx", "2", "--nrx", "2", "--eta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let i = column(&header, "p_out_asymptotic");
    let v: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
    assert_eq!(v.len(), 3);
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = |path: &str, threads: &'static str| {
        vec![
            "--threads", threads, "simulate", "--slots", "100000", "--reps", "3", "--seed", "42", "--lambda", "0.2,0.5",
            "-o",
        ]
        .into_iter()
        .map(String::from)
        .chain([path.to_string()])
        .collect::<Vec<_>>()
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (p, t) in [(&a, "1"), (&b, "4")] {
        let argv = args(p.to_str().unwrap(), t);
        let out = Command::new(env!("CARGO_BIN_EXE_ehjam")).args(&argv).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    let (header, rows) = csv_rows(std::str::from_utf8(&ta).unwrap());
    let seed = column(&header, "seed");
    assert!(rows.iter().all(|r| r[seed] == "42"));
    // 3 replications plus mean and std_err, for each lambda.
    assert_eq!(rows.len(), 10);
}

#[test]
fn json_mirrors_csv() {
    let base = ["service-latency", "--lambda", "0.2,0.99", "--battery", "2,inf"];
    let csv_out = ehjam(&base);
    let json_out = ehjam(&[&base[..], &["--format", "json"]].concat());
    let (header, rows) = csv_rows(&stdout(&csv_out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (obj, row) in arr.iter().zip(&rows) {
        let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
        assert_eq!(keys, header.iter().collect::<Vec<_>>());
        let status = column(&header, "status");
        assert_eq!(obj["status"], row[status].as_str());
    }
    // λ = 0.99 exceeds μ: metric cells empty, marked unstable.
    let i = column(&header, "status");
    let q = column(&header, "Qbar");
    let unstable: Vec<&Vec<String>> = rows.iter().filter(|r| r[i] == "unstable").collect();
    assert!(!unstable.is_empty());
    assert!(unstable.iter().all(|r| r[q].is_empty()));
}

#[test]
fn optimize_reproduces_table_and_flags_infeasible() {
    let out = ehjam(&["optimize", "--pj", "10,40,70", "--dth", "2.25,1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let (lam, bind, dth) = (column(&header, "lambda_opt"), column(&header, "binding"), column(&header, "d_th"));
    let at = |pj: usize, d: &str| rows.iter().filter(|r| r[dth] == d).nth(pj).unwrap();
    let l70: f64 = at(2, "2.25")[lam].parse().unwrap();
    assert!((l70 - 0.6746).abs() < 0.005);
    assert_eq!(at(2, "2.25")[bind], "delay_bound");
    assert_eq!(at(0, "1.5")[bind], "infeasible");
    assert!(at(0, "1.5")[lam].is_empty());
}

#[test]
fn stability_region_lists_vertices() {
    let out = ehjam(&["stability-region", "--nrx", "2,4"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let region = column(&header, "region");
    for name in ["R1", "R2", "union"] {
        assert!(rows.iter().any(|r| r[region] == name));
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["outage", "--p", "1", "--p-db", "3"],
        vec!["outage", "--ntx", "1.5"],
        vec!["outage", "--pj-db", "5:1:0"],
        vec!["service-latency", "--delta", "1.5"],
        vec!["nonsense"],
        vec!["simulate", "--slots", "10"],
    ] {
        let out = ehjam(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(ehjam(&["--help"]).status.code(), Some(0));
}

#[test]
fn quick_validation_passes() {
    let out = ehjam(&["validate", "--quick"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("0 failed"));
}
