use std::io::Write;
use std::process::{Command, Output};

fn qrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrate")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn spec_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn rate_json_for_one_bit_and_two_bit_specs() {
    let f = spec_file(r#"{"name": "one_bit", "uniform": {"K": 1, "step": 1.5958}}"#);
    let o = qrate(&["rate", f.path().to_str().unwrap(), "--snr-db", "30", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gmi = v["gmi"]["bits"].as_f64().unwrap();
    assert!((gmi - 1.458).abs() < 1e-3 && gmi < 1.4605);
    assert_eq!(v["name"], "one_bit");

    let f = spec_file(r#"{"uniform": {"K": 2, "step": 0.99568668594350684}}"#);
    let o = qrate(&["rate", f.path().to_str().unwrap(), "--snr-db", "40", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["gmi"]["bits"].as_f64().unwrap() - 3.07).abs() < 5e-3);
}

#[test]
fn rate_text_mentions_every_quantity() {
    let f = spec_file(r#"{"K": 2, "thresholds": [1.0], "levels": [0.5, 1.5]}"#);
    let o = qrate(&["rate", f.path().to_str().unwrap(), "--snr-db", "-3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for key in ["gamma", "gmi", "capacity", "rate loss", "saturation"] {
        assert!(s.contains(key), "{key}");
    }
}

#[test]
fn input_errors_exit_with_two() {
    let zero = spec_file(r#"{"K": 1, "thresholds": [], "levels": [0.0]}"#);
    let o = qrate(&["rate", zero.path().to_str().unwrap(), "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate quantizer"));

    let bad = spec_file("{\n  \"K\": 3,\n  \"thresholds\": [1.0, 0.5],\n  \"levels\": [1, 2, 3]\n}");
    let o = qrate(&["rate", bad.path().to_str().unwrap(), "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let path = bad.path().display().to_string();
    assert!(stderr(&o).contains(&format!("{path}:3:")), "{}", stderr(&o));

    let broken = spec_file("{\n  \"K\": 1,\n  \"levels\": [1.0\n");
    let o = qrate(&["rate", broken.path().to_str().unwrap(), "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{}:", broken.path().display())));

    assert_eq!(qrate(&["rate", "/nonexistent.json", "--snr-db", "0"]).status.code(), Some(2));
    assert_eq!(qrate(&["sweep", "--variable", "foo", "--grid", "1:2:2"]).status.code(), Some(2));
    assert_eq!(qrate(&["table1", "--max-bits", "17"]).status.code(), Some(2));
    assert_eq!(qrate(&["bogus"]).status.code(), Some(2));
}

#[test]
fn design_table_csv() {
    let o = qrate(&["table1", "--max-bits", "12"]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 12);
    let b5 = &rows[4];
    assert!((b5[column(&h, "l_star")] / 3.0102 - 1.0).abs() < 1e-3);
    assert!((b5[column(&h, "mmse")] / 3.4952e-3 - 1.0).abs() < 1e-3);
    assert!((rows[9][column(&h, "snr_q_db")] / 51.55 - 1.0).abs() < 1e-3);
    assert_eq!(rows[0][column(&h, "l_star")], rows[0][column(&h, "step_star")]);
    // 17 significant digits.
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let field = line.split(',').nth(2).unwrap();
    assert_eq!(field.split('e').next().unwrap().len(), 18);
}

#[test]
fn table_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(qrate(&["table1", "--max-bits", "8", "--output", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn loading_factor_sweep_peaks_at_optimum() {
    let o = qrate(&["sweep", "--variable", "loading_factor", "--grid", "0.01:5:500", "--bits", "4", "--snr-db", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    let (l, g) = (column(&h, "loading_factor"), column(&h, "gmi_bits"));
    let best = rows.iter().max_by(|a, b| a[g].total_cmp(&b[g])).unwrap();
    assert!((best[l] - 2.6816).abs() <= 0.01 + 1e-9, "{}", best[l]);
}

#[test]
fn gain_sweep_of_nonmonotone_spec() {
    let f = spec_file(r#"{"K": 4, "thresholds": [0.2, 0.6, 0.7], "levels": [0.1, 0.9, 0.8, 0.2]}"#);
    let o = qrate(&[
        "sweep", "--variable", "gain_scale", "--grid", "0.05:20:400", "--grid-log", "--spec",
        f.path().to_str().unwrap(), "--snr-db", "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(&stdout(&o));
    let (s, g, m) = (column(&h, "gain_scale"), column(&h, "gmi_bits"), column(&h, "mse"));
    let by_gmi = rows.iter().max_by(|a, b| a[g].total_cmp(&b[g])).unwrap()[s];
    let by_mse = rows.iter().min_by(|a, b| a[m].total_cmp(&b[m])).unwrap()[s];
    assert_ne!(by_gmi, by_mse);
}

#[test]
fn snr_sweep_orders_saturation_by_resolution() {
    let mut sat = Vec::new();
    for b in 1..=12 {
        let o = qrate(&["sweep", "--variable", "snr_db", "--grid-values", "-10,60", "--bits", &b.to_string()]);
        let (h, rows) = csv_rows(&stdout(&o));
        sat.push(rows[1][column(&h, "gmi_bits")]);
    }
    assert!(sat.windows(2).all(|w| w[1] > w[0]));
    assert!((sat[0] - 1.4604).abs() < 1e-3);
}

#[test]
fn sweep_writes_output_file_with_approximations() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bits.csv");
    let o = qrate(&[
        "sweep", "--variable", "bits", "--grid", "1:6:6", "--snr-db", "20", "--approx", "--output",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(&std::fs::read_to_string(p).unwrap());
    assert_eq!(rows.len(), 6);
    assert!(h.iter().any(|c| c == "sat_hat_bits"));
    assert!(rows[0][column(&h, "lhat0")].is_nan());
}

#[test]
fn optimize_reports() {
    let o = qrate(&["optimize", "--bits", "6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["design"]["l_star"].as_f64().unwrap() - 3.3300).abs() < 1e-4);
    assert_eq!(v["approximations"].as_array().unwrap().len(), 5);

    let o = qrate(&["optimize", "--bits", "1"]);
    let s = stdout(&o);
    assert!(s.contains("1.5958") && s.contains("gain control is unnecessary"));

    let o = qrate(&["optimize", "--lloyd", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let t: Vec<f64> = serde_json::from_value(v["thresholds"].clone()).unwrap();
    for (x, want) in t.iter().zip([0.5006, 1.0500, 1.7480]) {
        assert!((x - want).abs() < 5e-4);
    }
    assert_eq!(qrate(&["optimize"]).status.code(), Some(2));
    assert_eq!(qrate(&["optimize", "--bits", "2", "--lloyd", "2"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let o = qrate(&["verify", "--samples", "500000", "--seed", "3"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("48 of 48 checks passed"));

    let o = qrate(&["verify", "--samples", "500000", "--corrupt-gamma", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qrate"))
            .args(["verify", "--samples", "200000", "--format", "json"])
            .env("QRATE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(one.stdout, run("3").stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}
