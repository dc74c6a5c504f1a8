use std::process::{Command, Output};

use serde_json::Value;

fn kloost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kloost"))
        .args(args)
        .env_remove("KLOOST_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = kloost(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn eval_worked_example() {
    let v = json(&[
        "eval", "--p", "3", "--k", "2", "--a", "1", "--b", "1", "--chi", "0", "--format", "json",
    ]);
    for m in v["methods"].as_array().unwrap() {
        assert!((m["re"].as_f64().unwrap() - 1.041889066).abs() < 1e-8);
        assert!((m["bound_margin"].as_f64().unwrap() - (6.0 - 1.041889066)).abs() < 1e-8);
    }
    assert_eq!(v["methods"].as_array().unwrap().len(), 2);

    let text = stdout(&kloost(&[
        "eval", "--p", "3", "--k", "2", "--a", "1", "--b", "1",
    ]));
    assert!(text.contains("1.041889066"));
}

#[test]
fn exit_codes() {
    assert_eq!(kloost(&["eval", "--p", "3"]).status.code(), Some(1));
    assert_eq!(kloost(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        kloost(&["eval", "--p", "9", "--k", "2", "--a", "1", "--b", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kloost(&["eval", "--p", "5", "--k", "2", "--a", "5", "--b", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kloost(&["count", "--p", "7", "--l", "1", "--a", "1,8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(kloost(&["verify", "--only", "11"]).status.code(), Some(1));
    assert_eq!(kloost(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports_each_criterion() {
    let ok = kloost(&["verify", "--only", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("[PASS]  5 "));

    // the cosine form of the untwisted sum does not hold at q = 27
    let bad = kloost(&["verify", "--only", "4"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("q=27: 9/9 square classes off the cos form"));
}

#[test]
fn family_csv_schema_round_trips() {
    let o = kloost(&["family", "--p", "7", "--k", "2", "--a", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.contains(&"# q: 49") && meta.contains(&"# a: 2"));

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["chi_index", "t_chi", "in_S", "value", "theta"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 42);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
        assert!(r[1].parse::<u64>().unwrap() < 7);
        let in_s: bool = r[2].parse().unwrap();
        let value: f64 = r[3].parse().unwrap();
        if in_s {
            let theta: f64 = r[4].parse().unwrap();
            assert!((2.0 * theta.cos() - value).abs() < 1e-9);
        }
    }

    let one = stdout(&kloost(&[
        "family", "--p", "7", "--k", "2", "--a", "2", "--chi", "5",
    ]));
    let row = one.lines().last().unwrap();
    assert_eq!(row, text.lines().nth(meta.len() + 6).unwrap());
}

#[test]
fn dist_is_deterministic_across_worker_counts() {
    let args = [
        "dist",
        "--p",
        "101",
        "--k",
        "2",
        "--a",
        "3",
        "--no-timing",
        "--seed",
        "9",
    ];
    let first = kloost(&args);
    assert!(first.status.success());
    let mut single = vec!["--workers", "1"];
    single.extend(args);
    let second = kloost(&single);
    assert_eq!(first.stdout, second.stdout);

    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    for key in [
        "q",
        "a",
        "n_characters",
        "n_in_S",
        "ks_distance",
        "zero_fraction",
        "moments",
        "runtime_ms",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["runtime_ms"], 0);
    assert_eq!(v["moments"].as_array().unwrap().len(), 8);
    assert_eq!(v["metadata"]["seed"], 9);
}

#[test]
fn dist_zero_fraction_at_997() {
    let v = json(&["dist", "--p", "997", "--k", "2", "--a", "1"]);
    assert!((v["zero_fraction"].as_f64().unwrap() - 0.5).abs() <= 0.05);
    assert_eq!(v["n_characters"], 993012);
}

#[test]
fn dist_without_filter_uses_every_character() {
    let v = json(&[
        "dist",
        "--p",
        "11",
        "--k",
        "2",
        "--a",
        "1",
        "--sq-filter",
        "false",
    ]);
    assert_eq!(v["n_used"], v["n_characters"]);
    assert_eq!(v["sq_filter"], false);
}

#[test]
fn dist_joint_mode() {
    let v = json(&["dist", "--p", "101", "--k", "2", "--a", "1,2", "--m", "2,2"]);
    assert_eq!(v["limit"], 1.0);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 0.2);
    assert_eq!(
        kloost(&["dist", "--p", "101", "--k", "2", "--a", "1,2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn count_example() {
    let v = json(&[
        "count", "--p", "11", "--l", "1", "--a", "1,2", "--n", "1,-1",
    ]);
    assert_eq!(v["yprime_exact"], true);
    assert_eq!(v["yprime_count"], v["yprime_formula"]);
    assert!(v["f"]["degree"].as_u64().unwrap() <= 4);
    assert_eq!(v["f"]["display"], "(1/4)t^2");
    assert_eq!(v["y0"]["f_vanishes_on_y0"], true);

    let v = json(&["count", "--p", "7", "--l", "2", "--a", "1"]);
    assert_eq!(v["yprime_count"], 28);
    assert!(v.get("f").is_none());
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_kloost"))
            .args([
                "eval",
                "--p",
                "5",
                "--k",
                "3",
                "--a",
                "1",
                "--b",
                "2",
                "--chi",
                "3",
                "--format",
                "json",
                "--no-timing",
            ])
            .env("KLOOST_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert!(dir.path().join("dlog_5_3.bin").exists());
    assert_eq!(run().stdout, first.stdout);
}
