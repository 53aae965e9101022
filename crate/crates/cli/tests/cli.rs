use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_mixtilt");

const TWO_SIDED: &str = r#"
[model]
kind = "two_sided_tail"
a = 2.0
b = -2.5

[init]
method = "rarity_ce"
rho = 0.05
pilot_size = 5000
start_tilts = [[0.0], [-0.1]]

[ce]
pilot_size = 5000
iterations = 3

[sampling]
n = 20000
seed = 3
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn mixtilt(args: &[&str], threads: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap()
}

fn run(config: &Path, out: &Path, threads: &str) -> Output {
    mixtilt(
        &[
            "run",
            config.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        threads,
    )
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "tail.toml", TWO_SIDED);
    let out = dir.path().join("tail.csv");
    let res = run(&cfg, &out, "2");
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "table,row,K_or_ab,estimate,std_error,rel_error,var_ratio,weights,tilts,flags"
    );
    let record = csv::Reader::from_path(&out)
        .unwrap()
        .records()
        .next()
        .unwrap()
        .unwrap();
    assert_eq!(record.len(), 10);
    assert_eq!(&record[2], "{2,-2.5}");
    let est: f64 = record[3].parse().unwrap();
    assert!((est - 0.02896).abs() < 0.002, "{est}");

    let sidecar = fs::read_to_string(dir.path().join("tail.csv.resolved.jsonl")).unwrap();
    let echo: serde_json::Value = serde_json::from_str(sidecar.lines().next().unwrap()).unwrap();
    assert_eq!(echo["config"]["model"]["kind"], "two_sided_tail");
    assert_eq!(echo["config"]["sampling"]["seed"], 3);

    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("estimate"));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "tail.toml", TWO_SIDED);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&cfg, &a, "1").status.code(), Some(0));
    assert_eq!(run(&cfg, &b, "4").status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bad_config_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(
        &dir,
        "bad.toml",
        &TWO_SIDED.replace("a = 2.0", "a = 2.0\nalpha = 1"),
    );
    assert_eq!(
        run(&unknown, &dir.path().join("x.csv"), "1").status.code(),
        Some(2)
    );
    let wrong_sign = write_config(&dir, "sign.toml", &TWO_SIDED.replace("b = -2.5", "b = 2.5"));
    assert_eq!(
        run(&wrong_sign, &dir.path().join("y.csv"), "1")
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(&missing, &dir.path().join("z.csv"), "1").status.code(),
        Some(2)
    );
}

#[test]
fn unreachable_rarity_target_exits_with_4() {
    let dir = TempDir::new().unwrap();
    let text = TWO_SIDED
        .replace("a = 2.0", "a = 9.0")
        .replace("b = -2.5", "b = -9.0")
        .replace("rho = 0.05", "rho = 0.05\nmax_stages = 1");
    let cfg = write_config(&dir, "far.toml", &text);
    let out = dir.path().join("far.csv");
    let res = run(&cfg, &out, "1");
    assert_eq!(res.status.code(), Some(4));
    // the failed row is still recorded
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("error:stagnant"));
}

#[test]
fn empty_pilot_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let text = TWO_SIDED
        .replace("a = 2.0", "a = 30.0")
        .replace("b = -2.5", "b = -30.0")
        .replace(
            "method = \"rarity_ce\"\nrho = 0.05\npilot_size = 5000\nstart_tilts = [[0.0], [-0.1]]",
            "method = \"perturbation\"\ncomponents = 2",
        );
    let cfg = write_config(&dir, "empty.toml", &text);
    assert_eq!(
        run(&cfg, &dir.path().join("e.csv"), "1").status.code(),
        Some(3)
    );
}

#[test]
fn models_lists_the_catalog() {
    let res = mixtilt(&["models"], "1");
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    for name in [
        "two_sided_tail",
        "asian_call",
        "rainbow",
        "pyramid",
        "cev_digital",
    ] {
        assert!(stdout.contains(name), "{name} missing");
    }
}

#[test]
fn unknown_table_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let res = mixtilt(&["table", "12", "--output", out.to_str().unwrap()], "1");
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn table_reproduction_is_seeded() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let res = mixtilt(
            &[
                "table",
                "5",
                "--seed",
                "2",
                "--output",
                path.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(res.status.code(), Some(0));
    }
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("5,ini_")));
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
}
