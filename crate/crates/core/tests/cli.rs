use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gme"))
        .args(args)
        .env_remove("GME_TOLERANCE")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const GHZ: &str = r#"{"dims":[2,2,2],"kind":"pure","terms":[
    {"occupation":[0,0,0],"re":1.0},{"occupation":[1,1,1],"re":1.0}]}"#;
const PSI2: &str = r#"{"dims":[2,2,2],"kind":"pure","terms":[
    {"occupation":[0,1,1],"re":1.0},{"occupation":[1,0,0],"re":1.0}]}"#;
const SM3: &str = "sigma_minus;sigma_minus;sigma_minus";

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn evaluate_balanced_ghz_is_on_the_boundary() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "ghz.json", GHZ);
    let out = gme(&[
        "evaluate",
        "--state",
        &state,
        "--ops",
        SM3,
        "--condition",
        "tri-product",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["violated"], false);
    assert!(report["margin"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn evaluate_psi2_is_violated_with_ops_file() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "psi2.json", PSI2);
    let ops = write(
        &dir,
        "ops.json",
        r#"{"factors":["sigma_minus","sigma_minus","sigma_minus"],"dagger":"d--"}"#,
    );
    let out = gme(&[
        "evaluate",
        "--state",
        &state,
        "--ops",
        &ops,
        "--condition",
        "tri_dagger",
    ]);
    assert_eq!(code(&out), 10);
    assert_eq!(json(&out)["violated"], true);
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"dims\": [2, 2, 2], \"kind\": ");
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &bad,
            "--ops",
            SM3,
            "--condition",
            "tri-dagger"
        ])),
        2
    );
    let state = write(&dir, "psi2.json", PSI2);
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            "/nonexistent.json",
            "--ops",
            SM3,
            "--condition",
            "tri-dagger"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &state,
            "--ops",
            "sigma_minus;sigma_minus",
            "--condition",
            "tri-dagger"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &state,
            "--ops",
            SM3,
            "--condition",
            "quad-dagger"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &state,
            "--ops",
            SM3,
            "--condition",
            "bogus"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &state,
            "--ops",
            SM3,
            "--condition",
            "tri-dagger",
            "--dagger",
            "dd-"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "evaluate",
            "--state",
            &state,
            "--ops",
            SM3,
            "--condition",
            "tri-dagger",
            "--tolerance",
            "-1"
        ])),
        2
    );
    assert_eq!(
        code(&gme(&[
            "soundness",
            "--condition",
            "tri-dagger",
            "--trials",
            "0"
        ])),
        2
    );
    assert_eq!(code(&gme(&[])), 2);
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "psi2.json", PSI2);
    let out = Command::new(env!("CARGO_BIN_EXE_gme"))
        .args([
            "evaluate",
            "--state",
            &state,
            "--ops",
            SM3,
            "--condition",
            "tri-dagger",
        ])
        .env("GME_TOLERANCE", "0.75")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["tolerance"], 0.75);
}

#[test]
fn scan_noise_thresholds() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "psi2.json", PSI2);
    let csv = dir.path().join("scan.csv");
    let out = gme(&[
        "scan-noise",
        "--state",
        &state,
        "--ops",
        SM3,
        "--condition",
        "tri-dagger",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert!((summary["threshold"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "s,lhs,rhs_max,rhs_sum,margin,violated"
    );
    assert_eq!(text.lines().count(), 102);

    let quad = write(
        &dir,
        "quad.json",
        r#"{"dims":[2,2,2,2],"kind":"pure","terms":[
        {"occupation":[0,1,1,1],"re":1.0},{"occupation":[1,0,0,0],"re":1.0}]}"#,
    );
    let out = gme(&[
        "scan-noise",
        "--state",
        &quad,
        "--ops",
        "sigma_minus;sigma_minus;sigma_minus;sigma_minus",
        "--condition",
        "quad-dagger",
    ]);
    let s = json(&out)["threshold"].as_f64().unwrap();
    assert!((s - (17f64.sqrt() - 1.0) / 8.0).abs() < 1e-9);

    let product = write(
        &dir,
        "product.json",
        r#"{"dims":[2,2,2],"kind":"pure","terms":[{"occupation":[0,0,0],"re":1.0}]}"#,
    );
    let out = gme(&[
        "scan-noise",
        "--state",
        &product,
        "--ops",
        SM3,
        "--condition",
        "tri-dagger",
    ]);
    assert_eq!(code(&out), 0);
    let summary = json(&out);
    assert!(summary["threshold"].is_null());
    assert_eq!(summary["status"], "no threshold");
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (
        header,
        lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect(),
    )
}

#[test]
fn downconv_csv() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("dc.csv");
    let out = gme(&[
        "downconv",
        "--N",
        "4",
        "--g",
        "1",
        "--t-start",
        "0",
        "--t-stop",
        "1",
        "--t-step",
        "0.05",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&path);
    assert_eq!(rows.len(), 21);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (lhs, norm) = (col("witness_lhs"), col("norm"));
    for (k, row) in rows.iter().enumerate() {
        let v: f64 = row[lhs].parse().unwrap();
        if k == 0 {
            assert_eq!(v, 0.0);
        } else {
            assert!(v > 0.0, "row {k}");
        }
        let pops: f64 = (1..=5).map(|i| row[i].parse::<f64>().unwrap()).sum();
        assert!((pops - 1.0).abs() < 1e-10);
        assert!((row[norm].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
        // 17 significant digits
        assert_eq!(
            row[norm]
                .split('e')
                .next()
                .unwrap()
                .replace(['.', '-'], "")
                .len(),
            17
        );
    }

    let out = gme(&[
        "downconv", "--N", "4", "--g", "0", "--omega1", "1.5", "--t-stop", "2", "--t-step", "0.5",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lhs_col = text
        .lines()
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == "witness_lhs")
        .unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(
            line.split(',')
                .nth(lhs_col)
                .unwrap()
                .parse::<f64>()
                .unwrap(),
            0.0
        );
    }
    assert_eq!(code(&gme(&["downconv", "--N", "3"])), 2);
}

#[test]
fn soundness_command() {
    for (cond, trials) in [
        ("tri-dagger", "1000"),
        ("quad-dagger", "1000"),
        ("tri-product", "200"),
        ("bi1", "200"),
    ] {
        let out = gme(&[
            "soundness",
            "--condition",
            cond,
            "--trials",
            trials,
            "--seed",
            "3",
        ]);
        assert_eq!(
            code(&out),
            0,
            "{cond}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let summary = json(&out);
        assert!(summary["max_margin"].as_f64().unwrap() <= 1e-10);
        assert_eq!(summary["violations"], 0);
    }
    let a = gme(&[
        "soundness",
        "--condition",
        "tri-dagger",
        "--trials",
        "50",
        "--seed",
        "9",
    ]);
    let b = gme(&[
        "soundness",
        "--condition",
        "tri-dagger",
        "--trials",
        "50",
        "--seed",
        "9",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn optimize_command() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "psi2.json", PSI2);
    let args = [
        "optimize",
        "--state",
        &state,
        "--condition",
        "tri-dagger",
        "--restarts",
        "4",
        "--budget",
        "1500",
        "--seed",
        "7",
    ];
    let out = gme(&args);
    assert_eq!(code(&out), 10, "{}", String::from_utf8_lossy(&out.stderr));
    let result = json(&out);
    assert!(result["best_report"]["margin"].as_f64().unwrap() > 0.49);
    assert_eq!(gme(&args).stdout, out.stdout);
    assert_eq!(
        code(&gme(&[
            "optimize",
            "--state",
            &state,
            "--condition",
            "tri-dagger",
            "--budget",
            "0"
        ])),
        2
    );
}
