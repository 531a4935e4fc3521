use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pig_core::rng::gamma_sample;
use pig_core::RngState;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn pig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pig"))
        .args(args)
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    pig(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gamma_fixture_is_reproducible() {
    let text = std::fs::read_to_string(fixture("gamma_3_2.csv")).unwrap();
    let stored: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    let mut rng = RngState::new(7);
    let fresh: Vec<f64> = (0..200)
        .map(|_| gamma_sample(3.0, 2.0, &mut rng).unwrap())
        .collect();
    assert_eq!(stored, fresh);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&["pig-sample", "--draws", "20", "--out", s(&out)]), 0);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["pig-sample", "--draws", "ten"]), 2);
    assert_eq!(code(&["fit-dirichlet", "--out", s(&out)]), 2);
    let table = fixture("table1.csv");
    assert_eq!(
        code(&[
            "fit-dirichlet",
            "--counts",
            s(&table),
            "--tau",
            "1",
            "--mean-alpha",
            "1"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "fit-dirichlet",
            "--counts",
            s(&table),
            "--thin",
            "0",
            "--out",
            s(&out)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "fit-dirichlet",
            "--counts",
            s(&dir.path().join("missing.csv")),
            "--out",
            s(&out)
        ]),
        3
    );

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "unit,a,b\nu1,3,x\n").unwrap();
    let o = pig(&["fit-dirichlet", "--counts", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("column 3"), "{err}");

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "draws = 10\nbogus = 1\n").unwrap();
    assert_eq!(
        code(&["pig-sample", "--config", s(&cfg), "--out", s(&out)]),
        2
    );
    assert_eq!(
        code(&["pig-sample", "--config", s(&dir.path().join("nope.cfg"))]),
        3
    );
}

#[test]
fn crude_truncation_fails_validation() {
    let o = pig(&["validate", "--draws", "20000", "--trunc", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let table = String::from_utf8_lossy(&o.stdout);
    // the untilted draws carry the largest truncation bias
    let untilted: Vec<&str> = table
        .lines()
        .filter(|l| l.starts_with("P-IG transform c=0.0000"))
        .collect();
    assert_eq!(untilted.len(), 3);
    assert!(untilted.iter().all(|l| l.ends_with("FAIL")), "{table}");
}

#[test]
fn validate_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = pig(&[
        "validate",
        "--draws",
        "2000",
        "--trunc",
        "50",
        "--seed",
        "4",
        "--out",
        s(&a),
    ]);
    let second = pig(&[
        "validate",
        "--draws",
        "2000",
        "--trunc",
        "50",
        "--seed",
        "4",
        "--out",
        s(&b),
    ]);
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(
        std::fs::read(a.join("validate.csv")).unwrap(),
        std::fs::read(b.join("validate.csv")).unwrap()
    );
}

#[test]
fn flags_beat_config_beat_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sampler settings\ndraws = 7\nseed = 99\ntilt = 1.5\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        code(&[
            "pig-sample",
            "--config",
            s(&cfg),
            "--seed",
            "3",
            "--out",
            s(&a)
        ]),
        0
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["meta"]["seed"], 3);
    assert_eq!(summary["meta"]["tilt"], 1.5);
    assert_eq!(
        std::fs::read_to_string(a.join("pig_samples.csv"))
            .unwrap()
            .lines()
            .count(),
        8
    );
    assert_eq!(code(&["pig-sample", "--out", s(&b)]), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["meta"]["seed"], 1);
    assert_eq!(summary["meta"]["tilt"], 0.0);
}

#[test]
fn fit_dirichlet_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let table = fixture("table1.csv");
    let args = [
        "fit-dirichlet",
        "--counts",
        s(&table),
        "--id-cols",
        "2",
        "--seed",
        "7",
        "--iters",
        "300",
        "--burnin",
        "50",
        "--thin",
        "5",
        "--mean-alpha",
        "0.5",
        "--out",
        s(&out),
    ];
    assert_eq!(code(&args), 0);
    let first = std::fs::read(out.join("samples.csv")).unwrap();
    assert_eq!(code(&args), 0);
    assert_eq!(first, std::fs::read(out.join("samples.csv")).unwrap());

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iter,alpha_1,alpha_2,alpha_3,alpha_4,alpha_5,alpha_6")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "55");
    assert!(row[1..]
        .iter()
        .all(|c| c.contains('e') && c.parse::<f64>().unwrap() > 0.0));
    assert_eq!(text.lines().count(), 1 + 50);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let params = summary["parameters"].as_array().unwrap();
    assert_eq!(params.len(), 6);
    for p in params {
        for key in [
            "parameter",
            "mean",
            "sd",
            "q025",
            "q25",
            "q50",
            "q75",
            "q975",
            "mcse",
            "ess",
        ] {
            assert!(p.get(key).is_some(), "missing {key}");
        }
        assert!(p["mean"].as_f64().unwrap() > 0.0);
    }
    let tau = summary["meta"]["tau"].as_f64().unwrap();
    assert!((tau - 0.5 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    assert_eq!(summary["meta"]["categories"][0], "cocaine");

    let plot = std::fs::read_to_string(out.join("plot.csv")).unwrap();
    assert!(plot.starts_with("parameter,value\nalpha_1,"));
    assert_eq!(plot.lines().count(), 1 + 50 * 6);
}

#[test]
fn homogeneous_fit_reports_an_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let table = fixture("table1.csv");
    assert_eq!(
        code(&[
            "fit-dirichlet",
            "--counts",
            s(&table),
            "--id-cols",
            "2",
            "--homogeneous",
            "--iters",
            "200",
            "--burnin",
            "50",
            "--chains",
            "2",
            "--out",
            s(&out)
        ]),
        0
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["parameters"][0]["parameter"], "alpha");
    assert_eq!(summary["meta"]["chains"], 2);
    assert!(summary["meta"]["oracle"]["mean"].as_f64().unwrap() > 0.0);
    let samples = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 2 * 150);
}

#[test]
fn gamma_shape_fit_tracks_its_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let data = fixture("gamma_3_2.csv");
    assert_eq!(
        code(&[
            "fit-gamma-shape",
            "--data",
            s(&data),
            "--beta",
            "2",
            "--iters",
            "2500",
            "--burnin",
            "500",
            "--thin",
            "4",
            "--seed",
            "3",
            "--out",
            s(&out)
        ]),
        0
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let p = &summary["parameters"][0];
    let oracle = &summary["meta"]["oracle"];
    let gap = (p["mean"].as_f64().unwrap() - oracle["mean"].as_f64().unwrap()).abs();
    assert!(gap <= 3.0 * p["mcse"].as_f64().unwrap(), "gap {gap}");
    assert!(oracle["ks"].as_f64().unwrap() <= 0.08);
    let density = std::fs::read_to_string(out.join("oracle_density.csv")).unwrap();
    assert!(density.starts_with("alpha,value\n"));
    assert_eq!(
        code(&["fit-gamma-shape", "--data", s(&data), "--out", s(&out)]),
        2
    );
}

#[test]
fn predict_from_unit_concentrations() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let mut text = String::from("iter,alpha_1,alpha_2,alpha_3,alpha_4\n");
    for i in 1..=500 {
        text += &format!("{i},1,1,1,1\n");
    }
    std::fs::write(&samples, text).unwrap();
    let out = dir.path().join("p");
    assert_eq!(
        code(&[
            "predict",
            "--samples",
            s(&samples),
            "--draws",
            "4",
            "--out",
            s(&out)
        ]),
        0
    );
    let pred = std::fs::read_to_string(out.join("predictive.csv")).unwrap();
    let rows: Vec<(usize, f64)> = pred
        .lines()
        .skip(1)
        .map(|l| {
            let (c, v) = l.split_once(',').unwrap();
            (c.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 500 * 4 * 4);
    for group in rows.chunks(4) {
        assert_eq!(group.iter().map(|r| r.0).collect::<Vec<_>>(), [1, 2, 3, 4]);
        assert!((group.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-10);
    }
    for k in 1..=4 {
        let v: Vec<f64> = rows.iter().filter(|r| r.0 == k).map(|r| r.1).collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let se = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((m - 0.25).abs() <= 4.0 * se, "category {k}: {m}");
    }

    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "iter,alpha_1,alpha_2\n1,0.5,abc\n").unwrap();
    assert_eq!(
        code(&["predict", "--samples", s(&broken), "--out", s(&out)]),
        3
    );
}
