use std::fs;
use std::path::Path;
use std::process::Command;

use cyclic_hgp::cli::{read_results, run, CliError};
use serde_json::Value;
use tempfile::TempDir;

fn args<'a>(out: &'a Path, rest: &[&'a str]) -> Vec<String> {
    let mut v = vec!["cyclic-hgp".to_string(), "--out".into(), out.display().to_string()];
    v.extend(rest.iter().map(|s| s.to_string()));
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn toric_pipeline_end_to_end() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();

    let search = run(args(out, &["search", "--n-max", "7", "--w-min", "2", "--w-max", "3"])).unwrap();
    assert!(search.summary.contains("table entries"), "{}", search.summary);
    let tables = fs::read_to_string(out.join("search_tables.csv")).unwrap();
    assert!(tables.contains("w,n_c,k_c,d_c,support,rate,mirror_support"));

    let built = run(args(out, &["build", "--family", "cxc", "--length", "3", "--support", "0,1"])).unwrap();
    assert!(built.summary.contains("[[18,2,3]]"), "{}", built.summary);
    let code_path = out.join("code.json");
    assert_eq!(json(&code_path)["code"]["omega"], 4);

    let code = code_path.display().to_string();
    let circ = run(args(out, &["circuit", "--code", &code, "--rounds", "3"])).unwrap();
    assert!(circ.summary.ends_with("depth 21"), "{}", circ.summary);

    let sim = run(args(
        out,
        &[
            "--seed",
            "5",
            "simulate",
            "--code",
            &code,
            "--p",
            "0.001,0.002,0.004",
            "--shots",
            "10000",
            "--max-iter",
            "100",
        ],
    ))
    .unwrap();
    let rows = read_results(&sim.files[0]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.shots == 10_000 && r.d == 3 && r.failures > 0));
    assert!(rows[0].failures < rows[2].failures);

    let fit = run(args(out, &["fit", "--results", &sim.files[0].display().to_string()])).unwrap();
    let record = &json(&fit.files[0])["fit"]["record"];
    assert!(record["alpha"].as_f64().unwrap().is_finite());
    assert_eq!(record["omega"], 4);
}

#[test]
fn repeated_seed_gives_identical_results() {
    let dir = TempDir::new().unwrap();
    let csv = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let r = run(args(
            &out,
            &[
                "--seed",
                seed,
                "simulate",
                "--code",
                "toric-3",
                "--p",
                "0.004",
                "--shots",
                "3000",
                "--max-iter",
                "50",
            ],
        ))
        .unwrap();
        body(&r.files[0])
    };
    assert_eq!(csv("a", "11"), csv("b", "11"));
    assert_ne!(csv("c", "11"), csv("d", "12"));
}

#[test]
fn zero_noise_has_no_failures() {
    let dir = TempDir::new().unwrap();
    let r = run(args(
        dir.path(),
        &["simulate", "--code", "[[240,8,8]]", "--rounds", "2", "--p", "0", "--shots", "200"],
    ))
    .unwrap();
    let rows = read_results(&r.files[0]).unwrap();
    assert_eq!(rows[0].failures, 0);
    assert_eq!(rows[0].p_log_round, 0.0);
}

#[test]
fn error_categories() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    let usage = run(args(out, &["search", "--w-min", "5", "--w-max", "3"])).unwrap_err();
    assert!(matches!(usage, CliError::Usage(_)), "{usage:?}");
    assert_eq!(usage.exit_code(), 1);

    let unknown = run(args(out, &["circuit", "--code", "[[1,2,3]]", "--rounds", "1"])).unwrap_err();
    assert!(matches!(unknown, CliError::Validation(_)), "{unknown:?}");
    assert_eq!(unknown.exit_code(), 2);

    assert!(matches!(
        run(args(out, &["simulate", "--code", "toric-3"])),
        Err(CliError::Usage(_))
    ));

    let capped = run(args(
        out,
        &["search", "--n-max", "12", "--w-min", "3", "--w-max", "3", "--cap", "4"],
    ))
    .unwrap_err();
    assert!(matches!(capped, CliError::ResourceCap(_)), "{capped:?}");
    assert_eq!(capped.exit_code(), 3);
    assert!(out.join("search_tables.csv").is_file());
}

#[test]
fn fit_needs_three_points() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    let sim = run(args(
        out,
        &[
            "simulate",
            "--code",
            "toric-3",
            "--p",
            "0.004,0.008",
            "--shots",
            "2000",
            "--max-iter",
            "50",
        ],
    ))
    .unwrap();
    let err = run(args(out, &["fit", "--results", &sim.files[0].display().to_string()])).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err:?}");
}

#[test]
fn config_file_overrides_flags() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    let config = out.join("run.json");
    fs::write(
        &config,
        r#"{"seed": 9, "command": {"circuit": {"rounds": 2, "variant": "modular"}}}"#,
    )
    .unwrap();
    let r = run(args(
        out,
        &[
            "--config",
            &config.display().to_string(),
            "circuit",
            "--code",
            "toric-3",
            "--rounds",
            "5",
        ],
    ))
    .unwrap();
    // modular depth (2*2 + 2*2 + 2) * 2 + 2*2 + 1
    assert!(r.summary.contains("modular circuit, 2 rounds, depth 25"), "{}", r.summary);
    let header = fs::read_to_string(&r.files[0]).unwrap();
    assert!(header.contains("\"seed\":9"));
}

#[test]
fn named_code_circuits() {
    let dir = TempDir::new().unwrap();
    let r = run(args(dir.path(), &["circuit", "--code", "[[240,8,8]]", "--rounds", "8"])).unwrap();
    // packed depth (3 + 2 + 2) * 8 + 3 + 1
    assert!(r.summary.ends_with("depth 60"), "{}", r.summary);
    let stim = run(args(
        dir.path(),
        &["circuit", "--code", "240-8-8", "--rounds", "2", "--format", "stim", "--p", "0.001"],
    ))
    .unwrap();
    let text = fs::read_to_string(&stim.files[0]).unwrap();
    // channel arguments are total probabilities
    assert!(text.contains("DEPOLARIZE2(0.001) "));
    assert_eq!(text.lines().filter(|l| l.starts_with("OBSERVABLE_INCLUDE")).count(), 8);
}

#[test]
fn build_families() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    let cases = [
        (vec!["--family", "c2", "--length", "15", "--support", "0,1,4"], "[[450,32,8]]", 6),
        (
            vec!["--family", "cxr", "--length", "28", "--support", "0,2,4,10"],
            "[[336,20,6]]",
            6,
        ),
        (vec!["--family", "cxc", "--length", "5", "--support", "0,1"], "[[50,2,5]]", 4),
    ];
    for (flags, label, omega) in cases {
        let mut a = vec!["build"];
        a.extend(flags);
        let r = run(args(out, &a)).unwrap();
        assert!(r.summary.contains(label), "{}", r.summary);
        assert_eq!(json(&out.join("code.json"))["code"]["omega"], omega);
    }
    let mixed = run(args(
        out,
        &[
            "build",
            "--family",
            "c2",
            "--length",
            "7",
            "--support",
            "0,1,3",
            "--length-b",
            "3",
            "--support-b",
            "0,1",
        ],
    ));
    assert!(matches!(mixed, Err(CliError::Usage(_))));
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_cyclic-hgp");
    let status = |rest: &[&str]| {
        Command::new(bin)
            .args(["--out", dir.path().to_str().unwrap()])
            .args(rest)
            .output()
            .unwrap()
    };

    let ok = status(&["build", "--family", "cxc", "--length", "3", "--support", "0,1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("[[18,2,3]]"));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
    assert_eq!(status(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(status(&["circuit", "--code", "nope", "--rounds", "1"]).status.code(), Some(2));
}
