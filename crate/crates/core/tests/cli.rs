use std::path::Path;
use std::process::{Command, Output};

const ZENER: &str = r#"
[model]
kind = "zener"
j0 = 1.0
j1 = 1.0
tau = 1.0
rho = 1.0

[grid.t]
min = 1.05
max = 3.0
count = 8

[output]
prefix = "z"
"#;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viscofront"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

#[test]
fn greens_output_is_deterministic() {
    let dir = setup(ZENER);
    for out in ["a", "b"] {
        let o = cli(
            dir.path(),
            &[
                "greens",
                "--config",
                "run.toml",
                "--out",
                out,
                "--threads",
                "2",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a/z_greens.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/z_greens.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# model=zener"));
    assert!(lines.all(|l| !l.starts_with('#') && l.split(',').count() == 5));
}

#[test]
fn echoed_config_reparses() {
    let dir = setup(ZENER);
    let o = cli(
        dir.path(),
        &["curves", "--config", "run.toml", "--out", "o"],
    );
    assert!(o.status.success());
    let echo = dir.path().join("o/z_config.toml");
    let original = viscofront::config::RunConfig::parse(ZENER, "run.toml").unwrap();
    let mut reparsed = viscofront::config::RunConfig::load(&echo).unwrap();
    assert_eq!(
        reparsed.task.kind.take(),
        Some(viscofront::config::TaskKind::Curves)
    );
    reparsed.output.dir = original.output.dir.clone();
    assert_eq!(reparsed, original);
}

#[test]
fn wavefront_report_for_zener() {
    let dir = setup(ZENER);
    let o = cli(
        dir.path(),
        &["wavefront", "--config", "run.toml", "--out", "o"],
    );
    assert!(o.status.success());
    let report = std::fs::read_to_string(dir.path().join("o/z_wavefront.txt")).unwrap();
    assert!(report.contains("g0: 5.0000000000e-1"), "{report}");
    assert!(report.contains("jump(r = 1): 3.03265"), "{report}");
}

#[test]
fn curves_for_elastic_have_zero_attenuation() {
    let dir = setup("[model]\nkind = \"elastic\"\nj0 = 1.0\nrho = 1.0\n[output]\nprefix = \"e\"\n");
    let o = cli(
        dir.path(),
        &[
            "curves", "--config", "run.toml", "--out", "o", "--format", "csv",
        ],
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("o/e_curves.csv")).unwrap();
    for line in text.lines().skip(1) {
        let a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(a, 0.0);
    }
}

#[test]
fn json_format_parses() {
    let dir = setup(&ZENER.replace("[grid.t]\nmin = 1.05\nmax = 3.0\ncount = 8\n", ""));
    let o = cli(
        dir.path(),
        &[
            "duality", "--config", "run.toml", "--out", "o", "--format", "json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("o/z_duality.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["values"][0].as_f64(), Some(1.0));
}

#[test]
fn exit_codes() {
    let dir = setup(ZENER);
    let code = |args: &[&str]| cli(dir.path(), args).status.code();
    assert_eq!(code(&["greens", "--config", "missing.toml"]), Some(2));
    assert_eq!(code(&["greens"]), Some(2));
    std::fs::write(
        dir.path().join("bad.toml"),
        "[model]\nkind = \"zener\"\nj0 = -1.0\nj1 = 1.0\ntau = 1.0\nrho = 1.0\n",
    )
    .unwrap();
    let o = cli(dir.path(), &["greens", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model"));
    std::fs::write(
        dir.path().join("typo.toml"),
        "[model]\nkind = \"zener\"\nj0 = 1.0\nj1 = 1.0\ntau = 1.0\nrhoo = 1.0\n",
    )
    .unwrap();
    assert_eq!(code(&["greens", "--config", "typo.toml"]), Some(2));
    // duality on a direct-g model cannot run
    std::fs::write(
        dir.path().join("direct.toml"),
        "[model]\nkind = \"powerlaw_g\"\nc0 = 1.0\na = 1.0\nalpha = 0.5\nrho = 1.0\n",
    )
    .unwrap();
    assert_eq!(
        code(&["duality", "--config", "direct.toml", "--out", "o"]),
        Some(2)
    );
    assert_eq!(
        code(&["verify", "--config", "run.toml", "--out", "o"]),
        Some(0)
    );
    assert_eq!(
        code(&["verify", "--config", "run.toml", "--out", "o", "--tol", "1e-14"]),
        Some(4)
    );
}

#[test]
fn duality_rejects_grids_not_starting_at_zero() {
    let dir = setup(ZENER);
    assert_eq!(
        cli(
            dir.path(),
            &["duality", "--config", "run.toml", "--out", "o"]
        )
        .status
        .code(),
        Some(2)
    );
}
