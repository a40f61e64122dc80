//! End-to-end checks of the binary: exit codes, report determinism, file
//! formats, and the h-set resolution rules.

use std::path::{Path, PathBuf};
use std::process::Command;

fn example_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example_disc.cfg")
}

fn run_lamlab(args: &[&str], cache: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lamlab"))
        .args(args)
        .env("LAMLAB_CACHE", cache)
        .output()
        .expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    (code, String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn traintrack_report_passes_on_example_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout) = run_lamlab(
        &[
            "traintrack-report",
            "--config",
            example_config().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 0, "stdout:\n{stdout}");
    assert!(stdout.contains("psi.train_track"));
    assert!(out.join("traintrack-report.report.json").exists());
    assert!(out.join("pf_phi.json").exists());
    assert!(out.join("pf_psi_pow2.json").exists());
}

#[test]
fn rejected_maps_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    // a ↦ ab, b ↦ b a^-1 crosses an illegal turn: not a train track map
    std::fs::write(
        &cfg,
        "rank = 2\n[auto bad]\na -> 1 2\nb -> 2 -1\n[params]\nmaps = bad\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, stdout) = run_lamlab(
        &[
            "traintrack-report",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 1, "stdout:\n{stdout}");
    assert!(stdout.contains("FAIL"));
    assert!(stdout.contains("illegal turn"));
}

#[test]
fn identity_map_is_rejected_as_nonexpanding() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("id.cfg");
    std::fs::write(
        &cfg,
        "rank = 2\n[auto id]\na -> 1\nb -> 2\n[params]\nmaps = id\n",
    )
    .unwrap();
    let (code, stdout) = run_lamlab(
        &[
            "traintrack-report",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 1);
    assert!(stdout.contains("not expanding"));
}

#[test]
fn mixed_ray_yields_inconclusive_exit() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example_config()).unwrap();
    let cfg = dir.path().join("mixed.cfg");
    std::fs::write(&cfg, text.replace("ray = phi_ray", "ray = mixed_ray")).unwrap();
    let out = dir.path().join("out");
    let (code, stdout) = run_lamlab(
        &[
            "laminations-agree",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--depth",
            "3",
            "--horizon",
            "8",
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 2, "stdout:\n{stdout}");
    assert!(stdout.contains("INCONCLUSIVE"));
    // segments are still emitted
    assert!(out.join("mitra_k3.lamlang").exists());
}

#[test]
fn reports_are_deterministic_and_cache_hits() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args_for = |out: &Path| {
        vec![
            "laminations-agree".to_string(),
            "--config".into(),
            example_config().to_str().unwrap().into(),
            "--out".into(),
            out.to_str().unwrap().into(),
            "--depth".into(),
            "3".into(),
            "--horizon".into(),
            "9".into(),
        ]
    };
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let args: Vec<String> = args_for(out);
        let argrefs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let (code, stdout) = run_lamlab(&argrefs, &cache);
        assert_eq!(code, 0, "stdout:\n{stdout}");
    }
    let a: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out1.join("laminations-agree.report.json")).unwrap(),
    )
    .unwrap();
    let b: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out2.join("laminations-agree.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(a["body"], b["body"]);
    assert_eq!(a["meta"]["body_sha256"], b["meta"]["body_sha256"]);
    // second run was served from the shared cache
    assert!(b["meta"]["cache_hits"].as_u64().unwrap() > 0);
    // segment files byte-identical
    let fa = std::fs::read(out1.join("mitra_k3.lamlang")).unwrap();
    let fb = std::fs::read(out2.join("mitra_k3.lamlang")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn flaring_check_command() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.txt");
    std::fs::write(&table, "0 a 1\n1 a 3\n2 a 10\n3 a 33\n").unwrap();
    let (code, stdout) = run_lamlab(
        &[
            "flaring-check",
            "--table",
            table.to_str().unwrap(),
            "--lambda",
            "2",
            "--n0",
            "1",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 0, "stdout:\n{stdout}");

    std::fs::write(&table, "0 a 5\n1 a 5\n2 a 5\n").unwrap();
    let (code, _) = run_lamlab(
        &[
            "flaring-check",
            "--table",
            table.to_str().unwrap(),
            "--lambda",
            "2",
            "--n0",
            "1",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &dir.path().join("cache"),
    );
    assert_eq!(code, 1);
}

#[test]
fn h_set_resolution_inserts_spacers() {
    let text = std::fs::read_to_string(example_config()).unwrap();
    let config = lamlab_core::config::Config::parse(&text).unwrap();
    let map = config.rose_map("phi").unwrap();
    let basis = lamlab_cli::commands::resolve_h_set(&config, &map, "basis").unwrap();
    assert_eq!(basis.len(), 3);
    let pairs = lamlab_cli::commands::resolve_h_set(&config, &map, "basis_pairs").unwrap();
    // 3 basis letters + one carrier word per pair of the 5 fixed directions
    assert_eq!(pairs.len(), 3 + 10);
    // the {a, c} pair word needs a spacer: a^-1 c alone dies under the
    // relation f(c) = c f(a), so the cyclically legal carrier is a^-1 c b
    assert!(pairs.contains(&lamlab_core::Word::parse("-1 3 2").unwrap()));
    assert!(!pairs.contains(&lamlab_core::Word::parse("-1 3").unwrap()));
}
