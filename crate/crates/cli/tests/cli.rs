use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coxperc"))
}

#[test]
fn presets_lists_bundles() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.contains("vacant_homogeneous"));
    assert!(text.contains("determinism"));
}

#[test]
fn run_writes_outputs_and_seed_override_changes_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "smoke"
kind = "vacant_probability"
seed = 7
replicates = 200

[window]
dim = 2
half_width = 4.0

[environment]
kind = "homogeneous"

[radius]
kind = "constant"
r = 1.0

[params]
lambda = 0.3
"#,
    )
    .unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    for (out, seed) in [(&out_a, None), (&out_b, None), (&out_c, Some("9"))] {
        let mut cmd = bin();
        cmd.arg("run").arg(&config).arg("--out").arg(out);
        if let Some(s) = seed {
            cmd.arg("--seed").arg(s);
        }
        let r = cmd.output().unwrap();
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let csv_a = std::fs::read(out_a.join("smoke.csv")).unwrap();
    let csv_b = std::fs::read(out_b.join("smoke.csv")).unwrap();
    let csv_c = std::fs::read(out_c.join("smoke.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "same seed must be byte-identical");
    assert_ne!(csv_a, csv_c, "--seed must override the config seed");
    assert!(out_a.join("smoke.json").exists());
    assert!(out_a.join("smoke.manifest.json").exists());
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "kind = \"vacant_probability\"\nseed = 1\nreplicates = 10\nbogus = 1\n")
        .unwrap();
    let out = bin().arg("run").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_lambda_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("nolambda.toml");
    std::fs::write(
        &config,
        "kind = \"vacant_probability\"\nseed = 1\nreplicates = 10\n[environment]\nkind = \"homogeneous\"\n[radius]\nkind = \"constant\"\nr = 1.0\n",
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_2() {
    let out = bin().arg("run").arg("no_such_preset").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_thread_run_matches_default() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "name = \"t\"\nkind = \"volume_oracle\"\nseed = 3\nreplicates = 1\n",
    )
    .unwrap();
    let out_a = dir.path().join("par");
    let out_b = dir.path().join("ser");
    for (out, threads) in [(&out_a, None), (&out_b, Some("1"))] {
        let mut cmd = bin();
        cmd.arg("run").arg(&config).arg("--out").arg(out);
        if let Some(t) = threads {
            cmd.arg("--threads").arg(t);
        }
        let r = cmd.output().unwrap();
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(
        std::fs::read(out_a.join("t.csv")).unwrap(),
        std::fs::read(out_b.join("t.csv")).unwrap()
    );
}
