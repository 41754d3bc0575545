use std::process::Command;

fn ond() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ond"))
}

#[test]
fn csv_to_stdout() {
    let out = ond()
        .args(["--k", "2", "--n", "8", "--snr-db", "0,10", "--trials", "20", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("experiment,k_pairs,n_relays"));
}

#[test]
fn same_seed_same_bytes_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let status = ond()
            .args([
                "--kind", "scheme-comparison", "--k", "2", "--n", "10,20", "--snr-db", "0:30:10",
                "--trials", "50", "--seed", "9", "--threads", threads, "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("3", "b.csv"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "kind = \"til-vs-n\"\nk_pairs = 2\nn_list = [8, 16, 32]\ntrials = 10\n",
    )
    .unwrap();
    let out = ond()
        .arg("--config")
        .arg(&cfg)
        .args(["--trials", "5", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ond_core::harness::parse_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|r| r.trials == 5));
    assert_eq!(report.spec.trials, 5);
}

#[test]
fn exit_codes_by_category() {
    let out = ond().args(["--k", "2", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_list"));

    let out = ond()
        .args(["--k", "2", "--n", "1000000", "--memory-cap-mb", "1", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = ond()
        .args(["--k", "2", "--n", "8", "--trials", "2", "--out", "/nonexistent-dir/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
