use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_medleak");

fn medleak(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("MEDLEAK_DICT_DIR")
        .output()
        .unwrap()
}

fn fixture(dir: &Path, scenario: &str) -> (String, String) {
    let pcap = dir.join(format!("{scenario}.pcap"));
    let reg = dir.join(format!("{scenario}.toml"));
    let out = medleak(&[
        "gen-fixture",
        scenario,
        "--out",
        pcap.to_str().unwrap(),
        "--registry-out",
        reg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (pcap.to_str().unwrap().into(), reg.to_str().unwrap().into())
}

#[test]
fn exit_codes_per_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for (scenario, code) in [("bp-monitor-leaky", 2), ("scale-encrypted", 0), ("mixed-home", 2)] {
        let (pcap, reg) = fixture(dir.path(), scenario);
        let out = medleak(&["analyze", "--capture", &pcap, "--registry", &reg, "--format", "json"]);
        assert_eq!(
            out.status.code(),
            Some(code),
            "{scenario}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["schema"], 1);
    }
}

#[test]
fn warn_only_exit_code() {
    // With an empty medical list nothing is high, so only warnings remain.
    let dir = tempfile::tempdir().unwrap();
    let (pcap, reg) = fixture(dir.path(), "bp-monitor-leaky");
    let dicts = dir.path().join("dicts");
    std::fs::create_dir(&dicts).unwrap();
    std::fs::write(dicts.join("medical-terms.txt"), "# placeholder\nzzzz-not-a-term\n").unwrap();
    let out = medleak(&[
        "analyze",
        "--capture",
        &pcap,
        "--registry",
        &reg,
        "--dict-dir",
        dicts.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));

    let env = Command::new(BIN)
        .args(["analyze", "--capture", &pcap, "--registry", &reg])
        .env("MEDLEAK_DICT_DIR", &dicts)
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(1));
}

#[test]
fn operational_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let (pcap, reg) = fixture(dir.path(), "scale-encrypted");
    let missing = dir.path().join("nope.pcap");
    let out = medleak(&["analyze", "--capture", missing.to_str().unwrap(), "--registry", &reg]);
    assert_eq!(out.status.code(), Some(3));

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nobody\n").unwrap();
    let out = medleak(&["analyze", "--capture", &pcap, "--registry", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[thresholds]\nentropy = \"high\"\n").unwrap();
    let out = medleak(&[
        "analyze",
        "--capture",
        &pcap,
        "--registry",
        &reg,
        "--config",
        bad_cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let junk = dir.path().join("junk.pcap");
    std::fs::write(&junk, b"not a capture at all").unwrap();
    let out = medleak(&["analyze", "--capture", junk.to_str().unwrap(), "--registry", &reg]);
    assert_eq!(out.status.code(), Some(3));

    let out = medleak(&[
        "analyze",
        "--capture",
        &pcap,
        "--registry",
        &reg,
        "--gap-threshold",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn text_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let (pcap, reg) = fixture(dir.path(), "bp-monitor-leaky");
    let out = medleak(&["analyze", "--capture", &pcap, "--registry", &reg, "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("bp-monitor") && l.contains("LEAK")));

    let report = dir.path().join("report.json");
    let out = medleak(&[
        "analyze",
        "--capture",
        &pcap,
        "--registry",
        &reg,
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("{\"schema\":1,"));
}

#[test]
fn corpus_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cdir = dir.path().join("corpus");
    let out = medleak(&[
        "gen-corpus",
        "--seed",
        "7",
        "--out",
        cdir.to_str().unwrap(),
        "--n-cleartext",
        "200",
        "--n-encrypted",
        "200",
    ]);
    assert!(out.status.success());
    let first = std::fs::read(cdir.join("corpus.jsonl")).unwrap();
    medleak(&[
        "gen-corpus",
        "--seed",
        "7",
        "--out",
        cdir.to_str().unwrap(),
        "--n-cleartext",
        "200",
        "--n-encrypted",
        "200",
    ]);
    assert_eq!(std::fs::read(cdir.join("corpus.jsonl")).unwrap(), first);

    let out = medleak(&["compare", "--corpus", cdir.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["items"], 400);
    assert_eq!(r["ascii"]["precision"], 1.0);

    let (pcap, reg) = fixture(dir.path(), "scale-encrypted");
    let out = medleak(&[
        "analyze",
        "--capture",
        &pcap,
        "--registry",
        &reg,
        "--corpus",
        cdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["method_report"]["items"], 400);
}

#[test]
fn unknown_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = medleak(&[
        "gen-fixture",
        "fridge",
        "--out",
        dir.path().join("x.pcap").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}
