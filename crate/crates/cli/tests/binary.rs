use std::process::Command;

fn tailcert() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailcert"))
}

#[test]
fn run_writes_all_formats_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"finite-max","seed":2,"replicates":5000}"#).unwrap();
    let out = dir.path().join("out");
    let st = tailcert().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["report.json", "plot.tsv", "manifest-csv.json", "manifest-structured-text.json", "manifest-plotdata.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let again = dir.path().join("again");
    let st = tailcert()
        .args(["emit", "--format", "csv", "--out"])
        .arg(&again)
        .arg(out.join("report.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let a = std::fs::read_to_string(out.join("manifest-csv.json")).unwrap();
    let b = std::fs::read_to_string(again.join("manifest-csv.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"no-such","seed":1}"#).unwrap();
    let st = tailcert().arg("run").arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn net_verb_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.txt");
    let st = tailcert()
        .args(["net", "--space", "sphere:3", "--eps", "0.5", "--strategy", "shell", "--probes", "2000", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(std::fs::read_to_string(out).unwrap().lines().count() > 10);
}
