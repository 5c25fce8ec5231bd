use tailcert_cli::{emit, run_scenario, ExperimentReport, Format, ScenarioConfig};

fn small(scenario: &str, seed: u64) -> ExperimentReport {
    let mut c = ScenarioConfig::minimal(scenario, seed);
    c.replicates = 20_000;
    run_scenario(c).unwrap()
}

#[test]
fn csv_rows_match_probe_counts() {
    let r = small("linf-norm", 3);
    let dir = tempfile::tempdir().unwrap();
    let m = emit(&r, Format::Csv, dir.path()).unwrap();
    assert_eq!(m.files.len(), r.tails.len());
    for (key, rec) in &r.tails {
        let name = format!("{}.csv", key.replace('/', "_"));
        let text = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        assert_eq!(text.lines().count(), rec.tail.probes.len() + 1, "{name}");
        assert!(text.starts_with("n,t,m,k,ucb,bound,slack"));
    }
}

#[test]
fn every_format_carries_the_same_digest() {
    let r = small("psi-tail", 4);
    let dir = tempfile::tempdir().unwrap();
    let digests: Vec<String> = [Format::StructuredText, Format::Csv, Format::PlotData]
        .into_iter()
        .map(|f| emit(&r, f, dir.path()).unwrap().report_digest)
        .collect();
    assert!(digests.windows(2).all(|w| w[0] == w[1]));
    assert!(dir.path().join("manifest-plotdata.json").exists());
}

#[test]
fn json_roundtrip_keeps_digest() {
    let r = small("gaussian-mean", 5);
    let back = ExperimentReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back.content_digest(), r.content_digest());
}

#[test]
fn digest_ignores_worker_count_but_not_seed() {
    let mut a = ScenarioConfig::minimal("sample-mean-a1", 8);
    a.replicates = 20_000;
    a.workers = Some(1);
    let mut b = a.clone();
    b.workers = Some(3);
    let mut c = a.clone();
    c.seed = 9;
    let (ra, rb, rc) = (run_scenario(a).unwrap(), run_scenario(b).unwrap(), run_scenario(c).unwrap());
    assert_eq!(ra.content_digest(), rb.content_digest());
    assert_ne!(ra.content_digest(), rc.content_digest());
}

#[test]
fn fast_scenarios_pass_at_reduced_scale() {
    for s in ["gaussian-mean", "lp-norm", "linf-norm", "psi-tail", "subgaussian-l2", "finite-max", "quadratic-form-sup"] {
        let r = small(s, 6);
        assert!(r.pass(), "{s}:\n{}", r.summary());
    }
}

#[test]
fn unknown_scenario_is_rejected() {
    let err = run_scenario(ScenarioConfig::minimal("nope", 1)).unwrap_err();
    assert!(err.to_string().contains("nope"), "{err}");
}

#[test]
fn oversized_eigen_dimension_is_rejected() {
    let mut c = ScenarioConfig::minimal("covariance-opnorm", 1);
    c.dims = vec![64];
    assert!(run_scenario(c).is_err());
}
