use shearlab::experiment::*;
use shearlab::profile::ProfileSpec;
use shearlab::Error;

fn couette_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Simulate, ProfileSpec::couette());
    c.modes.nu = vec![1e-2];
    c.grid.spacing = 0.01;
    c.time = TimeConfig { t_max: 2.0, samples: 3, dt: 0.01, sample_every: 1.0 };
    c
}

fn field_of(e: Error) -> String {
    match e {
        Error::ConfigInvalid { field, .. } => field,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn bad_fields_are_named_before_solving() {
    let cases: Vec<(&str, Box<dyn Fn(&mut ExperimentConfig)>)> = vec![
        ("time.dt", Box::new(|c| c.time.dt = 0.5)),
        ("time.dt", Box::new(|c| c.time.dt = -1.0)),
        ("time.samples", Box::new(|c| c.time.t_max = 2.005)),
        ("grid.spacing", Box::new(|c| c.grid.spacing = 0.1)),
        ("grid.w_spacing", Box::new(|c| c.grid.w_spacing = 0.1)),
        ("modes.nu", Box::new(|c| c.modes.nu = vec![0.0])),
        ("modes.k", Box::new(|c| c.modes.k = vec![0])),
        ("initial", Box::new(|c| c.initial.center = 10.0)),
        ("kind", Box::new(|c| c.kind = Some(ExperimentKind::LapScan))),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (field, edit) in cases {
        let mut c = couette_config();
        edit(&mut c);
        let out = dir.path().join(field);
        let err = run_experiment(ExperimentKind::Simulate, &c, &out).unwrap_err();
        assert_eq!(field_of(err), field);
        assert!(!out.exists(), "{field}: nothing may be written for an invalid config");
    }
}

#[test]
fn toml_errors_name_the_key() {
    let err = ExperimentConfig::from_toml("[profile]\nkind = \"couette\"\n[grid]\nspacingg = 0.01\n").unwrap_err();
    assert_eq!(field_of(err), "spacingg");
    let err = ExperimentConfig::from_toml("[grid]\nspacing = 0.01\n").unwrap_err();
    assert_eq!(field_of(err), "profile");
}

#[test]
fn config_survives_a_toml_round_trip() {
    let mut c = couette_config();
    c.dsr.spacing = Some(0.01);
    let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = couette_config();
    let a = run_experiment(ExperimentKind::Simulate, &c, &dir.path().join("a")).unwrap();
    c.threads = 1;
    let b = run_experiment(ExperimentKind::Simulate, &c, &dir.path().join("b")).unwrap();
    assert!(a.pass, "{}", emit_report(&a, ReportFormat::TextTable));
    assert!(a.checks.len() >= 6);
    assert_eq!(a.files, b.files);
    for f in &a.files {
        let text = std::fs::read_to_string(dir.path().join("a").join(&f.name)).unwrap();
        assert_eq!(text.len(), f.bytes);
        assert!(text.lines().next().unwrap().starts_with(if f.name.starts_with("series") { "t,v," } else { "t," }));
    }
    let on_disk: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk.files, a.files);
}

#[test]
fn reports_round_trip_and_have_stable_keys() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(ExperimentKind::Simulate, &couette_config(), dir.path()).unwrap();
    let json = emit_report(&m, ReportFormat::Json);
    let back: RunManifest = serde_json::from_str(&json).unwrap();
    assert_eq!(back, m);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["checks", "config", "files", "kind", "pass", "tool", "version", "wall_clock_seconds"]);
    assert_eq!(v["kind"], "simulate");

    let table = emit_report(&m, ReportFormat::TextTable);
    assert_eq!(table.lines().count(), m.checks.len() + 1);
    assert!(table.lines().skip(1).all(|l| l.starts_with("PASS | ") || l.starts_with("FAIL | ")));
    let path = write_report(&m, ReportFormat::TextTable, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap(), table);
}

#[test]
fn empty_manifest_gives_a_header_only_table() {
    let m = RunManifest::empty(ExperimentKind::DsrCheck, couette_config());
    let table = emit_report(&m, ReportFormat::TextTable);
    assert_eq!(table.lines().count(), 1);
    let back: RunManifest = serde_json::from_str(&emit_report(&m, ReportFormat::Json)).unwrap();
    assert!(back.checks.is_empty() && back.pass);
}

#[test]
fn each_kind_has_a_distinct_command() {
    let mut names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.command()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 7);
}

#[test]
fn dsr_and_resolvent_runs_pass_on_couette() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = couette_config();
    c.kind = None;
    c.modes.nu = vec![1e-2, 1e-3];
    c.grid.spacing = 0.005;
    for kind in [ExperimentKind::Resolvent, ExperimentKind::DsrCheck] {
        let m = run_experiment(kind, &c, &dir.path().join(kind.command())).unwrap();
        assert!(m.pass, "{}", emit_report(&m, ReportFormat::TextTable));
        assert!(!m.files.is_empty());
    }
    c.dsr.max_dimension = 10;
    assert_eq!(field_of(run_experiment(ExperimentKind::DsrCheck, &c, dir.path()).unwrap_err()), "dsr.max_dimension");
}
