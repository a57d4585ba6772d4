//! Every fixture against its header expectations and its golden trace.
//!
//! Set `LOGRES_BLESS=1` to rewrite the golden traces instead of comparing.

use std::path::PathBuf;

use logres::corpus::{corpus, ExpectedStatus};
use logres::principalize::{DriverOptions, Edge, Run, RunStatus};
use logres::trace::Trace;

fn run(name: &str) -> Run {
    let f = logres::corpus::fixture(name).unwrap();
    f.problem()
        .unwrap()
        .solve(&DriverOptions::default())
        .unwrap()
}

#[test]
fn fixtures_meet_expectations() {
    for f in corpus() {
        let p = f.problem().unwrap();
        let r = p.solve(&DriverOptions::default()).unwrap();
        match (&f.status, &r.status) {
            (ExpectedStatus::Resolved, RunStatus::Resolved) => {}
            (
                ExpectedStatus::Fail,
                RunStatus::Fail {
                    obstruction, stack, ..
                },
            ) => {
                if let Some(o) = &f.obstruction {
                    let got: Vec<String> =
                        obstruction.gens().iter().map(|g| g.to_string()).collect();
                    assert_eq!(&got.join(", "), o, "{}", f.name);
                }
                if let Some(s) = &f.stack {
                    let got: Vec<String> = stack.iter().map(|g| g.to_string()).collect();
                    assert_eq!(&got.join(", "), s, "{}", f.name);
                }
            }
            (want, got) => panic!("{}: expected {want:?}, got {got:?}", f.name),
        }
        if let Some(cs) = &f.centers {
            let got: Vec<String> = r.root.centers().iter().map(|c| c.to_string()).collect();
            assert_eq!(&got, cs, "{}", f.name);
        }
    }
}

#[test]
fn golden_traces() {
    let bless = std::env::var("LOGRES_BLESS").is_ok_and(|v| v == "1");
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut stale = Vec::new();
    for f in corpus() {
        let r = f
            .problem()
            .unwrap()
            .solve(&DriverOptions::default())
            .unwrap();
        let json = Trace::from_run(&r).to_json();
        let path = root.join(f.golden_path());
        if bless {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &json).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(json.as_str()) {
            stale.push(f.name);
        }
    }
    assert!(
        stale.is_empty(),
        "traces differ from golden files (rerun with LOGRES_BLESS=1 after review): {stale:?}"
    );
}

#[test]
fn coverage() {
    let runs: Vec<(&str, Run)> = corpus().iter().map(|f| (f.name, run(f.name))).collect();
    let nodes = || runs.iter().flat_map(|(_, r)| r.root.walk());
    assert!(
        runs.iter()
            .any(|(_, r)| matches!(r.status, RunStatus::Fail { .. })),
        "fail path"
    );
    assert!(
        nodes().any(|n| matches!(
            n.action,
            logres::principalize::NodeAction::Blowup {
                whole_chart: true,
                ..
            }
        )),
        "whole-chart center"
    );
    assert!(
        nodes().any(|n| matches!(n.edge, Some(Edge::Localize { .. }))),
        "localization cover"
    );
    assert!(
        runs.iter()
            .any(|(_, r)| r.root.centers().iter().any(|c| c.d >= 2)),
        "Kummer center with d >= 2"
    );
    let selector = |prefix: char| {
        nodes().any(|n| matches!(&n.edge, Some(Edge::Blowup { selector, inertia, .. }) if selector.to_string().starts_with(prefix) && inertia.0 >= 1))
    };
    assert!(selector('t') && selector('m'), "both chart types");
    let multi = runs
        .iter()
        .filter(|(_, r)| r.root.walk().iter().any(|n| n.contact_options >= 2))
        .count();
    assert!(multi >= 3, "{multi} fixtures with several maximal contacts");
}
