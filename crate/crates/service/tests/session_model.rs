use benchvis_service::{RunKind, Session};
use proptest::prelude::*;
use proptest::sample::Index;

const SYSBENCH: &str = "[ 1s ] thds: 1 tps: 1.00 qps: 2.00 (r/w/o: 1.00/1.00/0.00) lat (ms,95%): 3.00 err/s: 0.00 reconn/s: 0.00\n";
const TPCH: &str = "-- Query 1\nTime: 1.5 ms\n";
const NAMES: &[&str] = &["pg", "mysql", "mariadb", "run.log", " pg ", ""];

#[derive(Debug, Clone)]
enum Op {
    Upload { kind: RunKind, name: &'static str, valid: bool },
    Rename { target: Option<Index>, name: &'static str },
    Delete { target: Option<Index> },
}

fn op() -> impl Strategy<Value = Op> {
    let kind = prop::sample::select(vec![RunKind::Sysbench, RunKind::Tpch]);
    let name = prop::sample::select(NAMES);
    prop_oneof![
        3 => (kind, name.clone(), prop::bool::weighted(0.85))
            .prop_map(|(kind, name, valid)| Op::Upload { kind, name, valid }),
        2 => (prop::option::weighted(0.9, any::<Index>()), name)
            .prop_map(|(target, name)| Op::Rename { target, name }),
        1 => prop::option::weighted(0.9, any::<Index>()).prop_map(|target| Op::Delete { target }),
    ]
}

/// Reference registry: `(id, name, kind)` in upload order.
#[derive(Default)]
struct Model {
    runs: Vec<(String, String, RunKind)>,
}

impl Model {
    fn name_free(&self, kind: RunKind, name: &str, except: Option<&str>) -> bool {
        !self
            .runs
            .iter()
            .any(|(id, n, k)| *k == kind && n == name && Some(id.as_str()) != except)
    }

    fn pick(&self, target: &Option<Index>) -> String {
        match target {
            Some(ix) if !self.runs.is_empty() => self.runs[ix.index(self.runs.len())].0.clone(),
            _ => "no-such-id".to_string(),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn list_runs_matches_reference(ops in prop::collection::vec(op(), 1..40)) {
        let session = Session::new();
        let mut model = Model::default();
        for op in ops {
            match op {
                Op::Upload { kind, name, valid } => {
                    let body = match (valid, kind) {
                        (false, _) => "garbage\n",
                        (true, RunKind::Sysbench) => SYSBENCH,
                        (true, RunKind::Tpch) => TPCH,
                    };
                    let got = session.upload_run(kind, name, Some("run.log"), body.as_bytes());
                    let effective = if name.trim().is_empty() { "run.log" } else { name.trim() };
                    let expected = if !valid {
                        Err("ParserError")
                    } else if !model.name_free(kind, effective, None) {
                        Err("NameTaken")
                    } else {
                        Ok(())
                    };
                    match (&got, expected) {
                        (Ok(summary), Ok(())) => {
                            prop_assert_eq!(&summary.name, effective);
                            model.runs.push((summary.id.clone(), effective.to_string(), kind));
                        }
                        (Err(e), Err(code)) => prop_assert_eq!(e.code(), code),
                        _ => prop_assert!(false, "upload {:?} vs {:?}", got, expected),
                    }
                }
                Op::Rename { target, name } => {
                    let id = model.pick(&target);
                    let got = session.rename_run(&id, name).map(|s| s.name);
                    let pos = model.runs.iter().position(|r| r.0 == id);
                    let expected = match pos {
                        _ if name.trim().is_empty() => Err("ValidationError"),
                        None => Err("UnknownRun"),
                        Some(i) if !model.name_free(model.runs[i].2, name.trim(), Some(&id)) => Err("NameTaken"),
                        Some(i) => {
                            model.runs[i].1 = name.trim().to_string();
                            Ok(name.trim().to_string())
                        }
                    };
                    prop_assert_eq!(got.map_err(|e| e.code()), expected);
                }
                Op::Delete { target } => {
                    let id = model.pick(&target);
                    let got = session.delete_run(&id);
                    match model.runs.iter().position(|r| r.0 == id) {
                        Some(i) => {
                            prop_assert!(got.is_ok());
                            model.runs.remove(i);
                        }
                        None => prop_assert_eq!(got.unwrap_err().code(), "UnknownRun"),
                    }
                }
            }
            let listed: Vec<(String, String, RunKind)> = session
                .list_runs()
                .into_iter()
                .map(|r| (r.id, r.name, r.kind))
                .collect();
            prop_assert_eq!(&listed, &model.runs);
        }
    }
}

#[test]
fn concurrent_uploads_keep_names_unique() {
    let session = std::sync::Arc::new(Session::new());
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let session = session.clone();
            std::thread::spawn(move || {
                session
                    .upload_run(RunKind::Tpch, &format!("run-{}", i % 4), None, TPCH.as_bytes())
                    .is_ok()
            })
        })
        .collect();
    let ok = handles.into_iter().map(|h| h.join().unwrap()).filter(|&ok| ok).count();
    assert_eq!(ok, 4);
    assert_eq!(session.list_runs().len(), 4);
}
