//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every check builds its expectation independently of the code under test
//! (hand-computed values, brute-force oracles or a reference model). Random
//! inputs come from fixed seeds so failures reproduce.

use std::collections::HashMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use benchvis_core::analytics::{full_average, window_average};
use benchvis_core::normalize::{
    metric_percentages, normalize, render_terminology, to_hierarchy_json_pretty, MetricKindPlan,
    PlanNode, Terminology,
};
use benchvis_core::plan::{detect_dialect, parse_plan, Dialect};
use benchvis_core::sysbench::{parse_sysbench, MetricSample, SysbenchRun};
use benchvis_core::tpch::parse_tpch;
use benchvis_core::Error;
use benchvis_service::http::{router, serve};
use benchvis_service::{RunKind, Session};
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{RngExt, SeedableRng};
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn golden_captures() -> Vec<(String, String, String)> {
    let mut out: Vec<_> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "explain"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            let capture = fs::read_to_string(&p).unwrap();
            let expected = fs::read_to_string(p.with_extension("expected.json")).unwrap();
            (stem, capture, expected)
        })
        .collect();
    out.sort();
    out
}

fn pipeline(capture: &str) -> Result<PlanNode, Error> {
    let dialect = detect_dialect(capture)?;
    Ok(normalize(&parse_plan(capture, dialect)?, dialect))
}

fn two_dp(rng: &mut StdRng, max: u32) -> f64 {
    rng.random_range(0..max * 100) as f64 / 100.0
}

// Random plan documents. Each generator also returns the node count the
// normalized tree must have, derived from what it emitted.

const PG_OPS: &[&str] = &[
    "Seq Scan", "Index Scan", "Index Only Scan", "Bitmap Heap Scan", "Sort", "Aggregate",
    "HashAggregate", "Nested Loop", "Hash Join", "Merge Join", "Hash", "Materialize", "Limit",
    "Unique", "Gather", "Subquery Scan", "Result", "Append",
];

fn postgres_node(rng: &mut StdRng, depth: u32) -> (Value, f64, usize) {
    let arity = if depth == 0 { 0 } else { rng.random_range(0..=3usize) };
    let mut total = two_dp(rng, 1000);
    let mut count = 1;
    let mut plans = Vec::new();
    for _ in 0..arity {
        let (child, cost, n) = postgres_node(rng, depth - 1);
        total += cost;
        count += n;
        plans.push(child);
    }
    let mut node = json!({
        "Node Type": *PG_OPS.choose(rng).unwrap(),
        "Startup Cost": 0.0,
        "Total Cost": total,
        "Plan Rows": rng.random_range(0..100_000u32),
        "Plan Width": 8,
    });
    if arity == 0 {
        node["Relation Name"] = json!(format!("rel{}", rng.random_range(0..9u8)));
    } else {
        node["Plans"] = Value::Array(plans);
    }
    (node, total, count)
}

/// A cumulative-cost PostgreSQL plan: every `Total Cost` is the node's own
/// cost plus its children's totals.
fn random_postgres(rng: &mut StdRng) -> (String, f64, usize) {
    let depth = rng.random_range(0..6);
    let (root, total, count) = postgres_node(rng, depth);
    (serde_json::to_string_pretty(&json!([{ "Plan": root }])).unwrap(), total, count)
}

fn random_mysql_family(rng: &mut StdRng, dialect: Dialect) -> (String, usize) {
    let wrapper_pool: &[&str] = match dialect {
        Dialect::MySql => &["ordering_operation", "grouping_operation", "duplicates_removal"],
        _ => &["filesort", "temporary_table", "read_sorted_file", "duplicates_removal"],
    };
    let tables = rng.random_range(1..=8usize);
    let wrappers: Vec<&str> = (0..rng.random_range(0..=3))
        .map(|_| *wrapper_pool.choose(rng).unwrap())
        .collect();
    let access = ["ALL", "ref", "eq_ref", "range", "index"];
    let table = |rng: &mut StdRng, i: usize| {
        let mut t = json!({"table_name": format!("t{i}"), "access_type": *access.choose(rng).unwrap()});
        if dialect == Dialect::MySql {
            t["rows_examined_per_scan"] = json!(rng.random_range(1..10_000u32));
            t["cost_info"] = json!({"read_cost": format!("{:.2}", two_dp(rng, 500)), "eval_cost": "1.00"});
        } else {
            t["rows"] = json!(rng.random_range(1..10_000u32));
            if rng.random_bool(0.5) {
                t["cost"] = json!(two_dp(rng, 50));
            }
        }
        t
    };
    let mut body = serde_json::Map::new();
    if tables == 1 {
        body.insert("table".into(), table(rng, 0));
    } else {
        let members = (0..tables).map(|i| json!({ "table": table(rng, i) })).collect();
        body.insert("nested_loop".into(), Value::Array(members));
    }
    let mut inner = body;
    for w in wrappers.iter().rev() {
        let mut wrapped = serde_json::Map::new();
        wrapped.insert("using_filesort".into(), json!(rng.random_bool(0.5)));
        wrapped.append(&mut inner);
        inner = serde_json::Map::new();
        inner.insert((*w).to_string(), Value::Object(wrapped));
    }
    inner.insert("select_id".into(), json!(1));
    if dialect == Dialect::MySql {
        inner.insert("cost_info".into(), json!({"query_cost": "1000.00"}));
    }
    let text = serde_json::to_string_pretty(&json!({ "query_block": inner })).unwrap();
    (text, tables + wrappers.len() + (tables - 1))
}

fn random_plan(rng: &mut StdRng) -> (String, usize) {
    match rng.random_range(0..3) {
        0 => {
            let (text, _, count) = random_postgres(rng);
            (text, count)
        }
        1 => random_mysql_family(rng, Dialect::MySql),
        _ => random_mysql_family(rng, Dialect::MariaDb),
    }
}

fn well_formed(tree: &PlanNode, expected_nodes: usize) -> Result<(), String> {
    let visited = tree.walk();
    ensure!(visited.len() == tree.node_count(), "walk saw {} of {} nodes", visited.len(), tree.node_count());
    ensure!(visited.len() == expected_nodes, "{} nodes, expected {}", visited.len(), expected_nodes);
    let mut addresses: Vec<*const PlanNode> = visited.iter().map(|n| *n as *const _).collect();
    addresses.sort();
    addresses.dedup();
    ensure!(addresses.len() == visited.len(), "a node is reachable twice");
    Ok(())
}

fn golden_corpus() -> Outcome {
    let captures = golden_captures();
    for dialect in Dialect::ALL {
        let n = captures.iter().filter(|(s, _, _)| s.starts_with(dialect.as_str())).count();
        ensure!(n >= 3, "only {n} {dialect} captures");
    }
    let start = Instant::now();
    for (stem, capture, expected) in &captures {
        let tree = pipeline(capture).map_err(|e| format!("{stem}: {e}"))?;
        ensure!(to_hierarchy_json_pretty(&tree) == expected.trim_end(), "{stem}: output differs from expected hierarchy");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    Ok(format!("{} captures byte-exact in {:.1} ms", captures.len(), elapsed.as_secs_f64() * 1e3))
}

fn tree_well_formedness() -> Outcome {
    // Hand counts for the corpus: plan nodes for PostgreSQL; tables +
    // wrappers + (k - 1) joins for the single-block MySQL/MariaDB captures.
    let corpus_counts: HashMap<&str, usize> = HashMap::from([
        ("postgres_q1_json", 3),
        ("postgres_q1_text", 3),
        ("postgres_q3_hash_join", 5),
        ("mysql_single_table", 1),
        ("mysql_q1", 1 + 2),
        ("mysql_q3_nested_loop", 3 + 1 + 2),
        ("mariadb_q1", 1 + 2),
        ("mariadb_repeated_tables", 2 + 1),
        ("mariadb_block_nl_join", 2 + 2 + 1),
    ]);
    let captures = golden_captures();
    for (stem, capture, _) in &captures {
        let expected = *corpus_counts.get(stem.as_str()).ok_or(format!("no hand count for {stem}"))?;
        let tree = pipeline(capture).map_err(|e| format!("{stem}: {e}"))?;
        well_formed(&tree, expected).map_err(|e| format!("{stem}: {e}"))?;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    for i in 0..200 {
        let (text, expected) = random_plan(&mut rng);
        let tree = pipeline(&text).map_err(|e| format!("random plan {i}: {e}"))?;
        well_formed(&tree, expected).map_err(|e| format!("random plan {i}: {e}"))?;
    }
    Ok(format!("{} corpus captures + 200 random plans", captures.len()))
}

fn percentage_conservation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut trees: Vec<PlanNode> = golden_captures().iter().map(|(_, c, _)| pipeline(c).unwrap()).collect();
    for _ in 0..1000 {
        trees.push(pipeline(&random_plan(&mut rng).0).unwrap());
    }
    for tree in &trees {
        for metric in [MetricKindPlan::Cost, MetricKindPlan::Rows] {
            let bearing = tree.walk().iter().any(|n| match metric {
                MetricKindPlan::Cost => n.self_cost.is_some(),
                MetricKindPlan::Rows => n.rows.is_some(),
            });
            if !bearing {
                continue;
            }
            let shares = metric_percentages(tree, metric).map_err(|e| e.to_string())?;
            let sum: f64 = shares.iter().map(|s| s.pct).sum();
            worst = worst.max((sum - 100.0).abs());
            ensure!((sum - 100.0).abs() <= 1e-9, "sum {sum}");
            ensure!(shares.iter().all(|s| (0.0..=100.0).contains(&s.pct)), "term outside [0,100]: {shares:?}");
            checked += 1;
        }
    }
    Ok(format!("{checked} breakdowns, max |sum - 100| = {worst:.1e}"))
}

fn windowed_mean_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let mut windows = 0;
    for run_no in 0..1000 {
        let n = rng.random_range(1..=600usize);
        let mut t = 0u64;
        let samples: Vec<MetricSample> = (0..n)
            .map(|_| {
                t += rng.random_range(1..=3);
                MetricSample {
                    t,
                    tps: two_dp(&mut rng, 5000),
                    qps: two_dp(&mut rng, 90_000),
                    latency: two_dp(&mut rng, 200),
                    errors_per_s: 0.0,
                    detail: None,
                }
            })
            .collect();
        let run = SysbenchRun { samples, summary: None, latency_percentile: Some(95) };
        for _ in 0..3 {
            let from = rng.random_range(0..=t + 5);
            let to = rng.random_range(0..=t + 5);
            windows += 1;
            let got = window_average(&run, from, to);
            if from > to {
                ensure!(matches!(got, Err(Error::InvertedWindow { .. })), "run {run_no}: [{from},{to}] gave {got:?}");
                continue;
            }
            let mut count = 0usize;
            let (mut tps, mut qps, mut lat) = (0.0, 0.0, 0.0);
            for s in &run.samples {
                if s.t >= from && s.t <= to {
                    count += 1;
                    tps += s.tps;
                    qps += s.qps;
                    lat += s.latency;
                }
            }
            if count == 0 {
                ensure!(matches!(got, Err(Error::EmptyWindow { .. })), "run {run_no}: [{from},{to}] gave {got:?}");
                continue;
            }
            let got = got.map_err(|e| format!("run {run_no}: {e}"))?;
            let c = count as f64;
            ensure!(got.sample_count == count, "run {run_no}: count {} vs {count}", got.sample_count);
            for (name, a, b) in [("tps", got.tps_avg, tps / c), ("qps", got.qps_avg, qps / c), ("lat", got.latency_avg, lat / c)] {
                ensure!((a - b).abs() <= 1e-9, "run {run_no} [{from},{to}] {name}: {a} vs {b}");
            }
        }
    }
    Ok(format!("1000 runs, {windows} windows"))
}

fn exclusive_cost_bound() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    for i in 0..500 {
        let (text, root_total, _) = random_postgres(&mut rng);
        let tree = pipeline(&text).map_err(|e| e.to_string())?;
        let sum: f64 = tree.walk().iter().map(|n| n.self_cost.unwrap()).sum();
        ensure!(sum <= root_total + 1e-9, "tree {i}: sum of self costs {sum} > root {root_total}");
    }
    let hand: [(&str, &[f64]); 3] = [
        ("postgres_q1_json", &[150.25, 299.5, 800.75]),
        ("postgres_q1_text", &[0.5, 699.75, 1800.5]),
        ("postgres_q3_hash_join", &[0.0, 99.75, 250.0, 5.0, 45.25]),
    ];
    let captures = golden_captures();
    for (stem, expected) in hand {
        let (_, capture, _) = captures.iter().find(|(s, _, _)| s == stem).ok_or(stem)?;
        let tree = pipeline(capture).map_err(|e| e.to_string())?;
        let got: Vec<f64> = tree.walk().iter().map(|n| n.self_cost.unwrap()).collect();
        ensure!(got == expected, "{stem}: {got:?} vs {expected:?}");
    }
    Ok("500 random cumulative trees; 3 golden trees exact".into())
}

fn terminology_invariance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    for i in 0..500 {
        let tree = pipeline(&random_plan(&mut rng).0).map_err(|e| e.to_string())?;
        for x in Terminology::ALL {
            for y in Terminology::ALL {
                let via = render_terminology(&render_terminology(&tree, x), y).op_classes();
                let direct = render_terminology(&tree, y).op_classes();
                ensure!(via == direct, "tree {i}: {x:?} then {y:?} differs from {y:?}");
            }
        }
    }
    Ok("500 trees x 16 terminology pairs".into())
}

fn session_model() -> Outcome {
    const SYSBENCH: &str = "[ 1s ] thds: 1 tps: 1.00 qps: 2.00 (r/w/o: 1.00/1.00/0.00) lat (ms,95%): 3.00 err/s: 0.00 reconn/s: 0.00\n";
    const TPCH: &str = "-- Query 1\nTime: 1.5 ms\n";
    let names = ["pg", "mysql", "mariadb", "a.log", ""];
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut ops = 0;
    for seq in 0..1000 {
        let session = Session::new();
        let mut model: Vec<(String, String, RunKind)> = Vec::new();
        for _ in 0..rng.random_range(1..40) {
            ops += 1;
            let name = *names.choose(&mut rng).unwrap();
            let pick = |rng: &mut StdRng, model: &[(String, String, RunKind)]| {
                if model.is_empty() || rng.random_bool(0.1) {
                    "unknown".to_string()
                } else {
                    model.choose(rng).unwrap().0.clone()
                }
            };
            match rng.random_range(0..6) {
                0..=2 => {
                    let kind = if rng.random_bool(0.5) { RunKind::Sysbench } else { RunKind::Tpch };
                    let body = if kind == RunKind::Sysbench { SYSBENCH } else { TPCH };
                    let effective = if name.is_empty() { "a.log" } else { name };
                    let clash = model.iter().any(|(_, n, k)| *k == kind && n == effective);
                    match session.upload_run(kind, name, Some("a.log"), body.as_bytes()) {
                        Ok(s) if !clash => model.push((s.id, effective.to_string(), kind)),
                        Err(e) if clash && e.code() == "NameTaken" => {}
                        other => return Err(format!("sequence {seq}: upload gave {other:?}")),
                    }
                }
                3 | 4 => {
                    let id = pick(&mut rng, &model);
                    let got = session.rename_run(&id, name).map(|s| s.name).map_err(|e| e.code());
                    let pos = model.iter().position(|r| r.0 == id);
                    let expected = match pos {
                        _ if name.is_empty() => Err("ValidationError"),
                        None => Err("UnknownRun"),
                        Some(i) if model.iter().any(|(rid, n, k)| *k == model[i].2 && n == name && *rid != id) => Err("NameTaken"),
                        Some(i) => {
                            model[i].1 = name.to_string();
                            Ok(name.to_string())
                        }
                    };
                    ensure!(got == expected, "sequence {seq}: rename {got:?} vs {expected:?}");
                }
                _ => {
                    let id = pick(&mut rng, &model);
                    let got = session.delete_run(&id).map_err(|e| e.code());
                    match model.iter().position(|r| r.0 == id) {
                        Some(i) => {
                            ensure!(got.is_ok(), "sequence {seq}: delete {got:?}");
                            model.remove(i);
                        }
                        None => ensure!(got == Err("UnknownRun"), "sequence {seq}: delete {got:?}"),
                    }
                }
            }
            let listed: Vec<_> = session.list_runs().into_iter().map(|r| (r.id, r.name, r.kind)).collect();
            ensure!(listed == model, "sequence {seq}: list_runs diverged from reference");
        }
    }
    Ok(format!("1000 sequences, {ops} operations"))
}

fn sysbench_round_trip() -> Outcome {
    let mut log = String::from("sysbench 1.0.20 (using bundled LuaJIT 2.1.0-beta2)\n\nThreads started!\n\n");
    for t in 1..=300u32 {
        let tps = 1000.0 + (t % 17) as f64 * 3.25;
        log.push_str(&format!(
            "[ {t}s ] thds: 16 tps: {tps:.2} qps: {:.2} (r/w/o: {:.2}/{:.2}/{:.2}) lat (ms,95%): {:.2} err/s: 0.00 reconn/s: 0.00\n",
            tps * 20.0, tps * 14.0, tps * 4.0, tps * 2.0, 5.0 + (t % 5) as f64
        ));
    }
    let run = parse_sysbench(&log).map_err(|e| e.to_string())?;
    ensure!(run.samples.len() == 300, "{} samples", run.samples.len());
    ensure!(run.samples.windows(2).all(|w| w[0].t < w[1].t), "timestamps not strictly increasing");
    let full = full_average(&run).map_err(|e| e.to_string())?;
    let window = window_average(&run, 1, 300).map_err(|e| e.to_string())?;
    ensure!(full == window, "{full:?} vs {window:?}");
    Ok(format!("300 samples, tps_avg {:.4}", full.tps_avg))
}

fn tpch_22_blocks() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let mut blocks = Vec::new();
    let mut expected = Vec::new();
    for q in 1..=22u32 {
        let micros = rng.random_range(1_000..100_000_000u64);
        if q.is_multiple_of(2) {
            let secs = micros as f64 / 1e6;
            blocks.push(format!("-- Query {q}\nSELECT ...;\n1 row in set ({secs} sec)\n"));
            expected.push((q, secs * 1000.0));
        } else {
            let ms = micros as f64 / 1e3;
            blocks.push(format!("-- Query {q}\nSELECT ...;\nTime: {ms:.3} ms\n"));
            expected.push((q, ms));
        }
    }
    blocks.shuffle(&mut rng);
    let run = parse_tpch(&blocks.concat()).map_err(|e| e.to_string())?;
    let got: Vec<u32> = run.query_numbers().collect();
    ensure!(got == (1..=22).collect::<Vec<_>>(), "query order {got:?}");
    let mut worst: f64 = 0.0;
    for (q, ms) in expected {
        let d = run.get(q).unwrap().duration_ms;
        worst = worst.max((d - ms).abs());
        ensure!((d - ms).abs() <= 1e-9, "Q{q}: {d} vs {ms}");
    }
    Ok(format!("22 results in order, max conversion error {worst:.1e} ms"))
}

async fn api_contract() -> Outcome {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let base = format!("http://{}/v1", listener.local_addr().unwrap());
    tokio::spawn(serve(listener, router(Arc::new(Session::new()), None), std::future::pending()));
    let client = reqwest::Client::new();

    let sysbench = "[ 1s ] thds: 2 tps: 10.00 qps: 20.00 (r/w/o: 10.00/5.00/5.00) lat (ms,95%): 1.50 err/s: 0.00 reconn/s: 0.00\n\
                    [ 2s ] thds: 2 tps: 30.00 qps: 60.00 (r/w/o: 30.00/15.00/15.00) lat (ms,95%): 2.50 err/s: 0.00 reconn/s: 0.00\n";
    let plan = r#"[{"Plan": {"Node Type": "Sort", "Total Cost": 4.0, "Plan Rows": 2, "Plans": [{"Node Type": "Seq Scan", "Relation Name": "t", "Total Cost": 3.0, "Plan Rows": 2}]}}]"#;

    let upload = |kind: &str, name: &str, body: &str| {
        let form = reqwest::multipart::Form::new()
            .text("name", name.to_string())
            .part("file", reqwest::multipart::Part::bytes(body.as_bytes().to_vec()).file_name("f.log"));
        client.post(format!("{base}/runs?kind={kind}")).multipart(form).send()
    };
    let mut checks = 0;
    let mut expect = |what: &str, status: u16, got_status: u16, body: &Value, code: Option<&str>| -> Result<(), String> {
        checks += 1;
        ensure!(got_status == status, "{what}: status {got_status}, expected {status}: {body}");
        if let Some(code) = code {
            ensure!(body["error"]["code"] == code, "{what}: code {}, expected {code}", body["error"]["code"]);
            ensure!(body["error"]["message"].as_str().is_some_and(|m| !m.is_empty()), "{what}: no message");
        }
        Ok(())
    };
    async fn read(resp: reqwest::Response) -> (u16, Value) {
        let status = resp.status().as_u16();
        let text = resp.text().await.unwrap_or_default();
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    let (s, oltp) = read(upload("sysbench", "oltp", sysbench).await.unwrap()).await;
    expect("upload sysbench", 201, s, &oltp, None)?;
    let (s, b) = read(upload("sysbench", "oltp", sysbench).await.unwrap()).await;
    expect("duplicate name", 409, s, &b, Some("NameTaken"))?;
    let (s, b) = read(upload("sysbench", "junk", "junk").await.unwrap()).await;
    expect("garbage upload", 400, s, &b, Some("ParserError"))?;
    ensure!(b["error"]["cause"] == "MalformedInput", "garbage upload cause {}", b["error"]["cause"]);
    let (s, olap) = read(upload("tpch", "pg", "-- Query 1\nTime: 5.0 ms\n").await.unwrap()).await;
    expect("upload tpch", 201, s, &olap, None)?;
    let (oltp, olap) = (oltp["id"].as_str().unwrap().to_string(), olap["id"].as_str().unwrap().to_string());

    let (s, b) = read(client.get(format!("{base}/runs")).send().await.unwrap()).await;
    expect("list", 200, s, &b, None)?;
    ensure!(b.as_array().map(Vec::len) == Some(2), "list has {b}");
    ensure!(b.as_array().unwrap().iter().all(|r| r.get("payload").is_none()), "list leaks payloads");

    let (s, b) = read(client.patch(format!("{base}/runs/{oltp}")).json(&json!({"name": "renamed"})).send().await.unwrap()).await;
    expect("rename", 200, s, &b, None)?;
    let (s, b) = read(client.patch(format!("{base}/runs/nope")).json(&json!({"name": "x"})).send().await.unwrap()).await;
    expect("rename unknown", 404, s, &b, Some("UnknownRun"))?;

    let (s, b) = read(client.get(format!("{base}/runs/{oltp}/timeseries?metric=latency")).send().await.unwrap()).await;
    expect("timeseries", 200, s, &b, None)?;
    ensure!(b["points"] == json!([{"t": 1, "value": 1.5}, {"t": 2, "value": 2.5}]), "timeseries {b}");
    let (s, b) = read(client.get(format!("{base}/runs/{olap}/timeseries?metric=tps")).send().await.unwrap()).await;
    expect("timeseries wrong kind", 400, s, &b, Some("WrongKind"))?;

    let (s, b) = read(client.get(format!("{base}/runs/{oltp}/average?from=1&to=2")).send().await.unwrap()).await;
    expect("average", 200, s, &b, None)?;
    ensure!(b["tps_avg"] == 20.0 && b["qps_avg"] == 40.0 && b["latency_avg"] == 2.0, "average {b}");
    let (s, b) = read(client.get(format!("{base}/runs/{oltp}/average?from=2&to=1")).send().await.unwrap()).await;
    expect("inverted window", 400, s, &b, Some("ValidationError"))?;
    let (s, b) = read(client.get(format!("{base}/runs/{oltp}/average?from=9&to=10")).send().await.unwrap()).await;
    expect("empty window", 400, s, &b, Some("EmptyWindow"))?;
    let (s, b) = read(client.get(format!("{base}/runs/nope/average")).send().await.unwrap()).await;
    expect("average unknown", 404, s, &b, Some("UnknownRun"))?;

    let (s, b) = read(client.get(format!("{base}/tpch/comparison?ids={olap}")).send().await.unwrap()).await;
    expect("comparison", 200, s, &b, None)?;
    ensure!(b["per_query"][0]["durations"][0]["duration_ms"] == 5.0, "comparison {b}");
    let (s, b) = read(client.get(format!("{base}/tpch/comparison?ids=")).send().await.unwrap()).await;
    expect("comparison empty", 400, s, &b, Some("ValidationError"))?;
    let (s, b) = read(client.get(format!("{base}/tpch/comparison?ids={olap},{oltp}")).send().await.unwrap()).await;
    expect("comparison mixed", 400, s, &b, Some("WrongKind"))?;

    let plan_url = format!("{base}/runs/{olap}/queries/1/plan");
    let (s, b) = read(client.get(&plan_url).send().await.unwrap()).await;
    expect("plan before attach", 404, s, &b, Some("NoPlanAttached"))?;
    let (s, b) = read(client.post(&plan_url).body(plan).send().await.unwrap()).await;
    expect("attach plan", 204, s, &b, None)?;
    let (s, b) = read(client.post(format!("{base}/runs/{olap}/queries/5/plan")).body(plan).send().await.unwrap()).await;
    expect("attach unknown query", 404, s, &b, Some("UnknownQuery"))?;
    let (s, b) = read(client.get(format!("{plan_url}?terminology=postgres&metric=cost")).send().await.unwrap()).await;
    expect("get plan", 200, s, &b, None)?;
    ensure!(b["tree"]["children"][0]["name"] == "Seq Scan", "plan {b}");
    ensure!(b["percentages"] == json!([{"label": "Seq Scan", "pct": 75.0}, {"label": "Sort", "pct": 25.0}]), "percentages {}", b["percentages"]);
    let (s, b) = read(client.get(format!("{base}/runs/{olap}/queries/2/plan")).send().await.unwrap()).await;
    expect("plan unknown query", 404, s, &b, Some("UnknownQuery"))?;
    client.post(&plan_url).body("not a plan").send().await.unwrap();
    let (s, b) = read(client.get(&plan_url).send().await.unwrap()).await;
    expect("unparseable plan", 400, s, &b, Some("ParserError"))?;

    let (s, b) = read(client.delete(format!("{base}/runs/{oltp}")).send().await.unwrap()).await;
    expect("delete", 204, s, &b, None)?;
    let (s, b) = read(client.delete(format!("{base}/runs/{oltp}")).send().await.unwrap()).await;
    expect("delete again", 404, s, &b, Some("UnknownRun"))?;
    Ok(format!("{checks} HTTP exchanges across all 9 endpoints"))
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("parser golden corpus", Box::new(golden_corpus)),
        ("tree well-formedness", Box::new(tree_well_formedness)),
        ("percentage conservation", Box::new(percentage_conservation)),
        ("windowed-mean oracle", Box::new(windowed_mean_oracle)),
        ("exclusive-cost bound", Box::new(exclusive_cost_bound)),
        ("terminology class-invariance", Box::new(terminology_invariance)),
        ("session model", Box::new(session_model)),
        ("sysbench round trip", Box::new(sysbench_round_trip)),
        ("TPC-H 22 blocks", Box::new(tpch_22_blocks)),
        ("API contract", Box::new(move || runtime.block_on(api_contract()))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
