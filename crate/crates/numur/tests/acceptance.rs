//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use numur::config::ExperimentConfig;
use numur::output::{read_distributions, read_train_trajectory, RunReport};
use numur::pipeline::{self, Target, UnlearnRequest, Workspace};
use numur_core::{partition, Destination, ForgetSpec, Method, RemovalKind};

use common::*;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn config() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.json");
    ExperimentConfig::load(&path).expect("acceptance config")
}

fn read_report(dir: &Path) -> RunReport {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Artifacts of one full pipeline run on the acceptance corpus.
struct Pipeline {
    ws: Workspace,
    spec: PathBuf,
    runs: BTreeMap<String, RunReport>,
    cocol_seconds: f64,
}

fn unlearn_one(ws: &Workspace, spec: &Path, method: Method, target: Target, name: &str) -> RunReport {
    let req = UnlearnRequest {
        spec: spec.to_path_buf(),
        methods: vec![method],
        target,
        name: Some(name.into()),
    };
    let dirs = pipeline::unlearn(ws, &req).unwrap();
    read_report(&dirs[0])
}

fn run_pipeline(out: &Path) -> Pipeline {
    let mut ws = Workspace::new(out, config());
    pipeline::gen(&ws).unwrap();
    pipeline::train(&ws).unwrap();
    let spec = ws.spec_path(RemovalKind::DocumentRemoval, 0.25);
    pipeline::retrain(&ws, &spec).unwrap();
    pipeline::partition(&ws, &spec).unwrap();
    let mut runs = BTreeMap::new();
    let t0 = Instant::now();
    runs.insert("cocol".into(), unlearn_one(&ws, &spec, Method::CoCoL, Target::Configured, "cocol"));
    let cocol_seconds = t0.elapsed().as_secs_f64();
    for m in [Method::NegGrad, Method::Amnesiac, Method::BadT, Method::Ssd] {
        runs.insert(m.name().into(), unlearn_one(&ws, &spec, m, Target::Configured, m.name()));
    }
    for (d, n) in [(Destination::D1, "cocol-d1"), (Destination::D2, "cocol-d2"), (Destination::D3, "cocol-d3")] {
        runs.insert(n.into(), unlearn_one(&ws, &spec, Method::CoCoL, Target::Destination(d), n));
    }
    let budget = runs["cocol"].epochs_run.max(1);
    let saved = ws.cfg.unlearn.clone();
    ws.cfg.unlearn.max_epochs = budget;
    runs.insert("cf".into(), unlearn_one(&ws, &spec, Method::Cf, Target::Configured, "cf"));
    ws.cfg.unlearn = saved.clone();
    ws.cfg.unlearn.entangled_term = false;
    runs.insert("no-entangled".into(), unlearn_one(&ws, &spec, Method::CoCoL, Target::Configured, "cocol-no-entangled"));
    ws.cfg.unlearn = saved.clone();
    ws.cfg.unlearn.consistent_phase = false;
    runs.insert("no-consistent".into(), unlearn_one(&ws, &spec, Method::CoCoL, Target::Configured, "cocol-no-consistent"));
    ws.cfg.unlearn = saved;
    pipeline::eval(&ws, &ws.train_dir().join("model.bin"), Some(&spec), "trained").unwrap();
    pipeline::report(&ws, &[]).unwrap();
    Pipeline { ws, spec, runs, cocol_seconds }
}

fn c1() -> Outcome {
    let t0 = Instant::now();
    let mut mismatches = 0;
    let mut r = rng(2024);
    for _ in 0..500 {
        let d = random_dataset(&mut r, 30);
        let spec = random_spec(&mut r, &d);
        let (f, e, dj) = oracle_partition(&d, &spec);
        let ok = match partition(&d, &spec) {
            Ok(p) => as_ids(&d, &p.forget) == f && as_ids(&d, &p.entangled) == e && as_ids(&d, &p.disjoint) == dj,
            Err(_) => f.len() == d.samples().len(),
        };
        mismatches += usize::from(!ok);
    }
    let d = worked_example(true);
    let p = partition(&d, &ForgetSpec::documents(["d2", "d3"])).unwrap();
    let pairs = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
    let example = as_ids(&d, &p.entangled) == pairs(&[("q1", "d1"), ("q4", "d4")])
        && as_ids(&d, &p.disjoint) == pairs(&[("q5", "d5")]);
    let secs = t0.elapsed().as_secs_f64();
    Outcome {
        id: "C1",
        title: "partition oracle",
        pass: mismatches == 0 && example && secs < 5.0,
        detail: format!("{mismatches} mismatches in 500, worked example {example}, {secs:.2}s"),
    }
}

fn c2() -> Outcome {
    let t0 = Instant::now();
    let worst = [
        ("forward", worst_gradient_error(21, 100, gradient_case_forward)),
        ("contrastive", worst_gradient_error(22, 100, gradient_case_contrastive)),
        ("consistent", worst_gradient_error(23, 100, gradient_case_consistent)),
        ("hinge", worst_gradient_error(24, 100, gradient_case_hinge)),
    ];
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst.iter().all(|w| w.1 <= 1e-4) && secs < 30.0;
    let detail = worst.iter().map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    Outcome { id: "C2", title: "gradient suite", pass, detail: format!("worst rel. error {detail}; {secs:.2}s") }
}

fn c3() -> Outcome {
    let mut r = rng(77);
    let failures: Vec<String> = (0..200).filter_map(|_| mrr_case(&mut r).err()).collect();
    let (d, m, spec) = ranking_example();
    let p = partition(&d, &spec).unwrap();
    let worked = numur_core::mrr_forget(&m, &d, &p, &spec).unwrap().value;
    Outcome {
        id: "C3",
        title: "MRR oracle",
        pass: failures.is_empty() && worked == 0.25,
        detail: format!("{} mismatches in 200, worked example {worked}", failures.len()),
    }
}

fn c4(pl: &Pipeline) -> Outcome {
    let train = read_train_trajectory(&pl.ws.train_dir().join("trajectory.csv")).unwrap();
    let train_mrr = train.last().unwrap().mrr_train;
    let r = &pl.runs["cocol"];
    let pre = r.before.unwrap();
    let pass = train_mrr >= 0.9
        && r.stopped_early == Some(true)
        && r.mrr_forget <= 0.5
        && r.mrr_disjoint >= 0.90 * pre.disjoint
        && r.mrr_entangled >= 0.85 * pre.entangled
        && r.epochs_run <= 200
        && pl.cocol_seconds < 120.0;
    Outcome {
        id: "C4",
        title: "end-to-end CoCoL",
        pass,
        detail: format!(
            "train MRR {train_mrr:.3}; forget {:.3}->{:.3}, entangled {:.3}->{:.3}, disjoint {:.3}->{:.3}; {} epochs, {:.2}s",
            pre.forget, r.mrr_forget, pre.entangled, r.mrr_entangled, pre.disjoint, r.mrr_disjoint, r.epochs_run, pl.cocol_seconds
        ),
    }
}

fn c5(pl: &Pipeline) -> Outcome {
    let co = &pl.runs["cocol"];
    let mut pass = true;
    let mut parts = vec![format!("cocol D {:.3}", co.mrr_disjoint)];
    for m in ["neggrad", "amnesiac", "badt"] {
        let r = &pl.runs[m];
        let ok = r.stopped_early == Some(true) && r.mrr_forget <= 0.5 && r.mrr_disjoint < co.mrr_disjoint;
        pass &= ok;
        parts.push(format!("{m} F {:.3} D {:.3}", r.mrr_forget, r.mrr_disjoint));
    }
    let cf = &pl.runs["cf"];
    let ok = cf.mrr_forget > 0.5;
    pass &= ok;
    parts.push(format!("cf F {:.3} after {} epochs", cf.mrr_forget, cf.epochs_run));
    Outcome { id: "C5", title: "baseline contrast", pass, detail: parts.join("; ") }
}

fn c6(pl: &Pipeline) -> Outcome {
    let dest = pipeline::load_destinations(&pl.ws, &pl.spec).unwrap();
    let runs = [&pl.runs["cocol-d1"], &pl.runs["cocol-d2"], &pl.runs["cocol-d3"]];
    let targets = [dest.d1, dest.d2, dest.d3];
    let ordered = dest.d1 > dest.d2 && dest.d2 > dest.d3;
    let reached = runs.iter().zip(targets).all(|(r, t)| r.stopped_early == Some(true) && r.mrr_forget <= t);
    let epochs: Vec<usize> = runs.iter().map(|r| r.epochs_run).collect();
    let monotone = epochs[0] <= epochs[1] && epochs[1] <= epochs[2];
    let ds: Vec<f64> = runs.iter().map(|r| r.mrr_disjoint).collect();
    let range = ds.iter().cloned().fold(f64::MIN, f64::max) - ds.iter().cloned().fold(f64::MAX, f64::min);
    Outcome {
        id: "C6",
        title: "controllable forgetting",
        pass: ordered && reached && monotone && range <= 0.10,
        detail: format!(
            "targets {:.3}/{:.3}/{:.3}, forget {:.3}/{:.3}/{:.3}, epochs {epochs:?}, disjoint range {range:.3}",
            targets[0], targets[1], targets[2], runs[0].mrr_forget, runs[1].mrr_forget, runs[2].mrr_forget
        ),
    }
}

fn c7() -> Outcome {
    let worlds = [
        small_world(31, RemovalKind::DocumentRemoval),
        small_world(32, RemovalKind::QueryRemoval),
    ];
    let mut r = rng(33);
    let failures: Vec<String> = (0..50).filter_map(|i| stopping_case(&worlds[i % 2], &mut r).err()).collect();
    Outcome {
        id: "C7",
        title: "stopping-rule soundness",
        pass: failures.is_empty(),
        detail: match failures.first() {
            None => "50 random configurations".into(),
            Some(f) => format!("{} violations, first: {f}", failures.len()),
        },
    }
}

const WALL_FIELDS: [&str; 3] = ["wall_time_s", "normalized_epoch_duration", "total_unlearn_time"];

fn strip_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("timing");
            for k in WALL_FIELDS {
                m.remove(k);
            }
            m.values_mut().for_each(strip_json);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_json),
        _ => {}
    }
}

fn strip_csv(text: &str) -> String {
    let mut lines = text.lines();
    let Some(header) = lines.next() else { return String::new() };
    let cols: Vec<&str> = header.split(',').collect();
    let keep: Vec<usize> = (0..cols.len()).filter(|&i| !WALL_FIELDS.contains(&cols[i])).collect();
    std::iter::once(header)
        .chain(lines)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| f.get(i).copied().unwrap_or("")).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if matches!(p.extension().and_then(|x| x.to_str()), Some("csv" | "json")) {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn normalised(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    if path.extension().and_then(|x| x.to_str()) == Some("json") {
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        strip_json(&mut v);
        v.to_string()
    } else {
        strip_csv(&text)
    }
}

fn c8(first: &Path, second: &Path) -> Outcome {
    let a = files(first);
    let b = files(second);
    let mut differing = Vec::new();
    for f in &a {
        if !b.contains(f) || normalised(&first.join(f)) != normalised(&second.join(f)) {
            differing.push(f.display().to_string());
        }
    }
    let bins_equal = ["train/model.bin", "unlearn/document-0.25/cocol/model.bin"]
        .iter()
        .all(|f| std::fs::read(first.join(f)).unwrap() == std::fs::read(second.join(f)).unwrap());
    Outcome {
        id: "C8",
        title: "determinism",
        pass: differing.is_empty() && a.len() == b.len() && bins_equal,
        detail: format!("{} CSV/JSON files compared, {} differ {differing:?}, model files equal {bins_equal}", a.len(), differing.len()),
    }
}

fn c9(pl: &Pipeline) -> Outcome {
    let full = &pl.runs["cocol"];
    let ne = &pl.runs["no-entangled"];
    let nc = &pl.runs["no-consistent"];
    Outcome {
        id: "C9",
        title: "ablation switches",
        pass: ne.mrr_entangled < full.mrr_entangled && nc.mrr_disjoint < full.mrr_disjoint,
        detail: format!(
            "entangled {:.3} without partner term vs {:.3}; disjoint {:.3} without consistent phase vs {:.3}",
            ne.mrr_entangled, full.mrr_entangled, nc.mrr_disjoint, full.mrr_disjoint
        ),
    }
}

fn c10(pl: &Pipeline) -> Outcome {
    let rows = read_distributions(&pl.ws.train_dir().join("distributions.csv")).unwrap();
    let spread = |model: &str| rows.iter().find(|r| r.model == model && r.set == "train").unwrap().spread;
    let (i, t) = (spread("init"), spread("train"));
    Outcome {
        id: "C10",
        title: "score-interval diagnostic",
        pass: i < t,
        detail: format!("init spread {i:.4}, trained spread {t:.4}"),
    }
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run_pipeline(&tmp.path().join("a"));
    let second = run_pipeline(&tmp.path().join("b"));
    let outcomes = [
        c1(),
        c2(),
        c3(),
        c4(&first),
        c5(&first),
        c6(&first),
        c7(),
        c8(&first.ws.out, &second.ws.out),
        c9(&first),
        c10(&first),
    ];
    println!();
    for o in &outcomes {
        println!("{} {}: {} ({})", o.id, o.title, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
