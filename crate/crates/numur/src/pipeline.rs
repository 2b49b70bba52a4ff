//! The experiment pipeline behind each subcommand. Every step reads its
//! inputs from and writes its outputs under one output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use numur_core::eval::{score_distribution, timing_metrics};
use numur_core::ranker::{retrain_observed, train_observed};
use numur_core::{
    compute_destinations, evaluate_sets, generate_synthetic, partition as split_sets, sample_forget_spec, unlearn as run_method,
    CorpusSplit, Destination, Destinations, ForgetSpec, Method, Observer, Partition, RemovalKind, Sample, ScoreModel,
    UnlearnTask,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts;
use crate::config::{ExperimentConfig, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{self, load_model, load_spec, read_json, save_model, write_json, write_string, Manifest};
use crate::output::{self, RunReport, SetScores, Timing};

/// Observer backed by the monotonic system clock.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Observer for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Worker pool capped by `NUMUR_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("NUMUR_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config(format!("NUMUR_THREADS must be a positive integer, got \"{v}\"")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

pub struct Workspace {
    pub out: PathBuf,
    pub cfg: ExperimentConfig,
}

fn removal_name(kind: RemovalKind) -> &'static str {
    match kind {
        RemovalKind::QueryRemoval => "query",
        RemovalKind::DocumentRemoval => "document",
    }
}

fn spec_stem(spec: &Path) -> String {
    spec.file_stem().map_or_else(|| "spec".into(), |s| s.to_string_lossy().into_owned())
}

fn require(path: &Path, hint: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact { path: path.into(), hint: hint.into() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DestinationsFile {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Workspace {
    pub fn new(out: impl Into<PathBuf>, cfg: ExperimentConfig) -> Self {
        Workspace { out: out.into(), cfg }
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.cfg.data_dir.clone().unwrap_or_else(|| self.out.join("corpus"))
    }

    pub fn spec_path(&self, kind: RemovalKind, fraction: f64) -> PathBuf {
        self.out.join("specs").join(format!("{}-{fraction}.json", removal_name(kind)))
    }

    pub fn train_dir(&self) -> PathBuf {
        self.out.join("train")
    }

    pub fn retrain_dir(&self, spec: &Path) -> PathBuf {
        self.out.join("retrain").join(spec_stem(spec))
    }

    pub fn unlearn_dir(&self, spec: &Path) -> PathBuf {
        self.out.join("unlearn").join(spec_stem(spec))
    }

    pub fn load_split(&self) -> Result<CorpusSplit> {
        let dir = self.corpus_dir();
        require(&dir.join("train"), "run `numur gen` first or set data_dir")?;
        formats::load_split(&dir)
    }

    fn load_trained(&self) -> Result<ScoreModel> {
        let path = self.train_dir().join("model.bin");
        require(&path, "run `numur train` first")?;
        load_model(&path)
    }

    fn load_request(&self, split: &CorpusSplit, spec: &Path) -> Result<(ForgetSpec, Partition)> {
        require(spec, "run `numur gen` or pass an existing forget spec")?;
        let s = load_spec(spec)?;
        let p = split_sets(&split.train, &s)?;
        Ok((s, p))
    }
}

#[derive(Debug)]
pub struct GenSummary {
    pub corpus_dir: PathBuf,
    pub specs: Vec<PathBuf>,
}

/// Writes the synthetic corpus (unless `data_dir` points at one) and a
/// removal request of each kind for every configured fraction.
pub fn gen(ws: &Workspace) -> Result<GenSummary> {
    ws.cfg.validate()?;
    let split = if ws.cfg.data_dir.is_some() {
        ws.load_split()?
    } else {
        let split = generate_synthetic(&ws.cfg.synthetic())?;
        let manifest = Manifest {
            vocab_size: split.train.vocab_size(),
            generator: Some(ws.cfg.corpus.clone()),
        };
        formats::save_split(&split, &manifest, &ws.corpus_dir())?;
        split
    };
    let mut specs = Vec::new();
    for kind in [RemovalKind::QueryRemoval, RemovalKind::DocumentRemoval] {
        for &f in &ws.cfg.fractions {
            let spec = sample_forget_spec(&split.train, kind, f, ws.cfg.seed)?;
            let path = ws.spec_path(kind, f);
            formats::save_spec(&spec, &path)?;
            specs.push(path);
        }
    }
    Ok(GenSummary { corpus_dir: ws.corpus_dir(), specs })
}

fn init_model(ws: &Workspace, split: &CorpusSplit) -> ScoreModel {
    let t = ws.cfg.train_config();
    ScoreModel::init(split.train.vocab_size(), t.dim, t.seed)
}

/// Trains the model on the full training set and records the score
/// distribution of the initial and trained models.
pub fn train(ws: &Workspace) -> Result<PathBuf> {
    let split = ws.load_split()?;
    let cfg = ws.cfg.train_config();
    let trained = train_observed(&split, &cfg, &mut WallClock::start())?;
    let dir = ws.train_dir();
    save_model(&trained.model, &dir.join("model.bin"))?;
    output::write_train_trajectory(&dir.join("trajectory.csv"), &trained.trajectory)?;
    let init = init_model(ws, &split);
    let dist = score_distribution(
        &[("init", &init), ("train", &trained.model)],
        &split.train,
        &[("train", split.train.samples()), ("test", split.test.samples())],
    );
    output::write_distributions(&dir.join("distributions.csv"), &dist)?;
    Ok(dir)
}

fn train_epoch_times(ws: &Workspace) -> Option<Vec<f64>> {
    output::read_train_trajectory(&ws.train_dir().join("trajectory.csv"))
        .ok()
        .map(|rows| rows.iter().map(|r| r.wall_time_s).collect())
}

/// Trains a fresh model on the retained samples and records the three
/// destinations derived from it.
pub fn retrain(ws: &Workspace, spec: &Path) -> Result<PathBuf> {
    let split = ws.load_split()?;
    let (s, p) = ws.load_request(&split, spec)?;
    let cfg = ws.cfg.train_config();
    let clock = WallClock::start();
    let mut obs = WallClock::start();
    let trained = retrain_observed(&split, &cfg, &p, &mut obs)?;
    let wall = clock.now();
    let dir = ws.retrain_dir(spec);
    save_model(&trained.model, &dir.join("model.bin"))?;
    output::write_train_trajectory(&dir.join("trajectory.csv"), &trained.trajectory)?;
    let m = evaluate_sets(&trained.model, &split, &p, &s)?;
    let dest = compute_destinations(&trained.model, &split, &p, &s)?;
    write_json(&dir.join("destinations.json"), &DestinationsFile { d1: dest.d1, d2: dest.d2, d3: dest.d3 })?;
    let report = RunReport {
        name: "retrain".into(),
        method: "retrain".into(),
        removal: removal_name(s.kind).into(),
        delta_target: None,
        destination: None,
        epochs_run: cfg.epochs,
        stopped_early: None,
        edits: 0,
        mrr_forget: m.forget,
        mrr_entangled: m.entangled,
        mrr_disjoint: m.disjoint,
        mrr_test: m.test,
        forget_skipped: m.forget_skipped,
        before: None,
        retrain_mrr_test: Some(m.test),
        normalized_forget: Some(numur_core::eval::normalized_forget_value(m.forget, m.test)),
        timing: Timing { wall_time_s: wall, ..Default::default() },
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(dir)
}

pub fn load_destinations(ws: &Workspace, spec: &Path) -> Result<Destinations> {
    let path = ws.retrain_dir(spec).join("destinations.json");
    require(&path, &format!("run `numur retrain --spec {}` first", spec.display()))?;
    let d: DestinationsFile = read_json(&path)?;
    Ok(Destinations { d1: d.d1, d2: d.d2, d3: d.d3 })
}

#[derive(Clone, Debug, Serialize)]
struct PartitionSummary {
    removal: String,
    forget: usize,
    entangled: usize,
    disjoint: usize,
    forget_queries: Vec<String>,
    forget_docs: Vec<String>,
}

fn write_samples(path: &Path, split: &CorpusSplit, samples: &[Sample]) -> Result<()> {
    let d = &split.train;
    let mut s = String::from("query_id\tdoc_id\tlabel\n");
    for x in samples {
        s.push_str(&format!(
            "{}\t{}\t{}\n",
            d.query(x.query).id,
            d.doc(x.doc).id,
            u8::from(x.label.is_positive())
        ));
    }
    write_string(path, &s)
}

/// Writes the forget, entangled and disjoint sets of a request.
pub fn partition(ws: &Workspace, spec: &Path) -> Result<PathBuf> {
    let split = ws.load_split()?;
    let (s, p) = ws.load_request(&split, spec)?;
    let dir = ws.out.join("partition").join(spec_stem(spec));
    write_samples(&dir.join("forget.tsv"), &split, &p.forget)?;
    write_samples(&dir.join("entangled.tsv"), &split, &p.entangled)?;
    write_samples(&dir.join("disjoint.tsv"), &split, &p.disjoint)?;
    let d = &split.train;
    write_json(
        &dir.join("summary.json"),
        &PartitionSummary {
            removal: removal_name(s.kind).into(),
            forget: p.forget.len(),
            entangled: p.entangled.len(),
            disjoint: p.disjoint.len(),
            forget_queries: p.forget_queries.iter().map(|q| d.query(*q).id.clone()).collect(),
            forget_docs: p.forget_docs.iter().map(|x| d.doc(*x).id.clone()).collect(),
        },
    )?;
    Ok(dir)
}

/// Where the forget-MRR target of a run comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    /// `unlearn.delta_target` from the configuration.
    Configured,
    Delta(f64),
    Destination(Destination),
}

#[derive(Clone, Debug)]
pub struct UnlearnRequest {
    pub spec: PathBuf,
    pub methods: Vec<Method>,
    pub target: Target,
    /// Directory name of the run; defaults to one derived from the method,
    /// target and ablation switches. Only valid for a single method.
    pub name: Option<String>,
}

fn dest_name(d: Destination) -> &'static str {
    match d {
        Destination::D1 => "d1",
        Destination::D2 => "d2",
        Destination::D3 => "d3",
    }
}

fn run_name(ws: &Workspace, method: Method, target: Target) -> String {
    let mut name = method.name().to_string();
    match target {
        Target::Configured => {}
        Target::Delta(d) => name.push_str(&format!("-delta{d}")),
        Target::Destination(d) => {
            name.push('-');
            name.push_str(dest_name(d));
        }
    }
    if method == Method::CoCoL {
        if !ws.cfg.unlearn.entangled_term {
            name.push_str("-no-entangled");
        }
        if !ws.cfg.unlearn.consistent_phase {
            name.push_str("-no-consistent");
        }
    }
    name
}

/// Runs each requested method from the trained model and writes its
/// artifacts. Several methods run in parallel on the worker pool.
pub fn unlearn(ws: &Workspace, req: &UnlearnRequest) -> Result<Vec<PathBuf>> {
    if req.methods.is_empty() {
        return Err(Error::Config("no unlearning method requested".into()));
    }
    if req.name.is_some() && req.methods.len() > 1 {
        return Err(Error::Config("a run name can only be given for a single method".into()));
    }
    let split = ws.load_split()?;
    let (s, p) = ws.load_request(&split, &req.spec)?;
    let trained = ws.load_trained()?;
    let (delta, destination) = match req.target {
        Target::Configured => (ws.cfg.unlearn.delta_target, None),
        Target::Delta(d) => (d, None),
        Target::Destination(d) => (load_destinations(ws, &req.spec)?.get(d), Some(dest_name(d).to_string())),
    };
    let retrain_report = ws.retrain_dir(&req.spec).join("report.json");
    let retrain_test = if retrain_report.exists() {
        Some(read_json::<RunReport>(&retrain_report)?.mrr_test)
    } else {
        None
    };
    let before = SetScores::from(&evaluate_sets(&trained, &split, &p, &s)?);
    let train_times = train_epoch_times(ws);
    let one = |method: Method| -> Result<PathBuf> {
        let mut cfg = ws.cfg.unlearn_config(method);
        cfg.delta_target = delta;
        cfg.validate()?;
        let task = UnlearnTask::new(&trained, &split, &p, &s);
        let clock = WallClock::start();
        let mut obs = WallClock::start();
        let run = run_method(task, &cfg, &mut obs)?;
        let wall = clock.now();
        let name = req.name.clone().unwrap_or_else(|| run_name(ws, method, req.target));
        let dir = ws.unlearn_dir(&req.spec).join(&name);
        save_model(&run.final_model, &dir.join("model.bin"))?;
        output::write_trajectory(&dir.join("trajectory.csv"), &run.trajectory)?;
        write_json(&dir.join("run_config.json"), &RunConfig::from_core(&cfg, destination.clone()))?;
        let last = run.final_record();
        let timing = train_times
            .as_deref()
            .and_then(|t| timing_metrics(t, &run.epoch_times(), run.epochs_run).ok());
        let report = RunReport {
            name,
            method: method.name().into(),
            removal: removal_name(s.kind).into(),
            delta_target: Some(delta),
            destination: destination.clone(),
            epochs_run: run.epochs_run,
            stopped_early: Some(run.stopped_early),
            edits: run.edits,
            mrr_forget: last.mrr_forget,
            mrr_entangled: last.mrr_entangled,
            mrr_disjoint: last.mrr_disjoint,
            mrr_test: last.mrr_test,
            forget_skipped: numur_core::mrr_forget(&run.final_model, &split.train, &p, &s)?.skipped,
            before: Some(before),
            retrain_mrr_test: retrain_test,
            normalized_forget: retrain_test.map(|t| numur_core::eval::normalized_forget_value(last.mrr_forget, t)),
            timing: Timing {
                wall_time_s: wall,
                normalized_epoch_duration: timing.map(|t| t.normalized_epoch_duration),
                total_unlearn_time: timing.map(|t| t.total_unlearn_time),
            },
        };
        write_json(&dir.join("report.json"), &report)?;
        Ok(dir)
    };
    if req.methods.len() == 1 {
        return one(req.methods[0]).map(|d| vec![d]);
    }
    thread_pool()?.install(|| req.methods.par_iter().map(|&m| one(m)).collect())
}

/// Scores a model file on the corpus (and on the sets of `spec` when
/// given) and writes its report and score distributions next to the other
/// outputs under `eval/<name>`.
pub fn eval(ws: &Workspace, model: &Path, spec: Option<&Path>, name: &str) -> Result<PathBuf> {
    require(model, "train or unlearn a model first")?;
    let split = ws.load_split()?;
    let m = load_model(model)?;
    m.check_dataset(&split.train)?;
    let dir = ws.out.join("eval").join(name);
    let init = init_model(ws, &split);
    let mut sets: Vec<(String, Vec<Sample>)> = vec![("train".into(), split.train.samples().to_vec())];
    if let Some(spec) = spec {
        let (s, p) = ws.load_request(&split, spec)?;
        let r = evaluate_sets(&m, &split, &p, &s)?;
        let report = RunReport {
            name: name.into(),
            method: "eval".into(),
            removal: removal_name(s.kind).into(),
            delta_target: None,
            destination: None,
            epochs_run: 0,
            stopped_early: None,
            edits: 0,
            mrr_forget: r.forget,
            mrr_entangled: r.entangled,
            mrr_disjoint: r.disjoint,
            mrr_test: r.test,
            forget_skipped: r.forget_skipped,
            before: None,
            retrain_mrr_test: None,
            normalized_forget: None,
            timing: Timing::default(),
        };
        write_json(&dir.join("report.json"), &report)?;
        sets.push(("forget".into(), p.forget.clone()));
        sets.push(("entangled".into(), p.entangled.clone()));
        sets.push(("disjoint".into(), p.disjoint.clone()));
    }
    // Distributions per (model, set) in parallel; the order of rows is fixed.
    let models: [(&str, &ScoreModel); 2] = [("init", &init), (name, &m)];
    let jobs: Vec<(usize, usize)> = (0..models.len()).flat_map(|i| (0..sets.len()).map(move |j| (i, j))).collect();
    let dist = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(i, j)| score_distribution(&[models[i]], &split.train, &[(&sets[j].0, &sets[j].1)]).remove(0))
            .collect::<Vec<_>>()
    });
    let mut test_dist = score_distribution(&models, &split.test, &[("test", split.test.samples())]);
    let mut all = dist;
    all.append(&mut test_dist);
    output::write_distributions(&dir.join("distributions.csv"), &all)?;
    Ok(dir)
}

/// Run directories below `unlearn/`, in path order.
pub fn discover_runs(ws: &Workspace) -> Result<Vec<PathBuf>> {
    let root = ws.out.join("unlearn");
    let mut out = Vec::new();
    if !root.exists() {
        return Ok(out);
    }
    let mut specs: Vec<PathBuf> = fs::read_dir(&root)
        .map_err(|e| Error::io(&root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    specs.sort();
    for spec in specs {
        let mut runs: Vec<PathBuf> = fs::read_dir(&spec)
            .map_err(|e| Error::io(&spec, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("report.json").exists())
            .collect();
        runs.sort();
        out.extend(runs);
    }
    Ok(out)
}

/// Collects run reports into one table and draws the forget-MRR
/// trajectories and a per-set MRR radar chart.
pub fn report(ws: &Workspace, runs: &[PathBuf]) -> Result<PathBuf> {
    let runs = if runs.is_empty() { discover_runs(ws)? } else { runs.to_vec() };
    if runs.is_empty() {
        return Err(Error::MissingArtifact {
            path: ws.out.join("unlearn"),
            hint: "no completed runs; run `numur unlearn` first".into(),
        });
    }
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for dir in &runs {
        let path = dir.join("report.json");
        require(&path, "not a completed run directory")?;
        let r: RunReport = read_json(&path)?;
        let label = format!("{} ({})", r.name, r.removal);
        let traj = dir.join("trajectory.csv");
        if traj.exists() {
            let rows = output::read_trajectory(&traj)?;
            lines.push((label, rows.iter().map(|x| (x.epoch as f64, x.mrr_forget)).collect()));
        }
        reports.push(r);
    }
    let dir = ws.out.join("report");
    output::write_report_csv(&dir.join("report.csv"), &reports)?;
    write_json(&dir.join("report.json"), &reports)?;
    write_string(
        &dir.join("trajectories.svg"),
        &charts::line_chart("Forget-set MRR during unlearning", "epoch", "MRR", &lines),
    )?;
    let radar: Vec<(String, Vec<f64>)> = reports
        .iter()
        .map(|r| (format!("{} ({})", r.name, r.removal), vec![r.mrr_forget, r.mrr_entangled, r.mrr_disjoint, r.mrr_test]))
        .collect();
    write_string(
        &dir.join("radar.svg"),
        &charts::radar_chart("Per-set MRR after unlearning", &["forget", "entangled", "disjoint", "test"], &radar),
    )?;
    Ok(dir)
}
