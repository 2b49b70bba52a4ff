//! Unlearning strategies sharing one MRR-targeted stopping rule.
//!
//! Every iterative method starts from a copy of the trained model, runs
//! whole epochs, and after each checked epoch stops as soon as the forget-set
//! MRR is at or below the target. [`Method::Ssd`] is one-shot.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusSplit, Dataset, DocIdx, Label, QueryIdx, Sample};
use crate::error::{Error, Result};
use crate::eval::{evaluate_sets, mrr_forget, mrr_set, SetMrr};
use crate::losses::{abs_delta_loss, build_min_cache, consistent_loss, contrastive_loss};
use crate::partition::{entangled_partners, ForgetSpec, Partition};
use crate::ranker::{hinge_triples, pairwise_hinge, snapshot, stream_rng, GradientBuffer, ScoreModel, Side};
use crate::trace::{Observer, Phase, Silent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    CoCoL,
    Cf,
    Amnesiac,
    NegGrad,
    Ssd,
    BadT,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::CoCoL,
        Method::Cf,
        Method::Amnesiac,
        Method::NegGrad,
        Method::Ssd,
        Method::BadT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CoCoL => "cocol",
            Method::Cf => "cf",
            Method::Amnesiac => "amnesiac",
            Method::NegGrad => "neggrad",
            Method::Ssd => "ssd",
            Method::BadT => "badt",
        }
    }

    fn stream(self) -> u64 {
        100 + self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(alloc::format!("unknown method \"{s}\"")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodParams {
    /// SSD selection threshold α (> 1).
    pub ssd_alpha: f64,
    /// SSD dampening constant λ (> 0).
    pub ssd_lambda: f64,
    /// Hinge margin used by CF, Amnesiac, NegGrad and SSD importances.
    pub margin: f64,
    pub negatives_per_positive: usize,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            ssd_alpha: 10.0,
            ssd_lambda: 1.0,
            margin: 1.0,
            negatives_per_positive: 4,
        }
    }
}

/// Switches for the two retention components of CoCoL.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ablation {
    /// Entangled-partner term of the contrastive loss.
    pub entangled_term: bool,
    /// Disjoint-set phase driven by the consistent loss.
    pub consistent_phase: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation {
            entangled_term: true,
            consistent_phase: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnlearnConfig {
    pub delta_target: f64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub check_every: usize,
    pub method: Method,
    pub params: MethodParams,
    pub ablation: Ablation,
}

impl Default for UnlearnConfig {
    fn default() -> Self {
        UnlearnConfig {
            delta_target: 0.5,
            max_epochs: 200,
            learning_rate: 0.025,
            seed: 7,
            check_every: 1,
            method: Method::CoCoL,
            params: MethodParams::default(),
            ablation: Ablation::default(),
        }
    }
}

impl UnlearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_target > 0.0 && self.delta_target <= 1.0) {
            return Err(Error::Config("delta_target must lie in (0, 1]".into()));
        }
        if self.max_epochs == 0 || self.check_every == 0 {
            return Err(Error::Config("max_epochs and check_every must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be finite and non-negative".into()));
        }
        if self.method == Method::Ssd && !(self.params.ssd_alpha > 1.0 && self.params.ssd_lambda > 0.0) {
            return Err(Error::Config("SSD needs alpha > 1 and lambda > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mrr_forget: f64,
    pub mrr_entangled: f64,
    pub mrr_disjoint: f64,
    pub mrr_test: f64,
    pub wall_time: f64,
}

impl EpochRecord {
    fn new(epoch: usize, m: &SetMrr, wall_time: f64) -> Self {
        EpochRecord {
            epoch,
            mrr_forget: m.forget,
            mrr_entangled: m.entangled,
            mrr_disjoint: m.disjoint,
            mrr_test: m.test,
            wall_time,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnlearnRun {
    pub method: Method,
    pub final_model: ScoreModel,
    pub epochs_run: usize,
    /// The target was met at a check. Never true without the last
    /// trajectory row satisfying it.
    pub stopped_early: bool,
    /// Row 0 is the starting model for iterative methods; SSD has a single
    /// row for the edited model.
    pub trajectory: Vec<EpochRecord>,
    /// Number of scalar parameters SSD dampened.
    pub edits: usize,
}

impl UnlearnRun {
    pub fn final_record(&self) -> &EpochRecord {
        self.trajectory.last().expect("trajectory is never empty")
    }

    /// Wall time of the update epochs, excluding the starting row.
    pub fn epoch_times(&self) -> Vec<f64> {
        match self.method {
            Method::Ssd => self.trajectory.iter().map(|r| r.wall_time).collect(),
            _ => self.trajectory.iter().skip(1).map(|r| r.wall_time).collect(),
        }
    }
}

/// Inputs shared by every strategy.
#[derive(Clone, Copy, Debug)]
pub struct UnlearnTask<'a> {
    pub trained: &'a ScoreModel,
    pub split: &'a CorpusSplit,
    pub partition: &'a Partition,
    pub spec: &'a ForgetSpec,
}

impl<'a> UnlearnTask<'a> {
    pub fn new(trained: &'a ScoreModel, split: &'a CorpusSplit, partition: &'a Partition, spec: &'a ForgetSpec) -> Self {
        UnlearnTask {
            trained,
            split,
            partition,
            spec,
        }
    }

    fn train_set(&self) -> &'a Dataset {
        &self.split.train
    }

    fn metrics(&self, m: &ScoreModel) -> Result<SetMrr> {
        evaluate_sets(m, self.split, self.partition, self.spec)
    }

    fn check(&self) -> Result<()> {
        if self.partition.forget.is_empty() {
            return Err(Error::Infeasible("forget set is empty".into()));
        }
        self.trained.check_dataset(self.train_set())?;
        self.trained.check_dataset(&self.split.test)
    }
}

/// Runs `cfg.method`.
pub fn unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    match cfg.method {
        Method::CoCoL => cocol_unlearn(task, cfg, obs),
        Method::Cf => cf_unlearn(task, cfg, obs),
        Method::Amnesiac => amnesiac_unlearn(task, cfg, obs),
        Method::NegGrad => neggrad_unlearn(task, cfg, obs),
        Method::Ssd => ssd_unlearn(task, cfg, obs),
        Method::BadT => badt_unlearn(task, cfg, obs),
    }
}

struct EpochState<'s> {
    student: &'s mut ScoreModel,
    rng: &'s mut ChaCha8Rng,
    buf: &'s mut GradientBuffer,
}

/// Shared epoch loop with the MRR stopping rule.
fn drive(
    task: &UnlearnTask<'_>,
    cfg: &UnlearnConfig,
    obs: &mut dyn Observer,
    mut epoch_fn: impl FnMut(&mut EpochState<'_>, &mut dyn Observer) -> Result<()>,
) -> Result<UnlearnRun> {
    let mut student = task.trained.clone();
    let mut rng = stream_rng(cfg.seed, cfg.method.stream());
    let mut buf = GradientBuffer::for_model(&student);
    let start = task.metrics(&student)?;
    let mut trajectory = alloc::vec![EpochRecord::new(0, &start, 0.0)];
    if start.forget <= cfg.delta_target {
        return Ok(UnlearnRun {
            method: cfg.method,
            final_model: student,
            epochs_run: 0,
            stopped_early: true,
            trajectory,
            edits: 0,
        });
    }
    let mut stopped_early = false;
    let mut epochs_run = 0;
    for epoch in 1..=cfg.max_epochs {
        let t0 = obs.now();
        let mut st = EpochState {
            student: &mut student,
            rng: &mut rng,
            buf: &mut buf,
        };
        epoch_fn(&mut st, obs)?;
        let wall = obs.now() - t0;
        let m = task.metrics(&student)?;
        trajectory.push(EpochRecord::new(epoch, &m, wall));
        epochs_run = epoch;
        if epoch % cfg.check_every == 0 && m.forget <= cfg.delta_target {
            stopped_early = true;
            break;
        }
    }
    Ok(UnlearnRun {
        method: cfg.method,
        final_model: student,
        epochs_run,
        stopped_early,
        trajectory,
        edits: 0,
    })
}

fn step(st: &mut EpochState<'_>, lr: f64) {
    st.student.apply(st.buf, -lr);
    st.buf.clear();
}

/// Contrastive forget phase over the forget set with sampled entangled
/// partners, then consistent phase over disjoint (positive, negative) pairs.
pub fn cocol_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let p = task.partition;
    let teacher = snapshot(task.trained);
    let cache = build_min_cache(&teacher, d);
    let partners: Vec<Vec<Sample>> = p
        .forget
        .iter()
        .map(|x| entangled_partners(p, x))
        .collect::<Result<_>>()?;
    let d_pos: Vec<Sample> = p.disjoint.iter().filter(|s| s.label.is_positive()).copied().collect();
    let d_neg: Vec<Sample> = p.disjoint.iter().filter(|s| !s.label.is_positive()).copied().collect();
    if cfg.ablation.consistent_phase && (d_pos.is_empty() || d_neg.is_empty()) {
        return Err(Error::Infeasible(
            "disjoint set needs at least one positive and one negative sample".into(),
        ));
    }
    let lr = cfg.learning_rate;
    drive(&task, cfg, obs, |st, obs| {
        let mut order: Vec<usize> = (0..p.forget.len()).collect();
        order.shuffle(st.rng);
        for i in order {
            let x = p.forget[i];
            let partner = if cfg.ablation.entangled_term && !partners[i].is_empty() {
                Some(partners[i][st.rng.gen_range(0..partners[i].len())])
            } else {
                None
            };
            obs.touched(Phase::Forget, x.query, x.doc);
            if let Some(e) = partner {
                obs.touched(Phase::Entangled, e.query, e.doc);
            }
            contrastive_loss(&cache, &teacher, st.student, d, x.pair(), partner.map(|e| e.pair()), st.buf)?;
            step(st, lr);
        }
        if cfg.ablation.consistent_phase {
            let mut positives = d_pos.clone();
            positives.shuffle(st.rng);
            for pos in &positives {
                let neg = d_neg[st.rng.gen_range(0..d_neg.len())];
                obs.touched(Phase::Retain, pos.query, pos.doc);
                obs.touched(Phase::Retain, neg.query, neg.doc);
                consistent_loss(&teacher, st.student, d, pos, &neg, st.buf)?;
                step(st, lr);
            }
        }
        Ok(())
    })
}

type Triple = (QueryIdx, DocIdx, DocIdx);

fn log_triples(obs: &mut dyn Observer, phase: Phase, triples: &[Triple]) {
    for &(q, pos, neg) in triples {
        obs.touched(phase, q, pos);
        obs.touched(phase, q, neg);
    }
}

fn hinge_epoch(st: &mut EpochState<'_>, d: &Dataset, mut triples: Vec<Triple>, margin: f64, lr: f64) {
    triples.shuffle(st.rng);
    for (q, pos, neg) in triples {
        if pairwise_hinge(st.student, d, q, pos, neg, margin, st.buf) > 0.0 {
            step(st, lr);
        }
    }
}

/// Continued pairwise training on the retained samples only.
pub fn cf_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let retained = task.partition.retained(d);
    hinge_triples(&retained, &retained, 1, &mut stream_rng(cfg.seed, 0))?;
    let params = &cfg.params;
    drive(&task, cfg, obs, |st, obs| {
        let triples = hinge_triples(&retained, &retained, params.negatives_per_positive, st.rng)?;
        log_triples(obs, Phase::Retain, &triples);
        hinge_epoch(st, d, triples, params.margin, cfg.learning_rate);
        Ok(())
    })
}

/// Flips every label; applying it twice is the identity.
pub fn swap_labels(samples: &[Sample]) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| Sample {
            label: s.label.swapped(),
            ..*s
        })
        .collect()
}

/// Revised forget set: each forget positive `(q, d⁺)` becomes a negative,
/// and `per_positive` pool negatives `(q, d⁻)` of the same query become
/// positives.
pub fn amnesiac_revised_set(d: &Dataset, p: &Partition, per_positive: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for x in p.forget.iter().filter(|s| s.label.is_positive()) {
        let negatives: Vec<DocIdx> = d
            .pool(x.query)
            .iter()
            .copied()
            .filter(|&doc| !d.label(x.query, doc).is_some_and(|l| l.is_positive()))
            .collect();
        if negatives.is_empty() {
            return Err(Error::Infeasible(alloc::format!(
                "forget query {} has no pool negatives",
                d.query(x.query).id
            )));
        }
        if seen.insert(x.pair()) {
            out.push(Sample {
                label: Label::Negative,
                ..*x
            });
        }
        for _ in 0..per_positive {
            let doc = negatives[rng.gen_range(0..negatives.len())];
            if seen.insert((x.query, doc)) {
                out.push(Sample {
                    query: x.query,
                    doc,
                    label: Label::Positive,
                });
            }
        }
    }
    Ok(out)
}

/// Continued training on the label-swapped forget set plus the entangled set.
pub fn amnesiac_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let p = task.partition;
    let params = &cfg.params;
    let revised = amnesiac_revised_set(d, p, params.negatives_per_positive, &mut stream_rng(cfg.seed, 1))?;
    let retained = p.retained(d);
    let entangled_queries: BTreeSet<QueryIdx> = p.entangled.iter().map(|s| s.query).collect();
    let retained_negatives: Vec<Sample> = retained
        .iter()
        .filter(|s| !s.label.is_positive() && entangled_queries.contains(&s.query))
        .copied()
        .collect();
    let negs_of: BTreeSet<QueryIdx> = retained_negatives.iter().map(|s| s.query).collect();
    let entangled_pos: Vec<Sample> = p
        .entangled
        .iter()
        .filter(|s| s.label.is_positive() && negs_of.contains(&s.query))
        .copied()
        .collect();
    // Every swapped positive is pushed above the demoted forget positive of
    // the same query.
    let mut swapped = Vec::new();
    for s in revised.iter().filter(|s| s.label.is_positive()) {
        for demoted in revised.iter().filter(|r| r.query == s.query && !r.label.is_positive()) {
            swapped.push((s.query, s.doc, demoted.doc));
        }
    }
    drive(&task, cfg, obs, |st, obs| {
        let kept = hinge_triples(&entangled_pos, &retained_negatives, params.negatives_per_positive, st.rng)?;
        log_triples(obs, Phase::Forget, &swapped);
        log_triples(obs, Phase::Retain, &kept);
        let mut all = swapped.clone();
        all.extend(kept);
        hinge_epoch(st, d, all, params.margin, cfg.learning_rate);
        Ok(())
    })
}

/// Forget-positive triples against every labelled negative of the same query.
fn forget_triples(d: &Dataset, p: &Partition) -> Vec<Triple> {
    let mut negs: BTreeMap<QueryIdx, Vec<DocIdx>> = BTreeMap::new();
    for s in d.samples().iter().filter(|s| !s.label.is_positive()) {
        negs.entry(s.query).or_default().push(s.doc);
    }
    let mut out = Vec::new();
    for x in p.forget.iter().filter(|s| s.label.is_positive()) {
        for &n in negs.get(&x.query).map(Vec::as_slice).unwrap_or(&[]) {
            out.push((x.query, x.doc, n));
        }
    }
    out
}

/// Gradient of the active hinge branch `margin − f(q,d⁺) + f(q,d⁻)`.
fn raw_pair_gradient(m: &ScoreModel, d: &Dataset, (q, pos, neg): Triple, buf: &mut GradientBuffer) {
    m.backward(d, q, pos, -1.0, buf);
    m.backward(d, q, neg, 1.0, buf);
}

/// Gradient ascent on the pairwise loss of the forget positives.
pub fn neggrad_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let triples = forget_triples(d, task.partition);
    if triples.is_empty() {
        return Err(Error::Infeasible("no forget positive has a labelled negative".into()));
    }
    drive(&task, cfg, obs, |st, obs| {
        let mut order = triples.clone();
        order.shuffle(st.rng);
        for t in order {
            obs.touched(Phase::Forget, t.0, t.1);
            obs.touched(Phase::Forget, t.0, t.2);
            raw_pair_gradient(st.student, d, t, st.buf);
            st.student.apply(st.buf, cfg.learning_rate);
            st.buf.clear();
        }
        Ok(())
    })
}

/// Mean squared pairwise-loss gradient over `triples`, per parameter.
fn importance(m: &ScoreModel, d: &Dataset, triples: &[Triple]) -> (Vec<f64>, Vec<f64>) {
    let mut iq = alloc::vec![0.0; m.embed_q().len()];
    let mut id = alloc::vec![0.0; m.embed_d().len()];
    let mut buf = GradientBuffer::for_model(m);
    let dim = m.dim();
    for &t in triples {
        raw_pair_gradient(m, d, t, &mut buf);
        for (side, acc) in [(Side::Query, &mut iq), (Side::Doc, &mut id)] {
            let g = buf.grad(side);
            for &r in buf.touched_rows(side) {
                for k in r as usize * dim..(r as usize + 1) * dim {
                    acc[k] += g[k] * g[k];
                }
            }
        }
        buf.clear();
    }
    if !triples.is_empty() {
        let inv = 1.0 / triples.len() as f64;
        iq.iter_mut().chain(id.iter_mut()).for_each(|v| *v *= inv);
    }
    (iq, id)
}

/// Per-parameter dampening factors; returns the number of parameters whose
/// factor is below one.
pub fn ssd_dampen(m: &mut ScoreModel, imp_forget: (&[f64], &[f64]), imp_all: (&[f64], &[f64]), alpha: f64, lambda: f64) -> usize {
    let mut edits = 0;
    for (side, f, s) in [(Side::Query, imp_forget.0, imp_all.0), (Side::Doc, imp_forget.1, imp_all.1)] {
        let table = m.table_mut(side);
        for ((w, &fi), &si) in table.iter_mut().zip(f).zip(s) {
            if fi > alpha * si {
                let beta = (lambda * si / fi).min(1.0);
                if beta < 1.0 {
                    *w *= beta;
                    edits += 1;
                }
            }
        }
    }
    edits
}

/// One-shot selective dampening of parameters far more important to the
/// forget set than to the full training set.
pub fn ssd_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let t0 = obs.now();
    let f_triples = forget_triples(d, task.partition);
    let all = Partition {
        forget: d.samples().to_vec(),
        ..task.partition.clone()
    };
    let s_triples = forget_triples(d, &all);
    let mut model = task.trained.clone();
    let (fq, fd) = importance(&model, d, &f_triples);
    let (sq, sd) = importance(&model, d, &s_triples);
    let edits = ssd_dampen(&mut model, (&fq, &fd), (&sq, &sd), cfg.params.ssd_alpha, cfg.params.ssd_lambda);
    let wall = obs.now() - t0;
    let m = task.metrics(&model)?;
    Ok(UnlearnRun {
        method: Method::Ssd,
        final_model: model,
        epochs_run: 0,
        stopped_early: m.forget <= cfg.delta_target,
        trajectory: alloc::vec![EpochRecord::new(0, &m, wall)],
        edits,
    })
}

/// Distillation from a freshly initialised teacher on the forget set and
/// from the trained model on the retained samples.
pub fn badt_unlearn(task: UnlearnTask<'_>, cfg: &UnlearnConfig, obs: &mut dyn Observer) -> Result<UnlearnRun> {
    cfg.validate()?;
    task.check()?;
    let d = task.train_set();
    let p = task.partition;
    let incompetent = snapshot(&ScoreModel::init(task.trained.vocab_size(), task.trained.dim(), cfg.seed));
    let competent = snapshot(task.trained);
    let mut items: Vec<(Sample, bool)> = p.forget.iter().map(|s| (*s, true)).collect();
    items.extend(p.retained(d).into_iter().map(|s| (s, false)));
    drive(&task, cfg, obs, |st, obs| {
        let mut order = items.clone();
        order.shuffle(st.rng);
        for (s, forget) in order {
            let (teacher, phase) = if forget {
                (&incompetent, Phase::Forget)
            } else {
                (&competent, Phase::Retain)
            };
            obs.touched(phase, s.query, s.doc);
            abs_delta_loss(teacher, st.student, d, s.pair(), st.buf);
            step(st, cfg.learning_rate);
        }
        Ok(())
    })
}

/// Forget-MRR targets derived from a retrained model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Destinations {
    /// Retrained model's forget-set MRR.
    pub d1: f64,
    /// Retrained model's test MRR.
    pub d2: f64,
    /// Half of `d2`.
    pub d3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Destination {
    D1,
    D2,
    D3,
}

impl Destinations {
    pub fn get(&self, which: Destination) -> f64 {
        match which {
            Destination::D1 => self.d1,
            Destination::D2 => self.d2,
            Destination::D3 => self.d3,
        }
    }
}

impl FromStr for Destination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" | "1" => Ok(Destination::D1),
            "d2" | "2" => Ok(Destination::D2),
            "d3" | "3" => Ok(Destination::D3),
            _ => Err(Error::Config(alloc::format!("unknown destination \"{s}\""))),
        }
    }
}

pub fn compute_destinations(retrained: &ScoreModel, split: &CorpusSplit, p: &Partition, spec: &ForgetSpec) -> Result<Destinations> {
    let d1 = mrr_forget(retrained, &split.train, p, spec)?.value;
    let d2 = mrr_set(retrained, &split.test, split.test.samples()).value;
    Ok(Destinations { d1, d2, d3: d2 / 2.0 })
}

/// Convenience wrapper with a silent observer.
pub fn unlearn_silent(task: UnlearnTask<'_>, cfg: &UnlearnConfig) -> Result<UnlearnRun> {
    unlearn(task, cfg, &mut Silent)
}
