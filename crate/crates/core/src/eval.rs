//! Ranking evaluation: pool ranking, reciprocal-rank metrics under both
//! removal semantics, timing ratios and score-distribution summaries.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::{CorpusSplit, Dataset, DocIdx, QueryIdx, Sample};
use crate::engine::UnlearnRun;
use crate::error::{Error, Result};
use crate::partition::{ForgetSpec, Partition, RemovalKind};
use crate::ranker::{ScoreModel, Side};

/// A query's pool sorted by descending score, ties by ascending doc id.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub query: QueryIdx,
    pub docs: Vec<DocIdx>,
    pub scores: Vec<f64>,
}

impl RankedList {
    /// 1-based rank of the first document satisfying `pred`.
    pub fn first_rank(&self, mut pred: impl FnMut(DocIdx) -> bool) -> Option<usize> {
        self.docs.iter().position(|&d| pred(d)).map(|i| i + 1)
    }
}

pub fn rank(m: &ScoreModel, d: &Dataset, q: QueryIdx) -> Result<RankedList> {
    let pool = d.pool(q);
    if pool.is_empty() {
        return Err(Error::Invalid(alloc::format!(
            "query {} has an empty pool",
            d.query(q).id
        )));
    }
    let a = m.pooled(Side::Query, &d.query(q).tokens);
    let mut scored: Vec<(f64, DocIdx)> = pool
        .iter()
        .map(|&doc| {
            let b = m.pooled(Side::Doc, &d.doc(doc).tokens);
            (crate::ranker::softplus(crate::ranker::dot(&a, &b)), doc)
        })
        .collect();
    scored.sort_by(|x, y| match y.0.total_cmp(&x.0) {
        Ordering::Equal => d.doc(x.1).id.cmp(&d.doc(y.1).id),
        o => o,
    });
    Ok(RankedList {
        query: q,
        docs: scored.iter().map(|s| s.1).collect(),
        scores: scored.iter().map(|s| s.0).collect(),
    })
}

pub fn rank_id(m: &ScoreModel, d: &Dataset, query_id: &str) -> Result<RankedList> {
    rank(m, d, d.query_idx(query_id)?)
}

/// Mean reciprocal rank plus how many queries were scored or skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MrrOutcome {
    pub value: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl MrrOutcome {
    fn from_reciprocals(rr: &[f64], skipped: usize) -> Self {
        let value = if rr.is_empty() {
            0.0
        } else {
            rr.iter().sum::<f64>() / rr.len() as f64
        };
        MrrOutcome {
            value,
            evaluated: rr.len(),
            skipped,
        }
    }

    /// True when no query could be scored.
    pub fn is_empty(&self) -> bool {
        self.evaluated == 0
    }
}

/// MRR over the forget queries. Under query removal the target is the first
/// positive document of the query; under document removal it is the first
/// document marked for removal. Queries with no target in their pool are
/// skipped.
pub fn mrr_forget(m: &ScoreModel, d: &Dataset, p: &Partition, spec: &ForgetSpec) -> Result<MrrOutcome> {
    if p.forget_queries.is_empty() {
        return Err(Error::Config("forget set has no queries".into()));
    }
    let removed = spec.removed_docs(d)?;
    let mut rr = Vec::with_capacity(p.forget_queries.len());
    let mut skipped = 0;
    for &q in &p.forget_queries {
        let ranked = rank(m, d, q)?;
        let r = match spec.kind {
            RemovalKind::QueryRemoval => {
                ranked.first_rank(|doc| d.label(q, doc).is_some_and(|l| l.is_positive()))
            }
            RemovalKind::DocumentRemoval => ranked.first_rank(|doc| removed.contains(&doc)),
        };
        match r {
            Some(r) => rr.push(1.0 / r as f64),
            None => skipped += 1,
        }
    }
    Ok(MrrOutcome::from_reciprocals(&rr, skipped))
}

/// MRR over the distinct queries of `samples`; relevant documents are the
/// positives inside `samples`, ranked against the query's full pool.
pub fn mrr_set(m: &ScoreModel, d: &Dataset, samples: &[Sample]) -> MrrOutcome {
    let mut relevant: BTreeMap<QueryIdx, BTreeSet<DocIdx>> = BTreeMap::new();
    for s in samples {
        let e = relevant.entry(s.query).or_default();
        if s.label.is_positive() {
            e.insert(s.doc);
        }
    }
    let mut rr = Vec::with_capacity(relevant.len());
    let mut skipped = 0;
    for (q, docs) in relevant {
        if docs.is_empty() || d.pool(q).is_empty() {
            skipped += 1;
            continue;
        }
        let ranked = rank(m, d, q).expect("pool checked non-empty");
        match ranked.first_rank(|doc| docs.contains(&doc)) {
            Some(r) => rr.push(1.0 / r as f64),
            None => skipped += 1,
        }
    }
    MrrOutcome::from_reciprocals(&rr, skipped)
}

/// Per-set MRR of one model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SetMrr {
    pub forget: f64,
    pub entangled: f64,
    pub disjoint: f64,
    pub test: f64,
    pub forget_skipped: usize,
}

pub fn evaluate_sets(m: &ScoreModel, split: &CorpusSplit, p: &Partition, spec: &ForgetSpec) -> Result<SetMrr> {
    let forget = mrr_forget(m, &split.train, p, spec)?;
    Ok(SetMrr {
        forget: forget.value,
        entangled: mrr_set(m, &split.train, &p.entangled).value,
        disjoint: mrr_set(m, &split.train, &p.disjoint).value,
        test: mrr_set(m, &split.test, split.test.samples()).value,
        forget_skipped: forget.skipped,
    })
}

/// `1 − |forget MRR of the unlearned model − test MRR of the retrained model|`.
/// Not clamped.
pub fn normalized_forget_value(unlearn_forget_mrr: f64, retrain_test_mrr: f64) -> f64 {
    1.0 - (unlearn_forget_mrr - retrain_test_mrr).abs()
}

pub fn normalized_forget(run: &UnlearnRun, retrain_report: &MetricsReport) -> f64 {
    normalized_forget_value(run.final_record().mrr_forget, retrain_report.mrr_test)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub normalized_epoch_duration: f64,
    pub total_unlearn_time: f64,
}

pub fn timing_metrics(train_epoch_times: &[f64], unlearn_epoch_times: &[f64], epochs_run: usize) -> Result<Timing> {
    if train_epoch_times.is_empty() || unlearn_epoch_times.is_empty() {
        return Err(Error::Config("timing needs at least one train and one unlearn epoch".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let train = mean(train_epoch_times);
    if train <= 0.0 {
        return Err(Error::Infeasible("mean training epoch time is not positive".into()));
    }
    let normalized = mean(unlearn_epoch_times) / train;
    Ok(Timing {
        normalized_epoch_duration: normalized,
        total_unlearn_time: normalized * epochs_run as f64,
    })
}

/// Everything reported for one model on one (split, partition).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub method: String,
    pub mrr_forget: f64,
    pub mrr_entangled: f64,
    pub mrr_disjoint: f64,
    pub mrr_test: f64,
    pub forget_skipped: usize,
    pub normalized_forget: Option<f64>,
    pub normalized_epoch_duration: Option<f64>,
    pub total_unlearn_time: Option<f64>,
    pub epochs_run: usize,
    pub edits: usize,
}

impl MetricsReport {
    pub fn from_sets(method: impl Into<String>, s: &SetMrr) -> Self {
        MetricsReport {
            method: method.into(),
            mrr_forget: s.forget,
            mrr_entangled: s.entangled,
            mrr_disjoint: s.disjoint,
            mrr_test: s.test,
            forget_skipped: s.forget_skipped,
            ..Default::default()
        }
    }

    /// Fills `normalized_forget` against a retrained model's report.
    pub fn with_reference(mut self, retrain: &MetricsReport) -> Self {
        self.normalized_forget = Some(normalized_forget_value(self.mrr_forget, retrain.mrr_test));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreDistribution {
    pub model: String,
    pub set: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// 10th, 20th, …, 90th percentiles (linear interpolation).
    pub deciles: [f64; 9],
}

impl ScoreDistribution {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn score_distribution(
    models: &[(&str, &ScoreModel)],
    d: &Dataset,
    sets: &[(&str, &[Sample])],
) -> Vec<ScoreDistribution> {
    let mut out = Vec::with_capacity(models.len() * sets.len());
    for (name, m) in models {
        for (set, samples) in sets {
            let mut scores: Vec<f64> = samples.iter().map(|s| m.forward(d, s.query, s.doc)).collect();
            scores.sort_by(f64::total_cmp);
            let (min, max, mean, deciles) = if scores.is_empty() {
                (0.0, 0.0, 0.0, [0.0; 9])
            } else {
                let mut dec = [0.0; 9];
                for (k, v) in dec.iter_mut().enumerate() {
                    *v = quantile(&scores, (k + 1) as f64 / 10.0);
                }
                (
                    scores[0],
                    scores[scores.len() - 1],
                    scores.iter().sum::<f64>() / scores.len() as f64,
                    dec,
                )
            };
            out.push(ScoreDistribution {
                model: String::from(*name),
                set: String::from(*set),
                count: scores.len(),
                min,
                max,
                mean,
                deciles,
            });
        }
    }
    out
}
