//! Dual-embedding scorer with softplus output, its gradients, and pairwise
//! SGD training.
//!
//! A query and a document are each mean-pooled over their token embeddings
//! (separate tables for the two sides) and scored as
//! `softplus(pooled_query · pooled_doc)`, which is strictly positive.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusSplit, Dataset, DocIdx, QueryIdx, Sample};
use crate::error::{Error, Result};
use crate::eval::mrr_set;
use crate::partition::Partition;
use crate::trace::{Observer, Phase, Silent};

/// Half-width of the uniform initialisation interval.
pub const INIT_SCALE: f64 = 0.1;

pub fn softplus(z: f64) -> f64 {
    let v = if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    };
    // exp underflows below z ≈ -745; keep the output strictly positive.
    v.max(f64::MIN_POSITIVE)
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Query,
    Doc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreModel {
    vocab_size: usize,
    dim: usize,
    embed_q: Vec<f64>,
    embed_d: Vec<f64>,
}

impl ScoreModel {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        ScoreModel {
            vocab_size,
            dim,
            embed_q: alloc::vec![0.0; vocab_size * dim],
            embed_d: alloc::vec![0.0; vocab_size * dim],
        }
    }

    /// Fresh initialisation, uniform in `[-INIT_SCALE, INIT_SCALE]`.
    pub fn init(vocab_size: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::zeros(vocab_size, dim);
        for w in m.embed_q.iter_mut().chain(m.embed_d.iter_mut()) {
            *w = rng.gen_range(-INIT_SCALE..=INIT_SCALE);
        }
        m
    }

    pub fn from_parts(vocab_size: usize, dim: usize, embed_q: Vec<f64>, embed_d: Vec<f64>) -> Result<Self> {
        if vocab_size == 0 || dim == 0 {
            return Err(Error::Shape("vocab_size and dim must be positive".into()));
        }
        let n = vocab_size * dim;
        if embed_q.len() != n || embed_d.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} values per table, got {} and {}",
                embed_q.len(),
                embed_d.len()
            )));
        }
        if embed_q.iter().chain(&embed_d).any(|w| !w.is_finite()) {
            return Err(Error::Invalid("non-finite model parameter".into()));
        }
        Ok(ScoreModel {
            vocab_size,
            dim,
            embed_q,
            embed_d,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_q(&self) -> &[f64] {
        &self.embed_q
    }

    pub fn embed_d(&self) -> &[f64] {
        &self.embed_d
    }

    pub fn table(&self, side: Side) -> &[f64] {
        match side {
            Side::Query => &self.embed_q,
            Side::Doc => &self.embed_d,
        }
    }

    pub fn table_mut(&mut self, side: Side) -> &mut [f64] {
        match side {
            Side::Query => &mut self.embed_q,
            Side::Doc => &mut self.embed_d,
        }
    }

    pub fn params_finite(&self) -> bool {
        self.embed_q.iter().chain(&self.embed_d).all(|w| w.is_finite())
    }

    pub fn check_dataset(&self, d: &Dataset) -> Result<()> {
        if d.vocab_size() > self.vocab_size {
            return Err(Error::Shape(format!(
                "dataset vocabulary {} exceeds model vocabulary {}",
                d.vocab_size(),
                self.vocab_size
            )));
        }
        Ok(())
    }

    /// Mean of the token rows of `side`.
    pub fn pooled(&self, side: Side, tokens: &[u32]) -> Vec<f64> {
        let table = self.table(side);
        let mut out = alloc::vec![0.0; self.dim];
        for &t in tokens {
            let row = &table[t as usize * self.dim..(t as usize + 1) * self.dim];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w;
            }
        }
        let inv = 1.0 / tokens.len() as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    pub fn score_tokens(&self, query: &[u32], doc: &[u32]) -> f64 {
        let a = self.pooled(Side::Query, query);
        let b = self.pooled(Side::Doc, doc);
        softplus(dot(&a, &b))
    }

    /// Relevance score of a pair already resolved in `d`.
    pub fn forward(&self, d: &Dataset, q: QueryIdx, doc: DocIdx) -> f64 {
        self.score_tokens(&d.query(q).tokens, &d.doc(doc).tokens)
    }

    pub fn forward_ids(&self, d: &Dataset, query_id: &str, doc_id: &str) -> Result<f64> {
        Ok(self.forward(d, d.query_idx(query_id)?, d.doc_idx(doc_id)?))
    }

    /// Accumulates `upstream · ∂score/∂θ` into `buf`.
    pub fn backward(&self, d: &Dataset, q: QueryIdx, doc: DocIdx, upstream: f64, buf: &mut GradientBuffer) {
        if upstream == 0.0 {
            return;
        }
        let qt = &d.query(q).tokens;
        let dt = &d.doc(doc).tokens;
        let a = self.pooled(Side::Query, qt);
        let b = self.pooled(Side::Doc, dt);
        let g = upstream * sigmoid(dot(&a, &b));
        let gq = g / qt.len() as f64;
        let gd = g / dt.len() as f64;
        for &t in qt {
            buf.add_row(Side::Query, t, gq, &b);
        }
        for &t in dt {
            buf.add_row(Side::Doc, t, gd, &a);
        }
    }

    /// `θ += step · g` over the rows touched in `buf`.
    pub fn apply(&mut self, buf: &GradientBuffer, step: f64) {
        let dim = self.dim;
        for (side, rows) in [(Side::Query, &buf.rows_q), (Side::Doc, &buf.rows_d)] {
            let grad = buf.grad(side);
            let table = self.table_mut(side);
            for &r in rows.iter() {
                let span = r as usize * dim..(r as usize + 1) * dim;
                for (w, g) in table[span.clone()].iter_mut().zip(&grad[span]) {
                    *w += step * g;
                }
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient accumulator shaped like a [`ScoreModel`], tracking which rows
/// were written so clearing and applying cost only the touched rows.
#[derive(Clone, Debug)]
pub struct GradientBuffer {
    dim: usize,
    grad_q: Vec<f64>,
    grad_d: Vec<f64>,
    rows_q: Vec<u32>,
    rows_d: Vec<u32>,
    mark_q: Vec<bool>,
    mark_d: Vec<bool>,
}

impl GradientBuffer {
    pub fn for_model(m: &ScoreModel) -> Self {
        let n = m.vocab_size * m.dim;
        GradientBuffer {
            dim: m.dim,
            grad_q: alloc::vec![0.0; n],
            grad_d: alloc::vec![0.0; n],
            rows_q: Vec::new(),
            rows_d: Vec::new(),
            mark_q: alloc::vec![false; m.vocab_size],
            mark_d: alloc::vec![false; m.vocab_size],
        }
    }

    pub fn matches(&self, m: &ScoreModel) -> bool {
        self.dim == m.dim && self.grad_q.len() == m.embed_q.len()
    }

    fn add_row(&mut self, side: Side, row: u32, scale: f64, v: &[f64]) {
        let dim = self.dim;
        let (grad, rows, mark) = match side {
            Side::Query => (&mut self.grad_q, &mut self.rows_q, &mut self.mark_q),
            Side::Doc => (&mut self.grad_d, &mut self.rows_d, &mut self.mark_d),
        };
        if !mark[row as usize] {
            mark[row as usize] = true;
            rows.push(row);
        }
        let dst = &mut grad[row as usize * dim..(row as usize + 1) * dim];
        for (g, x) in dst.iter_mut().zip(v) {
            *g += scale * x;
        }
    }

    pub fn grad(&self, side: Side) -> &[f64] {
        match side {
            Side::Query => &self.grad_q,
            Side::Doc => &self.grad_d,
        }
    }

    pub fn touched_rows(&self, side: Side) -> &[u32] {
        match side {
            Side::Query => &self.rows_q,
            Side::Doc => &self.rows_d,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.grad_q.iter().chain(&self.grad_d).all(|g| *g == 0.0)
    }

    pub fn clear(&mut self) {
        let dim = self.dim;
        for (grad, rows, mark) in [
            (&mut self.grad_q, &mut self.rows_q, &mut self.mark_q),
            (&mut self.grad_d, &mut self.rows_d, &mut self.mark_d),
        ] {
            for &r in rows.iter() {
                grad[r as usize * dim..(r as usize + 1) * dim].fill(0.0);
                mark[r as usize] = false;
            }
            rows.clear();
        }
    }
}

/// Frozen copy of a model, used as a teacher.
#[derive(Clone, Debug, PartialEq)]
pub struct TeacherSnapshot(ScoreModel);

impl TeacherSnapshot {
    pub fn model(&self) -> &ScoreModel {
        &self.0
    }

    pub fn forward(&self, d: &Dataset, q: QueryIdx, doc: DocIdx) -> f64 {
        self.0.forward(d, q, doc)
    }
}

pub fn snapshot(m: &ScoreModel) -> TeacherSnapshot {
    TeacherSnapshot(m.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub margin: f64,
    pub seed: u64,
    pub negatives_per_positive: usize,
    pub dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 30,
            margin: 1.0,
            seed: 7,
            negatives_per_positive: 4,
            dim: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("margin must be positive".into()));
        }
        if self.negatives_per_positive == 0 || self.dim == 0 {
            return Err(Error::Config("negatives_per_positive and dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainEpoch {
    pub epoch: usize,
    pub loss: f64,
    pub mrr: f64,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trained {
    pub model: ScoreModel,
    pub trajectory: Vec<TrainEpoch>,
}

/// `max(0, margin − f(q,d⁺) + f(q,d⁻))`; accumulates its (sub)gradient
/// into `buf` when the hinge is active.
pub fn pairwise_hinge(
    m: &ScoreModel,
    d: &Dataset,
    q: QueryIdx,
    pos: DocIdx,
    neg: DocIdx,
    margin: f64,
    buf: &mut GradientBuffer,
) -> f64 {
    let raw = margin - m.forward(d, q, pos) + m.forward(d, q, neg);
    if raw > 0.0 {
        m.backward(d, q, pos, -1.0, buf);
        m.backward(d, q, neg, 1.0, buf);
        raw
    } else {
        0.0
    }
}

/// Training triples: every positive of `samples` paired with
/// `per_positive` negatives of the same query drawn (with replacement) from
/// `negatives`. Queries with positives but no negatives are an error.
pub(crate) fn hinge_triples(
    positives: &[Sample],
    negatives: &[Sample],
    per_positive: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(QueryIdx, DocIdx, DocIdx)>> {
    let mut by_query: BTreeMap<QueryIdx, Vec<DocIdx>> = BTreeMap::new();
    for s in negatives.iter().filter(|s| !s.label.is_positive()) {
        by_query.entry(s.query).or_default().push(s.doc);
    }
    let mut out = Vec::with_capacity(positives.len() * per_positive);
    for s in positives.iter().filter(|s| s.label.is_positive()) {
        let negs = by_query.get(&s.query).ok_or_else(|| {
            Error::Infeasible(format!("query #{} has positives but no negatives", s.query.0))
        })?;
        for _ in 0..per_positive {
            out.push((s.query, s.doc, negs[rng.gen_range(0..negs.len())]));
        }
    }
    Ok(out)
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pairwise-hinge SGD of `model` on `samples` (a subset of `d`'s samples).
pub fn fit(
    d: &Dataset,
    samples: &[Sample],
    mut model: ScoreModel,
    cfg: &TrainConfig,
    obs: &mut dyn Observer,
) -> Result<Trained> {
    cfg.validate()?;
    model.check_dataset(d)?;
    let mut rng = stream_rng(cfg.seed, 1);
    let mut buf = GradientBuffer::for_model(&model);
    let mut trajectory = Vec::with_capacity(cfg.epochs);
    // Surface infeasible data before the first epoch, even when epochs = 0.
    hinge_triples(samples, samples, 1, &mut stream_rng(cfg.seed, 2))?;
    for epoch in 1..=cfg.epochs {
        let start = obs.now();
        let mut triples = hinge_triples(samples, samples, cfg.negatives_per_positive, &mut rng)?;
        triples.shuffle(&mut rng);
        let mut total = 0.0;
        for &(q, pos, neg) in &triples {
            obs.touched(Phase::Train, q, pos);
            obs.touched(Phase::Train, q, neg);
            let loss = pairwise_hinge(&model, d, q, pos, neg, cfg.margin, &mut buf);
            if loss > 0.0 {
                model.apply(&buf, -cfg.learning_rate);
                buf.clear();
            }
            total += loss;
        }
        let wall_time = obs.now() - start;
        let loss = if triples.is_empty() { 0.0 } else { total / triples.len() as f64 };
        trajectory.push(TrainEpoch {
            epoch,
            loss,
            mrr: mrr_set(&model, d, samples).value,
            wall_time,
        });
    }
    Ok(Trained { model, trajectory })
}

/// Trains a fresh model on the full training set.
pub fn train(split: &CorpusSplit, cfg: &TrainConfig) -> Result<Trained> {
    train_observed(split, cfg, &mut Silent)
}

pub fn train_observed(split: &CorpusSplit, cfg: &TrainConfig, obs: &mut dyn Observer) -> Result<Trained> {
    let init = ScoreModel::init(split.train.vocab_size(), cfg.dim, cfg.seed);
    fit(&split.train, split.train.samples(), init, cfg, obs)
}

/// Trains a fresh model (same initialisation as [`train`]) on the retained
/// samples only.
pub fn retrain(split: &CorpusSplit, cfg: &TrainConfig, p: &Partition) -> Result<Trained> {
    retrain_observed(split, cfg, p, &mut Silent)
}

pub fn retrain_observed(
    split: &CorpusSplit,
    cfg: &TrainConfig,
    p: &Partition,
    obs: &mut dyn Observer,
) -> Result<Trained> {
    let init = ScoreModel::init(split.train.vocab_size(), cfg.dim, cfg.seed);
    fit(&split.train, &p.retained(&split.train), init, cfg, obs)
}
