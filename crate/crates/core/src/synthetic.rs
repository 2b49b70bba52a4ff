//! Deterministic synthetic retrieval corpora.
//!
//! Each query owns a planted block of tokens. Its positive documents carry
//! that block (plus topic tokens and noise), so relevance is learnable from
//! token overlap.
//! A configurable share of positive documents is relevant to two queries at
//! once, which is what makes entangled sets non-empty under removal.
//! Negatives are drawn only from documents that contain none of the query's
//! planted tokens.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusSplit, Dataset, DatasetBuilder, Label};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_queries: usize,
    pub n_docs: usize,
    pub vocab_size: usize,
    pub positives_per_query: usize,
    pub pool_size: usize,
    /// Fraction of positive documents relevant to two queries.
    pub entanglement_rate: f64,
    pub test_fraction: f64,
    pub seed: u64,
    /// Planted tokens per query.
    pub block_len: usize,
    /// Extra random tokens appended to each query.
    pub query_noise: usize,
    /// Random tokens in every document besides planted blocks.
    pub doc_noise: usize,
    /// Pool negatives that also get an explicit negative label.
    pub labelled_negatives: usize,
    /// Size of the token range `[0, common_vocab)` that noise tokens are
    /// drawn from; planted blocks use the rest. 0 draws noise from the
    /// whole vocabulary.
    pub common_vocab: usize,
    /// Queries are dealt round-robin into this many topics. Queries, their
    /// positives and filler documents carry topic tokens next to the planted
    /// block, so topic tokens alone do not separate positives. 0 disables.
    pub n_topics: usize,
    pub topic_len: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_queries: 64,
            n_docs: 256,
            vocab_size: 512,
            positives_per_query: 2,
            pool_size: 100,
            entanglement_rate: 0.5,
            test_fraction: 0.2,
            seed: 7,
            block_len: 3,
            query_noise: 0,
            doc_noise: 1,
            labelled_negatives: 8,
            common_vocab: 64,
            n_topics: 8,
            topic_len: 1,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_queries == 0 || self.n_docs == 0 || self.vocab_size == 0 {
            return bad("n_queries, n_docs and vocab_size must be positive");
        }
        if self.positives_per_query == 0 {
            return bad("positives_per_query must be positive");
        }
        if self.pool_size < self.positives_per_query {
            return bad("pool_size must be at least positives_per_query");
        }
        if !(0.0..=1.0).contains(&self.entanglement_rate) {
            return bad("entanglement_rate must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return bad("test_fraction must lie in [0, 1)");
        }
        if self.common_vocab >= self.vocab_size {
            return bad("common_vocab must be smaller than vocab_size");
        }
        let topic_tokens = self.n_topics * self.topic_len;
        if self.block_len == 0 || self.common_vocab + topic_tokens + self.block_len > self.vocab_size {
            return bad("common, topic and block tokens do not fit in the vocabulary");
        }
        if self.labelled_negatives > self.pool_size - self.positives_per_query {
            return bad("labelled_negatives exceeds the negatives available in a pool");
        }
        Ok(())
    }
}

/// Number of shared documents `s` and single-query documents `u` such that
/// `2s + u` fills every positive slot and `s / (s + u)` approximates `rate`.
fn shared_split(slots: usize, rate: f64) -> (usize, usize) {
    if slots < 2 || rate <= 0.0 {
        return (0, slots);
    }
    let shared = libm::round(slots as f64 * rate / (1.0 + rate)) as usize;
    let shared = shared.min(slots / 2);
    (shared, slots - 2 * shared)
}

fn id(prefix: char, i: usize, n: usize) -> String {
    let width = format!("{}", n.saturating_sub(1)).len().max(3);
    format!("{prefix}{i:0width$}")
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<CorpusSplit> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nq = cfg.n_queries;
    let k = cfg.positives_per_query;
    let vocab = cfg.vocab_size as u32;
    let common = cfg.common_vocab as u32;
    let noise_hi = if common == 0 { vocab } else { common };

    let mut planted: Vec<u32> = (common..vocab).collect();
    planted.shuffle(&mut rng);
    let (topic_pool, specific) = planted.split_at_mut(cfg.n_topics * cfg.topic_len);
    let topic_pool: Vec<u32> = topic_pool.to_vec();
    let topic_of = |i: usize| -> &[u32] {
        if cfg.n_topics == 0 {
            &[]
        } else {
            let t = i % cfg.n_topics;
            &topic_pool[t * cfg.topic_len..(t + 1) * cfg.topic_len]
        }
    };
    let blocks: Vec<Vec<u32>> = (0..nq)
        .map(|_| {
            let (chosen, _) = specific.partial_shuffle(&mut rng, cfg.block_len);
            let mut b = chosen.to_vec();
            b.sort_unstable();
            b
        })
        .collect();

    // Assign positive slots to documents: shared documents take two slots
    // from distinct queries, the rest take one.
    let mut slots: Vec<usize> = (0..nq).flat_map(|q| core::iter::repeat_n(q, k)).collect();
    slots.shuffle(&mut rng);
    let (n_shared, _) = if nq < 2 {
        (0, slots.len())
    } else {
        shared_split(slots.len(), cfg.entanglement_rate)
    };
    let mut owners: Vec<Vec<usize>> = Vec::new();
    let mut rest = slots;
    for _ in 0..n_shared {
        let a = rest.pop().expect("slot count checked");
        match rest.iter().rposition(|&q| q != a) {
            Some(pos) => {
                let b = rest.remove(pos);
                owners.push(alloc::vec![a, b]);
            }
            None => {
                rest.push(a);
                break;
            }
        }
    }
    owners.extend(rest.into_iter().map(|q| alloc::vec![q]));
    owners.sort();
    // A query may have drawn the same shared partner twice; merge so each
    // (query, doc) pair is unique.
    for o in owners.iter_mut() {
        o.sort_unstable();
        o.dedup();
    }

    let n_pos_docs = owners.len();
    if n_pos_docs > cfg.n_docs {
        return Err(Error::Config(format!(
            "{n_pos_docs} positive documents required but n_docs = {}",
            cfg.n_docs
        )));
    }

    let noise = |rng: &mut ChaCha8Rng, n: usize| -> Vec<u32> {
        (0..n).map(|_| rng.gen_range(0..noise_hi)).collect()
    };

    let n_test = libm::round(nq as f64 * cfg.test_fraction) as usize;
    let mut order: Vec<usize> = (0..nq).collect();
    order.shuffle(&mut rng);
    let mut test_q: Vec<usize> = order[..n_test].to_vec();
    let mut train_q: Vec<usize> = order[n_test..].to_vec();
    test_q.sort_unstable();
    train_q.sort_unstable();
    // Filler documents borrow planted-range tokens that no training query
    // owns, so training never sees a query's own block on a negative.
    let train_owned: BTreeSet<u32> = train_q.iter().flat_map(|&q| blocks[q].iter().copied()).collect();
    let distractors: Vec<u32> = specific.iter().copied().filter(|t| !train_owned.contains(t)).collect();
    if cfg.block_len > 0 && distractors.is_empty() {
        return Err(Error::Infeasible("no planted-range tokens left for filler documents".into()));
    }

    let mut doc_tokens: Vec<Vec<u32>> = Vec::with_capacity(cfg.n_docs);
    let mut positives: Vec<Vec<usize>> = alloc::vec![Vec::new(); nq];
    for (di, o) in owners.iter().enumerate() {
        let mut toks = Vec::new();
        for &q in o {
            toks.extend_from_slice(&blocks[q]);
            positives[q].push(di);
        }
        let mut topics: Vec<u32> = o.iter().flat_map(|&q| topic_of(q).iter().copied()).collect();
        topics.sort_unstable();
        topics.dedup();
        toks.extend(topics);
        toks.extend(noise(&mut rng, cfg.doc_noise));
        doc_tokens.push(toks);
    }
    // Filler documents look like single-owner positives of a random topic,
    // with distractor tokens in place of a block.
    for _ in n_pos_docs..cfg.n_docs {
        let mut toks = if cfg.n_topics == 0 {
            Vec::new()
        } else {
            topic_of(rng.gen_range(0..cfg.n_topics)).to_vec()
        };
        toks.extend((0..cfg.block_len).map(|_| distractors[rng.gen_range(0..distractors.len())]));
        toks.extend(noise(&mut rng, cfg.doc_noise));
        doc_tokens.push(toks);
    }
    let mut query_tokens: Vec<Vec<u32>> = Vec::with_capacity(nq);
    for (q, block) in blocks.iter().enumerate() {
        let mut t = block.clone();
        t.extend_from_slice(topic_of(q));
        t.extend(noise(&mut rng, cfg.query_noise));
        query_tokens.push(t);
    }

    let doc_sets: Vec<BTreeSet<u32>> = doc_tokens.iter().map(|t| t.iter().copied().collect()).collect();
    let mut pools: Vec<Vec<usize>> = Vec::with_capacity(nq);
    for q in 0..nq {
        let block: BTreeSet<u32> = blocks[q].iter().copied().collect();
        // Negatives are filler documents: no pool holds another query's
        // positive.
        let candidates: Vec<usize> = (n_pos_docs..cfg.n_docs)
            .filter(|d| doc_sets[*d].is_disjoint(&block))
            .collect();
        let need = cfg.pool_size - positives[q].len();
        if candidates.len() < need {
            return Err(Error::Config(format!(
                "query {q} has {} negative candidates, pool needs {need}",
                candidates.len()
            )));
        }
        let mut cand = candidates;
        let (neg, _) = cand.partial_shuffle(&mut rng, need);
        let mut pool = positives[q].clone();
        pool.extend_from_slice(neg);
        pool.shuffle(&mut rng);
        pools.push(pool);
    }


    let build = |members: &[usize]| -> Result<Dataset> {
        let mut b = DatasetBuilder::new(cfg.vocab_size);
        for (d, toks) in doc_tokens.iter().enumerate() {
            b.document(id('d', d, cfg.n_docs), toks.clone())?;
        }
        for &q in members {
            b.query(id('q', q, nq), query_tokens[q].clone())?;
        }
        for &q in members {
            let qid = id('q', q, nq);
            for &d in &pools[q] {
                b.pool_entry(&qid, &id('d', d, cfg.n_docs))?;
            }
            for &d in &positives[q] {
                b.sample(&qid, &id('d', d, cfg.n_docs), Label::Positive)?;
            }
            let mut labelled = 0;
            for &d in &pools[q] {
                if labelled == cfg.labelled_negatives {
                    break;
                }
                if d >= n_pos_docs {
                    b.sample(&qid, &id('d', d, cfg.n_docs), Label::Negative)?;
                    labelled += 1;
                }
            }
            if labelled < cfg.labelled_negatives {
                return Err(Error::Infeasible(format!(
                    "pool of query {qid} holds only {labelled} filler documents"
                )));
            }
        }
        b.build()
    };
    CorpusSplit::new(build(&train_q)?, build(&test_q)?)
}
