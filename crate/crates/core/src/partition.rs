//! Forget / entangled / disjoint split of a dataset under a removal request.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::corpus::{Dataset, DocIdx, QueryIdx, Sample};
use crate::error::{Error, Result};
use crate::ranker::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RemovalKind {
    QueryRemoval,
    DocumentRemoval,
}

/// A removal request: a set of query ids or a set of document ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgetSpec {
    pub kind: RemovalKind,
    pub ids: BTreeSet<String>,
}

impl ForgetSpec {
    pub fn queries<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ForgetSpec {
            kind: RemovalKind::QueryRemoval,
            ids: ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn documents<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ForgetSpec {
            kind: RemovalKind::DocumentRemoval,
            ids: ids.into_iter().map(Into::into).collect(),
        }
    }

    /// Document indices of `D′`. Empty for query removal.
    pub fn removed_docs(&self, d: &Dataset) -> Result<BTreeSet<DocIdx>> {
        match self.kind {
            RemovalKind::QueryRemoval => Ok(BTreeSet::new()),
            RemovalKind::DocumentRemoval => self.ids.iter().map(|id| d.doc_idx(id)).collect(),
        }
    }

    fn validate(&self, d: &Dataset) -> Result<()> {
        if self.ids.is_empty() {
            return Err(Error::Config("forget spec lists no ids".into()));
        }
        for id in &self.ids {
            match self.kind {
                RemovalKind::QueryRemoval => d.query_idx(id).map(|_| ())?,
                RemovalKind::DocumentRemoval => d.doc_idx(id).map(|_| ())?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub kind: RemovalKind,
    pub forget: Vec<Sample>,
    pub entangled: Vec<Sample>,
    pub disjoint: Vec<Sample>,
    /// Distinct queries of the forget set.
    pub forget_queries: BTreeSet<QueryIdx>,
    /// Distinct documents of the forget set.
    pub forget_docs: BTreeSet<DocIdx>,
}

impl Partition {
    /// Retained samples (entangled and disjoint) in dataset order.
    pub fn retained(&self, d: &Dataset) -> Vec<Sample> {
        let forget: BTreeSet<_> = self.forget.iter().map(Sample::pair).collect();
        d.samples()
            .iter()
            .filter(|s| !forget.contains(&s.pair()))
            .copied()
            .collect()
    }

    pub fn is_forget(&self, s: &Sample) -> bool {
        self.forget.iter().any(|f| f.pair() == s.pair())
    }

    pub fn len(&self) -> usize {
        self.forget.len() + self.entangled.len() + self.disjoint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn partition(d: &Dataset, spec: &ForgetSpec) -> Result<Partition> {
    spec.validate(d)?;
    let in_forget = |s: &Sample| match spec.kind {
        RemovalKind::QueryRemoval => spec.ids.contains(&d.query(s.query).id),
        RemovalKind::DocumentRemoval => spec.ids.contains(&d.doc(s.doc).id),
    };
    let forget: Vec<Sample> = d.samples().iter().filter(|s| in_forget(s)).copied().collect();
    if !d.samples().is_empty() && forget.len() == d.samples().len() {
        return Err(Error::Config(
            "removal request covers every sample; nothing would be retained".into(),
        ));
    }
    let forget_queries: BTreeSet<QueryIdx> = forget.iter().map(|s| s.query).collect();
    let forget_docs: BTreeSet<DocIdx> = forget.iter().map(|s| s.doc).collect();
    let mut entangled = Vec::new();
    let mut disjoint = Vec::new();
    for s in d.samples().iter().filter(|s| !in_forget(s)) {
        if forget_queries.contains(&s.query) || forget_docs.contains(&s.doc) {
            entangled.push(*s);
        } else {
            disjoint.push(*s);
        }
    }
    Ok(Partition {
        kind: spec.kind,
        forget,
        entangled,
        disjoint,
        forget_queries,
        forget_docs,
    })
}

/// Draws ids of `kind` in seeded random order until the positives they cover
/// reach `round(fraction × #positives)` (at least one id).
pub fn sample_forget_spec(d: &Dataset, kind: RemovalKind, fraction: f64, seed: u64) -> Result<ForgetSpec> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("removal fraction {fraction} outside (0, 1)")));
    }
    let mut cover: BTreeMap<u32, usize> = BTreeMap::new();
    for s in d.samples().iter().filter(|s| s.label.is_positive()) {
        let key = match kind {
            RemovalKind::QueryRemoval => s.query.0,
            RemovalKind::DocumentRemoval => s.doc.0,
        };
        *cover.entry(key).or_default() += 1;
    }
    let total: usize = cover.values().sum();
    if total == 0 {
        return Err(Error::Infeasible("dataset has no positive samples".into()));
    }
    let goal = (libm::round(fraction * total as f64) as usize).max(1);
    let mut keys: Vec<(u32, usize)> = cover.into_iter().collect();
    keys.shuffle(&mut stream_rng(seed, 3));
    let mut covered = 0;
    let mut ids = BTreeSet::new();
    for (k, n) in keys {
        if covered >= goal {
            break;
        }
        covered += n;
        ids.insert(match kind {
            RemovalKind::QueryRemoval => d.query(QueryIdx(k)).id.clone(),
            RemovalKind::DocumentRemoval => d.doc(DocIdx(k)).id.clone(),
        });
    }
    let spec = ForgetSpec { kind, ids };
    // Removing every query would leave nothing to retain.
    partition(d, &spec)?;
    Ok(spec)
}

/// Entangled samples sharing a query or a document with forget sample `x`.
pub fn entangled_partners(p: &Partition, x: &Sample) -> Result<Vec<Sample>> {
    if !p.is_forget(x) {
        return Err(Error::Config("sample is not in the forget set".into()));
    }
    Ok(p.entangled
        .iter()
        .filter(|e| e.query == x.query || e.doc == x.doc)
        .copied()
        .collect())
}
