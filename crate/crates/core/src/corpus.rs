//! Queries, documents, labelled samples and candidate pools.
//!
//! A [`Dataset`] is immutable once built. Every sample refers to its query and
//! document by dense index, and every sample's document sits in its query's
//! pool, so ranking code can work over pools without re-validating ids.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryIdx(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocIdx(pub u32);

impl QueryIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl DocIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }

    pub fn swapped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// A labelled query–document pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sample {
    pub query: QueryIdx,
    pub doc: DocIdx,
    pub label: Label,
}

impl Sample {
    pub fn pair(&self) -> (QueryIdx, DocIdx) {
        (self.query, self.doc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub tokens: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    vocab_size: usize,
    queries: Vec<Query>,
    documents: Vec<Document>,
    samples: Vec<Sample>,
    pools: Vec<Vec<DocIdx>>,
    query_ids: BTreeMap<String, QueryIdx>,
    doc_ids: BTreeMap<String, DocIdx>,
    labels: BTreeMap<(QueryIdx, DocIdx), Label>,
}

impl Dataset {
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn query(&self, q: QueryIdx) -> &Query {
        &self.queries[q.index()]
    }

    pub fn doc(&self, d: DocIdx) -> &Document {
        &self.documents[d.index()]
    }

    /// Candidate pool of `q`, in pool order. Empty when the query has no pool.
    pub fn pool(&self, q: QueryIdx) -> &[DocIdx] {
        &self.pools[q.index()]
    }

    pub fn query_idx(&self, id: &str) -> Result<QueryIdx> {
        self.query_ids.get(id).copied().ok_or_else(|| Error::DanglingId {
            kind: "query",
            id: id.to_string(),
        })
    }

    pub fn doc_idx(&self, id: &str) -> Result<DocIdx> {
        self.doc_ids.get(id).copied().ok_or_else(|| Error::DanglingId {
            kind: "document",
            id: id.to_string(),
        })
    }

    pub fn label(&self, q: QueryIdx, d: DocIdx) -> Option<Label> {
        self.labels.get(&(q, d)).copied()
    }

    /// Looks up a sample by string ids.
    pub fn sample(&self, query_id: &str, doc_id: &str) -> Result<Sample> {
        let query = self.query_idx(query_id)?;
        let doc = self.doc_idx(doc_id)?;
        let label = self.label(query, doc).ok_or_else(|| {
            Error::Invalid(format!("no sample for pair ({query_id}, {doc_id})"))
        })?;
        Ok(Sample { query, doc, label })
    }

    /// Distinct queries that have at least one sample, ascending by index.
    pub fn sampled_queries(&self) -> Vec<QueryIdx> {
        self.samples
            .iter()
            .map(|s| s.query)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Re-checks every dataset invariant. Builders already enforce these;
    /// this is the standalone validation pass.
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 {
            return Err(Error::Invalid("vocab_size must be positive".into()));
        }
        for q in &self.queries {
            check_tokens("query", &q.id, &q.tokens, self.vocab_size)?;
        }
        for d in &self.documents {
            check_tokens("document", &d.id, &d.tokens, self.vocab_size)?;
        }
        let mut seen = BTreeSet::new();
        for s in &self.samples {
            if s.query.index() >= self.queries.len() || s.doc.index() >= self.documents.len() {
                return Err(Error::Invalid("sample index out of range".into()));
            }
            if !seen.insert(s.pair()) {
                return Err(Error::DuplicatePair {
                    query: self.query(s.query).id.clone(),
                    doc: self.doc(s.doc).id.clone(),
                });
            }
        }
        for (qi, pool) in self.pools.iter().enumerate() {
            let mut uniq = BTreeSet::new();
            for d in pool {
                if d.index() >= self.documents.len() {
                    return Err(Error::Invalid("pool index out of range".into()));
                }
                if !uniq.insert(*d) {
                    return Err(Error::Invalid(format!(
                        "document {} listed twice in pool of {}",
                        self.doc(*d).id,
                        self.queries[qi].id
                    )));
                }
            }
        }
        for s in &self.samples {
            if !self.pool(s.query).contains(&s.doc) {
                let what = if s.label.is_positive() {
                    "positive document"
                } else {
                    "document"
                };
                return Err(Error::Invalid(format!(
                    "{what} {} missing from pool of query {}",
                    self.doc(s.doc).id,
                    self.query(s.query).id
                )));
            }
        }
        Ok(())
    }
}

fn check_tokens(kind: &str, id: &str, tokens: &[u32], vocab_size: usize) -> Result<()> {
    if tokens.is_empty() {
        return Err(Error::Invalid(format!("{kind} {id} has no tokens")));
    }
    if let Some(t) = tokens.iter().find(|&&t| t as usize >= vocab_size) {
        return Err(Error::Invalid(format!(
            "{kind} {id} has token {t} outside vocabulary of size {vocab_size}"
        )));
    }
    Ok(())
}

/// Incremental, validating constructor for [`Dataset`].
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    vocab_size: usize,
    queries: Vec<Query>,
    documents: Vec<Document>,
    samples: Vec<Sample>,
    pools: BTreeMap<QueryIdx, Vec<DocIdx>>,
    query_ids: BTreeMap<String, QueryIdx>,
    doc_ids: BTreeMap<String, DocIdx>,
    labels: BTreeMap<(QueryIdx, DocIdx), Label>,
}

impl DatasetBuilder {
    pub fn new(vocab_size: usize) -> Self {
        DatasetBuilder {
            vocab_size,
            ..Default::default()
        }
    }

    pub fn query(&mut self, id: impl Into<String>, tokens: Vec<u32>) -> Result<QueryIdx> {
        let id = id.into();
        check_tokens("query", &id, &tokens, self.vocab_size)?;
        if self.query_ids.contains_key(&id) {
            return Err(Error::Invalid(format!("query id {id} defined twice")));
        }
        let idx = QueryIdx(self.queries.len() as u32);
        self.query_ids.insert(id.clone(), idx);
        self.queries.push(Query { id, tokens });
        Ok(idx)
    }

    pub fn document(&mut self, id: impl Into<String>, tokens: Vec<u32>) -> Result<DocIdx> {
        let id = id.into();
        check_tokens("document", &id, &tokens, self.vocab_size)?;
        if self.doc_ids.contains_key(&id) {
            return Err(Error::Invalid(format!("document id {id} defined twice")));
        }
        let idx = DocIdx(self.documents.len() as u32);
        self.doc_ids.insert(id.clone(), idx);
        self.documents.push(Document { id, tokens });
        Ok(idx)
    }

    fn resolve(&self, query_id: &str, doc_id: &str) -> Result<(QueryIdx, DocIdx)> {
        let q = self.query_ids.get(query_id).copied().ok_or_else(|| Error::DanglingId {
            kind: "query",
            id: query_id.to_string(),
        })?;
        let d = self.doc_ids.get(doc_id).copied().ok_or_else(|| Error::DanglingId {
            kind: "document",
            id: doc_id.to_string(),
        })?;
        Ok((q, d))
    }

    pub fn sample(&mut self, query_id: &str, doc_id: &str, label: Label) -> Result<Sample> {
        let (query, doc) = self.resolve(query_id, doc_id)?;
        if self.labels.insert((query, doc), label).is_some() {
            return Err(Error::DuplicatePair {
                query: query_id.to_string(),
                doc: doc_id.to_string(),
            });
        }
        let s = Sample { query, doc, label };
        self.samples.push(s);
        Ok(s)
    }

    /// Appends `doc_id` to the end of `query_id`'s pool.
    pub fn pool_entry(&mut self, query_id: &str, doc_id: &str) -> Result<()> {
        let (q, d) = self.resolve(query_id, doc_id)?;
        self.pools.entry(q).or_default().push(d);
        Ok(())
    }

    pub fn build(self) -> Result<Dataset> {
        let mut pools = alloc::vec![Vec::new(); self.queries.len()];
        for (q, pool) in self.pools {
            pools[q.index()] = pool;
        }
        let ds = Dataset {
            vocab_size: self.vocab_size,
            queries: self.queries,
            documents: self.documents,
            samples: self.samples,
            pools,
            query_ids: self.query_ids,
            doc_ids: self.doc_ids,
            labels: self.labels,
        };
        ds.validate()?;
        Ok(ds)
    }
}

/// Train/test split; test queries never appear in the training dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSplit {
    pub train: Dataset,
    pub test: Dataset,
}

impl CorpusSplit {
    pub fn new(train: Dataset, test: Dataset) -> Result<Self> {
        if train.vocab_size() != test.vocab_size() {
            return Err(Error::Shape(format!(
                "train vocab {} differs from test vocab {}",
                train.vocab_size(),
                test.vocab_size()
            )));
        }
        let train_ids: BTreeSet<&str> = train.queries().iter().map(|q| q.id.as_str()).collect();
        if let Some(q) = test.queries().iter().find(|q| train_ids.contains(q.id.as_str())) {
            return Err(Error::Invalid(format!(
                "query {} appears in both train and test",
                q.id
            )));
        }
        Ok(CorpusSplit { train, test })
    }
}

/// Summary counts in the spirit of a dataset statistics table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatsRecord {
    pub queries_with_samples: usize,
    pub queries_with_multiple_positives: usize,
    pub mean_positives_per_query: f64,
    pub mean_pool_size: f64,
    pub samples: usize,
    /// Sum over queries of (#positives × #negatives).
    pub pairwise_samples: usize,
}

pub fn dataset_stats(d: &Dataset) -> StatsRecord {
    let mut per_query: BTreeMap<QueryIdx, (usize, usize)> = BTreeMap::new();
    for s in d.samples() {
        let e = per_query.entry(s.query).or_default();
        if s.label.is_positive() {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    let pools: Vec<usize> = (0..d.queries().len())
        .map(|q| d.pool(QueryIdx(q as u32)).len())
        .filter(|&n| n > 0)
        .collect();
    let n = per_query.len();
    let total_pos: usize = per_query.values().map(|c| c.0).sum();
    StatsRecord {
        queries_with_samples: n,
        queries_with_multiple_positives: per_query.values().filter(|c| c.0 > 1).count(),
        mean_positives_per_query: if n == 0 { 0.0 } else { total_pos as f64 / n as f64 },
        mean_pool_size: if pools.is_empty() {
            0.0
        } else {
            pools.iter().sum::<usize>() as f64 / pools.len() as f64
        },
        samples: d.samples().len(),
        pairwise_samples: per_query.values().map(|c| c.0 * c.1).sum(),
    }
}
