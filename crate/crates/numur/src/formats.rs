//! On-disk formats: corpus files, removal requests and model weights.
//!
//! A corpus directory holds `manifest.json` plus `train/` and `test/`
//! subdirectories, each with `queries.jsonl`, `docs.jsonl`, `qrels.tsv` and
//! `pools.tsv`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use numur_core::{CorpusSplit, Dataset, DatasetBuilder, ForgetSpec, Label, RemovalKind, ScoreModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUERIES: &str = "queries.jsonl";
pub const DOCS: &str = "docs.jsonl";
pub const QRELS: &str = "qrels.tsv";
pub const POOLS: &str = "pools.tsv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    tokens: Vec<u32>,
}

pub(crate) fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, s: &str) -> Result<()> {
    create(path)?.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    write_string(path, &s)
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

fn read_jsonl(path: &Path) -> Result<Vec<(u64, Record)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(open(path)?).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let n = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            line: n,
            msg: e.to_string(),
        })?;
        out.push((n, rec));
    }
    Ok(out)
}

fn tsv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_reader(open(path)?))
}

/// Rows of a three-column TSV file with their 1-based line numbers.
fn read_tsv3(path: &Path) -> Result<Vec<(u64, [String; 3])>> {
    let mut out = Vec::new();
    for rec in tsv_reader(path)?.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: format!("expected 3 tab-separated fields, found {}", rec.len()),
            });
        }
        out.push((line, [rec[0].to_string(), rec[1].to_string(), rec[2].to_string()]));
    }
    Ok(out)
}

/// Reads one dataset. Without `vocab_size` the vocabulary is sized to the
/// largest token seen.
fn at(path: &Path, line: u64) -> impl FnOnce(numur_core::Error) -> Error + '_ {
    move |source| Error::Data { path: path.into(), line, source }
}

pub fn load_dataset(queries: &Path, docs: &Path, qrels: &Path, pools: &Path, vocab_size: Option<usize>) -> Result<Dataset> {
    let q = read_jsonl(queries)?;
    let d = read_jsonl(docs)?;
    let vocab = vocab_size.unwrap_or_else(|| {
        q.iter()
            .chain(&d)
            .flat_map(|(_, r)| r.tokens.iter())
            .max()
            .map_or(1, |&t| t as usize + 1)
    });
    let mut b = DatasetBuilder::new(vocab);
    for (line, r) in q {
        b.query(r.id, r.tokens).map_err(at(queries, line))?;
    }
    for (line, r) in d {
        b.document(r.id, r.tokens).map_err(at(docs, line))?;
    }
    let mut pool_rows = Vec::new();
    for (line, [qid, did, hint]) in read_tsv3(pools)? {
        let hint: i64 = hint.trim().parse().map_err(|_| Error::Parse {
            path: pools.into(),
            line,
            msg: format!("rank_hint \"{hint}\" is not an integer"),
        })?;
        pool_rows.push((line, qid, did, hint));
    }
    // Stable: equal hints keep file order.
    pool_rows.sort_by_key(|r| r.3);
    for (line, qid, did, _) in &pool_rows {
        b.pool_entry(qid, did).map_err(at(pools, *line))?;
    }
    for (line, [qid, did, label]) in read_tsv3(qrels)? {
        let label = match label.trim() {
            "1" => Label::Positive,
            "0" => Label::Negative,
            other => {
                return Err(Error::Parse {
                    path: qrels.into(),
                    line,
                    msg: format!("label \"{other}\" is not 1 or 0"),
                })
            }
        };
        b.sample(&qid, &did, label).map_err(at(qrels, line))?;
    }
    b.build().map_err(|source| Error::Data {
        path: qrels.into(),
        line: 0,
        source,
    })
}

pub fn load_dataset_dir(dir: &Path, vocab_size: Option<usize>) -> Result<Dataset> {
    load_dataset(&dir.join(QUERIES), &dir.join(DOCS), &dir.join(QRELS), &dir.join(POOLS), vocab_size)
}

fn write_jsonl<'a>(path: &Path, rows: impl Iterator<Item = (&'a str, &'a [u32])>) -> Result<()> {
    let mut s = String::new();
    for (id, tokens) in rows {
        let rec = Record { id: id.to_string(), tokens: tokens.to_vec() };
        s.push_str(&serde_json::to_string(&rec).expect("plain record serialises"));
        s.push('\n');
    }
    write_string(path, &s)
}

fn write_tsv(path: &Path, header: [&str; 3], rows: impl Iterator<Item = [String; 3]>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    let wrap = |e: csv::Error| Error::Parse { path: path.into(), line: 0, msg: e.to_string() };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_dataset(d: &Dataset, dir: &Path) -> Result<()> {
    write_jsonl(&dir.join(QUERIES), d.queries().iter().map(|q| (q.id.as_str(), q.tokens.as_slice())))?;
    write_jsonl(&dir.join(DOCS), d.documents().iter().map(|x| (x.id.as_str(), x.tokens.as_slice())))?;
    write_tsv(
        &dir.join(QRELS),
        ["query_id", "doc_id", "label"],
        d.samples().iter().map(|s| {
            [
                d.query(s.query).id.clone(),
                d.doc(s.doc).id.clone(),
                if s.label.is_positive() { "1" } else { "0" }.to_string(),
            ]
        }),
    )?;
    let mut pools = Vec::new();
    for (qi, q) in d.queries().iter().enumerate() {
        for (rank, doc) in d.pool(numur_core::QueryIdx(qi as u32)).iter().enumerate() {
            pools.push([q.id.clone(), d.doc(*doc).id.clone(), (rank + 1).to_string()]);
        }
    }
    write_tsv(&dir.join(POOLS), ["query_id", "doc_id", "rank_hint"], pools.into_iter())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub vocab_size: usize,
    /// Generator settings when the corpus is synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<crate::config::CorpusConfig>,
}

pub fn save_split(split: &CorpusSplit, manifest: &Manifest, dir: &Path) -> Result<()> {
    save_dataset(&split.train, &dir.join("train"))?;
    save_dataset(&split.test, &dir.join("test"))?;
    write_json(&dir.join(MANIFEST), manifest)
}

/// Loads a corpus directory. Without a manifest both halves share a
/// vocabulary sized to the largest token in either.
pub fn load_split(dir: &Path) -> Result<CorpusSplit> {
    let manifest = dir.join(MANIFEST);
    let vocab = if manifest.exists() {
        read_json::<Manifest>(&manifest)?.vocab_size
    } else {
        let a = load_dataset_dir(&dir.join("train"), None)?.vocab_size();
        let b = load_dataset_dir(&dir.join("test"), None)?.vocab_size();
        a.max(b)
    };
    let train = load_dataset_dir(&dir.join("train"), Some(vocab))?;
    let test = load_dataset_dir(&dir.join("test"), Some(vocab))?;
    Ok(CorpusSplit::new(train, test)?)
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    kind: String,
    ids: Vec<String>,
}

pub fn save_spec(spec: &ForgetSpec, path: &Path) -> Result<()> {
    let kind = match spec.kind {
        RemovalKind::QueryRemoval => "query",
        RemovalKind::DocumentRemoval => "document",
    };
    write_json(path, &SpecFile { kind: kind.into(), ids: spec.ids.iter().cloned().collect() })
}

pub fn load_spec(path: &Path) -> Result<ForgetSpec> {
    let f: SpecFile = read_json(path)?;
    match f.kind.as_str() {
        "query" => Ok(ForgetSpec::queries(f.ids)),
        "document" => Ok(ForgetSpec::documents(f.ids)),
        other => Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: format!("kind \"{other}\" is neither \"query\" nor \"document\""),
        }),
    }
}

const MAGIC: &[u8; 4] = b"NUMR";
const VERSION: u32 = 1;

pub fn encode_model(m: &ScoreModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * m.embed_q().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.vocab_size() as u32).to_le_bytes());
    out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
    for w in m.embed_q().iter().chain(m.embed_d()) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> std::result::Result<ScoreModel, String> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err("not a model file (bad magic)".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != VERSION {
        return Err(format!("unsupported model version {version}"));
    }
    let (vocab, dim) = (word(8) as usize, word(12) as usize);
    let n = vocab.checked_mul(dim).ok_or("model shape overflows")?;
    let want = n.checked_mul(16).and_then(|b| b.checked_add(16)).ok_or("model shape overflows")?;
    if bytes.len() != want {
        return Err(format!(
            "expected {want} bytes for vocab {vocab} × dim {dim}, found {}",
            bytes.len()
        ));
    }
    let floats: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let (q, d) = floats.split_at(n);
    ScoreModel::from_parts(vocab, dim, q.to_vec(), d.to_vec()).map_err(|e| e.to_string())
}

pub fn save_model(m: &ScoreModel, path: &Path) -> Result<()> {
    create(path)?.write_all(&encode_model(m)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ScoreModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes).map_err(|msg| Error::Model { path: PathBuf::from(path), msg })
}
