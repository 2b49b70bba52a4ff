//! Brute-force oracles and random instance generators shared by the
//! property tests. Everything here is written independently of the crate's
//! own algorithms.
#![allow(dead_code)]

use std::collections::BTreeSet;

use numur_core::ranker::{GradientBuffer, ScoreModel, Side};
use numur_core::{Dataset, DatasetBuilder, ForgetSpec, Label, RemovalKind, Sample};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with at most `max_samples` samples over a few queries and
/// documents. Every sampled document is in its query's pool; pools may hold
/// extra unlabelled documents.
pub fn random_dataset(r: &mut ChaCha8Rng, max_samples: usize) -> Dataset {
    let vocab = 12;
    let nq = r.gen_range(1..=6);
    let nd = r.gen_range(1..=8);
    let mut b = DatasetBuilder::new(vocab);
    for i in 0..nq {
        let len = r.gen_range(1..=3);
        b.query(format!("q{i}"), (0..len).map(|_| r.gen_range(0..vocab as u32)).collect())
            .unwrap();
    }
    for i in 0..nd {
        let len = r.gen_range(1..=4);
        b.document(format!("d{i}"), (0..len).map(|_| r.gen_range(0..vocab as u32)).collect())
            .unwrap();
    }
    let mut all: Vec<(usize, usize)> = (0..nq).flat_map(|q| (0..nd).map(move |d| (q, d))).collect();
    all.shuffle(r);
    let n = r.gen_range(1..=max_samples.min(all.len()));
    let chosen: BTreeSet<(usize, usize)> = all[..n].iter().copied().collect();
    for q in 0..nq {
        for d in 0..nd {
            if chosen.contains(&(q, d)) || r.gen_bool(0.3) {
                b.pool_entry(&format!("q{q}"), &format!("d{d}")).unwrap();
            }
        }
    }
    for &(q, d) in &all[..n] {
        let label = if r.gen_bool(0.5) { Label::Positive } else { Label::Negative };
        b.sample(&format!("q{q}"), &format!("d{d}"), label).unwrap();
    }
    b.build().unwrap()
}

/// Random non-empty removal request over ids that exist in `d`.
pub fn random_spec(r: &mut ChaCha8Rng, d: &Dataset) -> ForgetSpec {
    if r.gen_bool(0.5) {
        let mut ids: Vec<String> = d.queries().iter().map(|q| q.id.clone()).collect();
        let k = r.gen_range(1..=ids.len());
        ids.shuffle(r);
        ForgetSpec::queries(ids.into_iter().take(k))
    } else {
        let mut ids: Vec<String> = d.documents().iter().map(|x| x.id.clone()).collect();
        let k = r.gen_range(1..=ids.len());
        ids.shuffle(r);
        ForgetSpec::documents(ids.into_iter().take(k))
    }
}

pub type Triple = Vec<(String, String)>;

fn ids(d: &Dataset, s: &Sample) -> (String, String) {
    (d.query(s.query).id.clone(), d.doc(s.doc).id.clone())
}

/// Double scan: the first pass marks forget samples, the second compares
/// every retained sample against every forget sample.
pub fn oracle_partition(d: &Dataset, spec: &ForgetSpec) -> (Triple, Triple, Triple) {
    let mut forget = Vec::new();
    for s in d.samples() {
        let (q, doc) = ids(d, s);
        let hit = match spec.kind {
            RemovalKind::QueryRemoval => spec.ids.iter().any(|x| *x == q),
            RemovalKind::DocumentRemoval => spec.ids.iter().any(|x| *x == doc),
        };
        if hit {
            forget.push((q, doc));
        }
    }
    let mut entangled = Vec::new();
    let mut disjoint = Vec::new();
    for s in d.samples() {
        let pair = ids(d, s);
        if forget.contains(&pair) {
            continue;
        }
        if forget.iter().any(|f| f.0 == pair.0 || f.1 == pair.1) {
            entangled.push(pair);
        } else {
            disjoint.push(pair);
        }
    }
    (forget, entangled, disjoint)
}

pub fn as_ids(d: &Dataset, v: &[Sample]) -> Triple {
    v.iter().map(|s| ids(d, s)).collect()
}

/// The seven-sample dataset used in the worked partition examples.
pub fn worked_example(all_positive: bool) -> Dataset {
    let mut b = DatasetBuilder::new(16);
    for i in 1..=5u32 {
        b.query(format!("q{i}"), vec![i]).unwrap();
        b.document(format!("d{i}"), vec![i + 5]).unwrap();
    }
    let pairs = [
        ("q1", "d1"),
        ("q1", "d2"),
        ("q2", "d2"),
        ("q3", "d2"),
        ("q4", "d3"),
        ("q4", "d4"),
        ("q5", "d5"),
    ];
    for (i, (q, doc)) in pairs.iter().enumerate() {
        let label = if all_positive || i % 2 == 0 { Label::Positive } else { Label::Negative };
        b.pool_entry(q, doc).unwrap();
        b.sample(q, doc, label).unwrap();
    }
    b.build().unwrap()
}

/// Reciprocal rank of the best target in an explicitly scored list, by
/// counting for each target how many documents sort ahead of it.
/// Ties go to the smaller id. `None` when no target is present.
pub fn oracle_rr(scored: &[(String, f64)], is_target: impl Fn(&str) -> bool) -> Option<f64> {
    let mut best: Option<usize> = None;
    for (id, s) in scored.iter().filter(|(id, _)| is_target(id)) {
        let ahead = scored
            .iter()
            .filter(|(oid, os)| os > s || (os == s && oid < id))
            .count();
        let rank = ahead + 1;
        best = Some(best.map_or(rank, |b: usize| b.min(rank)));
    }
    best.map(|r| 1.0 / r as f64)
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Random model with entries uniform in `[-scale, scale]`.
pub fn random_model(r: &mut ChaCha8Rng, vocab: usize, dim: usize, scale: f64) -> ScoreModel {
    let mut draw = |n: usize| (0..n).map(|_| r.gen_range(-scale..=scale)).collect::<Vec<f64>>();
    let q = draw(vocab * dim);
    let d = draw(vocab * dim);
    ScoreModel::from_parts(vocab, dim, q, d).unwrap()
}

/// Central finite differences of `f` over every parameter of `m`,
/// flattened as query table then document table.
pub fn numeric_gradient(m: &ScoreModel, h: f64, f: impl Fn(&ScoreModel) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    for side in [Side::Query, Side::Doc] {
        for i in 0..m.table(side).len() {
            let mut plus = m.clone();
            plus.table_mut(side)[i] += h;
            let mut minus = m.clone();
            minus.table_mut(side)[i] -= h;
            out.push((f(&plus) - f(&minus)) / (2.0 * h));
        }
    }
    out
}

pub fn flatten(buf: &GradientBuffer) -> Vec<f64> {
    buf.grad(Side::Query).iter().chain(buf.grad(Side::Doc)).copied().collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

pub const FD_STEP: f64 = 1e-5;
const KINK_GAP: f64 = 1e-3;

/// Two queries and three documents with random tokens:
/// q0 holds d0 (+) and d1 (−), q1 holds d0 (+) and d2 (−).
pub fn gradient_fixture(r: &mut ChaCha8Rng) -> Dataset {
    let vocab = 10;
    let toks = |r: &mut ChaCha8Rng| {
        let n = r.gen_range(1..=3);
        (0..n).map(|_| r.gen_range(0..vocab as u32)).collect::<Vec<u32>>()
    };
    let mut b = DatasetBuilder::new(vocab);
    for i in 0..2 {
        b.query(format!("q{i}"), toks(r)).unwrap();
    }
    for i in 0..3 {
        b.document(format!("d{i}"), toks(r)).unwrap();
    }
    for (q, d, l) in [
        ("q0", "d0", Label::Positive),
        ("q0", "d1", Label::Negative),
        ("q1", "d0", Label::Positive),
        ("q1", "d2", Label::Negative),
    ] {
        b.pool_entry(q, d).unwrap();
        b.sample(q, d, l).unwrap();
    }
    b.build().unwrap()
}

fn compare(m: &ScoreModel, buf: &GradientBuffer, f: impl Fn(&ScoreModel) -> f64) -> f64 {
    relative_error(&flatten(buf), &numeric_gradient(m, FD_STEP, f))
}

/// Relative error of the score gradient of a random pair.
pub fn gradient_case_forward(r: &mut ChaCha8Rng) -> Option<f64> {
    let d = gradient_fixture(r);
    let m = random_model(r, d.vocab_size(), 4, 1.0);
    let s = d.samples()[r.gen_range(0..d.samples().len())];
    let mut buf = GradientBuffer::for_model(&m);
    m.backward(&d, s.query, s.doc, 1.0, &mut buf);
    Some(compare(&m, &buf, |x| x.forward(&d, s.query, s.doc)))
}

pub fn gradient_case_hinge(r: &mut ChaCha8Rng) -> Option<f64> {
    use numur_core::ranker::pairwise_hinge;
    let d = gradient_fixture(r);
    let m = random_model(r, d.vocab_size(), 4, 1.0);
    let margin = r.gen_range(0.1..2.0);
    let (q, pos, neg) = if r.gen_bool(0.5) {
        (d.samples()[0].query, d.samples()[0].doc, d.samples()[1].doc)
    } else {
        (d.samples()[2].query, d.samples()[2].doc, d.samples()[3].doc)
    };
    let raw = margin - m.forward(&d, q, pos) + m.forward(&d, q, neg);
    if raw.abs() < KINK_GAP {
        return None;
    }
    let mut buf = GradientBuffer::for_model(&m);
    pairwise_hinge(&m, &d, q, pos, neg, margin, &mut buf);
    Some(compare(&m, &buf, |x| {
        pairwise_hinge(x, &d, q, pos, neg, margin, &mut GradientBuffer::for_model(x))
    }))
}

fn delta(t: f64, s: f64) -> f64 {
    (t - s) / (t + s)
}

/// Contrastive loss written from its definition with its own teacher floor.
fn contrastive_reference(d: &Dataset, teacher: &ScoreModel, student: &ScoreModel, f: Sample, p: Sample) -> f64 {
    let floor = d
        .samples()
        .iter()
        .filter(|s| s.query == f.query)
        .map(|s| teacher.forward(d, s.query, s.doc))
        .fold(f64::INFINITY, f64::min);
    let sf = student.forward(d, f.query, f.doc);
    let first = ((sf - floor) / (sf + floor)).max(0.0);
    let second = delta(teacher.forward(d, p.query, p.doc), student.forward(d, p.query, p.doc)).abs();
    first + second
}

pub fn gradient_case_contrastive(r: &mut ChaCha8Rng) -> Option<f64> {
    use numur_core::losses::{build_min_cache, contrastive_loss};
    use numur_core::ranker::snapshot;
    let d = gradient_fixture(r);
    let teacher = random_model(r, d.vocab_size(), 4, 1.0);
    let mut student = teacher.clone();
    for side in [Side::Query, Side::Doc] {
        for w in student.table_mut(side) {
            *w += r.gen_range(-0.3..0.3);
        }
    }
    let s = d.samples();
    // Forget (q0,d0); partner shares its query or its document.
    let (f, p) = if r.gen_bool(0.5) { (s[0], s[1]) } else { (s[0], s[2]) };
    let t = snapshot(&teacher);
    let cache = build_min_cache(&t, &d);
    let floor = cache.get(f.query).unwrap();
    let sf = student.forward(&d, f.query, f.doc);
    let dp = delta(teacher.forward(&d, p.query, p.doc), student.forward(&d, p.query, p.doc));
    if ((sf - floor) / (sf + floor)).abs() < KINK_GAP || dp.abs() < KINK_GAP {
        return None;
    }
    let mut buf = GradientBuffer::for_model(&student);
    let v = contrastive_loss(&cache, &t, &student, &d, f.pair(), Some(p.pair()), &mut buf).unwrap();
    assert!((v.value - contrastive_reference(&d, &teacher, &student, f, p)).abs() < 1e-12);
    Some(compare(&student, &buf, |x| contrastive_reference(&d, &teacher, x, f, p)))
}

pub fn gradient_case_consistent(r: &mut ChaCha8Rng) -> Option<f64> {
    use numur_core::losses::consistent_loss;
    use numur_core::ranker::snapshot;
    let d = gradient_fixture(r);
    let teacher = random_model(r, d.vocab_size(), 4, 1.0);
    let student = random_model(r, d.vocab_size(), 4, 1.0);
    let s = d.samples();
    let (pos, neg) = if r.gen_bool(0.5) { (s[0], s[1]) } else { (s[2], s[3]) };
    let reference = |x: &ScoreModel| {
        delta(teacher.forward(&d, pos.query, pos.doc), x.forward(&d, pos.query, pos.doc)).abs()
            + delta(teacher.forward(&d, neg.query, neg.doc), x.forward(&d, neg.query, neg.doc)).abs()
    };
    for x in [pos, neg] {
        if delta(teacher.forward(&d, x.query, x.doc), student.forward(&d, x.query, x.doc)).abs() < KINK_GAP {
            return None;
        }
    }
    let t = snapshot(&teacher);
    let mut buf = GradientBuffer::for_model(&student);
    let v = consistent_loss(&t, &student, &d, &pos, &neg, &mut buf).unwrap();
    assert!((v.value - reference(&student)).abs() < 1e-12);
    Some(compare(&student, &buf, reference))
}

/// Runs `case` until `n` non-kink configurations were checked; returns the
/// worst relative error.
pub fn worst_gradient_error(seed: u64, n: usize, case: fn(&mut ChaCha8Rng) -> Option<f64>) -> f64 {
    let mut r = rng(seed);
    let mut done = 0;
    let mut worst: f64 = 0.0;
    while done < n {
        if let Some(e) = case(&mut r) {
            worst = worst.max(e);
            done += 1;
        }
    }
    worst
}

fn scored_pool(m: &ScoreModel, d: &Dataset, q: numur_core::QueryIdx) -> Vec<(String, f64)> {
    d.pool(q)
        .iter()
        .map(|&doc| (d.doc(doc).id.clone(), m.forward(d, q, doc)))
        .collect()
}

/// Forget-set MRR from first principles.
pub fn oracle_mrr_forget(m: &ScoreModel, d: &Dataset, spec: &ForgetSpec) -> f64 {
    let (forget, _, _) = oracle_partition(d, spec);
    let queries: BTreeSet<String> = forget.into_iter().map(|p| p.0).collect();
    let mut rr = Vec::new();
    for qid in queries {
        let q = d.query_idx(&qid).unwrap();
        let scored = scored_pool(m, d, q);
        let hit = match spec.kind {
            RemovalKind::QueryRemoval => oracle_rr(&scored, |doc| {
                d.samples()
                    .iter()
                    .any(|s| s.query == q && s.label.is_positive() && d.doc(s.doc).id == doc)
            }),
            RemovalKind::DocumentRemoval => oracle_rr(&scored, |doc| spec.ids.contains(doc)),
        };
        rr.extend(hit);
    }
    mean(&rr)
}

/// Set MRR from first principles: relevant documents are the positives of
/// `set` for each of its queries.
pub fn oracle_mrr_set(m: &ScoreModel, d: &Dataset, set: &[(String, String)]) -> f64 {
    let queries: BTreeSet<&String> = set.iter().map(|p| &p.0).collect();
    let mut rr = Vec::new();
    for qid in queries {
        let q = d.query_idx(qid).unwrap();
        let relevant: Vec<&String> = set
            .iter()
            .filter(|p| &p.0 == qid)
            .filter(|p| d.sample(&p.0, &p.1).unwrap().label.is_positive())
            .map(|p| &p.1)
            .collect();
        rr.extend(oracle_rr(&scored_pool(m, d, q), |doc| relevant.iter().any(|r| *r == doc)));
    }
    mean(&rr)
}

/// Random model on a coarse grid so that ties in the ranking are common.
pub fn coarse_model(r: &mut ChaCha8Rng, vocab: usize, dim: usize) -> ScoreModel {
    let mut draw = |n: usize| (0..n).map(|_| r.gen_range(-2..=2) as f64 * 0.5).collect::<Vec<f64>>();
    let q = draw(vocab * dim);
    let d = draw(vocab * dim);
    ScoreModel::from_parts(vocab, dim, q, d).unwrap()
}

/// Compares the crate's MRR functions with the oracles on one random
/// instance. Returns a description of the first mismatch.
pub fn mrr_case(r: &mut ChaCha8Rng) -> Result<(), String> {
    use numur_core::{mrr_forget, mrr_set, partition};
    let d = random_dataset(r, 30);
    let m = if r.gen_bool(0.5) { coarse_model(r, d.vocab_size(), 2) } else { random_model(r, d.vocab_size(), 3, 1.0) };
    let spec = random_spec(r, &d);
    let Ok(p) = partition(&d, &spec) else { return Ok(()) };
    if p.forget.is_empty() {
        return match mrr_forget(&m, &d, &p, &spec) {
            Err(_) => Ok(()),
            Ok(v) => Err(format!("empty forget set scored {v:?}")),
        };
    }
    let (_, e, dj) = oracle_partition(&d, &spec);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let got = mrr_forget(&m, &d, &p, &spec).map_err(|e| e.to_string())?.value;
    let want = oracle_mrr_forget(&m, &d, &spec);
    if !close(got, want) {
        return Err(format!("forget mrr {got} vs oracle {want}"));
    }
    for (name, mine, theirs) in [("entangled", &p.entangled, &e), ("disjoint", &p.disjoint, &dj)] {
        let got = mrr_set(&m, &d, mine).value;
        let want = oracle_mrr_set(&m, &d, theirs);
        if !close(got, want) {
            return Err(format!("{name} mrr {got} vs oracle {want}"));
        }
    }
    let all: Vec<(String, String)> = as_ids(&d, d.samples());
    let got = mrr_set(&m, &d, d.samples()).value;
    let want = oracle_mrr_set(&m, &d, &all);
    if !close(got, want) {
        return Err(format!("full mrr {got} vs oracle {want}"));
    }
    Ok(())
}

/// Four documents scored so the ranking of q1 is d1, d3, d4, d2, with d2
/// requested for removal.
pub fn ranking_example() -> (Dataset, ScoreModel, ForgetSpec) {
    let mut b = DatasetBuilder::new(5);
    b.query("q1", vec![0]).unwrap();
    for i in 1..=4u32 {
        b.document(format!("d{i}"), vec![i]).unwrap();
        b.pool_entry("q1", &format!("d{i}")).unwrap();
    }
    b.sample("q1", "d2", Label::Positive).unwrap();
    b.sample("q1", "d1", Label::Negative).unwrap();
    let d = b.build().unwrap();
    let q = vec![1.0, 0.0, 0.0, 0.0, 0.0];
    let w = vec![0.0, 4.0, 1.0, 3.0, 2.0];
    let m = ScoreModel::from_parts(5, 1, q, w).unwrap();
    (d, m, ForgetSpec::documents(["d2"]))
}

/// Small corpus, trained model and a removal request, for loop-level tests.
pub struct SmallWorld {
    pub split: numur_core::CorpusSplit,
    pub model: ScoreModel,
    pub spec: ForgetSpec,
    pub partition: numur_core::Partition,
}

pub fn small_world(seed: u64, kind: RemovalKind) -> SmallWorld {
    use numur_core::{generate_synthetic, partition, sample_forget_spec, train, SyntheticConfig, TrainConfig};
    let split = generate_synthetic(&SyntheticConfig {
        n_queries: 16,
        n_docs: 64,
        vocab_size: 128,
        pool_size: 24,
        labelled_negatives: 4,
        common_vocab: 16,
        n_topics: 4,
        seed,
        ..Default::default()
    })
    .unwrap();
    let model = train(&split, &TrainConfig { epochs: 10, seed, ..Default::default() }).unwrap().model;
    let spec = sample_forget_spec(&split.train, kind, 0.25, seed).unwrap();
    let partition = partition(&split.train, &spec).unwrap();
    SmallWorld { split, model, spec, partition }
}

/// One random stopping configuration for an iterative method; returns a
/// description of a violated stopping rule. SSD has no epochs and is left
/// out.
pub fn stopping_case(w: &SmallWorld, r: &mut ChaCha8Rng) -> Result<(), String> {
    use numur_core::{unlearn, Method, Silent, UnlearnConfig, UnlearnTask};
    let iterative: Vec<Method> = Method::ALL.into_iter().filter(|m| *m != Method::Ssd).collect();
    let cfg = UnlearnConfig {
        method: iterative[r.gen_range(0..iterative.len())],
        delta_target: r.gen_range(0.01..=1.0),
        seed: r.gen(),
        max_epochs: r.gen_range(1..=12),
        check_every: r.gen_range(1..=3),
        learning_rate: [0.025, 0.1, 0.5][r.gen_range(0..3)],
        ..Default::default()
    };
    let task = UnlearnTask::new(&w.model, &w.split, &w.partition, &w.spec);
    let run = unlearn(task, &cfg, &mut Silent).map_err(|e| e.to_string())?;
    let last = run.final_record().mrr_forget;
    if run.stopped_early && last > cfg.delta_target {
        return Err(format!("{cfg:?}: stopped early with forget mrr {last}"));
    }
    if !run.stopped_early && run.epochs_run != cfg.max_epochs {
        return Err(format!("{cfg:?}: ran {} of {} epochs without stopping early", run.epochs_run, cfg.max_epochs));
    }
    Ok(())
}

pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}
