//! Teacher–student discrepancy measures and the two unlearning losses.
//!
//! All measures are ratios of positive scores, so they live in `(-1, 1)`.
//! Gradients are taken with respect to the student only; at the kinks of
//! `ReLU` and `|·|` the subgradient 0 is used.

use alloc::collections::BTreeMap;

use crate::corpus::{Dataset, DocIdx, Label, QueryIdx, Sample};
use crate::error::{Error, Result};
use crate::ranker::{GradientBuffer, ScoreModel, TeacherSnapshot};

pub type Pair = (QueryIdx, DocIdx);

/// Normalised score gap `(teacher − student) / (teacher + student)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaValue {
    pub value: f64,
    pub teacher_score: f64,
    pub student_score: f64,
}

impl DeltaValue {
    pub fn from_scores(teacher_score: f64, student_score: f64) -> Self {
        DeltaValue {
            value: (teacher_score - student_score) / (teacher_score + student_score),
            teacher_score,
            student_score,
        }
    }

    /// `∂value/∂student`.
    pub fn d_student(&self) -> f64 {
        let s = self.teacher_score + self.student_score;
        -2.0 * self.teacher_score / (s * s)
    }
}

pub fn delta(teacher: &TeacherSnapshot, student: &ScoreModel, d: &Dataset, (q, doc): Pair) -> DeltaValue {
    DeltaValue::from_scores(teacher.forward(d, q, doc), student.forward(d, q, doc))
}

/// Per-query minimum teacher score over all of the query's samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TeacherMinCache(BTreeMap<QueryIdx, f64>);

impl TeacherMinCache {
    pub fn get(&self, q: QueryIdx) -> Option<f64> {
        self.0.get(&q).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn build_min_cache(teacher: &TeacherSnapshot, d: &Dataset) -> TeacherMinCache {
    let mut out: BTreeMap<QueryIdx, f64> = BTreeMap::new();
    for s in d.samples() {
        let score = teacher.forward(d, s.query, s.doc);
        out.entry(s.query)
            .and_modify(|m| *m = m.min(score))
            .or_insert(score);
    }
    TeacherMinCache(out)
}

/// `(student − s_min) / (student + s_min)`: positive while the student still
/// scores the pair above the teacher's per-query floor.
pub fn delta_min_from_scores(s_min: f64, student_score: f64) -> f64 {
    -(s_min - student_score) / (s_min + student_score)
}

fn d_delta_min(s_min: f64, student_score: f64) -> f64 {
    let s = s_min + student_score;
    2.0 * s_min / (s * s)
}

pub fn delta_min(cache: &TeacherMinCache, student: &ScoreModel, d: &Dataset, (q, doc): Pair) -> Result<f64> {
    let s_min = cache
        .get(q)
        .ok_or_else(|| Error::Config(alloc::format!("no teacher minimum cached for query {}", d.query(q).id)))?;
    Ok(delta_min_from_scores(s_min, student.forward(d, q, doc)))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Value of a loss together with its two summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Adds `|Δ(pair)|` and its gradient; returns the term.
fn abs_delta_term(
    teacher: &TeacherSnapshot,
    student: &ScoreModel,
    d: &Dataset,
    pair: Pair,
    buf: &mut GradientBuffer,
) -> f64 {
    let dv = delta(teacher, student, d, pair);
    let up = sign(dv.value) * dv.d_student();
    student.backward(d, pair.0, pair.1, up, buf);
    dv.value.abs()
}

/// `ReLU(Δ_min(x)) + |Δ(x′)|`. Without a partner the second term is zero.
pub fn contrastive_loss(
    cache: &TeacherMinCache,
    teacher: &TeacherSnapshot,
    student: &ScoreModel,
    d: &Dataset,
    forget: Pair,
    partner: Option<Pair>,
    buf: &mut GradientBuffer,
) -> Result<LossValue> {
    if let Some(p) = partner {
        if p == forget || (p.0 != forget.0 && p.1 != forget.1) {
            return Err(Error::Config("partner is not entangled with the forget pair".into()));
        }
    }
    let s_min = cache
        .get(forget.0)
        .ok_or_else(|| Error::Config(alloc::format!("no teacher minimum cached for query {}", d.query(forget.0).id)))?;
    let f = student.forward(d, forget.0, forget.1);
    let dm = delta_min_from_scores(s_min, f);
    let first = if dm > 0.0 {
        student.backward(d, forget.0, forget.1, d_delta_min(s_min, f), buf);
        dm
    } else {
        0.0
    };
    let second = match partner {
        Some(p) => abs_delta_term(teacher, student, d, p, buf),
        None => 0.0,
    };
    Ok(LossValue {
        value: first + second,
        first,
        second,
    })
}

/// `|Δ(x⁺)| + |Δ(x⁻)|` over a positive and a negative sample.
pub fn consistent_loss(
    teacher: &TeacherSnapshot,
    student: &ScoreModel,
    d: &Dataset,
    pos: &Sample,
    neg: &Sample,
    buf: &mut GradientBuffer,
) -> Result<LossValue> {
    if pos.label != Label::Positive || neg.label != Label::Negative {
        return Err(Error::Config("consistent loss needs a positive and a negative sample".into()));
    }
    let first = abs_delta_term(teacher, student, d, pos.pair(), buf);
    let second = abs_delta_term(teacher, student, d, neg.pair(), buf);
    Ok(LossValue {
        value: first + second,
        first,
        second,
    })
}

/// `|Δ(x)|` against an arbitrary teacher; the building block of the
/// bad-teacher baseline.
pub fn abs_delta_loss(
    teacher: &TeacherSnapshot,
    student: &ScoreModel,
    d: &Dataset,
    pair: Pair,
    buf: &mut GradientBuffer,
) -> f64 {
    abs_delta_term(teacher, student, d, pair, buf)
}
