//! Run artifacts: trajectories, metric reports and score distributions.

use std::path::Path;

use numur_core::eval::ScoreDistribution;
use numur_core::ranker::TrainEpoch;
use numur_core::EpochRecord;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::create;

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    let wrap = |e: csv::Error| Error::Parse { path: path.into(), line: 0, msg: e.to_string() };
    for r in rows {
        w.serialize(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(crate::formats::open(path)?);
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: path.into(),
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub epoch: usize,
    pub mrr_forget: f64,
    pub mrr_entangled: f64,
    pub mrr_disjoint: f64,
    pub mrr_test: f64,
    pub wall_time_s: f64,
}

impl From<&EpochRecord> for TrajectoryRow {
    fn from(r: &EpochRecord) -> Self {
        TrajectoryRow {
            epoch: r.epoch,
            mrr_forget: r.mrr_forget,
            mrr_entangled: r.mrr_entangled,
            mrr_disjoint: r.mrr_disjoint,
            mrr_test: r.mrr_test,
            wall_time_s: r.wall_time,
        }
    }
}

pub fn write_trajectory(path: &Path, rows: &[EpochRecord]) -> Result<()> {
    write_rows(path, rows.iter().map(TrajectoryRow::from))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    read_rows(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub epoch: usize,
    pub loss: f64,
    pub mrr_train: f64,
    pub wall_time_s: f64,
}

pub fn write_train_trajectory(path: &Path, rows: &[TrainEpoch]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| TrainRow {
            epoch: r.epoch,
            loss: r.loss,
            mrr_train: r.mrr,
            wall_time_s: r.wall_time,
        }),
    )
}

pub fn read_train_trajectory(path: &Path) -> Result<Vec<TrainRow>> {
    read_rows(path)
}

/// Per-set MRR of one model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SetScores {
    pub forget: f64,
    pub entangled: f64,
    pub disjoint: f64,
    pub test: f64,
}

impl From<&numur_core::eval::SetMrr> for SetScores {
    fn from(s: &numur_core::eval::SetMrr) -> Self {
        SetScores {
            forget: s.forget,
            entangled: s.entangled,
            disjoint: s.disjoint,
            test: s.test,
        }
    }
}

/// Wall-clock derived figures; the only non-reproducible part of a report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
    pub normalized_epoch_duration: Option<f64>,
    pub total_unlearn_time: Option<f64>,
}

/// `report.json` of one model (an unlearning run, a retrained or trained
/// model) on one removal request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub method: String,
    pub removal: String,
    pub delta_target: Option<f64>,
    pub destination: Option<String>,
    pub epochs_run: usize,
    pub stopped_early: Option<bool>,
    pub edits: usize,
    pub mrr_forget: f64,
    pub mrr_entangled: f64,
    pub mrr_disjoint: f64,
    pub mrr_test: f64,
    pub forget_skipped: usize,
    /// Starting model's per-set MRR.
    pub before: Option<SetScores>,
    pub retrain_mrr_test: Option<f64>,
    pub normalized_forget: Option<f64>,
    pub timing: Timing,
}

/// Flat row of `report.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub method: String,
    pub removal: String,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub normalized_forget: Option<f64>,
    pub epochs_run: usize,
    pub delta_target: Option<f64>,
    pub normalized_epoch_duration: Option<f64>,
    pub total_unlearn_time: Option<f64>,
}

impl From<&RunReport> for ReportRow {
    fn from(r: &RunReport) -> Self {
        ReportRow {
            name: r.name.clone(),
            method: r.method.clone(),
            removal: r.removal.clone(),
            f: r.mrr_forget,
            e: r.mrr_entangled,
            d: r.mrr_disjoint,
            t: r.mrr_test,
            normalized_forget: r.normalized_forget,
            epochs_run: r.epochs_run,
            delta_target: r.delta_target,
            normalized_epoch_duration: r.timing.normalized_epoch_duration,
            total_unlearn_time: r.timing.total_unlearn_time,
        }
    }
}

pub fn write_report_csv(path: &Path, reports: &[RunReport]) -> Result<()> {
    write_rows(path, reports.iter().map(ReportRow::from))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    read_rows(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub model: String,
    pub set: String,
    pub count: usize,
    pub min: f64,
    pub p10: f64,
    pub p20: f64,
    pub p30: f64,
    pub p40: f64,
    pub p50: f64,
    pub p60: f64,
    pub p70: f64,
    pub p80: f64,
    pub p90: f64,
    pub max: f64,
    pub mean: f64,
    pub spread: f64,
}

impl From<&ScoreDistribution> for DistributionRow {
    fn from(s: &ScoreDistribution) -> Self {
        let p = s.deciles;
        DistributionRow {
            model: s.model.clone(),
            set: s.set.clone(),
            count: s.count,
            min: s.min,
            p10: p[0],
            p20: p[1],
            p30: p[2],
            p40: p[3],
            p50: p[4],
            p60: p[5],
            p70: p[6],
            p80: p[7],
            p90: p[8],
            max: s.max,
            mean: s.mean,
            spread: s.spread(),
        }
    }
}

pub fn write_distributions(path: &Path, rows: &[ScoreDistribution]) -> Result<()> {
    write_rows(path, rows.iter().map(DistributionRow::from))
}

pub fn read_distributions(path: &Path) -> Result<Vec<DistributionRow>> {
    read_rows(path)
}
