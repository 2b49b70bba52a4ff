//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use numur_core::{Destination, Method};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::pipeline::{self, Target, UnlearnRequest, Workspace};

#[derive(Debug, Parser)]
#[command(name = "numur", version, about = "Train a small neural ranker and unlearn queries or documents from it")]
pub struct Cli {
    /// Experiment configuration (JSON). Defaults apply to missing fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for corpus generation, training and unlearning.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "numur-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Forget spec (JSON). Defaults to the document-removal request at the
    /// largest configured fraction.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic corpus and removal requests.
    Gen,
    /// Train the ranker on the full training set.
    Train,
    /// Train from scratch on the retained samples of a request.
    Retrain(SpecArg),
    /// Write the forget, entangled and disjoint sets of a request.
    Partition(SpecArg),
    /// Unlearn a request from the trained model.
    Unlearn {
        #[command(flatten)]
        spec: SpecArg,
        /// cocol, cf, amnesiac, neggrad, ssd or badt.
        #[arg(long, conflicts_with = "all_methods")]
        method: Option<String>,
        /// Run every method.
        #[arg(long)]
        all_methods: bool,
        /// Stop at a destination derived from the retrained model (d1, d2, d3).
        #[arg(long, conflicts_with = "delta")]
        dest: Option<String>,
        /// Explicit forget-MRR target.
        #[arg(long)]
        delta: Option<f64>,
        /// Name of the run directory.
        #[arg(long)]
        name: Option<String>,
        /// Disable the entangled-partner term (CoCoL ablation).
        #[arg(long)]
        no_entangled: bool,
        /// Disable the consistent phase on the disjoint set (CoCoL ablation).
        #[arg(long)]
        no_consistent: bool,
    },
    /// Evaluate a model file.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value = "model")]
        name: String,
    },
    /// Aggregate run reports into a table and charts.
    Report {
        /// Run directories; defaults to every run under the output directory.
        runs: Vec<PathBuf>,
    },
}

impl Cli {
    pub fn workspace(&self) -> Result<Workspace> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(Workspace::new(&self.out, cfg))
    }
}

fn spec_path(ws: &Workspace, arg: &SpecArg) -> PathBuf {
    arg.spec.clone().unwrap_or_else(|| {
        let f = ws.cfg.fractions.iter().copied().fold(f64::MIN, f64::max);
        ws.spec_path(numur_core::RemovalKind::DocumentRemoval, f)
    })
}

/// Executes the parsed command; returns the paths it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut ws = cli.workspace()?;
    match &cli.command {
        Command::Gen => {
            let g = pipeline::gen(&ws)?;
            let mut out = vec![g.corpus_dir];
            out.extend(g.specs);
            Ok(out)
        }
        Command::Train => Ok(vec![pipeline::train(&ws)?]),
        Command::Retrain(s) => Ok(vec![pipeline::retrain(&ws, &spec_path(&ws, s))?]),
        Command::Partition(s) => Ok(vec![pipeline::partition(&ws, &spec_path(&ws, s))?]),
        Command::Unlearn {
            spec,
            method,
            all_methods,
            dest,
            delta,
            name,
            no_entangled,
            no_consistent,
        } => {
            let methods = if *all_methods {
                Method::ALL.to_vec()
            } else {
                let m = method.clone().unwrap_or_else(|| ws.cfg.unlearn.method.clone());
                vec![m.parse::<Method>()?]
            };
            let target = match (dest, delta) {
                (Some(d), _) => Target::Destination(d.parse::<Destination>()?),
                (None, Some(x)) => Target::Delta(*x),
                (None, None) => Target::Configured,
            };
            ws.cfg.unlearn.entangled_term &= !no_entangled;
            ws.cfg.unlearn.consistent_phase &= !no_consistent;
            let req = UnlearnRequest {
                spec: spec_path(&ws, spec),
                methods,
                target,
                name: name.clone(),
            };
            pipeline::unlearn(&ws, &req)
        }
        Command::Eval { model, spec, name } => {
            let model = model.clone().unwrap_or_else(|| ws.train_dir().join("model.bin"));
            let spec = spec_path(&ws, spec);
            Ok(vec![pipeline::eval(&ws, &model, Some(&spec), name)?])
        }
        Command::Report { runs } => Ok(vec![pipeline::report(&ws, runs)?]),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code,
/// printing errors as `ERROR:<code>: <message>`.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            eprintln!("ERROR:usage: {}", e.to_string().trim_end());
            return 2;
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            report_error(&e);
            1
        }
    }
}

fn report_error(e: &Error) {
    eprintln!("ERROR:{}: {e}", e.code());
}
