//! Serialisable experiment configuration and its mapping onto the core
//! configuration types.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use numur_core::{Ablation, Method, MethodParams, SyntheticConfig, TrainConfig, UnlearnConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::read_json;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub n_queries: usize,
    pub n_docs: usize,
    pub vocab_size: usize,
    pub positives_per_query: usize,
    pub pool_size: usize,
    pub entanglement_rate: f64,
    pub test_fraction: f64,
    pub block_len: usize,
    pub query_noise: usize,
    pub doc_noise: usize,
    pub labelled_negatives: usize,
    pub common_vocab: usize,
    pub n_topics: usize,
    pub topic_len: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let s = SyntheticConfig::default();
        CorpusConfig {
            n_queries: s.n_queries,
            n_docs: s.n_docs,
            vocab_size: s.vocab_size,
            positives_per_query: s.positives_per_query,
            pool_size: s.pool_size,
            entanglement_rate: s.entanglement_rate,
            test_fraction: s.test_fraction,
            block_len: s.block_len,
            query_noise: s.query_noise,
            doc_noise: s.doc_noise,
            labelled_negatives: s.labelled_negatives,
            common_vocab: s.common_vocab,
            n_topics: s.n_topics,
            topic_len: s.topic_len,
        }
    }
}

impl CorpusConfig {
    pub fn to_core(&self, seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            n_queries: self.n_queries,
            n_docs: self.n_docs,
            vocab_size: self.vocab_size,
            positives_per_query: self.positives_per_query,
            pool_size: self.pool_size,
            entanglement_rate: self.entanglement_rate,
            test_fraction: self.test_fraction,
            seed,
            block_len: self.block_len,
            query_noise: self.query_noise,
            doc_noise: self.doc_noise,
            labelled_negatives: self.labelled_negatives,
            common_vocab: self.common_vocab,
            n_topics: self.n_topics,
            topic_len: self.topic_len,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub margin: f64,
    pub negatives_per_positive: usize,
    pub dim: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            margin: t.margin,
            negatives_per_positive: t.negatives_per_positive,
            dim: t.dim,
        }
    }
}

impl TrainSection {
    pub fn to_core(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            margin: self.margin,
            seed,
            negatives_per_positive: self.negatives_per_positive,
            dim: self.dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnlearnSection {
    pub delta_target: f64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    /// Per-method learning rates overriding `learning_rate`.
    pub method_learning_rates: BTreeMap<String, f64>,
    pub check_every: usize,
    pub method: String,
    pub ssd_alpha: f64,
    pub ssd_lambda: f64,
    pub margin: f64,
    pub negatives_per_positive: usize,
    pub entangled_term: bool,
    pub consistent_phase: bool,
}

impl Default for UnlearnSection {
    fn default() -> Self {
        let u = UnlearnConfig::default();
        UnlearnSection {
            delta_target: u.delta_target,
            max_epochs: u.max_epochs,
            learning_rate: u.learning_rate,
            method_learning_rates: BTreeMap::new(),
            check_every: u.check_every,
            method: u.method.name().into(),
            ssd_alpha: u.params.ssd_alpha,
            ssd_lambda: u.params.ssd_lambda,
            margin: u.params.margin,
            negatives_per_positive: u.params.negatives_per_positive,
            entangled_term: u.ablation.entangled_term,
            consistent_phase: u.ablation.consistent_phase,
        }
    }
}

impl UnlearnSection {
    pub fn learning_rate_for(&self, method: Method) -> f64 {
        self.method_learning_rates
            .get(method.name())
            .copied()
            .unwrap_or(self.learning_rate)
    }

    pub fn to_core(&self, method: Method, seed: u64) -> UnlearnConfig {
        UnlearnConfig {
            delta_target: self.delta_target,
            max_epochs: self.max_epochs,
            learning_rate: self.learning_rate_for(method),
            seed,
            check_every: self.check_every,
            method,
            params: MethodParams {
                ssd_alpha: self.ssd_alpha,
                ssd_lambda: self.ssd_lambda,
                margin: self.margin,
                negatives_per_positive: self.negatives_per_positive,
            },
            ablation: Ablation {
                entangled_term: self.entangled_term,
                consistent_phase: self.consistent_phase,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Existing corpus directory; when absent `gen` synthesises one.
    pub data_dir: Option<PathBuf>,
    pub corpus: CorpusConfig,
    pub train: TrainSection,
    pub unlearn: UnlearnSection,
    /// Removal fractions for which `gen` samples requests.
    pub fractions: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            data_dir: None,
            corpus: CorpusConfig::default(),
            train: TrainSection::default(),
            unlearn: UnlearnSection::default(),
            fractions: vec![0.05, 0.15, 0.25],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::Config("fractions must list at least one removal fraction".into()));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::Config(format!("removal fraction {f} outside (0, 1)")));
        }
        for name in self.unlearn.method_learning_rates.keys() {
            name.parse::<Method>()?;
        }
        self.unlearn.method.parse::<Method>()?;
        self.corpus.to_core(self.seed).validate()?;
        self.train.to_core(self.seed).validate()?;
        Ok(())
    }

    pub fn synthetic(&self) -> SyntheticConfig {
        self.corpus.to_core(self.seed)
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train.to_core(self.seed)
    }

    pub fn unlearn_config(&self, method: Method) -> UnlearnConfig {
        self.unlearn.to_core(method, self.seed)
    }
}

/// `run_config.json`: the unlearning configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: String,
    pub delta_target: f64,
    /// Named destination the target was resolved from, if any.
    pub destination: Option<String>,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub check_every: usize,
    pub method_params: MethodParamsFile,
    pub ablation: AblationFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodParamsFile {
    pub ssd_alpha: f64,
    pub ssd_lambda: f64,
    pub margin: f64,
    pub negatives_per_positive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationFile {
    pub entangled_term: bool,
    pub consistent_phase: bool,
}

impl RunConfig {
    pub fn from_core(cfg: &UnlearnConfig, destination: Option<String>) -> Self {
        RunConfig {
            method: cfg.method.name().into(),
            delta_target: cfg.delta_target,
            destination,
            max_epochs: cfg.max_epochs,
            learning_rate: cfg.learning_rate,
            seed: cfg.seed,
            check_every: cfg.check_every,
            method_params: MethodParamsFile {
                ssd_alpha: cfg.params.ssd_alpha,
                ssd_lambda: cfg.params.ssd_lambda,
                margin: cfg.params.margin,
                negatives_per_positive: cfg.params.negatives_per_positive,
            },
            ablation: AblationFile {
                entangled_term: cfg.ablation.entangled_term,
                consistent_phase: cfg.ablation.consistent_phase,
            },
        }
    }

    pub fn to_core(&self) -> Result<UnlearnConfig> {
        Ok(UnlearnConfig {
            delta_target: self.delta_target,
            max_epochs: self.max_epochs,
            learning_rate: self.learning_rate,
            seed: self.seed,
            check_every: self.check_every,
            method: self.method.parse()?,
            params: MethodParams {
                ssd_alpha: self.method_params.ssd_alpha,
                ssd_lambda: self.method_params.ssd_lambda,
                margin: self.method_params.margin,
                negatives_per_positive: self.method_params.negatives_per_positive,
            },
            ablation: Ablation {
                entangled_term: self.ablation.entangled_term,
                consistent_phase: self.ablation.consistent_phase,
            },
        })
    }
}
