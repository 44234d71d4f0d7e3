//! Experiment configuration: one JSON document driving corpus selection,
//! model dimensions, training, sampling, inference, and metric options.
//!
//! Two profiles bundle coherent defaults: `desk` (small dimensions, enough
//! epochs to learn the synthetic task) and `reference` (the published
//! hyperparameter set: beam 5, facet count 3, lengths 512/640/32/128,
//! permutation sampling 6 and the 6/8/9/11/13 schedule, learning rate 5e-5,
//! 5 epochs). Applying a profile overwrites the blocks it owns.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, LoadOutcome};
use crate::error::{Error, Result};
use crate::metrics::{EmbeddingProvider, EvalOptions, TrigramHashEmbedding};
use crate::objectives::{ObjectiveId, ALL_OBJECTIVES};
use crate::permute::{SamplingPlan, DEFAULT_PERMUTATIONS_PER_QUERY, SEQ_SET_SCHEDULE};
use crate::seqmodel::{AdamHyper, ModelConfig};
use crate::training::TrainHyper;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusSource {
    Native {
        path: PathBuf,
    },
    Mimics {
        tsv: PathBuf,
        #[serde(default)]
        snippets: Option<PathBuf>,
    },
    Synthetic {
        num_queries: usize,
        facet_count_weights: [f64; 5],
        vocab_size: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSettings {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub init_seed: u64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            embedding_dim: 24,
            hidden_dim: 32,
            init_seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LengthSettings {
    /// Encoder input budget for plain inputs.
    pub max_input_tokens: usize,
    /// Raised budget for prefix-conditioned inputs, so appended facets are
    /// not truncated.
    pub max_input_tokens_prefixed: usize,
    /// Output budget for joint facet sequences.
    pub max_output_joint: usize,
    /// Output budget for single-facet targets.
    pub max_output_facet: usize,
}

impl Default for LengthSettings {
    fn default() -> Self {
        LengthSettings {
            max_input_tokens: 512,
            max_input_tokens_prefixed: 640,
            max_output_joint: 128,
            max_output_facet: 32,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub sampling_seed: u64,
    pub shuffle_seed: u64,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        TrainingSettings {
            epochs: 200,
            batch_size: 16,
            learning_rate: 1e-2,
            weight_decay: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            sampling_seed: 11,
            shuffle_seed: 13,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSettings {
    pub permutations_per_query: usize,
    pub seq_set_schedule: [usize; 5],
    /// Sample permutations with replacement instead of clamping to m!.
    pub with_replacement: bool,
}

impl Default for SamplingSettings {
    fn default() -> Self {
        SamplingSettings {
            permutations_per_query: DEFAULT_PERMUTATIONS_PER_QUERY,
            seq_set_schedule: SEQ_SET_SCHEDULE,
            with_replacement: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceSettings {
    /// Facet count z for the count-controllable decoders.
    pub facet_count: usize,
    pub beam_width: usize,
    /// Skip duplicate facets among top beams when collecting top-z.
    pub distinct_set: bool,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        InferenceSettings {
            facet_count: 3,
            beam_width: 5,
            distinct_set: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub max_ngram: usize,
    pub cumulative_bleu: bool,
    /// Embedding provider name; "trigram" is the built-in default.
    pub embedding: String,
    pub embedding_dim: usize,
    pub with_diversity: bool,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            max_ngram: 4,
            cumulative_bleu: false,
            embedding: "trigram".to_string(),
            embedding_dim: 64,
            with_diversity: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabSettings {
    pub min_frequency: usize,
}

impl Default for VocabSettings {
    fn default() -> Self {
        VocabSettings { min_frequency: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Reference,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "reference" => Ok(Profile::Reference),
            other => Err(Error::Config(format!(
                "unknown profile {other:?} (expected desk or reference)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<ObjectiveId>,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub lengths: LengthSettings,
    #[serde(default)]
    pub training: TrainingSettings,
    #[serde(default)]
    pub sampling: SamplingSettings,
    #[serde(default)]
    pub inference: InferenceSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    #[serde(default)]
    pub vocab: VocabSettings,
}

fn default_objectives() -> Vec<ObjectiveId> {
    ALL_OBJECTIVES.to_vec()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&json)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.objectives.is_empty() {
            return Err(Error::Config("at least one objective required".into()));
        }
        if self.inference.facet_count < 1 || self.inference.beam_width < 1 {
            return Err(Error::Config("inference counts must be >= 1".into()));
        }
        if self.metrics.max_ngram < 1 {
            return Err(Error::Config("max_ngram must be >= 1".into()));
        }
        if self.sampling.permutations_per_query < 1
            || self.sampling.seq_set_schedule.iter().any(|&c| c < 1)
        {
            return Err(Error::Config("sampling counts must be >= 1".into()));
        }
        Ok(())
    }

    /// Overwrite the profile-owned blocks (training, lengths, sampling,
    /// inference). Corpus, objectives, model dims, and metric options are
    /// left untouched.
    pub fn apply_profile(&mut self, profile: Profile) {
        match profile {
            Profile::Desk => {
                self.training = TrainingSettings::default();
                self.lengths = LengthSettings::default();
                self.sampling = SamplingSettings::default();
                self.inference = InferenceSettings::default();
            }
            Profile::Reference => {
                self.training = TrainingSettings {
                    epochs: 5,
                    batch_size: 16,
                    learning_rate: 5e-5,
                    ..TrainingSettings::default()
                };
                self.lengths = LengthSettings::default();
                self.sampling = SamplingSettings::default();
                self.inference = InferenceSettings::default();
            }
        }
    }

    /// Derive all randomness from one seed.
    pub fn apply_seed_override(&mut self, seed: u64) {
        self.model.init_seed = seed;
        self.training.sampling_seed = seed.wrapping_add(1);
        self.training.shuffle_seed = seed.wrapping_add(2);
        if let CorpusSource::Synthetic {
            seed: corpus_seed, ..
        } = &mut self.corpus
        {
            *corpus_seed = seed.wrapping_add(3);
        }
    }

    /// Load or synthesize the configured corpus.
    pub fn resolve_corpus(&self) -> Result<LoadOutcome> {
        match &self.corpus {
            CorpusSource::Native { path } => corpus::load_native(path),
            CorpusSource::Mimics { tsv, snippets } => corpus::load_mimics(tsv, snippets.as_deref()),
            CorpusSource::Synthetic {
                num_queries,
                facet_count_weights,
                vocab_size,
                seed,
            } => Ok(LoadOutcome {
                records: corpus::synthesize_corpus(
                    *num_queries,
                    facet_count_weights,
                    *vocab_size,
                    *seed,
                )?,
                skipped: Vec::new(),
            }),
        }
    }

    /// Model configuration for one objective: the prefix-conditioned
    /// objective gets the raised input budget, joint objectives the long
    /// output budget.
    pub fn model_config_for(&self, objective: ObjectiveId, vocab_size: usize) -> ModelConfig {
        let mut config =
            ModelConfig::new(vocab_size, self.model.embedding_dim, self.model.hidden_dim);
        config.init_seed = self.model.init_seed;
        config.max_input_tokens = if objective == ObjectiveId::SeqSetPred {
            self.lengths.max_input_tokens_prefixed
        } else {
            self.lengths.max_input_tokens
        };
        config.max_output_tokens = if objective.joint_target() {
            self.lengths.max_output_joint
        } else {
            self.lengths.max_output_facet
        };
        config
    }

    pub fn sampling_plan_for(&self, objective: ObjectiveId) -> SamplingPlan {
        SamplingPlan {
            objective,
            permutations_per_query: self.sampling.permutations_per_query,
            seq_set_schedule: self.sampling.seq_set_schedule,
            with_replacement: self.sampling.with_replacement,
            epoch_seed: 0,
        }
    }

    pub fn train_hyper(&self) -> TrainHyper {
        TrainHyper {
            epochs: self.training.epochs,
            batch_size: self.training.batch_size,
            adam: AdamHyper {
                learning_rate: self.training.learning_rate,
                beta1: self.training.beta1,
                beta2: self.training.beta2,
                epsilon: self.training.epsilon,
                weight_decay: self.training.weight_decay,
            },
            sampling_seed: self.training.sampling_seed,
            shuffle_seed: self.training.shuffle_seed,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            max_ngram: self.metrics.max_ngram,
            cumulative_bleu: self.metrics.cumulative_bleu,
            dedup_predictions: true,
            with_diversity: self.metrics.with_diversity,
        }
    }

    pub fn embedding_provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        match self.metrics.embedding.as_str() {
            "trigram" => Ok(Box::new(TrigramHashEmbedding {
                dim: self.metrics.embedding_dim,
            })),
            other => Err(Error::Config(format!(
                "unknown embedding provider {other:?}"
            ))),
        }
    }

    /// A ready-to-run synthetic experiment at desk scale.
    pub fn desk_synthetic(num_queries: usize, seed: u64) -> Self {
        ExperimentConfig {
            corpus: CorpusSource::Synthetic {
                num_queries,
                facet_count_weights: [0.0, 0.25, 0.75, 0.0, 0.0],
                vocab_size: 60,
                seed,
            },
            objectives: default_objectives(),
            model: ModelSettings::default(),
            lengths: LengthSettings::default(),
            training: TrainingSettings::default(),
            sampling: SamplingSettings::default(),
            inference: InferenceSettings::default(),
            metrics: MetricSettings::default(),
            vocab: VocabSettings::default(),
        }
    }
}
