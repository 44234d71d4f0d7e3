//! Minibatch training loop over per-query example groups.
//!
//! Each epoch rebuilds the training examples with a fresh sampling seed, so
//! the permutation-sampling objectives see new orderings every epoch. A batch
//! is a set of query groups; the batch loss is the mean of the group losses
//! and one optimizer update is applied per batch. Everything is a pure
//! function of (corpus, config, seeds): reruns are bit-identical.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::QueryRecord;
use crate::error::{Error, Result};
use crate::objectives::{self, ObjectiveId};
use crate::permute::{self, SamplingPlan, SequenceLimits, TrainingExample};
use crate::seqmodel::{self, AdamHyper, ModelConfig, OptimizerState, ParamValues, Parameters};
use crate::text::Vocabulary;

#[derive(Clone, Debug, Serialize)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamHyper,
    /// Base seed for per-epoch example sampling.
    pub sampling_seed: u64,
    /// Base seed for per-epoch group shuffling.
    pub shuffle_seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            epochs: 200,
            batch_size: 16,
            adam: AdamHyper::default(),
            sampling_seed: 1,
            shuffle_seed: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainingLog {
    pub objective: ObjectiveId,
    pub init_seed: u64,
    pub sampling_seed: u64,
    pub shuffle_seed: u64,
    pub epoch_losses: Vec<f64>,
}

/// Build the per-query example groups for one epoch.
pub fn build_epoch_groups(
    objective: ObjectiveId,
    corpus: &[QueryRecord],
    vocab: &Vocabulary,
    plan: &SamplingPlan,
    limits: SequenceLimits,
) -> Result<Vec<Vec<TrainingExample>>> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, record)| {
            permute::build_examples(objective, record, i as u64, plan, vocab, limits)
        })
        .collect()
}

/// Train a model from scratch under an objective. `base_plan.epoch_seed` is
/// ignored; each epoch derives its own seed from `hyper.sampling_seed`.
pub fn train(
    objective: ObjectiveId,
    corpus: &[QueryRecord],
    vocab: &Vocabulary,
    config: &ModelConfig,
    base_plan: &SamplingPlan,
    hyper: &TrainHyper,
) -> Result<(Parameters, TrainingLog)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if base_plan.objective != objective {
        return Err(Error::InvalidArgument(format!(
            "sampling plan built for {}, training {}",
            base_plan.objective, objective
        )));
    }
    if hyper.batch_size < 1 {
        return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
    }
    let limits = SequenceLimits {
        max_input_tokens: config.max_input_tokens,
        max_output_tokens: config.max_output_tokens,
    };
    let reduction = objectives::reduction_for(objective);
    let mut params = seqmodel::init_parameters(config)?;
    let mut opt = OptimizerState::new(config);
    let mut log = TrainingLog {
        objective,
        init_seed: config.init_seed,
        sampling_seed: hyper.sampling_seed,
        shuffle_seed: hyper.shuffle_seed,
        epoch_losses: Vec::with_capacity(hyper.epochs),
    };

    for epoch in 0..hyper.epochs {
        let mut plan = base_plan.clone();
        plan.epoch_seed = hyper.sampling_seed.wrapping_add(epoch as u64);
        let groups = build_epoch_groups(objective, corpus, vocab, &plan, limits)?;

        let mut order: Vec<usize> = (0..groups.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.shuffle_seed.wrapping_add(epoch as u64));
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let mut batch_grad = ParamValues::zeros(config);
            let mut batch_loss = 0.0;
            for &gi in chunk {
                let (loss, grads) =
                    objectives::group_loss_and_grad(&params, &groups[gi], reduction)?;
                batch_loss += loss;
                batch_grad.add_scaled(&grads, 1.0);
            }
            let inv = 1.0 / chunk.len() as f64;
            batch_loss *= inv;
            batch_grad.scale(inv);
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: batch_loss,
                });
            }
            epoch_loss += batch_loss * chunk.len() as f64;
            seqmodel::apply_update(&mut params, &batch_grad, &mut opt, &hyper.adam);
        }
        log.epoch_losses.push(epoch_loss / groups.len() as f64);
    }
    Ok((params, log))
}
