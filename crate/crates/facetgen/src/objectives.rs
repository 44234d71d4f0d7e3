//! The five training losses, expressed as reductions over built examples.
//!
//! Per query, every objective reduces a group of (input, target, weight)
//! examples to one scalar:
//!
//! * seq-default — one joint-sequence example in file order;
//! * seq-min-perm — minimum over permutation examples, gradient through the
//!   argmin only, recomputed at every optimization step;
//! * seq-avg-perm — mean over permutation examples;
//! * set-pred — weight-normalized sum over per-facet examples (weights 1/m);
//! * seq-set-pred — weight-normalized sum over prefix-conditioned examples.
//!
//! Except for seq-default, all are permutation-invariant under full
//! enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, QueryRecord};
use crate::error::{Error, Result};
use crate::permute::{Arrangement, TrainingExample};
use crate::seqmodel::{self, BatchItem, ParamValues, Parameters};
use crate::text::Vocabulary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveId {
    SeqDefault,
    SeqMinPerm,
    SeqAvgPerm,
    SetPred,
    SeqSetPred,
}

pub const ALL_OBJECTIVES: [ObjectiveId; 5] = [
    ObjectiveId::SeqDefault,
    ObjectiveId::SeqMinPerm,
    ObjectiveId::SeqAvgPerm,
    ObjectiveId::SetPred,
    ObjectiveId::SeqSetPred,
];

impl ObjectiveId {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveId::SeqDefault => "seq-default",
            ObjectiveId::SeqMinPerm => "seq-min-perm",
            ObjectiveId::SeqAvgPerm => "seq-avg-perm",
            ObjectiveId::SetPred => "set-pred",
            ObjectiveId::SeqSetPred => "seq-set-pred",
        }
    }

    /// Whether the objective emits one joint sequence of all facets (as
    /// opposed to one facet per decode).
    pub fn joint_target(&self) -> bool {
        matches!(
            self,
            ObjectiveId::SeqDefault | ObjectiveId::SeqMinPerm | ObjectiveId::SeqAvgPerm
        )
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_OBJECTIVES
            .iter()
            .find(|o| o.name() == s)
            .copied()
            .ok_or_else(|| Error::UnknownObjective(s.to_string()))
    }
}

/// How a group of examples reduces to one loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// Weight-normalized sum: sum(w_i * nll_i) / sum(w_i). With unit weights
    /// this is the arithmetic mean.
    Average,
    /// Minimum example NLL; gradient flows only through the argmin, ties
    /// broken by lowest example index.
    Min,
}

pub fn reduction_for(objective: ObjectiveId) -> Reduction {
    match objective {
        ObjectiveId::SeqMinPerm => Reduction::Min,
        _ => Reduction::Average,
    }
}

fn example_nlls(params: &Parameters, examples: &[TrainingExample]) -> Result<Vec<f64>> {
    examples
        .iter()
        .map(|e| seqmodel::example_nll(params, &e.input, &e.target))
        .collect()
}

fn argmin(nlls: &[f64]) -> usize {
    let mut best = 0;
    for (i, nll) in nlls.iter().enumerate().skip(1) {
        if *nll < nlls[best] {
            best = i;
        }
    }
    best
}

/// Loss of one example group under a reduction (forward only).
pub fn group_loss(
    params: &Parameters,
    examples: &[TrainingExample],
    reduction: Reduction,
) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("empty example group".into()));
    }
    let nlls = example_nlls(params, examples)?;
    match reduction {
        Reduction::Min => Ok(nlls[argmin(&nlls)]),
        Reduction::Average => {
            let total_w: f64 = examples.iter().map(|e| e.weight).sum();
            let total: f64 = examples
                .iter()
                .zip(&nlls)
                .map(|(e, nll)| e.weight * nll)
                .sum();
            Ok(total / total_w)
        }
    }
}

/// Loss and gradient of one example group. For the min reduction the argmin
/// is recomputed at the current parameters and only its example contributes
/// to the gradient.
pub fn group_loss_and_grad(
    params: &Parameters,
    examples: &[TrainingExample],
    reduction: Reduction,
) -> Result<(f64, ParamValues)> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("empty example group".into()));
    }
    match reduction {
        Reduction::Min => {
            let nlls = example_nlls(params, examples)?;
            let best = argmin(&nlls);
            let item = BatchItem {
                input: &examples[best].input,
                target: &examples[best].target,
                weight: 1.0,
            };
            seqmodel::nll_gradient(params, &[item], false)
        }
        Reduction::Average => {
            let batch: Vec<BatchItem<'_>> = examples
                .iter()
                .map(|e| BatchItem {
                    input: &e.input,
                    target: &e.target,
                    weight: e.weight,
                })
                .collect();
            seqmodel::nll_gradient(params, &batch, true)
        }
    }
}

fn joint_nll_for_order(
    params: &Parameters,
    record: &QueryRecord,
    vocab: &Vocabulary,
    order: &[usize],
) -> Result<f64> {
    let input = corpus::build_model_input(record, &[], params.config.max_input_tokens, vocab)?;
    let ordered: Vec<String> = order.iter().map(|&i| record.facets[i].clone()).collect();
    let target = corpus::build_joint_target(&ordered, vocab)?;
    seqmodel::example_nll(params, &input, &target)
}

/// Joint-sequence NLL of the facets in file order.
pub fn loss_seq_default(
    params: &Parameters,
    record: &QueryRecord,
    vocab: &Vocabulary,
) -> Result<f64> {
    let order: Vec<usize> = (0..record.facet_count()).collect();
    joint_nll_for_order(params, record, vocab, &order)
}

/// Minimum joint-sequence NLL over the given permutations, with the argmin
/// index (ties resolved to the lowest index).
pub fn seq_min_perm_argmin(
    params: &Parameters,
    record: &QueryRecord,
    vocab: &Vocabulary,
    perms: &[Arrangement],
) -> Result<(usize, f64)> {
    if perms.is_empty() {
        return Err(Error::InvalidArgument("no permutations given".into()));
    }
    let nlls: Vec<f64> = perms
        .iter()
        .map(|perm| joint_nll_for_order(params, record, vocab, perm))
        .collect::<Result<_>>()?;
    let best = argmin(&nlls);
    Ok((best, nlls[best]))
}

pub fn loss_seq_min_perm(
    params: &Parameters,
    record: &QueryRecord,
    vocab: &Vocabulary,
    perms: &[Arrangement],
) -> Result<f64> {
    Ok(seq_min_perm_argmin(params, record, vocab, perms)?.1)
}

/// Mean joint-sequence NLL over the given permutations.
pub fn loss_seq_avg_perm(
    params: &Parameters,
    record: &QueryRecord,
    vocab: &Vocabulary,
    perms: &[Arrangement],
) -> Result<f64> {
    if perms.is_empty() {
        return Err(Error::InvalidArgument("no permutations given".into()));
    }
    let mut total = 0.0;
    for perm in perms {
        total += joint_nll_for_order(params, record, vocab, perm)?;
    }
    Ok(total / perms.len() as f64)
}

/// Mean per-facet NLL with each facet as an independent target.
///
/// The per-facet NLLs are summed in a canonical (sorted-by-facet) order, so
/// the loss is bitwise invariant to the record's facet ordering.
pub fn loss_set_pred(params: &Parameters, record: &QueryRecord, vocab: &Vocabulary) -> Result<f64> {
    let input = corpus::build_model_input(record, &[], params.config.max_input_tokens, vocab)?;
    let context = seqmodel::encode(params, &input)?;
    let mut facets: Vec<&String> = record.facets.iter().collect();
    facets.sort();
    let mut total = 0.0;
    for facet in &facets {
        let target = corpus::build_facet_target(facet, vocab);
        total += seqmodel::sequence_nll(params, &context, &target)?;
    }
    Ok(total / record.facet_count() as f64)
}

/// Weight-normalized mean NLL over prefix-conditioned examples built by
/// the permutation expander. With full enumeration the example weights are
/// uniform over all (ordered prefix, remaining facet) pairs.
pub fn loss_seq_set_pred(params: &Parameters, examples: &[TrainingExample]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("empty example group".into()));
    }
    group_loss(params, examples, Reduction::Average)
}
