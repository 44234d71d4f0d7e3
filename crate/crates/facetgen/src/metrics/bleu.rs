//! Pairwise BLEU and its set-level alignment variant.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::tokenize;

use super::alignment::best_alignment;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

fn modified_precision(candidate: &[String], reference: &[String], n: usize) -> f64 {
    if candidate.len() < n {
        return 0.0;
    }
    let cand_counts = ngram_counts(candidate, n);
    let ref_counts = ngram_counts(reference, n);
    let total: usize = cand_counts.values().sum();
    let clipped: usize = cand_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    if clipped == 0 {
        return 0.0;
    }
    clipped as f64 / total as f64
}

fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len < reference_len {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    } else {
        1.0
    }
}

/// Modified n-gram precision of a single order with clipped counts and the
/// brevity penalty. No smoothing: a candidate shorter than n tokens or with
/// zero matched n-grams scores 0.
pub fn pair_bleu(candidate: &str, reference: &str, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    let cand = tokenize(candidate);
    let reference = tokenize(reference);
    let precision = modified_precision(&cand, &reference, n);
    if precision == 0.0 {
        return Ok(0.0);
    }
    Ok(precision * brevity_penalty(cand.len(), reference.len()))
}

/// Cumulative variant: geometric mean of the modified precisions of orders
/// 1..=n, times the brevity penalty. Any zero order zeroes the score.
pub fn pair_bleu_cumulative(candidate: &str, reference: &str, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    let cand = tokenize(candidate);
    let reference = tokenize(reference);
    let mut log_sum = 0.0;
    for order in 1..=n {
        let p = modified_precision(&cand, &reference, order);
        if p == 0.0 {
            return Ok(0.0);
        }
        log_sum += p.ln();
    }
    Ok((log_sum / n as f64).exp() * brevity_penalty(cand.len(), reference.len()))
}

fn padded(list: &[String], len: usize) -> Vec<String> {
    let mut out = list.to_vec();
    out.resize(len, String::new());
    out
}

/// Set-level BLEU of order n: pad the shorter list with empty strings (any
/// pair involving an empty string scores 0), align by the best permutation,
/// and average the aligned pair scores.
pub fn set_bleu_mode(pred: &[String], truth: &[String], n: usize, cumulative: bool) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("empty truth facet list".into()));
    }
    let s = pred.len().max(truth.len());
    let pred = padded(pred, s);
    let truth = padded(truth, s);
    let mut matrix = vec![vec![0.0; s]; s];
    for (i, p) in pred.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            matrix[i][j] = if cumulative {
                pair_bleu_cumulative(p, t, n)?
            } else {
                pair_bleu(p, t, n)?
            };
        }
    }
    let alignment = best_alignment(&matrix)?;
    let total: f64 = alignment
        .iter()
        .enumerate()
        .map(|(i, &j)| matrix[i][j])
        .sum();
    Ok(total / s as f64)
}

/// Per-order set BLEU (the default mode).
pub fn set_bleu(pred: &[String], truth: &[String], n: usize) -> Result<f64> {
    set_bleu_mode(pred, truth, n, false)
}
