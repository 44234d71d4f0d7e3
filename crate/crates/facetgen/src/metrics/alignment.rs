//! Exact best-permutation alignment between two facet lists.

use crate::error::{Error, Result};

use super::MAX_ALIGNMENT;

fn alignment_score(matrix: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| matrix[i][j]).sum()
}

/// Standard in-place next lexicographic permutation; false once exhausted.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Permutation of 0..s-1 maximizing the sum of matched entries of a square
/// score matrix, found by exhaustive search in lexicographic order so ties
/// resolve to the lexicographically smallest permutation.
pub fn best_alignment(matrix: &[Vec<f64>]) -> Result<Vec<usize>> {
    let s = matrix.len();
    if s == 0 {
        return Err(Error::InvalidArgument("empty score matrix".into()));
    }
    if s > MAX_ALIGNMENT {
        return Err(Error::AlignmentTooLarge(s));
    }
    if matrix.iter().any(|row| row.len() != s) {
        return Err(Error::InvalidArgument("score matrix is not square".into()));
    }
    let mut perm: Vec<usize> = (0..s).collect();
    let mut best = perm.clone();
    let mut best_score = alignment_score(matrix, &perm);
    while next_permutation(&mut perm) {
        let score = alignment_score(matrix, &perm);
        if score > best_score {
            best_score = score;
            best = perm.clone();
        }
    }
    Ok(best)
}
