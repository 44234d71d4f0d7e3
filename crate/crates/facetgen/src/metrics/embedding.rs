//! Token-embedding similarity scores with greedy matching, plus the default
//! dependency-free embedding provider.

use crate::error::{Error, Result};
use crate::text::tokenize;

use super::alignment::best_alignment;
use super::PRF;

/// Deterministic per-token embeddings: one unit-norm vector per whitespace
/// token of the facet, same input always giving the same output.
pub trait EmbeddingProvider {
    fn embed(&self, facet: &str) -> Vec<Vec<f64>>;
}

/// Hashed character-trigram embeddings. Each token becomes the normalized
/// sum of one-hot basis vectors indexed by a stable hash of its character
/// trigrams (tokens shorter than three characters hash as a whole). Related
/// surface forms share trigrams and score a nonzero similarity; this is a
/// stand-in for contextual embeddings, not an approximation of them.
#[derive(Clone, Debug)]
pub struct TrigramHashEmbedding {
    pub dim: usize,
}

impl Default for TrigramHashEmbedding {
    fn default() -> Self {
        TrigramHashEmbedding { dim: 64 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl EmbeddingProvider for TrigramHashEmbedding {
    fn embed(&self, facet: &str) -> Vec<Vec<f64>> {
        tokenize(facet)
            .iter()
            .map(|token| {
                let mut vec = vec![0.0; self.dim];
                let chars: Vec<char> = token.chars().collect();
                if chars.len() < 3 {
                    vec[(fnv1a(token.as_bytes()) % self.dim as u64) as usize] += 1.0;
                } else {
                    for window in chars.windows(3) {
                        let gram: String = window.iter().collect();
                        vec[(fnv1a(gram.as_bytes()) % self.dim as u64) as usize] += 1.0;
                    }
                }
                let norm = vec.iter().map(|v| v * v).sum::<f64>().sqrt();
                for v in vec.iter_mut() {
                    *v /= norm;
                }
                vec
            })
            .collect()
    }
}

fn validate_unit_norm(vectors: &[Vec<f64>]) -> Result<()> {
    for v in vectors {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::BadEmbedding(format!(
                "token vector norm {norm} is not 1"
            )));
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy matching between two token-embedding lists: precision is the mean
/// over candidate tokens of the best cosine against any reference token,
/// recall the symmetric quantity. Scores clamp to [0, 1].
pub fn greedy_match(candidate: &[Vec<f64>], reference: &[Vec<f64>]) -> PRF {
    if candidate.is_empty() || reference.is_empty() {
        return PRF::zero();
    }
    let best_against = |from: &[Vec<f64>], to: &[Vec<f64>]| -> f64 {
        let total: f64 = from
            .iter()
            .map(|v| {
                to.iter()
                    .map(|w| dot(v, w))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        (total / from.len() as f64).clamp(0.0, 1.0)
    };
    PRF::new(
        best_against(candidate, reference),
        best_against(reference, candidate),
    )
}

fn embed_all(facets: &[String], provider: &dyn EmbeddingProvider) -> Result<Vec<Vec<Vec<f64>>>> {
    facets
        .iter()
        .map(|f| {
            let vectors = provider.embed(f);
            validate_unit_norm(&vectors)?;
            Ok(vectors)
        })
        .collect()
}

/// Set-level embedding score: pad to equal size with empty facets (pairs
/// with an empty side score 0), align by greedy-match F1, and report the
/// means of the aligned precision/recall/F1.
pub fn set_embedding_score(
    pred: &[String],
    truth: &[String],
    provider: &dyn EmbeddingProvider,
) -> Result<PRF> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("empty truth facet list".into()));
    }
    let s = pred.len().max(truth.len());
    let mut pred_emb = embed_all(pred, provider)?;
    let mut truth_emb = embed_all(truth, provider)?;
    pred_emb.resize(s, Vec::new());
    truth_emb.resize(s, Vec::new());

    let mut pairs = vec![vec![PRF::zero(); s]; s];
    for i in 0..s {
        for j in 0..s {
            pairs[i][j] = greedy_match(&pred_emb[i], &truth_emb[j]);
        }
    }
    let f1_matrix: Vec<Vec<f64>> = pairs
        .iter()
        .map(|row| row.iter().map(|p| p.f1).collect())
        .collect();
    let alignment = best_alignment(&f1_matrix)?;
    let mut total = PRF::zero();
    for (i, &j) in alignment.iter().enumerate() {
        total.precision += pairs[i][j].precision;
        total.recall += pairs[i][j].recall;
        total.f1 += pairs[i][j].f1;
    }
    Ok(PRF {
        precision: total.precision / s as f64,
        recall: total.recall / s as f64,
        f1: total.f1 / s as f64,
    })
}

/// One minus the mean pairwise greedy-match score, componentwise, over all
/// unordered facet pairs. Pairs where both facets are empty count as
/// identical (diversity 0); an empty facet against a non-empty one counts as
/// fully diverse. Fewer than two facets is undefined.
pub fn embedding_diversity(
    facets: &[String],
    provider: &dyn EmbeddingProvider,
) -> Result<Option<PRF>> {
    if facets.len() < 2 {
        return Ok(None);
    }
    let embedded = embed_all(facets, provider)?;
    let mut total = PRF::zero();
    let mut pairs = 0usize;
    for i in 0..embedded.len() {
        for j in (i + 1)..embedded.len() {
            let sim = match (embedded[i].is_empty(), embedded[j].is_empty()) {
                (true, true) => PRF {
                    precision: 1.0,
                    recall: 1.0,
                    f1: 1.0,
                },
                (true, false) | (false, true) => PRF::zero(),
                (false, false) => greedy_match(&embedded[i], &embedded[j]),
            };
            total.precision += sim.precision;
            total.recall += sim.recall;
            total.f1 += sim.f1;
            pairs += 1;
        }
    }
    let n = pairs as f64;
    Ok(Some(PRF {
        precision: (1.0 - total.precision / n).clamp(0.0, 1.0),
        recall: (1.0 - total.recall / n).clamp(0.0, 1.0),
        f1: (1.0 - total.f1 / n).clamp(0.0, 1.0),
    }))
}
