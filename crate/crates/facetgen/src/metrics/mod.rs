//! Evaluation metrics: matching against ground truth (term overlap, exact
//! match, set BLEU, set embedding score) and diversity within a generated
//! set (term diversity and embedding diversity, both computed on facet
//! bodies with query words removed), plus the facet-count ratio and the
//! paired significance test.

pub mod alignment;
pub mod bleu;
pub mod embedding;
pub mod ttest;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::QueryRecord;
use crate::error::{Error, Result};
use crate::text::{self, tokenize};

pub use alignment::best_alignment;
pub use bleu::{pair_bleu, pair_bleu_cumulative, set_bleu, set_bleu_mode};
pub use embedding::{
    embedding_diversity, greedy_match, set_embedding_score, EmbeddingProvider, TrigramHashEmbedding,
};
pub use ttest::{paired_ttest, PairedTTest};

/// Exhaustive alignment guard; facet lists never exceed 5 in practice.
pub const MAX_ALIGNMENT: usize = 8;

/// Precision / recall / F1 triple, each in [0, 1].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PRF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PRF {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PRF {
            precision,
            recall,
            f1,
        }
    }

    pub fn zero() -> Self {
        PRF::default()
    }
}

fn term_set(facets: &[String]) -> HashSet<String> {
    facets.iter().flat_map(|f| tokenize(f)).collect()
}

/// Term-level overlap between the unions of facet terms (set semantics).
pub fn term_overlap(pred: &[String], truth: &[String]) -> PRF {
    let pred_terms = term_set(pred);
    let truth_terms = term_set(truth);
    if pred_terms.is_empty() || truth_terms.is_empty() {
        return PRF::zero();
    }
    let common = pred_terms.intersection(&truth_terms).count() as f64;
    PRF::new(
        common / pred_terms.len() as f64,
        common / truth_terms.len() as f64,
    )
}

/// Facet-level matching on normalized string equality.
pub fn exact_match(pred: &[String], truth: &[String]) -> PRF {
    let pred_set: HashSet<String> = pred.iter().map(|f| text::normalize(f)).collect();
    let truth_set: HashSet<String> = truth.iter().map(|f| text::normalize(f)).collect();
    if pred_set.is_empty() || truth_set.is_empty() {
        return PRF::zero();
    }
    let matches = pred_set.intersection(&truth_set).count() as f64;
    PRF::new(
        matches / pred_set.len() as f64,
        matches / truth_set.len() as f64,
    )
}

/// Remove tokens that appear in the query from a facet; may return "".
pub fn facet_body(facet: &str, query: &str) -> String {
    let query_terms: HashSet<String> = tokenize(query).into_iter().collect();
    tokenize(facet)
        .into_iter()
        .filter(|t| !query_terms.contains(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mean over unordered pairs of one minus the term-overlap ratio
/// 2|A∩B| / (|A|+|B|). Two empty facets are identical (diversity 0); an
/// empty facet against a non-empty one is fully diverse. Undefined (None)
/// for fewer than two facets.
pub fn term_diversity(facets: &[String]) -> Option<f64> {
    if facets.len() < 2 {
        return None;
    }
    let sets: Vec<HashSet<String>> = facets
        .iter()
        .map(|f| tokenize(f).into_iter().collect())
        .collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let a = &sets[i];
            let b = &sets[j];
            let diversity = match (a.is_empty(), b.is_empty()) {
                (true, true) => 0.0,
                (true, false) | (false, true) => 1.0,
                (false, false) => {
                    let overlap =
                        2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64;
                    1.0 - overlap
                }
            };
            total += diversity;
            pairs += 1;
        }
    }
    Some(total / pairs as f64)
}

/// Mean of 1 - |predicted - truth| / truth over (predicted, truth) count
/// pairs. Individual terms may be negative; no clamping.
pub fn count_ratio(pairs: &[(usize, usize)]) -> f64 {
    debug_assert!(pairs.iter().all(|(_, g)| *g >= 1));
    let total: f64 = pairs
        .iter()
        .map(|&(f, g)| 1.0 - (f as f64 - g as f64).abs() / g as f64)
        .sum();
    total / pairs.len() as f64
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Set BLEU columns are computed for orders 1..=max_ngram.
    pub max_ngram: usize,
    /// Use cumulative BLEU instead of per-order precision.
    pub cumulative_bleu: bool,
    /// Normalize and deduplicate prediction facets before scoring.
    pub dedup_predictions: bool,
    pub with_diversity: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_ngram: 4,
            cumulative_bleu: false,
            dedup_predictions: true,
            with_diversity: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerQueryMetrics {
    pub query: String,
    pub pred_count: usize,
    pub truth_count: usize,
    pub term_overlap: PRF,
    pub exact_match: PRF,
    /// One entry per n-gram order, 1..=max_ngram.
    pub set_bleu: Vec<f64>,
    pub set_embedding: PRF,
    /// None when the prediction has fewer than two facets.
    pub term_diversity: Option<f64>,
    pub embedding_diversity: Option<PRF>,
    /// 1 - |pred_count - truth_count| / truth_count.
    pub count_ratio_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub query_count: usize,
    pub term_overlap: PRF,
    pub exact_match: PRF,
    pub set_bleu: Vec<f64>,
    pub set_embedding: PRF,
    /// Averaged over the queries where diversity is defined.
    pub term_diversity: Option<f64>,
    pub embedding_diversity: Option<PRF>,
    pub diversity_defined: usize,
    pub count_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<PerQueryMetrics>,
    pub macro_avg: MacroMetrics,
    /// Diversity of the gold facet bodies over the same query set, for the
    /// ground-truth row of diversity tables.
    pub gold_term_diversity: Option<f64>,
    pub gold_embedding_diversity: Option<PRF>,
}

fn mean_prf(values: impl Iterator<Item = PRF>, count: usize) -> PRF {
    let mut total = PRF::zero();
    for v in values {
        total.precision += v.precision;
        total.recall += v.recall;
        total.f1 += v.f1;
    }
    let n = count.max(1) as f64;
    PRF {
        precision: total.precision / n,
        recall: total.recall / n,
        f1: total.f1 / n,
    }
}

/// Score predictions against gold records.
///
/// Predictions are matched to gold records by normalized query; a prediction
/// whose query has no gold record is an error, as is predicting the same
/// query twice. Rows follow gold-corpus order over the predicted queries.
/// Matching metrics use full facet strings; diversity metrics use facet
/// bodies (query words removed) and are undefined for single-facet outputs.
pub fn evaluate(
    predictions: &[(String, Vec<String>)],
    gold: &[QueryRecord],
    provider: &dyn EmbeddingProvider,
    options: &EvalOptions,
) -> Result<MetricReport> {
    let mut gold_index: HashMap<String, usize> = HashMap::new();
    for (i, record) in gold.iter().enumerate() {
        gold_index.entry(record.query.clone()).or_insert(i);
    }
    let mut by_record: HashMap<usize, Vec<String>> = HashMap::new();
    let mut unmatched = Vec::new();
    for (query, facets) in predictions {
        let norm_query = text::normalize(query);
        match gold_index.get(&norm_query) {
            Some(&idx) => {
                if by_record.contains_key(&idx) {
                    return Err(Error::Format(format!(
                        "duplicate prediction for query {norm_query:?}"
                    )));
                }
                let mut facets: Vec<String> = facets
                    .iter()
                    .map(|f| text::normalize(f))
                    .filter(|f| !f.is_empty())
                    .collect();
                if options.dedup_predictions {
                    facets = crate::inference::dedup(&facets);
                }
                by_record.insert(idx, facets);
            }
            None => unmatched.push(norm_query),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::UnmatchedQueries(unmatched));
    }
    if by_record.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }

    let mut rows = Vec::with_capacity(by_record.len());
    let mut gold_term_div: Vec<f64> = Vec::new();
    let mut gold_emb_div: Vec<PRF> = Vec::new();
    for (idx, record) in gold.iter().enumerate() {
        let Some(pred) = by_record.get(&idx) else {
            continue;
        };
        let truth = &record.facets;
        let mut set_bleu_scores = Vec::with_capacity(options.max_ngram);
        for n in 1..=options.max_ngram {
            set_bleu_scores.push(bleu::set_bleu_mode(
                pred,
                truth,
                n,
                options.cumulative_bleu,
            )?);
        }
        let (div_term, div_emb) = if options.with_diversity {
            let bodies: Vec<String> = pred.iter().map(|f| facet_body(f, &record.query)).collect();
            (
                term_diversity(&bodies),
                embedding_diversity(&bodies, provider)?,
            )
        } else {
            (None, None)
        };
        if options.with_diversity {
            let gold_bodies: Vec<String> =
                truth.iter().map(|f| facet_body(f, &record.query)).collect();
            if let Some(v) = term_diversity(&gold_bodies) {
                gold_term_div.push(v);
            }
            if let Some(v) = embedding_diversity(&gold_bodies, provider)? {
                gold_emb_div.push(v);
            }
        }
        rows.push(PerQueryMetrics {
            query: record.query.clone(),
            pred_count: pred.len(),
            truth_count: truth.len(),
            term_overlap: term_overlap(pred, truth),
            exact_match: exact_match(pred, truth),
            set_bleu: set_bleu_scores,
            set_embedding: set_embedding_score(pred, truth, provider)?,
            term_diversity: div_term,
            embedding_diversity: div_emb,
            count_ratio_term: 1.0
                - (pred.len() as f64 - truth.len() as f64).abs() / truth.len() as f64,
        });
    }

    let n = rows.len();
    let macro_bleu: Vec<f64> = (0..options.max_ngram)
        .map(|k| rows.iter().map(|r| r.set_bleu[k]).sum::<f64>() / n as f64)
        .collect();
    let div_rows: Vec<f64> = rows.iter().filter_map(|r| r.term_diversity).collect();
    let emb_div_rows: Vec<PRF> = rows.iter().filter_map(|r| r.embedding_diversity).collect();
    let macro_avg = MacroMetrics {
        query_count: n,
        term_overlap: mean_prf(rows.iter().map(|r| r.term_overlap), n),
        exact_match: mean_prf(rows.iter().map(|r| r.exact_match), n),
        set_bleu: macro_bleu,
        set_embedding: mean_prf(rows.iter().map(|r| r.set_embedding), n),
        term_diversity: if div_rows.is_empty() {
            None
        } else {
            Some(div_rows.iter().sum::<f64>() / div_rows.len() as f64)
        },
        embedding_diversity: if emb_div_rows.is_empty() {
            None
        } else {
            Some(mean_prf(emb_div_rows.iter().copied(), emb_div_rows.len()))
        },
        diversity_defined: div_rows.len(),
        count_ratio: rows.iter().map(|r| r.count_ratio_term).sum::<f64>() / n as f64,
    };
    Ok(MetricReport {
        rows,
        macro_avg,
        gold_term_diversity: if gold_term_div.is_empty() {
            None
        } else {
            Some(gold_term_div.iter().sum::<f64>() / gold_term_div.len() as f64)
        },
        gold_embedding_diversity: if gold_emb_div.is_empty() {
            None
        } else {
            Some(mean_prf(gold_emb_div.iter().copied(), gold_emb_div.len()))
        },
    })
}
