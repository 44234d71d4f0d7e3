//! Data model, corpus ingestion, synthetic corpus generation, and
//! encoder/target sequence construction.
//!
//! Two on-disk corpus formats are supported:
//!
//! * native: line-delimited JSON, one object per line with keys `query`
//!   (string), `facets` (string array), and optional `documents` (string
//!   array);
//! * a tab-separated file with a header row containing `query` and
//!   `option_1`..`option_5` columns, optionally paired with a snippets
//!   companion file (JSONL objects with keys `query` and `snippets`).
//!
//! Predictions for external scoring use the same JSONL shape as the native
//! format minus documents: `{"query": ..., "facets": [...]}`.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, TokenSequence, Vocabulary, EOS_ID, FACET_SEP_ID, SEP_ID};

pub const MAX_FACETS: usize = 5;
pub const MAX_DOCUMENTS: usize = 10;

/// One (query, documents, facet set) triple. All strings are normalized at
/// construction; facet order is the file order and carries no meaning beyond
/// presentation unless an objective chooses to use it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query: String,
    pub documents: Vec<String>,
    pub facets: Vec<String>,
}

impl QueryRecord {
    /// Normalize and validate. Empty documents are dropped and at most
    /// [`MAX_DOCUMENTS`] are kept; facets must be 1..=5, non-empty, and
    /// pairwise distinct after normalization.
    pub fn new(query: &str, documents: Vec<String>, facets: Vec<String>) -> Result<Self> {
        let query = text::normalize(query);
        if query.is_empty() {
            return Err(Error::Format("empty query".into()));
        }
        let documents: Vec<String> = documents
            .iter()
            .map(|d| text::normalize(d))
            .filter(|d| !d.is_empty())
            .take(MAX_DOCUMENTS)
            .collect();
        let facets: Vec<String> = facets.iter().map(|f| text::normalize(f)).collect();
        if facets.is_empty() || facets.len() > MAX_FACETS {
            return Err(Error::Format(format!(
                "facet count {} outside 1..={MAX_FACETS}",
                facets.len()
            )));
        }
        if facets.iter().any(String::is_empty) {
            return Err(Error::Format("empty facet after normalization".into()));
        }
        for i in 0..facets.len() {
            for j in (i + 1)..facets.len() {
                if facets[i] == facets[j] {
                    return Err(Error::Format(format!(
                        "duplicate facet after normalization: {:?}",
                        facets[i]
                    )));
                }
            }
        }
        Ok(QueryRecord {
            query,
            documents,
            facets,
        })
    }

    /// All text fields, for vocabulary building.
    pub fn texts(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.query.as_str())
            .chain(self.documents.iter().map(String::as_str))
            .chain(self.facets.iter().map(String::as_str))
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }
}

/// Token-level corpus averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub record_count: usize,
    /// Average query length in tokens.
    pub avg_query_len: f64,
    /// Average length of the concatenation of each record's documents.
    pub avg_docs_len: f64,
    /// Average facet count per record.
    pub avg_facet_count: f64,
    /// Average facet length in tokens, over all facets in the corpus.
    pub avg_facet_len: f64,
}

pub fn compute_stats(corpus: &[QueryRecord]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len() as f64;
    let mut query_tokens = 0usize;
    let mut doc_tokens = 0usize;
    let mut facet_count = 0usize;
    let mut facet_tokens = 0usize;
    for record in corpus {
        query_tokens += text::tokenize(&record.query).len();
        doc_tokens += record
            .documents
            .iter()
            .map(|d| text::tokenize(d).len())
            .sum::<usize>();
        facet_count += record.facets.len();
        facet_tokens += record
            .facets
            .iter()
            .map(|f| text::tokenize(f).len())
            .sum::<usize>();
    }
    Ok(CorpusStats {
        record_count: corpus.len(),
        avg_query_len: query_tokens as f64 / n,
        avg_docs_len: doc_tokens as f64 / n,
        avg_facet_count: facet_count as f64 / n,
        avg_facet_len: facet_tokens as f64 / facet_count.max(1) as f64,
    })
}

/// A line (or row) rejected during loading, with its 1-based position.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

/// Result of loading a corpus file: valid records in file order plus a
/// report of skipped lines.
#[derive(Clone, Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<QueryRecord>,
    pub skipped: Vec<SkippedLine>,
}

#[derive(Deserialize)]
struct NativeRow {
    query: String,
    facets: Vec<String>,
    #[serde(default)]
    documents: Vec<String>,
}

/// Load a native JSONL corpus. Malformed lines and records violating the
/// [`QueryRecord`] invariants are skipped with a per-line diagnostic.
pub fn load_native(path: &Path) -> Result<LoadOutcome> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut outcome = LoadOutcome::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: NativeRow = match serde_json::from_str(&line) {
            Ok(row) => row,
            Err(e) => {
                outcome.skipped.push(SkippedLine {
                    line: line_no,
                    reason: format!("malformed json: {e}"),
                });
                continue;
            }
        };
        match QueryRecord::new(&row.query, row.documents, row.facets) {
            Ok(record) => outcome.records.push(record),
            Err(e) => outcome.skipped.push(SkippedLine {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

#[derive(Deserialize)]
struct SnippetRow {
    query: String,
    snippets: Vec<String>,
}

fn load_snippets(path: &Path) -> Result<HashMap<String, Vec<String>>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: SnippetRow = serde_json::from_str(&line).map_err(|e| {
            Error::Format(format!(
                "{}:{}: malformed snippet line: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        // first occurrence wins
        map.entry(text::normalize(&row.query))
            .or_insert_with(|| row.snippets.iter().take(MAX_DOCUMENTS).cloned().collect());
    }
    Ok(map)
}

/// Load a facet TSV (header row with `query` and `option_1`..`option_5`),
/// optionally attaching document snippets from a companion JSONL file keyed
/// by query. Facets are the non-empty option columns in order; rows without
/// any non-empty option or violating record invariants are skipped.
pub fn load_mimics(tsv_path: &Path, snippets_path: Option<&Path>) -> Result<LoadOutcome> {
    let content = fs::read_to_string(tsv_path).map_err(|e| Error::io(tsv_path, e))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty file", tsv_path.display())))?;
    let columns: Vec<&str> = header.split('\t').collect();
    let col = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Format(format!("missing required column {name:?}")))
    };
    let query_col = col("query")?;
    let option_cols: Vec<usize> = (1..=MAX_FACETS)
        .map(|i| col(&format!("option_{i}")))
        .collect::<Result<_>>()?;

    let snippets = match snippets_path {
        Some(path) => load_snippets(path)?,
        None => HashMap::new(),
    };

    let mut outcome = LoadOutcome::default();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let field = |i: usize| fields.get(i).copied().unwrap_or("");
        let query = field(query_col);
        let facets: Vec<String> = option_cols
            .iter()
            .map(|&i| text::normalize(field(i)))
            .filter(|f| !f.is_empty())
            .collect();
        if facets.is_empty() {
            outcome.skipped.push(SkippedLine {
                line: line_no,
                reason: "no non-empty option columns".into(),
            });
            continue;
        }
        let documents = snippets
            .get(&text::normalize(query))
            .cloned()
            .unwrap_or_default();
        match QueryRecord::new(query, documents, facets) {
            Ok(record) => outcome.records.push(record),
            Err(e) => outcome.skipped.push(SkippedLine {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

/// Generate a deterministic synthetic corpus for controlled experiments.
///
/// Every query is a unique token `q{i}`; its facets are a set of tokens drawn
/// from a shared facet pool, fixed per query by the seed, so the mapping
/// query -> facet set is a learnable function. Each record carries one
/// document that embeds all of its facet tokens, so generation evidence is
/// present in the input.
///
/// `facet_count_weights[k]` is the relative weight of drawing k+1 facets.
/// `vocab_size` is the approximate target for the total vocabulary (reserved
/// tokens + query tokens + facet pool + filler).
pub fn synthesize_corpus(
    num_queries: usize,
    facet_count_weights: &[f64; MAX_FACETS],
    vocab_size: usize,
    seed: u64,
) -> Result<Vec<QueryRecord>> {
    if num_queries < 1 {
        return Err(Error::InvalidArgument("num_queries must be >= 1".into()));
    }
    if facet_count_weights.iter().any(|w| *w < 0.0)
        || facet_count_weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::InvalidArgument(
            "facet count weights must be nonnegative with positive sum".into(),
        ));
    }
    // Budget: 6 reserved + num_queries query tokens + 1 filler + pool.
    let pool_size = vocab_size
        .saturating_sub(text::RESERVED_TOKENS.len() + num_queries + 1)
        .max(MAX_FACETS + 1);
    let dist = WeightedIndex::new(facet_count_weights)
        .map_err(|e| Error::InvalidArgument(format!("bad facet count weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::with_capacity(num_queries);
    for i in 0..num_queries {
        let m = dist.sample(&mut rng) + 1;
        let picks = rand::seq::index::sample(&mut rng, pool_size, m.min(pool_size));
        let facets: Vec<String> = picks.iter().map(|j| format!("f{j}")).collect();
        let document = format!("about {}", facets.join(" "));
        corpus.push(QueryRecord::new(&format!("q{i}"), vec![document], facets)?);
    }
    Ok(corpus)
}

/// Build the encoder input: query, documents, and any prefix facets joined by
/// the `[SEP]` token, truncated from the right to `max_input_tokens`.
///
/// When over length, whole documents are dropped last-first before prefix
/// facets are touched, so appended facets survive as long as any document
/// remains.
pub fn build_model_input(
    record: &QueryRecord,
    prefix_facets: &[String],
    max_input_tokens: usize,
    vocab: &Vocabulary,
) -> Result<TokenSequence> {
    let query_ids = vocab.encode_text(&record.query);
    if max_input_tokens < query_ids.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "max_input_tokens {} below query length {} + 1",
            max_input_tokens,
            query_ids.len()
        )));
    }
    let doc_segments: Vec<TokenSequence> = record
        .documents
        .iter()
        .map(|d| vocab.encode_text(d))
        .collect();
    let prefix_segments: Vec<TokenSequence> =
        prefix_facets.iter().map(|f| vocab.encode_text(f)).collect();

    let assemble = |docs: &[TokenSequence]| -> Vec<u32> {
        let mut ids = query_ids.0.clone();
        for seg in docs.iter().chain(prefix_segments.iter()) {
            ids.push(SEP_ID);
            ids.extend_from_slice(seg.as_slice());
        }
        ids
    };

    let mut keep_docs = doc_segments.len();
    let mut ids = assemble(&doc_segments[..keep_docs]);
    while ids.len() > max_input_tokens && keep_docs > 0 {
        keep_docs -= 1;
        ids = assemble(&doc_segments[..keep_docs]);
    }
    ids.truncate(max_input_tokens);
    Ok(TokenSequence(ids))
}

/// Joint target: facet tokens joined by the `,` reserved token, terminated
/// by `</s>`, preserving the given facet order.
pub fn build_joint_target(facets: &[String], vocab: &Vocabulary) -> Result<TokenSequence> {
    if facets.is_empty() {
        return Err(Error::InvalidArgument(
            "joint target needs at least one facet".into(),
        ));
    }
    let mut ids = Vec::new();
    for (i, facet) in facets.iter().enumerate() {
        if i > 0 {
            ids.push(FACET_SEP_ID);
        }
        ids.extend_from_slice(vocab.encode_text(facet).as_slice());
    }
    ids.push(EOS_ID);
    Ok(TokenSequence(ids))
}

/// Single-facet target: the facet's tokens terminated by `</s>`.
pub fn build_facet_target(facet: &str, vocab: &Vocabulary) -> TokenSequence {
    let mut ids = vocab.encode_text(facet).0;
    ids.push(EOS_ID);
    TokenSequence(ids)
}

/// Load a predictions file: JSONL objects with keys `query` and `facets`.
pub fn load_predictions(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    #[derive(Deserialize)]
    struct PredRow {
        query: String,
        facets: Vec<String>,
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: PredRow = serde_json::from_str(&line).map_err(|e| {
            Error::Format(format!(
                "{}:{}: malformed prediction line: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        rows.push((text::normalize(&row.query), row.facets));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn test_vocab(corpus: &[QueryRecord]) -> Vocabulary {
        Vocabulary::build(corpus, 1).unwrap()
    }

    #[test]
    fn load_native_maps_valid_lines() {
        let f = write_temp(
            r#"{"query":"q","facets":["a","b"],"documents":[]}
{"query":"q2","facets":[]}
{"query":"q3","facets":["A","a"]}
not json
"#,
        );
        let outcome = load_native(f.path()).unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.records[0].facets, vec!["a", "b"]);
        assert_eq!(outcome.skipped.len(), 3);
        assert_eq!(outcome.skipped[0].line, 2);
        assert_eq!(outcome.skipped[1].line, 3);
        assert!(outcome.skipped[2].reason.contains("malformed json"));
    }

    #[test]
    fn load_native_missing_file_is_io_error() {
        assert!(matches!(
            load_native(Path::new("/nonexistent/file.jsonl")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn mimics_row_keeps_non_empty_options_in_order() {
        let f = write_temp(
            "query\toption_1\toption_2\toption_3\toption_4\toption_5\n\
             internet explorer\twindows 10\twindows 7\t\t\t\n",
        );
        let outcome = load_mimics(f.path(), None).unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.records[0].facets, vec!["windows 10", "windows 7"]);
        assert!(outcome.records[0].documents.is_empty());
    }

    #[test]
    fn mimics_all_empty_options_skipped() {
        let f = write_temp(
            "query\toption_1\toption_2\toption_3\toption_4\toption_5\n\
             some query\t\t\t\t\t\n",
        );
        let outcome = load_mimics(f.path(), None).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.skipped.len(), 1);
    }

    #[test]
    fn mimics_missing_column_is_format_error() {
        let f = write_temp("query\toption_1\n q\tf\n");
        assert!(matches!(load_mimics(f.path(), None), Err(Error::Format(_))));
    }

    #[test]
    fn mimics_snippets_companion_attaches_documents() {
        let tsv = write_temp(
            "query\toption_1\toption_2\toption_3\toption_4\toption_5\textra\n\
             Internet Explorer\twindows 10\t\t\t\t\tignored\n",
        );
        let snippets = write_temp(
            r#"{"query":"internet  explorer","snippets":["download page","version history"]}"#,
        );
        let outcome = load_mimics(tsv.path(), Some(snippets.path())).unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(
            outcome.records[0].documents,
            vec!["download page", "version history"]
        );
    }

    #[test]
    fn synthesize_is_deterministic() {
        let weights = [0.0, 1.0, 0.0, 0.0, 0.0];
        let a = synthesize_corpus(3, &weights, 60, 11).unwrap();
        let b = synthesize_corpus(3, &weights, 60, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.facet_count() == 2));
    }

    #[test]
    fn synthesize_yields_distinct_queries() {
        let weights = [0.2, 0.2, 0.2, 0.2, 0.2];
        let corpus = synthesize_corpus(50, &weights, 80, 7).unwrap();
        let queries: std::collections::HashSet<_> =
            corpus.iter().map(|r| r.query.clone()).collect();
        assert_eq!(queries.len(), 50);
    }

    #[test]
    fn synthesized_documents_embed_facet_tokens() {
        let weights = [0.0, 0.0, 1.0, 0.0, 0.0];
        let corpus = synthesize_corpus(10, &weights, 60, 3).unwrap();
        for record in &corpus {
            let doc_tokens = tokenize(&record.documents[0]);
            for facet in &record.facets {
                assert!(doc_tokens.contains(facet));
            }
        }
    }

    #[test]
    fn model_input_concatenates_with_sep() {
        let record =
            QueryRecord::new("q", vec!["d1".into(), "d2".into()], vec!["f1".into()]).unwrap();
        let vocab = test_vocab(std::slice::from_ref(&record));
        let input = build_model_input(&record, &[], 512, &vocab).unwrap();
        assert_eq!(
            vocab.decode(input.as_slice()).unwrap(),
            "q [SEP] d1 [SEP] d2"
        );
        let with_prefix = build_model_input(&record, &["f1".to_string()], 512, &vocab).unwrap();
        assert_eq!(
            vocab.decode(with_prefix.as_slice()).unwrap(),
            "q [SEP] d1 [SEP] d2 [SEP] f1"
        );
    }

    #[test]
    fn model_input_drops_documents_before_prefix_facets() {
        let record = QueryRecord::new(
            "q",
            vec!["d1 d2 d3".into(), "e1 e2 e3".into()],
            vec!["f1".into()],
        )
        .unwrap();
        let vocab = test_vocab(std::slice::from_ref(&record));
        // query(1) + sep + f1 = 3 tokens; docs cannot fit in 5
        let input = build_model_input(&record, &["f1".to_string()], 5, &vocab).unwrap();
        let decoded = vocab.decode(input.as_slice()).unwrap();
        assert!(decoded.ends_with("f1"), "prefix survived: {decoded}");
        assert!(!decoded.contains("e1"));
    }

    #[test]
    fn model_input_tight_budget_keeps_only_query() {
        let record =
            QueryRecord::new("q", vec!["d1".into(), "d2".into()], vec!["f".into()]).unwrap();
        let vocab = test_vocab(std::slice::from_ref(&record));
        let input = build_model_input(&record, &[], 2, &vocab).unwrap();
        assert_eq!(vocab.decode(input.as_slice()).unwrap(), "q");
    }

    #[test]
    fn joint_target_layout() {
        let record = QueryRecord::new("q", vec![], vec!["a b".into(), "c".into()]).unwrap();
        let vocab = test_vocab(std::slice::from_ref(&record));
        let target = build_joint_target(&record.facets, &vocab).unwrap();
        assert_eq!(vocab.decode(target.as_slice()).unwrap(), "a b , c </s>");
        // order-preserving
        let swapped = build_joint_target(&["c".to_string(), "a b".to_string()], &vocab).unwrap();
        assert_eq!(vocab.decode(swapped.as_slice()).unwrap(), "c , a b </s>");
        // single facet has no separator
        let single = build_joint_target(&["a b".to_string()], &vocab).unwrap();
        assert_eq!(vocab.decode(single.as_slice()).unwrap(), "a b </s>");
    }

    #[test]
    fn stats_are_token_level_means() {
        let r1 = QueryRecord::new(
            "one two",
            vec!["a b c".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let r2 = QueryRecord::new(
            "three",
            vec![],
            vec!["p".into(), "q r".into(), "s".into(), "t".into()],
        )
        .unwrap();
        let stats = compute_stats(&[r1, r2]).unwrap();
        assert_eq!(stats.record_count, 2);
        assert!((stats.avg_query_len - 1.5).abs() < 1e-12);
        assert!((stats.avg_docs_len - 1.5).abs() < 1e-12);
        assert!((stats.avg_facet_count - 3.0).abs() < 1e-12);
        assert!((stats.avg_facet_len - 7.0 / 6.0).abs() < 1e-12);
        assert!(matches!(compute_stats(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn stats_match_independent_counter_on_synthetic_corpus() {
        let weights = [0.1, 0.3, 0.3, 0.2, 0.1];
        let corpus = synthesize_corpus(50, &weights, 90, 19).unwrap();
        let stats = compute_stats(&corpus).unwrap();
        // one-pass oracle, written against the raw strings
        let mut q = 0usize;
        let mut d = 0usize;
        let mut fc = 0usize;
        let mut ft = 0usize;
        for r in &corpus {
            q += r.query.split_whitespace().count();
            for doc in &r.documents {
                d += doc.split_whitespace().count();
            }
            fc += r.facets.len();
            for f in &r.facets {
                ft += f.split_whitespace().count();
            }
        }
        let n = corpus.len() as f64;
        assert!((stats.avg_query_len - q as f64 / n).abs() < 1e-12);
        assert!((stats.avg_docs_len - d as f64 / n).abs() < 1e-12);
        assert!((stats.avg_facet_count - fc as f64 / n).abs() < 1e-12);
        assert!((stats.avg_facet_len - ft as f64 / fc as f64).abs() < 1e-12);
        // vocabulary size equals distinct tokens + reserved
        let vocab = Vocabulary::build(&corpus, 1).unwrap();
        let mut distinct = std::collections::HashSet::new();
        for r in &corpus {
            for t in r.texts() {
                distinct.extend(tokenize(t));
            }
        }
        assert_eq!(vocab.len(), distinct.len() + text::RESERVED_TOKENS.len());
    }

    proptest! {
        #[test]
        fn loaded_records_satisfy_invariants(
            lines in proptest::collection::vec(
                proptest::option::of(("[a-zA-Z ]{0,8}", proptest::collection::vec("[a-zA-Z]{0,4}", 0..7))),
                0..12,
            )
        ) {
            let mut content = String::new();
            for entry in &lines {
                match entry {
                    Some((query, facets)) => {
                        let row = serde_json::json!({"query": query, "facets": facets});
                        content.push_str(&row.to_string());
                        content.push('\n');
                    }
                    None => content.push_str("garbage line\n"),
                }
            }
            let f = write_temp(&content);
            let outcome = load_native(f.path()).unwrap();
            for r in &outcome.records {
                prop_assert!(!r.query.is_empty());
                prop_assert!(!r.facets.is_empty() && r.facets.len() <= MAX_FACETS);
                let set: std::collections::HashSet<_> = r.facets.iter().collect();
                prop_assert_eq!(set.len(), r.facets.len());
            }
        }

        #[test]
        fn model_input_respects_length_bound(
            doc_count in 0usize..5,
            doc_len in 1usize..8,
            budget in 2usize..20,
        ) {
            let docs: Vec<String> = (0..doc_count)
                .map(|i| vec![format!("d{i}"); doc_len].join(" "))
                .collect();
            let record = QueryRecord::new("q", docs, vec!["f".into()]).unwrap();
            let vocab = test_vocab(std::slice::from_ref(&record));
            let input = build_model_input(&record, &["f".to_string()], budget, &vocab).unwrap();
            prop_assert!(input.len() <= budget);
        }

        #[test]
        fn joint_target_separator_and_eos_counts(k in 1usize..6) {
            let facets: Vec<String> = (0..k).map(|i| format!("f{i}")).collect();
            let record = QueryRecord::new("q", vec![], facets.clone()).unwrap();
            let vocab = test_vocab(std::slice::from_ref(&record));
            let target = build_joint_target(&facets, &vocab).unwrap();
            let seps = target.as_slice().iter().filter(|&&id| id == FACET_SEP_ID).count();
            let eos = target.as_slice().iter().filter(|&&id| id == EOS_ID).count();
            prop_assert_eq!(seps, k - 1);
            prop_assert_eq!(eos, 1);
            prop_assert!(target.ends_with_eos());
        }
    }
}
