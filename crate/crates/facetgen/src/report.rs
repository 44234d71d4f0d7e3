//! Report rendering: markdown tables of matching and diversity metrics,
//! side-by-side method comparison with significance markers, and the
//! facet-count histogram.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{paired_ttest, MetricReport, PerQueryMetrics};

type Extract = fn(&PerQueryMetrics) -> f64;

/// The matching-metric columns, in table order. Diversity columns are
/// excluded from significance testing because they are undefined for
/// single-facet outputs.
pub const MATCHING_COLUMNS: [(&str, Extract); 13] = [
    ("TO-P", |r| r.term_overlap.precision),
    ("TO-R", |r| r.term_overlap.recall),
    ("TO-F1", |r| r.term_overlap.f1),
    ("EM-P", |r| r.exact_match.precision),
    ("EM-R", |r| r.exact_match.recall),
    ("EM-F1", |r| r.exact_match.f1),
    ("BLEU-1", |r| r.set_bleu[0]),
    ("BLEU-2", |r| r.set_bleu[1]),
    ("BLEU-3", |r| r.set_bleu[2]),
    ("BLEU-4", |r| r.set_bleu[3]),
    ("EMB-P", |r| r.set_embedding.precision),
    ("EMB-R", |r| r.set_embedding.recall),
    ("EMB-F1", |r| r.set_embedding.f1),
];

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "-".to_string())
}

/// Matching-metric table, one row per labeled report.
pub fn render_matching_table(reports: &[(String, &MetricReport)]) -> String {
    let mut out = String::new();
    out.push_str("| Model | TO-P | TO-R | TO-F1 | EM-P | EM-R | EM-F1 | BLEU-1 | BLEU-2 | BLEU-3 | BLEU-4 | EMB-P | EMB-R | EMB-F1 |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
    for (label, report) in reports {
        let m = &report.macro_avg;
        let bleu: Vec<String> = (0..4)
            .map(|k| fmt(m.set_bleu.get(k).copied().unwrap_or(0.0)))
            .collect();
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            label,
            fmt(m.term_overlap.precision),
            fmt(m.term_overlap.recall),
            fmt(m.term_overlap.f1),
            fmt(m.exact_match.precision),
            fmt(m.exact_match.recall),
            fmt(m.exact_match.f1),
            bleu[0],
            bleu[1],
            bleu[2],
            bleu[3],
            fmt(m.set_embedding.precision),
            fmt(m.set_embedding.recall),
            fmt(m.set_embedding.f1),
        ));
    }
    out
}

/// Diversity table with a ground-truth row (taken from the first report;
/// all reports over the same gold share it).
pub fn render_diversity_table(reports: &[(String, &MetricReport)]) -> String {
    let mut out = String::new();
    out.push_str("| Model | Term Div | Emb-Div-P | Emb-Div-R | Emb-Div-F1 | Count Ratio |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    if let Some((_, first)) = reports.first() {
        let emb = first.gold_embedding_diversity;
        out.push_str(&format!(
            "| ground truth | {} | {} | {} | {} | {} |\n",
            fmt_opt(first.gold_term_diversity),
            fmt_opt(emb.map(|p| p.precision)),
            fmt_opt(emb.map(|p| p.recall)),
            fmt_opt(emb.map(|p| p.f1)),
            fmt(1.0),
        ));
    }
    for (label, report) in reports {
        let m = &report.macro_avg;
        let emb = m.embedding_diversity;
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            label,
            fmt_opt(m.term_diversity),
            fmt_opt(emb.map(|p| p.precision)),
            fmt_opt(emb.map(|p| p.recall)),
            fmt_opt(emb.map(|p| p.f1)),
            fmt(m.count_ratio),
        ));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonCell {
    pub label: String,
    pub mean: f64,
    /// Significant decrease against the best method.
    pub worse_than_best: bool,
    /// Significant improvement against the worst method.
    pub better_than_worst: bool,
    pub p_vs_best: Option<f64>,
    pub p_vs_worst: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnComparison {
    pub metric: String,
    pub best: String,
    pub worst: String,
    /// Bonferroni factor: the number of distinct method pairs tested for
    /// this metric.
    pub bonferroni: usize,
    pub cells: Vec<ComparisonCell>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonTable {
    pub baseline: String,
    pub columns: Vec<ColumnComparison>,
}

/// Per-metric paired significance tests of every method against the best
/// and worst methods (by macro mean), Bonferroni-corrected by the number of
/// distinct pairs tested. All reports must cover the same query sequence.
pub fn compare_reports(
    reports: &[(String, MetricReport)],
    baseline: &str,
) -> Result<ComparisonTable> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument(
            "comparison needs at least two reports".into(),
        ));
    }
    let queries: Vec<&str> = reports[0].1.rows.iter().map(|r| r.query.as_str()).collect();
    for (label, report) in reports {
        let this: Vec<&str> = report.rows.iter().map(|r| r.query.as_str()).collect();
        if this != queries {
            return Err(Error::InvalidArgument(format!(
                "report {label:?} covers a different query set"
            )));
        }
    }
    if !reports.iter().any(|(label, _)| label == baseline) {
        return Err(Error::InvalidArgument(format!(
            "baseline {baseline:?} is not among the reports"
        )));
    }

    let mut columns = Vec::with_capacity(MATCHING_COLUMNS.len());
    for (name, extract) in MATCHING_COLUMNS {
        let per_method: Vec<Vec<f64>> = reports
            .iter()
            .map(|(_, rep)| rep.rows.iter().map(extract).collect())
            .collect();
        let means: Vec<f64> = per_method
            .iter()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .collect();
        let best = (0..means.len())
            .max_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap())
            .unwrap();
        let worst = (0..means.len())
            .min_by(|&a, &b| means[a].partial_cmp(&means[b]).unwrap())
            .unwrap();

        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for m in 0..reports.len() {
            if m != best {
                pairs.insert((m.min(best), m.max(best)));
            }
            if m != worst {
                pairs.insert((m.min(worst), m.max(worst)));
            }
        }
        let bonferroni = pairs.len().max(1);

        let mut cells = Vec::with_capacity(reports.len());
        for m in 0..reports.len() {
            let vs_best = if m != best {
                Some(paired_ttest(&per_method[m], &per_method[best], bonferroni)?)
            } else {
                None
            };
            let vs_worst = if m != worst {
                Some(paired_ttest(
                    &per_method[m],
                    &per_method[worst],
                    bonferroni,
                )?)
            } else {
                None
            };
            cells.push(ComparisonCell {
                label: reports[m].0.clone(),
                mean: means[m],
                worse_than_best: vs_best
                    .map(|t| t.significant && means[m] < means[best])
                    .unwrap_or(false),
                better_than_worst: vs_worst
                    .map(|t| t.significant && means[m] > means[worst])
                    .unwrap_or(false),
                p_vs_best: vs_best.map(|t| t.p),
                p_vs_worst: vs_worst.map(|t| t.p),
            });
        }
        columns.push(ColumnComparison {
            metric: name.to_string(),
            best: reports[best].0.clone(),
            worst: reports[worst].0.clone(),
            bonferroni,
            cells,
        });
    }
    Ok(ComparisonTable {
        baseline: baseline.to_string(),
        columns,
    })
}

/// Markdown rendering of a comparison table: one row per method, `+` marking
/// a significant improvement over the worst method and `-` a significant
/// decrease against the best.
pub fn render_comparison(table: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("baseline: {}\n\n", table.baseline));
    out.push_str("| Model |");
    for col in &table.columns {
        out.push_str(&format!(" {} |", col.metric));
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &table.columns {
        out.push_str("---|");
    }
    out.push('\n');
    let methods: Vec<&str> = table.columns[0]
        .cells
        .iter()
        .map(|c| c.label.as_str())
        .collect();
    for (mi, method) in methods.iter().enumerate() {
        out.push_str(&format!("| {method} |"));
        for col in &table.columns {
            let cell = &col.cells[mi];
            let mut marks = String::new();
            if cell.better_than_worst {
                marks.push('+');
            }
            if cell.worse_than_best {
                marks.push('-');
            }
            out.push_str(&format!(" {}{} |", fmt(cell.mean), marks));
        }
        out.push('\n');
    }
    out
}

/// Facet-count histogram over predictions: count of queries per generated
/// facet count.
pub fn facet_count_histogram(predictions: &[(String, Vec<String>)]) -> BTreeMap<usize, usize> {
    let mut histogram = BTreeMap::new();
    for (_, facets) in predictions {
        *histogram.entry(facets.len()).or_insert(0) += 1;
    }
    histogram
}

/// Serialize a value as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("json serialization: {e}")))?;
    json.push('\n');
    Ok(json)
}
