//! Enumeration and sampling of facet orderings, and construction of
//! per-objective training examples.
//!
//! An arrangement is an ordered selection of distinct facet indices. Full
//! permutations are arrangements of length m. The prefix-conditioned builder
//! expands full permutations into (prefix, next facet) pairs and deduplicates
//! them, so with enough samples it degenerates to the exhaustive organization
//! where every ordered prefix appears exactly once per remaining facet.

use std::collections::HashSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{self, CorpusStats, QueryRecord};
use crate::error::{Error, Result};
use crate::objectives::ObjectiveId;
use crate::text::{TokenSequence, Vocabulary, EOS_ID};

/// Ordered selection of distinct facet indices.
pub type Arrangement = Vec<usize>;

const MAX_ENUMERATION: usize = 7;

/// Published sampling schedule: permutations drawn per query for the
/// prefix-conditioned objective, indexed by facet count 1..=5.
pub const SEQ_SET_SCHEDULE: [usize; 5] = [6, 8, 9, 11, 13];

/// Default permutations per query for the min/avg permutation objectives.
pub const DEFAULT_PERMUTATIONS_PER_QUERY: usize = 6;

/// One training unit: an encoder input, a target sequence, a group key tying
/// together examples that share a loss reduction, and a positive weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingExample {
    pub input: TokenSequence,
    pub target: TokenSequence,
    pub group_key: u64,
    pub weight: f64,
}

/// How permutations are sampled when building examples for one epoch.
#[derive(Clone, Debug)]
pub struct SamplingPlan {
    pub objective: ObjectiveId,
    pub permutations_per_query: usize,
    pub seq_set_schedule: [usize; 5],
    pub with_replacement: bool,
    pub epoch_seed: u64,
}

impl SamplingPlan {
    pub fn new(objective: ObjectiveId, epoch_seed: u64) -> Self {
        SamplingPlan {
            objective,
            permutations_per_query: DEFAULT_PERMUTATIONS_PER_QUERY,
            seq_set_schedule: SEQ_SET_SCHEDULE,
            with_replacement: false,
            epoch_seed,
        }
    }

    /// A plan whose sample counts exceed every m! for m <= 5, so sampling
    /// degenerates to full enumeration.
    pub fn full_enumeration(objective: ObjectiveId) -> Self {
        SamplingPlan {
            objective,
            permutations_per_query: 5040,
            seq_set_schedule: [5040; 5],
            with_replacement: false,
            epoch_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.permutations_per_query < 1 || self.seq_set_schedule.iter().any(|&c| c < 1) {
            return Err(Error::InvalidArgument(
                "sampling counts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Input/target length budgets used when building examples.
#[derive(Clone, Copy, Debug)]
pub struct SequenceLimits {
    pub max_input_tokens: usize,
    pub max_output_tokens: usize,
}

pub fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

/// All m! permutations of 0..m in lexicographic order.
pub fn enumerate_permutations(m: usize) -> Result<Vec<Arrangement>> {
    if !(1..=MAX_ENUMERATION).contains(&m) {
        return Err(Error::TooManyFacets(m));
    }
    enumerate_arrangements(m, m)
}

/// All m!/(m-j)! ordered selections of j distinct indices from 0..m, in
/// lexicographic order. j = 0 yields the single empty arrangement.
pub fn enumerate_arrangements(m: usize, j: usize) -> Result<Vec<Arrangement>> {
    if m > MAX_ENUMERATION {
        return Err(Error::TooManyFacets(m));
    }
    if j > m {
        return Err(Error::InvalidArgument(format!(
            "arrangement length {j} exceeds set size {m}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(j);
    let mut used = vec![false; m];
    fn visit(
        m: usize,
        j: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Arrangement>,
    ) {
        if current.len() == j {
            out.push(current.clone());
            return;
        }
        for i in 0..m {
            if !used[i] {
                used[i] = true;
                current.push(i);
                visit(m, j, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    visit(m, j, &mut current, &mut used, &mut out);
    Ok(out)
}

/// Draw `min(count, m!)` distinct full permutations uniformly without
/// replacement. A fresh rng per epoch realizes dynamic resampling.
pub fn sample_permutations(m: usize, count: usize, rng: &mut impl Rng) -> Result<Vec<Arrangement>> {
    if count < 1 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    if m <= MAX_ENUMERATION {
        let all = enumerate_permutations(m)?;
        let take = count.min(all.len());
        let picked = rand::seq::index::sample(rng, all.len(), take);
        return Ok(picked.iter().map(|i| all[i].clone()).collect());
    }
    // Large m: rejection sampling over random shuffles. With m! >> count the
    // collision rate is negligible.
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut perm: Arrangement = (0..m).collect();
        perm.shuffle(rng);
        if seen.insert(perm.clone()) {
            out.push(perm);
        }
    }
    Ok(out)
}

/// Draw `count` full permutations independently (duplicates possible).
pub fn sample_permutations_with_replacement(
    m: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Arrangement>> {
    if count < 1 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    Ok((0..count)
        .map(|_| {
            let mut perm: Arrangement = (0..m).collect();
            perm.shuffle(rng);
            perm
        })
        .collect())
}

/// Schedule lookup: permutations sampled per query for the prefix-conditioned
/// objective, given the facet count.
pub fn seq_set_sample_count(m: usize) -> Result<usize> {
    if !(1..=5).contains(&m) {
        return Err(Error::FacetCountRange(m));
    }
    Ok(SEQ_SET_SCHEDULE[m - 1])
}

fn apply_arrangement(facets: &[String], arrangement: &[usize]) -> Vec<String> {
    arrangement.iter().map(|&i| facets[i].clone()).collect()
}

fn truncate_target(mut target: TokenSequence, max_output: usize) -> TokenSequence {
    if target.len() > max_output {
        target.0.truncate(max_output - 1);
        target.0.push(EOS_ID);
    }
    target
}

fn record_rng(plan: &SamplingPlan, record_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        plan.epoch_seed
            .wrapping_add(record_id.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    )
}

/// Build the training examples one record contributes under an objective.
///
/// All examples of one record share `record_id` as their group key; the
/// objective's reducer consumes them as a unit. Weights within a group sum to
/// 1 for the per-facet objectives.
pub fn build_examples(
    objective: ObjectiveId,
    record: &QueryRecord,
    record_id: u64,
    plan: &SamplingPlan,
    vocab: &Vocabulary,
    limits: SequenceLimits,
) -> Result<Vec<TrainingExample>> {
    plan.validate()?;
    if plan.objective != objective {
        return Err(Error::InvalidArgument(format!(
            "sampling plan built for {}, examples requested for {}",
            plan.objective, objective
        )));
    }
    let m = record.facet_count();
    let mut rng = record_rng(plan, record_id);
    let example = |input: TokenSequence, target: TokenSequence, weight: f64| TrainingExample {
        input,
        target: truncate_target(target, limits.max_output_tokens),
        group_key: record_id,
        weight,
    };

    match objective {
        ObjectiveId::SeqDefault => {
            let input = corpus::build_model_input(record, &[], limits.max_input_tokens, vocab)?;
            let target = corpus::build_joint_target(&record.facets, vocab)?;
            Ok(vec![example(input, target, 1.0)])
        }
        ObjectiveId::SeqMinPerm | ObjectiveId::SeqAvgPerm => {
            let perms = if plan.with_replacement {
                sample_permutations_with_replacement(m, plan.permutations_per_query, &mut rng)?
            } else {
                sample_permutations(m, plan.permutations_per_query, &mut rng)?
            };
            let input = corpus::build_model_input(record, &[], limits.max_input_tokens, vocab)?;
            perms
                .iter()
                .map(|perm| {
                    let ordered = apply_arrangement(&record.facets, perm);
                    let target = corpus::build_joint_target(&ordered, vocab)?;
                    Ok(example(input.clone(), target, 1.0))
                })
                .collect()
        }
        ObjectiveId::SetPred => {
            let input = corpus::build_model_input(record, &[], limits.max_input_tokens, vocab)?;
            let weight = 1.0 / m as f64;
            Ok(record
                .facets
                .iter()
                .map(|facet| {
                    example(
                        input.clone(),
                        corpus::build_facet_target(facet, vocab),
                        weight,
                    )
                })
                .collect())
        }
        ObjectiveId::SeqSetPred => {
            let requested = *plan
                .seq_set_schedule
                .get(m - 1)
                .ok_or(Error::FacetCountRange(m))?;
            let perms = if plan.with_replacement {
                sample_permutations_with_replacement(m, requested, &mut rng)?
            } else {
                sample_permutations(m, requested, &mut rng)?
            };
            // Expand each permutation into (ordered prefix, next facet) steps
            // and deduplicate pairs produced by multiple permutations.
            let mut seen: HashSet<(Vec<usize>, usize)> = HashSet::new();
            let mut pairs: Vec<(Vec<usize>, usize)> = Vec::new();
            for perm in &perms {
                for t in 0..m {
                    let key = (perm[..t].to_vec(), perm[t]);
                    if seen.insert(key.clone()) {
                        pairs.push(key);
                    }
                }
            }
            let weight = 1.0 / pairs.len() as f64;
            pairs
                .into_iter()
                .map(|(prefix, target_idx)| {
                    let prefix_facets = apply_arrangement(&record.facets, &prefix);
                    let input = corpus::build_model_input(
                        record,
                        &prefix_facets,
                        limits.max_input_tokens,
                        vocab,
                    )?;
                    let target = corpus::build_facet_target(&record.facets[target_idx], vocab);
                    Ok(example(input, target, weight))
                })
                .collect()
        }
    }
}

/// Number of examples one record yields under full enumeration.
pub fn count_full_examples(objective: ObjectiveId, m: usize) -> u64 {
    assert!((1..=12).contains(&m), "facet count {m} out of range");
    match objective {
        ObjectiveId::SeqDefault => 1,
        ObjectiveId::SeqMinPerm | ObjectiveId::SeqAvgPerm => factorial(m),
        ObjectiveId::SetPred => m as u64,
        ObjectiveId::SeqSetPred => (0..m)
            .map(|j| factorial(m) / factorial(m - j) * (m - j) as u64)
            .sum(),
    }
}

/// Abstract token-operation count for one training epoch under an objective,
/// following the per-epoch complexity formulas with corpus averages plugged
/// in. Average lengths stay real-valued; the combinatorial factors use the
/// facet count rounded to the nearest integer.
pub fn estimate_epoch_cost(objective: ObjectiveId, stats: &CorpusStats) -> f64 {
    let n = stats.record_count as f64;
    let q = stats.avg_query_len;
    let d = stats.avg_docs_len;
    let m = stats.avg_facet_count;
    let f = stats.avg_facet_len;
    let m_int = (m.round() as usize).max(1);
    let fact = |k: usize| factorial(k) as f64;
    let joint = (q + d).powi(2) + (m * f).powi(2) + (q + d) * m * f;
    match objective {
        ObjectiveId::SeqDefault => n * joint,
        ObjectiveId::SeqMinPerm | ObjectiveId::SeqAvgPerm => n * fact(m_int) * joint,
        ObjectiveId::SetPred => n * m * ((q + d).powi(2) + f * f + (q + d) * f),
        ObjectiveId::SeqSetPred => {
            let mut total = 0.0;
            for i in 0..m_int {
                let arrangements = fact(m_int) / fact(m_int - i);
                let targets = (m_int - i) as f64;
                let input_len = q + d + i as f64 * f;
                total += arrangements * targets * (input_len.powi(2) + f * f + input_len * f);
            }
            n * total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::FACET_SEP_ID;

    fn record(facets: &[&str]) -> QueryRecord {
        QueryRecord::new(
            "q",
            vec!["about stuff".into()],
            facets.iter().map(|f| f.to_string()).collect(),
        )
        .unwrap()
    }

    fn vocab_for(record: &QueryRecord) -> Vocabulary {
        Vocabulary::build(std::slice::from_ref(record), 1).unwrap()
    }

    const LIMITS: SequenceLimits = SequenceLimits {
        max_input_tokens: 64,
        max_output_tokens: 32,
    };

    /// Independent oracle: generate all permutations by repeated insertion,
    /// deduplicate, and sort.
    fn insertion_permutations(m: usize) -> Vec<Arrangement> {
        let mut perms: Vec<Arrangement> = vec![vec![]];
        for elem in 0..m {
            let mut next = Vec::new();
            for p in &perms {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, elem);
                    next.push(q);
                }
            }
            perms = next;
        }
        perms.sort();
        perms.dedup();
        perms
    }

    #[test]
    fn permutations_small_cases() {
        assert_eq!(enumerate_permutations(1).unwrap(), vec![vec![0]]);
        assert_eq!(enumerate_permutations(3).unwrap().len(), 6);
        assert!(matches!(
            enumerate_permutations(8),
            Err(Error::TooManyFacets(8))
        ));
    }

    #[test]
    fn permutations_match_insertion_oracle() {
        for m in 1..=5 {
            let mut ours = enumerate_permutations(m).unwrap();
            let oracle = insertion_permutations(m);
            assert_eq!(ours.len() as u64, factorial(m));
            ours.sort();
            assert_eq!(ours, oracle);
        }
    }

    #[test]
    fn arrangements_worked_example() {
        // ordered pairs out of three items
        let arrs = enumerate_arrangements(3, 2).unwrap();
        let expected: Vec<Arrangement> = vec![
            vec![0, 1],
            vec![0, 2],
            vec![1, 0],
            vec![1, 2],
            vec![2, 0],
            vec![2, 1],
        ];
        assert_eq!(arrs, expected);
        assert_eq!(
            enumerate_arrangements(4, 0).unwrap(),
            vec![Vec::<usize>::new()]
        );
        assert!(enumerate_arrangements(2, 3).is_err());
    }

    #[test]
    fn arrangement_counts_exact() {
        for m in 0..=6 {
            for j in 0..=m {
                let got = enumerate_arrangements(m, j).unwrap();
                let expected = factorial(m) / factorial(m - j);
                assert_eq!(got.len() as u64, expected, "m={m} j={j}");
                // no duplicates
                let set: HashSet<_> = got.iter().collect();
                assert_eq!(set.len(), got.len());
            }
        }
    }

    #[test]
    fn arrangements_deduped_against_bruteforce() {
        // brute force: all index tuples, filter distinct entries
        for (m, j) in [(5usize, 3usize), (4, 2)] {
            let got = enumerate_arrangements(m, j).unwrap();
            let mut brute = Vec::new();
            let total = m.pow(j as u32);
            for code in 0..total {
                let mut tuple = Vec::with_capacity(j);
                let mut c = code;
                for _ in 0..j {
                    tuple.push(c % m);
                    c /= m;
                }
                tuple.reverse();
                let distinct: HashSet<_> = tuple.iter().collect();
                if distinct.len() == j {
                    brute.push(tuple);
                }
            }
            brute.sort();
            brute.dedup();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn sampling_clamps_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let perms = sample_permutations(2, 6, &mut rng).unwrap();
        assert_eq!(perms.len(), 2);

        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        let a = sample_permutations(4, 6, &mut rng_a).unwrap();
        let b = sample_permutations(4, 6, &mut rng_b).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 6, "samples must be distinct");
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mut counts: std::collections::HashMap<Arrangement, usize> =
            std::collections::HashMap::new();
        for _ in 0..600 {
            let perm = sample_permutations(3, 1, &mut rng).unwrap().remove(0);
            *counts.entry(perm).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6, "every permutation of 3 should appear");
        for (perm, count) in counts {
            assert!(
                (60..=140).contains(&count),
                "permutation {perm:?} drawn {count} times out of 600"
            );
        }
    }

    #[test]
    fn fresh_epoch_seed_resamples_permutations() {
        let rec = record(&["a", "b", "c", "d"]);
        let vocab = vocab_for(&rec);
        let mut plan = SamplingPlan::new(ObjectiveId::SeqAvgPerm, 0);
        let targets = |plan: &SamplingPlan| -> HashSet<TokenSequence> {
            build_examples(ObjectiveId::SeqAvgPerm, &rec, 0, plan, &vocab, LIMITS)
                .unwrap()
                .into_iter()
                .map(|e| e.target)
                .collect()
        };
        let epoch0 = targets(&plan);
        plan.epoch_seed = 1;
        let epoch1 = targets(&plan);
        assert_eq!(epoch0.len(), 6);
        assert_ne!(
            epoch0, epoch1,
            "different epoch seeds should draw different permutation subsets"
        );
    }

    #[test]
    fn schedule_values() {
        assert_eq!(seq_set_sample_count(1).unwrap(), 6);
        assert_eq!(seq_set_sample_count(3).unwrap(), 9);
        assert_eq!(seq_set_sample_count(5).unwrap(), 13);
        assert!(matches!(
            seq_set_sample_count(6),
            Err(Error::FacetCountRange(6))
        ));
    }

    #[test]
    fn seq_default_builds_one_example() {
        let rec = record(&["a", "b"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::new(ObjectiveId::SeqDefault, 0);
        let ex = build_examples(ObjectiveId::SeqDefault, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].weight, 1.0);
        assert!(ex[0].target.ends_with_eos());
    }

    #[test]
    fn set_pred_weights_are_uniform() {
        let rec = record(&["a", "b", "c"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::new(ObjectiveId::SetPred, 0);
        let ex = build_examples(ObjectiveId::SetPred, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        assert_eq!(ex.len(), 3);
        for e in &ex {
            assert!((e.weight - 1.0 / 3.0).abs() < 1e-15);
        }
        let total: f64 = ex.iter().map(|e| e.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seq_set_pred_full_enumeration_m2() {
        let rec = record(&["a", "b"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::full_enumeration(ObjectiveId::SeqSetPred);
        let ex = build_examples(ObjectiveId::SeqSetPred, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        assert_eq!(ex.len(), 4);
        let total: f64 = ex.iter().map(|e| e.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // distinct (input, target) pairs
        let set: HashSet<_> = ex
            .iter()
            .map(|e| (e.input.clone(), e.target.clone()))
            .collect();
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn avg_perm_full_enumeration_targets_are_all_orderings() {
        let rec = record(&["a", "b", "c"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::full_enumeration(ObjectiveId::SeqAvgPerm);
        let ex = build_examples(ObjectiveId::SeqAvgPerm, &rec, 3, &plan, &vocab, LIMITS).unwrap();
        assert_eq!(ex.len(), 6);
        assert!(ex.iter().all(|e| e.group_key == 3));
        let targets: HashSet<_> = ex.iter().map(|e| e.target.clone()).collect();
        assert_eq!(targets.len(), 6);
        // compare against the independent permutation generator
        let expected: HashSet<_> = insertion_permutations(3)
            .iter()
            .map(|perm| {
                let ordered = apply_arrangement(&rec.facets, perm);
                corpus::build_joint_target(&ordered, &vocab).unwrap()
            })
            .collect();
        assert_eq!(targets, expected);
    }

    #[test]
    fn examples_invariant_under_facet_reordering_with_full_enumeration() {
        let rec = record(&["a", "b", "c"]);
        let mut swapped_facets = rec.facets.clone();
        swapped_facets.swap(0, 2);
        let rec_swapped = QueryRecord::new("q", rec.documents.clone(), swapped_facets).unwrap();
        let vocab = vocab_for(&rec);
        for objective in [
            ObjectiveId::SeqAvgPerm,
            ObjectiveId::SeqMinPerm,
            ObjectiveId::SetPred,
            ObjectiveId::SeqSetPred,
        ] {
            let plan = SamplingPlan::full_enumeration(objective);
            let to_multiset = |rec: &QueryRecord| {
                let mut v: Vec<_> = build_examples(objective, rec, 0, &plan, &vocab, LIMITS)
                    .unwrap()
                    .into_iter()
                    .map(|e| (e.input, e.target, e.group_key, e.weight.to_bits()))
                    .collect();
                v.sort();
                v
            };
            assert_eq!(to_multiset(&rec), to_multiset(&rec_swapped), "{objective}");
        }
        // the default objective is order-sensitive
        let plan = SamplingPlan::new(ObjectiveId::SeqDefault, 0);
        let a = build_examples(ObjectiveId::SeqDefault, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        let b = build_examples(
            ObjectiveId::SeqDefault,
            &rec_swapped,
            0,
            &plan,
            &vocab,
            LIMITS,
        )
        .unwrap();
        assert_ne!(a[0].target, b[0].target);
    }

    #[test]
    fn seq_set_pred_inputs_carry_prefixes() {
        let rec = record(&["a", "b"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::full_enumeration(ObjectiveId::SeqSetPred);
        let ex = build_examples(ObjectiveId::SeqSetPred, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        let empty_prefix = corpus::build_model_input(&rec, &[], 64, &vocab).unwrap();
        let with_a = corpus::build_model_input(&rec, &["a".to_string()], 64, &vocab).unwrap();
        let with_b = corpus::build_model_input(&rec, &["b".to_string()], 64, &vocab).unwrap();
        let inputs: Vec<_> = ex.iter().map(|e| e.input.clone()).collect();
        assert_eq!(inputs.iter().filter(|i| **i == empty_prefix).count(), 2);
        assert_eq!(inputs.iter().filter(|i| **i == with_a).count(), 1);
        assert_eq!(inputs.iter().filter(|i| **i == with_b).count(), 1);
    }

    #[test]
    fn full_example_counts() {
        let expected = [1u64, 4, 15, 64, 325];
        for m in 1..=5 {
            assert_eq!(
                count_full_examples(ObjectiveId::SeqSetPred, m),
                expected[m - 1]
            );
            assert_eq!(
                count_full_examples(ObjectiveId::SeqMinPerm, m),
                factorial(m)
            );
            assert_eq!(count_full_examples(ObjectiveId::SetPred, m), m as u64);
            assert_eq!(count_full_examples(ObjectiveId::SeqDefault, m), 1);
        }
    }

    #[test]
    fn epoch_cost_hand_evaluations() {
        let stats = CorpusStats {
            record_count: 1,
            avg_query_len: 1.0,
            avg_docs_len: 1.0,
            avg_facet_count: 2.0,
            avg_facet_len: 1.0,
        };
        let set_pred = estimate_epoch_cost(ObjectiveId::SetPred, &stats);
        assert!((set_pred - 14.0).abs() < 1e-9, "got {set_pred}");
        let seq_default = estimate_epoch_cost(ObjectiveId::SeqDefault, &stats);
        assert!((seq_default - 12.0).abs() < 1e-9, "got {seq_default}");
        let min_perm = estimate_epoch_cost(ObjectiveId::SeqMinPerm, &stats);
        assert!((min_perm - 2.0 * seq_default).abs() < 1e-9);
    }

    #[test]
    fn joint_targets_keep_separator_structure() {
        let rec = record(&["x y", "z"]);
        let vocab = vocab_for(&rec);
        let plan = SamplingPlan::full_enumeration(ObjectiveId::SeqAvgPerm);
        let ex = build_examples(ObjectiveId::SeqAvgPerm, &rec, 0, &plan, &vocab, LIMITS).unwrap();
        for e in &ex {
            let seps = e
                .target
                .as_slice()
                .iter()
                .filter(|&&id| id == FACET_SEP_ID)
                .count();
            assert_eq!(seps, 1);
        }
    }
}
