//! Assembling model-ready input/output example pairs.
//!
//! The input starts with the focal method wrapped in marker comments and
//! greedily adds whole context categories in a fixed order — using
//! statements, class attributes, caller/callee method bodies, other method
//! signatures — as long as the token budget holds. The output carries the
//! developer's fix: the modified focal method plus modified caller/callee
//! methods, added imports and referenced new attributes, rendered in
//! canonical order.
//!
//! Dataset operations deduplicate exact and near-duplicate examples and
//! split corpora at project granularity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::code_model::{normalize_body, ClassModel, FocalMethodPair, MethodModel, SourceUnit};
use crate::corpus_miner::CommitRecord;
use crate::patch_format::PatchParts;
use crate::tokenize;

pub use crate::tokenize::count_tokens;

#[derive(Debug, Error)]
pub enum ExampleError {
    /// The focal method alone exceeds the token budget; the example is
    /// skipped, never truncated.
    #[error("focal method alone exceeds the token budget ({tokens} > {budget})")]
    FocalTooLarge { tokens: usize, budget: usize },
    #[error("fractions must sum to 1 (got {0})")]
    BadFractions(f64),
}

/// The four input context categories, in packing order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ContextCategory {
    Usings,
    ClassAttributes,
    CallerCallee,
    OtherSignatures,
}

impl ContextCategory {
    pub const ORDER: [ContextCategory; 4] = [
        ContextCategory::Usings,
        ContextCategory::ClassAttributes,
        ContextCategory::CallerCallee,
        ContextCategory::OtherSignatures,
    ];
}

/// Marker comments delimiting the focal method in the input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Markers {
    pub begin: String,
    pub end: String,
}

impl Default for Markers {
    fn default() -> Self {
        Markers {
            begin: "/* edit */".to_string(),
            end: "/* end */".to_string(),
        }
    }
}

/// One input/output example with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformationExample {
    pub example_id: String,
    pub repo_id: String,
    pub commit_id: String,
    /// First parent of the mined commit: the tree a suggestion applies to.
    pub parent_commit_id: String,
    pub file_path: String,
    pub focal_signature: String,
    pub input_text: String,
    pub output_text: String,
    pub is_perf: bool,
    pub included_context: Vec<ContextCategory>,
    pub token_count_input: usize,
}

/// Project-level dataset split: the three repo lists are pairwise disjoint.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

/// Result of packing an input under the budget.
#[derive(Debug, Clone)]
pub struct BuiltInput {
    pub text: String,
    pub included: BTreeSet<ContextCategory>,
    pub token_count: usize,
}

/// Pack the example input for `focal` within `unit`.
///
/// Each candidate category is added whole or not at all, in the fixed
/// [`ContextCategory::ORDER`]; a category is added only when the resulting
/// token count stays within `budget`.
pub fn build_input(
    pair: &FocalMethodPair,
    unit_before: &SourceUnit,
    markers: &Markers,
    budget: usize,
) -> Result<BuiltInput, ExampleError> {
    let focal = &pair.before;
    let class = unit_before.class_of(&focal.signature);

    let mut text = format!("{}\n{}\n{}", markers.begin, focal.text.trim(), markers.end);
    let base_tokens = tokenize::count_tokens(&text);
    if base_tokens > budget {
        return Err(ExampleError::FocalTooLarge {
            tokens: base_tokens,
            budget,
        });
    }

    let mut included = BTreeSet::new();
    let mut token_count = base_tokens;

    for category in ContextCategory::ORDER {
        let block = match category {
            ContextCategory::Usings => {
                if unit_before.using_statements.is_empty() {
                    continue;
                }
                unit_before.using_statements.join("\n")
            }
            ContextCategory::ClassAttributes => {
                let Some(class) = class else { continue };
                if class.attributes.is_empty() {
                    continue;
                }
                class
                    .attributes
                    .iter()
                    .map(|a| a.text.clone())
                    .collect::<Vec<_>>()
                    .join("\n")
            }
            ContextCategory::CallerCallee => {
                let bodies: Vec<String> = caller_callee_methods(unit_before, focal)
                    .into_iter()
                    .map(|m| m.text.trim().to_string())
                    .collect();
                if bodies.is_empty() {
                    continue;
                }
                bodies.join("\n\n")
            }
            ContextCategory::OtherSignatures => {
                let related: BTreeSet<_> = caller_callee_methods(unit_before, focal)
                    .into_iter()
                    .map(|m| m.signature.clone())
                    .collect();
                let signatures: Vec<String> = unit_before
                    .methods()
                    .filter(|m| m.signature != focal.signature && !related.contains(&m.signature))
                    .map(|m| format!("{};", m.header_text.trim()))
                    .collect();
                if signatures.is_empty() {
                    continue;
                }
                signatures.join("\n")
            }
        };

        let candidate = format!("{text}\n\n{block}");
        let tokens = tokenize::count_tokens(&candidate);
        if tokens <= budget {
            text = candidate;
            token_count = tokens;
            included.insert(category);
        }
    }

    Ok(BuiltInput {
        text,
        included,
        token_count,
    })
}

/// Caller and callee methods of `focal` within the unit, in source order,
/// excluding the focal method itself.
fn caller_callee_methods<'u>(unit: &'u SourceUnit, focal: &MethodModel) -> Vec<&'u MethodModel> {
    let mut related: BTreeSet<_> = focal.callees.iter().cloned().collect();
    related.extend(focal.callers.iter().cloned());
    related.remove(&focal.signature);
    unit.methods()
        .filter(|m| related.contains(&m.signature))
        .collect()
}

/// Assemble the ground-truth output for a pair.
///
/// Includes the after-version focal method first, then after-versions of
/// modified caller/callee methods, plus any added import lines and
/// added/modified class attributes referenced by the emitted methods, in
/// canonical order (imports, attributes, methods).
pub fn build_output(
    pair: &FocalMethodPair,
    unit_before: &SourceUnit,
    unit_after: &SourceUnit,
    all_pairs: &[FocalMethodPair],
) -> String {
    // Caller/callee relation from either version, so a relation introduced by
    // the change still counts.
    let mut related: BTreeSet<_> = BTreeSet::new();
    for unit in [unit_before, unit_after] {
        if let Some(m) = unit.find_method(&pair.signature) {
            related.extend(m.callees.iter().cloned());
            related.extend(m.callers.iter().cloned());
        }
    }
    related.remove(&pair.signature);

    let modified_related: Vec<&FocalMethodPair> = all_pairs
        .iter()
        .filter(|p| p.signature != pair.signature && related.contains(&p.signature))
        .collect();

    let mut methods: Vec<String> = vec![pair.after.text.trim().to_string()];
    // After-unit source order keeps the rendering deterministic.
    let mut ordered: Vec<&FocalMethodPair> = modified_related;
    ordered.sort_by_key(|p| {
        unit_after
            .find_method(&p.signature)
            .map(|m| m.span.0)
            .unwrap_or(usize::MAX)
    });
    methods.extend(ordered.iter().map(|p| p.after.text.trim().to_string()));

    let before_usings: HashSet<String> = unit_before
        .using_statements
        .iter()
        .map(|u| normalize_body(u))
        .collect();
    let imports: Vec<String> = unit_after
        .using_statements
        .iter()
        .filter(|u| !before_usings.contains(&normalize_body(u)))
        .cloned()
        .collect();

    let attributes = added_attributes_referenced(unit_before, unit_after, &pair.signature, &methods);

    PatchParts {
        imports,
        attributes,
        methods,
    }
    .render()
}

/// Class attributes that are new or modified in the after version and whose
/// declared name is referenced by one of the emitted method texts.
fn added_attributes_referenced(
    unit_before: &SourceUnit,
    unit_after: &SourceUnit,
    focal: &crate::code_model::MethodSignature,
    emitted_methods: &[String],
) -> Vec<String> {
    let Some(after_class) = unit_after.class_of(focal) else {
        return Vec::new();
    };
    let before_class = unit_before.class_of(focal);
    let before_attrs: HashSet<String> = before_class
        .map(|c| c.attributes.iter().map(|a| normalize_body(&a.text)).collect())
        .unwrap_or_default();

    let used: HashSet<&str> = emitted_methods
        .iter()
        .flat_map(|m| tokenize::tokens(m))
        .collect();

    after_class
        .attributes
        .iter()
        .filter(|a| !before_attrs.contains(&normalize_body(&a.text)))
        .filter(|a| a.names.iter().any(|n| used.contains(n.as_str())))
        .map(|a| a.text.clone())
        .collect()
}

/// Everything built from one commit: emitted examples plus skip notes.
#[derive(Debug, Default)]
pub struct BuildOutcome {
    pub examples: Vec<TransformationExample>,
    pub skipped: Vec<String>,
}

/// Build all examples for one mined commit.
pub fn build_examples(
    record: &CommitRecord,
    repo_id: &str,
    markers: &Markers,
    budget: usize,
) -> BuildOutcome {
    let mut outcome = BuildOutcome::default();
    for change in &record.file_changes {
        if change.before_text.is_empty() || change.after_text.is_empty() {
            continue; // added or deleted file: nothing to pair
        }
        let (before, after) = match (
            crate::code_model::parse_source(&change.before_text),
            crate::code_model::parse_source(&change.after_text),
        ) {
            (Ok(b), Ok(a)) => (b, a),
            (b, a) => {
                let reason = b.err().or(a.err()).map(|e| e.to_string()).unwrap_or_default();
                outcome
                    .skipped
                    .push(format!("{}: unparseable file version: {reason}", change.path));
                continue;
            }
        };
        let pairs = crate::code_model::pair_methods(&before, &after);
        for pair in &pairs {
            match build_input(pair, &before, markers, budget) {
                Ok(built) => {
                    let output_text = build_output(pair, &before, &after, &pairs);
                    let example_id = example_id(repo_id, &record.commit_id, &pair.signature.to_string());
                    outcome.examples.push(TransformationExample {
                        example_id,
                        repo_id: repo_id.to_string(),
                        commit_id: record.commit_id.clone(),
                        parent_commit_id: record.parent_id.clone(),
                        file_path: change.path.clone(),
                        focal_signature: pair.signature.to_string(),
                        input_text: built.text,
                        output_text,
                        is_perf: record.is_perf,
                        included_context: built.included.into_iter().collect(),
                        token_count_input: built.token_count,
                    });
                }
                Err(e) => outcome.skipped.push(format!(
                    "{} {}: {e}",
                    change.path, pair.signature
                )),
            }
        }
    }
    outcome
}

fn example_id(repo_id: &str, commit_id: &str, signature: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(signature.as_bytes());
    let digest = hasher.finalize();
    let short: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    let commit_short = &commit_id[..commit_id.len().min(12)];
    format!("{repo_id}:{commit_short}:{short}")
}

/// Token multiset Jaccard similarity of two texts.
pub fn jaccard_similarity(a: &str, b: &str) -> f64 {
    fn count(text: &str) -> HashMap<&str, usize> {
        let mut m: HashMap<&str, usize> = HashMap::new();
        for t in tokenize::tokens(text) {
            *m.entry(t).or_insert(0) += 1;
        }
        m
    }
    let ca = count(a);
    let cb = count(b);
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (t, &na) in &ca {
        let nb = cb.get(t).copied().unwrap_or(0);
        intersection += na.min(nb);
        union += na.max(nb);
    }
    for (t, &nb) in &cb {
        if !ca.contains_key(t) {
            union += nb;
        }
    }
    if union == 0 {
        // Two empty token multisets are identical.
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Remove exact duplicates (content hash of input and output) and near
/// duplicates (input token-multiset Jaccard ≥ `threshold`), keeping the
/// first occurrence. Idempotent.
pub fn dedup(examples: Vec<TransformationExample>, threshold: f64) -> Vec<TransformationExample> {
    let mut seen_hashes: HashSet<[u8; 32]> = HashSet::new();
    let mut exact: Vec<TransformationExample> = Vec::new();
    for example in examples {
        let mut hasher = Sha256::new();
        hasher.update(example.input_text.as_bytes());
        hasher.update([0u8]);
        hasher.update(example.output_text.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        if seen_hashes.insert(digest) {
            exact.push(example);
        }
    }

    // Interned token counts, sorted by id, for cheap multiset intersection.
    let mut interner: HashMap<String, u32> = HashMap::new();
    let profiles: Vec<(Vec<(u32, u32)>, u64)> = exact
        .iter()
        .map(|e| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for t in tokenize::tokens(&e.input_text) {
                let next = interner.len() as u32;
                let id = *interner.entry(t.to_string()).or_insert(next);
                *counts.entry(id).or_insert(0) += 1;
            }
            let total: u64 = counts.values().map(|&c| c as u64).sum();
            (counts.into_iter().collect(), total)
        })
        .collect();

    let mut kept: Vec<usize> = Vec::new();
    // Kept indices bucketed by total token count for the size-ratio prefilter:
    // J(a,b) <= min(total)/max(total), so only near-sized candidates matter.
    let mut by_size: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, (counts, total)) in profiles.iter().enumerate() {
        let lo = (*total as f64 * threshold).floor() as u64;
        let hi = if threshold > 0.0 {
            (*total as f64 / threshold).ceil() as u64
        } else {
            u64::MAX
        };
        let mut duplicate = false;
        for (_, candidates) in by_size.range(lo..=hi) {
            for &j in candidates {
                let (other, other_total) = &profiles[j];
                if multiset_jaccard(counts, *total, other, *other_total) >= threshold {
                    duplicate = true;
                    break;
                }
            }
            if duplicate {
                break;
            }
        }
        if !duplicate {
            kept.push(i);
            by_size.entry(*total).or_default().push(i);
        }
    }

    let keep: HashSet<usize> = kept.into_iter().collect();
    exact
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, e)| e)
        .collect()
}

fn multiset_jaccard(a: &[(u32, u32)], total_a: u64, b: &[(u32, u32)], total_b: u64) -> f64 {
    if total_a == 0 && total_b == 0 {
        return 1.0;
    }
    let mut intersection = 0u64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                intersection += a[i].1.min(b[j].1) as u64;
                i += 1;
                j += 1;
            }
        }
    }
    let union = total_a + total_b - intersection;
    intersection as f64 / union as f64
}

/// Shuffle repos with a seeded PRNG and partition them by `fractions`
/// (train, validation, test). Every example follows its repo, so the three
/// sets are disjoint at project level.
pub fn split_by_project(
    examples: &[TransformationExample],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit, ExampleError> {
    let sum = fractions.0 + fractions.1 + fractions.2;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ExampleError::BadFractions(sum));
    }

    let mut repos: Vec<String> = examples
        .iter()
        .map(|e| e.repo_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    repos.shuffle(&mut rng);

    let n = repos.len() as f64;
    // Cumulative rounding keeps the boundary sums exact.
    let b1 = (fractions.0 * n).round() as usize;
    let b2 = ((fractions.0 + fractions.1) * n).round() as usize;
    let b1 = b1.min(repos.len());
    let b2 = b2.clamp(b1, repos.len());

    Ok(DatasetSplit {
        train: repos[..b1].to_vec(),
        validation: repos[b1..b2].to_vec(),
        test: repos[b2..].to_vec(),
    })
}
