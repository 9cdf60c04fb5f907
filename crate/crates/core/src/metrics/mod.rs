//! Scoring for corpora with attached hypotheses: quality via BLEU and
//! consistency via CONSIST, PWB, MATCH and NUM, assembled into a
//! [`MetricReport`].
//!
//! Consistency metrics look at how a system's outputs vary *within* a
//! cluster: a robust system maps every variant of the same sentence to the
//! same translation. Grouping uses the raw output string (NFC, trimmed), not
//! the tokenized form, because downstream consumers receive the raw string.

pub mod bleu;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Cluster, Corpus};
use crate::tokenize::tokenize_13a;

pub use bleu::{corpus_bleu, segment_stats, sentence_bleu, SegmentStats};

/// One distinct output text within a cluster and how many inputs produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisGroup {
    pub text: String,
    pub count: usize,
}

/// All scores for one corpus. `pwb` is present only when pairwise BLEU was
/// requested; `skipped_singletons_pwb` counts clusters too small to pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub consist: f64,
    pub pwb: Option<f64>,
    pub r#match: f64,
    pub num: f64,
    pub cluster_count: usize,
    pub skipped_singletons_pwb: usize,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("hypothesis/reference length mismatch: {hypotheses} vs {references}")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },
    #[error("cluster '{id}' has no hypotheses")]
    MissingHypotheses { id: String },
    #[error("PWB undefined: all {skipped} clusters are singletons")]
    PwbUndefined { skipped: usize },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
}

/// The BLEU configuration string stamped on every report.
pub fn signature() -> String {
    format!(
        "nrefs:1|case:lc|eff:no|tok:13a|smooth:exp|toolkit:{}",
        env!("CARGO_PKG_VERSION")
    )
}

fn hypotheses_of(cluster: &Cluster) -> Result<&[String], MetricsError> {
    cluster
        .hypotheses
        .as_deref()
        .ok_or_else(|| MetricsError::MissingHypotheses {
            id: cluster.id.clone(),
        })
}

/// Groups a cluster's outputs by exact text, sorted by count descending and
/// ties by lexicographic text order.
pub fn group_hypotheses(cluster: &Cluster) -> Result<Vec<HypothesisGroup>, MetricsError> {
    let hypotheses = hypotheses_of(cluster)?;
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for h in hypotheses {
        *counts.entry(h.as_str()).or_insert(0) += 1;
    }
    let mut groups: Vec<HypothesisGroup> = counts
        .into_iter()
        .map(|(text, count)| HypothesisGroup {
            text: text.to_string(),
            count,
        })
        .collect();
    groups.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.text.cmp(&b.text)));
    Ok(groups)
}

/// The per-cluster consistency score in [0, 1]: with groups ranked largest
/// first, `(1/n) Σ count_j / j` where `j` is the 1-based rank. One big group
/// scores 1; `n` distinct outputs score `H_n / n`.
pub fn consist_cluster(groups: &[HypothesisGroup], n: usize) -> f64 {
    debug_assert_eq!(groups.iter().map(|g| g.count).sum::<usize>(), n);
    let mut sum = 0.0;
    for (rank, group) in groups.iter().enumerate() {
        sum += group.count as f64 / (rank + 1) as f64;
    }
    sum / n as f64
}

/// Mean per-cluster consistency over the corpus, scaled to 0-100.
pub fn consist_corpus(corpus: &Corpus) -> Result<f64, MetricsError> {
    if corpus.clusters.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for cluster in &corpus.clusters {
        let groups = group_hypotheses(cluster)?;
        sum += consist_cluster(&groups, cluster.hypotheses.as_ref().unwrap().len());
    }
    Ok(100.0 * sum / corpus.clusters.len() as f64)
}

fn pairs_of(count: usize) -> u64 {
    let c = count as u64;
    c * (c - 1) / 2
}

/// Mean sentence BLEU over all unordered pairs of a cluster's outputs, with
/// multiplicity: a pair of identical outputs contributes 100 without
/// invoking the scorer. `None` for clusters with fewer than two outputs.
///
/// Cross-group pairs are scored once per text pair in group order (larger
/// count first, ties lexicographic) and weighted by the product of the group
/// counts, which makes the result independent of input order.
pub fn pwb_cluster(groups: &[HypothesisGroup], n: usize) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let mut sum = 0.0;
    for (i, g) in groups.iter().enumerate() {
        sum += pairs_of(g.count) as f64 * 100.0;
        for h in &groups[i + 1..] {
            sum += (g.count * h.count) as f64 * sentence_bleu(&g.text, &h.text);
        }
    }
    Some(sum / pairs_of(n) as f64)
}

/// Corpus PWB: the unweighted mean of per-cluster pairwise BLEU over
/// clusters with at least two outputs, plus the number of skipped singleton
/// clusters. Per-cluster work runs in parallel; the reduction follows stable
/// cluster order so results do not depend on scheduling.
pub fn pwb_corpus(corpus: &Corpus) -> Result<(f64, usize), MetricsError> {
    if corpus.clusters.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    for cluster in &corpus.clusters {
        hypotheses_of(cluster)?;
    }
    let per_cluster: Vec<Option<f64>> = corpus
        .clusters
        .par_iter()
        .map(|cluster| {
            let groups = group_hypotheses(cluster).expect("hypotheses verified above");
            pwb_cluster(&groups, cluster.hypotheses.as_ref().unwrap().len())
        })
        .collect();
    let skipped = per_cluster.iter().filter(|s| s.is_none()).count();
    let scored = per_cluster.len() - skipped;
    if scored == 0 {
        return Err(MetricsError::PwbUndefined { skipped });
    }
    let sum: f64 = per_cluster.iter().flatten().sum();
    Ok((sum / scored as f64, skipped))
}

/// Fraction of outputs per cluster whose lowercased 13a token sequence
/// equals the reference's, averaged over clusters and scaled to 0-100.
pub fn match_score(corpus: &Corpus) -> Result<f64, MetricsError> {
    if corpus.clusters.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for cluster in &corpus.clusters {
        let hypotheses = hypotheses_of(cluster)?;
        let ref_toks = tokenize_13a(&cluster.target, true);
        let matching = hypotheses
            .iter()
            .filter(|h| tokenize_13a(h, true) == ref_toks)
            .count();
        sum += matching as f64 / hypotheses.len() as f64;
    }
    Ok(100.0 * sum / corpus.clusters.len() as f64)
}

/// Mean number of distinct outputs per cluster.
pub fn num_score(corpus: &Corpus) -> Result<f64, MetricsError> {
    if corpus.clusters.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut sum = 0usize;
    for cluster in &corpus.clusters {
        sum += group_hypotheses(cluster)?.len();
    }
    Ok(sum as f64 / corpus.clusters.len() as f64)
}

/// Scores a fully-hypothesized corpus. BLEU is computed over the flattened
/// (hypothesis, repeated target) pairs; CONSIST, MATCH and NUM always;
/// PWB only when `compute_pwb` is set.
pub fn evaluate(corpus: &Corpus, compute_pwb: bool) -> Result<MetricReport, MetricsError> {
    if corpus.clusters.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut hyps: Vec<String> = Vec::with_capacity(corpus.total_variants());
    let mut refs: Vec<String> = Vec::with_capacity(corpus.total_variants());
    for cluster in &corpus.clusters {
        for h in hypotheses_of(cluster)? {
            hyps.push(h.clone());
            refs.push(cluster.target.clone());
        }
    }
    let bleu = corpus_bleu(&hyps, &refs)?;
    let consist = consist_corpus(corpus)?;
    let (pwb, skipped_singletons_pwb) = if compute_pwb {
        let (score, skipped) = pwb_corpus(corpus)?;
        (Some(score), skipped)
    } else {
        (None, 0)
    };
    Ok(MetricReport {
        bleu,
        consist,
        pwb,
        r#match: match_score(corpus)?,
        num: num_score(corpus)?,
        cluster_count: corpus.clusters.len(),
        skipped_singletons_pwb,
    })
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    #[serde(flatten)]
    report: &'a MetricReport,
    signature: String,
}

/// One-line JSON rendering of a report, with the BLEU signature attached.
pub fn report_json(report: &MetricReport) -> String {
    serde_json::to_string(&ReportRecord {
        report,
        signature: signature(),
    })
    .expect("report serialization cannot fail")
}

/// Plain-text aligned table rendering of a report.
pub fn report_table(report: &MetricReport) -> String {
    let pwb = match report.pwb {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    };
    let mut out = String::new();
    out.push_str(&format!("{:<8} {:>10}\n", "metric", "value"));
    out.push_str(&format!("{:<8} {:>10}\n", "------", "-----"));
    out.push_str(&format!("{:<8} {:>10.4}\n", "bleu", report.bleu));
    out.push_str(&format!("{:<8} {:>10.4}\n", "consist", report.consist));
    out.push_str(&format!("{:<8} {:>10}\n", "pwb", pwb));
    out.push_str(&format!("{:<8} {:>10.4}\n", "match", report.r#match));
    out.push_str(&format!("{:<8} {:>10.4}\n", "num", report.num));
    out.push_str(&format!("clusters: {}\n", report.cluster_count));
    out.push_str(&format!(
        "pwb skipped singletons: {}\n",
        report.skipped_singletons_pwb
    ));
    out.push_str(&format!("signature: {}\n", signature()));
    out
}
