//! BLEU under the signature `nrefs:1|case:lc|eff:no|tok:13a|smooth:exp`:
//! single reference, lowercased 13a tokens, no effective-order reduction at
//! the corpus level, exponential smoothing of zero numerators.
//!
//! Sentence-level scoring reuses the same statistics but excludes orders
//! whose n-gram total is zero (hypothesis shorter than n tokens) from the
//! geometric mean instead of zeroing the score; very short segments would
//! otherwise collapse every pairwise comparison. Corpus-level scoring keeps
//! the strict rule: any empty order total zeroes the score.

use std::collections::HashMap;

use crate::metrics::MetricsError;
use crate::tokenize::tokenize_13a;

const MAX_ORDER: usize = 4;

/// Clipped n-gram statistics for one segment, summable across a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SegmentStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl SegmentStats {
    pub fn add(&mut self, other: &SegmentStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

/// Counts clipped n-gram matches of `hyp` against `reference` for n = 1..4
/// over already-tokenized segments.
pub fn segment_stats(hyp: &[String], reference: &[String]) -> SegmentStats {
    let mut stats = SegmentStats {
        hyp_len: hyp.len() as u64,
        ref_len: reference.len() as u64,
        ..SegmentStats::default()
    };
    for n in 1..=MAX_ORDER {
        if hyp.len() < n {
            break;
        }
        let mut ref_counts: HashMap<&[String], u64> = HashMap::new();
        if reference.len() >= n {
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_insert(0) += 1;
            }
        }
        let mut hyp_counts: HashMap<&[String], u64> = HashMap::new();
        for gram in hyp.windows(n) {
            *hyp_counts.entry(gram).or_insert(0) += 1;
        }
        let mut matches = 0u64;
        let mut total = 0u64;
        for (gram, count) in &hyp_counts {
            total += count;
            if let Some(&ref_count) = ref_counts.get(gram) {
                matches += (*count).min(ref_count);
            }
        }
        stats.totals[n - 1] = total;
        stats.matches[n - 1] = matches;
    }
    stats
}

fn score(stats: &SegmentStats, effective_order: bool) -> f64 {
    if stats.hyp_len == 0 {
        return 0.0;
    }
    if !effective_order && stats.totals.iter().any(|&t| t == 0) {
        return 0.0;
    }
    let mut smooth = 1.0f64;
    let mut log_sum = 0.0f64;
    let mut orders = 0u32;
    for n in 0..MAX_ORDER {
        if stats.totals[n] == 0 {
            continue;
        }
        orders += 1;
        let p = if stats.matches[n] == 0 {
            smooth *= 2.0;
            1.0 / (smooth * stats.totals[n] as f64)
        } else {
            stats.matches[n] as f64 / stats.totals[n] as f64
        };
        log_sum += p.ln();
    }
    let denom = if effective_order {
        orders as f64
    } else {
        MAX_ORDER as f64
    };
    let bp = (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp().min(1.0);
    100.0 * bp * (log_sum / denom).exp()
}

/// Corpus BLEU over aligned hypothesis/reference lists. Statistics are
/// aggregated over all segments before the geometric mean; an empty
/// hypothesis side or an empty n-gram order total yields 0.
pub fn corpus_bleu(hypotheses: &[String], references: &[String]) -> Result<f64, MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    let mut aggregate = SegmentStats::default();
    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp_toks = tokenize_13a(hyp, true);
        let ref_toks = tokenize_13a(reference, true);
        aggregate.add(&segment_stats(&hyp_toks, &ref_toks));
    }
    Ok(score(&aggregate, false))
}

/// Sentence BLEU for one hypothesis/reference pair, with zero-total orders
/// excluded from the geometric mean. Identical tokenized sentences score
/// exactly 100.
pub fn sentence_bleu(hypothesis: &str, reference: &str) -> f64 {
    let hyp_toks = tokenize_13a(hypothesis, true);
    let ref_toks = tokenize_13a(reference, true);
    let stats = segment_stats(&hyp_toks, &ref_toks);
    score(&stats, true)
}
