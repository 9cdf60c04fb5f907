//! Cluster corpus model: import from prompt/variant block files, canonical
//! JSON Lines serialization, parallel-text export, hypothesis attachment,
//! statistics, and extreme (1-most / 1-least) test-set construction.
//!
//! All sentence text is normalized at construction: Unicode NFC, surrounding
//! whitespace trimmed, interior newlines replaced by spaces. Cluster ids are
//! kept verbatim. Every operation is a pure function returning a new value.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::normalize_text;

/// One source-language variant with its relative frequency weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantEntry {
    pub text: String,
    pub weight: f64,
}

/// One target sentence together with the source variants that translate to
/// it, and optionally one model output per variant.
///
/// `ordinal` is the cluster's zero-based position at import time. Seeded
/// operations key their per-cluster randomness on it, so reordering clusters
/// in memory does not change what any given cluster receives. It is not a
/// canonical-format field: re-reading a canonical file assigns ordinals by
/// record position, which matches as long as the file order was preserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: String,
    pub target: String,
    pub variants: Vec<VariantEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<String>>,
    #[serde(skip)]
    pub ordinal: u64,
}

/// An ordered collection of clusters. Cluster order is significant: it is
/// preserved by serialization and it determines each cluster's ordinal for
/// seeded operations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub source_lang: String,
    pub target_lang: String,
    pub clusters: Vec<Cluster>,
}

/// Corpus-global counts in the shape conventionally reported for this kind
/// of data: unique segment counts on each side plus cluster shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub unique_source_segments: usize,
    pub unique_target_segments: usize,
    pub cluster_count: usize,
    pub mean_variants_per_cluster: f64,
}

/// Which extreme of the weight distribution a test set keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremeMode {
    Most,
    Least,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: missing '{delimiter}' delimiter")]
    MissingDelimiter { line: usize, delimiter: char },
    #[error("line {line}: non-numeric weight '{value}'")]
    NonNumericWeight { line: usize, value: String },
    #[error("line {line}: negative weight {value}")]
    NegativeWeight { line: usize, value: f64 },
    #[error("line {line}: empty variant text")]
    EmptyVariantText { line: usize },
    #[error("line {line}: cluster '{id}' has no variants")]
    EmptyCluster { line: usize, id: String },
    #[error("duplicate cluster id '{id}' (lines {first_line} and {second_line})")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("cluster '{id}': {hypotheses} hypotheses for {variants} variants")]
    HypothesesLengthMismatch {
        id: String,
        hypotheses: usize,
        variants: usize,
    },
    #[error("hypothesis count mismatch: expected {expected}, got {actual}")]
    HypothesisCountMismatch { expected: usize, actual: usize },
}

impl Corpus {
    /// Total number of variants across all clusters, which is also the line
    /// count of a parallel export.
    pub fn total_variants(&self) -> usize {
        self.clusters.iter().map(|c| c.variants.len()).sum()
    }
}

/// Parses the block import format: blank-line-separated blocks, each a
/// prompt line `<id><delim><target>` followed by one variant line
/// `<text><delim><weight>` per variant.
///
/// The prompt line splits at the first delimiter so the target sentence may
/// contain the delimiter; variant lines split at the last delimiter for the
/// same reason. Ids are taken verbatim. Trailing whitespace on any line is
/// tolerated.
pub fn parse_staple(
    input: &str,
    source_lang: &str,
    target_lang: &str,
    delimiter: char,
) -> Result<Corpus, CorpusError> {
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut id_lines: HashMap<String, usize> = HashMap::new();
    // (cluster under construction, prompt line number)
    let mut open: Option<(Cluster, usize)> = None;

    let close =
        |open: &mut Option<(Cluster, usize)>, clusters: &mut Vec<Cluster>| -> Result<(), CorpusError> {
            if let Some((mut cluster, prompt_line)) = open.take() {
                if cluster.variants.is_empty() {
                    return Err(CorpusError::EmptyCluster {
                        line: prompt_line,
                        id: cluster.id,
                    });
                }
                cluster.ordinal = clusters.len() as u64;
                clusters.push(cluster);
            }
            Ok(())
        };

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() {
            close(&mut open, &mut clusters)?;
            continue;
        }
        match open {
            None => {
                let (id, target) =
                    line.split_once(delimiter)
                        .ok_or(CorpusError::MissingDelimiter {
                            line: line_no,
                            delimiter,
                        })?;
                let id = id.to_string();
                if let Some(&first_line) = id_lines.get(&id) {
                    return Err(CorpusError::DuplicateId {
                        id,
                        first_line,
                        second_line: line_no,
                    });
                }
                id_lines.insert(id.clone(), line_no);
                open = Some((
                    Cluster {
                        id,
                        target: normalize_text(target),
                        variants: Vec::new(),
                        hypotheses: None,
                        ordinal: 0,
                    },
                    line_no,
                ));
            }
            Some((ref mut cluster, _)) => {
                let (text, weight_str) =
                    line.rsplit_once(delimiter)
                        .ok_or(CorpusError::MissingDelimiter {
                            line: line_no,
                            delimiter,
                        })?;
                let weight: f64 = weight_str.trim().parse().map_err(|_| {
                    CorpusError::NonNumericWeight {
                        line: line_no,
                        value: weight_str.trim().to_string(),
                    }
                })?;
                if !weight.is_finite() {
                    return Err(CorpusError::NonNumericWeight {
                        line: line_no,
                        value: weight_str.trim().to_string(),
                    });
                }
                if weight < 0.0 {
                    return Err(CorpusError::NegativeWeight {
                        line: line_no,
                        value: weight,
                    });
                }
                let text = normalize_text(text);
                if text.is_empty() {
                    return Err(CorpusError::EmptyVariantText { line: line_no });
                }
                cluster.variants.push(VariantEntry { text, weight });
            }
        }
    }
    close(&mut open, &mut clusters)?;

    Ok(Corpus {
        source_lang: source_lang.to_string(),
        target_lang: target_lang.to_string(),
        clusters,
    })
}

/// Serializes a corpus to the canonical format: one JSON object per line
/// with fields `id`, `target`, `variants` (objects with `text` and
/// `weight`), and `hypotheses` when present. Text is NFC on write because it
/// is NFC in memory.
pub fn write_canonical(corpus: &Corpus) -> String {
    let mut out = String::new();
    for cluster in &corpus.clusters {
        let line = serde_json::to_string(cluster).expect("cluster serialization cannot fail");
        let _ = writeln!(out, "{line}");
    }
    out
}

/// Reads the canonical format back. Language codes are not part of the
/// canonical record; the result carries empty language fields and callers
/// that need them set them explicitly.
pub fn read_canonical(input: &str) -> Result<Corpus, CorpusError> {
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut id_lines: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut cluster: Cluster =
            serde_json::from_str(raw).map_err(|e| CorpusError::MalformedRecord {
                line: line_no,
                message: e.to_string(),
            })?;
        cluster.target = normalize_text(&cluster.target);
        for variant in &mut cluster.variants {
            variant.text = normalize_text(&variant.text);
            if !variant.weight.is_finite() || variant.weight < 0.0 {
                return Err(CorpusError::NegativeWeight {
                    line: line_no,
                    value: variant.weight,
                });
            }
            if variant.text.is_empty() {
                return Err(CorpusError::EmptyVariantText { line: line_no });
            }
        }
        if cluster.variants.is_empty() {
            return Err(CorpusError::EmptyCluster {
                line: line_no,
                id: cluster.id,
            });
        }
        if let Some(hyps) = &mut cluster.hypotheses {
            if hyps.len() != cluster.variants.len() {
                return Err(CorpusError::HypothesesLengthMismatch {
                    id: cluster.id,
                    hypotheses: hyps.len(),
                    variants: cluster.variants.len(),
                });
            }
            for h in hyps.iter_mut() {
                *h = normalize_text(h);
            }
        }
        if let Some(&first_line) = id_lines.get(&cluster.id) {
            return Err(CorpusError::DuplicateId {
                id: cluster.id,
                first_line,
                second_line: line_no,
            });
        }
        id_lines.insert(cluster.id.clone(), line_no);
        cluster.ordinal = clusters.len() as u64;
        clusters.push(cluster);
    }
    Ok(Corpus {
        source_lang: String::new(),
        target_lang: String::new(),
        clusters,
    })
}

/// Flattens the corpus to aligned parallel text: for each cluster, one
/// source line per variant and the target sentence repeated once per
/// variant. Returns `(source_text, target_text)`, each line LF-terminated.
pub fn export_parallel(corpus: &Corpus) -> (String, String) {
    let mut src = String::new();
    let mut tgt = String::new();
    for cluster in &corpus.clusters {
        for variant in &cluster.variants {
            let _ = writeln!(src, "{}", variant.text);
            let _ = writeln!(tgt, "{}", cluster.target);
        }
    }
    (src, tgt)
}

/// Attaches one hypothesis line per variant, in the same flattened order as
/// [`export_parallel`]. The input corpus is not modified.
pub fn attach_hypotheses(corpus: &Corpus, lines: &[String]) -> Result<Corpus, CorpusError> {
    let expected = corpus.total_variants();
    if lines.len() != expected {
        return Err(CorpusError::HypothesisCountMismatch {
            expected,
            actual: lines.len(),
        });
    }
    let mut result = corpus.clone();
    let mut cursor = 0usize;
    for cluster in &mut result.clusters {
        let n = cluster.variants.len();
        cluster.hypotheses = Some(
            lines[cursor..cursor + n]
                .iter()
                .map(|l| normalize_text(l))
                .collect(),
        );
        cursor += n;
    }
    Ok(result)
}

/// Corpus-global statistics. Uniqueness is computed on exact text, which is
/// already NFC-normalized and trimmed in memory. Hypotheses are ignored.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut sources: HashSet<&str> = HashSet::new();
    let mut targets: HashSet<&str> = HashSet::new();
    let mut total_variants = 0usize;
    for cluster in &corpus.clusters {
        targets.insert(cluster.target.as_str());
        for variant in &cluster.variants {
            sources.insert(variant.text.as_str());
        }
        total_variants += cluster.variants.len();
    }
    let cluster_count = corpus.clusters.len();
    CorpusStats {
        unique_source_segments: sources.len(),
        unique_target_segments: targets.len(),
        cluster_count,
        mean_variants_per_cluster: if cluster_count == 0 {
            0.0
        } else {
            total_variants as f64 / cluster_count as f64
        },
    }
}

/// Reduces every cluster to its single highest-weight (`Most`) or
/// lowest-weight (`Least`) variant. Ties break toward the earliest file
/// position. Hypotheses, when present, follow their variant.
pub fn build_extreme_testset(corpus: &Corpus, mode: ExtremeMode) -> Corpus {
    let clusters = corpus
        .clusters
        .iter()
        .map(|cluster| {
            let mut best = 0usize;
            for (i, variant) in cluster.variants.iter().enumerate() {
                let better = match mode {
                    ExtremeMode::Most => variant.weight > cluster.variants[best].weight,
                    ExtremeMode::Least => variant.weight < cluster.variants[best].weight,
                };
                if better {
                    best = i;
                }
            }
            Cluster {
                id: cluster.id.clone(),
                target: cluster.target.clone(),
                variants: vec![cluster.variants[best].clone()],
                hypotheses: cluster
                    .hypotheses
                    .as_ref()
                    .map(|h| vec![h[best].clone()]),
                ordinal: cluster.ordinal,
            }
        })
        .collect();
    Corpus {
        source_lang: corpus.source_lang.clone(),
        target_lang: corpus.target_lang.clone(),
        clusters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_fixture() -> &'static str {
        "p1|i am a boy.\n\
         私は男の子です。|0.7\n\
         僕は男の子だ。|0.3\n\
         \n\
         p2|good morning!\n\
         おはよう。|0.5\n\
         おはようございます。|0.4\n\
         おはよー。|0.1\n\
         \n\
         p3|thanks.\n\
         ありがとう。|1.0\n"
    }

    #[test]
    fn parses_blocks_in_order() {
        let corpus = parse_staple(block_fixture(), "ja", "en", '|').unwrap();
        assert_eq!(corpus.clusters.len(), 3);
        let sizes: Vec<usize> = corpus.clusters.iter().map(|c| c.variants.len()).collect();
        assert_eq!(sizes, vec![2, 3, 1]);
        let c = &corpus.clusters[0];
        assert_eq!(c.id, "p1");
        assert_eq!(c.target, "i am a boy.");
        assert_eq!(c.variants[0].text, "私は男の子です。");
        assert_eq!(c.variants[0].weight, 0.7);
        assert_eq!(c.variants[1].weight, 0.3);
        assert_eq!(corpus.source_lang, "ja");
        assert_eq!(corpus.target_lang, "en");
        let ordinals: Vec<u64> = corpus.clusters.iter().map(|c| c.ordinal).collect();
        assert_eq!(ordinals, vec![0, 1, 2]);
    }

    #[test]
    fn prompt_splits_at_first_delimiter_variants_at_last() {
        let corpus = parse_staple("p1|a | b\nx|y|0.5\n", "ja", "en", '|').unwrap();
        assert_eq!(corpus.clusters[0].target, "a | b");
        assert_eq!(corpus.clusters[0].variants[0].text, "x|y");
    }

    #[test]
    fn non_numeric_weight_names_line() {
        let err = parse_staple("p1|hi\nおはよう|abc\n", "ja", "en", '|').unwrap_err();
        match err {
            CorpusError::NonNumericWeight { line, value } => {
                assert_eq!(line, 2);
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error: {other}"),
        }
        let nan = parse_staple("p1|hi\nおはよう|NaN\n", "ja", "en", '|').unwrap_err();
        assert!(matches!(nan, CorpusError::NonNumericWeight { line: 2, .. }));
    }

    #[test]
    fn negative_weight_rejected() {
        let err = parse_staple("p1|hi\nおはよう|-0.1\n", "ja", "en", '|').unwrap_err();
        assert!(matches!(err, CorpusError::NegativeWeight { line: 2, .. }));
    }

    #[test]
    fn missing_delimiter_names_line() {
        let err = parse_staple("p1 no delimiter here\n", "ja", "en", '|').unwrap_err();
        assert!(matches!(err, CorpusError::MissingDelimiter { line: 1, .. }));
    }

    #[test]
    fn empty_block_rejected() {
        let err = parse_staple("p1|hi\n\np2|yo\nx|1.0\n", "ja", "en", '|').unwrap_err();
        match err {
            CorpusError::EmptyCluster { line, id } => {
                assert_eq!(line, 1);
                assert_eq!(id, "p1");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_id_reports_both_lines() {
        let input = "p1|hi\nx|1.0\n\np1|again\ny|1.0\n";
        let err = parse_staple(input, "ja", "en", '|').unwrap_err();
        match err {
            CorpusError::DuplicateId {
                id,
                first_line,
                second_line,
            } => {
                assert_eq!(id, "p1");
                assert_eq!(first_line, 1);
                assert_eq!(second_line, 4);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn custom_delimiter() {
        let corpus = parse_staple("p1\thello | there\nこんにちは\t0.9\n", "ja", "en", '\t').unwrap();
        assert_eq!(corpus.clusters[0].target, "hello | there");
        assert_eq!(corpus.clusters[0].variants[0].weight, 0.9);
    }

    #[test]
    fn multiple_blank_lines_between_blocks() {
        let corpus = parse_staple("p1|a\nx|1\n\n\n\np2|b\ny|2\n", "ja", "en", '|').unwrap();
        assert_eq!(corpus.clusters.len(), 2);
    }

    #[test]
    fn canonical_round_trip() {
        let corpus = parse_staple(block_fixture(), "ja", "en", '|').unwrap();
        let text = write_canonical(&corpus);
        let back = read_canonical(&text).unwrap();
        assert_eq!(back.clusters, corpus.clusters);
    }

    #[test]
    fn canonical_preserves_decimal_weights() {
        let corpus = parse_staple("p1|hi\nx|0.30\ny|0.1\n", "ja", "en", '|').unwrap();
        let text = write_canonical(&corpus);
        assert!(text.contains("0.3"));
        let back = read_canonical(&text).unwrap();
        assert_eq!(back.clusters[0].variants[0].weight, 0.30);
        assert_eq!(back.clusters[0].variants[1].weight, 0.1);
        assert_eq!(write_canonical(&back), text);
    }

    #[test]
    fn canonical_rejects_hypothesis_length_mismatch() {
        let line = r#"{"id":"p1","target":"t","variants":[{"text":"a","weight":1.0},{"text":"b","weight":1.0},{"text":"c","weight":1.0}],"hypotheses":["h1","h2"]}"#;
        let err = read_canonical(line).unwrap_err();
        match err {
            CorpusError::HypothesesLengthMismatch {
                id,
                hypotheses,
                variants,
            } => {
                assert_eq!(id, "p1");
                assert_eq!(hypotheses, 2);
                assert_eq!(variants, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn canonical_rejects_malformed_line() {
        let err = read_canonical("{not json}\n").unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 1, .. }));
    }

    #[test]
    fn export_flattens_in_order() {
        let corpus = parse_staple(block_fixture(), "ja", "en", '|').unwrap();
        let (src, tgt) = export_parallel(&corpus);
        let src_lines: Vec<&str> = src.lines().collect();
        let tgt_lines: Vec<&str> = tgt.lines().collect();
        assert_eq!(src_lines.len(), 6);
        assert_eq!(tgt_lines.len(), 6);
        assert_eq!(src_lines[0], "私は男の子です。");
        assert_eq!(tgt_lines[0], "i am a boy.");
        assert_eq!(tgt_lines[1], "i am a boy.");
        assert_eq!(tgt_lines[5], "thanks.");
        assert_eq!(src_lines[5], "ありがとう。");
    }

    #[test]
    fn attach_distributes_in_flattened_order() {
        let corpus = parse_staple("a|t1\nv1|1\nv2|1\n\nb|t2\nv3|1\n", "ja", "en", '|').unwrap();
        let lines: Vec<String> = ["h1", "h2", "h3"].iter().map(|s| s.to_string()).collect();
        let attached = attach_hypotheses(&corpus, &lines).unwrap();
        assert_eq!(
            attached.clusters[0].hypotheses,
            Some(vec!["h1".to_string(), "h2".to_string()])
        );
        assert_eq!(attached.clusters[1].hypotheses, Some(vec!["h3".to_string()]));
        assert!(corpus.clusters[0].hypotheses.is_none());
    }

    #[test]
    fn attach_count_mismatch() {
        let corpus = parse_staple(block_fixture(), "ja", "en", '|').unwrap();
        let lines: Vec<String> = (0..4).map(|i| format!("h{i}")).collect();
        let err = attach_hypotheses(&corpus, &lines).unwrap_err();
        assert_eq!(
            err.to_string(),
            "hypothesis count mismatch: expected 6, got 4"
        );
    }

    #[test]
    fn stats_count_unique_segments() {
        // 6 variants of which 2 identical, two clusters share a target.
        let input = "a|same target\nv1|1\nv2|1\ndup|1\n\nb|same target\ndup|1\nv3|1\n\nc|other\nv4|1\n";
        let corpus = parse_staple(input, "ja", "en", '|').unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.unique_source_segments, 5);
        assert_eq!(stats.unique_target_segments, 2);
        assert_eq!(stats.cluster_count, 3);
        assert!((stats.mean_variants_per_cluster - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stats_ignore_hypotheses() {
        let corpus = parse_staple(block_fixture(), "ja", "en", '|').unwrap();
        let lines: Vec<String> = (0..6).map(|i| format!("h{i}")).collect();
        let attached = attach_hypotheses(&corpus, &lines).unwrap();
        assert_eq!(corpus_stats(&attached), corpus_stats(&corpus));
    }

    #[test]
    fn extreme_most_and_least() {
        let input = "p|t\na|0.7\nb|0.2\nc|0.1\n";
        let corpus = parse_staple(input, "ja", "en", '|').unwrap();
        let most = build_extreme_testset(&corpus, ExtremeMode::Most);
        assert_eq!(most.clusters[0].variants.len(), 1);
        assert_eq!(most.clusters[0].variants[0].text, "a");
        let least = build_extreme_testset(&corpus, ExtremeMode::Least);
        assert_eq!(least.clusters[0].variants[0].text, "c");
    }

    #[test]
    fn extreme_tie_breaks_to_earliest() {
        let input = "p|t\nfirst|0.5\nsecond|0.5\n";
        let corpus = parse_staple(input, "ja", "en", '|').unwrap();
        for mode in [ExtremeMode::Most, ExtremeMode::Least] {
            let reduced = build_extreme_testset(&corpus, mode);
            assert_eq!(reduced.clusters[0].variants[0].text, "first");
        }
    }

    #[test]
    fn extreme_keeps_aligned_hypothesis() {
        let corpus = parse_staple("p|t\na|0.1\nb|0.9\n", "ja", "en", '|').unwrap();
        let attached =
            attach_hypotheses(&corpus, &["ha".to_string(), "hb".to_string()]).unwrap();
        let most = build_extreme_testset(&attached, ExtremeMode::Most);
        assert_eq!(most.clusters[0].hypotheses, Some(vec!["hb".to_string()]));
    }

    #[test]
    fn ingest_normalizes_text() {
        let corpus = parse_staple("p|  e\u{0301}clair  \nv\u{0301}ar|1\n", "ja", "en", '|').unwrap();
        assert_eq!(corpus.clusters[0].target, "éclair");
        assert_eq!(corpus.clusters[0].variants[0].text, "v́ar");
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        let corpus = parse_staple("", "ja", "en", '|').unwrap();
        assert!(corpus.clusters.is_empty());
        assert_eq!(corpus.total_variants(), 0);
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.cluster_count, 0);
        assert_eq!(stats.mean_variants_per_cluster, 0.0);
    }
}
