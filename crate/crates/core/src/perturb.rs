//! Synthetic variant generation: Latin-script character noise and Japanese
//! rule-based rewriting, plus the pipeline that expands each cluster's most
//! frequent source sentence into a fixed number of synthetic variants.
//!
//! Determinism is a contract here. Every generated sentence is a pure
//! function of (input text, master seed, cluster ordinal, slot index,
//! config); the exact draw sequence each engine consumes is documented on
//! the engine so independent implementations can reproduce the output.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::corpus::{Cluster, Corpus, VariantEntry};
use crate::seed::{derive_seed, Rng};

/// Which perturbation engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ruleset {
    Latin,
    Japanese,
}

/// Pronoun substitution table: pronoun to its candidate replacements.
pub type PronounMap = BTreeMap<String, Vec<String>>;

/// The default table covers the one pronoun the Japanese engine rewrites
/// out of the box.
pub fn default_pronoun_map() -> PronounMap {
    let mut map = PronounMap::new();
    map.insert("私".to_string(), vec!["俺".to_string(), "僕".to_string()]);
    map
}

/// Settings for [`synthesize_dataset`] and [`perturb_testset`].
#[derive(Debug, Clone)]
pub struct PerturbConfig {
    pub ruleset: Ruleset,
    pub master_seed: u64,
    /// Probability that an applicable Japanese rule fires. Ignored by the
    /// Latin engine.
    pub rule_probability: f64,
    /// Total variants per cluster including the unmodified base sentence.
    pub variants_per_pair: usize,
    /// Extra draws allowed per slot before a duplicate is accepted.
    pub max_retries: usize,
    pub pronoun_map: PronounMap,
}

impl PerturbConfig {
    pub fn new(ruleset: Ruleset, master_seed: u64) -> Self {
        PerturbConfig {
            ruleset,
            master_seed,
            rule_probability: 0.5,
            variants_per_pair: 10,
            max_retries: 10,
            pronoun_map: default_pronoun_map(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("invalid pronoun map: {0}")]
    InvalidPronounMap(String),
}

/// Parses a pronoun-map file: a JSON object mapping each pronoun to a
/// non-empty array of replacement strings, e.g.
/// `{"私": ["俺", "僕"], "あたし": ["わたし"]}`.
pub fn parse_pronoun_map(text: &str) -> Result<PronounMap, PerturbError> {
    let map: PronounMap = serde_json::from_str(text)
        .map_err(|e| PerturbError::InvalidPronounMap(e.to_string()))?;
    for (pronoun, replacements) in &map {
        if pronoun.is_empty() {
            return Err(PerturbError::InvalidPronounMap(
                "empty pronoun key".to_string(),
            ));
        }
        if replacements.is_empty() {
            return Err(PerturbError::InvalidPronounMap(format!(
                "pronoun '{pronoun}' has no replacements"
            )));
        }
        if replacements.iter().any(|r| r.is_empty()) {
            return Err(PerturbError::InvalidPronounMap(format!(
                "pronoun '{pronoun}' has an empty replacement"
            )));
        }
    }
    Ok(map)
}

/// Applies one of five equiprobable actions to a single word.
///
/// Draw sequence (all from `rng`, in order): one action selector in
/// `0..5` (0 none, 1 casing, 2 insertion, 3 deletion, 4 substitution),
/// then the action's own draws:
///
/// - casing: one index among the word's cased characters (no draw and no
///   change when the word has none); the character's case is toggled.
/// - insertion: a position in `0..=len`, then a letter in `a..=z`.
/// - deletion: a position in `0..len`; single-character words fall back to
///   none without drawing.
/// - substitution: a position in `0..len`, then a letter drawn uniformly
///   from the 25 lowercase letters other than the original character (all
///   26 when the original is not a lowercase letter).
///
/// Positions are in characters, not bytes.
pub fn perturb_latin_word(word: &str, rng: &mut Rng) -> String {
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() {
        return String::new();
    }
    match rng.next_below(5) {
        0 => word.to_string(),
        1 => {
            let cased: Vec<usize> = chars
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_lowercase() || c.is_uppercase())
                .map(|(i, _)| i)
                .collect();
            if cased.is_empty() {
                return word.to_string();
            }
            let target = cased[rng.next_below(cased.len() as u64) as usize];
            let mut out = String::with_capacity(word.len());
            for (i, &c) in chars.iter().enumerate() {
                if i == target {
                    if c.is_lowercase() {
                        out.extend(c.to_uppercase());
                    } else {
                        out.extend(c.to_lowercase());
                    }
                } else {
                    out.push(c);
                }
            }
            out
        }
        2 => {
            let pos = rng.next_below(chars.len() as u64 + 1) as usize;
            let letter = (b'a' + rng.next_below(26) as u8) as char;
            let mut out: Vec<char> = chars.clone();
            out.insert(pos, letter);
            out.into_iter().collect()
        }
        3 => {
            if chars.len() == 1 {
                return word.to_string();
            }
            let pos = rng.next_below(chars.len() as u64) as usize;
            let mut out = chars.clone();
            out.remove(pos);
            out.into_iter().collect()
        }
        _ => {
            let pos = rng.next_below(chars.len() as u64) as usize;
            let original = chars[pos];
            let letter = if original.is_ascii_lowercase() {
                let mut candidate = b'a' + rng.next_below(25) as u8;
                if candidate as char >= original {
                    candidate += 1;
                }
                candidate as char
            } else {
                (b'a' + rng.next_below(26) as u8) as char
            };
            let mut out = chars.clone();
            out[pos] = letter;
            out.into_iter().collect()
        }
    }
}

/// Perturbs each whitespace-delimited word of `sentence` independently (in
/// order, against the same generator) and rejoins with single spaces. The
/// word count never changes.
pub fn perturb_latin(sentence: &str, rng: &mut Rng) -> String {
    let words: Vec<String> = sentence
        .split_whitespace()
        .map(|w| perturb_latin_word(w, rng))
        .collect();
    words.join(" ")
}

const JAPANESE_RANGES: &[(u32, u32)] = &[
    (0x3005, 0x3005),  // iteration mark
    (0x3040, 0x30FF),  // hiragana and katakana
    (0x31F0, 0x31FF),  // katakana phonetic extensions
    (0x3400, 0x4DBF),  // CJK extension A
    (0x4E00, 0x9FFF),  // CJK unified
    (0xF900, 0xFAFF),  // CJK compatibility
    (0xFF66, 0xFF9D),  // halfwidth katakana
];

fn is_japanese_script(c: char) -> bool {
    let cp = c as u32;
    JAPANESE_RANGES.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}

fn split_final_period(s: &str) -> (&str, bool) {
    match s.strip_suffix('。') {
        Some(body) => (body, true),
        None => (s, false),
    }
}

/// Earliest pronoun occurrence; ties at the same position go to the longest
/// pronoun so compound forms win over their prefixes.
fn find_first_pronoun<'a>(s: &str, map: &'a PronounMap) -> Option<(usize, &'a str)> {
    let mut best: Option<(usize, &'a str)> = None;
    for pronoun in map.keys() {
        if let Some(pos) = s.find(pronoun.as_str()) {
            let better = match best {
                None => true,
                Some((best_pos, best_key)) => {
                    pos < best_pos || (pos == best_pos && pronoun.len() > best_key.len())
                }
            };
            if better {
                best = Some((pos, pronoun));
            }
        }
    }
    best
}

/// Applies the three Japanese rewrite rules in fixed order, each firing
/// with probability `rule_probability` when its condition holds on the
/// sentence as modified so far:
///
/// 1. emphasis particle: when the sentence (ignoring an optional final 。)
///    ends in a Japanese-script character other than よ or ね, insert よ
///    there;
/// 2. copula removal: when the sentence ends in です (before an optional
///    final 。) and removal leaves the sentence non-empty, delete it;
/// 3. pronoun substitution: when any mapped pronoun occurs, replace the
///    earliest occurrence (longest pronoun on position ties) with a
///    replacement drawn uniformly from its list.
///
/// Draw sequence: per rule whose condition holds, one probability draw;
/// rule 3 additionally draws the replacement index when it fires. Rules
/// whose condition does not hold consume nothing.
pub fn perturb_japanese(
    sentence: &str,
    rng: &mut Rng,
    rule_probability: f64,
    pronoun_map: &PronounMap,
) -> String {
    let mut s = sentence.to_string();

    let (body, has_period) = split_final_period(&s);
    if let Some(last) = body.chars().last() {
        if is_japanese_script(last) && last != 'よ' && last != 'ね' {
            if rng.next_f64() < rule_probability {
                s = format!("{body}よ{}", if has_period { "。" } else { "" });
            }
        }
    }

    let (body, has_period) = split_final_period(&s);
    if body.ends_with("です") && (body != "です" || has_period) {
        if rng.next_f64() < rule_probability {
            let trimmed = &body[..body.len() - "です".len()];
            s = format!("{trimmed}{}", if has_period { "。" } else { "" });
        }
    }

    if let Some((pos, pronoun)) = find_first_pronoun(&s, pronoun_map) {
        if rng.next_f64() < rule_probability {
            let options = &pronoun_map[pronoun];
            let choice = &options[rng.next_below(options.len() as u64) as usize];
            let mut out = String::with_capacity(s.len());
            out.push_str(&s[..pos]);
            out.push_str(choice);
            out.push_str(&s[pos + pronoun.len()..]);
            s = out;
        }
    }

    s
}

fn one_most_index(cluster: &Cluster) -> usize {
    let mut best = 0;
    for (i, v) in cluster.variants.iter().enumerate() {
        if v.weight > cluster.variants[best].weight {
            best = i;
        }
    }
    best
}

fn apply_ruleset(config: &PerturbConfig, base: &str, rng: &mut Rng) -> String {
    match config.ruleset {
        Ruleset::Latin => perturb_latin(base, rng),
        Ruleset::Japanese => {
            perturb_japanese(base, rng, config.rule_probability, &config.pronoun_map)
        }
    }
}

/// Expands every cluster to `variants_per_pair` variants: the first is the
/// cluster's unmodified most-frequent source (ties to the earliest), the
/// rest are perturbations of it. Each slot draws from its own generator
/// seeded by (master seed, cluster ordinal, slot index); a draw that
/// duplicates an already-emitted variant is redrawn up to `max_retries`
/// times on the same generator and then accepted as-is.
///
/// Output variants all carry weight 1.0 (frequency semantics do not apply
/// to generated text), targets are unchanged, and hypotheses are dropped.
pub fn synthesize_dataset(corpus: &Corpus, config: &PerturbConfig) -> Corpus {
    assert!(
        config.variants_per_pair >= 2,
        "variants_per_pair must be at least 2"
    );
    let clusters = corpus
        .clusters
        .iter()
        .map(|cluster| {
            let base = cluster.variants[one_most_index(cluster)].text.clone();
            let cluster_seed = derive_seed(config.master_seed, cluster.ordinal);
            let mut emitted: HashSet<String> = HashSet::new();
            emitted.insert(base.clone());
            let mut variants = Vec::with_capacity(config.variants_per_pair);
            variants.push(VariantEntry {
                text: base.clone(),
                weight: 1.0,
            });
            for slot in 1..config.variants_per_pair {
                let mut rng = Rng::new(derive_seed(cluster_seed, slot as u64));
                let mut candidate = apply_ruleset(config, &base, &mut rng);
                let mut retries = 0;
                while retries < config.max_retries && emitted.contains(&candidate) {
                    candidate = apply_ruleset(config, &base, &mut rng);
                    retries += 1;
                }
                emitted.insert(candidate.clone());
                variants.push(VariantEntry {
                    text: candidate,
                    weight: 1.0,
                });
            }
            Cluster {
                id: cluster.id.clone(),
                target: cluster.target.clone(),
                variants,
                hypotheses: None,
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

/// Same pipeline as [`synthesize_dataset`], conventionally applied to test
/// splits to build synthetic robustness test sets.
pub fn perturb_testset(corpus: &Corpus, config: &PerturbConfig) -> Corpus {
    synthesize_dataset(corpus, config)
}
