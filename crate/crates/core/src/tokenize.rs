//! The `13a` tokenizer: the mteval-v13a scheme named by the standard BLEU
//! signature (`tok:13a`), plus the `case:lc` lowercasing step.
//!
//! Behavior is pinned by a frozen fixture table rather than by reference to
//! any particular implementation; the rules are:
//!
//! 1. normalization: delete literal `<skipped>`, delete hyphen-newline
//!    pairs, replace newlines with spaces, unescape `&quot;` `&amp;` `&lt;`
//!    `&gt;` (in that order);
//! 2. lowercase the whole string (when requested);
//! 3. pad with spaces every ASCII symbol in the 13a symbol classes (all
//!    printable ASCII punctuation except period, comma, dash and digits);
//! 4. pad period and comma unless both sides are digits (a digit-adjacent
//!    `1,000.5` stays whole);
//! 5. pad a dash preceded by a digit;
//! 6. split on whitespace.
//!
//! Non-Latin scripts pass through unsegmented except at ASCII punctuation.

use std::sync::OnceLock;

use regex::Regex;

/// An ordered sequence of non-empty, whitespace-free tokens.
pub type TokenSequence = Vec<String>;

fn symbol_class() -> &'static Regex {
    // {-~ [-` space-& (-+ :-@ and /; period, comma and dash are contextual.
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"([\x7B-\x7E\x5B-\x60\x20-\x26\x28-\x2B\x3A-\x40\x2F])").unwrap()
    })
}

fn period_comma_after_non_digit() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"([^0-9])([\.,])").unwrap())
}

fn period_comma_before_non_digit() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"([\.,])([^0-9])").unwrap())
}

fn dash_after_digit() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"([0-9])(-)").unwrap())
}

/// The 13a pre-tokenization normalization pass.
pub fn normalize_13a(text: &str) -> String {
    let mut line = text.replace("<skipped>", "");
    line = line.replace("-\n", "");
    line = line.replace('\n', " ");
    if line.contains('&') {
        line = line.replace("&quot;", "\"");
        line = line.replace("&amp;", "&");
        line = line.replace("&lt;", "<");
        line = line.replace("&gt;", ">");
    }
    line
}

/// Tokenizes `text` under the 13a scheme, normalizing first and lowercasing
/// when `lowercase` is set. Every metric in this crate calls this with
/// `lowercase = true`, matching the `case:lc` signature component.
pub fn tokenize_13a(text: &str, lowercase: bool) -> TokenSequence {
    let mut line = normalize_13a(text);
    if lowercase {
        line = line.to_lowercase();
    }
    let mut padded = format!(" {line} ");
    padded = symbol_class().replace_all(&padded, " ${1} ").into_owned();
    padded = period_comma_after_non_digit()
        .replace_all(&padded, "${1} ${2} ")
        .into_owned();
    padded = period_comma_before_non_digit()
        .replace_all(&padded, " ${1} ${2}")
        .into_owned();
    padded = dash_after_digit()
        .replace_all(&padded, "${1} ${2} ")
        .into_owned();
    padded.split_whitespace().map(str::to_string).collect()
}
