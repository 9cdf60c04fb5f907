//! Text normalization applied to every piece of text that enters the corpus
//! model. Normalizing once, at the boundary, means the rest of the crate can
//! compare strings byte-for-byte.

use icu_normalizer::ComposingNormalizer;

/// Normalizes a raw text field: Unicode NFC, then trim leading and trailing
/// whitespace, then replace every interior newline or carriage return with a
/// single space.
///
/// The newline replacement runs after trimming, so a trailing `"\n"` is
/// removed rather than turned into a trailing space.
pub fn normalize_text(raw: &str) -> String {
    let nfc = ComposingNormalizer::new_nfc();
    let composed = nfc.normalize(raw);
    composed
        .trim()
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_flattens_line_breaks() {
        assert_eq!(normalize_text("  a b \n"), "a b");
        assert_eq!(normalize_text("a\nb"), "a b");
        assert_eq!(normalize_text("a\r\nb"), "a  b");
        assert_eq!(normalize_text("\t tab kept inside \t"), "tab kept inside");
    }

    #[test]
    fn composes_to_nfc() {
        let decomposed = "e\u{0301}clair";
        assert_eq!(normalize_text(decomposed), "éclair");
        assert_eq!(normalize_text("éclair"), "éclair");
    }

    #[test]
    fn empty_and_whitespace_only() {
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("   \n  "), "");
    }
}
