//! Tokenization and string normalization shared by every module.

use alloc::string::String;
use alloc::vec::Vec;

/// Splits on whitespace runs and lowercases each token. Punctuation stays
/// inside tokens, so `"ATA 100 mb/s"` gives `["ata", "100", "mb/s"]`.
pub fn tokenize(value: &str) -> Vec<String> {
    value.split_whitespace().map(str::to_lowercase).collect()
}

/// Trim + lowercase; the equality used for name identity.
pub fn casefold(name: &str) -> String {
    name.trim().to_lowercase()
}

pub fn same_name(a: &str, b: &str) -> bool {
    casefold(a) == casefold(b)
}

/// Collapses internal whitespace runs to one space and trims the ends.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Key normalization: lowercase and drop every non-alphanumeric character.
pub fn normalize_key(value: &str) -> String {
    value
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tokenize_keeps_punctuation_inside_tokens() {
        assert_eq!(tokenize("ATA 100 mb/s"), vec!["ata", "100", "mb/s"]);
        assert_eq!(tokenize("5400"), vec!["5400"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t ").is_empty());
    }

    #[test]
    fn key_normalization() {
        assert_eq!(normalize_key("ABC-123"), "abc123");
        assert_eq!(normalize_key(" abc 123 "), "abc123");
        assert_eq!(normalize_key("--"), "");
    }

    #[test]
    fn collapse() {
        assert_eq!(collapse_whitespace("  Hard   Disk\nSize "), "Hard Disk Size");
    }
}
