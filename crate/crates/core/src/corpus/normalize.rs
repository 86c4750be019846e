use unicode_normalization::UnicodeNormalization;

fn is_trimmed(c: char) -> bool {
    c == '#' || c.is_whitespace()
}

fn normalize_once(raw: &str) -> String {
    let folded: String = raw.nfkc().collect::<String>().to_lowercase();
    let folded: String = folded.nfkc().collect();
    folded
        .trim_start_matches(is_trimmed)
        .trim_end_matches(char::is_whitespace)
        .to_string()
}

/// Canonical form of a hashtag token: compatibility-normalized, lowercased,
/// with leading `#` marks and surrounding whitespace removed.
///
/// Returns `None` when nothing is left, or when the remainder contains
/// whitespace or control characters (such a token is not a single hashtag).
pub fn normalize_hashtag(raw: &str) -> Option<String> {
    let mut current = normalize_once(raw);
    // Case mapping can in rare cases produce a string that normalizes further.
    for _ in 0..4 {
        let next = normalize_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    if current.is_empty() || current.chars().any(|c| c.is_whitespace() || c.is_control()) {
        None
    } else {
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(normalize_hashtag("#COVID19").as_deref(), Some("covid19"));
        assert_eq!(normalize_hashtag("#covid19").as_deref(), Some("covid19"));
        assert_eq!(normalize_hashtag("#"), None);
        assert_eq!(normalize_hashtag("   "), None);
        assert_eq!(normalize_hashtag(""), None);
        assert_eq!(normalize_hashtag("  ##Plandemic ").as_deref(), Some("plandemic"));
    }

    #[test]
    fn compatibility_forms_fold() {
        // Fullwidth number sign and letters.
        assert_eq!(normalize_hashtag("＃ＣＯＶＩＤ").as_deref(), Some("covid"));
        assert_eq!(normalize_hashtag("#ﬁve").as_deref(), Some("five"));
    }

    #[test]
    fn inner_whitespace_rejected() {
        assert_eq!(normalize_hashtag("#fake news"), None);
        assert_eq!(normalize_hashtag("#a\tb"), None);
    }

    proptest! {
        #[test]
        fn idempotent(raw in "\\PC{0,12}") {
            if let Some(n) = normalize_hashtag(&raw) {
                prop_assert_eq!(normalize_hashtag(&n), Some(n.clone()));
            }
        }

        #[test]
        fn idempotent_ascii(raw in "[#A-Za-z0-9 _]{0,12}") {
            if let Some(n) = normalize_hashtag(&raw) {
                prop_assert_eq!(normalize_hashtag(&n), Some(n.clone()));
                prop_assert!(!n.starts_with('#'));
            }
        }
    }
}
