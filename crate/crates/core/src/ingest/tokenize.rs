use unicode_normalization::UnicodeNormalization;

/// Built-in English stopword list. Sorted so membership is a binary search.
pub const STOPWORDS: &[&str] = &[
    "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Splits text into attribute tokens.
///
/// Text is NFKD-decomposed and folded to ASCII (combining marks and other
/// non-ASCII characters are dropped or act as separators), lowercased and
/// split on anything that is not an ASCII letter or digit. Tokens shorter than
/// two characters and stopwords are removed; duplicates keep their first
/// position.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut folded = String::with_capacity(text.len());
    for ch in text.nfkd() {
        if ch.is_ascii_alphanumeric() {
            folded.push(ch.to_ascii_lowercase());
        } else if ch.is_ascii() || !is_combining_mark(ch) {
            folded.push(' ');
        }
    }
    let mut out: Vec<String> = Vec::new();
    for tok in folded.split(' ') {
        if tok.len() < 2 || is_stopword(tok) || out.iter().any(|t| t == tok) {
            continue;
        }
        out.push(tok.to_string());
    }
    out
}

fn is_combining_mark(ch: char) -> bool {
    matches!(ch as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lowercases_and_strips_punctuation() {
        assert_eq!(tokenize("Football Match!"), vec!["football", "match"]);
    }

    #[test]
    fn all_stopwords() {
        assert!(tokenize("the a of").is_empty());
    }

    #[test]
    fn duplicates_and_hyphens() {
        assert_eq!(tokenize("airplane-traffic airplane"), vec!["airplane", "traffic"]);
    }

    #[test]
    fn ascii_folding() {
        assert_eq!(tokenize("Café Über naïve"), vec!["cafe", "uber", "naive"]);
    }

    #[test]
    fn short_tokens_dropped() {
        assert_eq!(tokenize("a b c7 x 42"), vec!["c7", "42"]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn non_latin_text_separates() {
        assert_eq!(tokenize("news北京sport"), vec!["news", "sport"]);
    }
}
