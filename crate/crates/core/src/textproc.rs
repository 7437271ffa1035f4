//! Rule-based sentence splitting and word tokenization.
//!
//! Both the trainer and the cascade run text through the same functions, so
//! the filter's per-sentence decisions can be replayed exactly.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

/// Abbreviations after which a period does not end a sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Mr", "Mrs", "Ms", "Dr", "Prof", "Sen", "Rep", "Gov", "U.S", "St", "vs", "etc", "e.g", "i.e",
];

const TERMINALS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 7] = ['"', '\'', ')', ']', '”', '’', '»'];

/// Ordered sentences of one input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSeq {
    pub sentences: Vec<String>,
    /// Length of the source in characters.
    pub source_len: usize,
}

impl SentenceSeq {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(String::as_str)
    }
}

/// Sentence splitter with a configurable abbreviation list.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbreviations
            .into_iter()
            .map(|a| a.as_ref().trim().trim_end_matches('.').to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        Self { abbreviations }
    }

    /// Reads one abbreviation per line; blank lines and `#` comments are skipped.
    pub fn from_abbreviation_file(path: impl AsRef<Path>) -> io::Result<Self> {
        let content = fs::read_to_string(path)?;
        Ok(Self::with_abbreviations(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn split(&self, text: &str) -> SentenceSeq {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut sentences = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let (_, c) = chars[i];
            if !TERMINALS.contains(&c) {
                i += 1;
                continue;
            }
            // Swallow runs like "?!" or "..." and trailing closing quotes.
            let mut end = i + 1;
            while end < chars.len() && TERMINALS.contains(&chars[end].1) {
                end += 1;
            }
            while end < chars.len() && CLOSERS.contains(&chars[end].1) {
                end += 1;
            }
            let at_boundary = end == chars.len() || chars[end].1.is_whitespace();
            let single_period =
                c == '.' && chars[i + 1..end].iter().all(|&(_, ch)| CLOSERS.contains(&ch));
            if at_boundary && !(single_period && self.is_abbreviation(text, chars[i].0)) {
                let byte_end = chars.get(end).map_or(text.len(), |&(b, _)| b);
                push_trimmed(&mut sentences, &text[start..byte_end]);
                start = byte_end;
            }
            i = end;
        }
        push_trimmed(&mut sentences, &text[start..]);
        SentenceSeq {
            sentences,
            source_len: chars.len(),
        }
    }

    /// Whether the word ending right before the period at `dot` suppresses a split.
    fn is_abbreviation(&self, text: &str, dot: usize) -> bool {
        let before = &text[..dot];
        let word_start = before
            .rfind(char::is_whitespace)
            .map_or(0, |p| p + before[p..].chars().next().map_or(1, char::len_utf8));
        let word = before[word_start..].trim_start_matches(|c: char| !c.is_alphanumeric());
        if word.is_empty() {
            return false;
        }
        let mut it = word.chars();
        if let (Some(first), None) = (it.next(), it.next()) {
            if first.is_uppercase() {
                return true;
            }
        }
        self.abbreviations.contains(&word.to_lowercase())
    }
}

fn push_trimmed(out: &mut Vec<String>, fragment: &str) {
    let trimmed = fragment.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// Splits with the default abbreviation list.
pub fn split_sentences(text: &str) -> SentenceSeq {
    SentenceSplitter::default().split(text)
}

/// True when `fragment` already ends a sentence on its own.
pub fn ends_with_terminal(fragment: &str) -> bool {
    fragment
        .trim_end()
        .trim_end_matches(|c| CLOSERS.contains(&c))
        .ends_with(TERMINALS)
}

/// Lowercased word tokens. Leading/trailing punctuation is stripped from each
/// whitespace-delimited chunk except `#` and `@` prefixes; internal
/// apostrophes and hyphens survive.
pub fn tokenize_words(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .filter_map(|chunk| {
            let lower = chunk.to_lowercase();
            let trimmed = lower
                .trim_start_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@')
                .trim_end_matches(|c: char| !c.is_alphanumeric());
            // "#" or "@" alone carries nothing.
            let body = trimmed.trim_start_matches(['#', '@']);
            if body.is_empty() {
                return None;
            }
            let prefix_len = trimmed.len() - body.len();
            // Only one marker is kept: "##tag" -> "#tag".
            let token = if prefix_len > 0 {
                format!("{}{}", &trimmed[prefix_len - 1..prefix_len], body)
            } else {
                body.to_string()
            };
            Some(token)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_fragment() {
        assert_eq!(split_sentences("One sentence").sentences, vec!["One sentence"]);
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        assert_eq!(
            split_sentences("Ban guns. Nice weather today.").sentences,
            vec!["Ban guns.", "Nice weather today."]
        );
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(
            split_sentences("Dr. Smith voted. He left.").sentences,
            vec!["Dr. Smith voted.", "He left."]
        );
        assert_eq!(
            split_sentences("The U.S. Senate met. J. Doe spoke!").sentences,
            vec!["The U.S. Senate met.", "J. Doe spoke!"]
        );
    }

    #[test]
    fn question_exclamation_and_runs() {
        assert_eq!(
            split_sentences("Really?! Yes... \"Fine.\" Done").sentences,
            vec!["Really?!", "Yes...", "\"Fine.\"", "Done"]
        );
    }

    #[test]
    fn no_split_without_following_whitespace() {
        assert_eq!(split_sentences("Pi is 3.14 today.").sentences, vec!["Pi is 3.14 today."]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn custom_abbreviations() {
        let s = SentenceSplitter::with_abbreviations(["Corp."]);
        assert_eq!(s.split("Acme Corp. won. Dr. X").len(), 3);
    }

    #[test]
    fn tokenizer_normalizes() {
        assert_eq!(tokenize_words("Tax cuts WORK!"), vec!["tax", "cuts", "work"]);
        assert_eq!(tokenize_words("#MigrantCaravan"), vec!["#migrantcaravan"]);
        assert!(tokenize_words("").is_empty());
        assert_eq!(
            tokenize_words("(Don't) @POTUS well-known -- ..."),
            vec!["don't", "@potus", "well-known"]
        );
    }

    #[test]
    fn terminal_detection() {
        assert!(ends_with_terminal("Hi."));
        assert!(ends_with_terminal("Hi?\" "));
        assert!(!ends_with_terminal("Hi"));
    }

    proptest! {
        #[test]
        fn tokenizer_idempotent(s in "[ a-zA-Z0-9#@'.,!?-]{0,60}") {
            let once = tokenize_words(&s);
            let twice = tokenize_words(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn join_round_trip(words in proptest::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,4}", 1..6)) {
            // A final word like "st" is a genuine abbreviation, not a boundary.
            let abbrev = |w: &String| {
                let last = w.rsplit(' ').next().unwrap_or("");
                DEFAULT_ABBREVIATIONS.iter().any(|a| a.eq_ignore_ascii_case(last))
            };
            prop_assume!(!words.iter().any(abbrev));
            let sentences: Vec<String> = words.iter().map(|w| format!("{w}.")).collect();
            let split = split_sentences(&sentences.join(" "));
            prop_assert_eq!(split.sentences.len(), sentences.len());
        }

        #[test]
        fn sentences_cover_source(s in "[ a-zA-Z.!?]{0,80}") {
            let seq = split_sentences(&s);
            let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            let joined: String = seq.sentences.concat().chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(src, joined);
            prop_assert!(seq.sentences.iter().all(|x| !x.trim().is_empty()));
        }
    }
}
