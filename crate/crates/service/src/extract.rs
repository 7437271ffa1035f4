//! Article text extraction from fetched HTML.

use scraper::{ElementRef, Html, Node, Selector};
use thiserror::Error;

/// Elements whose text never counts as article content.
pub const SKIPPED_ELEMENTS: &[&str] = &[
    "script", "style", "nav", "header", "footer", "aside", "noscript", "template",
];

/// Elements that do not separate words when rendered.
const INLINE_ELEMENTS: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "cite", "code", "data", "dfn", "em", "i", "kbd", "mark", "q",
    "s", "samp", "small", "span", "strong", "sub", "sup", "time", "u", "var",
];

/// Below this many non-empty paragraphs the whole body is used instead.
pub const MIN_PARAGRAPHS: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("content is not text")]
    Undecodable,
    #[error("no article text found")]
    NoContent,
}

/// Paragraph text in document order, separated by blank lines; falls back to
/// the visible body text when fewer than [`MIN_PARAGRAPHS`] paragraphs exist.
///
/// Invalid UTF-8 is decoded lossily. Input containing NUL bytes is treated as
/// binary and rejected.
pub fn extract_article_text(html: &[u8]) -> Result<String, ExtractError> {
    if html.contains(&0) {
        return Err(ExtractError::Undecodable);
    }
    let doc = Html::parse_document(&String::from_utf8_lossy(html));
    let p = Selector::parse("p").expect("static selector");
    let paragraphs: Vec<String> = doc
        .select(&p)
        .filter(|el| !el.ancestors().filter_map(ElementRef::wrap).any(is_skipped))
        .map(|el| collapse_whitespace(&visible_text(el)))
        .filter(|t| !t.is_empty())
        .collect();
    let text = if paragraphs.len() >= MIN_PARAGRAPHS {
        paragraphs.join("\n\n")
    } else {
        let body = Selector::parse("body").expect("static selector");
        doc.select(&body)
            .next()
            .map(|b| collapse_whitespace(&visible_text(b)))
            .unwrap_or_default()
    };
    if text.is_empty() {
        Err(ExtractError::NoContent)
    } else {
        Ok(text)
    }
}

fn is_skipped(el: ElementRef<'_>) -> bool {
    SKIPPED_ELEMENTS.contains(&el.value().name())
}

fn visible_text(root: ElementRef<'_>) -> String {
    let mut out = String::new();
    collect(root, &mut out);
    out
}

fn collect(el: ElementRef<'_>, out: &mut String) {
    for child in el.children() {
        match child.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(_) => {
                let child = ElementRef::wrap(child).expect("element node");
                if is_skipped(child) {
                    continue;
                }
                let block = !INLINE_ELEMENTS.contains(&child.value().name());
                if block {
                    out.push(' ');
                }
                collect(child, out);
                if block {
                    out.push(' ');
                }
            }
            _ => {}
        }
    }
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_paragraphs_joined_by_blank_lines() {
        let html = b"<html><body><nav><p>Menu item</p></nav>
            <p>First  one.</p><p>Second <em>one</em>.</p>
            <script>var x = 1;</script><p>Third\n one.</p></body></html>";
        assert_eq!(
            extract_article_text(html).unwrap(),
            "First one.\n\nSecond one.\n\nThird one."
        );
    }

    #[test]
    fn only_chrome_is_no_content() {
        let html = b"<html><head><style>p{}</style></head><body><nav>Home | About</nav>\
            <script>track()</script><footer>(c) 2020</footer></body></html>";
        assert_eq!(extract_article_text(html), Err(ExtractError::NoContent));
    }

    #[test]
    fn few_paragraphs_fall_back_to_body() {
        let html = b"<html><body><header>Site</header><div>Lead prose here.</div>\
            <p>One.</p><p>Two.</p><aside>Ads</aside></body></html>";
        assert_eq!(extract_article_text(html).unwrap(), "Lead prose here. One. Two.");
    }

    #[test]
    fn binary_rejected_and_invalid_utf8_tolerated() {
        assert_eq!(extract_article_text(b"\x00\x01PNG"), Err(ExtractError::Undecodable));
        let text = extract_article_text(b"<body>caf\xe9 open</body>").unwrap();
        assert_eq!(text, "caf\u{fffd} open");
    }
}
