use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Numeral,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(surface: &str) -> Self {
        let kind = if is_numeral(surface) {
            TokenKind::Numeral
        } else if surface.chars().any(char::is_alphanumeric) {
            TokenKind::Word
        } else {
            TokenKind::Symbol
        };
        Token {
            surface: surface.to_string(),
            kind,
        }
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

fn numeral_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?(?:[0-9]{1,3}(?:,[0-9]{3})+|[0-9]+)(?:\.[0-9]+)?%?$").expect("valid regex"))
}

/// Optional sign, digits with optional comma grouping, optional decimal
/// part, optional trailing `%`.
pub fn is_numeral(s: &str) -> bool {
    numeral_re().is_match(s)
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Whitespace split, then leading and trailing punctuation is peeled off one
/// character at a time into SYMBOL tokens. A sign or percent sign that makes
/// the core a numeral stays attached.
pub fn tokenize(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in line.split_whitespace() {
        if is_numeral(chunk) || !chunk.chars().any(char::is_alphanumeric) && chunk.chars().count() == 1 {
            out.push(Token::new(chunk));
            continue;
        }
        let chars: Vec<(usize, char)> = chunk.char_indices().collect();
        let mut start = 0;
        while start < chars.len() && is_punct(chars[start].1) {
            start += 1;
        }
        let mut end = chars.len();
        while end > start && is_punct(chars[end - 1].1) {
            end -= 1;
        }
        let byte = |i: usize| if i < chars.len() { chars[i].0 } else { chunk.len() };
        if start < end {
            // reattach sign / percent when that yields a numeral
            if start > 0 && matches!(chars[start - 1].1, '+' | '-') && is_numeral(&chunk[byte(start - 1)..byte(end)]) {
                start -= 1;
            }
            if end < chars.len() && chars[end].1 == '%' && is_numeral(&chunk[byte(start)..byte(end + 1)]) {
                end += 1;
            }
        }
        for &(_, c) in &chars[..start] {
            out.push(Token::new(c.encode_utf8(&mut [0; 4])));
        }
        if start < end {
            out.push(Token::new(&chunk[byte(start)..byte(end)]));
        }
        for &(_, c) in &chars[end.max(start)..] {
            out.push(Token::new(c.encode_utf8(&mut [0; 4])));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(line: &str) -> Vec<(String, TokenKind)> {
        tokenize(line).into_iter().map(|t| (t.surface, t.kind)).collect()
    }

    #[test]
    fn assignment_statement() {
        assert_eq!(
            kinds("x = 42;"),
            vec![
                ("x".into(), Word),
                ("=".into(), Symbol),
                ("42".into(), Numeral),
                (";".into(), Symbol)
            ]
        );
    }

    #[test]
    fn empty_and_blank() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
    }

    #[test]
    fn numeral_forms() {
        let toks = tokenize("3.14 7,000 50%");
        assert_eq!(toks.len(), 3);
        assert!(toks.iter().all(|t| t.kind == Numeral));
        assert_eq!(kinds("-5")[0], ("-5".into(), Numeral));
        assert_eq!(
            kinds("(12.5%)").iter().map(|t| t.1).collect::<Vec<_>>(),
            vec![Symbol, Numeral, Symbol]
        );
        assert_eq!(kinds("3.14.")[0], ("3.14".into(), Numeral));
    }

    #[test]
    fn numeral_rule() {
        for s in ["0", "12", "+3", "-3.5", "1,234,567", "99%", "12.50%"] {
            assert!(is_numeral(s), "{s}");
        }
        for s in ["1,23", "1.", ".5", "12a", "%", "1,2345", "x1", "--1"] {
            assert!(!is_numeral(s), "{s}");
        }
    }

    #[test]
    fn punctuation_peeling() {
        assert_eq!(kinds("f(x)"), vec![("f(x".into(), Word), (")".into(), Symbol)]);
        assert_eq!(
            kinds("\"hello,\""),
            vec![
                ("\"".into(), Symbol),
                ("hello".into(), Word),
                (",".into(), Symbol),
                ("\"".into(), Symbol)
            ]
        );
        assert_eq!(kinds("∑ ≤"), vec![("∑".into(), Symbol), ("≤".into(), Symbol)]);
        assert_eq!(kinds("=="), vec![("=".into(), Symbol), ("=".into(), Symbol)]);
    }

    #[test]
    fn non_ascii_words() {
        assert_eq!(
            kinds("naïve α."),
            vec![("naïve".into(), Word), ("α".into(), Word), (".".into(), Symbol)]
        );
    }
}
