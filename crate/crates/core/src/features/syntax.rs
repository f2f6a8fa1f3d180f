//! Coarse part-of-speech proxy.
//!
//! A lexicon plus suffix rules assigns each token one of six coarse tags.
//! Prose yields a stable mix of function words, nouns and verbs; tables,
//! code and formulas yield numerals, symbols and identifier-shaped tokens.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::tokenize::{Token, TokenKind};
use super::SparseFeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoarseTag {
    NounLike,
    VerbLike,
    Func,
    Num,
    Sym,
    Other,
}

impl CoarseTag {
    pub const ALL: [CoarseTag; 6] = [
        CoarseTag::NounLike,
        CoarseTag::VerbLike,
        CoarseTag::Func,
        CoarseTag::Num,
        CoarseTag::Sym,
        CoarseTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseTag::NounLike => "NOUNLIKE",
            CoarseTag::VerbLike => "VERBLIKE",
            CoarseTag::Func => "FUNC",
            CoarseTag::Num => "NUM",
            CoarseTag::Sym => "SYM",
            CoarseTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "all", "no", "our", "their",
    "its", "his", "her", "my", "your", "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto",
    "over", "under", "between", "about", "through", "during", "after", "before", "and", "or", "but", "nor", "so",
    "because", "while", "if", "when", "since", "than", "then", "as", "not", "also", "very", "it", "they", "we", "you",
    "he", "she", "i", "which", "who", "what", "where", "how", "there", "only", "both", "either", "neither", "such",
    "more", "most", "less", "still", "now",
];

const VERBS: &[&str] = &[
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "am",
    "has",
    "have",
    "had",
    "do",
    "does",
    "did",
    "can",
    "could",
    "will",
    "would",
    "shall",
    "should",
    "may",
    "might",
    "must",
    "uses",
    "use",
    "shows",
    "show",
    "makes",
    "make",
    "gives",
    "give",
    "takes",
    "take",
    "returns",
    "computes",
    "stores",
    "requires",
    "improves",
    "explains",
    "reduces",
    "contains",
    "defines",
    "represents",
    "allows",
    "provides",
    "compares",
    "handles",
    "changes",
    "follows",
    "creates",
    "checks",
    "builds",
    "describes",
    "runs",
    "needs",
    "means",
    "gets",
    "goes",
    "see",
    "know",
    "find",
    "finds",
    "keep",
    "keeps",
];

const VERB_SUFFIXES: &[&str] = &["ed", "ing", "izes", "ize", "ises", "ise", "ates", "ify", "ifies"];

/// Tags one token from its kind, a lower-cased lexicon and suffix rules.
pub fn tag_token(token: &Token) -> CoarseTag {
    match token.kind {
        TokenKind::Numeral => CoarseTag::Num,
        TokenKind::Symbol => CoarseTag::Sym,
        TokenKind::Word => {
            let lower = token.lower();
            if !lower.chars().all(char::is_alphabetic) {
                // identifiers, mixed alnum, dotted or underscored names
                return CoarseTag::Other;
            }
            if FUNCTION_WORDS.contains(&lower.as_str()) {
                return CoarseTag::Func;
            }
            if VERBS.contains(&lower.as_str()) {
                return CoarseTag::VerbLike;
            }
            if lower.chars().count() <= 1 {
                return CoarseTag::Other;
            }
            if lower.chars().count() > 4 && VERB_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
                return CoarseTag::VerbLike;
            }
            let is_camel =
                token.surface.chars().skip(1).any(char::is_uppercase) && token.surface.chars().any(char::is_lowercase);
            if is_camel {
                CoarseTag::Other
            } else {
                CoarseTag::NounLike
            }
        }
    }
}

pub fn tag_tokens(tokens: &[Token]) -> Vec<CoarseTag> {
    tokens.iter().map(tag_token).collect()
}

/// Tag ratios `pos_ratio:<TAG>`, tag-bigram indicators `pos_bi:<T1>_<T2>` and
/// `symbol_ratio`. Empty for an empty line.
pub fn syntactic_features(tokens: &[Token]) -> SparseFeatureVector {
    let mut v = SparseFeatureVector::new();
    if tokens.is_empty() {
        return v;
    }
    let tags = tag_tokens(tokens);
    let n = tokens.len() as f64;
    let mut counts: BTreeMap<CoarseTag, usize> = BTreeMap::new();
    for t in &tags {
        *counts.entry(*t).or_default() += 1;
    }
    for (tag, c) in counts {
        v.set(format!("pos_ratio:{tag}"), c as f64 / n);
    }
    for w in tags.windows(2) {
        v.set(format!("pos_bi:{}_{}", w[0], w[1]), 1.0);
    }
    let symbols = tokens.iter().filter(|t| t.kind == TokenKind::Symbol).count();
    v.set("symbol_ratio", symbols as f64 / n);
    v
}
