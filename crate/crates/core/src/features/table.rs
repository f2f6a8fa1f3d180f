//! String-layout evidence for tables.
//!
//! Each line is reduced to its S/N shape (string vs numeral per token). A
//! line is table-like when its shape is probable under a bigram model fitted
//! on table lines and resembles the shape of the line before it.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token, TokenKind};
use crate::corpus::{AnnotatedDocument, Corpus, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SnSymbol {
    S,
    N,
}

impl SnSymbol {
    fn index(self) -> usize {
        match self {
            SnSymbol::S => 0,
            SnSymbol::N => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SnCode(pub Vec<SnSymbol>);

impl SnCode {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for SnCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(match s {
                SnSymbol::S => "S",
                SnSymbol::N => "N",
            })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SnCode {
    type Err = Error;

    /// Accepts `"SNNS"` or `"S N N S"`.
    fn from_str(s: &str) -> Result<SnCode> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'S' => Ok(SnSymbol::S),
                'N' => Ok(SnSymbol::N),
                other => Err(Error::InvalidArgument(format!("bad SN symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SnCode)
    }
}

pub fn encode_sn(tokens: &[Token]) -> SnCode {
    SnCode(
        tokens
            .iter()
            .map(|t| match t.kind {
                TokenKind::Numeral => SnSymbol::N,
                TokenKind::Word | TokenKind::Symbol => SnSymbol::S,
            })
            .collect(),
    )
}

pub fn encode_line(line: &str) -> SnCode {
    encode_sn(&tokenize(line))
}

/// Levenshtein distance with unit costs, two-row dynamic program.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

pub fn edit_distance(a: &SnCode, b: &SnCode) -> usize {
    levenshtein(&a.0, &b.0)
}

/// `1 - d(a, b) / max(|a|, |b|, 1)`, in [0, 1].
pub fn edit_sim(a: &SnCode, b: &SnCode) -> f64 {
    let denom = a.len().max(b.len()).max(1);
    1.0 - edit_distance(a, b) as f64 / denom as f64
}

/// Bigram model over S/N symbols with add-one smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTransitionModel {
    /// P(first symbol), indexed [S, N].
    pub start: [f64; 2],
    /// P(next | current), indexed [current][next].
    pub trans: [[f64; 2]; 2],
    /// Pseudo-count added to every start and transition cell.
    pub smoothing: f64,
    pub start_counts: [u64; 2],
    pub trans_counts: [[u64; 2]; 2],
}

impl TableTransitionModel {
    pub fn from_counts(start_counts: [u64; 2], trans_counts: [[u64; 2]; 2], smoothing: f64) -> Self {
        let start_total = (start_counts[0] + start_counts[1]) as f64 + 2.0 * smoothing;
        let start = [
            (start_counts[0] as f64 + smoothing) / start_total,
            (start_counts[1] as f64 + smoothing) / start_total,
        ];
        let mut trans = [[0.0; 2]; 2];
        for (row, counts) in trans.iter_mut().zip(trans_counts) {
            let total = (counts[0] + counts[1]) as f64 + 2.0 * smoothing;
            *row = [
                (counts[0] as f64 + smoothing) / total,
                (counts[1] as f64 + smoothing) / total,
            ];
        }
        TableTransitionModel {
            start,
            trans,
            smoothing,
            start_counts,
            trans_counts,
        }
    }

    /// Add-one model over the S/N codes of `lines`. Empty codes are skipped.
    pub fn train<'a, I>(codes: I) -> Self
    where
        I: IntoIterator<Item = &'a SnCode>,
    {
        let mut start_counts = [0u64; 2];
        let mut trans_counts = [[0u64; 2]; 2];
        for code in codes {
            let Some(first) = code.0.first() else { continue };
            start_counts[first.index()] += 1;
            for w in code.0.windows(2) {
                trans_counts[w[0].index()][w[1].index()] += 1;
            }
        }
        Self::from_counts(start_counts, trans_counts, 1.0)
    }

    /// Fits on the lines of `corpus` gold-labeled TABLE.
    pub fn train_on_corpus(corpus: &Corpus) -> Self {
        let codes: Vec<SnCode> = corpus
            .documents()
            .iter()
            .flat_map(|d| &d.lines)
            .filter(|l| l.gold == Some(Label::Table))
            .map(|l| encode_line(&l.text))
            .collect();
        Self::train(&codes)
    }

    pub fn log_prob(&self, code: &SnCode) -> Result<f64> {
        let first = code.0.first().ok_or(Error::EmptyLine)?;
        let mut lp = self.start[first.index()].ln();
        for w in code.0.windows(2) {
            lp += self.trans[w[0].index()][w[1].index()].ln();
        }
        Ok(lp)
    }
}

/// `start(c1) * prod trans(c_j -> c_j+1)`, evaluated in log space.
pub fn table_lm_prob(code: &SnCode, model: &TableTransitionModel) -> Result<f64> {
    model.log_prob(code).map(f64::exp)
}

/// Layout score of line `i`: LM probability of its shape times its shape
/// similarity to line `i - 1` (factor 1 on the first line). With
/// `raw_edit_distance` the raw distance is used as the factor instead.
/// Empty lines score 0.
pub fn table_layout_score(
    doc: &AnnotatedDocument,
    i: usize,
    model: &TableTransitionModel,
    raw_edit_distance: bool,
) -> f64 {
    let code = encode_line(&doc.lines[i].text);
    layout_score_codes(
        &code,
        i.checked_sub(1).map(|p| encode_line(&doc.lines[p].text)).as_ref(),
        model,
        raw_edit_distance,
    )
}

pub(crate) fn layout_score_codes(
    code: &SnCode,
    prev: Option<&SnCode>,
    model: &TableTransitionModel,
    raw_edit_distance: bool,
) -> f64 {
    let Ok(p) = table_lm_prob(code, model) else {
        return 0.0;
    };
    let factor = match prev {
        None => 1.0,
        Some(prev) if raw_edit_distance => edit_distance(code, prev) as f64,
        Some(prev) => edit_sim(code, prev),
    };
    p * factor
}
