//! Word vectors and averaged line vectors.
//!
//! Vectors are trained with skip-gram and negative sampling, or loaded from
//! the plain-text interchange format (`<vocab> <dim>` header, then one
//! `<word> <v1> .. <vD>` row per word). A line is represented by the mean of
//! its in-vocabulary word vectors.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VectorsRepr<F>", into = "VectorsRepr<F>", bound = "F: Scalar")]
pub struct WordVectors<F: Scalar> {
    dimension: usize,
    words: Vec<String>,
    data: Vec<F>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct VectorsRepr<F: Scalar> {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<F>>,
}

impl<F: Scalar> From<VectorsRepr<F>> for WordVectors<F> {
    fn from(r: VectorsRepr<F>) -> Self {
        let mut wv = WordVectors::empty(r.dimension);
        for (w, v) in r.words.into_iter().zip(r.vectors) {
            if v.len() == r.dimension {
                wv.insert(w, &v);
            }
        }
        wv
    }
}

impl<F: Scalar> From<WordVectors<F>> for VectorsRepr<F> {
    fn from(wv: WordVectors<F>) -> Self {
        let vectors = (0..wv.words.len()).map(|i| wv.row(i).to_vec()).collect();
        VectorsRepr {
            dimension: wv.dimension,
            words: wv.words,
            vectors,
        }
    }
}

impl<F: Scalar> WordVectors<F> {
    fn empty(dimension: usize) -> Self {
        WordVectors {
            dimension,
            words: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Inserts or overwrites; returns true when `word` was already present.
    fn insert(&mut self, word: String, v: &[F]) -> bool {
        debug_assert_eq!(v.len(), self.dimension);
        if let Some(&i) = self.index.get(&word) {
            self.data[i * self.dimension..(i + 1) * self.dimension].copy_from_slice(v);
            return true;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(v);
        false
    }

    /// Builds a table from rows; later duplicates overwrite earlier ones.
    pub fn from_rows(dimension: usize, rows: Vec<(String, Vec<F>)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut wv = Self::empty(dimension);
        for (i, (w, v)) in rows.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: dimension,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("vector for {w:?} is not finite")));
            }
            wv.insert(w, &v);
        }
        Ok(wv)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<F> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        Some(dense_cosine(x, y))
    }

    /// Parses the text format; returns the table and the number of duplicate
    /// rows that were overwritten.
    pub fn parse(text: &str) -> Result<(Self, usize)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty vector file".into(),
        })?;
        let bad_header = || Error::Parse {
            line: 1,
            message: format!("expected \"<vocab_size> <dimension>\", found {header:?}"),
        };
        let mut parts = header.split_whitespace();
        let count: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;
        let dimension: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad_header)?;
        if parts.next().is_some() || dimension == 0 {
            return Err(bad_header());
        }
        let mut wv = Self::empty(dimension);
        let mut duplicates = 0;
        let mut rows = 0;
        let mut buf = Vec::with_capacity(dimension);
        for (i, line) in lines {
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("nonblank line").to_string();
            buf.clear();
            for f in fields {
                let x: f64 = f.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad component {f:?}"),
                })?;
                if !x.is_finite() {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("non-finite component {f:?}"),
                    });
                }
                buf.push(F::of(x));
            }
            if buf.len() != dimension {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: dimension,
                    found: buf.len(),
                });
            }
            if wv.insert(word, &buf) {
                duplicates += 1;
            }
            rows += 1;
        }
        if rows != count {
            return Err(Error::Parse {
                line: 1,
                message: format!("header announces {count} rows, file has {rows}"),
            });
        }
        Ok((wv, duplicates))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vocab_size(), self.dimension);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in self.row(i) {
                write!(out, " {x}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_vectors<F: Scalar>(path: impl AsRef<Path>) -> Result<WordVectors<F>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (wv, duplicates) = WordVectors::parse(&text)?;
    if duplicates > 0 {
        log::warn!("{}: {duplicates} duplicate words, last row kept", path.display());
    }
    Ok(wv)
}

pub fn save_vectors<F: Scalar>(wv: &WordVectors<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, wv.to_text()).map_err(|e| Error::io(path, e))
}

fn dense_cosine<F: Scalar>(x: &[F], y: &[F]) -> F {
    let dot: F = x.iter().zip(y).map(|(a, b)| *a * *b).sum();
    let nx: F = x.iter().map(|a| *a * *a).sum::<F>().sqrt();
    let ny: F = y.iter().map(|a| *a * *a).sum::<F>().sqrt();
    if nx == F::zero() || ny == F::zero() {
        F::zero()
    } else {
        dot / (nx * ny)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineVector<F: Scalar> {
    pub values: Vec<F>,
    /// Fraction of the line's tokens found in the vocabulary.
    pub coverage: F,
}

/// Mean of the vectors of in-vocabulary tokens; zero with coverage 0 when no
/// token is known.
pub fn line_vector<F: Scalar, S: AsRef<str>>(tokens: &[S], wv: &WordVectors<F>) -> LineVector<F> {
    let mut values = vec![F::zero(); wv.dimension()];
    let mut found = 0usize;
    for t in tokens {
        if let Some(v) = wv.get(t.as_ref()) {
            for (acc, x) in values.iter_mut().zip(v) {
                *acc = *acc + *x;
            }
            found += 1;
        }
    }
    if found == 0 {
        return LineVector {
            values,
            coverage: F::zero(),
        };
    }
    let n = F::of_usize(found);
    for x in &mut values {
        *x = *x / n;
    }
    LineVector {
        values,
        coverage: n / F::of_usize(tokens.len()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 100,
            window: 5,
            min_count: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

/// Skip-gram with negative sampling, single-threaded and deterministic for a
/// fixed seed.
pub fn train_skipgram<F: Scalar, S: AsRef<str>>(corpus: &[Vec<S>], cfg: &SkipGramConfig) -> Result<WordVectors<F>> {
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    if cfg.dim == 0 || cfg.window == 0 || cfg.min_count == 0 || cfg.negatives == 0 || cfg.epochs == 0 {
        return Err(Error::InvalidArgument("skip-gram parameters must be positive".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in corpus.iter().flatten() {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let mut vocab: Vec<(&str, usize)> = counts.into_iter().filter(|(_, c)| *c >= cfg.min_count).collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_ref()).copied()).collect())
        .collect();

    // unigram^0.75 noise distribution as a cumulative table
    let mut noise_cdf = Vec::with_capacity(vocab.len());
    let mut acc = 0.0;
    for (_, c) in &vocab {
        acc += (*c as f64).powf(0.75);
        noise_cdf.push(acc);
    }

    let dim = cfg.dim;
    let v = vocab.len();
    let mut rng = rng::stream(cfg.seed, rng::STREAM_EMBED);
    let mut input: Vec<F> = (0..v * dim)
        .map(|_| F::of((rng.gen::<f64>() - 0.5) / dim as f64))
        .collect();
    let mut output: Vec<F> = vec![F::zero(); v * dim];
    let mut grad = vec![F::zero(); dim];

    let total_steps = (cfg.epochs * sentences.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        for sent in &sentences {
            for (pos, &center) in sent.iter().enumerate() {
                let progress = step as f64 / total_steps;
                let lr = F::of((cfg.learning_rate * (1.0 - progress)).max(cfg.learning_rate * 1e-4));
                step += 1;
                let reach = rng.gen_range(1..=cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sent.len() - 1);
                for (cpos, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = F::zero());
                    let in_row = center * dim..(center + 1) * dim;
                    for d in 0..=cfg.negatives {
                        let (target, label) = if d == 0 {
                            (context, F::one())
                        } else {
                            let x = rng.gen::<f64>() * acc;
                            let t = noise_cdf.partition_point(|c| *c <= x).min(v - 1);
                            if t == context {
                                continue;
                            }
                            (t, F::zero())
                        };
                        let out_row = target * dim..(target + 1) * dim;
                        let dot: F = input[in_row.clone()]
                            .iter()
                            .zip(&output[out_row.clone()])
                            .map(|(a, b)| *a * *b)
                            .sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for ((gk, o), i) in grad.iter_mut().zip(&mut output[out_row]).zip(&input[in_row.clone()]) {
                            *gk = *gk + g * *o;
                            *o = *o + g * *i;
                        }
                    }
                    for (i, gk) in input[in_row].iter_mut().zip(&grad) {
                        *i = *i + *gk;
                    }
                }
            }
        }
    }

    let mut wv = WordVectors::empty(dim);
    for (i, (w, _)) in vocab.iter().enumerate() {
        wv.insert((*w).to_string(), &input[i * dim..(i + 1) * dim]);
    }
    Ok(wv)
}

fn sigmoid<F: Scalar>(x: F) -> F {
    let six = F::of(6.0);
    if x > six {
        F::one()
    } else if x < -six {
        F::zero()
    } else {
        F::one() / (F::one() + (-x).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> WordVectors<f64> {
        WordVectors::parse("2 3\na 1 0 0\nb 0 1 0\n").unwrap().0
    }

    #[test]
    fn parse_header_and_rows() {
        let wv = abc();
        assert_eq!(wv.vocab_size(), 2);
        assert_eq!(wv.dimension(), 3);
        assert_eq!(wv.get("b"), Some(&[0.0, 1.0, 0.0][..]));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            WordVectors::<f64>::parse("1 3\nc 1 0\n"),
            Err(Error::DimensionMismatch {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(WordVectors::<f64>::parse(""), Err(Error::Parse { .. })));
        assert!(matches!(WordVectors::<f64>::parse("x y\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            WordVectors::<f64>::parse("1 2\na 1 q\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            WordVectors::<f64>::parse("3 2\na 1 1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn duplicate_rows_last_wins() {
        let (wv, dups) = WordVectors::<f64>::parse("3 2\na 1 1\nb 0 1\na 2 2\n").unwrap();
        assert_eq!(dups, 1);
        assert_eq!(wv.vocab_size(), 2);
        assert_eq!(wv.get("a"), Some(&[2.0, 2.0][..]));
    }

    #[test]
    fn text_round_trip() {
        let wv =
            WordVectors::from_rows(2, vec![("x".into(), vec![0.1, -3.25]), ("y".into(), vec![1e-7, 2.0])]).unwrap();
        let (back, _) = WordVectors::<f64>::parse(&wv.to_text()).unwrap();
        assert_eq!(back, wv);
        let json = serde_json::to_string(&wv).unwrap();
        let back: WordVectors<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, wv);
    }

    #[test]
    fn averaging() {
        let wv = abc();
        let lv = line_vector(&["a", "b"], &wv);
        assert_eq!(lv.values, vec![0.5, 0.5, 0.0]);
        assert_eq!(lv.coverage, 1.0);
        let lv = line_vector(&["q", "r"], &wv);
        assert_eq!(lv.values, vec![0.0; 3]);
        assert_eq!(lv.coverage, 0.0);
        let lv = line_vector(&["a", "zzz"], &wv);
        assert_eq!(lv.values, vec![1.0, 0.0, 0.0]);
        assert_eq!(lv.coverage, 0.5);
        let empty: [&str; 0] = [];
        assert_eq!(line_vector(&empty, &wv).coverage, 0.0);
    }

    #[test]
    fn works_in_f32() {
        let (wv, _) = WordVectors::<f32>::parse("2 3\na 1 0 0\nb 0 1 0\n").unwrap();
        let lv = line_vector(&["a", "b"], &wv);
        assert_eq!(lv.values, vec![0.5f32, 0.5, 0.0]);
    }

    #[test]
    fn min_count_too_high() {
        let corpus = vec![vec!["a", "b", "a"]];
        let cfg = SkipGramConfig {
            min_count: 10,
            ..SkipGramConfig::default()
        };
        assert!(matches!(
            train_skipgram::<f64, _>(&corpus, &cfg),
            Err(Error::EmptyVocabulary)
        ));
        let empty: Vec<Vec<&str>> = vec![];
        assert!(matches!(
            train_skipgram::<f64, _>(&empty, &cfg),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let corpus: Vec<Vec<&str>> = (0..50)
            .map(|i| vec!["the", "cat", if i % 2 == 0 { "sat" } else { "ran" }, "on", "mat"])
            .collect();
        let cfg = SkipGramConfig {
            dim: 8,
            min_count: 1,
            epochs: 2,
            seed: 3,
            ..SkipGramConfig::default()
        };
        let a = train_skipgram::<f64, _>(&corpus, &cfg).unwrap();
        let b = train_skipgram::<f64, _>(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vocab_size(), 6);
        assert!(a
            .words()
            .iter()
            .all(|w| a.get(w).unwrap().iter().all(|x| x.is_finite())));
    }

    fn arb_vectors() -> impl Strategy<Value = WordVectors<f64>> {
        proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..6).prop_map(|rows| {
            WordVectors::from_rows(
                3,
                rows.into_iter()
                    .enumerate()
                    .map(|(i, v)| (format!("w{i}"), v))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn mean_is_permutation_invariant_and_bounded(wv in arb_vectors(), picks in proptest::collection::vec(0usize..8, 0..10)) {
            let toks: Vec<String> = picks.iter().map(|i| format!("w{i}")).collect();
            let lv = line_vector(&toks, &wv);
            let mut rev = toks.clone();
            rev.reverse();
            let lr = line_vector(&rev, &wv);
            for (a, b) in lv.values.iter().zip(&lr.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!((0.0..=1.0).contains(&lv.coverage));
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let max_norm = toks.iter().filter_map(|t| wv.get(t)).map(norm).fold(0.0, f64::max);
            prop_assert!(norm(&lv.values) <= max_norm + 1e-9);
            prop_assert_eq!(lv.coverage == 0.0, lv.values.iter().all(|x| *x == 0.0) && toks.iter().all(|t| wv.get(t).is_none()));
        }
    }
}
