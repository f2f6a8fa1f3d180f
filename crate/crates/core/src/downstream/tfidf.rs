//! Top-k TF-IDF document vectors and cosine similarity.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, Corpus};
use crate::error::{Error, Result};
use crate::features::{tokenize, TokenKind};
use crate::scalar::Scalar;

/// Sparse term weights.
pub type TermWeights<F> = BTreeMap<String, F>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DocumentVector<F: Scalar> {
    pub doc_id: String,
    /// Non-negative tf-idf weights of the retained terms.
    pub weights: TermWeights<F>,
    /// Term budget the vector was truncated to.
    pub k: usize,
}

impl<F: Scalar> DocumentVector<F> {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> F {
        norm(&self.weights)
    }

    pub fn scaled(&self, c: F) -> Self {
        DocumentVector {
            doc_id: self.doc_id.clone(),
            weights: self.weights.iter().map(|(t, w)| (t.clone(), *w * c)).collect(),
            k: self.k,
        }
    }
}

/// Document vectors of one corpus together with its idf table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DocumentSpace<F: Scalar> {
    pub vectors: Vec<DocumentVector<F>>,
    pub idf: BTreeMap<String, F>,
}

/// Lower-cased word and numeral tokens; punctuation is not a term.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.kind != TokenKind::Symbol)
        .map(|t| t.lower())
        .collect()
}

fn term_counts<'a, I: IntoIterator<Item = &'a str>>(lines: I) -> BTreeMap<String, usize> {
    let mut tf = BTreeMap::new();
    for line in lines {
        for t in terms(line) {
            *tf.entry(t).or_insert(0) += 1;
        }
    }
    tf
}

fn document_terms(doc: &AnnotatedDocument) -> BTreeMap<String, usize> {
    term_counts(doc.lines.iter().map(|l| l.text.as_str()))
}

pub(crate) fn norm<F: Scalar>(w: &TermWeights<F>) -> F {
    w.values().map(|x| *x * *x).sum::<F>().sqrt()
}

pub(crate) fn dot<F: Scalar>(a: &TermWeights<F>, b: &TermWeights<F>) -> F {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter_map(|(t, x)| large.get(t).map(|y| *x * *y)).sum()
}

/// Cosine of two weight maps, clamped to [0, 1]; 0 when either is empty.
pub fn cosine_weights<F: Scalar>(a: &TermWeights<F>, b: &TermWeights<F>) -> F {
    let d = norm(a) * norm(b);
    if d <= F::zero() {
        return F::zero();
    }
    (dot(a, b) / d).max(F::zero()).min(F::one())
}

pub fn cosine<F: Scalar>(a: &DocumentVector<F>, b: &DocumentVector<F>) -> F {
    cosine_weights(&a.weights, &b.weights)
}

/// Keeps the `k` heaviest positive terms; equal weights go to the
/// lexicographically smaller term.
fn top_k<F: Scalar>(weights: BTreeMap<String, F>, k: usize) -> TermWeights<F> {
    let mut ranked: Vec<(String, F)> = weights.into_iter().filter(|(_, w)| *w > F::zero()).collect();
    // BTreeMap order is lexicographic and the sort is stable
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite weights"));
    ranked.truncate(k);
    ranked.into_iter().collect()
}

/// Raw tf times `ln(N / df)`, truncated to the top `k` terms per document.
pub fn build_space<F: Scalar>(corpus: &Corpus, k: usize) -> Result<DocumentSpace<F>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("term budget k must be positive".into()));
    }
    let tfs: Vec<BTreeMap<String, usize>> = corpus.documents().iter().map(document_terms).collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for tf in &tfs {
        for t in tf.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let n = F::of_usize(corpus.len());
    let idf: BTreeMap<String, F> = df
        .iter()
        .map(|(t, d)| (t.to_string(), (n / F::of_usize(*d)).ln()))
        .collect();
    let vectors = corpus
        .documents()
        .iter()
        .zip(&tfs)
        .map(|(doc, tf)| DocumentVector {
            doc_id: doc.id.clone(),
            weights: top_k(
                tf.iter().map(|(t, c)| (t.clone(), F::of_usize(*c) * idf[t])).collect(),
                k,
            ),
            k,
        })
        .collect();
    Ok(DocumentSpace { vectors, idf })
}

pub fn build_vectors<F: Scalar>(corpus: &Corpus, k: usize) -> Result<Vec<DocumentVector<F>>> {
    Ok(build_space(corpus, k)?.vectors)
}

impl<F: Scalar> DocumentSpace<F> {
    /// tf-idf weights of a free-text query under this space's idf. Terms
    /// outside the vocabulary, or present in every document, get no weight.
    pub fn query_vector(&self, text: &str) -> TermWeights<F> {
        term_counts([text])
            .into_iter()
            .filter_map(|(t, c)| {
                let w = F::of_usize(c) * *self.idf.get(&t)?;
                (w > F::zero()).then_some((t, w))
            })
            .collect()
    }

    pub fn get(&self, doc_id: &str) -> Option<&DocumentVector<F>> {
        self.vectors.iter().find(|v| v.doc_id == doc_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| AnnotatedDocument::from_text(format!("d{i}"), t))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_top_two() {
        // d0: a a b c   d1: a b b d   d2: a c c c e
        let c = corpus(&["a a b c", "a b b d", "a c c c e"]);
        let v = build_vectors::<f64>(&c, 2).unwrap();
        let l32 = (1.5f64).ln(); // ln(3/2)
        let l3 = 3f64.ln();
        // 'a' is everywhere: idf 0, never retained
        assert!(v.iter().all(|d| !d.weights.contains_key("a")));
        // d0: b = c = ln 1.5, tie broken lexicographically, both fit
        assert_eq!(v[0].weights.len(), 2);
        assert!((v[0].weights["b"] - l32).abs() < 1e-12 && (v[0].weights["c"] - l32).abs() < 1e-12);
        // d1: d = ln 3 > b = 2 ln 1.5
        assert!((v[1].weights["d"] - l3).abs() < 1e-12);
        assert!((v[1].weights["b"] - 2.0 * l32).abs() < 1e-12);
        // d2: c = 3 ln 1.5 ≈ 1.216 > e = ln 3 ≈ 1.099
        let keys: Vec<&String> = v[2].weights.keys().collect();
        assert_eq!(keys, ["c", "e"]);
        assert!((v[2].weights["c"] - 3.0 * l32).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_smaller_term() {
        let c = corpus(&["zeta alpha mid", "other"]);
        let v = build_vectors::<f64>(&c, 1).unwrap();
        assert_eq!(v[0].weights.keys().next().unwrap(), "alpha");
    }

    #[test]
    fn budget_and_empty_docs() {
        let c = corpus(&["one two three", ""]);
        let v = build_vectors::<f64>(&c, 100).unwrap();
        assert_eq!(v[0].weights.len(), 3);
        assert!(v[1].is_empty());
        assert!(matches!(
            build_vectors::<f64>(&Corpus::new(vec![]).unwrap(), 5),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn cosine_examples() {
        let mk = |pairs: &[(&str, f64)]| DocumentVector {
            doc_id: "x".into(),
            weights: pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
            k: 10,
        };
        let a = mk(&[("x", 1.0), ("y", 1.0)]);
        let b = mk(&[("x", 1.0)]);
        assert!((cosine(&a, &b) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&b, &mk(&[("z", 2.0)])), 0.0);
        assert_eq!(cosine(&b, &mk(&[])), 0.0);
    }

    #[test]
    fn query_vector_drops_unknown_terms() {
        let c = corpus(&["graph vertex", "packet router"]);
        let s = build_space::<f64>(&c, 10).unwrap();
        let q = s.query_vector("graph unknownword");
        assert_eq!(q.len(), 1);
        assert!(q.contains_key("graph"));
    }

    proptest! {
        #[test]
        fn retained_terms_within_budget(docs in prop::collection::vec("[a-e ]{0,30}", 1..6), k in 1usize..5) {
            let texts: Vec<&str> = docs.iter().map(|s| s.as_str()).collect();
            let v = build_vectors::<f64>(&corpus(&texts), k).unwrap();
            for d in &v {
                prop_assert!(d.weights.len() <= k);
                prop_assert!(d.weights.values().all(|w| *w > 0.0));
            }
        }

        #[test]
        fn cosine_scale_invariant(ws in prop::collection::vec(0.01f64..10.0, 1..6), c in 0.01f64..100.0) {
            let a = DocumentVector { doc_id: "a".into(), weights: ws.iter().enumerate().map(|(i, w)| (format!("t{i}"), *w)).collect(), k: 10 };
            let b = DocumentVector { doc_id: "b".into(), weights: ws.iter().enumerate().map(|(i, w)| (format!("t{}", i % 3), w + 1.0)).collect(), k: 10 };
            prop_assert!((cosine(&a.scaled(c), &b) - cosine(&a, &b)).abs() < 1e-12);
            let s = cosine(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
