//! Reference baselines: prior-weighted random guessing and per-class
//! unigram language models.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::features::tokenize;
use crate::rng;

fn check_priors(priors: &BTreeMap<Label, f64>) -> Result<[f64; 5]> {
    let mut p = [0.0; 5];
    for (&l, &w) in priors {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidPriors(format!("{l} prior {w} is not a probability")));
        }
        p[l.index()] = w;
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidPriors(format!("priors sum to {total}, not 1")));
    }
    Ok(p)
}

/// Independent seeded draws from `priors` for every line of every document.
pub fn baseline_weighted_random(corpus: &Corpus, priors: &BTreeMap<Label, f64>, seed: u64) -> Result<Vec<Vec<Label>>> {
    let p = check_priors(priors)?;
    let mut rng = rng::stream(seed, rng::STREAM_BASELINE);
    let draw = |rng: &mut rng::Rng| {
        let mut x = rng.gen::<f64>();
        for (i, w) in p.iter().enumerate() {
            if x < *w {
                return Label::ALL[i];
            }
            x -= w;
        }
        Label::ALL[p.iter().rposition(|w| *w > 0.0).unwrap_or(0)]
    };
    Ok(corpus
        .documents()
        .iter()
        .map(|d| d.lines.iter().map(|_| draw(&mut rng)).collect())
        .collect())
}

/// Per-class unigram models with add-one smoothing over the shared
/// vocabulary plus one unknown-token slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClmModel {
    counts: Vec<HashMap<String, u64>>,
    totals: [u64; 5],
    vocab_size: usize,
    pub priors: [f64; 5],
}

impl ClmModel {
    pub fn train(corpus: &Corpus) -> Result<Self> {
        if corpus.line_count() == 0 {
            return Err(Error::EmptyCorpus);
        }
        if !corpus.fully_labeled() {
            return Err(Error::UnlabeledCorpus);
        }
        let mut counts = vec![HashMap::new(); 5];
        let mut totals = [0u64; 5];
        let mut vocab = HashSet::new();
        let mut lines = [0usize; 5];
        for line in corpus.documents().iter().flat_map(|d| &d.lines) {
            let c = line.gold.expect("fully labeled").index();
            lines[c] += 1;
            for t in tokenize(&line.text) {
                let w = t.lower();
                vocab.insert(w.clone());
                *counts[c].entry(w).or_insert(0) += 1;
                totals[c] += 1;
            }
        }
        let n: usize = lines.iter().sum();
        let priors = lines.map(|c| c as f64 / n as f64);
        Ok(ClmModel {
            counts,
            totals,
            vocab_size: vocab.len(),
            priors,
        })
    }

    /// log P(token | class); unseen tokens get the unknown slot's mass.
    pub fn log_prob(&self, label: Label, token: &str) -> f64 {
        let c = label.index();
        let count = self.counts[c].get(token).copied().unwrap_or(0);
        let denom = self.totals[c] as f64 + self.vocab_size as f64 + 1.0;
        ((count as f64 + 1.0) / denom).ln()
    }

    /// Per-class mean token log-probability of a line.
    pub fn line_scores(&self, line: &str) -> [f64; 5] {
        let toks: Vec<String> = tokenize(line).iter().map(|t| t.lower()).collect();
        let mut s = [0.0; 5];
        if toks.is_empty() {
            return s;
        }
        for l in Label::ALL {
            s[l.index()] = toks.iter().map(|t| self.log_prob(l, t)).sum::<f64>() / toks.len() as f64;
        }
        s
    }

    /// Best class by length-normalized log-probability; ties go to TEXT,
    /// then to the earlier label.
    pub fn predict_line(&self, line: &str) -> Label {
        let s = self.line_scores(line);
        let best = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if s[Label::Text.index()] == best {
            return Label::Text;
        }
        Label::ALL[s.iter().position(|x| *x == best).expect("max exists")]
    }
}

pub fn baseline_clm(train: &Corpus, test: &Corpus) -> Result<Vec<Vec<Label>>> {
    let m = ClmModel::train(train)?;
    Ok(test
        .documents()
        .iter()
        .map(|d| d.lines.iter().map(|l| m.predict_line(&l.text)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedDocument, LineRecord, TABLE2_SLIDES_RATIOS};

    fn slides_priors() -> BTreeMap<Label, f64> {
        let mut p: BTreeMap<Label, f64> = TABLE2_SLIDES_RATIOS.into_iter().collect();
        p.insert(Label::Text, 0.737);
        p
    }

    fn blank_corpus(docs: usize, lines: usize) -> Corpus {
        Corpus::new(
            (0..docs)
                .map(|d| {
                    AnnotatedDocument::new(format!("d{d}"), (0..lines).map(|_| LineRecord::new("", None)).collect())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn weighted_random_frequencies() {
        let c = blank_corpus(100, 1000);
        let pred = baseline_weighted_random(&c, &slides_priors(), 3).unwrap();
        let mut counts = [0usize; 5];
        for l in pred.iter().flatten() {
            counts[l.index()] += 1;
        }
        for (l, p) in slides_priors() {
            let f = counts[l.index()] as f64 / 100_000.0;
            assert!((f - p).abs() <= 0.01, "{l}: {f} vs {p}");
        }
    }

    #[test]
    fn weighted_random_degenerate_and_invalid() {
        let c = blank_corpus(3, 10);
        let only_text: BTreeMap<_, _> = [(Label::Text, 1.0)].into_iter().collect();
        let pred = baseline_weighted_random(&c, &only_text, 0).unwrap();
        assert!(pred.iter().flatten().all(|l| *l == Label::Text));
        let bad: BTreeMap<_, _> = [(Label::Text, 0.5)].into_iter().collect();
        assert!(matches!(
            baseline_weighted_random(&c, &bad, 0),
            Err(Error::InvalidPriors(_))
        ));
        let bad: BTreeMap<_, _> = [(Label::Text, 1.5), (Label::Code, -0.5)].into_iter().collect();
        assert!(matches!(
            baseline_weighted_random(&c, &bad, 0),
            Err(Error::InvalidPriors(_))
        ));
        assert_eq!(
            baseline_weighted_random(&c, &slides_priors(), 5).unwrap(),
            baseline_weighted_random(&c, &slides_priors(), 5).unwrap()
        );
    }

    fn train_corpus() -> Corpus {
        Corpus::new(vec![AnnotatedDocument::new(
            "t",
            vec![
                LineRecord::labeled("the cat sat on the mat", Label::Text),
                LineRecord::labeled("a dog ran in the park", Label::Text),
                LineRecord::labeled("x = foo ( y ) ;", Label::Code),
                LineRecord::labeled("Method 1 2 3", Label::Table),
            ],
        )])
        .unwrap()
    }

    #[test]
    fn clm_argmax_and_ties() {
        let m = ClmModel::train(&train_corpus()).unwrap();
        assert_eq!(m.predict_line("foo ( x ) ;"), Label::Code);
        assert_eq!(m.predict_line(""), Label::Text);
        assert_eq!(m.predict_line("the cat"), Label::Text);
        let test = Corpus::new(vec![AnnotatedDocument::from_text("q", "foo ;\n\nthe park")]).unwrap();
        assert_eq!(
            baseline_clm(&train_corpus(), &test).unwrap(),
            vec![vec![Label::Code, Label::Text, Label::Text]]
        );
    }

    #[test]
    fn clm_distribution_sums_to_one() {
        let m = ClmModel::train(&train_corpus()).unwrap();
        let vocab: HashSet<String> = m.counts.iter().flat_map(|c| c.keys().cloned()).collect();
        for l in Label::ALL {
            let known: f64 = vocab.iter().map(|w| m.log_prob(l, w).exp()).sum();
            let unknown = m.log_prob(l, "never-seen-token").exp();
            assert!((known + unknown - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clm_errors() {
        let empty = Corpus::new(vec![]).unwrap();
        assert!(matches!(ClmModel::train(&empty), Err(Error::EmptyCorpus)));
        let unlabeled = Corpus::new(vec![AnnotatedDocument::from_text("u", "x")]).unwrap();
        assert!(matches!(ClmModel::train(&unlabeled), Err(Error::UnlabeledCorpus)));
    }
}
