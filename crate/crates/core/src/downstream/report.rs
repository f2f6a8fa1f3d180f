//! Clustering and similarity before and after stripping unnatural lines.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{init_seeds, seeded_kmeans, GoldClustering, SeedScheme, DEFAULT_MAX_ITERS};
use super::tfidf::{build_space, cosine, DocumentSpace};
use crate::classifier::{predict_document, SequentialModel};
use crate::corpus::{AnnotatedDocument, Corpus, Label};
use crate::error::{Error, Result};
use crate::evaluation::{fit_loglinear_aic, pairwise_clustering_f1};
use crate::{Real, RegressionFit};

pub const REMOVED_SUFFIX: &str = ":removed";
pub const DEFAULT_K_SWEEP: [usize; 6] = [10, 20, 50, 100, 200, 500];

/// Keeps the lines whose label is in `keep`, in order. The id gains a
/// `:removed` suffix (once).
pub fn remove_unnatural(
    doc: &AnnotatedDocument,
    labels: &[Label],
    keep: &BTreeSet<Label>,
) -> Result<AnnotatedDocument> {
    if labels.len() != doc.len() {
        return Err(Error::LengthMismatch {
            expected: doc.len(),
            found: labels.len(),
        });
    }
    let lines = doc
        .lines
        .iter()
        .zip(labels)
        .filter(|(_, l)| keep.contains(l))
        .map(|(line, _)| line.clone())
        .collect();
    let id = if doc.id.ends_with(REMOVED_SUFFIX) {
        doc.id.clone()
    } else {
        format!("{}{REMOVED_SUFFIX}", doc.id)
    };
    Ok(AnnotatedDocument::new(id, lines))
}

pub fn default_keep() -> BTreeSet<Label> {
    [Label::Text].into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Removed,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Removed => "removed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalConfig {
    pub k_values: Vec<usize>,
    pub schemes: Vec<SeedScheme>,
    pub keep: BTreeSet<Label>,
    pub max_iters: usize,
    pub seed: u64,
    /// Also fit relevance-vs-similarity regressions on both corpora.
    pub sim_aic: bool,
}

impl Default for RemovalConfig {
    fn default() -> Self {
        RemovalConfig {
            k_values: DEFAULT_K_SWEEP.to_vec(),
            schemes: SeedScheme::ALL.to_vec(),
            keep: default_keep(),
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
            sim_aic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringRow {
    pub k: usize,
    pub scheme: SeedScheme,
    pub variant: Variant,
    pub f1: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub k: usize,
    pub scheme: SeedScheme,
    pub original: f64,
    pub removed: f64,
    /// removed - original
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalSummary {
    pub mean_delta: f64,
    pub max_gain: f64,
    /// Mean delta over the settings that improved (0 if none).
    pub mean_gain: f64,
    /// Mean |delta| over the settings that got worse (0 if none).
    pub mean_loss: f64,
    pub gains: usize,
    pub losses: usize,
    pub ties: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicComparison {
    pub original: RegressionFit,
    pub removed: RegressionFit,
    /// removed.aic - original.aic; negative favors the cleaned documents.
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub config: RemovalConfig,
    pub removed_lines: usize,
    pub total_lines: usize,
    pub rows: Vec<ClusteringRow>,
    pub deltas: Vec<DeltaRow>,
    pub summary: RemovalSummary,
    pub aic: Option<AicComparison>,
}

impl RemovalReport {
    /// `k,scheme,variant,f1,delta` with a header row; `delta` is the
    /// removed-minus-original F1 of the row's setting, repeated on both rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,scheme,variant,f1,delta\n");
        for r in &self.rows {
            let delta = self
                .deltas
                .iter()
                .find(|d| d.k == r.k && d.scheme == r.scheme)
                .map_or(0.0, |d| d.delta);
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.k,
                r.scheme,
                r.variant.as_str(),
                r.f1,
                delta
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Cosine of every unordered document pair with relevance = same gold topic.
pub fn similarity_pairs(space: &DocumentSpace<Real>, gold: &BTreeMap<String, String>) -> Vec<(Real, bool)> {
    let v = &space.vectors;
    let mut pairs = Vec::with_capacity(v.len() * v.len().saturating_sub(1) / 2);
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            pairs.push((cosine(a, b), gold[&a.doc_id] == gold[&b.doc_id]));
        }
    }
    pairs
}

fn summarize(deltas: &[DeltaRow]) -> RemovalSummary {
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let all: Vec<f64> = deltas.iter().map(|d| d.delta).collect();
    let gains: Vec<f64> = all.iter().copied().filter(|d| *d > 0.0).collect();
    let losses: Vec<f64> = all.iter().filter(|d| **d < 0.0).map(|d| -d).collect();
    RemovalSummary {
        mean_delta: mean(&all),
        max_gain: all.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0),
        mean_gain: mean(&gains),
        mean_loss: mean(&losses),
        gains: gains.len(),
        losses: losses.len(),
        ties: all.len() - gains.len() - losses.len(),
    }
}

/// Runs the sweep with externally supplied line labels (one sequence per
/// document, in corpus order).
pub fn removal_effect_with_labels(
    corpus: &Corpus,
    labels: &[Vec<Label>],
    gold: &GoldClustering,
    cfg: &RemovalConfig,
) -> Result<RemovalReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if labels.len() != corpus.len() {
        return Err(Error::LengthMismatch {
            expected: corpus.len(),
            found: labels.len(),
        });
    }
    let assignment = gold.assignment();
    let ids: BTreeSet<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
    if ids.len() != assignment.len() || assignment.keys().any(|id| !ids.contains(id.as_str())) {
        return Err(Error::CoverageMismatch);
    }
    if cfg.k_values.is_empty() || cfg.k_values.contains(&0) || cfg.schemes.is_empty() {
        return Err(Error::InvalidArgument(
            "need nonempty positive k values and schemes".into(),
        ));
    }

    let mut cleaned = Vec::with_capacity(corpus.len());
    let mut kept = 0;
    for (doc, l) in corpus.documents().iter().zip(labels) {
        let mut r = remove_unnatural(doc, l, &cfg.keep)?;
        // clustering compares the same documents, so keep the original ids
        r.id = doc.id.clone();
        kept += r.len();
        cleaned.push(r);
    }
    let cleaned = Corpus::new(cleaned)?;
    let variants = [(Variant::Original, corpus), (Variant::Removed, &cleaned)];

    let settings: Vec<(usize, SeedScheme, Variant)> = cfg
        .k_values
        .iter()
        .flat_map(|&k| {
            cfg.schemes
                .iter()
                .flat_map(move |&s| [Variant::Original, Variant::Removed].map(|v| (k, s, v)))
        })
        .collect();
    let spaces: BTreeMap<(usize, Variant), DocumentSpace<Real>> = cfg
        .k_values
        .par_iter()
        .flat_map(|&k| variants.par_iter().map(move |(v, c)| ((k, *v), c)))
        .map(|(key, c)| build_space(c, key.0).map(|s| (key, s)))
        .collect::<Result<_>>()?;
    let rows: Vec<ClusteringRow> = settings
        .par_iter()
        .map(|&(k, scheme, variant)| {
            let space = &spaces[&(k, variant)];
            let seeds = init_seeds(scheme, gold, space, cfg.seed)?;
            let r = seeded_kmeans(&space.vectors, &seeds, cfg.max_iters)?;
            let f1 = pairwise_clustering_f1(&assignment, &r.assignment)?.f1;
            Ok(ClusteringRow {
                k,
                scheme,
                variant,
                f1,
                iterations: r.iterations,
                converged: r.converged,
            })
        })
        .collect::<Result<_>>()?;
    let deltas: Vec<DeltaRow> = rows
        .chunks(2)
        .map(|p| DeltaRow {
            k: p[0].k,
            scheme: p[0].scheme,
            original: p[0].f1,
            removed: p[1].f1,
            delta: p[1].f1 - p[0].f1,
        })
        .collect();

    let aic = if cfg.sim_aic {
        // regressions use every term, not the truncated vectors
        let fit = |c: &Corpus| -> Result<RegressionFit> {
            let space = build_space(c, usize::MAX)?;
            fit_loglinear_aic(&similarity_pairs(&space, &assignment))
        };
        let original = fit(corpus)?;
        let removed = fit(&cleaned)?;
        Some(AicComparison {
            improvement: removed.aic - original.aic,
            original,
            removed,
        })
    } else {
        None
    };

    Ok(RemovalReport {
        config: cfg.clone(),
        removed_lines: corpus.line_count() - kept,
        total_lines: corpus.line_count(),
        summary: summarize(&deltas),
        rows,
        deltas,
        aic,
    })
}

/// Labels every document with the model's final stage, strips the lines
/// outside `cfg.keep` and compares clustering on both versions.
pub fn removal_effect_report(
    corpus: &Corpus,
    model: &SequentialModel,
    gold: &GoldClustering,
    cfg: &RemovalConfig,
) -> Result<RemovalReport> {
    let labels: Vec<Vec<Label>> = corpus
        .documents()
        .par_iter()
        .map(|d| predict_document(model, d))
        .collect::<Result<_>>()?;
    removal_effect_with_labels(corpus, &labels, gold, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_topic_corpus, LineRecord, TopicCorpusConfig};
    use proptest::prelude::*;

    fn gold_labels(c: &Corpus) -> Vec<Vec<Label>> {
        c.documents().iter().map(|d| d.gold_labels().unwrap()).collect()
    }

    #[test]
    fn aic_fit_converges_on_overlapping_topics() {
        for seed in 0..10 {
            let (c, g) = generate_topic_corpus(&TopicCorpusConfig {
                seed,
                ..Default::default()
            })
            .unwrap();
            let pairs = similarity_pairs(&build_space(&c, usize::MAX).unwrap(), &g.assignment());
            let fit = fit_loglinear_aic(&pairs).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert!(fit.slope > 0.0 && fit.iterations < 20, "seed {seed}: {fit:?}");
        }
    }

    #[test]
    fn remove_examples() {
        let all_text = AnnotatedDocument::new("d", vec![LineRecord::labeled("a", Label::Text); 3]);
        let r = remove_unnatural(&all_text, &[Label::Text; 3], &default_keep()).unwrap();
        assert_eq!(r.lines, all_text.lines);
        assert_eq!(r.id, "d:removed");
        assert!(remove_unnatural(&all_text, &[Label::Code; 3], &default_keep())
            .unwrap()
            .is_empty());
        let lines: Vec<LineRecord> = (0..10).map(|i| LineRecord::new(format!("l{i}"), None)).collect();
        let labels: Vec<Label> = (0..10)
            .map(|i| {
                if [2, 5, 7].contains(&i) {
                    Label::Code
                } else {
                    Label::Text
                }
            })
            .collect();
        let r = remove_unnatural(&AnnotatedDocument::new("m", lines), &labels, &default_keep()).unwrap();
        let texts: Vec<&str> = r.lines.iter().map(|l| l.text.as_str()).collect();
        assert_eq!(texts, ["l0", "l1", "l3", "l4", "l6", "l8", "l9"]);
        assert!(matches!(
            remove_unnatural(&all_text, &[Label::Text], &default_keep()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn removal_is_idempotent(codes in prop::collection::vec(0usize..5, 0..20), keep_mask in 1u8..32) {
            let labels: Vec<Label> = codes.iter().map(|i| Label::ALL[*i]).collect();
            let doc = AnnotatedDocument::new("d", labels.iter().enumerate().map(|(i, l)| LineRecord::labeled(format!("x{i}"), *l)).collect());
            let keep: BTreeSet<Label> = Label::ALL.into_iter().filter(|l| keep_mask & (1 << l.index()) != 0).collect();
            let once = remove_unnatural(&doc, &labels, &keep).unwrap();
            let again = remove_unnatural(&once, &once.gold_labels().unwrap(), &keep).unwrap();
            prop_assert_eq!(once, again);
        }
    }

    #[test]
    fn clean_corpus_has_zero_deltas() {
        let cfg = TopicCorpusConfig {
            shared_blocks: 0,
            n_topics: 3,
            docs_per_topic: 5,
            ..TopicCorpusConfig::default()
        };
        let (c, gold) = generate_topic_corpus(&cfg).unwrap();
        let rc = RemovalConfig {
            k_values: vec![10, 50],
            ..RemovalConfig::default()
        };
        let r = removal_effect_with_labels(&c, &gold_labels(&c), &gold, &rc).unwrap();
        assert_eq!(r.rows.len(), 2 * 3 * 2);
        assert_eq!(r.removed_lines, 0);
        assert!(r.deltas.iter().all(|d| d.delta == 0.0));
        assert_eq!(r.to_csv().lines().count(), 13);
    }

    #[test]
    fn confounded_corpus_improves() {
        let (c, gold) = generate_topic_corpus(&TopicCorpusConfig::default()).unwrap();
        let rc = RemovalConfig {
            sim_aic: true,
            ..RemovalConfig::default()
        };
        let r = removal_effect_with_labels(&c, &gold_labels(&c), &gold, &rc).unwrap();
        assert_eq!(r.rows.len(), 36);
        assert!(r.summary.mean_delta > 0.0, "{:?}", r.summary);
        let aic = r.aic.unwrap();
        assert!(aic.removed.aic < aic.original.aic, "{aic:?}");
    }

    #[test]
    fn coverage_checked() {
        let (c, gold) = generate_topic_corpus(&TopicCorpusConfig {
            n_topics: 2,
            docs_per_topic: 3,
            ..Default::default()
        })
        .unwrap();
        let fewer = Corpus::new(c.documents()[1..].to_vec()).unwrap();
        let labels = gold_labels(&fewer);
        assert!(matches!(
            removal_effect_with_labels(&fewer, &labels, &gold, &RemovalConfig::default()),
            Err(Error::CoverageMismatch)
        ));
    }
}
