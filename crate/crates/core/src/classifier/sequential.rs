//! Two-stage sequential training.
//!
//! Stage 1 learns with the gold label of the previous line as a feature.
//! Stage 1 then labels each training document left to right, feeding its own
//! predictions forward, and stage 2 is trained on features built from those
//! predicted previous labels, which is what it will see at inference.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::linear::{train_linear, train_linear_with_summary, LinearModel, ScalingStats, TrainConfig, TrainSummary};
use crate::corpus::{AnnotatedDocument, Corpus, Label};
use crate::error::{Error, Result};
use crate::features::{
    document_features, fit_layout_edges, with_prev, FeatureConfig, SparseFeatureVector, TableTransitionModel,
};
use crate::WordVectors;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained classifier: shared feature configuration and scaling, plus the
/// stage-1 and stage-2 weight sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialModel {
    pub feature_config: FeatureConfig,
    pub scaling: ScalingStats,
    pub stage1: LinearModel,
    pub stage2: LinearModel,
    pub train_config: TrainConfig,
    /// Gold label shares of the training corpus.
    pub priors: BTreeMap<Label, f64>,
    pub summaries: Vec<TrainSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

fn check_trainable(corpus: &Corpus) -> Result<()> {
    if corpus.line_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if !corpus.fully_labeled() {
        return Err(Error::UnlabeledCorpus);
    }
    Ok(())
}

/// Fits the table model and layout bins on `corpus`, leaving the rest of
/// `cfg` untouched.
pub fn fit_feature_config(corpus: &Corpus, cfg: &FeatureConfig) -> Result<FeatureConfig> {
    let mut fitted = cfg.clone();
    fitted.layout_edges.clear();
    if fitted.use_table_layout {
        fitted.table_model = Some(TableTransitionModel::train_on_corpus(corpus));
    }
    fitted.validate()?;
    if fitted.use_table_layout {
        let mut values = Vec::with_capacity(corpus.line_count());
        for doc in corpus.documents() {
            for v in document_features(doc, &fitted)? {
                values.push(v.get("tls"));
            }
        }
        fitted.layout_edges = fit_layout_edges(&values, fitted.layout_bins);
    }
    Ok(fitted)
}

struct Prepared {
    /// Scaled line-local features per document.
    base: Vec<Vec<SparseFeatureVector>>,
    gold: Vec<Vec<Label>>,
    cfg: FeatureConfig,
    scaling: ScalingStats,
}

fn prepare(corpus: &Corpus, cfg: &FeatureConfig) -> Result<Prepared> {
    check_trainable(corpus)?;
    let cfg = fit_feature_config(corpus, cfg)?;
    let mut raw = Vec::with_capacity(corpus.len());
    let mut gold = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        raw.push(document_features(doc, &cfg)?);
        gold.push(doc.gold_labels().ok_or(Error::UnlabeledCorpus)?);
    }
    let scaling = ScalingStats::fit(raw.iter().flatten());
    let base = raw
        .iter()
        .map(|doc| doc.iter().map(|x| scaling.apply(x)).collect())
        .collect();
    Ok(Prepared {
        base,
        gold,
        cfg,
        scaling,
    })
}

fn examples_with_prev(p: &Prepared, prev_of: &[Vec<Label>]) -> Vec<(SparseFeatureVector, Label)> {
    examples_for(p, prev_of, |_| true)
}

fn examples_for(
    p: &Prepared,
    prev_of: &[Vec<Label>],
    include: impl Fn(usize) -> bool,
) -> Vec<(SparseFeatureVector, Label)> {
    let mut out = Vec::new();
    for (d, doc) in p.base.iter().enumerate().filter(|(d, _)| include(*d)) {
        for (i, x) in doc.iter().enumerate() {
            let x = if p.cfg.use_sequential {
                with_prev(x.clone(), i.checked_sub(1).map(|j| prev_of[d][j]))
            } else {
                x.clone()
            };
            out.push((x, p.gold[d][i]));
        }
    }
    out
}

/// Greedy left-to-right decoding over already scaled line-local features.
fn decode(model: &LinearModel, cfg: &FeatureConfig, base: &[SparseFeatureVector]) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::with_capacity(base.len());
    for (i, x) in base.iter().enumerate() {
        let label = if cfg.use_sequential {
            let prev = i.checked_sub(1).map(|j| out[j]);
            model.predict(&with_prev(x.clone(), prev))
        } else {
            model.predict(x)
        };
        out.push(label);
    }
    out
}

/// Stage 1 only: linear model trained with gold previous labels.
pub fn train_stage1(corpus: &Corpus, cfg: &FeatureConfig, tc: &TrainConfig) -> Result<SequentialModel> {
    let p = prepare(corpus, cfg)?;
    let (stage1, summary) = train_linear_with_summary(&examples_with_prev(&p, &p.gold), tc)?;
    Ok(SequentialModel {
        stage2: stage1.clone(),
        stage1,
        feature_config: p.cfg,
        scaling: p.scaling,
        train_config: tc.clone(),
        priors: priors_of(corpus),
        summaries: vec![summary],
    })
}

/// Stage 1 on gold previous labels, then stage 2 on stage-1 predictions
/// (plus `tc.extra_dagger_rounds` further rounds, each retrained on the
/// previous round's predictions). Without sequential features both stages
/// are the same model.
pub fn train_sequential(corpus: &Corpus, cfg: &FeatureConfig, tc: &TrainConfig) -> Result<SequentialModel> {
    let p = prepare(corpus, cfg)?;
    let (stage1, s1) = train_linear_with_summary(&examples_with_prev(&p, &p.gold), tc)?;
    let mut summaries = vec![s1];
    let mut stage2 = stage1.clone();
    if p.cfg.use_sequential {
        for round in 0..=tc.extra_dagger_rounds {
            let predicted: Vec<Vec<Label>> = if round == 0 && tc.cross_fit_folds >= 2 && p.base.len() >= 2 {
                cross_fitted_predictions(&p, tc)?
            } else {
                p.base.iter().map(|doc| decode(&stage2, &p.cfg, doc)).collect()
            };
            let (m, s) = train_linear_with_summary(&examples_with_prev(&p, &predicted), tc)?;
            summaries.push(s);
            stage2 = m;
        }
    }
    Ok(SequentialModel {
        feature_config: p.cfg,
        scaling: p.scaling,
        stage1,
        stage2,
        train_config: tc.clone(),
        priors: priors_of(corpus),
        summaries,
    })
}

/// Stage-1 predictions for every training document from a stage-1 model
/// trained on the other parts.
fn cross_fitted_predictions(p: &Prepared, tc: &TrainConfig) -> Result<Vec<Vec<Label>>> {
    let parts = tc.cross_fit_folds.min(p.base.len());
    let mut predicted = vec![Vec::new(); p.base.len()];
    for part in 0..parts {
        let model = train_linear(&examples_for(p, &p.gold, |d| d % parts != part), tc)?;
        for d in (part..p.base.len()).step_by(parts) {
            predicted[d] = decode(&model, &p.cfg, &p.base[d]);
        }
    }
    Ok(predicted)
}

fn priors_of(corpus: &Corpus) -> BTreeMap<Label, f64> {
    let shares = corpus.label_shares();
    Label::ALL.iter().map(|&l| (l, shares[l.index()])).collect()
}

impl SequentialModel {
    fn scaled_base(&self, doc: &AnnotatedDocument) -> Result<Vec<SparseFeatureVector>> {
        Ok(document_features(doc, &self.feature_config)?
            .iter()
            .map(|x| self.scaling.apply(x))
            .collect())
    }

    /// Greedy decoding with the given stage.
    pub fn predict_with(&self, doc: &AnnotatedDocument, stage: Stage) -> Result<Vec<Label>> {
        let base = self.scaled_base(doc)?;
        let model = match stage {
            Stage::One => &self.stage1,
            Stage::Two => &self.stage2,
        };
        Ok(decode(model, &self.feature_config, &base))
    }

    /// Stage-1 and stage-2 decodings from one feature extraction.
    pub fn predict_both(&self, doc: &AnnotatedDocument) -> Result<(Vec<Label>, Vec<Label>)> {
        let base = self.scaled_base(doc)?;
        Ok((
            decode(&self.stage1, &self.feature_config, &base),
            decode(&self.stage2, &self.feature_config, &base),
        ))
    }
}

/// Labels every line of `doc`, left to right, with stage 2.
pub fn predict_document(model: &SequentialModel, doc: &AnnotatedDocument) -> Result<Vec<Label>> {
    model.predict_with(doc, Stage::Two)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    feature_config: FeatureConfig,
    scaling_stats: ScalingStats,
    stage1_weights: BTreeMap<Label, Vec<(String, f64)>>,
    stage2_weights: BTreeMap<Label, Vec<(String, f64)>>,
    train_config: TrainConfig,
    table_model: Option<TableTransitionModel>,
    embedding: Option<WordVectors>,
    priors: BTreeMap<Label, f64>,
    summaries: Vec<TrainSummary>,
}

impl SequentialModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            feature_config: self.feature_config.clone(),
            scaling_stats: self.scaling.clone(),
            stage1_weights: self.stage1.to_sorted(),
            stage2_weights: self.stage2.to_sorted(),
            train_config: self.train_config.clone(),
            table_model: self.feature_config.table_model.clone(),
            embedding: self.feature_config.embedding.as_deref().cloned(),
            priors: self.priors.clone(),
            summaries: self.summaries.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let v: Version = serde_json::from_str(text)?;
        if v.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: v.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        let mut feature_config = file.feature_config;
        feature_config.table_model = file.table_model;
        feature_config.embedding = file.embedding.map(Arc::new);
        feature_config.validate()?;
        Ok(SequentialModel {
            feature_config,
            scaling: file.scaling_stats,
            stage1: LinearModel::from_sorted(&file.stage1_weights),
            stage2: LinearModel::from_sorted(&file.stage2_weights),
            train_config: file.train_config,
            priors: file.priors,
            summaries: file.summaries,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
