//! k-fold cross-validation of the sequential classifier and its baselines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ConfusionMatrix, PrfReport};
use crate::classifier::{baseline_clm, baseline_weighted_random, train_sequential, Stage, TrainConfig};
use crate::corpus::{split_folds, Corpus, Label};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub test_docs: Vec<String>,
    pub stage1: PrfReport,
    pub stage2: PrfReport,
}

/// Pooled (micro) reports across folds plus the per-fold breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    /// Final classifier (stage 2).
    pub pooled: PrfReport,
    pub pooled_stage1: PrfReport,
    pub weighted_random: PrfReport,
    pub clm: PrfReport,
    pub folds: Vec<FoldReport>,
}

struct FoldCounts {
    stage1: ConfusionMatrix,
    stage2: ConfusionMatrix,
    random: ConfusionMatrix,
    clm: ConfusionMatrix,
    report: FoldReport,
}

fn add_all(cm: &mut ConfusionMatrix, test: &Corpus, pred: &[Vec<Label>]) {
    for (doc, p) in test.documents().iter().zip(pred) {
        for (line, &l) in doc.lines.iter().zip(p) {
            cm.add(line.gold.expect("fully labeled"), l);
        }
    }
}

fn run_fold(
    train: &Corpus,
    test: &Corpus,
    fold: usize,
    cfg: &FeatureConfig,
    tc: &TrainConfig,
    seed: u64,
) -> Result<FoldCounts> {
    let model = train_sequential(train, cfg, tc)?;
    let mut stage1 = ConfusionMatrix::default();
    let mut stage2 = ConfusionMatrix::default();
    for doc in test.documents() {
        let (p1, p2) = model.predict_both(doc)?;
        for ((line, a), b) in doc.lines.iter().zip(p1).zip(p2) {
            let g = line.gold.expect("fully labeled");
            stage1.add(g, a);
            stage2.add(g, b);
        }
    }
    let mut random = ConfusionMatrix::default();
    // one stream per fold so folds stay independent of scheduling
    let fold_seed = seed.wrapping_add(fold as u64);
    add_all(
        &mut random,
        test,
        &baseline_weighted_random(test, &model.priors, fold_seed)?,
    );
    let mut clm = ConfusionMatrix::default();
    add_all(&mut clm, test, &baseline_clm(train, test)?);
    let report = FoldReport {
        fold,
        test_docs: test.documents().iter().map(|d| d.id.clone()).collect(),
        stage1: stage1.report(),
        stage2: stage2.report(),
    };
    Ok(FoldCounts {
        stage1,
        stage2,
        random,
        clm,
        report,
    })
}

/// Splits by document, trains on k-1 folds (table model, layout bins and
/// scaling included) and pools the held-out confusion counts.
pub fn cross_validate(corpus: &Corpus, cfg: &FeatureConfig, tc: &TrainConfig, k: usize, seed: u64) -> Result<CvReport> {
    if !corpus.fully_labeled() {
        return Err(Error::UnlabeledCorpus);
    }
    let split = split_folds(corpus, k, seed)?;
    let folds: Vec<FoldCounts> = (0..k)
        .into_par_iter()
        .map(|i| {
            let (train, test) = split.train_test(corpus, i);
            run_fold(&train, &test, i, cfg, tc, seed)
        })
        .collect::<Result<_>>()?;

    let mut pooled = [ConfusionMatrix::default(); 4];
    for f in &folds {
        for (acc, cm) in pooled.iter_mut().zip([&f.stage1, &f.stage2, &f.random, &f.clm]) {
            acc.merge(cm);
        }
    }
    Ok(CvReport {
        k,
        seed,
        pooled: pooled[1].report(),
        pooled_stage1: pooled[0].report(),
        weighted_random: pooled[2].report(),
        clm: pooled[3].report(),
        folds: folds.into_iter().map(|f| f.report).collect(),
    })
}

impl CvReport {
    pub fn stage_report(&self, stage: Stage) -> &PrfReport {
        match stage {
            Stage::One => &self.pooled_stage1,
            Stage::Two => &self.pooled,
        }
    }
}
