use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use linesift::classifier::{train_sequential, SequentialModel, Stage, TrainConfig};
use linesift::corpus::{
    generate_topic_corpus, load_corpus, parse_label, SynthConfig, TopicCorpusConfig, TABLE2_SLIDES_RATIOS,
};
use linesift::downstream::GoldClustering;
use linesift::downstream::{removal_effect_report, remove_unnatural, RemovalConfig};
use linesift::embedding::{load_vectors, save_vectors, train_skipgram, SkipGramConfig};
use linesift::evaluation::{cross_validate, score, CvReport, PrfReport};
use linesift::features::{tokenize, FeatureConfig};
use linesift::{AnnotatedDocument, Corpus, Label, LineRecord, WordVectors};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::{
    ClusterCmd, EmbedTrainCmd, EvalCmd, PredictCmd, StageArg, SynthSlidesCmd, SynthTopicsCmd, TrainCmd, TrainOpts,
};
use crate::error::{CliError, CliResult};
use crate::output::{
    ensure_parent, parent_dir, write_corpus, write_csv, write_json, FeatureFlags, RunConfig, REPORT_CSV, REPORT_JSON,
};

fn load(path: &Path) -> CliResult<Corpus> {
    let c = load_corpus(path)?;
    info!("{}: {} documents, {} lines", path.display(), c.len(), c.line_count());
    Ok(c)
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Stage {
        match s {
            StageArg::One => Stage::One,
            StageArg::Two => Stage::Two,
        }
    }
}

/// Comma-separated label names, case-insensitive.
pub fn parse_keep(names: &[String]) -> CliResult<BTreeSet<Label>> {
    let mut keep = BTreeSet::new();
    for n in names {
        let n = n.trim();
        if n.is_empty() {
            continue;
        }
        keep.insert(parse_label(&n.to_ascii_uppercase()).map_err(|e| CliError::Config(e.to_string()))?);
    }
    if keep.is_empty() {
        return Err(CliError::Config("--keep needs at least one label".into()));
    }
    Ok(keep)
}

/// `LABEL=share` pairs for the unnatural labels.
pub fn parse_ratios(items: &[String]) -> CliResult<BTreeMap<Label, f64>> {
    let mut ratios = BTreeMap::new();
    for item in items {
        let (l, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("ratio {item:?} is not LABEL=share")))?;
        let label = parse_label(&l.trim().to_ascii_uppercase()).map_err(|e| CliError::Config(e.to_string()))?;
        let share: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("ratio {item:?} has a non-numeric share")))?;
        if ratios.insert(label, share).is_some() {
            return Err(CliError::Config(format!("label {label} given twice in --ratios")));
        }
    }
    Ok(ratios)
}

pub fn feature_config(opts: &TrainOpts) -> CliResult<FeatureConfig> {
    let vectors: Option<Arc<WordVectors>> = match &opts.embedding {
        Some(p) => Some(Arc::new(load_vectors(p)?)),
        None => None,
    };
    let mut cfg = match &opts.features {
        None => FeatureConfig {
            use_embedding: vectors.is_some(),
            ..FeatureConfig::standard()
        },
        Some(names) => {
            let mut cfg = FeatureConfig::none();
            for n in names {
                match n.trim().to_ascii_lowercase().as_str() {
                    "ngram" => cfg.use_ngram = true,
                    "syntax" => cfg.use_syntax = true,
                    "layout" => cfg.use_table_layout = true,
                    "embedding" => cfg.use_embedding = true,
                    "sequential" => cfg.use_sequential = true,
                    "none" | "" => {}
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown feature family {other:?} (expected ngram, syntax, layout, embedding, sequential or none)"
                        )))
                    }
                }
            }
            cfg
        }
    };
    if cfg.use_embedding {
        if vectors.is_none() {
            return Err(CliError::Config("embedding features need --embedding".into()));
        }
        cfg.embedding = vectors;
    } else if vectors.is_some() {
        warn!("--embedding is ignored because the embedding features are off");
    }
    cfg.layout_bins = opts.layout_bins;
    cfg.raw_edit_distance = opts.raw_edit_distance;
    Ok(cfg)
}

pub fn train_config(opts: &TrainOpts, seed: u64) -> CliResult<TrainConfig> {
    let tc = TrainConfig {
        c: opts.c,
        epochs: opts.epochs,
        seed,
        t0: opts.t0,
        extra_dagger_rounds: opts.extra_dagger_rounds,
        cross_fit_folds: opts.cross_fit_folds,
    };
    tc.validate()?;
    Ok(tc)
}

fn check_folds(k: usize) -> CliResult<()> {
    if k < 2 {
        return Err(CliError::Config(format!("--cv needs at least 2 folds, got {k}")));
    }
    Ok(())
}

fn prf_csv_rows(method: &str, r: &PrfReport, out: &mut String) -> usize {
    let mut n = 0;
    for line in r.to_csv().lines().skip(1) {
        out.push_str(method);
        out.push(',');
        out.push_str(line);
        out.push('\n');
        n += 1;
    }
    n
}

/// One block of per-class rows per method.
fn methods_csv(methods: &[(&str, &PrfReport)]) -> (String, usize) {
    let mut s = String::from("method,label,precision,recall,f1,support\n");
    let rows = methods.iter().map(|(m, r)| prf_csv_rows(m, r, &mut s)).sum();
    (s, rows)
}

fn cv_outputs(report: &CvReport, dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let json = dir.join(REPORT_JSON);
    let csv = dir.join(REPORT_CSV);
    write_json(&json, report)?;
    let (text, rows) = methods_csv(&[
        ("proposed", &report.pooled),
        ("stage1", &report.pooled_stage1),
        ("weighted_random", &report.weighted_random),
        ("clm", &report.clm),
    ]);
    write_csv(&csv, &text, rows)?;
    Ok((json, csv))
}

fn print_cv(report: &CvReport) {
    println!("{}-fold cross-validation (pooled)", report.k);
    for (name, r) in [
        ("proposed", &report.pooled),
        ("stage 1 only", &report.pooled_stage1),
        ("weighted random", &report.weighted_random),
        ("character LM", &report.clm),
    ] {
        println!("\n[{name}]\n{}", r.to_table());
    }
}

pub fn train(cmd: &TrainCmd, seed: u64) -> CliResult<()> {
    let corpus = load(&cmd.corpus)?;
    let cfg = feature_config(&cmd.opts)?;
    let tc = train_config(&cmd.opts, seed)?;
    let dir = cmd.out_dir.clone().unwrap_or_else(|| parent_dir(&cmd.out));
    let mut rc = RunConfig::new("train", seed)
        .input("corpus", &cmd.corpus)
        .output("model", &cmd.out);
    if let Some(p) = &cmd.opts.embedding {
        rc = rc.input("embedding", p);
    }
    rc.features = Some(FeatureFlags::from(&cfg));
    rc.train = Some(tc.clone());
    rc.cv_folds = cmd.cv;

    if let Some(k) = cmd.cv {
        check_folds(k)?;
        info!("cross-validating with {k} folds ({} features)", cfg.short_name());
        let report = cross_validate(&corpus, &cfg, &tc, k, seed)?;
        let (json, csv) = cv_outputs(&report, &dir)?;
        print_cv(&report);
        rc = rc.output("report_json", &json).output("report_csv", &csv);
    }

    info!(
        "training on all {} documents ({} features)",
        corpus.len(),
        cfg.short_name()
    );
    let model = train_sequential(&corpus, &cfg, &tc)?;
    crate::output::write_text(&cmd.out, &model.to_json())?;
    let back = SequentialModel::load(&cmd.out).map_err(|e| CliError::Validation {
        path: cmd.out.clone(),
        message: e.to_string(),
    })?;
    if back != model {
        return Err(CliError::Validation {
            path: cmd.out.clone(),
            message: "model differs after reading it back".into(),
        });
    }
    let rc_path = rc.write(&dir)?;
    info!("wrote {} and {}", cmd.out.display(), rc_path.display());
    Ok(())
}

fn predict_all(model: &SequentialModel, corpus: &Corpus, stage: Stage) -> CliResult<Vec<Vec<Label>>> {
    Ok(corpus
        .documents()
        .par_iter()
        .map(|d| model.predict_with(d, stage))
        .collect::<linesift::Result<_>>()?)
}

pub fn predict(cmd: &PredictCmd, seed: u64) -> CliResult<()> {
    let model = SequentialModel::load(&cmd.model)?;
    let corpus = load(&cmd.corpus)?;
    let keep = parse_keep(&cmd.keep)?;
    let labels = predict_all(&model, &corpus, cmd.stage.into())?;

    let labeled: Vec<AnnotatedDocument> = corpus
        .documents()
        .iter()
        .zip(&labels)
        .map(|(d, ls)| {
            let lines = d
                .lines
                .iter()
                .zip(ls)
                .map(|(l, &y)| LineRecord::labeled(l.text.clone(), y))
                .collect();
            AnnotatedDocument::new(d.id.clone(), lines)
        })
        .collect();
    let mut counts = [0usize; 5];
    for &l in labels.iter().flatten() {
        counts[l.index()] += 1;
    }
    info!(
        "predicted {}",
        Label::ALL
            .iter()
            .map(|l| format!("{}={}", l, counts[l.index()]))
            .collect::<Vec<_>>()
            .join(" ")
    );

    let mut rc = RunConfig::new("predict", seed)
        .input("model", &cmd.model)
        .input("corpus", &cmd.corpus)
        .output("labeled", &cmd.out)
        .param("stage", if cmd.stage == StageArg::One { 1 } else { 2 });

    if let Some(clean_path) = &cmd.clean {
        let cleaned: Vec<AnnotatedDocument> = labeled
            .iter()
            .zip(&labels)
            .map(|(d, ls)| remove_unnatural(d, ls, &keep))
            .collect::<linesift::Result<_>>()?;
        let kept: usize = cleaned.iter().map(AnnotatedDocument::len).sum();
        write_corpus(clean_path, &Corpus::new(cleaned)?)?;
        info!(
            "kept {kept} of {} lines in {}",
            corpus.line_count(),
            clean_path.display()
        );
        rc = rc.output("cleaned", clean_path).param("keep", &keep);
    }
    write_corpus(&cmd.out, &Corpus::new(labeled)?)?;
    rc.write(&parent_dir(&cmd.out))?;
    Ok(())
}

/// Scores of a fixed model on a labeled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvalReport {
    pub stage1: PrfReport,
    pub stage2: PrfReport,
}

pub fn eval(cmd: &EvalCmd, seed: u64) -> CliResult<()> {
    if let Some(t) = cmd.min_macro_f1 {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Config(format!(
                "--min-macro-f1 is a fraction in [0, 1], got {t}"
            )));
        }
    }
    let corpus = load(&cmd.corpus)?;
    if !corpus.fully_labeled() {
        return Err(linesift::Error::UnlabeledCorpus.into());
    }
    let mut rc = RunConfig::new("eval", seed).input("corpus", &cmd.corpus);
    let stage: Stage = cmd.stage.into();

    let chosen = if let Some(model_path) = &cmd.model {
        rc = rc.input("model", model_path);
        let model = SequentialModel::load(model_path)?;
        let both: Vec<(Vec<Label>, Vec<Label>)> = corpus
            .documents()
            .par_iter()
            .map(|d| model.predict_both(d))
            .collect::<linesift::Result<_>>()?;
        let gold: Vec<Label> = corpus
            .documents()
            .iter()
            .flat_map(|d| d.gold_labels().expect("labeled"))
            .collect();
        let p1: Vec<Label> = both.iter().flat_map(|(a, _)| a.iter().copied()).collect();
        let p2: Vec<Label> = both.iter().flat_map(|(_, b)| b.iter().copied()).collect();
        let report = ModelEvalReport {
            stage1: score(&gold, &p1)?.1,
            stage2: score(&gold, &p2)?.1,
        };
        println!(
            "[stage 1]\n{}\n[stage 2]\n{}",
            report.stage1.to_table(),
            report.stage2.to_table()
        );
        if let Some(dir) = &cmd.out_dir {
            let json = dir.join(REPORT_JSON);
            let csv = dir.join(REPORT_CSV);
            write_json(&json, &report)?;
            let (text, rows) = methods_csv(&[("stage1", &report.stage1), ("stage2", &report.stage2)]);
            write_csv(&csv, &text, rows)?;
            rc = rc.output("report_json", &json).output("report_csv", &csv);
        }
        match stage {
            Stage::One => report.stage1,
            Stage::Two => report.stage2,
        }
    } else {
        let k = cmd.cv.expect("clap requires --model or --cv");
        check_folds(k)?;
        let cfg = feature_config(&cmd.opts)?;
        let tc = train_config(&cmd.opts, seed)?;
        rc.features = Some(FeatureFlags::from(&cfg));
        rc.train = Some(tc.clone());
        rc.cv_folds = Some(k);
        let report = cross_validate(&corpus, &cfg, &tc, k, seed)?;
        print_cv(&report);
        if let Some(dir) = &cmd.out_dir {
            let (json, csv) = cv_outputs(&report, dir)?;
            rc = rc.output("report_json", &json).output("report_csv", &csv);
        }
        report.stage_report(stage).clone()
    };

    if let Some(dir) = &cmd.out_dir {
        rc = rc.param("stage", if stage == Stage::One { 1 } else { 2 });
        if let Some(t) = cmd.min_macro_f1 {
            rc = rc.param("min_macro_f1", t);
        }
        rc.write(dir)?;
    }
    let found = chosen.macro_f1_unnatural / 100.0;
    if let Some(required) = cmd.min_macro_f1 {
        if found < required {
            return Err(CliError::Threshold { found, required });
        }
        info!("macro-F1 {found:.4} meets the threshold {required:.4}");
    }
    Ok(())
}

pub fn cluster(cmd: &ClusterCmd, seed: u64) -> CliResult<()> {
    if cmd.k.is_empty() || cmd.schemes.is_empty() {
        return Err(CliError::Config("--k and --schemes need at least one value".into()));
    }
    if cmd.k.contains(&0) {
        return Err(CliError::Config("--k values must be positive".into()));
    }
    let model = SequentialModel::load(&cmd.model)?;
    let corpus = load(&cmd.corpus)?;
    let gold = GoldClustering::load(&cmd.gold)?;
    let cfg = RemovalConfig {
        k_values: cmd.k.clone(),
        schemes: cmd.schemes.clone(),
        keep: parse_keep(&cmd.keep)?,
        max_iters: cmd.max_iters,
        seed,
        sim_aic: cmd.sim_aic,
    };
    let report = removal_effect_report(&corpus, &model, &gold, &cfg)?;

    let json = cmd.out_dir.join(REPORT_JSON);
    let csv = cmd.out_dir.join(REPORT_CSV);
    write_json(&json, &report)?;
    write_csv(&csv, &report.to_csv(), report.rows.len())?;

    println!(
        "removed {} of {} lines; {} settings: {} better, {} worse, {} tied",
        report.removed_lines,
        report.total_lines,
        report.deltas.len(),
        report.summary.gains,
        report.summary.losses,
        report.summary.ties
    );
    println!(
        "mean delta {:+.4}, max gain {:+.4}, mean gain {:.4}, mean loss {:.4}",
        report.summary.mean_delta, report.summary.max_gain, report.summary.mean_gain, report.summary.mean_loss
    );
    if let Some(aic) = &report.aic {
        println!(
            "AIC original {:.2} (a={:.4}, b={:.4}), removed {:.2} (a={:.4}, b={:.4}), change {:+.2}",
            aic.original.aic,
            aic.original.intercept,
            aic.original.slope,
            aic.removed.aic,
            aic.removed.intercept,
            aic.removed.slope,
            aic.improvement
        );
    }

    let mut rc = RunConfig::new("cluster", seed)
        .input("model", &cmd.model)
        .input("corpus", &cmd.corpus)
        .input("gold", &cmd.gold)
        .output("report_json", &json)
        .output("report_csv", &csv);
    rc.removal = Some(cfg);
    rc.write(&cmd.out_dir)?;
    Ok(())
}

pub fn synth_slides(cmd: &SynthSlidesCmd, seed: u64) -> CliResult<()> {
    let ratios = match &cmd.ratios {
        Some(items) => parse_ratios(items)?,
        None => TABLE2_SLIDES_RATIOS.into_iter().collect(),
    };
    let cfg = SynthConfig {
        min_lines: cmd.min_lines,
        max_lines: cmd.max_lines,
        min_block_len: cmd.min_block_len,
        ..SynthConfig::new(cmd.docs, ratios.clone(), seed)
    };
    let corpus = cfg.generate()?;
    write_corpus(&cmd.out, &corpus)?;
    info!(
        "wrote {} documents, {} lines to {}",
        corpus.len(),
        corpus.line_count(),
        cmd.out.display()
    );
    RunConfig::new("synth slides", seed)
        .output("corpus", &cmd.out)
        .param("docs", cmd.docs)
        .param("ratios", &ratios)
        .param("min_lines", cmd.min_lines)
        .param("max_lines", cmd.max_lines)
        .param("min_block_len", cmd.min_block_len)
        .write(&parent_dir(&cmd.out))?;
    Ok(())
}

pub fn synth_topics(cmd: &SynthTopicsCmd, seed: u64) -> CliResult<()> {
    let cfg = TopicCorpusConfig {
        n_topics: cmd.topics,
        docs_per_topic: cmd.docs_per_topic,
        shared_blocks: cmd.shared_blocks,
        shared_block_lines: cmd.shared_block_lines,
        blocks_per_doc: cmd.blocks_per_doc,
        off_topic_rate: cmd.off_topic_rate,
        seed,
        ..TopicCorpusConfig::default()
    };
    let (corpus, gold) = generate_topic_corpus(&cfg)?;
    write_corpus(&cmd.out, &corpus)?;
    write_json(&cmd.gold_out, &gold)?;
    info!("wrote {} documents in {} topics", corpus.len(), gold.k());
    RunConfig::new("synth topics", seed)
        .output("corpus", &cmd.out)
        .output("gold", &cmd.gold_out)
        .param("topics", cmd.topics)
        .param("docs_per_topic", cmd.docs_per_topic)
        .param("prose_lines", cfg.prose_lines)
        .param("shared_blocks", cmd.shared_blocks)
        .param("shared_block_lines", cmd.shared_block_lines)
        .param("blocks_per_doc", cmd.blocks_per_doc)
        .param("off_topic_rate", cmd.off_topic_rate)
        .write(&parent_dir(&cmd.out))?;
    Ok(())
}

/// Lower-cased tokens of every line, one sentence per line.
pub fn sentences(corpus: &Corpus) -> Vec<Vec<String>> {
    corpus
        .documents()
        .iter()
        .flat_map(|d| &d.lines)
        .map(|l| tokenize(&l.text).iter().map(|t| t.lower()).collect())
        .collect()
}

pub fn embed_train(cmd: &EmbedTrainCmd, seed: u64) -> CliResult<()> {
    let corpus = load(&cmd.corpus)?;
    let cfg = SkipGramConfig {
        dim: cmd.dim,
        window: cmd.window,
        min_count: cmd.min_count,
        negatives: cmd.negatives,
        epochs: cmd.epochs,
        learning_rate: cmd.learning_rate,
        seed,
    };
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(CliError::Config("--learning-rate must be positive".into()));
    }
    let wv: WordVectors = train_skipgram(&sentences(&corpus), &cfg)?;
    ensure_parent(&cmd.out)?;
    save_vectors(&wv, &cmd.out)?;
    let back: WordVectors = load_vectors(&cmd.out).map_err(|e| CliError::Validation {
        path: cmd.out.clone(),
        message: e.to_string(),
    })?;
    if back != wv {
        return Err(CliError::Validation {
            path: cmd.out.clone(),
            message: "vectors differ after reading them back".into(),
        });
    }
    info!(
        "wrote {} vectors of dimension {} to {}",
        wv.vocab_size(),
        wv.dimension(),
        cmd.out.display()
    );
    RunConfig::new("embed train", seed)
        .input("corpus", &cmd.corpus)
        .output("vectors", &cmd.out)
        .param("skipgram", &cfg)
        .write(&parent_dir(&cmd.out))?;
    Ok(())
}
