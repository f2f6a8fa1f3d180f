//! Per-line feature extraction.
//!
//! Five families feed the classifier, each under its own id prefix:
//!
//! | family     | ids                                                  |
//! |------------|------------------------------------------------------|
//! | n-gram     | `u=<tok>`, `b=<tok>_<tok>`                            |
//! | syntax     | `pos_ratio:<TAG>`, `pos_bi:<T>_<T>`, `symbol_ratio`   |
//! | layout     | `tls`, `tls_bin=<j>`                                 |
//! | embedding  | `emb:<k>`, `emb_cov`                                 |
//! | sequential | `prev=<LABEL>`, `prev=<BOS>`                         |
//!
//! plus the constant `bias`.

pub mod syntax;
pub mod table;
pub mod tokenize;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, Label};
use crate::embedding::line_vector;
use crate::error::{Error, Result};
use crate::WordVectors;

pub use syntax::{syntactic_features, tag_token, CoarseTag};
pub use table::{
    edit_distance, edit_sim, encode_line, encode_sn, levenshtein, table_layout_score, table_lm_prob, SnCode, SnSymbol,
    TableTransitionModel,
};
pub use tokenize::{is_numeral, tokenize, Token, TokenKind};

pub const BIAS: &str = "bias";
pub const BOS: &str = "<BOS>";

/// Feature id to weight. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseFeatureVector {
    entries: BTreeMap<String, f64>,
}

impl SparseFeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `id` to `w`, removing it when `w` is zero.
    ///
    /// Panics on a non-finite weight.
    pub fn set(&mut self, id: impl Into<String>, w: f64) {
        assert!(w.is_finite(), "feature weights must be finite");
        let id = id.into();
        if w == 0.0 {
            self.entries.remove(&id);
        } else {
            self.entries.insert(id, w);
        }
    }

    pub fn get(&self, id: &str) -> f64 {
        self.entries.get(id).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Adds all entries of `other`; ids are assumed disjoint, later wins.
    pub fn extend(&mut self, other: SparseFeatureVector) {
        self.entries.extend(other.entries);
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.entries
    }
}

impl FromIterator<(String, f64)> for SparseFeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut v = SparseFeatureVector::new();
        for (k, w) in iter {
            v.set(k, w);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bias,
    Ngram,
    Syntax,
    Layout,
    Embedding,
    Sequential,
}

impl Family {
    /// Family owning a feature id, decided by its prefix.
    pub fn of(id: &str) -> Option<Family> {
        if id == BIAS {
            Some(Family::Bias)
        } else if id.starts_with("u=") || id.starts_with("b=") {
            Some(Family::Ngram)
        } else if id.starts_with("pos_ratio:") || id.starts_with("pos_bi:") || id == "symbol_ratio" {
            Some(Family::Syntax)
        } else if id == "tls" || id.starts_with("tls_bin=") {
            Some(Family::Layout)
        } else if id.starts_with("emb:") || id == "emb_cov" {
            Some(Family::Embedding)
        } else if id.starts_with("prev=") {
            Some(Family::Sequential)
        } else {
            None
        }
    }
}

/// Real-valued (non-indicator) features; these are min-max scaled before
/// training.
pub fn is_real_valued(id: &str) -> bool {
    id.starts_with("pos_ratio:") || id == "symbol_ratio" || id == "tls" || id.starts_with("emb:") || id == "emb_cov"
}

/// Which families are on, plus the fitted resources they need.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub use_ngram: bool,
    pub use_syntax: bool,
    pub use_table_layout: bool,
    pub use_embedding: bool,
    pub use_sequential: bool,
    pub layout_bins: usize,
    /// Interior edges of the equal-frequency layout bins; fitted on training data.
    #[serde(default)]
    pub layout_edges: Vec<f64>,
    /// Multiply by the raw S/N edit distance instead of the similarity.
    #[serde(default)]
    pub raw_edit_distance: bool,
    #[serde(skip)]
    pub embedding: Option<Arc<WordVectors>>,
    #[serde(skip)]
    pub table_model: Option<TableTransitionModel>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::none()
    }
}

impl PartialEq for FeatureConfig {
    fn eq(&self, other: &Self) -> bool {
        self.flags() == other.flags()
            && self.layout_bins == other.layout_bins
            && self.layout_edges == other.layout_edges
            && self.raw_edit_distance == other.raw_edit_distance
            && self.table_model == other.table_model
            && match (&self.embedding, &other.embedding) {
                (None, None) => true,
                (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
                _ => false,
            }
    }
}

impl FeatureConfig {
    /// Every family off; only the bias remains.
    pub fn none() -> Self {
        FeatureConfig {
            use_ngram: false,
            use_syntax: false,
            use_table_layout: false,
            use_embedding: false,
            use_sequential: false,
            layout_bins: 10,
            layout_edges: Vec::new(),
            raw_edit_distance: false,
            embedding: None,
            table_model: None,
        }
    }

    pub fn ngram_only() -> Self {
        FeatureConfig {
            use_ngram: true,
            ..Self::none()
        }
    }

    /// All families except embedding, which needs trained vectors.
    pub fn standard() -> Self {
        FeatureConfig {
            use_ngram: true,
            use_syntax: true,
            use_table_layout: true,
            use_sequential: true,
            ..Self::none()
        }
    }

    pub fn full(embedding: Arc<WordVectors>) -> Self {
        FeatureConfig {
            use_embedding: true,
            embedding: Some(embedding),
            ..Self::standard()
        }
    }

    pub fn flags(&self) -> [bool; 5] {
        [
            self.use_ngram,
            self.use_syntax,
            self.use_table_layout,
            self.use_embedding,
            self.use_sequential,
        ]
    }

    /// Ablation string, e.g. `"NPTS"`: N-gram, Embedding, Parsing, Table layout, Sequential.
    pub fn short_name(&self) -> String {
        let mut s = String::new();
        for (on, c) in [
            (self.use_ngram, 'N'),
            (self.use_embedding, 'E'),
            (self.use_syntax, 'P'),
            (self.use_table_layout, 'T'),
            (self.use_sequential, 'S'),
        ] {
            if on {
                s.push(c);
            }
        }
        if s.is_empty() {
            s.push_str("bias");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.use_embedding && self.embedding.is_none() {
            return Err(Error::ConfigViolation("embedding features need word vectors".into()));
        }
        if self.use_table_layout && self.table_model.is_none() {
            return Err(Error::ConfigViolation(
                "table layout features need a table transition model".into(),
            ));
        }
        if self.layout_bins == 0 {
            return Err(Error::ConfigViolation("layout_bins must be positive".into()));
        }
        Ok(())
    }
}

/// Binary unigram and bigram indicators over lower-cased surfaces, with
/// `<s>`/`</s>` boundary bigrams.
pub fn ngram_features(tokens: &[Token]) -> SparseFeatureVector {
    let mut v = SparseFeatureVector::new();
    let lower: Vec<String> = tokens.iter().map(Token::lower).collect();
    for t in &lower {
        v.set(format!("u={t}"), 1.0);
    }
    let mut prev = "<s>";
    for t in &lower {
        v.set(format!("b={prev}_{t}"), 1.0);
        prev = t;
    }
    v.set(format!("b={prev}_</s>"), 1.0);
    v
}

/// Equal-frequency bin edges (interior cut points) for `layout_bins` bins.
pub fn fit_layout_edges(values: &[f64], bins: usize) -> Vec<f64> {
    if values.is_empty() || bins <= 1 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (1..bins)
        .map(|j| {
            let pos = j * sorted.len() / bins;
            sorted[pos.min(sorted.len() - 1)]
        })
        .collect()
}

fn layout_bin(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|e| *e <= x)
}

/// Line-local features of one document: everything except `prev=`.
///
/// Extraction tokenizes each line once, so the per-line vectors of a whole
/// document come out of a single pass.
pub fn document_features(doc: &AnnotatedDocument, cfg: &FeatureConfig) -> Result<Vec<SparseFeatureVector>> {
    cfg.validate()?;
    let tokens: Vec<Vec<Token>> = doc.lines.iter().map(|l| tokenize(&l.text)).collect();
    let codes: Vec<SnCode> = if cfg.use_table_layout {
        tokens.iter().map(|t| encode_sn(t)).collect()
    } else {
        Vec::new()
    };
    let mut out = Vec::with_capacity(doc.lines.len());
    for (i, toks) in tokens.iter().enumerate() {
        let mut v = SparseFeatureVector::new();
        v.set(BIAS, 1.0);
        if cfg.use_ngram {
            v.extend(ngram_features(toks));
        }
        if cfg.use_syntax {
            v.extend(syntactic_features(toks));
        }
        if cfg.use_table_layout {
            let model = cfg.table_model.as_ref().expect("validated");
            let prev = i.checked_sub(1).map(|p| &codes[p]);
            let tls = table::layout_score_codes(&codes[i], prev, model, cfg.raw_edit_distance);
            v.set("tls", tls);
            if !cfg.layout_edges.is_empty() {
                v.set(format!("tls_bin={}", layout_bin(&cfg.layout_edges, tls)), 1.0);
            }
        }
        if cfg.use_embedding {
            let wv = cfg.embedding.as_ref().expect("validated");
            let words: Vec<String> = toks.iter().map(Token::lower).collect();
            let lv = line_vector(&words, wv);
            for (k, x) in lv.values.iter().enumerate() {
                v.set(format!("emb:{k}"), *x);
            }
            v.set("emb_cov", lv.coverage);
        }
        out.push(v);
    }
    Ok(out)
}

/// Adds the sequential indicator to a line-local vector.
pub fn with_prev(mut base: SparseFeatureVector, prev: Option<Label>) -> SparseFeatureVector {
    let name = prev.map_or(BOS, Label::as_str);
    base.set(format!("prev={name}"), 1.0);
    base
}

/// Features of line `i` of `doc`. `prev_label` must be given exactly when
/// sequential features are on and `i > 0`.
pub fn assemble_features(
    doc: &AnnotatedDocument,
    i: usize,
    cfg: &FeatureConfig,
    prev_label: Option<Label>,
) -> Result<SparseFeatureVector> {
    if i >= doc.lines.len() {
        return Err(Error::InvalidArgument(format!(
            "line index {i} out of range for {} lines",
            doc.lines.len()
        )));
    }
    let needs_prev = cfg.use_sequential && i > 0;
    if needs_prev != prev_label.is_some() {
        return Err(Error::ConfigViolation(if needs_prev {
            format!("line {i} needs the previous label")
        } else {
            format!("line {i} takes no previous label")
        }));
    }
    // previous line matters for the layout score, so extract from a two-line window
    let start = i.saturating_sub(1);
    let window = AnnotatedDocument::new(doc.id.clone(), doc.lines[start..=i].to_vec());
    let mut v = document_features(&window, cfg)?.pop().expect("window is nonempty");
    if cfg.use_sequential {
        v = with_prev(v, prev_label);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LineRecord;
    use crate::embedding::WordVectors;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<Token> {
        tokenize(&words.join(" "))
    }

    fn doc(lines: &[&str]) -> AnnotatedDocument {
        AnnotatedDocument::new("d", lines.iter().map(|l| LineRecord::new(*l, None)).collect())
    }

    #[test]
    fn ngram_definition() {
        let v = ngram_features(&toks(&["for", "i"]));
        let ids: Vec<&str> = v.ids().collect();
        assert_eq!(ids, vec!["b=<s>_for", "b=for_i", "b=i_</s>", "u=for", "u=i"]);
        assert!(v.iter().all(|(_, w)| w == 1.0));
    }

    #[test]
    fn ngram_empty_and_repeats() {
        let v = ngram_features(&[]);
        assert_eq!(v.ids().collect::<Vec<_>>(), vec!["b=<s>_</s>"]);
        let v = ngram_features(&toks(&["x", "X"]));
        assert_eq!(v.get("u=x"), 1.0);
        assert_eq!(v.get("b=x_x"), 1.0);
    }

    #[test]
    fn all_off_is_bias_only() {
        let d = doc(&["anything at all"]);
        let v = assemble_features(&d, 0, &FeatureConfig::none(), None).unwrap();
        assert_eq!(v.ids().collect::<Vec<_>>(), vec![BIAS]);
    }

    #[test]
    fn ngram_only_composition() {
        let d = doc(&["x y"]);
        let v = assemble_features(&d, 0, &FeatureConfig::ngram_only(), None).unwrap();
        let mut expected = ngram_features(&toks(&["x", "y"]));
        expected.set(BIAS, 1.0);
        assert_eq!(v, expected);
    }

    #[test]
    fn sequential_boundary_and_contract() {
        let cfg = FeatureConfig {
            use_sequential: true,
            ..FeatureConfig::none()
        };
        let d = doc(&["a", "b"]);
        let v = assemble_features(&d, 0, &cfg, None).unwrap();
        assert!(v.contains("prev=<BOS>"));
        let v = assemble_features(&d, 1, &cfg, Some(Label::Code)).unwrap();
        assert!(v.contains("prev=CODE"));
        assert!(matches!(
            assemble_features(&d, 1, &cfg, None),
            Err(Error::ConfigViolation(_))
        ));
        assert!(matches!(
            assemble_features(&d, 0, &cfg, Some(Label::Text)),
            Err(Error::ConfigViolation(_))
        ));
        assert!(matches!(
            assemble_features(&d, 1, &FeatureConfig::none(), Some(Label::Text)),
            Err(Error::ConfigViolation(_))
        ));
    }

    #[test]
    fn missing_resources_violate_config() {
        let d = doc(&["a"]);
        let cfg = FeatureConfig {
            use_table_layout: true,
            ..FeatureConfig::none()
        };
        assert!(matches!(
            assemble_features(&d, 0, &cfg, None),
            Err(Error::ConfigViolation(_))
        ));
        let cfg = FeatureConfig {
            use_embedding: true,
            ..FeatureConfig::none()
        };
        assert!(matches!(
            assemble_features(&d, 0, &cfg, None),
            Err(Error::ConfigViolation(_))
        ));
    }

    #[test]
    fn layout_and_bins() {
        let model = TableTransitionModel::train(&["SNN".parse::<SnCode>().unwrap()]);
        let mut cfg = FeatureConfig {
            use_table_layout: true,
            table_model: Some(model.clone()),
            ..FeatureConfig::none()
        };
        cfg.layout_edges = vec![0.01, 0.1];
        let d = doc(&["Row 1 2", "Row 3 4", "plain words only here"]);
        let v1 = assemble_features(&d, 1, &cfg, None).unwrap();
        assert_eq!(v1.get("tls"), table_layout_score(&d, 1, &model, false));
        assert_eq!(v1.get("tls_bin=2"), 1.0);
        let v2 = assemble_features(&d, 2, &cfg, None).unwrap();
        assert_eq!(v2.get("tls_bin=0"), 1.0);
        assert!(v2.get("tls") < v1.get("tls"));
    }

    #[test]
    fn embedding_features() {
        let wv = WordVectors::from_rows(
            3,
            vec![("a".into(), vec![1.0, 0.0, 0.0]), ("b".into(), vec![0.0, 1.0, 0.0])],
        )
        .unwrap();
        let cfg = FeatureConfig {
            use_embedding: true,
            embedding: Some(Arc::new(wv)),
            ..FeatureConfig::none()
        };
        let v = assemble_features(&doc(&["A zzz"]), 0, &cfg, None).unwrap();
        assert_eq!(v.get("emb:0"), 1.0);
        assert!(!v.contains("emb:1"));
        assert_eq!(v.get("emb_cov"), 0.5);
    }

    #[test]
    fn bin_edges_are_quantiles() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(fit_layout_edges(&values, 4), vec![25.0, 50.0, 75.0]);
        assert!(fit_layout_edges(&[], 4).is_empty());
        assert_eq!(layout_bin(&[25.0, 50.0, 75.0], 10.0), 0);
        assert_eq!(layout_bin(&[25.0, 50.0, 75.0], 50.0), 2);
        assert_eq!(layout_bin(&[25.0, 50.0, 75.0], 99.0), 3);
    }

    fn full_cfg() -> FeatureConfig {
        let wv = WordVectors::from_rows(2, vec![("x".into(), vec![0.5, -1.0]), ("=".into(), vec![1.0, 1.0])]).unwrap();
        let model = TableTransitionModel::train(&["SNN".parse::<SnCode>().unwrap()]);
        FeatureConfig {
            table_model: Some(model),
            layout_edges: vec![0.001, 0.1],
            ..FeatureConfig::full(Arc::new(wv))
        }
    }

    proptest! {
        #[test]
        fn ids_belong_to_exactly_one_family(lines in proptest::collection::vec("[a-z0-9=()_ .,%+-]{0,24}", 1..5), prev in 0usize..5) {
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let d = doc(&refs);
            let cfg = full_cfg();
            let i = d.len() - 1;
            let p = if i > 0 { Some(Label::ALL[prev]) } else { None };
            let v = assemble_features(&d, i, &cfg, p).unwrap();
            let again = assemble_features(&d, i, &cfg, p).unwrap();
            prop_assert_eq!(&v, &again);
            for (id, w) in v.iter() {
                prop_assert!(Family::of(id).is_some(), "unowned id {}", id);
                prop_assert!(w.is_finite() && w != 0.0);
            }
        }
    }
}
