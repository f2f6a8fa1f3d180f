//! Label taxonomy, the annotated document model and its JSONL format.

mod synth;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng;

pub use synth::{
    generate_synthetic_corpus, generate_topic_corpus, SynthConfig, TopicCorpusConfig, TABLE2_SLIDES_RATIOS,
};

/// Line category. The declaration order is the tie-break order used by every
/// argmax in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Text,
    Table,
    Code,
    Formula,
    Misc,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::Text, Label::Table, Label::Code, Label::Formula, Label::Misc];

    /// Everything but TEXT.
    pub const UNNATURAL: [Label; 4] = [Label::Table, Label::Code, Label::Formula, Label::Misc];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Text => "TEXT",
            Label::Table => "TABLE",
            Label::Code => "CODE",
            Label::Formula => "FORMULA",
            Label::Misc => "MISC",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn is_unnatural(self) -> bool {
        self != Label::Text
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-insensitive parse of the five canonical names.
pub fn parse_label(s: &str) -> Result<Label> {
    Label::ALL
        .iter()
        .copied()
        .find(|l| l.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| Error::UnknownLabel(s.to_string()))
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        parse_label(s)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Label, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_label(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRecord {
    #[serde(rename = "t")]
    pub text: String,
    #[serde(rename = "y", default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Label>,
}

impl LineRecord {
    pub fn new(text: impl Into<String>, gold: Option<Label>) -> Self {
        LineRecord {
            text: text.into(),
            gold,
        }
    }

    pub fn labeled(text: impl Into<String>, gold: Label) -> Self {
        Self::new(text, Some(gold))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub id: String,
    pub lines: Vec<LineRecord>,
}

impl AnnotatedDocument {
    pub fn new(id: impl Into<String>, lines: Vec<LineRecord>) -> Self {
        AnnotatedDocument { id: id.into(), lines }
    }

    /// Unlabeled document built from raw text, one record per line.
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        let lines = text.lines().map(|l| LineRecord::new(l, None)).collect();
        Self::new(id, lines)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.lines.iter().all(|l| l.gold.is_some())
    }

    /// Gold labels, or `None` if any line is unlabeled.
    pub fn gold_labels(&self) -> Option<Vec<Label>> {
        self.lines.iter().map(|l| l.gold).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<AnnotatedDocument>,
    fully_labeled: bool,
}

impl Corpus {
    /// Builds a corpus, rejecting empty or duplicate ids and embedded line breaks.
    pub fn new(documents: Vec<AnnotatedDocument>) -> Result<Self> {
        let mut seen = HashSet::new();
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(Error::InvalidArgument("empty document id".into()));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateDocId(doc.id.clone()));
            }
            if let Some(l) = doc.lines.iter().find(|l| l.text.contains(['\n', '\r'])) {
                return Err(Error::InvalidArgument(format!(
                    "document {:?} has a line containing a line break: {:?}",
                    doc.id, l.text
                )));
            }
        }
        let fully_labeled = documents.iter().all(AnnotatedDocument::is_fully_labeled);
        Ok(Corpus {
            documents,
            fully_labeled,
        })
    }

    pub fn documents(&self) -> &[AnnotatedDocument] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<AnnotatedDocument> {
        self.documents
    }

    pub fn fully_labeled(&self) -> bool {
        self.fully_labeled
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn line_count(&self) -> usize {
        self.documents.iter().map(AnnotatedDocument::len).sum()
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Documents whose id is in `ids`, in corpus order.
    pub fn subset(&self, ids: &HashSet<&str>) -> Corpus {
        let documents: Vec<_> = self
            .documents
            .iter()
            .filter(|d| ids.contains(d.id.as_str()))
            .cloned()
            .collect();
        let fully_labeled = documents.iter().all(AnnotatedDocument::is_fully_labeled);
        Corpus {
            documents,
            fully_labeled,
        }
    }

    /// Fraction of lines per gold label; unlabeled lines are ignored.
    pub fn label_shares(&self) -> [f64; 5] {
        let mut counts = [0usize; 5];
        for line in self.documents.iter().flat_map(|d| &d.lines) {
            if let Some(l) = line.gold {
                counts[l.index()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let mut shares = [0.0; 5];
        if total > 0 {
            for (s, c) in shares.iter_mut().zip(counts) {
                *s = c as f64 / total as f64;
            }
        }
        shares
    }

    /// Canonical JSONL form: compact, one document per line, `\n` terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("documents serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut documents = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let doc: AnnotatedDocument = serde_json::from_str(raw).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if doc.id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty document id".into(),
                });
            }
            if doc.lines.iter().any(|l| l.text.contains(['\n', '\r'])) {
                return Err(Error::Parse {
                    line: line_no,
                    message: "line text contains a line break".into(),
                });
            }
            if !seen.insert(doc.id.clone()) {
                return Err(Error::DuplicateDocId(doc.id));
            }
            documents.push(doc);
        }
        Corpus::new(documents)
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_jsonl(&text)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(corpus.to_jsonl().as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// JSON-schema description of the corpus file, printed by `--schema`.
pub const CORPUS_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "corpus document (one per JSONL line)",
  "type": "object",
  "required": ["id", "lines"],
  "properties": {
    "id": {"type": "string", "minLength": 1},
    "lines": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["t"],
        "properties": {
          "t": {"type": "string", "pattern": "^[^\\r\\n]*$"},
          "y": {"enum": ["TEXT", "TABLE", "CODE", "FORMULA", "MISC"]}
        },
        "additionalProperties": false
      }
    }
  },
  "additionalProperties": false
}"#;

/// K disjoint sets of document ids covering a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<String>>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// (training corpus, held-out corpus) for fold `i`.
    pub fn train_test(&self, corpus: &Corpus, i: usize) -> (Corpus, Corpus) {
        let test: HashSet<&str> = self.folds[i].iter().map(String::as_str).collect();
        let train: HashSet<&str> = corpus
            .documents()
            .iter()
            .map(|d| d.id.as_str())
            .filter(|id| !test.contains(id))
            .collect();
        (corpus.subset(&train), corpus.subset(&test))
    }
}

/// Shuffles documents with the seeded split stream and deals them round-robin.
pub fn split_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldSplit> {
    if k == 0 || k > corpus.len() {
        return Err(Error::TooFewDocuments { docs: corpus.len(), k });
    }
    let mut ids: Vec<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
    ids.shuffle(&mut rng::stream(seed, rng::STREAM_SPLIT));
    let mut folds = vec![Vec::new(); k];
    for (i, id) in ids.into_iter().enumerate() {
        folds[i % k].push(id.to_string());
    }
    Ok(FoldSplit { folds })
}
