use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// 5x5 counts indexed `[gold][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: Label, pred: Label) {
        self.counts[gold.index()][pred.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn gold_count(&self, l: Label) -> u64 {
        self.counts[l.index()].iter().sum()
    }

    pub fn predicted_count(&self, l: Label) -> u64 {
        self.counts.iter().map(|row| row[l.index()]).sum()
    }

    pub fn report(&self) -> PrfReport {
        PrfReport::from_confusion(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class precision, recall and F1 in percent, with macro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub classes: Vec<ClassScore>,
    /// Mean F1 over TABLE, CODE, FORMULA and MISC.
    pub macro_f1_unnatural: f64,
    pub macro_f1_all: f64,
    pub confusion: ConfusionMatrix,
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl PrfReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let classes: Vec<ClassScore> = Label::ALL
            .iter()
            .map(|&l| {
                let tp = cm.counts[l.index()][l.index()];
                let precision = pct(tp, cm.predicted_count(l));
                let recall = pct(tp, cm.gold_count(l));
                ClassScore {
                    label: l,
                    precision,
                    recall,
                    f1: f1(precision, recall),
                    support: cm.gold_count(l),
                }
            })
            .collect();
        let macro_f1_unnatural = classes
            .iter()
            .filter(|c| c.label.is_unnatural())
            .map(|c| c.f1)
            .sum::<f64>()
            / 4.0;
        let macro_f1_all = classes.iter().map(|c| c.f1).sum::<f64>() / 5.0;
        PrfReport {
            classes,
            macro_f1_unnatural,
            macro_f1_all,
            confusion: *cm,
        }
    }

    pub fn class(&self, l: Label) -> &ClassScore {
        &self.classes[l.index()]
    }

    /// Aligned-column text rendering.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<8} {:>9} {:>9} {:>9} {:>8}\n",
            "label", "precision", "recall", "f1", "support"
        );
        for c in &self.classes {
            writeln!(
                s,
                "{:<8} {:>9.2} {:>9.2} {:>9.2} {:>8}",
                c.label.as_str(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            )
            .expect("writing to a String");
        }
        writeln!(s, "macro-F1 (unnatural) {:>8.2}", self.macro_f1_unnatural).expect("writing to a String");
        writeln!(s, "macro-F1 (all)       {:>8.2}", self.macro_f1_all).expect("writing to a String");
        s
    }

    /// `label,precision,recall,f1,support` rows plus the two macro rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,precision,recall,f1,support\n");
        for c in &self.classes {
            writeln!(
                s,
                "{},{},{},{},{}",
                c.label.as_str(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            )
            .expect("writing to a String");
        }
        writeln!(s, "MACRO_UNNATURAL,,,{},", self.macro_f1_unnatural).expect("writing to a String");
        writeln!(s, "MACRO_ALL,,,{},", self.macro_f1_all).expect("writing to a String");
        s
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: gold.len(),
            found: pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (g, p) in gold.iter().zip(pred) {
        cm.add(*g, *p);
    }
    Ok(cm)
}

pub fn score(gold: &[Label], pred: &[Label]) -> Result<(ConfusionMatrix, PrfReport)> {
    let cm = confusion(gold, pred)?;
    let report = cm.report();
    Ok((cm, report))
}

/// Precision, recall and F1 in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Pairwise clustering F1. Partitions map each doc id to a cluster key.
/// Positive pairs are unordered pairs sharing a cluster.
pub fn pairwise_clustering_f1<G, P>(gold: &BTreeMap<String, G>, pred: &BTreeMap<String, P>) -> Result<PairScore>
where
    G: Eq + std::hash::Hash,
    P: Eq + std::hash::Hash,
{
    if gold.len() != pred.len() || gold.keys().zip(pred.keys()).any(|(a, b)| a != b) {
        return Err(Error::CoverageMismatch);
    }
    // count pairs through cluster contingency tables: O(n) rather than O(n^2)
    let pairs = |n: u64| n * n.saturating_sub(1) / 2;
    let mut gold_sizes: HashMap<&G, u64> = HashMap::new();
    let mut pred_sizes: HashMap<&P, u64> = HashMap::new();
    let mut joint: HashMap<(&G, &P), u64> = HashMap::new();
    for (id, g) in gold {
        let p = &pred[id];
        *gold_sizes.entry(g).or_default() += 1;
        *pred_sizes.entry(p).or_default() += 1;
        *joint.entry((g, p)).or_default() += 1;
    }
    let tp: u64 = joint.values().map(|&n| pairs(n)).sum();
    let gold_pos: u64 = gold_sizes.values().map(|&n| pairs(n)).sum();
    let pred_pos: u64 = pred_sizes.values().map(|&n| pairs(n)).sum();
    let precision = if pred_pos == 0 {
        0.0
    } else {
        tp as f64 / pred_pos as f64
    };
    let recall = if gold_pos == 0 {
        0.0
    } else {
        tp as f64 / gold_pos as f64
    };
    Ok(PairScore {
        precision,
        recall,
        f1: f1(precision, recall),
    })
}

/// Converts a list of clusters into an id → cluster-index map.
pub fn partition_map(clusters: &[Vec<String>]) -> BTreeMap<String, usize> {
    clusters
        .iter()
        .enumerate()
        .flat_map(|(c, ids)| ids.iter().map(move |id| (id.clone(), c)))
        .collect()
}

/// All unordered id pairs of a partition that share a cluster.
pub fn same_cluster_pairs(partition: &BTreeMap<String, usize>) -> BTreeSet<(String, String)> {
    let ids: Vec<(&String, &usize)> = partition.iter().collect();
    let mut out = BTreeSet::new();
    for (i, (a, ca)) in ids.iter().enumerate() {
        for (b, cb) in &ids[i + 1..] {
            if ca == cb {
                out.insert(((*a).clone(), (*b).clone()));
            }
        }
    }
    out
}
