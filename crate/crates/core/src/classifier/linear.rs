//! One-vs-rest linear max-margin classifier.
//!
//! Each class gets a binary L2-regularized hinge-loss model trained by
//! stochastic subgradient descent with step size `1 / (lambda * (t0 + t))`,
//! `lambda = 1 / (c * n)`. The weight vector is kept as `scale * v` so that
//! the per-step shrinkage is O(1).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{is_real_valued, SparseFeatureVector};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization trade-off; larger fits the training data harder.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Offset of the step-size schedule; `None` picks the usual heuristic
    /// `1 / (eta0 * lambda)` with `eta0 = lambda^(-1/4)`.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Correction rounds after the second stage.
    #[serde(default)]
    pub extra_dagger_rounds: usize,
    /// When >= 2, the stage-1 predictions that stage 2 trains on are made
    /// by stage-1 models that did not see the document (documents dealt
    /// round-robin into this many parts). 0 predicts in-sample.
    #[serde(default = "default_cross_fit_folds")]
    pub cross_fit_folds: usize,
}

pub const DEFAULT_CROSS_FIT_FOLDS: usize = 5;

fn default_cross_fit_folds() -> usize {
    DEFAULT_CROSS_FIT_FOLDS
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            epochs: 10,
            seed: 0,
            t0: None,
            extra_dagger_rounds: 0,
            cross_fit_folds: DEFAULT_CROSS_FIT_FOLDS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be positive, got {}", self.c)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.cross_fit_folds == 1 {
            return Err(Error::InvalidArgument("cross_fit_folds must be 0 or at least 2".into()));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0 && t0.is_finite()) {
                return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
            }
        }
        Ok(())
    }
}

/// Per-feature min/max of real-valued features over the training examples;
/// values are mapped to [-1, 1].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl ScalingStats {
    /// Absent ids count as zero, so a feature missing from any example has
    /// zero inside its range.
    pub fn fit<'a, I>(examples: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseFeatureVector>,
    {
        let mut seen: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        let mut n = 0usize;
        for x in examples {
            n += 1;
            for (id, w) in x.iter().filter(|(id, _)| is_real_valued(id)) {
                let e = seen.entry(id.to_string()).or_insert((w, w, 0));
                e.0 = e.0.min(w);
                e.1 = e.1.max(w);
                e.2 += 1;
            }
        }
        let ranges = seen
            .into_iter()
            .map(|(id, (lo, hi, count))| {
                if count < n {
                    (id, (lo.min(0.0), hi.max(0.0)))
                } else {
                    (id, (lo, hi))
                }
            })
            .collect();
        ScalingStats { ranges }
    }

    /// Scales every fitted real-valued feature (absent counts as 0), drops
    /// real-valued ids that were never seen in training, and passes
    /// indicators through.
    pub fn apply(&self, x: &SparseFeatureVector) -> SparseFeatureVector {
        let mut out: BTreeMap<String, f64> = x
            .iter()
            .filter(|(id, _)| !is_real_valued(id))
            .map(|(id, w)| (id.to_string(), w))
            .collect();
        for (id, &(lo, hi)) in &self.ranges {
            if hi > lo {
                let v = x.get(id);
                let s = 2.0 * (v - lo) / (hi - lo) - 1.0;
                if s != 0.0 {
                    out.insert(id.clone(), s);
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Per-class weight vectors over feature ids. Ids without a weight score 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearModel {
    weights: HashMap<String, [f64; 5]>,
}

impl LinearModel {
    pub fn scores(&self, x: &SparseFeatureVector) -> [f64; 5] {
        let mut s = [0.0; 5];
        for (id, v) in x.iter() {
            if let Some(w) = self.weights.get(id) {
                for (acc, wc) in s.iter_mut().zip(w) {
                    *acc += wc * v;
                }
            }
        }
        s
    }

    /// Argmax of the class scores; ties go to the earlier label.
    pub fn predict(&self, x: &SparseFeatureVector) -> Label {
        argmax_label(&self.scores(x))
    }

    pub fn weight(&self, label: Label, id: &str) -> f64 {
        self.weights.get(id).map_or(0.0, |w| w[label.index()])
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Sorted (id, weight) pairs per class, zero weights omitted.
    pub fn to_sorted(&self) -> BTreeMap<Label, Vec<(String, f64)>> {
        let mut ids: Vec<&String> = self.weights.keys().collect();
        ids.sort();
        Label::ALL
            .iter()
            .map(|&l| {
                let pairs = ids
                    .iter()
                    .filter_map(|id| {
                        let w = self.weights[*id][l.index()];
                        (w != 0.0).then(|| ((*id).clone(), w))
                    })
                    .collect();
                (l, pairs)
            })
            .collect()
    }

    pub fn from_sorted(per_class: &BTreeMap<Label, Vec<(String, f64)>>) -> Self {
        let mut weights: HashMap<String, [f64; 5]> = HashMap::new();
        for (label, pairs) in per_class {
            for (id, w) in pairs {
                weights.entry(id.clone()).or_insert([0.0; 5])[label.index()] = *w;
            }
        }
        LinearModel { weights }
    }

    /// Multiplies every weight by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        LinearModel {
            weights: self
                .weights
                .iter()
                .map(|(id, w)| (id.clone(), w.map(|x| x * k)))
                .collect(),
        }
    }

    #[cfg(test)]
    pub(crate) fn with_weight(mut self, label: Label, id: &str, w: f64) -> Self {
        self.weights.entry(id.to_string()).or_insert([0.0; 5])[label.index()] = w;
        self
    }
}

pub fn argmax_label(scores: &[f64; 5]) -> Label {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    Label::ALL[best]
}

/// Training diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub n_examples: usize,
    pub n_features: usize,
    pub lambda: f64,
    pub t0: f64,
    /// Primal objective (summed over the five binary problems) after each epoch.
    pub objective: Vec<f64>,
}

struct Indexed {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<Label>,
    ids: Vec<String>,
}

fn index_examples(examples: &[(SparseFeatureVector, Label)]) -> Indexed {
    let ids: Vec<String> = examples
        .iter()
        .flat_map(|(x, _)| x.ids())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let lookup: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let rows = examples
        .iter()
        .map(|(x, _)| x.iter().map(|(id, w)| (lookup[id], w)).collect())
        .collect();
    Indexed {
        rows,
        labels: examples.iter().map(|(_, y)| *y).collect(),
        ids,
    }
}

/// Scaled weight vector `scale * v`.
struct BinaryWeights {
    v: Vec<f64>,
    scale: f64,
}

impl BinaryWeights {
    fn dot(&self, row: &[(usize, f64)]) -> f64 {
        self.scale * row.iter().map(|(j, x)| self.v[*j] * x).sum::<f64>()
    }

    fn sq_norm(&self) -> f64 {
        self.scale * self.scale * self.v.iter().map(|x| x * x).sum::<f64>()
    }

    fn normalize(&mut self) {
        for x in &mut self.v {
            *x *= self.scale;
        }
        self.scale = 1.0;
    }
}

fn objective(ws: &[BinaryWeights], data: &Indexed, lambda: f64) -> f64 {
    let n = data.rows.len() as f64;
    ws.iter()
        .enumerate()
        .map(|(c, w)| {
            let hinge: f64 = data
                .rows
                .iter()
                .zip(&data.labels)
                .map(|(row, y)| {
                    let sign = if y.index() == c { 1.0 } else { -1.0 };
                    (1.0 - sign * w.dot(row)).max(0.0)
                })
                .sum();
            0.5 * lambda * w.sq_norm() + hinge / n
        })
        .sum()
}

pub fn train_linear(examples: &[(SparseFeatureVector, Label)], tc: &TrainConfig) -> Result<LinearModel> {
    train_linear_with_summary(examples, tc).map(|(m, _)| m)
}

pub fn train_linear_with_summary(
    examples: &[(SparseFeatureVector, Label)],
    tc: &TrainConfig,
) -> Result<(LinearModel, TrainSummary)> {
    tc.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let data = index_examples(examples);
    let n = data.rows.len();
    let lambda = 1.0 / (tc.c * n as f64);
    let t0 = tc.t0.unwrap_or_else(|| {
        let eta0 = (1.0 / lambda.sqrt()).sqrt();
        1.0 / (eta0 * lambda)
    });
    let mut ws: Vec<BinaryWeights> = (0..5)
        .map(|_| BinaryWeights {
            v: vec![0.0; data.ids.len()],
            scale: 1.0,
        })
        .collect();

    let mut rng = rng::stream(tc.seed, rng::STREAM_TRAIN);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0.0f64;
    let mut history = Vec::with_capacity(tc.epochs);
    for _ in 0..tc.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = 1.0 / (lambda * (t0 + t));
            t += 1.0;
            let row = &data.rows[i];
            let y = data.labels[i].index();
            for (c, w) in ws.iter_mut().enumerate() {
                let sign = if y == c { 1.0 } else { -1.0 };
                let margin = sign * w.dot(row);
                w.scale *= 1.0 - eta * lambda;
                if w.scale < 1e-9 {
                    w.normalize();
                }
                if margin < 1.0 {
                    let step = eta * sign / w.scale;
                    for (j, x) in row {
                        w.v[*j] += step * x;
                    }
                }
            }
        }
        history.push(objective(&ws, &data, lambda));
    }

    let mut weights = HashMap::with_capacity(data.ids.len());
    for (j, id) in data.ids.iter().enumerate() {
        let mut w = [0.0; 5];
        for (c, bw) in ws.iter().enumerate() {
            w[c] = bw.scale * bw.v[j];
        }
        if w.iter().any(|x| *x != 0.0) {
            weights.insert(id.clone(), w);
        }
    }
    let model = LinearModel { weights };
    let summary = TrainSummary {
        n_examples: n,
        n_features: data.ids.len(),
        lambda,
        t0,
        objective: history,
    };
    Ok((model, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn vec_of(pairs: &[(&str, f64)]) -> SparseFeatureVector {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// 100 points, two features, class decided by the sign of f1 - f2.
    fn separable() -> Vec<(SparseFeatureVector, Label)> {
        let mut r = rng::stream(5, "test");
        (0..100)
            .map(|_| {
                let a: f64 = r.gen_range(-1.0..1.0);
                let b: f64 = r.gen_range(-1.0..1.0);
                let (a, b) = if (a - b).abs() < 0.2 {
                    (a + 0.3, b - 0.3)
                } else {
                    (a, b)
                };
                let y = if a > b { Label::Code } else { Label::Text };
                (vec_of(&[("bias", 1.0), ("u=a", a), ("u=b", b)]), y)
            })
            .collect()
    }

    #[test]
    fn separable_fits_perfectly() {
        let data = separable();
        let tc = TrainConfig {
            c: 100.0,
            epochs: 30,
            ..TrainConfig::default()
        };
        let m = train_linear(&data, &tc).unwrap();
        let correct = data.iter().filter(|(x, y)| m.predict(x) == *y).count();
        assert_eq!(correct, 100);
    }

    #[test]
    fn deterministic_for_seed() {
        let data = separable();
        let tc = TrainConfig::default();
        let a = train_linear(&data, &tc).unwrap();
        let b = train_linear(&data, &tc).unwrap();
        assert_eq!(a.to_sorted(), b.to_sorted());
        let c = train_linear(&data, &TrainConfig { seed: 9, ..tc }).unwrap();
        assert_ne!(a.to_sorted(), c.to_sorted());
    }

    #[test]
    fn objective_decreases() {
        let data = separable();
        let (_, s) = train_linear_with_summary(
            &data,
            &TrainConfig {
                epochs: 15,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(s.objective.len(), 15);
        assert!(s.objective.last().unwrap() < &s.objective[0], "{:?}", s.objective);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            train_linear(&[], &TrainConfig::default()),
            Err(Error::EmptyCorpus)
        ));
        let bad = TrainConfig {
            c: 0.0,
            ..TrainConfig::default()
        };
        assert!(train_linear(&separable(), &bad).is_err());
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train_linear(&separable(), &bad).is_err());
    }

    #[test]
    fn ties_follow_label_order() {
        assert_eq!(argmax_label(&[0.0; 5]), Label::Text);
        assert_eq!(argmax_label(&[0.0, 1.0, 1.0, 0.0, 1.0]), Label::Table);
        assert_eq!(argmax_label(&[-3.0, -2.0, -1.0, -1.0, -5.0]), Label::Code);
    }

    #[test]
    fn sorted_round_trip() {
        let m = train_linear(&separable(), &TrainConfig::default()).unwrap();
        assert_eq!(LinearModel::from_sorted(&m.to_sorted()).to_sorted(), m.to_sorted());
    }

    #[test]
    fn scaling_maps_to_unit_interval() {
        let xs = vec![
            vec_of(&[("tls", 0.2), ("symbol_ratio", 0.5), ("u=x", 1.0)]),
            vec_of(&[("tls", 0.6)]),
            vec_of(&[("tls", 1.0), ("symbol_ratio", 1.0)]),
        ];
        let s = ScalingStats::fit(&xs);
        assert_eq!(s.ranges["tls"], (0.2, 1.0));
        assert_eq!(s.ranges["symbol_ratio"], (0.0, 1.0));
        assert!(!s.ranges.contains_key("u=x"));
        let y = s.apply(&xs[0]);
        assert_eq!(y.get("tls"), -1.0);
        assert_eq!(y.get("symbol_ratio"), 0.0);
        assert_eq!(y.get("u=x"), 1.0);
        let y = s.apply(&xs[1]);
        assert_eq!(y.get("symbol_ratio"), -1.0);
        assert!((y.get("tls") - 0.0).abs() < 1e-15);
        // unseen real-valued ids are dropped
        assert!(!s.apply(&vec_of(&[("emb:0", 0.3)])).contains("emb:0"));
    }

    proptest! {
        #[test]
        fn argmax_invariant_to_positive_scaling_and_zero_features(
            rows in proptest::collection::vec((proptest::collection::vec(-1.0f64..1.0, 3), 0usize..5), 5..30),
            k in 0.1f64..10.0,
        ) {
            let data: Vec<_> = rows.iter().map(|(v, y)| {
                (vec_of(&[("bias", 1.0), ("u=a", v[0]), ("u=b", v[1]), ("u=c", v[2])]), Label::ALL[*y])
            }).collect();
            let m = train_linear(&data, &TrainConfig { epochs: 2, ..TrainConfig::default() }).unwrap();
            let m2 = m.scaled(2.0);
            let mk = m.scaled(k);
            let mz = m.clone().with_weight(Label::Text, "u=zero", 0.0);
            for (x, _) in &data {
                let p = m.predict(x);
                prop_assert_eq!(p, m2.predict(x));
                let mut xz = x.clone();
                xz.set("u=zero", 3.0);
                prop_assert_eq!(p, mz.predict(&xz));
                prop_assert_eq!(p, m.predict(&xz));
                let s = m.scores(x);
                let sk = mk.scores(x);
                let best = argmax_label(&s);
                let best_k = argmax_label(&sk);
                // rounding can only matter on exact ties
                if best != best_k {
                    prop_assert!((s[best.index()] - s[best_k.index()]).abs() < 1e-9);
                }
            }
        }
    }
}
