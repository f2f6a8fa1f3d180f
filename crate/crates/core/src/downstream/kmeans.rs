//! Seeded k-means over document vectors, with seeds from topic keywords,
//! the best-matching document, or a simulated user's pick.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tfidf::{cosine_weights, DocumentSpace, DocumentVector, TermWeights};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Gold topics: a keyword string per topic and the documents belonging to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GoldRepr")]
pub struct GoldClustering {
    topics: BTreeMap<String, String>,
    clusters: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct GoldRepr {
    topics: BTreeMap<String, String>,
    clusters: BTreeMap<String, Vec<String>>,
}

impl TryFrom<GoldRepr> for GoldClustering {
    type Error = Error;
    fn try_from(r: GoldRepr) -> Result<Self> {
        GoldClustering::new(r.topics, r.clusters)
    }
}

impl GoldClustering {
    pub fn new(topics: BTreeMap<String, String>, clusters: BTreeMap<String, Vec<String>>) -> Result<Self> {
        if let Some((t, _)) = topics.iter().find(|(_, k)| k.trim().is_empty()) {
            return Err(Error::EmptyTopic(t.clone()));
        }
        if let Some(t) = clusters.keys().find(|t| !topics.contains_key(*t)) {
            return Err(Error::InvalidArgument(format!("cluster {t} has no topic keywords")));
        }
        let mut seen = BTreeMap::new();
        let mut clusters = clusters;
        for (t, ids) in clusters.iter_mut() {
            ids.sort();
            ids.dedup();
            for id in ids.iter() {
                if let Some(other) = seen.insert(id.clone(), t.clone()) {
                    return Err(Error::InvalidArgument(format!(
                        "document {id} is in clusters {other} and {t}"
                    )));
                }
            }
        }
        Ok(GoldClustering { topics, clusters })
    }

    pub fn topics(&self) -> &BTreeMap<String, String> {
        &self.topics
    }

    pub fn clusters(&self) -> &BTreeMap<String, Vec<String>> {
        &self.clusters
    }

    /// Number of topics, i.e. the number of clusters k-means is asked for.
    pub fn k(&self) -> usize {
        self.topics.len()
    }

    /// doc id → topic id.
    pub fn assignment(&self) -> BTreeMap<String, String> {
        self.clusters
            .iter()
            .flat_map(|(t, ids)| ids.iter().map(move |id| (id.clone(), t.clone())))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeedScheme {
    TopicKeywords,
    Top1Doc,
    UserSelected,
}

impl SeedScheme {
    pub const ALL: [SeedScheme; 3] = [SeedScheme::TopicKeywords, SeedScheme::Top1Doc, SeedScheme::UserSelected];

    pub fn as_str(self) -> &'static str {
        match self {
            SeedScheme::TopicKeywords => "TOPIC_KEYWORDS",
            SeedScheme::Top1Doc => "TOP1_DOC",
            SeedScheme::UserSelected => "USER_SELECTED",
        }
    }
}

impl fmt::Display for SeedScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeedScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        SeedScheme::ALL
            .into_iter()
            .find(|x| x.as_str() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown seeding scheme {s:?}")))
    }
}

fn keyword_vector<F: Scalar>(space: &DocumentSpace<F>, topic: &str, keywords: &str) -> Result<TermWeights<F>> {
    let q = space.query_vector(keywords);
    if q.is_empty() {
        return Err(Error::EmptyTopic(topic.to_string()));
    }
    Ok(q)
}

/// One initial centroid per gold topic, in topic-id order.
pub fn init_seeds<F: Scalar>(
    scheme: SeedScheme,
    gold: &GoldClustering,
    space: &DocumentSpace<F>,
    seed: u64,
) -> Result<Vec<TermWeights<F>>> {
    if space.vectors.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut user = rng::stream(seed, rng::STREAM_USER_SIM);
    gold.topics
        .iter()
        .map(|(topic, keywords)| match scheme {
            SeedScheme::TopicKeywords => keyword_vector(space, topic, keywords),
            SeedScheme::Top1Doc => {
                let q = keyword_vector(space, topic, keywords)?;
                let mut best: Option<(F, &DocumentVector<F>)> = None;
                for v in &space.vectors {
                    let s = cosine_weights(&q, &v.weights);
                    let better = match best {
                        None => true,
                        Some((bs, bv)) => s > bs || (s == bs && v.doc_id < bv.doc_id),
                    };
                    if better {
                        best = Some((s, v));
                    }
                }
                Ok(best.expect("nonempty space").1.weights.clone())
            }
            SeedScheme::UserSelected => {
                let members = gold
                    .clusters
                    .get(topic)
                    .filter(|m| !m.is_empty())
                    .ok_or_else(|| Error::EmptyTopic(topic.clone()))?;
                let pick = &members[user.gen_range(0..members.len())];
                space
                    .get(pick)
                    .map(|v| v.weights.clone())
                    .ok_or(Error::CoverageMismatch)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    /// Doc ids per cluster, in input order.
    pub clusters: Vec<Vec<String>>,
    /// doc id → cluster index.
    pub assignment: BTreeMap<String, usize>,
    /// Centroid updates performed before assignments stopped changing.
    pub iterations: usize,
    pub converged: bool,
}

fn assign<F: Scalar>(vectors: &[DocumentVector<F>], centroids: &[TermWeights<F>]) -> Vec<usize> {
    vectors
        .iter()
        .map(|v| {
            let mut best = (0, F::neg_infinity());
            for (c, centroid) in centroids.iter().enumerate() {
                let s = cosine_weights(&v.weights, centroid);
                if s > best.1 {
                    best = (c, s);
                }
            }
            best.0
        })
        .collect()
}

fn mean<F: Scalar>(members: &[&TermWeights<F>]) -> TermWeights<F> {
    let mut acc: TermWeights<F> = BTreeMap::new();
    for m in members {
        for (t, w) in m.iter() {
            let e = acc.entry(t.clone()).or_insert_with(F::zero);
            *e = *e + *w;
        }
    }
    let n = F::of_usize(members.len());
    acc.values_mut().for_each(|w| *w = *w / n);
    acc
}

/// k-means with cosine assignment. Ties go to the lower cluster index and an
/// empty cluster keeps its previous centroid. Centroids are plain means and
/// are not re-truncated.
pub fn seeded_kmeans<F: Scalar>(
    vectors: &[DocumentVector<F>],
    seeds: &[TermWeights<F>],
    max_iters: usize,
) -> Result<KMeansResult> {
    if seeds.is_empty() || max_iters == 0 {
        return Err(Error::InvalidArgument("k-means needs k >= 1 and max_iters >= 1".into()));
    }
    let mut centroids: Vec<TermWeights<F>> = seeds.to_vec();
    let mut previous: Option<Vec<usize>> = None;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        let current = assign(vectors, &centroids);
        if previous.as_ref() == Some(&current) {
            converged = true;
            break;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&TermWeights<F>> = vectors
                .iter()
                .zip(&current)
                .filter(|(_, a)| **a == c)
                .map(|(v, _)| &v.weights)
                .collect();
            if !members.is_empty() {
                *centroid = mean(&members);
            }
        }
        iterations += 1;
        previous = Some(current);
    }
    let final_assignment = previous.expect("at least one pass");
    let mut clusters = vec![Vec::new(); seeds.len()];
    for (v, a) in vectors.iter().zip(&final_assignment) {
        clusters[*a].push(v.doc_id.clone());
    }
    Ok(KMeansResult {
        clusters,
        assignment: vectors
            .iter()
            .zip(&final_assignment)
            .map(|(v, a)| (v.doc_id.clone(), *a))
            .collect(),
        iterations,
        converged,
    })
}

/// Sum over documents of `1 - cos(doc, assigned centroid)`.
pub fn assignment_cost<F: Scalar>(
    vectors: &[DocumentVector<F>],
    centroids: &[TermWeights<F>],
    assignment: &[usize],
) -> F {
    vectors
        .iter()
        .zip(assignment)
        .map(|(v, a)| F::one() - cosine_weights(&v.weights, &centroids[*a]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedDocument, Corpus};
    use crate::downstream::tfidf::build_space;
    use crate::evaluation::pairwise_clustering_f1;
    use proptest::prelude::*;

    fn vec_of(id: &str, pairs: &[(&str, f64)]) -> DocumentVector<f64> {
        DocumentVector {
            doc_id: id.into(),
            weights: pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
            k: 100,
        }
    }

    fn two_topics() -> (Vec<DocumentVector<f64>>, GoldClustering) {
        let v = vec![
            vec_of("a1", &[("graph", 2.0), ("vertex", 1.0)]),
            vec_of("a2", &[("graph", 1.0), ("edge", 1.5)]),
            vec_of("a3", &[("vertex", 1.0), ("edge", 1.0)]),
            vec_of("b1", &[("packet", 2.0), ("router", 1.0)]),
            vec_of("b2", &[("router", 1.0), ("tcp", 1.0)]),
            vec_of("b3", &[("packet", 1.0), ("tcp", 2.0)]),
        ];
        let gold = GoldClustering::new(
            [("t0".into(), "graph".into()), ("t1".into(), "packet".into())].into(),
            [
                ("t0".into(), vec!["a1".into(), "a2".into(), "a3".into()]),
                ("t1".into(), vec!["b1".into(), "b2".into(), "b3".into()]),
            ]
            .into(),
        )
        .unwrap();
        (v, gold)
    }

    fn space_of(vectors: Vec<DocumentVector<f64>>) -> DocumentSpace<f64> {
        let mut idf = BTreeMap::new();
        for v in &vectors {
            for t in v.weights.keys() {
                idf.insert(t.clone(), 1.0);
            }
        }
        DocumentSpace { vectors, idf }
    }

    #[test]
    fn recovers_separable_topics_with_every_scheme() {
        let (v, gold) = two_topics();
        let space = space_of(v.clone());
        for scheme in SeedScheme::ALL {
            let seeds = init_seeds(scheme, &gold, &space, 9).unwrap();
            let r = seeded_kmeans(&v, &seeds, DEFAULT_MAX_ITERS).unwrap();
            assert!(r.converged && r.iterations <= DEFAULT_MAX_ITERS);
            let f = pairwise_clustering_f1(&gold.assignment(), &r.assignment).unwrap();
            assert_eq!(f.f1, 1.0, "{scheme}");
        }
    }

    #[test]
    fn single_cluster_and_fixed_point() {
        let (v, _) = two_topics();
        let r = seeded_kmeans(&v, &[vec_of("s", &[("graph", 1.0)]).weights], 10).unwrap();
        assert_eq!(r.clusters[0].len(), 6);
        assert_eq!(r.iterations, 1);
        let refs: Vec<&TermWeights<f64>> = v.iter().map(|d| &d.weights).collect();
        let means = vec![mean(&refs[..3]), mean(&refs[3..])];
        let r = seeded_kmeans(&v, &means, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(seeded_kmeans(&v, &[], 10).is_err());
    }

    #[test]
    fn ties_go_to_lower_cluster_and_empty_clusters_keep_centroid() {
        let v = vec![vec_of("x", &[("a", 1.0)])];
        let s = vec_of("s", &[("a", 1.0)]).weights;
        let r = seeded_kmeans(&v, &[s.clone(), s.clone(), vec_of("o", &[("z", 1.0)]).weights], 5).unwrap();
        assert_eq!(r.assignment["x"], 0);
        assert!(r.clusters[1].is_empty() && r.clusters[2].is_empty());
    }

    #[test]
    fn seeding_rules() {
        let (v, gold) = two_topics();
        let space = space_of(v);
        let top1 = init_seeds(SeedScheme::Top1Doc, &gold, &space, 0).unwrap();
        assert_eq!(top1[0], space.get("a1").unwrap().weights);
        assert_eq!(top1[1], space.get("b1").unwrap().weights);
        let missing = GoldClustering::new(
            [("t0".into(), "nowhere".into())].into(),
            [("t0".into(), vec!["a1".into()])].into(),
        )
        .unwrap();
        assert!(matches!(
            init_seeds(SeedScheme::TopicKeywords, &missing, &space, 0),
            Err(Error::EmptyTopic(_))
        ));
        // singleton cluster: the user can only pick that document
        for seed in 0..5 {
            let s = init_seeds(SeedScheme::UserSelected, &missing, &space, seed).unwrap();
            assert_eq!(s[0], space.get("a1").unwrap().weights);
        }
    }

    #[test]
    fn top1_argmax_from_real_space() {
        let docs = ["sorting pivot quicksort", "graph vertex", "packet router"];
        let c = Corpus::new(
            docs.iter()
                .enumerate()
                .map(|(i, t)| AnnotatedDocument::from_text(format!("d{i}"), t))
                .collect(),
        )
        .unwrap();
        let space = build_space::<f64>(&c, 10).unwrap();
        let gold = GoldClustering::new([("t".into(), "pivot quicksort".into())].into(), BTreeMap::new()).unwrap();
        let s = init_seeds(SeedScheme::Top1Doc, &gold, &space, 0).unwrap();
        assert_eq!(s[0], space.get("d0").unwrap().weights);
    }

    #[test]
    fn gold_file_validation() {
        let ok = r#"{"topics":{"t0":"graph"},"clusters":{"t0":["a","b"]}}"#;
        let g = GoldClustering::from_json(ok).unwrap();
        assert_eq!(GoldClustering::from_json(&g.to_json()).unwrap(), g);
        let overlap = r#"{"topics":{"t0":"g","t1":"h"},"clusters":{"t0":["a"],"t1":["a"]}}"#;
        assert!(GoldClustering::from_json(overlap).is_err());
        let blank = r#"{"topics":{"t0":"  "},"clusters":{}}"#;
        assert!(GoldClustering::from_json(blank).is_err());
        assert_eq!("top1-doc".parse::<SeedScheme>().unwrap(), SeedScheme::Top1Doc);
    }

    proptest! {
        #[test]
        fn assignment_never_worse_than_any_fixed_assignment(
            docs in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 4), 2..10),
            k in 1usize..4,
        ) {
            let terms = ["p", "q", "r", "s"];
            let vectors: Vec<DocumentVector<f64>> = docs.iter().enumerate().map(|(i, ws)| DocumentVector {
                doc_id: format!("d{i}"),
                weights: terms.iter().zip(ws).filter(|(_, w)| **w > 0.0).map(|(t, w)| (t.to_string(), *w)).collect(),
                k: 4,
            }).collect();
            let centroids: Vec<TermWeights<f64>> = vectors.iter().cycle().take(k).map(|v| v.weights.clone()).collect();
            let best = assign(&vectors, &centroids);
            let cost = assignment_cost(&vectors, &centroids, &best);
            let zeros = vec![0; vectors.len()];
            prop_assert!(cost <= assignment_cost(&vectors, &centroids, &zeros) + 1e-12);
            let r = seeded_kmeans(&vectors, &centroids, 50).unwrap();
            prop_assert!(r.iterations <= 50);
            prop_assert_eq!(r.clusters.iter().map(Vec::len).sum::<usize>(), vectors.len());
        }
    }
}
