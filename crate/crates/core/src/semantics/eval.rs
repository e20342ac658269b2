// SPDX-License-Identifier: Apache-2.0

//! Quality measures for the similarity model.

use std::collections::HashMap;
use std::hash::Hash;

use super::{cosine, SimilarityModel, Taxonomy};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// NDCG@M with gain `g_i / log2(i + 1)` at 1-based rank `i`. Entities missing
/// from `relevance` gain 0; the ideal ordering ranges over every entity in
/// `relevance`. Returns 0 when the ideal DCG is 0.
pub fn ndcg_at_m<E: Eq + Hash>(ranked: &[E], relevance: &HashMap<E, f64>, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("NDCG cutoff M must be at least 1".into()));
    }
    let discount = |i: usize| ((i + 2) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(m)
        .enumerate()
        .map(|(i, e)| relevance.get(e).copied().unwrap_or(0.0) / discount(i))
        .sum();
    let mut gains: Vec<f64> = relevance.values().copied().collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    let idcg: f64 = gains.iter().take(m).enumerate().map(|(i, g)| g / discount(i)).sum();
    if idcg == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg / idcg)
}

/// Mean cosine over all unordered pairs of distinct positions.
pub fn mean_pairwise_cosine(vectors: &[&[f64]]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientWords(vectors.len()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            total += cosine(vectors[i], vectors[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Average pairwise cosine of the `l` nearest words of `term`.
pub fn word_coherence(model: &SimilarityModel, term: &str, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::InsufficientWords(l));
    }
    let words = model.top_words(term, l)?;
    let vectors: Vec<&[f64]> = words
        .iter()
        .map(|&(w, _)| model.word_vector(model.word(w)).unwrap())
        .collect();
    mean_pairwise_cosine(&vectors)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Davies-Bouldin index over `(centroid, members)` clusters with Euclidean
/// distances. Scatter is the mean member-to-centroid distance.
pub fn davies_bouldin_index(clusters: &[(Vec<f64>, Vec<Vec<f64>>)]) -> Result<f64> {
    if clusters.len() < 2 {
        return Err(Error::InvalidParameter(
            "Davies-Bouldin needs at least two clusters".into(),
        ));
    }
    let scatter: Vec<f64> = clusters
        .iter()
        .map(|(c, pts)| {
            if pts.is_empty() {
                0.0
            } else {
                pts.iter().map(|p| euclidean(p, c)).sum::<f64>() / pts.len() as f64
            }
        })
        .collect();
    let mut total = 0.0;
    for i in 0..clusters.len() {
        let mut worst = 0.0f64;
        for j in 0..clusters.len() {
            if i == j {
                continue;
            }
            let sep = euclidean(&clusters[i].0, &clusters[j].0);
            if sep == 0.0 {
                return Err(Error::DegenerateClustering(i.min(j), i.max(j)));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / clusters.len() as f64)
}

/// Each term is a cluster of its `l` nearest words around the term vector.
pub fn davies_bouldin<S: AsRef<str>>(model: &SimilarityModel, terms: &[S], l: usize) -> Result<f64> {
    let clusters = terms
        .iter()
        .map(|t| {
            let t = t.as_ref();
            let centroid = model.term_vector(t)?;
            let members = model
                .top_words(t, l)?
                .into_iter()
                .map(|(w, _)| model.word_vector(model.word(w)).unwrap().to_vec())
                .collect();
            Ok((centroid, members))
        })
        .collect::<Result<Vec<_>>>()?;
    davies_bouldin_index(&clusters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyNdcg {
    pub mean: f64,
    pub evaluated: usize,
    /// Topics the embedding model cannot resolve.
    pub skipped: usize,
}

/// Mean NDCG@M of the model as a ranker of taxonomy topics: for each topic,
/// the other resolvable topics are ranked by model similarity and graded by
/// taxonomy similarity.
pub fn taxonomy_ndcg(model: &SimilarityModel, taxonomy: &Taxonomy, m: usize, exec: Execution) -> Result<TaxonomyNdcg> {
    let topics = taxonomy.topics();
    let space = model.keyword_space(topics, exec);
    let resolvable: Vec<usize> = (0..topics.len())
        .filter(|&i| model.profile(&topics[i]).is_ok())
        .collect();
    let scores = par::map(exec, &resolvable, |&t| -> Result<f64> {
        let term = &topics[t];
        let ranked: Vec<usize> = space
            .top_m(model, term, m + 1)?
            .into_iter()
            .map(|(i, _)| i)
            .filter(|&i| i != t)
            .take(m)
            .collect();
        let mut relevance = HashMap::new();
        for &w in &resolvable {
            if w != t {
                relevance.insert(w, taxonomy.similarity(term, &topics[w])?);
            }
        }
        ndcg_at_m(&ranked, &relevance, m)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let evaluated = scores.len();
    let mean = if evaluated == 0 {
        0.0
    } else {
        scores.iter().sum::<f64>() / evaluated as f64
    };
    Ok(TaxonomyNdcg {
        mean,
        evaluated,
        skipped: topics.len() - evaluated,
    })
}
