// SPDX-License-Identifier: Apache-2.0

//! Embedding-backed keyword similarity.
//!
//! A term (word or phrase) is represented by the mean of its in-vocabulary
//! word vectors. Two metrics compare terms:
//!
//! * **cosine** of the term vectors;
//! * **indirect cosine**: each term is replaced by its `L` nearest vocabulary
//!   words with their cosine scores; both lists are laid out over the union
//!   of their words (missing entries are 0) and the two score vectors are
//!   compared by cosine.
//!
//! Neighbor lists never contain the term's own words and break similarity
//! ties by ascending word.

mod eval;
mod taxonomy;

pub use eval::{davies_bouldin, davies_bouldin_index, mean_pairwise_cosine, ndcg_at_m, taxonomy_ndcg, word_coherence};
pub use taxonomy::Taxonomy;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::normalize_keyword;
use crate::par::{self, Execution};

pub const DEFAULT_NEIGHBORHOOD: usize = 15;
pub const DEFAULT_EXPANSION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    Cosine,
    #[default]
    IndirectCosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::IndirectCosine => "indirect",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "indirect" | "indirect_cosine" | "indirect-cosine" => Ok(Metric::IndirectCosine),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

/// Cosine of two equal-length vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    debug_assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    finish_cosine(dot, na, nb)
}

fn finish_cosine(dot: f64, na: f64, nb: f64) -> Result<f64> {
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Cosine over sparse vectors sorted by index.
fn sparse_cosine(a: &[(u32, f64)], b: &[(u32, f64)]) -> Result<f64> {
    let na: f64 = a.iter().map(|(_, s)| s * s).sum();
    let nb: f64 = b.iter().map(|(_, s)| s * s).sum();
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    finish_cosine(dot, na, nb)
}

/// A term prepared for repeated comparisons under a model's metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Dense(Vec<f64>),
    /// Neighbor word ids with their cosine scores, sorted by word id.
    Sparse(Vec<(u32, f64)>),
}

#[derive(Debug, Clone)]
pub struct SimilarityModel {
    words: Vec<String>,
    index: HashMap<String, u32>,
    dim: usize,
    vectors: Vec<f64>,
    neighborhood: usize,
    metric: Metric,
}

impl SimilarityModel {
    /// Builds a model from `(word, vector)` pairs. Words are lower-cased; a
    /// later duplicate of an existing word is ignored.
    pub fn from_vectors<I, S>(entries: I, neighborhood: usize, metric: Metric) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        if neighborhood == 0 {
            return Err(Error::InvalidParameter("neighborhood size L must be at least 1".into()));
        }
        let mut model = Self {
            words: Vec::new(),
            index: HashMap::new(),
            dim: 0,
            vectors: Vec::new(),
            neighborhood,
            metric,
        };
        for (word, vec) in entries {
            let word = normalize_keyword(word.as_ref());
            if model.words.is_empty() {
                model.dim = vec.len();
            }
            if vec.is_empty() || vec.len() != model.dim {
                return Err(Error::InvalidParameter(format!(
                    "vector for {word:?} has dimension {}, expected {}",
                    vec.len(),
                    model.dim.max(1)
                )));
            }
            if model.index.contains_key(&word) {
                continue;
            }
            model.index.insert(word.clone(), model.words.len() as u32);
            model.words.push(word);
            model.vectors.extend(vec);
        }
        Ok(model)
    }

    /// Parses the text embedding format: a `<vocab_size> <dimension>` header
    /// then `<word> <f1> … <fd>` per line.
    pub fn parse_embeddings(text: &str, name: &Path, neighborhood: usize, metric: Metric) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: name.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
        let mut h = header.split_whitespace();
        let (Some(count), Some(dim), None) = (h.next(), h.next(), h.next()) else {
            return Err(perr(1, "header must be `<vocab_size> <dimension>`".into()));
        };
        let count: usize = count
            .parse()
            .map_err(|_| perr(1, format!("bad vocab size {count:?}")))?;
        let dim: usize = dim.parse().map_err(|_| perr(1, format!("bad dimension {dim:?}")))?;
        if dim == 0 {
            return Err(perr(1, "dimension must be positive".into()));
        }
        let mut entries = Vec::with_capacity(count);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap();
            let vec = parts
                .map(|p| p.parse::<f64>().map_err(|_| perr(i + 1, format!("bad float {p:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            if vec.len() != dim {
                return Err(perr(i + 1, format!("expected {dim} components, found {}", vec.len())));
            }
            entries.push((word.to_owned(), vec));
        }
        if entries.len() != count {
            return Err(perr(
                1,
                format!("header declares {count} words, file has {}", entries.len()),
            ));
        }
        Self::from_vectors(entries, neighborhood, metric)
    }

    pub fn load_embeddings(path: impl AsRef<Path>, neighborhood: usize, metric: Metric) -> Result<Self> {
        let p = path.as_ref();
        Self::parse_embeddings(&fs::read_to_string(p)?, p, neighborhood, metric)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn neighborhood(&self) -> usize {
        self.neighborhood
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn vocabulary_size(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vector_at(i))
    }

    fn vector_at(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    fn term_word_ids(&self, term: &str) -> Vec<u32> {
        normalize_keyword(term)
            .split_whitespace()
            .filter_map(|w| self.index.get(w).copied())
            .collect()
    }

    /// Mean of the in-vocabulary word vectors of `term`; unknown words are
    /// skipped.
    pub fn term_vector(&self, term: &str) -> Result<Vec<f64>> {
        let ids = self.term_word_ids(term);
        if ids.is_empty() {
            return Err(Error::UnknownTerm(term.to_owned()));
        }
        let mut acc = vec![0.0; self.dim];
        for &i in &ids {
            for (a, x) in acc.iter_mut().zip(self.vector_at(i)) {
                *a += x;
            }
        }
        let n = ids.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(acc)
    }

    pub fn cosine_similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        cosine(&self.term_vector(t1)?, &self.term_vector(t2)?)
    }

    /// The `l` vocabulary words most cosine-similar to `term`, excluding the
    /// term's own words, ordered by similarity descending then word ascending.
    pub fn top_words(&self, term: &str, l: usize) -> Result<Vec<(u32, f64)>> {
        let x = self.term_vector(term)?;
        let own = self.term_word_ids(term);
        let mut sims: Vec<(u32, f64)> = Vec::with_capacity(self.words.len());
        for i in 0..self.words.len() as u32 {
            if own.contains(&i) {
                continue;
            }
            match cosine(&x, self.vector_at(i)) {
                Ok(s) => sims.push((i, s)),
                Err(Error::DegenerateVector) => continue,
                Err(e) => return Err(e),
            }
        }
        let by_rank = |a: &(u32, f64), b: &(u32, f64)| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.words[a.0 as usize].cmp(&self.words[b.0 as usize]))
        };
        if sims.len() > l && l > 0 {
            sims.select_nth_unstable_by(l - 1, by_rank);
            sims.truncate(l);
        }
        sims.sort_by(by_rank);
        Ok(sims)
    }

    /// `V^t`: the model's `L` nearest words of `term`.
    pub fn neighbors(&self, term: &str) -> Result<Vec<(u32, f64)>> {
        self.top_words(term, self.neighborhood)
    }

    pub fn indirect_cosine_similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        let a = term_profile_sparse(self.neighbors(t1)?);
        let b = term_profile_sparse(self.neighbors(t2)?);
        self.profile_similarity(&a, &b)
    }

    /// Prepares `term` for comparison under the model's metric.
    pub fn profile(&self, term: &str) -> Result<Profile> {
        match self.metric {
            Metric::Cosine => Ok(Profile::Dense(self.term_vector(term)?)),
            Metric::IndirectCosine => Ok(term_profile_sparse(self.neighbors(term)?)),
        }
    }

    pub fn profile_similarity(&self, a: &Profile, b: &Profile) -> Result<f64> {
        match (a, b) {
            (Profile::Dense(x), Profile::Dense(y)) => cosine(x, y),
            (Profile::Sparse(x), Profile::Sparse(y)) => sparse_cosine(x, y),
            _ => Err(Error::InvalidParameter("profiles built under different metrics".into())),
        }
    }

    /// Similarity under the model's configured metric.
    pub fn similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        self.profile_similarity(&self.profile(t1)?, &self.profile(t2)?)
    }

    /// Precomputes profiles for a keyword universe. Keywords the model cannot
    /// resolve are kept as `None` and never ranked.
    pub fn keyword_space<S: AsRef<str> + Sync>(&self, names: &[S], exec: Execution) -> KeywordSpace {
        let profiles = par::map(exec, names, |n| self.profile(n.as_ref()).ok());
        KeywordSpace {
            names: names.iter().map(|n| normalize_keyword(n.as_ref())).collect(),
            profiles,
        }
    }
}

fn term_profile_sparse(mut neighbors: Vec<(u32, f64)>) -> Profile {
    neighbors.sort_by_key(|&(i, _)| i);
    Profile::Sparse(neighbors)
}

/// A keyword universe with precomputed profiles.
#[derive(Debug, Clone)]
pub struct KeywordSpace {
    names: Vec<String>,
    profiles: Vec<Option<Profile>>,
}

impl KeywordSpace {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn resolvable(&self) -> usize {
        self.profiles.iter().filter(|p| p.is_some()).count()
    }

    /// Universe positions of the `m` keywords most similar to `term`, by
    /// similarity descending then keyword ascending.
    pub fn top_m(&self, model: &SimilarityModel, term: &str, m: usize) -> Result<Vec<(usize, f64)>> {
        let p = model.profile(term)?;
        let mut scored: Vec<(usize, f64)> = Vec::new();
        for (i, q) in self.profiles.iter().enumerate() {
            let Some(q) = q else { continue };
            match model.profile_similarity(&p, q) {
                Ok(s) => scored.push((i, s)),
                Err(Error::DegenerateVector) => continue,
                Err(e) => return Err(e),
            }
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.names[a.0].cmp(&self.names[b.0])));
        scored.truncate(m);
        Ok(scored)
    }
}

/// Ranked `X_t`: the `m` universe keywords most similar to `term`.
pub fn top_m_similar<S: AsRef<str> + Sync>(
    model: &SimilarityModel,
    term: &str,
    universe: &[S],
    m: usize,
) -> Result<Vec<(String, f64)>> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let space = model.keyword_space(universe, Execution::Sequential);
    Ok(space
        .top_m(model, term, m)?
        .into_iter()
        .map(|(i, s)| (space.names[i].clone(), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(metric: Metric, l: usize) -> SimilarityModel {
        SimilarityModel::from_vectors(
            [
                ("a", vec![1.0, 0.0]),
                ("b", vec![0.0, 1.0]),
                ("c", vec![1.0, 1.0]),
                ("zero", vec![0.0, 0.0]),
            ],
            l,
            metric,
        )
        .unwrap()
    }

    #[test]
    fn term_vector_cases() {
        let m = toy(Metric::Cosine, 2);
        assert_eq!(m.term_vector("a").unwrap(), vec![1.0, 0.0]);
        assert_eq!(m.term_vector("a b").unwrap(), vec![0.5, 0.5]);
        // unknown word skipped; equals the mean over the known subset
        assert_eq!(m.term_vector("nope A").unwrap(), m.term_vector("a").unwrap());
        assert!(matches!(m.term_vector("nope never"), Err(Error::UnknownTerm(_))));
    }

    #[test]
    fn cosine_closed_forms() {
        let m = toy(Metric::Cosine, 2);
        assert!((m.cosine_similarity("c", "c").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.cosine_similarity("a", "b").unwrap(), 0.0);
        assert!((m.cosine_similarity("c", "a").unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(m.cosine_similarity("zero", "a"), Err(Error::DegenerateVector)));
    }

    #[test]
    fn neighbors_exclude_self_and_break_ties_by_word() {
        let m = toy(Metric::Cosine, 3);
        let n = m.neighbors("c").unwrap();
        let words: Vec<&str> = n.iter().map(|&(i, _)| m.word(i)).collect();
        // a and b tie at 1/sqrt(2); zero vector is skipped
        assert_eq!(words, vec!["a", "b"]);
    }

    #[test]
    fn top_m_similar_cases() {
        let m = toy(Metric::Cosine, 2);
        assert_eq!(top_m_similar(&m, "c", &["b"], 5).unwrap().len(), 1);
        let top = top_m_similar(&m, "a", &["b", "c", "a"], 2).unwrap();
        assert_eq!(top[0].0, "a");
        assert!((top[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(top[1].0, "c");
        assert!(top_m_similar(&m, "a", &["b"], 0).is_err());
    }

    #[test]
    fn parse_embeddings_format() {
        let text = "2 3\nFoo 1 0 0\nbar 0 1 0.5\n";
        let m = SimilarityModel::parse_embeddings(text, Path::new("e"), 15, Metric::Cosine).unwrap();
        assert_eq!(m.vocabulary_size(), 2);
        assert_eq!(m.dimension(), 3);
        assert!(m.word_vector("foo").is_some());
        assert!(SimilarityModel::parse_embeddings("2 3\nfoo 1 0\n", Path::new("e"), 15, Metric::Cosine).is_err());
        assert!(SimilarityModel::parse_embeddings("3 3\nfoo 1 0 0\n", Path::new("e"), 15, Metric::Cosine).is_err());
    }
}
