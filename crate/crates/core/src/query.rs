// SPDX-License-Identifier: Apache-2.0

//! Query formulation, vertex relevance and query-essential subgraphs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{normalize_keyword, AttributedGraph, InvertedIndex, KeywordId, KeywordTable, VertexId};
use crate::par::Execution;
use crate::semantics::{KeywordSpace, SimilarityModel, DEFAULT_EXPANSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    And,
    Or,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Predicate::And => "AND",
            Predicate::Or => "OR",
        })
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(Predicate::And),
            "OR" => Ok(Predicate::Or),
            _ => Err(Error::InvalidQuery(format!("unknown predicate {s:?}"))),
        }
    }
}

/// Search parameters with their default values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub r: usize,
    pub k_min: u32,
    pub beta: f64,
    /// Keywords added per query term by semantic expansion.
    pub m: usize,
}

impl Default for QueryParams {
    fn default() -> Self {
        Self {
            r: 3,
            k_min: 10,
            beta: 0.60,
            m: DEFAULT_EXPANSION,
        }
    }
}

/// A keyword-aware influential community query: one keyword set per query
/// term, joined by a single predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct KicQuery {
    term_sets: Vec<Vec<KeywordId>>,
    predicate: Predicate,
    r: usize,
    k_min: u32,
    beta: f64,
}

impl KicQuery {
    pub fn new(term_sets: Vec<Vec<KeywordId>>, predicate: Predicate, r: usize, k_min: u32, beta: f64) -> Result<Self> {
        if term_sets.is_empty() {
            return Err(Error::InvalidQuery("at least one term is required".into()));
        }
        if term_sets.iter().any(Vec::is_empty) {
            return Err(Error::InvalidQuery("every term needs at least one keyword".into()));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        if k_min == 0 {
            return Err(Error::InvalidParameter("k_min must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta {beta} outside [0, 1]")));
        }
        let term_sets = term_sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        Ok(Self {
            term_sets,
            predicate,
            r,
            k_min,
            beta,
        })
    }

    pub fn term_sets(&self) -> &[Vec<KeywordId>] {
        &self.term_sets
    }

    pub fn predicate(&self) -> Predicate {
        self.predicate
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k_min(&self) -> u32 {
        self.k_min
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Every keyword of every term set, sorted and deduplicated.
    pub fn keywords(&self) -> Vec<KeywordId> {
        let mut all: Vec<KeywordId> = self.term_sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn with_r(mut self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        self.r = r;
        Ok(self)
    }
}

/// Expands query terms into keyword sets against one graph's keyword table.
pub struct Formulator<'a> {
    keywords: &'a KeywordTable,
    semantic: Option<(&'a SimilarityModel, KeywordSpace)>,
}

impl<'a> Formulator<'a> {
    /// Exact matching only: a term maps to itself when it is a graph keyword.
    pub fn exact(keywords: &'a KeywordTable) -> Self {
        Self {
            keywords,
            semantic: None,
        }
    }

    pub fn semantic(keywords: &'a KeywordTable, model: &'a SimilarityModel, exec: Execution) -> Self {
        let space = model.keyword_space(keywords.names(), exec);
        Self {
            keywords,
            semantic: Some((model, space)),
        }
    }

    /// `X_t`: the `m` most similar graph keywords plus `t` itself when it is a
    /// graph keyword.
    pub fn expand(&self, term: &str, m: usize) -> Result<Vec<KeywordId>> {
        let norm = normalize_keyword(term);
        let mut set = Vec::new();
        if let Some((model, space)) = &self.semantic {
            if m > 0 {
                match space.top_m(model, &norm, m) {
                    // space positions coincide with keyword ids
                    Ok(top) => set.extend(top.into_iter().map(|(i, _)| i as KeywordId)),
                    Err(Error::UnknownTerm(_)) | Err(Error::DegenerateVector) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if let Some(id) = self.keywords.get(&norm) {
            set.push(id);
        }
        if set.is_empty() {
            return Err(Error::UnmatchedTerm(term.to_owned()));
        }
        set.sort_unstable();
        set.dedup();
        Ok(set)
    }

    pub fn formulate<S: AsRef<str>>(
        &self,
        terms: &[S],
        predicate: Predicate,
        params: &QueryParams,
    ) -> Result<KicQuery> {
        let sets = terms
            .iter()
            .map(|t| self.expand(t.as_ref(), params.m))
            .collect::<Result<Vec<_>>>()?;
        KicQuery::new(sets, predicate, params.r, params.k_min, params.beta)
    }
}

/// One-shot formulation; prefer [`Formulator`] for repeated queries.
pub fn formulate_query<S: AsRef<str>>(
    terms: &[S],
    predicate: Predicate,
    params: &QueryParams,
    model: Option<&SimilarityModel>,
    keywords: &KeywordTable,
) -> Result<KicQuery> {
    let f = match model {
        Some(m) => Formulator::semantic(keywords, m, Execution::Sequential),
        None => Formulator::exact(keywords),
    };
    f.formulate(terms, predicate, params)
}

/// `γ_v`: max score within each term set, then min (AND) or max (OR) across
/// term sets.
pub fn relevance_score(g: &AttributedGraph, v: VertexId, q: &KicQuery) -> f64 {
    let per_term = q
        .term_sets()
        .iter()
        .map(|set| set.iter().map(|&w| g.score(v, w)).fold(0.0, f64::max));
    match q.predicate() {
        Predicate::And => per_term.fold(f64::INFINITY, f64::min),
        Predicate::Or => per_term.fold(0.0, f64::max),
    }
}

/// Vertex-induced subgraph with per-vertex relevance, stored with local ids
/// `0..len` that follow ascending global id order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySubgraph {
    vertices: Vec<VertexId>,
    relevance: Vec<f64>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    max_degree: u32,
}

impl QuerySubgraph {
    /// Induces the subgraph of `g` on `vertices` (sorted ascending,
    /// duplicate-free) with matching relevance scores.
    pub fn induced(g: &AttributedGraph, vertices: Vec<VertexId>, relevance: Vec<f64>) -> Self {
        debug_assert_eq!(vertices.len(), relevance.len());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for &v in &vertices {
            let nb = g.neighbors(v);
            // merge the two sorted lists
            let (mut i, mut j) = (0, 0);
            while i < nb.len() && j < vertices.len() {
                match nb[i].cmp(&vertices[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => {
                        j += match vertices[j..].binary_search(&nb[i]) {
                            Ok(p) | Err(p) => p,
                        };
                    }
                    std::cmp::Ordering::Equal => {
                        adjacency.push(j as u32);
                        i += 1;
                        j += 1;
                    }
                }
            }
            offsets.push(adjacency.len());
        }
        let max_degree = offsets.windows(2).map(|w| (w[1] - w[0]) as u32).max().unwrap_or(0);
        Self {
            vertices,
            relevance,
            offsets,
            adjacency,
            max_degree,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    #[inline]
    pub fn global(&self, local: u32) -> VertexId {
        self.vertices[local as usize]
    }

    pub fn local(&self, global: VertexId) -> Option<u32> {
        self.vertices.binary_search(&global).ok().map(|i| i as u32)
    }

    #[inline]
    pub fn relevance(&self, local: u32) -> f64 {
        self.relevance[local as usize]
    }

    pub fn relevances(&self) -> &[f64] {
        &self.relevance
    }

    #[inline]
    pub fn neighbors(&self, local: u32) -> &[u32] {
        let i = local as usize;
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, local: u32) -> usize {
        let i = local as usize;
        self.offsets[i + 1] - self.offsets[i]
    }

    /// `max-deg(G_q)`.
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// All local ids.
    pub fn all(&self) -> Vec<u32> {
        (0..self.len() as u32).collect()
    }
}

fn union_of_lists<'a>(lists: impl Iterator<Item = &'a [VertexId]>) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = lists.flatten().copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn intersect_sorted(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Candidate vertices by inverted-list set algebra: intersection (AND) or
/// union (OR) of each term set's posting union.
pub fn candidate_vertices(idx: &InvertedIndex, q: &KicQuery) -> Vec<VertexId> {
    let per_term: Vec<Vec<VertexId>> = q
        .term_sets()
        .iter()
        .map(|set| union_of_lists(set.iter().map(|&w| idx.get(w))))
        .collect();
    match q.predicate() {
        Predicate::And => {
            let mut it = per_term.into_iter();
            let first = it.next().unwrap_or_default();
            it.fold(first, |acc, s| intersect_sorted(&acc, &s))
        }
        Predicate::Or => union_of_lists(per_term.iter().map(Vec::as_slice)),
    }
}

/// `G_q`: the subgraph induced by vertices with positive relevance.
pub fn query_essential_subgraph(g: &AttributedGraph, idx: &InvertedIndex, q: &KicQuery) -> QuerySubgraph {
    let mut vertices = Vec::new();
    let mut relevance = Vec::new();
    for v in candidate_vertices(idx, q) {
        let gamma = relevance_score(g, v, q);
        if gamma > 0.0 {
            vertices.push(v);
            relevance.push(gamma);
        }
    }
    QuerySubgraph::induced(g, vertices, relevance)
}

/// Splits `t1 AND t2 …` or `t1 OR t2 …` into terms. Double quotes group a
/// phrase; unquoted adjacent words also form one phrase. A single term
/// yields [`Predicate::Or`].
pub fn parse_query_expression(expr: &str) -> Result<(Vec<String>, Predicate)> {
    enum Tok {
        Word(String),
        Sep(Predicate),
    }
    let mut toks = Vec::new();
    let mut chars = expr.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut phrase = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => phrase.push(ch),
                    None => return Err(Error::InvalidQuery("unterminated quote".into())),
                }
            }
            toks.push(Tok::Word(phrase));
        } else {
            let mut word = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '"' {
                    break;
                }
                word.push(ch);
                chars.next();
            }
            match word.as_str() {
                "AND" => toks.push(Tok::Sep(Predicate::And)),
                "OR" => toks.push(Tok::Sep(Predicate::Or)),
                _ => toks.push(Tok::Word(word)),
            }
        }
    }

    let mut terms: Vec<String> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut predicate: Option<Predicate> = None;
    for tok in toks {
        match tok {
            Tok::Word(w) => current.push(w),
            Tok::Sep(p) => {
                if predicate.is_some_and(|q| q != p) {
                    return Err(Error::InvalidQuery("mixed AND/OR predicates are not supported".into()));
                }
                predicate = Some(p);
                let term = normalize_keyword(&current.join(" "));
                if term.is_empty() {
                    return Err(Error::InvalidQuery(format!("{p} is missing an operand")));
                }
                terms.push(term);
                current.clear();
            }
        }
    }
    let term = normalize_keyword(&current.join(" "));
    if term.is_empty() {
        return Err(Error::InvalidQuery(match predicate {
            Some(p) => format!("{p} is missing an operand"),
            None => "empty query".into(),
        }));
    }
    terms.push(term);
    Ok((terms, predicate.unwrap_or(Predicate::Or)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_inverted_index, GraphBuilder};
    use crate::semantics::Metric;

    fn graph() -> AttributedGraph {
        let mut b = GraphBuilder::new();
        b.add_vertex("v0", &[("ml", 0.8), ("db", 0.3)]);
        b.add_vertex("v1", &[("ml", 0.5)]);
        b.add_vertex("v2", &[("ml", 0.4), ("db", 0.6)]);
        b.add_vertex("v3", &[("db", 0.9), ("dl", 0.9)]);
        b.add_vertex("v4", &[("xx", 0.2)]);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 2), (3, 4)] {
            b.add_edge(u, v);
        }
        b.build().0
    }

    fn q(g: &AttributedGraph, sets: &[&[&str]], p: Predicate) -> KicQuery {
        let ids = sets
            .iter()
            .map(|s| s.iter().map(|w| g.keywords().get(w).unwrap()).collect())
            .collect();
        KicQuery::new(ids, p, 3, 1, 0.5).unwrap()
    }

    #[test]
    fn relevance_examples() {
        let g = graph();
        assert_eq!(relevance_score(&g, 0, &q(&g, &[&["ml"], &["db"]], Predicate::And)), 0.3);
        assert_eq!(relevance_score(&g, 0, &q(&g, &[&["ml"], &["db"]], Predicate::Or)), 0.8);
        for p in [Predicate::And, Predicate::Or] {
            assert_eq!(relevance_score(&g, 3, &q(&g, &[&["ml", "dl"]], p)), 0.9);
        }
        assert_eq!(relevance_score(&g, 4, &q(&g, &[&["ml"]], Predicate::Or)), 0.0);
    }

    #[test]
    fn essential_subgraph_set_algebra() {
        let mut b = GraphBuilder::new();
        b.add_vertex("0", &[("zz", 0.1)]);
        b.add_vertex("1", &[("ml", 0.5)]);
        b.add_vertex("2", &[("ml", 0.5), ("db", 0.5)]);
        b.add_vertex("3", &[("db", 0.5)]);
        b.add_edge(1, 2);
        b.add_edge(2, 3);
        let g = b.build().0;
        let idx = build_inverted_index(&g);
        let and = query_essential_subgraph(&g, &idx, &q(&g, &[&["ml"], &["db"]], Predicate::And));
        assert_eq!(and.vertices(), &[2]);
        assert_eq!(and.edge_count(), 0);
        let or = query_essential_subgraph(&g, &idx, &q(&g, &[&["ml"], &["db"]], Predicate::Or));
        assert_eq!(or.vertices(), &[1, 2, 3]);
        assert_eq!(or.edge_count(), 2);
        assert_eq!(or.max_degree(), 2);
        let none = query_essential_subgraph(&g, &idx, &q(&g, &[&["zz"]], Predicate::Or));
        assert_eq!(none.len(), 1);
    }

    #[test]
    fn induced_edges_are_exact() {
        let g = graph();
        let sub = QuerySubgraph::induced(&g, vec![0, 2, 3], vec![1.0; 3]);
        assert_eq!(sub.neighbors(0), &[1]);
        assert_eq!(sub.neighbors(1), &[0, 2]);
        assert_eq!(sub.neighbors(2), &[1]);
    }

    #[test]
    fn formulation() {
        let g = graph();
        let params = QueryParams {
            m: 1,
            k_min: 1,
            ..QueryParams::default()
        };
        let exact = Formulator::exact(g.keywords());
        let query = exact.formulate(&["ML", "ml"], Predicate::And, &params).unwrap();
        assert_eq!(query.term_sets()[0], query.term_sets()[1]);
        assert!(matches!(
            exact.formulate(&["nothing"], Predicate::Or, &params),
            Err(Error::UnmatchedTerm(_))
        ));

        let model = SimilarityModel::from_vectors(
            [
                ("ml", vec![1.0, 0.0, 0.0]),
                ("dl", vec![0.9, 0.1, 0.0]),
                ("db", vec![0.0, 1.0, 0.0]),
                ("xx", vec![0.0, 0.0, 1.0]),
                ("learning", vec![0.95, 0.05, 0.0]),
            ],
            2,
            Metric::Cosine,
        )
        .unwrap();
        let sem = Formulator::semantic(g.keywords(), &model, Execution::Sequential);
        let ml = g.keywords().get("ml").unwrap();
        assert_eq!(sem.expand("ml", 1).unwrap(), vec![ml]);
        let x = sem.expand("learning", 2).unwrap();
        let mut expect = vec![ml, g.keywords().get("dl").unwrap()];
        expect.sort();
        assert_eq!(x, expect);
    }

    #[test]
    fn query_validation() {
        assert!(KicQuery::new(vec![], Predicate::Or, 1, 1, 0.5).is_err());
        assert!(KicQuery::new(vec![vec![]], Predicate::Or, 1, 1, 0.5).is_err());
        assert!(KicQuery::new(vec![vec![0]], Predicate::Or, 0, 1, 0.5).is_err());
        assert!(KicQuery::new(vec![vec![0]], Predicate::Or, 1, 0, 0.5).is_err());
        assert!(KicQuery::new(vec![vec![0]], Predicate::Or, 1, 1, 1.5).is_err());
    }

    #[test]
    fn expression_grammar() {
        let (t, p) = parse_query_expression(r#""machine learning" AND databases"#).unwrap();
        assert_eq!(t, vec!["machine learning", "databases"]);
        assert_eq!(p, Predicate::And);
        let (t, p) = parse_query_expression("data mining OR ML OR x").unwrap();
        assert_eq!(t, vec!["data mining", "ml", "x"]);
        assert_eq!(p, Predicate::Or);
        let (t, _) = parse_query_expression("single").unwrap();
        assert_eq!(t, vec!["single"]);
        assert!(parse_query_expression("a AND b OR c").is_err());
        assert!(parse_query_expression("AND b").is_err());
        assert!(parse_query_expression("a OR").is_err());
        assert!(parse_query_expression("\"open").is_err());
        assert!(parse_query_expression("   ").is_err());
    }
}
