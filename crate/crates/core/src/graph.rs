// SPDX-License-Identifier: Apache-2.0

//! Attributed graph storage, text ingestion, binary persistence, the keyword
//! inverted index and semantic keyword extension.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::semantics::SimilarityModel;

pub type VertexId = u32;
pub type KeywordId = u32;

const GRAPH_MAGIC: &[u8] = b"KICQG";
const GRAPH_VERSION: u8 = 1;

/// Lower-cases and trims a keyword or query term.
pub fn normalize_keyword(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Bidirectional keyword string <-> id mapping. Ids are dense and assigned in
/// first-seen order.
#[derive(Debug, Clone, Default)]
pub struct KeywordTable {
    names: Vec<String>,
    ids: HashMap<String, KeywordId>,
}

impl PartialEq for KeywordTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl KeywordTable {
    pub fn intern(&mut self, name: &str) -> KeywordId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as KeywordId;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<KeywordId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: KeywordId) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Undirected simple graph whose vertices carry `(keyword, influence)` pairs.
///
/// Adjacency is stored in CSR form with each neighbor list sorted ascending.
/// Attribute lists are sorted by keyword id.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    external_ids: Vec<String>,
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    attrs: Vec<Vec<(KeywordId, f64)>>,
    keywords: KeywordTable,
    max_degree: u32,
}

/// Counters for input irregularities that ingestion tolerates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
    pub duplicate_attributes_merged: usize,
}

impl AttributedGraph {
    pub fn vertex_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn attrs(&self, v: VertexId) -> &[(KeywordId, f64)] {
        &self.attrs[v as usize]
    }

    /// Influence score `s_v(w)`; absent keywords score 0.
    #[inline]
    pub fn score(&self, v: VertexId, w: KeywordId) -> f64 {
        let a = &self.attrs[v as usize];
        match a.binary_search_by_key(&w, |&(k, _)| k) {
            Ok(i) => a[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn keywords(&self) -> &KeywordTable {
        &self.keywords
    }

    pub fn external_id(&self, v: VertexId) -> &str {
        &self.external_ids[v as usize]
    }

    pub fn external_ids(&self) -> &[String] {
        &self.external_ids
    }

    /// Linear lookup of a vertex by its external string id.
    pub fn find_vertex(&self, external: &str) -> Option<VertexId> {
        self.external_ids
            .iter()
            .position(|s| s == external)
            .map(|i| i as VertexId)
    }

    /// Iterates every undirected edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Serializes to the `KICQG` binary container.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::container(GRAPH_MAGIC, GRAPH_VERSION);
        w.section(|w| {
            w.u32(self.keywords.len() as u32);
            for name in self.keywords.names() {
                w.str(name);
            }
        });
        w.section(|w| {
            w.u32(self.vertex_count() as u32);
            for id in &self.external_ids {
                w.str(id);
            }
        });
        w.section(|w| {
            for v in 0..self.vertex_count() as VertexId {
                let nb = self.neighbors(v);
                w.u32(nb.len() as u32);
                for &u in nb {
                    w.u32(u);
                }
            }
        });
        w.section(|w| {
            for a in &self.attrs {
                w.u32(a.len() as u32);
                for &(k, s) in a {
                    w.u32(k);
                    w.f64(s);
                }
            }
        });
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::container("graph", bytes, GRAPH_MAGIC, GRAPH_VERSION)?;
        let keywords = r.section("keywords", |r| {
            let n = r.len_u32()?;
            let mut table = KeywordTable::default();
            for _ in 0..n {
                let name = r.str()?;
                if table.get(&name).is_some() {
                    return Err(r.format_error(format!("duplicate keyword {name:?}")));
                }
                table.intern(&name);
            }
            Ok(table)
        })?;
        let external_ids = r.section("vertices", |r| {
            let n = r.len_u32()?;
            (0..n).map(|_| r.str()).collect::<Result<Vec<_>>>()
        })?;
        let n = external_ids.len();
        let (offsets, neighbors) = r.section("adjacency", |r| {
            let mut offsets = Vec::with_capacity(n + 1);
            let mut neighbors = Vec::new();
            offsets.push(0);
            for v in 0..n {
                let d = r.len_u32()?;
                let mut prev: Option<u32> = None;
                for _ in 0..d {
                    let u = r.u32()?;
                    if u as usize >= n || u as usize == v || prev.is_some_and(|p| p >= u) {
                        return Err(r.format_error(format!("invalid adjacency entry {u} for vertex {v}")));
                    }
                    prev = Some(u);
                    neighbors.push(u);
                }
                offsets.push(neighbors.len());
            }
            Ok((offsets, neighbors))
        })?;
        let attrs = r.section("attributes", |r| {
            let mut attrs = Vec::with_capacity(n);
            for v in 0..n {
                let m = r.len_u32()?;
                let mut a = Vec::with_capacity(m);
                for _ in 0..m {
                    let k = r.u32()?;
                    let s = r.f64()?;
                    if k as usize >= keywords.len() || !(0.0..=1.0).contains(&s) {
                        return Err(r.format_error(format!("invalid attribute ({k}, {s}) on vertex {v}")));
                    }
                    if a.last().is_some_and(|&(p, _)| p >= k) {
                        return Err(r.format_error(format!("unsorted attributes on vertex {v}")));
                    }
                    a.push((k, s));
                }
                attrs.push(a);
            }
            Ok(attrs)
        })?;
        r.finish()?;
        let g = Self::assemble(external_ids, offsets, neighbors, attrs, keywords);
        // symmetry is the one structural property a per-vertex scan cannot see
        for (u, v) in g.edges() {
            if g.neighbors(v).binary_search(&u).is_err() {
                return Err(Error::Format {
                    kind: "graph",
                    msg: format!("asymmetric edge {u}-{v}"),
                });
            }
        }
        let half: usize = (0..g.vertex_count() as VertexId)
            .map(|u| g.neighbors(u).iter().filter(|&&v| v > u).count())
            .sum();
        if half * 2 != g.neighbors.len() {
            return Err(Error::Format {
                kind: "graph",
                msg: "adjacency is not symmetric".into(),
            });
        }
        Ok(g)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    fn assemble(
        external_ids: Vec<String>,
        offsets: Vec<usize>,
        neighbors: Vec<VertexId>,
        attrs: Vec<Vec<(KeywordId, f64)>>,
        keywords: KeywordTable,
    ) -> Self {
        let max_degree = offsets.windows(2).map(|w| (w[1] - w[0]) as u32).max().unwrap_or(0);
        Self {
            external_ids,
            offsets,
            neighbors,
            attrs,
            keywords,
            max_degree,
        }
    }

    /// Copy of this graph with attribute lists replaced (same length, each
    /// sorted by keyword id).
    fn with_attrs(&self, attrs: Vec<Vec<(KeywordId, f64)>>) -> Self {
        Self { attrs, ..self.clone() }
    }
}

/// Incremental constructor. Keywords are normalized; duplicate
/// `(vertex, keyword)` pairs keep the maximum score; self-loops and repeated
/// edges are dropped and counted.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    external_ids: Vec<String>,
    attrs: Vec<Vec<(KeywordId, f64)>>,
    keywords: KeywordTable,
    edges: Vec<(VertexId, VertexId)>,
    report: IngestReport,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a vertex and returns its dense id. Scores are assumed validated.
    pub fn add_vertex<S: AsRef<str>>(&mut self, external: impl Into<String>, attrs: &[(S, f64)]) -> VertexId {
        let id = self.external_ids.len() as VertexId;
        self.external_ids.push(external.into());
        let mut list: Vec<(KeywordId, f64)> = Vec::with_capacity(attrs.len());
        for (kw, s) in attrs {
            let k = self.keywords.intern(&normalize_keyword(kw.as_ref()));
            list.push((k, *s));
        }
        list.sort_by_key(|&(k, _)| k);
        let mut merged: Vec<(KeywordId, f64)> = Vec::with_capacity(list.len());
        for (k, s) in list {
            match merged.last_mut() {
                Some(last) if last.0 == k => {
                    last.1 = last.1.max(s);
                    self.report.duplicate_attributes_merged += 1;
                }
                _ => merged.push((k, s)),
            }
        }
        self.attrs.push(merged);
        id
    }

    /// Registers a keyword without attaching it to any vertex.
    pub fn add_keyword(&mut self, name: &str) -> KeywordId {
        self.keywords.intern(&normalize_keyword(name))
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        if u == v {
            self.report.self_loops_dropped += 1;
            return;
        }
        self.edges.push((u.min(v), u.max(v)));
    }

    pub fn vertex_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn build(mut self) -> (AttributedGraph, IngestReport) {
        let n = self.external_ids.len();
        self.edges.sort_unstable();
        let before = self.edges.len();
        self.edges.dedup();
        self.report.duplicate_edges_dropped += before - self.edges.len();

        let mut degree = vec![0usize; n];
        for &(u, v) in &self.edges {
            assert!((v as usize) < n, "edge endpoint {v} out of range");
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0; offsets[n]];
        for &(u, v) in &self.edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        let g = AttributedGraph::assemble(self.external_ids, offsets, neighbors, self.attrs, self.keywords);
        (g, self.report)
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Parses the vertices and edges text formats. `*_name` only labels errors.
pub fn parse_graph(
    vertices_text: &str,
    vertices_name: &Path,
    edges_text: &str,
    edges_name: &Path,
) -> Result<(AttributedGraph, IngestReport)> {
    let mut b = GraphBuilder::new();
    let mut by_external: HashMap<String, VertexId> = HashMap::new();

    for (i, raw) in vertices_text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (ext, attr_text) = match line.split_once('\t') {
            Some((e, a)) => (e.trim(), a.trim()),
            None => (line.trim(), ""),
        };
        if ext.is_empty() {
            return Err(parse_err(vertices_name, line_no, "empty vertex id"));
        }
        if by_external.contains_key(ext) {
            return Err(Error::DuplicateVertex {
                path: vertices_name.to_path_buf(),
                line: line_no,
                id: ext.to_owned(),
            });
        }
        let mut attrs: Vec<(String, f64)> = Vec::new();
        for item in attr_text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (kw, score) = item
                .rsplit_once(':')
                .ok_or_else(|| parse_err(vertices_name, line_no, format!("attribute {item:?} lacks ':<score>'")))?;
            let kw = normalize_keyword(kw);
            if kw.is_empty() {
                return Err(parse_err(vertices_name, line_no, "empty keyword"));
            }
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| parse_err(vertices_name, line_no, format!("bad score {score:?}")))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::ScoreOutOfRange {
                    path: vertices_name.to_path_buf(),
                    line: line_no,
                    score,
                });
            }
            attrs.push((kw, score));
        }
        let id = b.add_vertex(ext, &attrs);
        by_external.insert(ext.to_owned(), id);
    }

    for (i, raw) in edges_text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(a), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(edges_name, line_no, "expected `<u>\\t<v>`"));
        };
        let lookup = |s: &str| {
            by_external.get(s.trim()).copied().ok_or_else(|| Error::UnknownVertex {
                path: edges_name.to_path_buf(),
                line: line_no,
                id: s.trim().to_owned(),
            })
        };
        let u = lookup(a)?;
        let v = lookup(c)?;
        b.add_edge(u, v);
    }

    let (g, report) = b.build();
    if report.self_loops_dropped + report.duplicate_edges_dropped > 0 {
        log::warn!(
            "dropped {} self-loops and {} duplicate edges",
            report.self_loops_dropped,
            report.duplicate_edges_dropped
        );
    }
    Ok((g, report))
}

/// Reads the vertices and edges text files.
pub fn load_graph(
    vertices_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<(AttributedGraph, IngestReport)> {
    let vp = vertices_path.as_ref();
    let ep = edges_path.as_ref();
    let vt = fs::read_to_string(vp)?;
    let et = fs::read_to_string(ep)?;
    parse_graph(&vt, vp, &et, ep)
}

/// Keyword -> sorted vertex list, restricted to positive scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    lists: Vec<Vec<VertexId>>,
}

impl InvertedIndex {
    pub fn get(&self, w: KeywordId) -> &[VertexId] {
        self.lists.get(w as usize).map_or(&[], Vec::as_slice)
    }

    pub fn keyword_count(&self) -> usize {
        self.lists.len()
    }

    /// Keywords with at least one posting.
    pub fn non_empty(&self) -> impl Iterator<Item = (KeywordId, &[VertexId])> {
        self.lists
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(k, l)| (k as KeywordId, l.as_slice()))
    }
}

pub fn build_inverted_index(g: &AttributedGraph) -> InvertedIndex {
    let mut lists = vec![Vec::new(); g.keywords().len()];
    // vertices are visited in ascending order, so every list comes out sorted
    for v in 0..g.vertex_count() as VertexId {
        for &(k, s) in g.attrs(v) {
            if s > 0.0 {
                lists[k as usize].push(v);
            }
        }
    }
    InvertedIndex { lists }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtensionReport {
    /// Graph keywords the embedding model cannot resolve.
    pub keywords_skipped: usize,
    pub attributes_added: usize,
    pub attributes_raised: usize,
}

/// Extends every vertex keyword `t` with the `m` most similar graph keywords
/// `X_t`, giving each `w ∈ X_t` the score `s_v(t)` (max-merged with any
/// existing score). Only original attributes propagate; added ones do not
/// cascade.
pub fn extend_graph_keywords(
    g: &AttributedGraph,
    model: &SimilarityModel,
    m: usize,
    exec: Execution,
) -> Result<(AttributedGraph, ExtensionReport)> {
    let mut report = ExtensionReport::default();
    if m == 0 {
        return Ok((g.clone(), report));
    }
    let universe = model.keyword_space(g.keywords().names(), exec);
    let ids: Vec<KeywordId> = (0..g.keywords().len() as KeywordId).collect();
    let expansions: Vec<Option<Vec<KeywordId>>> = par::map(exec, &ids, |&k| {
        let name = g.keywords().name(k);
        match universe.top_m(model, name, m) {
            Ok(top) => Some(top.into_iter().map(|(i, _)| i as KeywordId).collect()),
            Err(_) => None,
        }
    });
    report.keywords_skipped = expansions.iter().filter(|e| e.is_none()).count();
    if report.keywords_skipped > 0 {
        log::warn!(
            "{} keywords missing from the embedding vocabulary were not extended",
            report.keywords_skipped
        );
    }

    let mut attrs = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() as VertexId {
        let original = g.attrs(v);
        let mut out: HashMap<KeywordId, f64> = original.iter().copied().collect();
        for &(t, s) in original {
            let Some(xs) = &expansions[t as usize] else { continue };
            for &w in xs {
                match out.get_mut(&w) {
                    Some(cur) => {
                        if s > *cur {
                            *cur = s;
                            report.attributes_raised += 1;
                        }
                    }
                    None => {
                        out.insert(w, s);
                        report.attributes_added += 1;
                    }
                }
            }
        }
        let mut list: Vec<(KeywordId, f64)> = out.into_iter().collect();
        list.sort_by_key(|&(k, _)| k);
        attrs.push(list);
    }
    Ok((g.with_attrs(attrs), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(v: &str, e: &str) -> Result<(AttributedGraph, IngestReport)> {
        parse_graph(v, &PathBuf::from("v.txt"), e, &PathBuf::from("e.txt"))
    }

    #[test]
    fn triangle() {
        let (g, _) = parse("a\tml:0.5\nb\tml:0.5\nc\tdb:0.1\n", "a\tb\nb\tc\na\tc\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.keywords().len(), 2);
    }

    #[test]
    fn empty_edges() {
        let (g, _) = parse("a\nb\nc\nd\ne\n", "").unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.max_degree(), 0);
    }

    #[test]
    fn score_out_of_range_reports_line() {
        let err = parse("a\tml:0.5\nb\tml:1.3\n", "").unwrap_err();
        match err {
            Error::ScoreOutOfRange { line, score, .. } => {
                assert_eq!(line, 2);
                assert_eq!(score, 1.3);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(err_msg(parse("a\tml:1.3\n", "")).contains("score out of range"));
    }

    fn err_msg<T>(r: Result<T>) -> String {
        match r {
            Err(e) => e.to_string(),
            Ok(_) => panic!("expected error"),
        }
    }

    #[test]
    fn ingestion_errors() {
        assert!(matches!(
            parse("a\na\n", ""),
            Err(Error::DuplicateVertex { line: 2, .. })
        ));
        assert!(matches!(
            parse("a\nb\n", "a\tz\n"),
            Err(Error::UnknownVertex { line: 1, .. })
        ));
        assert!(matches!(parse("a\tml\n", ""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a\nb\n", "a b\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn drops_loops_and_duplicates_and_normalizes() {
        let (g, rep) = parse("a\t ML :0.2, ml:0.7\nb\n", "a\ta\na\tb\nb\ta\n").unwrap();
        assert_eq!(rep.self_loops_dropped, 1);
        assert_eq!(rep.duplicate_edges_dropped, 1);
        assert_eq!(rep.duplicate_attributes_merged, 1);
        assert_eq!(g.edge_count(), 1);
        let ml = g.keywords().get("ml").unwrap();
        assert_eq!(g.score(0, ml), 0.7);
    }

    #[test]
    fn inverted_index_examples() {
        let (g, _) = parse("0\tml:0.8\n1\tml:0.2,db:0.5\n", "").unwrap();
        let idx = build_inverted_index(&g);
        let ml = g.keywords().get("ml").unwrap();
        let db = g.keywords().get("db").unwrap();
        assert_eq!(idx.get(ml), &[0, 1]);
        assert_eq!(idx.get(db), &[1]);

        let (g, _) = parse("0\n1\n2\n", "").unwrap();
        assert_eq!(build_inverted_index(&g).non_empty().count(), 0);

        let (g, _) = parse("0\n1\tx:0.3\n2\n3\tx:0.9\n", "").unwrap();
        assert_eq!(build_inverted_index(&g).get(0), &[1, 3]);
    }

    #[test]
    fn zero_scores_are_not_indexed() {
        let (g, _) = parse("0\tml:0\n1\tml:0.1\n", "").unwrap();
        assert_eq!(build_inverted_index(&g).get(0), &[1]);
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let (g, _) = parse("a\tml:0.8,db:0.3\nb\tml:0.1\nc\n", "a\tb\nb\tc\n").unwrap();
        let bytes = g.to_bytes();
        assert_eq!(&bytes[..5], b"KICQG");
        let back = AttributedGraph::from_bytes(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_bytes(), bytes);
        assert!(AttributedGraph::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut flipped = bytes.clone();
        flipped[10] ^= 0xff;
        assert!(AttributedGraph::from_bytes(&flipped).is_err());
    }
}
