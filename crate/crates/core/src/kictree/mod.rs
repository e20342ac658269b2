// SPDX-License-Identifier: Apache-2.0

//! KIC-tree: the hierarchy of connected maximal-k-core components with
//! per-keyword influence bounds.
//!
//! Nodes are numbered in pre-order, so the subtree of `u` is the id range
//! `u..subtree_end(u)` and its vertices are one contiguous slice of the
//! vertex permutation. Node 0 is a synthetic root with `k = 0` holding the
//! isolated vertices.

mod explore;
mod io;

use std::collections::BTreeMap;

pub use explore::{max_des_score, max_node_score, relevant_tree_nodes, tree_explore, NodeBound};

use crate::coreops::core_decomposition;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, KeywordId, VertexId};

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
struct NodeRecord {
    k: u32,
    k_max: u32,
    parent: u32,
    subtree_end: u32,
    v_start: u32,
    v_end: u32,
    il_start: u32,
    il_end: u32,
}

/// Per-keyword bounds of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IListEntry {
    pub keyword: KeywordId,
    rel_start: u32,
    rel_end: u32,
    /// `Σ s_v(w)` over every vertex of the subtree.
    pub max_kn: f64,
    /// Largest child `max_kn`; 0 at leaves.
    pub max_kd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KicTree {
    nodes: Vec<NodeRecord>,
    children: Vec<Vec<u32>>,
    perm: Vec<VertexId>,
    ilist: Vec<IListEntry>,
    rel: Vec<VertexId>,
    /// keyword -> nodes whose own vertices carry it, ascending
    keyword_nodes: Vec<Vec<u32>>,
    graph: GraphStamp,
}

/// Identifies the graph a tree was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GraphStamp {
    vertices: u32,
    edges: u64,
    keywords: u32,
    fingerprint: u32,
}

impl GraphStamp {
    fn of(g: &AttributedGraph) -> Self {
        let mut h = crc32fast::Hasher::new();
        for v in 0..g.vertex_count() as VertexId {
            h.update(&(g.degree(v) as u32).to_le_bytes());
            for &u in g.neighbors(v) {
                h.update(&u.to_le_bytes());
            }
            for &(w, s) in g.attrs(v) {
                h.update(&w.to_le_bytes());
                h.update(&s.to_le_bytes());
            }
        }
        Self {
            vertices: g.vertex_count() as u32,
            edges: g.edge_count() as u64,
            keywords: g.keywords().len() as u32,
            fingerprint: h.finalize(),
        }
    }
}

/// Borrowed view of one node.
#[derive(Debug, Clone, Copy)]
pub struct Node<'a> {
    tree: &'a KicTree,
    id: u32,
}

impl<'a> Node<'a> {
    fn rec(&self) -> &'a NodeRecord {
        &self.tree.nodes[self.id as usize]
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn k(&self) -> u32 {
        self.rec().k
    }

    pub fn k_max(&self) -> u32 {
        self.rec().k_max
    }

    pub fn parent(&self) -> Option<u32> {
        (self.rec().parent != NO_PARENT).then_some(self.rec().parent)
    }

    pub fn children(&self) -> &'a [u32] {
        &self.tree.children[self.id as usize]
    }

    pub fn is_leaf(&self) -> bool {
        self.children().is_empty()
    }

    /// One past the last node id of the subtree.
    pub fn subtree_end(&self) -> u32 {
        self.rec().subtree_end
    }

    /// Vertices stored at this node: those with core number `k` in its
    /// component. Ascending.
    pub fn vertex_set(&self) -> &'a [VertexId] {
        let r = self.rec();
        &self.tree.perm[r.v_start as usize..r.v_end as usize]
    }

    /// Every vertex of the subtree: the component this node represents.
    /// Not sorted.
    pub fn all_vertices(&self) -> &'a [VertexId] {
        let r = self.rec();
        let end = self
            .tree
            .nodes
            .get(r.subtree_end as usize)
            .map_or(self.tree.perm.len(), |n| n.v_start as usize);
        &self.tree.perm[r.v_start as usize..end]
    }

    pub fn ilist(&self) -> &'a [IListEntry] {
        let r = self.rec();
        &self.tree.ilist[r.il_start as usize..r.il_end as usize]
    }

    pub fn entry(&self, w: KeywordId) -> Option<&'a IListEntry> {
        let il = self.ilist();
        il.binary_search_by_key(&w, |e| e.keyword).ok().map(|i| &il[i])
    }

    /// `relV` of an entry of this node, ascending.
    pub fn rel_v(&self, e: &IListEntry) -> &'a [VertexId] {
        &self.tree.rel[e.rel_start as usize..e.rel_end as usize]
    }
}

struct Draft {
    k: u32,
    vertices: Vec<VertexId>,
    children: Vec<usize>,
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        let p = parent[v as usize];
        parent[v as usize] = parent[p as usize];
        v = p;
    }
    v
}

impl KicTree {
    /// Builds the tree bottom-up from the highest core level with a
    /// union-find over activated vertices.
    pub fn build(g: &AttributedGraph) -> Self {
        let n = g.vertex_count();
        let cd = core_decomposition(g);
        let core = cd.core();
        let mut by_level: Vec<Vec<VertexId>> = vec![Vec::new(); cd.max_core() as usize + 1];
        for v in 0..n {
            by_level[core[v] as usize].push(v as VertexId);
        }

        let mut uf: Vec<u32> = (0..n as u32).collect();
        let mut size = vec![1u32; n];
        let mut active = vec![false; n];
        // unparented nodes whose components lie in each union-find set
        let mut tops: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut stamp = vec![u32::MAX; n];
        let mut node_of_root = vec![0usize; n];
        let mut drafts: Vec<Draft> = Vec::new();

        for k in (1..by_level.len() as u32).rev() {
            let level = &by_level[k as usize];
            for &v in level {
                active[v as usize] = true;
            }
            for &v in level {
                for &u in g.neighbors(v) {
                    if !active[u as usize] {
                        continue;
                    }
                    let (mut a, mut b) = (find(&mut uf, v), find(&mut uf, u));
                    if a == b {
                        continue;
                    }
                    if size[a as usize] > size[b as usize] {
                        std::mem::swap(&mut a, &mut b);
                    }
                    uf[a as usize] = b;
                    size[b as usize] += size[a as usize];
                    let moved = std::mem::take(&mut tops[a as usize]);
                    tops[b as usize].extend(moved);
                }
            }
            for &v in level {
                let r = find(&mut uf, v) as usize;
                if stamp[r] != k {
                    stamp[r] = k;
                    node_of_root[r] = drafts.len();
                    drafts.push(Draft {
                        k,
                        vertices: Vec::new(),
                        children: std::mem::take(&mut tops[r]),
                    });
                    tops[r] = vec![node_of_root[r]];
                }
                drafts[node_of_root[r]].vertices.push(v);
            }
        }

        let mut root_children = Vec::new();
        for (v, &c) in core.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let r = find(&mut uf, v as u32) as usize;
            if stamp[r] != 0 {
                stamp[r] = 0;
                root_children.extend(std::mem::take(&mut tops[r]));
            }
        }
        let root = drafts.len();
        drafts.push(Draft {
            k: 0,
            vertices: by_level.first().cloned().unwrap_or_default(),
            children: root_children,
        });

        // children in order of their smallest subtree vertex; drafts are
        // created children-first so one forward pass suffices
        let mut min_vertex = vec![VertexId::MAX; drafts.len()];
        for i in 0..drafts.len() {
            let mut m = drafts[i].vertices.first().copied().unwrap_or(VertexId::MAX);
            for &c in &drafts[i].children {
                m = m.min(min_vertex[c]);
            }
            min_vertex[i] = m;
        }
        for d in &mut drafts {
            d.children.sort_by_key(|&c| min_vertex[c]);
        }

        Self::assemble(g, drafts, root)
    }

    fn assemble(g: &AttributedGraph, drafts: Vec<Draft>, root: usize) -> Self {
        // pre-order numbering
        let mut order = Vec::with_capacity(drafts.len());
        let mut parent_of = vec![NO_PARENT; drafts.len()];
        let mut stack = vec![root];
        while let Some(d) = stack.pop() {
            order.push(d);
            for &c in drafts[d].children.iter().rev() {
                stack.push(c);
            }
        }
        let mut id_of = vec![0u32; drafts.len()];
        for (i, &d) in order.iter().enumerate() {
            id_of[d] = i as u32;
        }
        for (d, draft) in drafts.iter().enumerate() {
            for &c in &draft.children {
                parent_of[c] = id_of[d];
            }
        }

        let count = order.len();
        let mut nodes = Vec::with_capacity(count);
        let mut children = Vec::with_capacity(count);
        let mut perm = Vec::with_capacity(g.vertex_count());
        for &d in &order {
            let v_start = perm.len() as u32;
            perm.extend_from_slice(&drafts[d].vertices);
            nodes.push(NodeRecord {
                k: drafts[d].k,
                k_max: drafts[d].k,
                parent: parent_of[d],
                subtree_end: 0,
                v_start,
                v_end: perm.len() as u32,
                il_start: 0,
                il_end: 0,
            });
            children.push(drafts[d].children.iter().map(|&c| id_of[c]).collect::<Vec<u32>>());
        }
        for u in (0..count).rev() {
            let mut end = u as u32 + 1;
            let mut k_max = nodes[u].k;
            for &c in &children[u] {
                end = end.max(nodes[c as usize].subtree_end);
                k_max = k_max.max(nodes[c as usize].k_max);
            }
            nodes[u].subtree_end = end;
            nodes[u].k_max = k_max;
        }

        let (ilist, rel) = build_ilists(g, &mut nodes, &children, &perm);
        let mut tree = Self {
            nodes,
            children,
            perm,
            ilist,
            rel,
            keyword_nodes: Vec::new(),
            graph: GraphStamp::of(g),
        };
        tree.index_keywords();
        tree
    }

    fn index_keywords(&mut self) {
        let mut kn = vec![Vec::new(); self.graph.keywords as usize];
        for (u, r) in self.nodes.iter().enumerate() {
            for e in &self.ilist[r.il_start as usize..r.il_end as usize] {
                if e.rel_end > e.rel_start {
                    kn[e.keyword as usize].push(u as u32);
                }
            }
        }
        self.keyword_nodes = kn;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> Node<'_> {
        self.node(0)
    }

    pub fn node(&self, id: u32) -> Node<'_> {
        assert!((id as usize) < self.nodes.len(), "node {id} out of range");
        Node { tree: self, id }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node<'_>> {
        (0..self.nodes.len() as u32).map(move |id| Node { tree: self, id })
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for u in 1..self.nodes.len() {
            depth[u] = depth[self.nodes[u].parent as usize] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Nodes whose own vertices carry keyword `w`.
    pub fn keyword_nodes(&self, w: KeywordId) -> &[u32] {
        self.keyword_nodes.get(w as usize).map_or(&[], Vec::as_slice)
    }

    pub fn vertex_count(&self) -> usize {
        self.perm.len()
    }

    /// Rejects a graph other than the one the tree was built from.
    pub fn check_graph(&self, g: &AttributedGraph) -> Result<()> {
        let s = &self.graph;
        if s.vertices as usize != g.vertex_count()
            || s.edges as usize != g.edge_count()
            || s.keywords as usize != g.keywords().len()
        {
            return Err(Error::IndexMismatch(format!(
                "index covers {} vertices, {} edges, {} keywords; graph has {}, {}, {}",
                s.vertices,
                s.edges,
                s.keywords,
                g.vertex_count(),
                g.edge_count(),
                g.keywords().len()
            )));
        }
        Ok(())
    }

    /// [`check_graph`](Self::check_graph) plus a content fingerprint.
    pub fn verify_graph(&self, g: &AttributedGraph) -> Result<()> {
        self.check_graph(g)?;
        if GraphStamp::of(g) != self.graph {
            return Err(Error::IndexMismatch(
                "graph content differs from the indexed graph".into(),
            ));
        }
        Ok(())
    }
}

/// Fills every node's ilist: `max_kn` sums scores over the subtree, `max_kd`
/// takes the largest child `max_kn`.
fn build_ilists(
    g: &AttributedGraph,
    nodes: &mut [NodeRecord],
    children: &[Vec<u32>],
    perm: &[VertexId],
) -> (Vec<IListEntry>, Vec<VertexId>) {
    struct Acc {
        rel: Vec<VertexId>,
        kn: f64,
        kd: f64,
    }
    let count = nodes.len();
    let mut maps: Vec<Option<BTreeMap<KeywordId, Acc>>> = (0..count).map(|_| None).collect();
    for u in (0..count).rev() {
        let r = &nodes[u];
        let mut map: BTreeMap<KeywordId, Acc> = BTreeMap::new();
        for &v in &perm[r.v_start as usize..r.v_end as usize] {
            for &(w, s) in g.attrs(v) {
                let acc = map.entry(w).or_insert(Acc {
                    rel: Vec::new(),
                    kn: 0.0,
                    kd: 0.0,
                });
                acc.rel.push(v);
                acc.kn += s;
            }
        }
        for &c in &children[u] {
            let child = maps[c as usize]
                .as_ref()
                .expect("children precede parents in reverse pre-order");
            for (&w, ca) in child {
                let acc = map.entry(w).or_insert(Acc {
                    rel: Vec::new(),
                    kn: 0.0,
                    kd: 0.0,
                });
                acc.kn += ca.kn;
                acc.kd = acc.kd.max(ca.kn);
            }
        }
        maps[u] = Some(map);
    }

    let mut ilist = Vec::new();
    let mut rel = Vec::new();
    for (u, map) in maps.into_iter().enumerate() {
        nodes[u].il_start = ilist.len() as u32;
        for (w, acc) in map.unwrap_or_default() {
            let rel_start = rel.len() as u32;
            rel.extend_from_slice(&acc.rel);
            ilist.push(IListEntry {
                keyword: w,
                rel_start,
                rel_end: rel.len() as u32,
                max_kn: acc.kn,
                max_kd: acc.kd,
            });
        }
        nodes[u].il_end = ilist.len() as u32;
    }
    (ilist, rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    pub(crate) fn graph(n: usize, edges: &[(u32, u32)], attrs: &[(u32, &str, f64)]) -> AttributedGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            let own: Vec<(&str, f64)> = attrs.iter().filter(|a| a.0 == i as u32).map(|a| (a.1, a.2)).collect();
            b.add_vertex(i.to_string(), &own);
        }
        for &(u, v) in edges {
            b.add_edge(u, v);
        }
        b.build().0
    }

    fn clique(vs: &[u32]) -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                e.push((a, b));
            }
        }
        e
    }

    #[test]
    fn single_clique_is_one_node() {
        let g = graph(4, &clique(&[0, 1, 2, 3]), &[]);
        let t = KicTree::build(&g);
        assert_eq!(t.node_count(), 2);
        let n = t.node(1);
        assert_eq!((n.k(), n.vertex_set()), (3, &[0, 1, 2, 3][..]));
        assert_eq!(t.root().children(), &[1]);
        assert!(t.root().vertex_set().is_empty());
    }

    #[test]
    fn disjoint_triangles_under_root() {
        let g = graph(7, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], &[]);
        let t = KicTree::build(&g);
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root().vertex_set(), &[6]);
        assert_eq!(t.root().children(), &[1, 2]);
        assert_eq!(t.node(1).vertex_set(), &[0, 1, 2]);
        assert_eq!(t.node(2).vertex_set(), &[3, 4, 5]);
        assert_eq!(t.node(2).k(), 2);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn nested_cores_form_a_chain() {
        // 4-clique {0..3} (3-core), 2-core ring through 4,5, pendant 6
        let mut e = clique(&[0, 1, 2, 3]);
        e.extend([(3, 4), (4, 5), (5, 0), (5, 6)]);
        let g = graph(7, &e, &[(0, "a", 0.5), (4, "a", 0.25), (6, "a", 1.0), (6, "b", 0.5)]);
        let t = KicTree::build(&g);
        let ks: Vec<u32> = t.nodes().map(|n| n.k()).collect();
        assert_eq!(ks, vec![0, 1, 2, 3]);
        assert_eq!(t.node(1).vertex_set(), &[6]);
        assert_eq!(t.node(2).vertex_set(), &[4, 5]);
        assert_eq!(t.node(3).vertex_set(), &[0, 1, 2, 3]);
        assert_eq!(t.node(1).k_max(), 3);
        let mut all = t.node(2).all_vertices().to_vec();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3, 4, 5]);

        let a = g.keywords().get("a").unwrap();
        let e1 = t.node(1).entry(a).unwrap();
        assert_eq!((e1.max_kn, e1.max_kd), (1.75, 0.75));
        assert_eq!(t.node(1).rel_v(e1), &[6]);
        let e3 = t.node(3).entry(a).unwrap();
        assert_eq!((e3.max_kn, e3.max_kd), (0.5, 0.0));
        let b = g.keywords().get("b").unwrap();
        assert!(t.node(2).entry(b).is_none());
        assert_eq!(t.keyword_nodes(a), &[1, 2, 3]);
    }

    #[test]
    fn empty_graph_has_only_root() {
        let g = GraphBuilder::new().build().0;
        let t = KicTree::build(&g);
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.root().k(), 0);
    }
}
