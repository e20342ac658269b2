// SPDX-License-Identifier: Apache-2.0

//! `KICQT` container: graph stamp, node table, vertex permutation, ilists.

use std::fs;
use std::path::Path;

use super::{GraphStamp, IListEntry, KicTree, NodeRecord, NO_PARENT};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, VertexId};

const TREE_MAGIC: &[u8] = b"KICQT";
const TREE_VERSION: u8 = 1;

fn invalid(msg: impl Into<String>) -> Error {
    Error::Format {
        kind: "index",
        msg: msg.into(),
    }
}

impl KicTree {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::container(TREE_MAGIC, TREE_VERSION);
        w.section(|w| {
            w.u32(self.graph.vertices);
            w.u64(self.graph.edges);
            w.u32(self.graph.keywords);
            w.u32(self.graph.fingerprint);
        });
        w.section(|w| {
            w.u32(self.nodes.len() as u32);
            for n in &self.nodes {
                w.u32(n.k);
                w.u32(n.k_max);
                w.u32(n.parent);
                w.u32(n.subtree_end);
                w.u32(n.v_start);
                w.u32(n.v_end);
            }
        });
        w.section(|w| {
            w.u32(self.perm.len() as u32);
            for &v in &self.perm {
                w.u32(v);
            }
        });
        w.section(|w| {
            for n in &self.nodes {
                let il = &self.ilist[n.il_start as usize..n.il_end as usize];
                w.u32(il.len() as u32);
                for e in il {
                    w.u32(e.keyword);
                    w.u32(e.rel_end - e.rel_start);
                    for &v in &self.rel[e.rel_start as usize..e.rel_end as usize] {
                        w.u32(v);
                    }
                    w.f64(e.max_kn);
                    w.f64(e.max_kd);
                }
            }
        });
        w.finish()
    }

    /// Decodes and validates a tree: structure, vertex permutation, ilist
    /// ordering, and `max_kd` against the children's `max_kn`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::container("index", bytes, TREE_MAGIC, TREE_VERSION)?;
        let graph = r.section("graph", |r| {
            Ok(GraphStamp {
                vertices: r.u32()?,
                edges: r.u64()?,
                keywords: r.u32()?,
                fingerprint: r.u32()?,
            })
        })?;
        let mut nodes = r.section("nodes", |r| {
            let n = r.len_u32()?;
            (0..n)
                .map(|_| {
                    Ok(NodeRecord {
                        k: r.u32()?,
                        k_max: r.u32()?,
                        parent: r.u32()?,
                        subtree_end: r.u32()?,
                        v_start: r.u32()?,
                        v_end: r.u32()?,
                        il_start: 0,
                        il_end: 0,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let perm = r.section("vertices", |r| {
            let n = r.len_u32()?;
            (0..n).map(|_| r.u32()).collect::<Result<Vec<VertexId>>>()
        })?;
        let (ilist, rel) = r.section("ilists", |r| {
            let mut ilist = Vec::new();
            let mut rel = Vec::new();
            for node in nodes.iter_mut() {
                node.il_start = ilist.len() as u32;
                let m = r.len_u32()?;
                for _ in 0..m {
                    let keyword = r.u32()?;
                    let len = r.len_u32()?;
                    let rel_start = rel.len() as u32;
                    for _ in 0..len {
                        rel.push(r.u32()?);
                    }
                    ilist.push(IListEntry {
                        keyword,
                        rel_start,
                        rel_end: rel.len() as u32,
                        max_kn: r.f64()?,
                        max_kd: r.f64()?,
                    });
                }
                node.il_end = ilist.len() as u32;
            }
            Ok((ilist, rel))
        })?;
        r.finish()?;

        let count = nodes.len();
        if count == 0 {
            return Err(invalid("no root node"));
        }
        let mut children = vec![Vec::new(); count];
        for (u, n) in nodes.iter().enumerate() {
            if u == 0 {
                if n.parent != NO_PARENT || n.k != 0 {
                    return Err(invalid("node 0 is not a k = 0 root"));
                }
            } else {
                let p = n.parent as usize;
                if p >= u || n.k <= nodes[p].k || u as u32 >= nodes[p].subtree_end {
                    return Err(invalid(format!("node {u} is not in pre-order under its parent")));
                }
                children[p].push(u as u32);
            }
            if n.subtree_end as usize > count || n.subtree_end as usize <= u {
                return Err(invalid(format!("node {u} has an invalid subtree range")));
            }
            let expected_start = if u == 0 { 0 } else { nodes[u - 1].v_end };
            if n.v_start != expected_start || n.v_end < n.v_start {
                return Err(invalid(format!("node {u} has a non-contiguous vertex range")));
            }
        }
        for u in (0..count).rev() {
            let mut end = u as u32 + 1;
            let mut k_max = nodes[u].k;
            for &c in &children[u] {
                end = end.max(nodes[c as usize].subtree_end);
                k_max = k_max.max(nodes[c as usize].k_max);
            }
            if nodes[u].subtree_end != end || nodes[u].k_max != k_max {
                return Err(invalid(format!("node {u} disagrees with its children")));
            }
        }
        if nodes[count - 1].v_end as usize != perm.len() || perm.len() != graph.vertices as usize {
            return Err(invalid("vertex permutation does not cover the graph"));
        }
        let mut seen = vec![false; perm.len()];
        for &v in &perm {
            if (v as usize) >= seen.len() || std::mem::replace(&mut seen[v as usize], true) {
                return Err(invalid(format!("vertex {v} is missing or repeated")));
            }
        }

        let tree = Self {
            nodes,
            children,
            perm,
            ilist,
            rel,
            keyword_nodes: Vec::new(),
            graph,
        };
        tree.validate_ilists()?;
        let mut tree = tree;
        tree.index_keywords();
        Ok(tree)
    }

    fn validate_ilists(&self) -> Result<()> {
        for node in self.nodes() {
            let il = node.ilist();
            let own = node.vertex_set();
            for (i, e) in il.iter().enumerate() {
                if e.keyword >= self.graph.keywords || (i > 0 && il[i - 1].keyword >= e.keyword) {
                    return Err(invalid(format!("node {} has a malformed ilist", node.id())));
                }
                let rel = node.rel_v(e);
                if rel.windows(2).any(|w| w[0] >= w[1]) || rel.iter().any(|v| own.binary_search(v).is_err()) {
                    return Err(invalid(format!("node {} has relV outside its vertex set", node.id())));
                }
                let kd = node
                    .children()
                    .iter()
                    .filter_map(|&c| self.node(c).entry(e.keyword))
                    .fold(0.0f64, |m, ce| m.max(ce.max_kn));
                if kd.to_bits() != e.max_kd.to_bits() {
                    return Err(invalid(format!(
                        "node {} keyword {}: stored maxKDScore {} but children give {}",
                        node.id(),
                        e.keyword,
                        e.max_kd,
                        kd
                    )));
                }
            }
            for &c in node.children() {
                if self.node(c).ilist().iter().any(|ce| node.entry(ce.keyword).is_none()) {
                    return Err(invalid(format!("node {} lacks a keyword of child {c}", node.id())));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Loads a tree and checks it was built from `g`.
    pub fn load_for(path: impl AsRef<Path>, g: &AttributedGraph) -> Result<Self> {
        let t = Self::load(path)?;
        t.verify_graph(g)?;
        Ok(t)
    }
}
