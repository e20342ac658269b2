// SPDX-License-Identifier: Apache-2.0

//! Query-time bounds over the KIC-tree and tree-guided exploration.

use std::collections::HashMap;

use super::{KicTree, Node};
use crate::error::Result;
use crate::graph::{AttributedGraph, KeywordId, VertexId};
use crate::query::{relevance_score, KicQuery, Predicate, QuerySubgraph};
use crate::scoring::ScoreContext;
use crate::search::{modified_pruned_explore, PruneEvent, PruneKind, SearchState};

/// A score bound with its influence component exposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBound {
    pub bound: f64,
    /// Influence component `S_inf`; 0 when no query keyword can contribute.
    pub s_inf: f64,
}

fn bound_with(
    u: Node<'_>,
    q: &KicQuery,
    ctx: &ScoreContext,
    k: u32,
    per_keyword: impl Fn(Option<&super::IListEntry>) -> f64,
) -> Result<NodeBound> {
    let sums = q
        .term_sets()
        .iter()
        .map(|set| set.iter().map(|&w| per_keyword(u.entry(w))).sum::<f64>());
    let aggregate = match q.predicate() {
        Predicate::And => sums.fold(f64::INFINITY, f64::min),
        Predicate::Or => sums.sum(),
    };
    Ok(NodeBound {
        bound: ctx.score(k, aggregate)?,
        s_inf: ctx.influence(aggregate),
    })
}

/// Best score any community with vertices stored at `u` can reach.
pub fn max_node_score(u: Node<'_>, q: &KicQuery, ctx: &ScoreContext) -> Result<NodeBound> {
    bound_with(u, q, ctx, u.k(), |e| e.map_or(0.0, |e| e.max_kn))
}

/// Best score any community inside one child subtree of `u` can reach.
pub fn max_des_score(u: Node<'_>, q: &KicQuery, ctx: &ScoreContext) -> Result<NodeBound> {
    bound_with(u, q, ctx, u.k_max(), |e| e.map_or(0.0, |e| e.max_kd))
}

/// `U`: nodes holding a vertex with a query keyword, closed under ancestors.
/// Returned as a membership mask indexed by node id.
pub fn relevant_tree_nodes(tree: &KicTree, q: &KicQuery) -> Vec<bool> {
    let mut mask = vec![false; tree.node_count()];
    for w in q.keywords() {
        for &u in tree.keyword_nodes(w) {
            let mut cur = Some(u);
            while let Some(c) = cur {
                if std::mem::replace(&mut mask[c as usize], true) {
                    break;
                }
                cur = tree.node(c).parent();
            }
        }
    }
    mask
}

struct TreeSearch<'a> {
    tree: &'a KicTree,
    g: &'a AttributedGraph,
    q: &'a KicQuery,
    ctx: &'a ScoreContext,
    keywords: Vec<KeywordId>,
    relevant: Vec<bool>,
    gamma: HashMap<VertexId, f64>,
}

impl TreeSearch<'_> {
    /// Query-relevant vertices of `u`'s subtree with their relevance,
    /// ascending by vertex.
    fn relevant_vertices(&mut self, u: Node<'_>) -> (Vec<VertexId>, Vec<f64>) {
        let mut vs = Vec::new();
        for id in u.id()..u.subtree_end() {
            if !self.relevant[id as usize] {
                continue;
            }
            let n = self.tree.node(id);
            for &w in &self.keywords {
                if let Some(e) = n.entry(w) {
                    vs.extend_from_slice(n.rel_v(e));
                }
            }
        }
        vs.sort_unstable();
        vs.dedup();
        let (g, q) = (self.g, self.q);
        let mut gammas = Vec::with_capacity(vs.len());
        vs.retain(|&v| {
            let gamma = *self.gamma.entry(v).or_insert_with(|| relevance_score(g, v, q));
            if gamma > 0.0 {
                gammas.push(gamma);
            }
            gamma > 0.0
        });
        (vs, gammas)
    }

    fn visit(&mut self, id: u32, parent_k: u32, state: &mut SearchState) -> Result<()> {
        let u = self.tree.node(id);
        state.stats.tree_nodes_visited += 1;

        if !u.is_leaf() {
            let des = max_des_score(u, self.q, self.ctx)?;
            if des.s_inf > 0.0 && !state.heap.prunable(des.bound) {
                for &c in u.children() {
                    if self.relevant[c as usize] {
                        self.visit(c, u.k(), state)?;
                    }
                }
            } else {
                state.stats.tree_nodes_pruned += 1;
                if state.auditing() {
                    let (region, _) = self.relevant_vertices(u);
                    let threshold = state.heap.threshold();
                    state.record(|| PruneEvent {
                        kind: PruneKind::Subtree,
                        region,
                        min_level: u.k() + 1,
                        max_level: u.k_max(),
                        bound: des.bound,
                        threshold,
                    });
                }
            }
        }

        if u.k() < self.q.k_min() {
            return Ok(());
        }
        let start = self.q.k_min().max(parent_k + 1);
        let own = max_node_score(u, self.q, self.ctx)?;
        if own.s_inf == 0.0 || state.heap.prunable(own.bound) {
            state.stats.tree_nodes_pruned += 1;
            if state.auditing() {
                let (region, _) = self.relevant_vertices(u);
                let threshold = state.heap.threshold();
                state.record(|| PruneEvent {
                    kind: PruneKind::Node,
                    region,
                    min_level: start,
                    max_level: u.k(),
                    bound: own.bound,
                    threshold,
                });
            }
            return Ok(());
        }
        let (vs, gammas) = self.relevant_vertices(u);
        if vs.is_empty() {
            return Ok(());
        }
        let h = QuerySubgraph::induced(self.g, vs, gammas);
        modified_pruned_explore(&h, start, u.k(), self.ctx, state)
    }
}

/// Post-order traversal of the relevant part of the tree: descendants are
/// explored (unless their bound is beaten) before the node's own levels
/// `max(k_min, parent.k + 1)..=u.k`.
pub fn tree_explore(
    tree: &KicTree,
    g: &AttributedGraph,
    q: &KicQuery,
    ctx: &ScoreContext,
    state: &mut SearchState,
) -> Result<()> {
    let relevant = relevant_tree_nodes(tree, q);
    if !relevant[0] {
        return Ok(());
    }
    let mut search = TreeSearch {
        tree,
        g,
        q,
        ctx,
        keywords: q.keywords(),
        relevant,
        gamma: HashMap::new(),
    };
    search.visit(0, 0, state)
}
