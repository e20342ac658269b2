// SPDX-License-Identifier: Apache-2.0

//! Top-r influential community search over a query-essential subgraph.

use std::cmp::Ordering;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use crate::coreops::{connected_components, core_decomposition, min_degree, peel_to_k_core, Workspace};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, InvertedIndex, VertexId};
use crate::kictree::KicTree;
use crate::query::{query_essential_subgraph, KicQuery, QuerySubgraph};
use crate::scoring::{Community, ScoreContext};

/// A bound must fall below the threshold by more than this to prune, so
/// rounding in the bound can never discard a tied community.
pub const PRUNE_SLACK: f64 = 1e-12;

/// Result order: score descending, then `k` descending, then smallest member
/// ascending. Distinct communities never compare equal.
pub fn result_order(a: &Community, b: &Community) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.k.cmp(&a.k))
        .then(a.members.first().cmp(&b.members.first()))
}

/// Bounded top-r list. The threshold is the r-th best score, or 0 while fewer
/// than r communities are held.
#[derive(Debug, Clone)]
pub struct ResultHeap {
    capacity: usize,
    entries: Vec<Community>,
}

impl ResultHeap {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn threshold(&self) -> f64 {
        if self.is_full() {
            self.entries.last().map_or(0.0, |c| c.score)
        } else {
            0.0
        }
    }

    /// Whether nothing scoring at most `bound` can still enter.
    pub fn prunable(&self, bound: f64) -> bool {
        bound + PRUNE_SLACK < self.threshold()
    }

    /// Inserts `c` if it ranks among the best `capacity`; an entry with the
    /// same member set keeps whichever ranks higher.
    pub fn offer(&mut self, c: Community) -> bool {
        if self.capacity == 0 {
            return false;
        }
        if let Some(i) = self.entries.iter().position(|e| e.members == c.members) {
            if result_order(&c, &self.entries[i]) != Ordering::Less {
                return false;
            }
            self.entries.remove(i);
        }
        if self.is_full() && result_order(&c, self.entries.last().unwrap()) != Ordering::Less {
            return false;
        }
        let at = self.entries.partition_point(|e| result_order(e, &c) == Ordering::Less);
        self.entries.insert(at, c);
        self.entries.truncate(self.capacity);
        true
    }

    /// Forces the threshold, for tests of pruning behaviour.
    pub fn seed(&mut self, score: f64) {
        while !self.is_full() {
            let id = VertexId::MAX - self.entries.len() as VertexId;
            self.entries.push(Community {
                members: vec![id],
                k: 0,
                score,
                influence_sum: 0.0,
            });
        }
        self.entries.sort_by(result_order);
    }

    pub fn entries(&self) -> &[Community] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<Community> {
        self.entries
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SearchStats {
    /// Connected components materialised.
    pub subgraphs_explored: u64,
    pub core_decompositions: u64,
    pub components_scored: u64,
    pub prunes_by_bound: u64,
    pub prunes_by_mindeg: u64,
    pub tree_nodes_visited: u64,
    pub tree_nodes_pruned: u64,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        self.subgraphs_explored += o.subgraphs_explored;
        self.core_decompositions += o.core_decompositions;
        self.components_scored += o.components_scored;
        self.prunes_by_bound += o.prunes_by_bound;
        self.prunes_by_mindeg += o.prunes_by_mindeg;
        self.tree_nodes_visited += o.tree_nodes_visited;
        self.tree_nodes_pruned += o.tree_nodes_pruned;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneKind {
    /// One cohesion level of a component skipped by the bound scan.
    Level,
    /// A KIC-tree node's own levels skipped.
    Node,
    /// A KIC-tree node's descendants skipped.
    Subtree,
}

/// One pruning decision: every community of `G_q` whose members lie in
/// `region` and whose `k` lies in `min_level..=max_level` was skipped while
/// the heap threshold was `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneEvent {
    pub kind: PruneKind,
    pub region: Vec<VertexId>,
    pub min_level: u32,
    pub max_level: u32,
    pub bound: f64,
    pub threshold: f64,
}

/// Heap, counters and optional prune audit of one query.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub heap: ResultHeap,
    pub stats: SearchStats,
    audit: Option<Vec<PruneEvent>>,
}

impl SearchState {
    pub fn new(r: usize) -> Self {
        Self {
            heap: ResultHeap::new(r),
            stats: SearchStats::default(),
            audit: None,
        }
    }

    /// Also records every pruning decision.
    pub fn audited(r: usize) -> Self {
        Self {
            audit: Some(Vec::new()),
            ..Self::new(r)
        }
    }

    pub fn auditing(&self) -> bool {
        self.audit.is_some()
    }

    pub(crate) fn record(&mut self, event: impl FnOnce() -> PruneEvent) {
        if let Some(a) = &mut self.audit {
            a.push(event());
        }
    }

    pub fn events(&self) -> &[PruneEvent] {
        self.audit.as_deref().unwrap_or(&[])
    }
}

/// Query outcome with counters and, for audited runs, the prune log.
#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub communities: Vec<Community>,
    pub stats: SearchStats,
    pub events: Vec<PruneEvent>,
}

impl From<SearchState> for QueryOutcome {
    fn from(s: SearchState) -> Self {
        Self {
            communities: s.heap.into_vec(),
            stats: s.stats,
            events: s.audit.unwrap_or_default(),
        }
    }
}

fn influence_sum(h: &QuerySubgraph, members: &[u32]) -> f64 {
    // ascending local order is ascending global order: sums are reproducible
    members.iter().map(|&v| h.relevance(v)).sum()
}

/// Enumerates every level from `k_min` to `max-deg(G_q)`, scoring each
/// component of the maximal k-core at its own level.
pub fn basic_explore(gq: &QuerySubgraph, q: &KicQuery, ctx: &ScoreContext, state: &mut SearchState) -> Result<()> {
    if gq.is_empty() {
        return Ok(());
    }
    let cd = core_decomposition(gq);
    state.stats.core_decompositions += 1;
    let mut ws = Workspace::for_graph(gq);
    let top = gq.max_degree().min(cd.max_core());
    for k in q.k_min()..=top {
        let core = cd.maximal_k_core(k);
        for comp in connected_components(gq, &core, &mut ws) {
            state.stats.subgraphs_explored += 1;
            let level = comp.iter().map(|&v| cd.core()[v as usize]).min().unwrap_or(0);
            if level != k {
                continue;
            }
            let infl = influence_sum(gq, &comp);
            state.stats.components_scored += 1;
            state.heap.offer(Community {
                members: comp.iter().map(|&v| gq.global(v)).collect(),
                k,
                score: ctx.score(k, infl)?,
                influence_sum: infl,
            });
        }
    }
    Ok(())
}

/// Branch-and-bound exploration of all of `h` from level `k` with no cap
/// below `max-deg(h)`.
pub fn pruned_explore(h: &QuerySubgraph, k: u32, ctx: &ScoreContext, state: &mut SearchState) -> Result<()> {
    modified_pruned_explore(h, k, h.max_degree(), ctx, state)
}

/// [`pruned_explore`] restricted to levels `k..=k_max`.
pub fn modified_pruned_explore(
    h: &QuerySubgraph,
    k: u32,
    k_max: u32,
    ctx: &ScoreContext,
    state: &mut SearchState,
) -> Result<()> {
    if h.is_empty() || k > k_max {
        return Ok(());
    }
    let mut ws = Workspace::for_graph(h);
    explore(h, &mut ws, &h.all(), k, k_max, ctx, state)
}

fn explore(
    h: &QuerySubgraph,
    ws: &mut Workspace,
    members: &[u32],
    mut k: u32,
    cap: u32,
    ctx: &ScoreContext,
    state: &mut SearchState,
) -> Result<()> {
    let md = min_degree(h, members, ws)?;
    if md > k {
        k = md;
        state.stats.prunes_by_mindeg += 1;
        if k > cap {
            return Ok(());
        }
    }
    let core = peel_to_k_core(h, members, k, ws);
    state.stats.core_decompositions += 1;
    for comp in connected_components(h, &core, ws) {
        state.stats.subgraphs_explored += 1;
        let level = min_degree(h, &comp, ws)?;
        if level > cap {
            continue;
        }
        let infl = influence_sum(h, &comp);
        state.stats.components_scored += 1;
        state.heap.offer(Community {
            members: comp.iter().map(|&v| h.global(v)).collect(),
            k: level,
            score: ctx.score(level, infl)?,
            influence_sum: infl,
        });
        for next in level + 1..=cap {
            let bound = ctx.score(next, infl)?;
            if !state.heap.prunable(bound) {
                explore(h, ws, &comp, next, cap, ctx, state)?;
                break;
            }
            state.stats.prunes_by_bound += 1;
            let threshold = state.heap.threshold();
            state.record(|| PruneEvent {
                kind: PruneKind::Level,
                region: comp.iter().map(|&v| h.global(v)).collect(),
                min_level: next,
                max_level: next,
                bound,
                threshold,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Basic,
    Pruned,
    Tree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Basic, Algorithm::Pruned, Algorithm::Tree];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Basic => "basic",
            Algorithm::Pruned => "pruned",
            Algorithm::Tree => "tree",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Algorithm::Basic),
            "pruned" => Ok(Algorithm::Pruned),
            "tree" => Ok(Algorithm::Tree),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Runs `q` with the chosen algorithm. `tree` is required for
/// [`Algorithm::Tree`].
pub fn run_query(
    g: &AttributedGraph,
    idx: &InvertedIndex,
    q: &KicQuery,
    algorithm: Algorithm,
    tree: Option<&KicTree>,
) -> Result<(Vec<Community>, SearchStats)> {
    let out = run_query_with(g, idx, q, algorithm, tree, SearchState::new(q.r()))?;
    Ok((out.communities, out.stats))
}

/// [`run_query`] starting from a caller-prepared state (e.g. audited or
/// pre-seeded).
pub fn run_query_with(
    g: &AttributedGraph,
    idx: &InvertedIndex,
    q: &KicQuery,
    algorithm: Algorithm,
    tree: Option<&KicTree>,
    mut state: SearchState,
) -> Result<QueryOutcome> {
    let ctx = ScoreContext::new(g, q.beta());
    match algorithm {
        Algorithm::Basic => {
            let gq = query_essential_subgraph(g, idx, q);
            basic_explore(&gq, q, &ctx, &mut state)?;
        }
        Algorithm::Pruned => {
            let gq = query_essential_subgraph(g, idx, q);
            pruned_explore(&gq, q.k_min(), &ctx, &mut state)?;
        }
        Algorithm::Tree => {
            let tree = tree.ok_or(Error::MissingIndex)?;
            tree.check_graph(g)?;
            crate::kictree::tree_explore(tree, g, q, &ctx, &mut state)?;
        }
    }
    Ok(state.into())
}
