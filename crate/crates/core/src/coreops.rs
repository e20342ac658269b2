// SPDX-License-Identifier: Apache-2.0

//! Structural kernels over vertex subsets of an adjacency structure: bucket
//! core decomposition, k-core peeling, connected components, minimum degree.
//!
//! A subgraph is a sorted member list over a parent [`Adjacency`]; induced
//! degrees filter neighbours through an epoch-stamped membership mask held in
//! a reusable [`Workspace`].

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::query::QuerySubgraph;

/// Read access to an undirected simple graph with dense `u32` vertex ids.
pub trait Adjacency {
    fn order(&self) -> usize;
    fn adjacent(&self, v: u32) -> &[u32];
}

impl Adjacency for AttributedGraph {
    fn order(&self) -> usize {
        self.vertex_count()
    }

    fn adjacent(&self, v: u32) -> &[u32] {
        self.neighbors(v)
    }
}

impl Adjacency for QuerySubgraph {
    fn order(&self) -> usize {
        self.len()
    }

    fn adjacent(&self, v: u32) -> &[u32] {
        self.neighbors(v)
    }
}

/// Scratch arrays sized to one parent graph.
#[derive(Debug, Clone)]
pub struct Workspace {
    member: Vec<u32>,
    seen: Vec<u32>,
    slot: Vec<u32>,
    member_epoch: u32,
    seen_epoch: u32,
}

impl Workspace {
    pub fn new(order: usize) -> Self {
        Self {
            member: vec![0; order],
            seen: vec![0; order],
            slot: vec![0; order],
            member_epoch: 0,
            seen_epoch: 0,
        }
    }

    pub fn for_graph<G: Adjacency + ?Sized>(g: &G) -> Self {
        Self::new(g.order())
    }

    fn mark(&mut self, members: &[u32]) {
        self.member_epoch = next_epoch(&mut self.member, self.member_epoch);
        for (i, &v) in members.iter().enumerate() {
            self.member[v as usize] = self.member_epoch;
            self.slot[v as usize] = i as u32;
        }
    }

    #[inline]
    fn is_member(&self, v: u32) -> bool {
        self.member[v as usize] == self.member_epoch
    }

    fn reset_seen(&mut self) {
        self.seen_epoch = next_epoch(&mut self.seen, self.seen_epoch);
    }

    #[inline]
    fn see(&mut self, v: u32) -> bool {
        let fresh = self.seen[v as usize] != self.seen_epoch;
        self.seen[v as usize] = self.seen_epoch;
        fresh
    }
}

fn next_epoch(stamps: &mut [u32], epoch: u32) -> u32 {
    if epoch == u32::MAX {
        stamps.fill(0);
        1
    } else {
        epoch + 1
    }
}

/// Core numbers of a member set, aligned with the (sorted) member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDecomposition {
    vertices: Vec<u32>,
    core: Vec<u32>,
    max_core: u32,
}

impl CoreDecomposition {
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// `core()[i]` is the core number of `vertices()[i]`.
    pub fn core(&self) -> &[u32] {
        &self.core
    }

    pub fn core_of(&self, v: u32) -> Option<u32> {
        self.vertices.binary_search(&v).ok().map(|i| self.core[i])
    }

    pub fn max_core(&self) -> u32 {
        self.max_core
    }

    /// `{v : c(v) >= k}`, ascending.
    pub fn maximal_k_core(&self, k: u32) -> Vec<u32> {
        self.vertices
            .iter()
            .zip(&self.core)
            .filter(|&(_, &c)| c >= k)
            .map(|(&v, _)| v)
            .collect()
    }
}

/// Core decomposition of the whole graph.
pub fn core_decomposition<G: Adjacency + ?Sized>(g: &G) -> CoreDecomposition {
    let all: Vec<u32> = (0..g.order() as u32).collect();
    core_decomposition_within(g, &all, &mut Workspace::for_graph(g))
}

/// Bucket-peeling core decomposition of the subgraph induced by `members`
/// (sorted ascending). Runs in `O(|members| + induced edges)`.
pub fn core_decomposition_within<G: Adjacency + ?Sized>(
    g: &G,
    members: &[u32],
    ws: &mut Workspace,
) -> CoreDecomposition {
    debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
    ws.mark(members);
    let n = members.len();
    let mut deg: Vec<u32> = members
        .iter()
        .map(|&v| g.adjacent(v).iter().filter(|&&u| ws.is_member(u)).count() as u32)
        .collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0) as usize;

    // bin[d] = first position of degree-d vertices in `order`
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d as usize + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut order = vec![0u32; n];
    let mut pos = vec![0usize; n];
    let mut fill = bin.clone();
    // ascending fill keeps equal-degree vertices in id order
    for i in 0..n {
        let d = deg[i] as usize;
        pos[i] = fill[d];
        order[fill[d]] = i as u32;
        fill[d] += 1;
    }

    for p in 0..n {
        let i = order[p] as usize;
        let di = deg[i];
        for &u in g.adjacent(members[i]) {
            if !ws.is_member(u) {
                continue;
            }
            let j = ws.slot[u as usize] as usize;
            let dj = deg[j];
            if dj > di {
                let first = bin[dj as usize];
                let w = order[first] as usize;
                if w != j {
                    order.swap(pos[j], first);
                    pos.swap(j, w);
                }
                bin[dj as usize] += 1;
                deg[j] -= 1;
            }
        }
    }
    let max_core = deg.iter().copied().max().unwrap_or(0);
    CoreDecomposition {
        vertices: members.to_vec(),
        core: deg,
        max_core,
    }
}

/// Maximal k-core of the subgraph induced by `members`, by direct peeling.
pub fn peel_to_k_core<G: Adjacency + ?Sized>(g: &G, members: &[u32], k: u32, ws: &mut Workspace) -> Vec<u32> {
    ws.mark(members);
    let mut deg: Vec<u32> = members
        .iter()
        .map(|&v| g.adjacent(v).iter().filter(|&&u| ws.is_member(u)).count() as u32)
        .collect();
    let mut removed = vec![false; members.len()];
    let mut stack: Vec<usize> = (0..members.len()).filter(|&i| deg[i] < k).collect();
    for &i in &stack {
        removed[i] = true;
    }
    while let Some(i) = stack.pop() {
        for &u in g.adjacent(members[i]) {
            if !ws.is_member(u) {
                continue;
            }
            let j = ws.slot[u as usize] as usize;
            if !removed[j] {
                deg[j] -= 1;
                if deg[j] < k {
                    removed[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    members
        .iter()
        .zip(&removed)
        .filter(|&(_, &r)| !r)
        .map(|(&v, _)| v)
        .collect()
}

/// Connected components of the subgraph induced by `restrict` (sorted).
/// Each component is sorted; components are ordered by smallest member.
pub fn connected_components<G: Adjacency + ?Sized>(g: &G, restrict: &[u32], ws: &mut Workspace) -> Vec<Vec<u32>> {
    ws.mark(restrict);
    ws.reset_seen();
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for &s in restrict {
        if !ws.see(s) {
            continue;
        }
        let mut comp = vec![s];
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &u in g.adjacent(v) {
                if ws.is_member(u) && ws.see(u) {
                    comp.push(u);
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Minimum induced degree over `restrict`.
pub fn min_degree<G: Adjacency + ?Sized>(g: &G, restrict: &[u32], ws: &mut Workspace) -> Result<u32> {
    if restrict.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    ws.mark(restrict);
    Ok(restrict
        .iter()
        .map(|&v| g.adjacent(v).iter().filter(|&&u| ws.is_member(u)).count() as u32)
        .min()
        .unwrap_or(0))
}
