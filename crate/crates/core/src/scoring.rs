// SPDX-License-Identifier: Apache-2.0

//! Community score, its upper bound, and community-quality metrics.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, KeywordId, VertexId};

/// A connected component of a maximal k-core of `G_q`, reported at its
/// maximal `k` (the member set's minimum induced degree).
#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    /// Global vertex ids, ascending.
    pub members: Vec<VertexId>,
    pub k: u32,
    pub score: f64,
    /// `Σ γ_v` over members, summed in ascending vertex order.
    pub influence_sum: f64,
}

/// Graph-wide constants of the score: `max-deg(G⁺)`, `|V|` and `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreContext {
    pub max_degree: u32,
    pub vertex_count: usize,
    pub beta: f64,
}

impl ScoreContext {
    pub fn new(g: &AttributedGraph, beta: f64) -> Self {
        Self {
            max_degree: g.max_degree(),
            vertex_count: g.vertex_count(),
            beta,
        }
    }

    /// Cohesiveness term `k / max-deg`, 0 for an edgeless graph at `k = 0`.
    pub fn cohesiveness(&self, k: u32) -> Result<f64> {
        if self.max_degree == 0 {
            if k > 0 {
                return Err(Error::ImpossibleState(format!("k = {k} in a graph without edges")));
            }
            return Ok(0.0);
        }
        Ok(f64::from(k) / f64::from(self.max_degree))
    }

    pub fn influence(&self, influence_sum: f64) -> f64 {
        if self.vertex_count == 0 {
            0.0
        } else {
            influence_sum / self.vertex_count as f64
        }
    }

    /// `ζ = β·k/max-deg + (1−β)·Σγ/|V|`.
    pub fn score(&self, k: u32, influence_sum: f64) -> Result<f64> {
        Ok(self.beta * self.cohesiveness(k)? + (1.0 - self.beta) * self.influence(influence_sum))
    }
}

pub fn community_score(
    k: u32,
    influence_sum: f64,
    graph_max_degree: u32,
    graph_vertex_count: usize,
    beta: f64,
) -> Result<f64> {
    ScoreContext {
        max_degree: graph_max_degree,
        vertex_count: graph_vertex_count,
        beta,
    }
    .score(k, influence_sum)
}

/// `ζ*_k(H)`: the score any community of cohesion at most `k` inside `H` can
/// reach, given the influence sum over all of `H`.
pub fn upper_bound_score(
    subgraph_influence_sum: f64,
    k: u32,
    graph_max_degree: u32,
    graph_vertex_count: usize,
    beta: f64,
) -> Result<f64> {
    community_score(k, subgraph_influence_sum, graph_max_degree, graph_vertex_count, beta)
}

fn jaccard(a: &[(KeywordId, f64)], b: &[(KeywordId, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common as f64 / (a.len() + b.len() - common) as f64
}

/// Community pairwise Jaccard: per community, the mean keyword-set Jaccard
/// over unordered member pairs (1 for singletons); averaged over communities.
pub fn cpj(communities: &[Community], g: &AttributedGraph) -> Result<f64> {
    if communities.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for c in communities {
        let m = &c.members;
        if m.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        if m.len() == 1 {
            total += 1.0;
            continue;
        }
        let mut sum = 0.0;
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                sum += jaccard(g.attrs(m[i]), g.attrs(m[j]));
            }
        }
        total += sum / (m.len() * (m.len() - 1) / 2) as f64;
    }
    Ok(total / communities.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralMetrics {
    pub density: f64,
    pub average_degree: f64,
    /// Mean local clustering coefficient; vertices of degree < 2 count as 0.
    pub clustering_coefficient: f64,
    pub diameter: u32,
}

/// Density, average degree, clustering coefficient and diameter of the
/// subgraph induced by `members` (sorted ascending).
pub fn structural_metrics(members: &[VertexId], g: &AttributedGraph) -> Result<StructuralMetrics> {
    let n = members.len();
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let local = |v: VertexId| members.binary_search(&v).ok();
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&u| local(u)).collect())
        .collect();
    let degree_sum: usize = adj.iter().map(Vec::len).sum();
    let edges = degree_sum / 2;

    let density = if n == 1 {
        1.0
    } else {
        2.0 * edges as f64 / (n * (n - 1)) as f64
    };
    let average_degree = degree_sum as f64 / n as f64;

    let mut cc_total = 0.0;
    for nb in &adj {
        let d = nb.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if adj[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        cc_total += 2.0 * links as f64 / (d * (d - 1)) as f64;
    }

    let mut diameter = 0u32;
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.fill(u32::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == u32::MAX {
                    dist[u] = dist[v] + 1;
                    diameter = diameter.max(dist[u]);
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        if reached != n {
            return Err(Error::Disconnected);
        }
    }

    Ok(StructuralMetrics {
        density,
        average_degree,
        clustering_coefficient: cc_total / n as f64,
        diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    #[test]
    fn score_arithmetic() {
        assert_eq!(community_score(2, 1.5, 4, 10, 0.5).unwrap(), 0.325);
        assert_eq!(community_score(4, 0.0, 4, 10, 1.0).unwrap(), 1.0);
        assert_eq!(community_score(0, 10.0, 4, 10, 0.0).unwrap(), 1.0);
        assert!((upper_bound_score(0.4, 1, 4, 10, 0.5).unwrap() - 0.145).abs() < 1e-15);
        assert!(matches!(
            community_score(1, 0.0, 0, 3, 0.5),
            Err(Error::ImpossibleState(_))
        ));
        assert_eq!(community_score(0, 1.0, 0, 2, 0.5).unwrap(), 0.25);
    }

    fn keyword_graph(attrs: &[&[&str]], edges: &[(u32, u32)]) -> AttributedGraph {
        let mut b = GraphBuilder::new();
        for (i, a) in attrs.iter().enumerate() {
            let list: Vec<(&str, f64)> = a.iter().map(|w| (*w, 0.5)).collect();
            b.add_vertex(i.to_string(), &list);
        }
        for &(u, v) in edges {
            b.add_edge(u, v);
        }
        b.build().0
    }

    fn community(members: Vec<VertexId>) -> Community {
        Community {
            members,
            k: 1,
            score: 0.0,
            influence_sum: 0.0,
        }
    }

    #[test]
    fn cpj_cases() {
        let g = keyword_graph(&[&["a", "b"], &["a", "b"], &["c"], &["d"], &["a", "c"]], &[]);
        assert_eq!(cpj(&[community(vec![0, 1])], &g).unwrap(), 1.0);
        assert_eq!(cpj(&[community(vec![0, 2, 3])], &g).unwrap(), 0.0);
        // pairs: {a,b}/{c} = 0, {a,b}/{a,c} = 1/3, {c}/{a,c} = 1/2
        let expect = (0.0 + 1.0 / 3.0 + 0.5) / 3.0;
        assert!((cpj(&[community(vec![0, 2, 4])], &g).unwrap() - expect).abs() < 1e-15);
        assert_eq!(cpj(&[community(vec![3])], &g).unwrap(), 1.0);
    }

    #[test]
    fn structure_cases() {
        let k4 = keyword_graph(&[&[] as &[&str]; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let m = structural_metrics(&[0, 1, 2, 3], &k4).unwrap();
        assert_eq!(
            m,
            StructuralMetrics {
                density: 1.0,
                average_degree: 3.0,
                clustering_coefficient: 1.0,
                diameter: 1
            }
        );
        let path = keyword_graph(&[&[] as &[&str]; 4], &[(0, 1), (1, 2), (2, 3)]);
        let m = structural_metrics(&[0, 1, 2, 3], &path).unwrap();
        assert_eq!(
            m,
            StructuralMetrics {
                density: 0.5,
                average_degree: 1.5,
                clustering_coefficient: 0.0,
                diameter: 3
            }
        );
        let single = structural_metrics(&[2], &path).unwrap();
        assert_eq!((single.density, single.diameter), (1.0, 0));
        assert!(matches!(structural_metrics(&[0, 3], &path), Err(Error::Disconnected)));
    }
}
