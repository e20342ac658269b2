// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations and seeded instance generators
//! shared by the integration suites. Nothing here calls the library's
//! search, core or scoring code; only graph accessors are used.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use kicq::{AttributedGraph, GraphBuilder, KicQuery, Predicate, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random attributed graph with `n` vertices, up to `m` edges and keywords
/// `w0..w{kw}`. Scores are often multiples of 1/8 so exact ties occur.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, m: usize, kw: usize) -> AttributedGraph {
    let mut b = GraphBuilder::new();
    for i in 0..kw {
        b.add_keyword(&format!("w{i}"));
    }
    for v in 0..n {
        let count = r.random_range(0..=3usize.min(kw));
        let attrs: Vec<(String, f64)> = (0..count)
            .map(|_| {
                let w = r.random_range(0..kw);
                let s = if r.random_bool(0.5) {
                    r.random_range(1..=8) as f64 / 8.0
                } else {
                    1.0 - r.random::<f64>()
                };
                (format!("w{w}"), s)
            })
            .collect();
        b.add_vertex(format!("v{v}"), &attrs);
    }
    if n > 1 {
        for _ in 0..m {
            let u = r.random_range(0..n as u32);
            let v = r.random_range(0..n as u32);
            b.add_edge(u, v);
        }
    }
    b.build().0
}

/// Random query over the keywords of `g`.
pub fn random_query(r: &mut ChaCha8Rng, g: &AttributedGraph, rs: &[usize], kmins: &[u32], betas: &[f64]) -> KicQuery {
    let kw = g.keywords().len() as u32;
    let terms = r.random_range(1..=3);
    let sets = (0..terms)
        .map(|_| (0..r.random_range(1..=2)).map(|_| r.random_range(0..kw)).collect())
        .collect();
    let predicate = if r.random_bool(0.5) {
        Predicate::And
    } else {
        Predicate::Or
    };
    KicQuery::new(
        sets,
        predicate,
        rs[r.random_range(0..rs.len())],
        kmins[r.random_range(0..kmins.len())],
        betas[r.random_range(0..betas.len())],
    )
    .unwrap()
}

pub fn adjacency(g: &AttributedGraph) -> Vec<Vec<u32>> {
    (0..g.vertex_count() as u32).map(|v| g.neighbors(v).to_vec()).collect()
}

/// Keeps deleting alive vertices of induced degree `< k`.
pub fn naive_k_core(adj: &[Vec<u32>], alive: &[bool], k: u32) -> Vec<bool> {
    let mut alive = alive.to_vec();
    loop {
        let mut changed = false;
        for v in 0..adj.len() {
            if alive[v] && (adj[v].iter().filter(|&&u| alive[u as usize]).count() as u32) < k {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

/// Core numbers by repeated peeling at every level.
pub fn naive_core_numbers(adj: &[Vec<u32>]) -> Vec<u32> {
    let n = adj.len();
    let mut core = vec![0u32; n];
    let mut alive = vec![true; n];
    let mut k = 1;
    while alive.iter().any(|&a| a) {
        alive = naive_k_core(adj, &alive, k);
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
        k += 1;
    }
    core
}

fn uf_find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        x = p[x];
    }
    x
}

/// Connected components of the alive vertices by union-find, each sorted,
/// ordered by smallest member.
pub fn uf_components(adj: &[Vec<u32>], alive: &[bool]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut p: Vec<usize> = (0..n).collect();
    for v in 0..n {
        if !alive[v] {
            continue;
        }
        for &u in &adj[v] {
            if alive[u as usize] {
                let (a, b) = (uf_find(&mut p, v), uf_find(&mut p, u as usize));
                if a != b {
                    p[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for v in (0..n).filter(|&v| alive[v]) {
        groups.entry(uf_find(&mut p, v)).or_default().push(v as u32);
    }
    let mut comps: Vec<Vec<u32>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// `γ_v` for every vertex by scanning attributes.
pub fn oracle_gamma(g: &AttributedGraph, q: &KicQuery) -> Vec<f64> {
    (0..g.vertex_count() as u32)
        .map(|v| {
            let per: Vec<f64> = q
                .term_sets()
                .iter()
                .map(|set| {
                    g.attrs(v)
                        .iter()
                        .filter(|(w, _)| set.contains(w))
                        .map(|&(_, s)| s)
                        .fold(0.0, f64::max)
                })
                .collect();
            match q.predicate() {
                Predicate::And => per.iter().copied().fold(f64::INFINITY, f64::min),
                Predicate::Or => per.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCommunity {
    pub members: Vec<VertexId>,
    pub k: u32,
    pub score: f64,
}

pub fn oracle_score(g: &AttributedGraph, beta: f64, k: u32, influence: f64) -> f64 {
    beta * (k as f64 / g.max_degree() as f64) + (1.0 - beta) * (influence / g.vertex_count() as f64)
}

/// Every community of `G_q` with `k >= k_min`: each member set that is a
/// component of some maximal k-core, reported once at its largest such k.
/// Sorted by score desc, k desc, smallest member asc.
pub fn all_communities(g: &AttributedGraph, q: &KicQuery) -> Vec<OracleCommunity> {
    let gamma = oracle_gamma(g, q);
    let adj = adjacency(g);
    let base: Vec<bool> = gamma.iter().map(|&x| x > 0.0).collect();
    let mut best: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut k = 1;
    loop {
        let core = naive_k_core(&adj, &base, k);
        if !core.iter().any(|&a| a) {
            break;
        }
        for comp in uf_components(&adj, &core) {
            best.insert(comp, k);
        }
        k += 1;
    }
    let mut out: Vec<OracleCommunity> = best
        .into_iter()
        .filter(|&(_, k)| k >= q.k_min())
        .map(|(members, k)| {
            let infl: f64 = members.iter().map(|&v| gamma[v as usize]).sum();
            OracleCommunity {
                score: oracle_score(g, q.beta(), k, infl),
                members,
                k,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(b.k.cmp(&a.k))
            .then(a.members[0].cmp(&b.members[0]))
    });
    out
}

pub fn oracle_top_r(g: &AttributedGraph, q: &KicQuery) -> Vec<OracleCommunity> {
    let mut all = all_communities(g, q);
    all.truncate(q.r());
    all
}

/// Compares a result list with the oracle: same members and k in order,
/// scores within `tol`.
pub fn same_results(got: &[kicq::Community], want: &[OracleCommunity], tol: f64) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} results, oracle has {}", got.len(), want.len()));
    }
    for (i, (a, b)) in got.iter().zip(want).enumerate() {
        if a.members != b.members || a.k != b.k || (a.score - b.score).abs() > tol {
            return Err(format!(
                "rank {i}: got ({:?}, k={}, {}) want ({:?}, k={}, {})",
                a.members, a.k, a.score, b.members, b.k, b.score
            ));
        }
    }
    Ok(())
}

/// Best oracle score among communities inside `region` with `k` in
/// `lo..=hi`.
pub fn best_in_region(all: &[OracleCommunity], region: &[VertexId], lo: u32, hi: u32) -> Option<f64> {
    let set: HashSet<VertexId> = region.iter().copied().collect();
    all.iter()
        .filter(|c| c.k >= lo && c.k <= hi && c.members.iter().all(|v| set.contains(v)))
        .map(|c| c.score)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))
}

/// Random connected vertex set of size up to `size` grown by BFS from a
/// random seed.
pub fn random_connected_set(r: &mut ChaCha8Rng, g: &AttributedGraph, size: usize) -> Vec<VertexId> {
    let n = g.vertex_count() as u32;
    let start = r.random_range(0..n);
    let mut set = vec![start];
    let mut frontier: Vec<VertexId> = g.neighbors(start).to_vec();
    while set.len() < size && !frontier.is_empty() {
        let i = r.random_range(0..frontier.len());
        let v = frontier.swap_remove(i);
        if set.contains(&v) {
            continue;
        }
        set.push(v);
        frontier.extend(g.neighbors(v).iter().copied().filter(|u| !set.contains(u)));
    }
    set.sort_unstable();
    set
}

#[derive(Debug, Clone, Copy)]
pub struct OracleMetrics {
    pub density: f64,
    pub average_degree: f64,
    pub clustering: f64,
    pub diameter: u32,
}

/// Metrics from an adjacency matrix and Floyd-Warshall distances.
pub fn oracle_metrics(g: &AttributedGraph, members: &[VertexId]) -> OracleMetrics {
    let n = members.len();
    let mut a = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = i != j && g.neighbors(members[i]).contains(&members[j]);
        }
    }
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| a[i][j])
        .count();
    let density = if n == 1 {
        1.0
    } else {
        edges as f64 / (n * (n - 1) / 2) as f64
    };
    let mut cc = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
        if nb.len() < 2 {
            continue;
        }
        let mut t = 0;
        for x in 0..nb.len() {
            for y in x + 1..nb.len() {
                if a[nb[x]][nb[y]] {
                    t += 1;
                }
            }
        }
        cc += t as f64 / (nb.len() * (nb.len() - 1) / 2) as f64;
    }
    const INF: u32 = u32::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[i][j] = 0;
            } else if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][m] + d[m][j] < d[i][j] {
                    d[i][j] = d[i][m] + d[m][j];
                }
            }
        }
    }
    let diameter = d.iter().flatten().copied().max().unwrap_or(0);
    OracleMetrics {
        density,
        average_degree: 2.0 * edges as f64 / n as f64,
        clustering: cc / n as f64,
        diameter,
    }
}

/// CPJ over one community with keyword names compared as sets.
pub fn oracle_cpj_one(g: &AttributedGraph, members: &[VertexId]) -> f64 {
    if members.len() == 1 {
        return 1.0;
    }
    let sets: Vec<HashSet<&str>> = members
        .iter()
        .map(|&v| g.attrs(v).iter().map(|&(w, _)| g.keywords().name(w)).collect())
        .collect();
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let union = sets[i].union(&sets[j]).count();
            let inter = sets[i].intersection(&sets[j]).count();
            total += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Uncompressed KIC-tree oracle: for every k, the components of the
/// maximal k-core of the whole graph.
pub fn core_components_by_level(g: &AttributedGraph) -> BTreeMap<u32, Vec<Vec<u32>>> {
    let adj = adjacency(g);
    let mut out = BTreeMap::new();
    let all = vec![true; adj.len()];
    let mut k = 0;
    loop {
        let core = naive_k_core(&adj, &all, k);
        if !core.iter().any(|&a| a) {
            break;
        }
        out.insert(k, uf_components(&adj, &core));
        k += 1;
    }
    out
}
