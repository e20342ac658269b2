// SPDX-License-Identifier: Apache-2.0

//! Batches of queries run over one graph, sequentially or in parallel.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, InvertedIndex, KeywordId};
use crate::kictree::KicTree;
use crate::par::{self, Execution};
use crate::query::{KicQuery, Predicate, QueryParams};
use crate::scoring::Community;
use crate::search::{run_query, Algorithm, SearchStats};

/// Draws `count` single-keyword-per-term queries. Keywords are drawn
/// uniformly from those carried by at least `min_support` vertices.
pub fn sample_queries(
    idx: &InvertedIndex,
    count: usize,
    terms: usize,
    predicate: Predicate,
    params: &QueryParams,
    min_support: usize,
    seed: u64,
) -> Result<Vec<KicQuery>> {
    let pool: Vec<KeywordId> = idx
        .non_empty()
        .filter(|(_, list)| list.len() >= min_support)
        .map(|(w, _)| w)
        .collect();
    if pool.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no keyword has {min_support} or more vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let sets = pool
                .choose_multiple(&mut rng, terms.min(pool.len()))
                .map(|&w| vec![w])
                .collect();
            KicQuery::new(sets, predicate, params.r, params.k_min, params.beta)
        })
        .collect()
}

/// One query's answer and counters.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRun {
    pub communities: Vec<Community>,
    pub stats: SearchStats,
}

/// Runs every query with `algorithm`; output order follows `queries`.
pub fn run_batch(
    g: &AttributedGraph,
    idx: &InvertedIndex,
    tree: Option<&KicTree>,
    queries: &[KicQuery],
    algorithm: Algorithm,
    exec: Execution,
) -> Result<Vec<QueryRun>> {
    par::map(exec, queries, |q| {
        run_query(g, idx, q, algorithm, tree).map(|(communities, stats)| QueryRun { communities, stats })
    })
    .into_iter()
    .collect()
}

/// CRC-32 over members, `k` and score bits of a ranked result list.
pub fn result_hash(communities: &[Community]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    for c in communities {
        h.update(&(c.members.len() as u32).to_le_bytes());
        for v in &c.members {
            h.update(&v.to_le_bytes());
        }
        h.update(&c.k.to_le_bytes());
        h.update(&c.score.to_bits().to_le_bytes());
    }
    h.finalize()
}

/// Sum of counters over a batch.
pub fn total_stats(runs: &[QueryRun]) -> SearchStats {
    let mut total = SearchStats::default();
    for r in runs {
        total += r.stats;
    }
    total
}
