// SPDX-License-Identifier: Apache-2.0

//! JSON-lines records. Every record is a single line tagged by `record`;
//! nothing time-dependent is written, so equal inputs give equal bytes.

use std::io::{self, BufRead};

use kicq::{AttributedGraph, Community, SearchStats};
use serde::{Deserialize, Serialize};

/// Scores are rounded to 9 decimals so listings compare across builds.
pub fn round9(x: f64) -> f64 {
    format!("{x:.9}").parse().unwrap_or(x)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CommunityRecord {
    pub rank: usize,
    pub score: f64,
    pub k: u32,
    pub size: usize,
    /// External ids, sorted.
    pub members: Vec<String>,
}

impl CommunityRecord {
    pub fn new(rank: usize, c: &Community, g: &AttributedGraph) -> Self {
        let mut members: Vec<String> = c.members.iter().map(|&v| g.external_id(v).to_owned()).collect();
        members.sort_unstable();
        Self {
            rank,
            score: round9(c.score),
            k: c.k,
            size: c.members.len(),
            members,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, Clone, Copy, Default)]
pub struct StatsRecord {
    pub subgraphs_explored: u64,
    pub core_decompositions: u64,
    pub components_scored: u64,
    pub prunes_by_bound: u64,
    pub prunes_by_mindeg: u64,
    pub tree_nodes_visited: u64,
    pub tree_nodes_pruned: u64,
}

impl From<SearchStats> for StatsRecord {
    fn from(s: SearchStats) -> Self {
        Self {
            subgraphs_explored: s.subgraphs_explored,
            core_decompositions: s.core_decompositions,
            components_scored: s.components_scored,
            prunes_by_bound: s.prunes_by_bound,
            prunes_by_mindeg: s.prunes_by_mindeg,
            tree_nodes_visited: s.tree_nodes_visited,
            tree_nodes_pruned: s.tree_nodes_pruned,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Query {
        algorithm: String,
        predicate: String,
        terms: Vec<String>,
        /// Graph keywords per term after expansion.
        keywords: Vec<Vec<String>>,
        r: usize,
        k_min: u32,
        beta: f64,
    },
    Community(CommunityRecord),
    Stats(StatsRecord),
    Graph {
        vertices: usize,
        edges: usize,
        keywords: usize,
    },
    Bench {
        algorithm: String,
        queries: usize,
        /// CRC-32 over the per-query result hashes, hex.
        result_hash: String,
        communities: usize,
        #[serde(flatten)]
        stats: StatsRecord,
    },
    Metric {
        name: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        item: Option<String>,
        value: f64,
    },
}

pub fn to_line(r: &Record) -> String {
    serde_json::to_string(r).expect("records serialise")
}

/// Reads the community records of a results file, ignoring other records.
pub fn read_communities(reader: impl BufRead) -> io::Result<Vec<CommunityRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        if let Record::Community(c) = rec {
            out.push(c);
        }
    }
    Ok(out)
}
