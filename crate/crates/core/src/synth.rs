// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic attributed graphs: configuration-model topology with a
//! power-law degree sequence, Zipf keyword popularity, uniform or Beta
//! influence scores.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Pareto, Zipf};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphBuilder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Influence {
    Uniform,
    Beta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub vertices: usize,
    /// Target edge count before self-loops and multi-edges are dropped.
    pub edges: usize,
    /// Power-law exponent of the degree distribution (> 1).
    pub degree_exponent: f64,
    pub keywords: usize,
    /// Each vertex draws between 1 and this many keywords.
    pub keywords_per_vertex: usize,
    pub zipf_exponent: f64,
    pub influence: Influence,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            vertices: 1000,
            edges: 4000,
            degree_exponent: 2.5,
            keywords: 50,
            keywords_per_vertex: 3,
            zipf_exponent: 1.1,
            influence: Influence::Uniform,
            seed: 42,
        }
    }
}

pub fn keyword_name(i: usize) -> String {
    format!("kw{i}")
}

/// Generates a graph fully determined by `cfg` (including its seed).
pub fn generate(cfg: &SynthConfig) -> Result<AttributedGraph> {
    if cfg.degree_exponent <= 1.0 {
        return Err(Error::InvalidParameter("degree exponent must exceed 1".into()));
    }
    if cfg.keywords == 0 && cfg.keywords_per_vertex > 0 {
        return Err(Error::InvalidParameter(
            "keywords per vertex needs a non-empty keyword universe".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.vertices;
    let mut b = GraphBuilder::new();
    for i in 0..cfg.keywords {
        b.add_keyword(&keyword_name(i));
    }

    let zipf = if cfg.keywords > 0 {
        Some(Zipf::new(cfg.keywords as f64, cfg.zipf_exponent).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let beta = match cfg.influence {
        Influence::Beta { alpha, beta } => {
            Some(Beta::new(alpha, beta).map_err(|e| Error::InvalidParameter(e.to_string()))?)
        }
        Influence::Uniform => None,
    };
    for v in 0..n {
        let mut attrs: Vec<(String, f64)> = Vec::new();
        if let Some(z) = &zipf {
            let count = rng.random_range(1..=cfg.keywords_per_vertex.max(1));
            for _ in 0..count {
                let w = z.sample(&mut rng) as usize - 1;
                let s = match &beta {
                    Some(d) => d.sample(&mut rng),
                    // (0, 1]
                    None => 1.0 - rng.random::<f64>(),
                };
                attrs.push((keyword_name(w), s));
            }
        }
        b.add_vertex(format!("v{v}"), &attrs);
    }

    if n > 1 && cfg.edges > 0 {
        let pareto = Pareto::new(1.0, cfg.degree_exponent - 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let weights: Vec<f64> = (0..n).map(|_| pareto.sample(&mut rng).min(n as f64)).collect();
        let total: f64 = weights.iter().sum();
        let stubs_wanted = 2.0 * cfg.edges as f64;
        let mut stubs: Vec<u32> = Vec::with_capacity(2 * cfg.edges + n);
        for (v, w) in weights.iter().enumerate() {
            let d = (w / total * stubs_wanted).round().max(1.0) as usize;
            stubs.extend(std::iter::repeat_n(v as u32, d.min(n - 1)));
        }
        if stubs.len() % 2 == 1 {
            stubs.pop();
        }
        stubs.shuffle(&mut rng);
        for pair in stubs.chunks_exact(2) {
            b.add_edge(pair[0], pair[1]);
        }
    }
    Ok(b.build().0)
}
