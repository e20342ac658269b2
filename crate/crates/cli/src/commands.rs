// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use kicq::graph::{extend_graph_keywords, load_graph};
use kicq::semantics::{davies_bouldin, taxonomy_ndcg, word_coherence};
use kicq::synth::{generate, Influence, SynthConfig};
use kicq::workload::{result_hash, run_batch, sample_queries, total_stats, QueryRun};
use kicq::{
    parse_query_expression, Algorithm, AttributedGraph, Community, Error, Formulator, KicTree, Predicate, QueryParams,
    SimilarityModel, Taxonomy,
};

use crate::records::{read_communities, round9, to_line, CommunityRecord, Record, StatsRecord};
use crate::{BenchArgs, EvalArgs, EvalMode, Failure, Format, QueryArgs, SemanticArgs};

type CmdResult = Result<(), Failure>;

/// Collects output lines, then prints them and mirrors them to `--out`.
struct Output {
    lines: Vec<String>,
}

impl Output {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn finish(self, out: Option<&Path>) -> CmdResult {
        let mut text = self.lines.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        print!("{text}");
        if let Some(p) = out {
            fs::write(p, text)?;
        }
        Ok(())
    }
}

fn load_model(path: &Path, sem: &SemanticArgs) -> Result<SimilarityModel, Failure> {
    Ok(SimilarityModel::load_embeddings(path, sem.l, sem.metric)?)
}

fn required<'a, T>(v: &'a Option<T>, flag: &str, mode: &str) -> Result<&'a T, Failure> {
    v.as_ref()
        .ok_or_else(|| Failure::Input(format!("eval {mode} requires --{flag}")))
}

pub fn build(vertices: &Path, edges: &Path, out: &Path) -> CmdResult {
    let (g, report) = load_graph(vertices, edges)?;
    g.save(out)?;
    log::info!("ingest: {report:?}");
    println!(
        "{} vertices, {} edges, {} keywords",
        g.vertex_count(),
        g.edge_count(),
        g.keywords().len()
    );
    Ok(())
}

pub fn augment(graph: &Path, embeddings: &Path, sem: &SemanticArgs, out: &Path) -> CmdResult {
    let g = AttributedGraph::load(graph)?;
    let model = load_model(embeddings, sem)?;
    let (ext, report) = extend_graph_keywords(&g, &model, sem.m, sem.exec)?;
    ext.save(out)?;
    println!(
        "{} attributes added, {} raised, {} keywords skipped",
        report.attributes_added, report.attributes_raised, report.keywords_skipped
    );
    Ok(())
}

pub fn index(graph: &Path, out: &Path) -> CmdResult {
    let g = AttributedGraph::load(graph)?;
    let tree = KicTree::build(&g);
    let bytes = tree.to_bytes();
    fs::write(out, &bytes)?;
    println!(
        "{} nodes, depth {}, {} bytes",
        tree.node_count(),
        tree.depth(),
        bytes.len()
    );
    Ok(())
}

pub fn query(a: &QueryArgs) -> CmdResult {
    let algo = Algorithm::from(a.search.algo);
    let g = AttributedGraph::load(&a.graph)?;
    let tree = match (&a.index, algo) {
        (Some(p), _) => Some(KicTree::load_for(p, &g)?),
        (None, Algorithm::Tree) => return Err(Error::MissingIndex.into()),
        (None, _) => None,
    };
    let (terms, predicate) = parse_query_expression(&a.query)?;
    let params = QueryParams {
        r: a.search.r,
        k_min: a.search.kmin,
        beta: a.search.beta,
        m: a.sem.m,
    };
    let model = a.embeddings.as_deref().map(|p| load_model(p, &a.sem)).transpose()?;
    let formulator = match &model {
        Some(m) => Formulator::semantic(g.keywords(), m, a.sem.exec),
        None => Formulator::exact(g.keywords()),
    };

    let (q, communities, stats) = match formulator.formulate(&terms, predicate, &params) {
        Ok(q) => {
            let idx = kicq::build_inverted_index(&g);
            let (c, s) = kicq::run_query(&g, &idx, &q, algo, tree.as_ref())?;
            (Some(q), c, s)
        }
        Err(Error::UnmatchedTerm(t)) => {
            log::warn!("term {t:?} matches no graph keyword");
            (None, Vec::new(), Default::default())
        }
        Err(e) => return Err(e.into()),
    };

    let keywords: Vec<Vec<String>> = match &q {
        Some(q) => q
            .term_sets()
            .iter()
            .map(|s| s.iter().map(|&w| g.keywords().name(w).to_owned()).collect())
            .collect(),
        None => Vec::new(),
    };
    let rows: Vec<CommunityRecord> = communities
        .iter()
        .enumerate()
        .map(|(i, c)| CommunityRecord::new(i + 1, c, &g))
        .collect();
    let stats = StatsRecord::from(stats);

    let mut out = Output::new();
    match a.format {
        Format::Records => {
            out.push(to_line(&Record::Query {
                algorithm: algo.to_string(),
                predicate: predicate.to_string(),
                terms,
                keywords,
                r: params.r,
                k_min: params.k_min,
                beta: params.beta,
            }));
            for row in rows {
                out.push(to_line(&Record::Community(row)));
            }
            out.push(to_line(&Record::Stats(stats)));
        }
        Format::Text => {
            out.push(format!(
                "{predicate} query over {} terms, algorithm {algo}",
                terms.len()
            ));
            for (t, kws) in terms.iter().zip(&keywords) {
                out.push(format!("  {t}: {}", kws.join(", ")));
            }
            if rows.is_empty() {
                out.push("no communities");
            }
            for row in &rows {
                out.push(format!(
                    "#{} score {:.9} k {} size {}: {}",
                    row.rank,
                    row.score,
                    row.k,
                    row.size,
                    row.members.join(" ")
                ));
            }
            out.push(stats_line(&stats));
        }
    }
    out.finish(a.out.as_deref())
}

fn stats_line(s: &StatsRecord) -> String {
    format!(
        "subgraphs {} cores {} scored {} bound-prunes {} mindeg-prunes {} tree-visited {} tree-pruned {}",
        s.subgraphs_explored,
        s.core_decompositions,
        s.components_scored,
        s.prunes_by_bound,
        s.prunes_by_mindeg,
        s.tree_nodes_visited,
        s.tree_nodes_pruned
    )
}

fn parse_influence(s: &str) -> Result<Influence, Failure> {
    let bad = || {
        Failure::Input(format!(
            "influence must be 'uniform' or 'beta:<alpha>:<beta>', got {s:?}"
        ))
    };
    if s == "uniform" {
        return Ok(Influence::Uniform);
    }
    let rest = s.strip_prefix("beta:").ok_or_else(bad)?;
    let (a, b) = rest.split_once(':').ok_or_else(bad)?;
    let alpha: f64 = a.parse().map_err(|_| bad())?;
    let beta: f64 = b.parse().map_err(|_| bad())?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(bad());
    }
    Ok(Influence::Beta { alpha, beta })
}

/// Order-sensitive CRC-32 over per-query result hashes.
fn batch_hash(runs: &[QueryRun]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    for r in runs {
        h.update(&result_hash(&r.communities).to_le_bytes());
    }
    h.finalize()
}

pub fn bench(a: &BenchArgs) -> CmdResult {
    let predicate: Predicate = a.predicate.parse()?;
    let cfg = SynthConfig {
        vertices: a.size,
        edges: a.edge_count,
        degree_exponent: a.degree_exponent,
        keywords: a.keywords,
        keywords_per_vertex: a.keywords_per_vertex,
        zipf_exponent: a.zipf,
        influence: parse_influence(&a.influence)?,
        seed: a.seed,
    };
    let g = generate(&cfg)?;
    let idx = kicq::build_inverted_index(&g);
    let tree = KicTree::build(&g);
    let params = QueryParams {
        r: a.r,
        k_min: a.kmin,
        beta: a.beta,
        ..QueryParams::default()
    };
    let queries = sample_queries(&idx, a.queries, a.terms, predicate, &params, 1, a.seed)?;

    let mut rows = Vec::new();
    for algo in Algorithm::ALL {
        let start = Instant::now();
        let runs = run_batch(&g, &idx, Some(&tree), &queries, algo, a.exec)?;
        let elapsed = start.elapsed();
        let mean_ms = if queries.is_empty() {
            0.0
        } else {
            elapsed.as_secs_f64() * 1e3 / queries.len() as f64
        };
        rows.push((
            algo,
            batch_hash(&runs),
            runs.iter().map(|r| r.communities.len()).sum::<usize>(),
            total_stats(&runs),
            mean_ms,
        ));
    }

    let mut out = Output::new();
    match a.format {
        Format::Records => {
            out.push(to_line(&Record::Graph {
                vertices: g.vertex_count(),
                edges: g.edge_count(),
                keywords: g.keywords().len(),
            }));
            for (algo, hash, communities, stats, _) in &rows {
                out.push(to_line(&Record::Bench {
                    algorithm: algo.to_string(),
                    queries: queries.len(),
                    result_hash: format!("{hash:08x}"),
                    communities: *communities,
                    stats: StatsRecord::from(*stats),
                }));
            }
        }
        Format::Text => {
            out.push(format!(
                "{} vertices, {} edges, {} keywords, {} {predicate} queries, {} execution",
                g.vertex_count(),
                g.edge_count(),
                g.keywords().len(),
                queries.len(),
                a.exec
            ));
            for (algo, hash, _, stats, mean_ms) in &rows {
                out.push(format!(
                    "{:<6} mean {mean_ms:>10.3} ms  hash {hash:08x}  {}",
                    algo.to_string(),
                    stats_line(&StatsRecord::from(*stats))
                ));
            }
        }
    }
    out.finish(a.out.as_deref())?;

    let first = rows[0].1;
    if let Some((algo, hash, ..)) = rows.iter().find(|r| r.1 != first) {
        return Err(Failure::Invariant(format!(
            "{algo} result hash {hash:08x} differs from {} hash {first:08x}",
            rows[0].0
        )));
    }
    Ok(())
}

/// Community member sets from a results file, as internal ids.
fn load_results(path: &Path, g: &AttributedGraph) -> Result<Vec<Community>, Failure> {
    let rows = read_communities(BufReader::new(File::open(path)?))?;
    rows.into_iter()
        .map(|r| {
            let mut members = r
                .members
                .iter()
                .map(|m| {
                    g.find_vertex(m)
                        .ok_or_else(|| Failure::Input(format!("{}: unknown vertex {m:?}", path.display())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            members.sort_unstable();
            Ok(Community {
                members,
                k: r.k,
                score: r.score,
                influence_sum: 0.0,
            })
        })
        .collect()
}

pub fn eval(a: &EvalArgs) -> CmdResult {
    let mode = format!("{:?}", a.mode).to_lowercase();
    let mut metrics: Vec<(String, Option<String>, f64)> = Vec::new();
    match a.mode {
        EvalMode::Ndcg => {
            let tax = Taxonomy::load(required(&a.taxonomy, "taxonomy", &mode)?)?;
            let model = load_model(required(&a.embeddings, "embeddings", &mode)?, &a.sem)?;
            let r = taxonomy_ndcg(&model, &tax, a.sem.m, a.sem.exec)?;
            metrics.push((format!("ndcg@{}", a.sem.m), None, r.mean));
            metrics.push(("topics_evaluated".into(), None, r.evaluated as f64));
            metrics.push(("topics_skipped".into(), None, r.skipped as f64));
        }
        EvalMode::Coherence | EvalMode::Db => {
            let model = load_model(required(&a.embeddings, "embeddings", &mode)?, &a.sem)?;
            let (terms, _) = parse_query_expression(required(&a.query, "query", &mode)?)?;
            if a.mode == EvalMode::Db {
                metrics.push(("davies_bouldin".into(), None, davies_bouldin(&model, &terms, a.sem.l)?));
            } else {
                let mut sum = 0.0;
                for t in &terms {
                    let c = word_coherence(&model, t, a.sem.l)?;
                    sum += c;
                    metrics.push(("coherence".into(), Some(t.clone()), c));
                }
                metrics.push(("coherence_mean".into(), None, sum / terms.len() as f64));
            }
        }
        EvalMode::Cpj | EvalMode::Structure => {
            let g = AttributedGraph::load(required(&a.graph, "graph", &mode)?)?;
            let comms = load_results(required(&a.results, "results", &mode)?, &g)?;
            if a.mode == EvalMode::Cpj {
                metrics.push(("cpj".into(), None, kicq::scoring::cpj(&comms, &g)?));
            } else {
                if comms.is_empty() {
                    return Err(Failure::Input("results file holds no communities".into()));
                }
                let mut mean = [0.0f64; 4];
                for (i, c) in comms.iter().enumerate() {
                    let m = kicq::scoring::structural_metrics(&c.members, &g)?;
                    let vals = [
                        m.density,
                        m.average_degree,
                        m.clustering_coefficient,
                        f64::from(m.diameter),
                    ];
                    let item = Some(format!("#{}", i + 1));
                    for (j, name) in STRUCTURE.iter().enumerate() {
                        metrics.push(((*name).into(), item.clone(), vals[j]));
                        mean[j] += vals[j] / comms.len() as f64;
                    }
                }
                for (j, name) in STRUCTURE.iter().enumerate() {
                    metrics.push((format!("{name}_mean"), None, mean[j]));
                }
            }
        }
    }

    let mut out = Output::new();
    for (name, item, value) in metrics {
        match a.format {
            Format::Records => out.push(to_line(&Record::Metric {
                name,
                item,
                value: round9(value),
            })),
            Format::Text => match item {
                Some(it) => out.push(format!("{name} {it}: {value:.6}")),
                None => out.push(format!("{name}: {value:.6}")),
            },
        }
    }
    out.finish(None)
}

const STRUCTURE: [&str; 4] = ["density", "average_degree", "clustering_coefficient", "diameter"];
