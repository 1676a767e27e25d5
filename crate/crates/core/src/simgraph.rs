//! Thresholded similarity graph over posts, its connected components and
//! maximal cliques.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedstore::{dot, EmbeddingMatrix};
use crate::error::{Error, IoContext, Result};
use crate::unionfind::UnionFind;

pub const DEFAULT_THETA: f64 = 0.85;
pub const DEFAULT_NODE_CAP: usize = 2_000;
const GRAPH_MAGIC: &[u8; 8] = b"MGGRAPH1";
const ROW_BLOCK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    #[default]
    Exact,
    Approx,
}

impl std::str::FromStr for GraphMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "exact" => Ok(GraphMode::Exact),
            "approx" => Ok(GraphMode::Approx),
            other => Err(Error::InvalidArgument(format!("unknown graph mode {other:?}"))),
        }
    }
}

/// Undirected edge, stored once with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub score: f64,
}

impl Edge {
    pub fn pair(&self) -> (u32, u32) {
        (self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxAudit {
    pub bits: usize,
    pub tables: usize,
    pub attempts: usize,
    pub sampled_rows: usize,
    pub audited_edges: usize,
    pub recovered_edges: usize,
    pub recall: f64,
    /// Set when the LSH retries never reached the recall target and the
    /// exact sweep was used instead.
    pub fell_back_to_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDiagnostics {
    pub nodes: usize,
    pub connected_nodes: usize,
    pub isolated_nodes: usize,
    pub edges: usize,
    pub approx: Option<ApproxAudit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    node_count: usize,
    theta: f64,
    mode: GraphMode,
    edges: Vec<Edge>,
    approx: Option<ApproxAudit>,
}

impl SimilarityGraph {
    /// Builds a graph from edges in any order; violations of the edge
    /// invariants (self-loops, duplicates, scores below `theta`) are rejected.
    pub fn from_edges(node_count: usize, theta: f64, mut edges: Vec<Edge>) -> Result<SimilarityGraph> {
        check_theta(theta)?;
        for e in edges.iter_mut() {
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            if e.a == e.b || e.b as usize >= node_count || e.score < theta {
                return Err(Error::InvalidArgument(format!("invalid edge {e:?}")));
            }
        }
        edges.sort_by_key(Edge::pair);
        if edges.windows(2).any(|w| w[0].pair() == w[1].pair()) {
            return Err(Error::InvalidArgument("parallel edges".into()));
        }
        Ok(SimilarityGraph {
            node_count,
            theta,
            mode: GraphMode::Exact,
            edges,
            approx: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    /// Edges sorted by `(a, b)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_pairs(&self) -> Vec<(u32, u32)> {
        self.edges.iter().map(Edge::pair).collect()
    }

    pub fn score(&self, a: u32, b: u32) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, Edge::pair)
            .ok()
            .map(|i| self.edges[i].score)
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self.node_count, &self.edges)
    }

    pub fn diagnostics(&self) -> GraphDiagnostics {
        let mut touched = vec![false; self.node_count];
        for e in &self.edges {
            touched[e.a as usize] = true;
            touched[e.b as usize] = true;
        }
        let connected = touched.iter().filter(|&&t| t).count();
        GraphDiagnostics {
            nodes: self.node_count,
            connected_nodes: connected,
            isolated_nodes: self.node_count - connected,
            edges: self.edges.len(),
            approx: self.approx.clone(),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |r: std::io::Result<()>| r.at("<graph>");
        io(out.write_all(GRAPH_MAGIC))?;
        io(out.write_all(&(self.node_count as u64).to_le_bytes()))?;
        io(out.write_all(&self.theta.to_le_bytes()))?;
        io(out.write_all(&[matches!(self.mode, GraphMode::Approx) as u8]))?;
        io(out.write_all(&(self.edges.len() as u64).to_le_bytes()))?;
        for e in &self.edges {
            io(out.write_all(&e.a.to_le_bytes()))?;
            io(out.write_all(&e.b.to_le_bytes()))?;
            io(out.write_all(&e.score.to_le_bytes()))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = BufWriter::new(File::create(path).at(path)?);
        self.write_to(&mut out)?;
        out.flush().at(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SimilarityGraph> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path).at(path)?.read_to_end(&mut bytes).at(path)?;
        let bad = |reason: &str| Error::Format {
            format: "graph",
            reason: reason.into(),
        };
        if bytes.len() < 33 || &bytes[..8] != GRAPH_MAGIC {
            return Err(bad("bad magic"));
        }
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let node_count = u64_at(8) as usize;
        let theta = f64::from_bits(u64_at(16));
        let mode = if bytes[24] == 1 { GraphMode::Approx } else { GraphMode::Exact };
        let count = u64_at(25) as usize;
        if bytes.len() != 33 + count * 16 {
            return Err(Error::Truncated {
                format: "graph",
                reason: format!("expected {count} edges"),
            });
        }
        let edges = bytes[33..]
            .chunks_exact(16)
            .map(|c| Edge {
                a: u32::from_le_bytes(c[0..4].try_into().expect("4")),
                b: u32::from_le_bytes(c[4..8].try_into().expect("4")),
                score: f64::from_le_bytes(c[8..16].try_into().expect("8")),
            })
            .collect();
        let mut graph = SimilarityGraph::from_edges(node_count, theta, edges)?;
        graph.mode = mode;
        Ok(graph)
    }

    /// CSV dump `node_a,node_b,score`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["node_a", "node_b", "score"])?;
        for e in &self.edges {
            writer.write_record([e.a.to_string(), e.b.to_string(), e.score.to_string()])?;
        }
        writer.flush().at("<edges>")?;
        Ok(())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Threshold(theta))
    }
}

/// Compressed sorted neighbor lists.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Adjacency {
    pub fn new(node_count: usize, edges: &[Edge]) -> Adjacency {
        let mut degree = vec![0usize; node_count + 1];
        for e in edges {
            degree[e.a as usize + 1] += 1;
            degree[e.b as usize + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; edges.len() * 2];
        for e in edges {
            neighbors[fill[e.a as usize]] = e.b;
            fill[e.a as usize] += 1;
            neighbors[fill[e.b as usize]] = e.a;
            fill[e.b as usize] += 1;
        }
        for v in 0..node_count {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Adjacency { offsets, neighbors }
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct ApproxParams {
    pub seed: u64,
    pub target_recall: f64,
    /// Fraction of rows whose full exact neighborhood is audited.
    pub audit_fraction: f64,
    pub max_attempts: usize,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams {
            seed: 0x5eed,
            target_recall: 0.99,
            audit_fraction: 0.01,
            max_attempts: 3,
        }
    }
}

pub fn build_graph(matrix: &EmbeddingMatrix, theta: f64, mode: GraphMode) -> Result<SimilarityGraph> {
    build_graph_with(matrix, theta, mode, &ApproxParams::default())
}

pub fn build_graph_with(
    matrix: &EmbeddingMatrix,
    theta: f64,
    mode: GraphMode,
    params: &ApproxParams,
) -> Result<SimilarityGraph> {
    check_theta(theta)?;
    if !matrix.is_unit_normalized(1e-4) {
        return Err(Error::InvalidArgument("similarity graph requires unit-normalized rows".into()));
    }
    if matrix.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many rows".into()));
    }
    let (edges, approx) = match mode {
        GraphMode::Exact => (exact_edges(matrix, theta), None),
        GraphMode::Approx => {
            let (edges, audit) = approx_edges(matrix, theta, params);
            (edges, Some(audit))
        }
    };
    Ok(SimilarityGraph {
        node_count: matrix.len(),
        theta,
        mode,
        edges,
        approx,
    })
}

/// Blocked dense sweep: row blocks in parallel, column blocks inside, each
/// block's edges sorted before concatenation so the result is ordered by
/// `(a, b)` whatever the worker count.
fn exact_edges(matrix: &EmbeddingMatrix, theta: f64) -> Vec<Edge> {
    let n = matrix.len();
    let blocks = n.div_ceil(ROW_BLOCK);
    let per_block: Vec<Vec<Edge>> = (0..blocks)
        .into_par_iter()
        .map(|bi| {
            let rows = bi * ROW_BLOCK..((bi + 1) * ROW_BLOCK).min(n);
            let mut out = Vec::new();
            for bj in bi..blocks {
                let cols_end = ((bj + 1) * ROW_BLOCK).min(n);
                for a in rows.clone() {
                    let u = matrix.row(a);
                    let start = (bj * ROW_BLOCK).max(a + 1);
                    for b in start..cols_end {
                        let score = dot(u, matrix.row(b));
                        if score >= theta {
                            out.push(Edge {
                                a: a as u32,
                                b: b as u32,
                                score,
                            });
                        }
                    }
                }
            }
            out.sort_unstable_by_key(Edge::pair);
            out
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

/// Per-bit collision probability of random-hyperplane hashing at cosine `theta`.
fn simhash_collision(theta: f64) -> f64 {
    1.0 - theta.clamp(-1.0, 1.0).acos() / std::f64::consts::PI
}

/// Chooses the widest signature (fewest candidates) for which the number of
/// tables needed to hit `target` at exactly `theta` stays within `max_tables`.
fn lsh_shape(theta: f64, target: f64, max_tables: usize) -> (usize, usize) {
    let p = simhash_collision(theta);
    for bits in (2..=24).rev() {
        let hit = p.powi(bits as i32);
        let tables = ((1.0 - target).ln() / (1.0 - hit).ln()).ceil() as usize;
        if tables.max(1) <= max_tables {
            return (bits, tables.max(1));
        }
    }
    (1, max_tables)
}

fn lsh_candidates(matrix: &EmbeddingMatrix, bits: usize, tables: usize, seed: u64) -> Vec<(u32, u32)> {
    let dim = matrix.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes: Vec<f32> = (0..bits * tables * dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut candidates: Vec<(u32, u32)> = (0..tables)
        .into_par_iter()
        .flat_map_iter(|t| {
            let table_planes = &planes[t * bits * dim..(t + 1) * bits * dim];
            let mut keyed: Vec<(u32, u32)> = (0..matrix.len())
                .map(|row| {
                    let v = matrix.row(row);
                    let mut sig = 0u32;
                    for (k, plane) in table_planes.chunks_exact(dim).enumerate() {
                        if dot(v, plane) >= 0.0 {
                            sig |= 1 << k;
                        }
                    }
                    (sig, row as u32)
                })
                .collect();
            keyed.sort_unstable();
            let mut pairs = Vec::new();
            for bucket in keyed.chunk_by(|x, y| x.0 == y.0) {
                for (i, &(_, a)) in bucket.iter().enumerate() {
                    for &(_, b) in &bucket[i + 1..] {
                        pairs.push((a, b));
                    }
                }
            }
            pairs.into_iter()
        })
        .collect();
    candidates.par_sort_unstable();
    candidates.dedup();
    candidates
}

fn approx_edges(matrix: &EmbeddingMatrix, theta: f64, params: &ApproxParams) -> (Vec<Edge>, ApproxAudit) {
    let n = matrix.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xa0d1_7000);
    let sample_size = ((n as f64 * params.audit_fraction).ceil() as usize).clamp(n.min(32), n);
    let mut sampled = index::sample(&mut rng, n, sample_size).into_vec();
    sampled.sort_unstable();
    let audited: Vec<(u32, u32)> = sampled
        .par_iter()
        .flat_map_iter(|&a| {
            let u = matrix.row(a);
            (0..n)
                .filter(move |&b| b != a && dot(u, matrix.row(b)) >= theta)
                .map(move |b| ((a.min(b)) as u32, (a.max(b)) as u32))
        })
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();

    let (bits, mut tables) = lsh_shape(theta, 0.999, 64);
    let mut attempts = 0;
    while attempts < params.max_attempts {
        attempts += 1;
        let seed = params.seed.wrapping_add(attempts as u64);
        let edges: Vec<Edge> = lsh_candidates(matrix, bits, tables, seed)
            .into_par_iter()
            .filter_map(|(a, b)| {
                let score = dot(matrix.row(a as usize), matrix.row(b as usize));
                (score >= theta).then_some(Edge { a, b, score })
            })
            .collect();
        let found: HashSet<(u32, u32)> = edges.iter().map(Edge::pair).collect();
        let recovered = audited.iter().filter(|p| found.contains(p)).count();
        let recall = if audited.is_empty() {
            1.0
        } else {
            recovered as f64 / audited.len() as f64
        };
        if recall >= params.target_recall {
            return (
                edges,
                ApproxAudit {
                    bits,
                    tables,
                    attempts,
                    sampled_rows: sample_size,
                    audited_edges: audited.len(),
                    recovered_edges: recovered,
                    recall,
                    fell_back_to_exact: false,
                },
            );
        }
        log::warn!("approximate sweep recall {recall:.4} below target; retrying with {} tables", tables * 2);
        tables *= 2;
    }
    (
        exact_edges(matrix, theta),
        ApproxAudit {
            bits,
            tables,
            attempts,
            sampled_rows: sample_size,
            audited_edges: audited.len(),
            recovered_edges: audited.len(),
            recall: 1.0,
            fell_back_to_exact: true,
        },
    )
}

/// A connected group of non-isolated nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub nodes: Vec<u32>,
    pub is_clique: bool,
    pub edge_count: usize,
}

impl Component {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Components sorted by size descending, ties by smallest node id.
pub fn connected_components(graph: &SimilarityGraph) -> Vec<Component> {
    let mut uf = UnionFind::new(graph.node_count());
    for e in graph.edges() {
        uf.union(e.a, e.b);
    }
    let mut root_slot = vec![usize::MAX; graph.node_count()];
    let mut groups: Vec<(Vec<u32>, usize)> = Vec::new();
    let mut touched = vec![false; graph.node_count()];
    for e in graph.edges() {
        touched[e.a as usize] = true;
        touched[e.b as usize] = true;
    }
    for v in 0..graph.node_count() as u32 {
        if !touched[v as usize] {
            continue;
        }
        let root = uf.find(v) as usize;
        if root_slot[root] == usize::MAX {
            root_slot[root] = groups.len();
            groups.push((Vec::new(), 0));
        }
        groups[root_slot[root]].0.push(v);
    }
    for e in graph.edges() {
        let root = uf.find(e.a) as usize;
        groups[root_slot[root]].1 += 1;
    }
    let mut components: Vec<Component> = groups
        .into_iter()
        .map(|(nodes, edge_count)| {
            let n = nodes.len();
            Component {
                nodes,
                is_clique: edge_count == n * (n - 1) / 2,
                edge_count,
            }
        })
        .collect();
    components.sort_by(|x, y| y.len().cmp(&x.len()).then(x.nodes[0].cmp(&y.nodes[0])));
    components
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueSet {
    /// Each clique sorted ascending; the list sorted lexicographically.
    pub cliques: Vec<Vec<u32>>,
    /// The component exceeded the node cap and is returned whole.
    pub approximated: bool,
}

/// Maximal cliques of one component by pivoted Bron–Kerbosch over bitsets.
pub fn maximal_cliques(component: &Component, adjacency: &Adjacency, node_cap: usize) -> CliqueSet {
    if component.is_clique {
        return CliqueSet {
            cliques: vec![component.nodes.clone()],
            approximated: false,
        };
    }
    if component.len() > node_cap {
        log::warn!(
            "component of {} nodes exceeds clique cap {node_cap}; using the whole component",
            component.len()
        );
        return CliqueSet {
            cliques: vec![component.nodes.clone()],
            approximated: true,
        };
    }
    let nodes = &component.nodes;
    let n = nodes.len();
    let words = n.div_ceil(64);
    let mut local_adj = vec![Bits::empty(words); n];
    for (i, &v) in nodes.iter().enumerate() {
        for u in adjacency.neighbors(v) {
            if let Ok(j) = nodes.binary_search(u) {
                local_adj[i].set(j);
            }
        }
    }
    let mut found = Vec::new();
    let mut current = Vec::new();
    let mut candidates = Bits::empty(words);
    for i in 0..n {
        candidates.set(i);
    }
    expand(&local_adj, &mut current, candidates, Bits::empty(words), &mut found);
    let mut cliques: Vec<Vec<u32>> = found
        .into_iter()
        .map(|local: Vec<usize>| {
            let mut c: Vec<u32> = local.into_iter().map(|i| nodes[i]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    cliques.sort();
    CliqueSet {
        cliques,
        approximated: false,
    }
}

fn expand(adj: &[Bits], current: &mut Vec<usize>, mut candidates: Bits, mut excluded: Bits, out: &mut Vec<Vec<usize>>) {
    if candidates.is_empty() {
        if excluded.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    // Tomita pivot: the vertex of P ∪ X with the most neighbors in P.
    let pivot = candidates
        .iter()
        .chain(excluded.iter())
        .max_by_key(|&u| (candidates.and_count(&adj[u]), std::cmp::Reverse(u)))
        .expect("non-empty");
    let branch: Vec<usize> = candidates.iter().filter(|&v| !adj[pivot].get(v)).collect();
    for v in branch {
        current.push(v);
        expand(adj, current, candidates.and(&adj[v]), excluded.and(&adj[v]), out);
        current.pop();
        candidates.clear(v);
        excluded.set(v);
    }
}

/// Runs [`maximal_cliques`] over every component in parallel, preserving
/// component order.
pub fn all_maximal_cliques(components: &[Component], graph: &SimilarityGraph, node_cap: usize) -> Vec<CliqueSet> {
    let adjacency = graph.adjacency();
    components
        .par_iter()
        .map(|c| maximal_cliques(c, &adjacency, node_cap))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliqueFraction {
    pub cliques: usize,
    pub components: usize,
    pub fraction: f64,
}

pub fn clique_fraction(components: &[Component]) -> Result<CliqueFraction> {
    if components.is_empty() {
        return Err(Error::Empty("no components"));
    }
    let cliques = components.iter().filter(|c| c.is_clique).count();
    Ok(CliqueFraction {
        cliques,
        components: components.len(),
        fraction: cliques as f64 / components.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Bits {
        Bits(vec![0; words])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_count(&self, other: &Bits) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }
}
