//! Node centralities and top-k selection.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::spectral;

/// Sources handled per parallel task. Partial sums are reduced in chunk
/// order, so results do not depend on the thread count.
const SOURCE_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[serde(alias = "dc", alias = "DC")]
    Degree,
    #[serde(alias = "dcn", alias = "DCN")]
    DegreeNormalized,
    #[serde(alias = "cc", alias = "CC")]
    Closeness,
    #[serde(alias = "bc", alias = "BC")]
    Betweenness,
    #[serde(alias = "ec", alias = "EC")]
    Eigenvector,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Degree,
        Metric::DegreeNormalized,
        Metric::Closeness,
        Metric::Betweenness,
        Metric::Eigenvector,
    ];

    /// Two-letter code used in report tables.
    pub fn code(self) -> &'static str {
        match self {
            Metric::Degree => "DC",
            Metric::DegreeNormalized => "DCN",
            Metric::Closeness => "CC",
            Metric::Betweenness => "BC",
            Metric::Eigenvector => "EC",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dc" | "degree" => Ok(Metric::Degree),
            "dcn" | "degree_normalized" => Ok(Metric::DegreeNormalized),
            "cc" | "closeness" => Ok(Metric::Closeness),
            "bc" | "betweenness" => Ok(Metric::Betweenness),
            "ec" | "eigenvector" => Ok(Metric::Eigenvector),
            _ => Err(Error::invalid(format!("unknown centrality metric {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub metric: Metric,
    pub values: Vec<f64>,
    pub graph_fingerprint: u64,
}

impl CentralityScores {
    fn new(g: &Graph, metric: Metric, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), g.node_count());
        CentralityScores {
            metric,
            values,
            graph_fingerprint: g.fingerprint(),
        }
    }

    /// Writes `node_id,score,rank`; rank 1 is the most central node under
    /// the same ordering as [`top_k`]. `node_id` is the node's label.
    pub fn write_csv<W: Write>(&self, g: &Graph, mut w: W) -> std::io::Result<()> {
        let order = ranking(&self.values);
        let mut rank = vec![0usize; order.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r + 1;
        }
        writeln!(w, "node_id,score,rank")?;
        for (v, score) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", g.label(v), score, rank[v])?;
        }
        w.flush()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

pub fn degree_centrality(g: &Graph) -> CentralityScores {
    let values = g.degrees().into_iter().map(|d| d as f64).collect();
    CentralityScores::new(g, Metric::Degree, values)
}

/// Degree divided by `n - 1`; zero for a single node.
pub fn degree_centrality_normalized(g: &Graph) -> CentralityScores {
    let scale = g.node_count().saturating_sub(1) as f64;
    let values = g
        .degrees()
        .into_iter()
        .map(|d| if scale > 0.0 { d as f64 / scale } else { 0.0 })
        .collect();
    CentralityScores::new(g, Metric::DegreeNormalized, values)
}

/// Hop distances from `source`; unreachable nodes stay at `u32::MAX`.
fn bfs(g: &Graph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    let n = g.node_count();
    dist.fill(u32::MAX);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    let mut seen = 1;
    while let Some(v) = queue.pop_front() {
        if seen == n {
            break;
        }
        let dv = dist[v];
        for &w in g.neighbors(v) {
            let w = w as usize;
            if dist[w] == u32::MAX {
                dist[w] = dv + 1;
                seen += 1;
                queue.push_back(w);
            }
        }
    }
}

/// `r / Σd` over the `r` nodes reachable from `v`, scaled by `r / (n-1)`.
/// Isolated nodes score zero.
pub fn closeness_centrality(g: &Graph) -> CentralityScores {
    let n = g.node_count();
    let values: Vec<f64> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(SOURCE_CHUNK)
        .map(|sources| {
            let mut dist = vec![0u32; n];
            let mut queue = VecDeque::with_capacity(n);
            sources
                .iter()
                .map(|&v| {
                    bfs(g, v, &mut dist, &mut queue);
                    let (reach, total) = dist
                        .iter()
                        .filter(|&&d| d != u32::MAX && d > 0)
                        .fold((0u64, 0u64), |(r, t), &d| (r + 1, t + u64::from(d)));
                    if total == 0 {
                        0.0
                    } else {
                        let r = reach as f64;
                        (r / total as f64) * (r / (n - 1) as f64)
                    }
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    CentralityScores::new(g, Metric::Closeness, values)
}

/// Per-thread buffers for Brandes' single-source pass.
///
/// Path counts and dependencies are gathered level by level: a node
/// pulls from its neighbors through an array that is zero outside the
/// adjacent BFS level, so the inner loops are plain sums with no
/// data-dependent branches.
struct BrandesWork {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    /// Nonzero only on the level being pulled from.
    pull: Vec<f64>,
    /// BFS order, grouped by level; doubles as the queue.
    order: Vec<usize>,
    /// `order[levels[d]..levels[d + 1]]` holds the nodes at distance `d`.
    levels: Vec<usize>,
}

impl BrandesWork {
    fn new(n: usize) -> Self {
        BrandesWork {
            dist: vec![u32::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            pull: vec![0.0; n],
            order: Vec::with_capacity(n),
            levels: Vec::new(),
        }
    }

    fn bfs_levels(&mut self, g: &Graph, s: usize) {
        let n = g.node_count();
        let (dist, order, levels) = (&mut self.dist, &mut self.order, &mut self.levels);
        dist.fill(u32::MAX);
        order.clear();
        levels.clear();
        dist[s] = 0;
        order.push(s);
        let mut head = 0;
        while head < order.len() && order.len() < n {
            let v = order[head];
            head += 1;
            let dv = dist[v];
            for &w in g.neighbors(v) {
                let w = w as usize;
                if dist[w] == u32::MAX {
                    dist[w] = dv + 1;
                    order.push(w);
                }
            }
        }
        levels.push(0);
        for i in 1..order.len() {
            if dist[order[i]] != dist[order[i - 1]] {
                levels.push(i);
            }
        }
        levels.push(order.len());
    }

    /// Adds the dependencies of source `s` into `acc`.
    fn accumulate(&mut self, g: &Graph, s: usize, acc: &mut [f64]) {
        self.bfs_levels(g, s);
        let depth = self.levels.len() - 1;
        self.pull.fill(0.0);
        self.sigma[s] = 1.0;
        for d in 1..depth {
            if d >= 2 {
                for i in self.levels[d - 2]..self.levels[d - 1] {
                    self.pull[self.order[i]] = 0.0;
                }
            }
            for i in self.levels[d - 1]..self.levels[d] {
                let v = self.order[i];
                self.pull[v] = self.sigma[v];
            }
            for i in self.levels[d]..self.levels[d + 1] {
                let w = self.order[i];
                self.sigma[w] = g.neighbors(w).iter().map(|&u| self.pull[u as usize]).sum();
            }
        }

        self.pull.fill(0.0);
        for i in self.levels[depth - 1]..self.levels[depth] {
            self.delta[self.order[i]] = 0.0;
        }
        for d in (1..depth.saturating_sub(1)).rev() {
            if d + 2 < depth {
                for i in self.levels[d + 2]..self.levels[d + 3] {
                    self.pull[self.order[i]] = 0.0;
                }
            }
            for i in self.levels[d + 1]..self.levels[d + 2] {
                let w = self.order[i];
                self.pull[w] = (1.0 + self.delta[w]) / self.sigma[w];
            }
            for i in self.levels[d]..self.levels[d + 1] {
                let v = self.order[i];
                let through: f64 = g.neighbors(v).iter().map(|&u| self.pull[u as usize]).sum();
                self.delta[v] = self.sigma[v] * through;
            }
        }
        for &v in &self.order[1..] {
            acc[v] += self.delta[v];
        }
    }
}

/// Exact betweenness by Brandes' algorithm; each unordered pair counts
/// once and endpoints are excluded. With `normalized`, scores are divided
/// by `(n-1)(n-2)/2`.
pub fn betweenness_centrality(g: &Graph, normalized: bool) -> CentralityScores {
    let n = g.node_count();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut work = BrandesWork::new(n);
            let mut acc = vec![0.0; n];
            for &s in chunk {
                work.accumulate(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut values = vec![0.0; n];
    for part in &partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    // every pair was seen from both endpoints
    let scale = if normalized && n > 2 {
        ((n - 1) * (n - 2)) as f64
    } else {
        2.0
    };
    values.iter_mut().for_each(|v| *v /= scale);
    CentralityScores::new(g, Metric::Betweenness, values)
}

/// Unit-norm, nonnegative dominant eigenvector of A. Converged when two
/// successive iterates differ by less than `tol` in every component. On a
/// disconnected graph the mass sits on the component with the largest
/// eigenvalue.
pub fn eigenvector_centrality(g: &Graph, opts: EigenOptions) -> Result<CentralityScores> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let (state, converged) =
        spectral::shifted_power_iteration(g, opts.max_iter, |s| s.step < opts.tol);
    if !converged {
        return Err(Error::NonConvergence {
            iterations: state.iterations,
            residual: state.step,
        });
    }
    let values = state.x.into_iter().map(|v| v.max(0.0)).collect();
    Ok(CentralityScores::new(g, Metric::Eigenvector, values))
}

pub fn compute(g: &Graph, metric: Metric, eigen: EigenOptions) -> Result<CentralityScores> {
    Ok(match metric {
        Metric::Degree => degree_centrality(g),
        Metric::DegreeNormalized => degree_centrality_normalized(g),
        Metric::Closeness => closeness_centrality(g),
        Metric::Betweenness => betweenness_centrality(g, false),
        Metric::Eigenvector => eigenvector_centrality(g, eigen)?,
    })
}

/// All nodes, most central first; ties go to the smaller index.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// The `k` highest-scoring nodes, ties broken by ascending id.
pub fn top_k(scores: &CentralityScores, k: usize) -> Result<Vec<NodeId>> {
    let n = scores.values.len();
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds node count {n}")));
    }
    Ok(ranking(&scores.values)
        .into_iter()
        .take(k)
        .map(NodeId::from)
        .collect())
}
