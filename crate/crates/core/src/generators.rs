//! Seeded random graph generators and degree-preserving randomization.
//!
//! Every generator is a pure function of its [`GenSpec`]: the seed feeds a
//! ChaCha8 stream, so the same spec always yields the same edge set.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Mean degree targeted by the default random-geometric radius.
pub const RGG_TARGET_DEGREE: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// G(n, p) by geometric skipping over the pair sequence.
    GnpFast { p: f64 },
    /// G(n, p) by one Bernoulli trial per pair.
    ErdosRenyi { p: f64 },
    /// Duplication with edge retention probability `p`.
    DuplicationDivergence { p: f64 },
    /// Preferential attachment with `m` edges per new node.
    BarabasiAlbert { m: usize },
    /// Uniform points in the unit `dim`-cube, joined when within `radius`.
    RandomGeometric {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_dim")]
        dim: usize,
    },
}

fn default_dim() -> usize {
    2
}

impl Family {
    pub fn short_name(&self) -> &'static str {
        match self {
            Family::GnpFast { .. } => "gnp",
            Family::ErdosRenyi { .. } => "er",
            Family::DuplicationDivergence { .. } => "dd",
            Family::BarabasiAlbert { .. } => "ba",
            Family::RandomGeometric { .. } => "rgg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GenSpec { family, n, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GenSpec {
            seed,
            ..self.clone()
        }
    }

    /// Family and parameters, without the seed, e.g. `er(n=1000,p=0.4)`.
    pub fn label(&self) -> String {
        let n = self.n;
        match self.family {
            Family::GnpFast { p } => format!("gnp(n={n},p={p})"),
            Family::ErdosRenyi { p } => format!("er(n={n},p={p})"),
            Family::DuplicationDivergence { p } => format!("dd(n={n},p={p})"),
            Family::BarabasiAlbert { m } => format!("ba(n={n},m={m})"),
            Family::RandomGeometric { radius: Some(r), dim } => format!("rgg(n={n},r={r},d={dim})"),
            Family::RandomGeometric { radius: None, dim } => format!("rgg(n={n},d={dim})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        match self.family {
            Family::GnpFast { p } | Family::ErdosRenyi { p } => {
                check_probability(p)?;
                if n == 0 {
                    return Err(Error::invalid("n must be at least 1"));
                }
            }
            Family::DuplicationDivergence { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::invalid(format!("retention probability {p} not in (0, 1]")));
                }
                if n < 2 {
                    return Err(Error::invalid("duplication-divergence needs n >= 2"));
                }
            }
            Family::BarabasiAlbert { m } => {
                if m == 0 || m >= n {
                    return Err(Error::invalid(format!("need 1 <= m < n, got m={m}, n={n}")));
                }
            }
            Family::RandomGeometric { radius, dim } => {
                if n == 0 {
                    return Err(Error::invalid("n must be at least 1"));
                }
                if dim == 0 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                if let Some(r) = radius {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(Error::invalid(format!("radius {r} must be positive")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Graph> {
        let (n, seed) = (self.n, self.seed);
        match self.family {
            Family::GnpFast { p } => gen_gnp(n, p, seed),
            Family::ErdosRenyi { p } => gen_erdos_renyi(n, p, seed),
            Family::DuplicationDivergence { p } => gen_duplication_divergence(n, p, seed),
            Family::BarabasiAlbert { m } => gen_barabasi_albert(n, m, seed),
            Family::RandomGeometric { radius, dim } => {
                let r = radius.unwrap_or_else(|| default_rgg_radius(n));
                gen_random_geometric(n, r, dim, seed)
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability {p} not in [0, 1]")))
    }
}

/// Radius giving an expected interior degree of [`RGG_TARGET_DEGREE`] in 2-D.
pub fn default_rgg_radius(n: usize) -> f64 {
    (RGG_TARGET_DEGREE / (n.max(1) as f64 * std::f64::consts::PI)).sqrt()
}

fn complete_graph(n: usize) -> Graph {
    Graph::from_edges(Some(n), (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// G(n, p) in O(n + m) expected time: the gap to the next present pair is
/// geometric, so we jump over absent pairs instead of testing each one.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if p == 0.0 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return Ok(complete_graph(n));
    }
    let mut rng = seed::rng(seed);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    // pairs (v, w) with w < v, scanned row by row
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    Ok(Graph::from_edges(Some(n), edges))
}

pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_edges(Some(n), edges))
}

/// Starts from a single edge and grows by duplicating a uniformly chosen
/// node; each of its edges is copied with probability `p`. A duplicate that
/// retains no edge is discarded and the step is redrawn.
pub fn gen_duplication_divergence(n: usize, p: f64, seed: u64) -> Result<Graph> {
    GenSpec::new(Family::DuplicationDivergence { p }, n, seed).validate()?;
    let mut rng = seed::rng(seed);
    let mut adj: Vec<Vec<usize>> = vec![vec![1], vec![0]];
    let mut kept = Vec::new();
    while adj.len() < n {
        let original = rng.gen_range(0..adj.len());
        kept.clear();
        kept.extend(adj[original].iter().copied().filter(|_| rng.gen::<f64>() < p));
        if kept.is_empty() {
            continue;
        }
        let new = adj.len();
        for &w in &kept {
            adj[w].push(new);
        }
        adj.push(kept.clone());
    }
    Ok(graph_from_adjacency(&adj))
}

fn graph_from_adjacency(adj: &[Vec<usize>]) -> Graph {
    Graph::from_edges(
        Some(adj.len()),
        adj.iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v))),
    )
}

/// Preferential attachment. The first `m` nodes start isolated; node `m`
/// links to all of them, and every later node picks `m` distinct targets
/// with probability proportional to degree. The result has exactly
/// `m * (n - m)` edges.
pub fn gen_barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    GenSpec::new(Family::BarabasiAlbert { m }, n, seed).validate()?;
    let mut rng = seed::rng(seed);
    // each node appears here once per incident edge
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * m * (n - m));
    let mut edges = Vec::with_capacity(m * (n - m));
    let mut targets: Vec<usize> = (0..m).collect();
    for source in m..n {
        for &t in &targets {
            edges.push((t, source));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, m));
        targets.clear();
        while targets.len() < m {
            let x = *repeated.choose(&mut rng).expect("non-empty after first step");
            if !targets.contains(&x) {
                targets.push(x);
            }
        }
    }
    Ok(Graph::from_edges(Some(n), edges))
}

pub fn gen_random_geometric(n: usize, radius: f64, dim: usize, seed: u64) -> Result<Graph> {
    GenSpec::new(Family::RandomGeometric { radius: Some(radius), dim }, n, seed).validate()?;
    let mut rng = seed::rng(seed);
    let points: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for i in 0..n {
        let a = &points[i * dim..(i + 1) * dim];
        for j in i + 1..n {
            let b = &points[j * dim..(j + 1) * dim];
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            if d2 <= r2 {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_edges(Some(n), edges))
}

/// Default number of successful swaps: ten per edge.
pub fn default_swaps(g: &Graph) -> usize {
    10 * g.edge_count()
}

/// Randomizes `g` by double-edge swaps `(a,b),(c,d) -> (a,d),(c,b)`,
/// rejecting any swap that would create a self-loop or a parallel edge.
/// Stops after `n_swaps` accepted swaps or `100 * n_swaps` attempts,
/// whichever comes first; graphs whose degree sequence has a single
/// realization (a triangle, say) come back unchanged.
pub fn degree_preserving_shuffle(g: &Graph, n_swaps: usize, seed: u64) -> Result<Graph> {
    if g.edge_count() < 2 {
        return Err(Error::invalid("degree-preserving shuffle needs at least 2 edges"));
    }
    let mut rng = seed::rng(seed);
    let mut edges: Vec<(u32, u32)> = g.edges().map(|(u, v)| (u as u32, v as u32)).collect();
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let mut present: HashSet<(u32, u32)> = edges.iter().copied().collect();
    let max_tries = n_swaps.saturating_mul(100);
    let (mut done, mut tries) = (0usize, 0usize);
    while done < n_swaps && tries < max_tries {
        tries += 1;
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.gen::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        if a == d || c == b || a == c || b == d {
            continue;
        }
        let (e1, e2) = (key(a, d), key(c, b));
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        done += 1;
    }
    let shuffled = Graph::from_edges(
        Some(g.node_count()),
        edges.into_iter().map(|(u, v)| (u as usize, v as usize)),
    );
    match g.labels() {
        Some(l) => shuffled.with_labels(l.to_vec()),
        None => Ok(shuffled),
    }
}
