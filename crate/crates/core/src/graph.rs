//! Undirected simple graphs in compressed sparse row form.
//!
//! A [`Graph`] is immutable once built. Every constructor normalizes its
//! input: self-loops are dropped, parallel edges collapse, and each
//! neighbor list is sorted strictly ascending, so the adjacency matrix is
//! always a symmetric 0/1 matrix with a zero diagonal.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub deg_avg: f64,
    pub deg_max: usize,
    pub deg_min: usize,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// External identifier of each node; `None` means identity.
    labels: Option<Vec<u64>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.node_count())
            .field("m", &self.edge_count())
            .finish()
    }
}

impl Graph {
    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            labels: None,
        }
    }

    /// Builds a graph from unordered pairs. The node count is
    /// `max(n, largest index + 1)`; duplicates and self-loops are dropped.
    pub fn from_edges<I>(n: Option<usize>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut arcs: Vec<(u32, u32)> = Vec::new();
        let mut n = n.unwrap_or(0);
        for (a, b) in pairs {
            n = n.max(a + 1).max(b + 1);
            if a == b {
                continue;
            }
            let (a, b) = (a as u32, b as u32);
            arcs.push((a, b));
            arcs.push((b, a));
        }
        Self::from_arcs(n, arcs)
    }

    /// Shorthand for [`Graph::from_edges`] with an inferred node count.
    pub fn from_edge_list(pairs: &[(usize, usize)]) -> Self {
        Self::from_edges(None, pairs.iter().copied())
    }

    /// `arcs` must already be symmetric and loop-free; duplicates are allowed.
    fn from_arcs(n: usize, mut arcs: Vec<(u32, u32)>) -> Self {
        arcs.sort_unstable();
        arcs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &arcs {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = arcs.into_iter().map(|(_, b)| b).collect();
        Graph {
            offsets,
            targets,
            labels: None,
        }
    }

    /// Attaches external identifiers, one per node.
    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::invalid(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|v| self.degree(v)).collect()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn label(&self, v: usize) -> u64 {
        match &self.labels {
            Some(l) => l[v],
            None => v as u64,
        }
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId::from)
    }

    /// `out = A x`.
    pub fn adjacency_matvec(&self, x: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            *o = self.neighbors(v).iter().map(|&w| x[w as usize]).sum();
        }
    }

    /// Induced subgraph on the nodes not in `victims` (the principal
    /// submatrix of A). Survivors keep their relative order and are
    /// re-indexed densely; their previous labels are carried over.
    pub fn delete_nodes(&self, victims: &[NodeId]) -> Result<Graph> {
        let n = self.node_count();
        let mut removed = vec![false; n];
        for v in victims {
            if v.index() >= n {
                return Err(Error::NodeOutOfRange { node: v.index(), n });
            }
            removed[v.index()] = true;
        }
        let mut new_index = vec![u32::MAX; n];
        let mut labels = Vec::with_capacity(n);
        for v in 0..n {
            if !removed[v] {
                new_index[v] = labels.len() as u32;
                labels.push(self.label(v));
            }
        }
        let kept = labels.len();
        let mut offsets = Vec::with_capacity(kept + 1);
        let mut targets = Vec::with_capacity(self.targets.len());
        offsets.push(0);
        for v in (0..n).filter(|&v| !removed[v]) {
            // old order is ascending and the map is monotone, so lists stay sorted
            targets.extend(
                self.neighbors(v)
                    .iter()
                    .map(|&w| new_index[w as usize])
                    .filter(|&w| w != u32::MAX),
            );
            offsets.push(targets.len());
        }
        Ok(Graph {
            offsets,
            targets,
            labels: Some(labels),
        })
    }

    /// Relabels node `v` as `perm[v]`. Labels follow their nodes.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the node set"));
        }
        let mut g = Graph::from_edges(Some(n), self.edges().map(|(u, v)| (perm[u], perm[v])));
        let mut labels = vec![0u64; n];
        for v in 0..n {
            labels[perm[v]] = self.label(v);
        }
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn degree_stats(&self) -> Result<DegreeStats> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let degrees = self.degrees();
        Ok(DegreeStats {
            deg_avg: 2.0 * self.edge_count() as f64 / n as f64,
            deg_max: degrees.iter().copied().max().unwrap_or(0),
            deg_min: degrees.iter().copied().min().unwrap_or(0),
        })
    }

    /// FNV-1a over the node count and the CSR arrays. Labels are excluded.
    pub fn fingerprint(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(self.node_count() as u64);
        for &o in &self.offsets {
            eat(o as u64);
        }
        for &t in &self.targets {
            eat(u64::from(t));
        }
        h
    }

    /// Writes the edge list as text: a `# nodes: N` header, then one
    /// `u v` line per edge with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# nodes: {}", self.node_count())?;
        writeln!(w, "# edges: {}", self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edge_list(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Parses the edge-list text format. Lines starting with `#` are
    /// comments, except that `# nodes: N` fixes the node count so that
    /// trailing isolated nodes survive a round trip.
    pub fn read_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<Graph> {
        let mut n = None;
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("nodes:") {
                    n = rest.trim().parse::<usize>().ok();
                }
                continue;
            }
            let bad = |message: String| Error::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let mut next = || -> Result<usize> {
                let f = fields
                    .next()
                    .ok_or_else(|| bad("expected two node ids".into()))?;
                f.parse()
                    .map_err(|_| bad(format!("invalid node id {f:?}")))
            };
            let a = next()?;
            let b = next()?;
            pairs.push((a, b));
        }
        Ok(Graph::from_edges(n, pairs))
    }

    pub fn load_edge_list(path: &Path) -> Result<Graph> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_edge_list(std::io::BufReader::new(file), path)
    }
}
