//! Vaccination plans as node removals, and their effect on `λ_max`.
//!
//! A vaccinated person is modelled by deleting their node, i.e. taking a
//! principal submatrix of the adjacency matrix. By Cauchy interlacing the
//! spectral radius can only go down.

use std::collections::HashMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{self, EigenOptions, Metric};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::spectral::{self, PowerOptions};

/// Slack allowed when comparing eigenvalue estimates.
pub const LAMBDA_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Highest scores on the intact graph; with `adaptive`, scores are
    /// recomputed after every removal.
    TopK {
        metric: Metric,
        #[serde(default)]
        adaptive: bool,
    },
    RandomK { seed: u64 },
}

impl Strategy {
    pub fn top(metric: Metric) -> Self {
        Strategy::TopK {
            metric,
            adaptive: false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Strategy::TopK { metric, adaptive: false } => format!("top_{}", metric.code()),
            Strategy::TopK { metric, adaptive: true } => format!("adaptive_{}", metric.code()),
            Strategy::RandomK { .. } => "random".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaccinationPlan {
    pub strategy: Strategy,
    pub victims: Vec<NodeId>,
    pub k: usize,
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k > g.node_count() {
        return Err(Error::invalid(format!(
            "plan size {k} exceeds node count {}",
            g.node_count()
        )));
    }
    Ok(())
}

/// Scores with edgeless graphs allowed: eigenvector centrality is all
/// zeros there, so the tie rule picks by index.
fn scores(g: &Graph, metric: Metric, eigen: EigenOptions) -> Result<Vec<f64>> {
    if metric == Metric::Eigenvector && g.edge_count() == 0 {
        return Ok(vec![0.0; g.node_count()]);
    }
    Ok(centrality::compute(g, metric, eigen)?.values)
}

pub fn plan_topk(g: &Graph, metric: Metric, k: usize, eigen: EigenOptions) -> Result<VaccinationPlan> {
    check_k(g, k)?;
    let order = centrality::ranking(&scores(g, metric, eigen)?);
    Ok(VaccinationPlan {
        strategy: Strategy::top(metric),
        victims: order.into_iter().take(k).map(NodeId::from).collect(),
        k,
    })
}

/// Greedy variant: remove the current top node, re-score, repeat.
pub fn plan_topk_adaptive(
    g: &Graph,
    metric: Metric,
    k: usize,
    eigen: EigenOptions,
) -> Result<VaccinationPlan> {
    check_k(g, k)?;
    let mut current = g.clone();
    // original index of each node of `current`
    let mut origin: Vec<usize> = (0..g.node_count()).collect();
    let mut victims = Vec::with_capacity(k);
    for _ in 0..k {
        let best = centrality::ranking(&scores(&current, metric, eigen)?)[0];
        victims.push(NodeId::from(origin[best]));
        origin.remove(best);
        current = current.delete_nodes(&[NodeId::from(best)])?;
    }
    Ok(VaccinationPlan {
        strategy: Strategy::TopK {
            metric,
            adaptive: true,
        },
        victims,
        k,
    })
}

/// `k` distinct nodes, uniformly at random.
pub fn plan_random(g: &Graph, k: usize, seed: u64) -> Result<VaccinationPlan> {
    check_k(g, k)?;
    let mut rng = seed::rng(seed);
    let victims = index::sample(&mut rng, g.node_count(), k)
        .into_iter()
        .map(NodeId::from)
        .collect();
    Ok(VaccinationPlan {
        strategy: Strategy::RandomK { seed },
        victims,
        k,
    })
}

pub fn build_plan(
    g: &Graph,
    strategy: Strategy,
    k: usize,
    eigen: EigenOptions,
) -> Result<VaccinationPlan> {
    match strategy {
        Strategy::TopK {
            metric,
            adaptive: false,
        } => plan_topk(g, metric, k, eigen),
        Strategy::TopK {
            metric,
            adaptive: true,
        } => plan_topk_adaptive(g, metric, k, eigen),
        Strategy::RandomK { seed } => plan_random(g, k, seed),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDropReport {
    pub lambda_before: f64,
    pub lambda_after: f64,
    pub drop: f64,
    /// Drop as a percentage of `lambda_before`; zero when that is zero.
    pub drop_pct: f64,
    /// Both eigenvalue computations converged.
    pub converged: bool,
}

impl EigenDropReport {
    pub fn from_lambdas(before: f64, after: f64, converged: bool) -> Self {
        let drop = before - after;
        EigenDropReport {
            lambda_before: before,
            lambda_after: after,
            drop,
            drop_pct: if before > 0.0 { 100.0 * drop / before } else { 0.0 },
            converged,
        }
    }
}

pub fn eigen_drop(g: &Graph, plan: &VaccinationPlan, opts: PowerOptions) -> Result<EigenDropReport> {
    let before = spectral::lambda_max(g, opts)?;
    let after_graph = g.delete_nodes(&plan.victims)?;
    let after = if after_graph.node_count() == 0 {
        0.0
    } else {
        let r = spectral::lambda_max(&after_graph, opts)?;
        if !r.converged {
            return Ok(EigenDropReport::from_lambdas(before.lambda_max, r.lambda_max, false));
        }
        r.lambda_max
    };
    Ok(EigenDropReport::from_lambdas(before.lambda_max, after, before.converged))
}

/// `λ_max` of `g` with `victims` removed; zero when nothing is left.
pub fn lambda_after_removal(g: &Graph, victims: &[NodeId], opts: PowerOptions) -> Result<f64> {
    let h = g.delete_nodes(victims)?;
    if h.node_count() == 0 {
        return Ok(0.0);
    }
    Ok(spectral::lambda_max(&h, opts)?.lambda_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdReport {
    pub metric: Metric,
    pub n: usize,
    pub n_h_fraction: f64,
    /// Randomly vaccinated nodes, `⌊n · n_h_fraction⌋`.
    pub n_h: usize,
    /// Mean `λ_max` after removing `n_h` random nodes.
    pub lambda_target: f64,
    /// Fewest top-ranked nodes whose removal reaches `lambda_target`.
    pub n_hs: usize,
    pub n_hs_fraction: f64,
    /// Mean `λ_max` after removing the top `n_hs` nodes.
    pub lambda_at_n_hs: f64,
    pub graphs: usize,
    pub replicates: usize,
    /// Per graph: mean `λ_max` over its random `n_h` removals.
    pub random_by_graph: Vec<f64>,
    /// Per graph: `λ_max` after removing its top `n_hs` nodes.
    pub top_by_graph: Vec<f64>,
}

/// Finds the smallest `k` such that removing the top-`k` nodes (ranked
/// once on each intact graph) brings the ensemble-mean `λ_max` down to the
/// mean obtained by removing `⌊n · n_h_fraction⌋` random nodes, drawn
/// `replicates` times per graph. Bisection is valid because the mean is
/// non-increasing in `k`.
pub fn herd_equivalent(
    graphs: &[Graph],
    metric: Metric,
    n_h_fraction: f64,
    replicates: usize,
    seed: u64,
    power: PowerOptions,
    eigen: EigenOptions,
) -> Result<HerdReport> {
    if !(n_h_fraction > 0.0 && n_h_fraction < 1.0) {
        return Err(Error::invalid(format!("herd fraction {n_h_fraction} not in (0, 1)")));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let n = graphs.first().ok_or(Error::EmptyGraph)?.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if graphs.iter().any(|g| g.node_count() != n) {
        return Err(Error::invalid("ensemble graphs must share a node count"));
    }
    let n_h = (n as f64 * n_h_fraction).floor() as usize;

    let random_lambdas: Vec<Vec<f64>> = graphs
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            (0..replicates)
                .map(|r| {
                    let plan = plan_random(g, n_h, seed::derive(seed, &[gi as u64, r as u64]))?;
                    lambda_after_removal(g, &plan.victims, power)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let random_by_graph: Vec<f64> = random_lambdas
        .iter()
        .map(|ls| ls.iter().sum::<f64>() / ls.len() as f64)
        .collect();
    let all: Vec<f64> = random_lambdas.into_iter().flatten().collect();
    let lambda_target = all.iter().sum::<f64>() / all.len() as f64;

    let rankings: Vec<Vec<NodeId>> = graphs
        .par_iter()
        .map(|g| {
            Ok(centrality::ranking(&scores(g, metric, eigen)?)
                .into_iter()
                .map(NodeId::from)
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut lambdas_at = |k: usize| -> Result<Vec<f64>> {
        if let Some(v) = cache.get(&k) {
            return Ok(v.clone());
        }
        let lambdas: Vec<f64> = graphs
            .par_iter()
            .zip(&rankings)
            .map(|(g, rank)| lambda_after_removal(g, &rank[..k], power))
            .collect::<Result<_>>()?;
        cache.insert(k, lambdas.clone());
        Ok(lambdas)
    };
    let mean = |ls: &[f64]| ls.iter().sum::<f64>() / ls.len() as f64;

    let reached = |value: f64| value <= lambda_target + LAMBDA_SLACK * lambda_target.max(1.0);
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reached(mean(&lambdas_at(mid)?)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let top_by_graph = lambdas_at(lo)?;
    let lambda_at_n_hs = mean(&top_by_graph);
    Ok(HerdReport {
        metric,
        n,
        n_h_fraction,
        n_h,
        lambda_target,
        n_hs: lo,
        n_hs_fraction: lo as f64 / n as f64,
        lambda_at_n_hs,
        graphs: graphs.len(),
        replicates,
        random_by_graph,
        top_by_graph,
    })
}
