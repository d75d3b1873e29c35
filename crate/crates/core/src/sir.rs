//! Continuous-time SIR epidemics on a contact graph, with vaccination
//! campaigns applied at fixed times.
//!
//! Each infectious node transmits to each susceptible neighbor after an
//! exponential delay with rate `tau`, and recovers exactly
//! `recovery_days` after its own infection. A campaign moves `k`
//! susceptible nodes to the vaccinated state `V`, after which they take no
//! part in transmission.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{self, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::vaccination::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SirParams {
    /// Per-edge transmission rate, per day.
    pub tau: f64,
    /// Fixed infectious period, days.
    pub recovery_days: f64,
    pub initial_infected: usize,
    /// Simulation horizon, days.
    pub t_max: f64,
    /// Sampling step of the trajectory grid, days.
    pub dt: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        SirParams {
            tau: 0.4,
            recovery_days: 14.0,
            initial_infected: 5,
            t_max: 60.0,
            dt: 0.25,
        }
    }
}

impl SirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau {} must be >= 0", self.tau)));
        }
        if !(self.recovery_days > 0.0 && self.recovery_days.is_finite()) {
            return Err(Error::invalid("recovery_days must be positive"));
        }
        if self.initial_infected == 0 {
            return Err(Error::invalid("initial_infected must be >= 1"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid("t_max must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        Ok(())
    }

    /// Uniform grid `0, dt, 2dt, … ≤ t_max`.
    pub fn grid(&self) -> Vec<f64> {
        let steps = (self.t_max / self.dt + 1e-9).floor() as usize;
        (0..=steps).map(|i| i as f64 * self.dt).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub time: f64,
    pub strategy: Strategy,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    S,
    I,
    R,
    V,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SirTrajectory {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

impl SirTrajectory {
    fn with_capacity(cap: usize) -> Self {
        SirTrajectory {
            times: Vec::with_capacity(cap),
            s: Vec::with_capacity(cap),
            i: Vec::with_capacity(cap),
            r: Vec::with_capacity(cap),
            v: Vec::with_capacity(cap),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Population size, read off the first sample.
    pub fn population(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.s[0] + self.i[0] + self.r[0] + self.v[0]
        }
    }

    /// Value of `I` at the last grid point not after `t`.
    pub fn infected_at(&self, t: f64) -> Option<f64> {
        let idx = self.times.partition_point(|&x| x <= t + 1e-12);
        idx.checked_sub(1).map(|i| self.i[i])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time,S,I,R,V")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.times[k], self.s[k], self.i[k], self.r[k], self.v[k]
            )?;
        }
        w.flush()
    }

    /// Pointwise mean of trajectories sampled on the same grid.
    pub fn average(runs: &[&SirTrajectory]) -> Result<SirTrajectory> {
        let first = runs.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
        if runs.iter().any(|t| t.times != first.times) {
            return Err(Error::invalid("trajectories are on different grids"));
        }
        let m = runs.len() as f64;
        let mean = |pick: fn(&SirTrajectory) -> &Vec<f64>| -> Vec<f64> {
            (0..first.len())
                .map(|k| runs.iter().map(|t| pick(t)[k]).sum::<f64>() / m)
                .collect()
        };
        Ok(SirTrajectory {
            times: first.times.clone(),
            s: mean(|t| &t.s),
            i: mean(|t| &t.i),
            r: mean(|t| &t.r),
            v: mean(|t| &t.v),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfectionEvent {
    pub time: f64,
    /// `None` for the initial seeds.
    pub source: Option<NodeId>,
    pub target: NodeId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionOutcome {
    pub time: f64,
    pub strategy: String,
    pub requested: usize,
    pub vaccinated: usize,
    /// Set when fewer than `requested` nodes could be vaccinated or the
    /// campaign fell outside the horizon.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub trajectory: SirTrajectory,
    pub infections: Vec<InfectionEvent>,
    pub infection_time: Vec<Option<f64>>,
    pub recovery_time: Vec<Option<f64>>,
    pub vaccination_time: Vec<Option<f64>>,
    pub interventions: Vec<InterventionOutcome>,
}

#[derive(Clone, Copy, Debug)]
enum EventKind {
    Recover(u32),
    Transmit { source: u32, target: u32 },
    Campaign(usize),
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Graph, parameters and campaign rankings, prepared once and reused for
/// every run of an ensemble.
pub struct SirModel<'g> {
    graph: &'g Graph,
    params: SirParams,
    interventions: Vec<Intervention>,
    /// For top-k campaigns: node order on the intact graph.
    rankings: Vec<Option<Vec<usize>>>,
}

impl<'g> SirModel<'g> {
    pub fn new(
        graph: &'g Graph,
        params: SirParams,
        interventions: &[Intervention],
        eigen: EigenOptions,
    ) -> Result<Self> {
        params.validate()?;
        if params.initial_infected > graph.node_count() {
            return Err(Error::invalid(format!(
                "{} initial infections in a graph of {} nodes",
                params.initial_infected,
                graph.node_count()
            )));
        }
        let rankings = interventions
            .iter()
            .map(|iv| {
                if !(iv.time >= 0.0) {
                    return Err(Error::invalid(format!("intervention time {} < 0", iv.time)));
                }
                match iv.strategy {
                    Strategy::TopK { adaptive: true, .. } => Err(Error::invalid(
                        "adaptive rankings are not supported during simulation",
                    )),
                    Strategy::TopK { metric, .. } => {
                        let values = if graph.edge_count() == 0 {
                            vec![0.0; graph.node_count()]
                        } else {
                            centrality::compute(graph, metric, eigen)?.values
                        };
                        Ok(Some(centrality::ranking(&values)))
                    }
                    Strategy::RandomK { .. } => Ok(None),
                }
            })
            .collect::<Result<_>>()?;
        Ok(SirModel {
            graph,
            params,
            interventions: interventions.to_vec(),
            rankings,
        })
    }

    pub fn run(&self, seed: u64) -> SimulationRun {
        Sim::new(self, seed).run()
    }
}

struct Sim<'m, 'g> {
    model: &'m SirModel<'g>,
    rng: seed::Rng,
    state: Vec<State>,
    /// Earliest pending transmission into each susceptible node.
    pending: Vec<f64>,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    counts: [usize; 4],
    out: SimulationRun,
}

impl<'m, 'g> Sim<'m, 'g> {
    fn new(model: &'m SirModel<'g>, seed: u64) -> Self {
        let n = model.graph.node_count();
        Sim {
            model,
            rng: seed::rng(seed),
            state: vec![State::S; n],
            pending: vec![f64::INFINITY; n],
            queue: BinaryHeap::new(),
            seq: 0,
            counts: [n, 0, 0, 0],
            out: SimulationRun {
                trajectory: SirTrajectory::default(),
                infections: Vec::new(),
                infection_time: vec![None; n],
                recovery_time: vec![None; n],
                vaccination_time: vec![None; n],
                interventions: Vec::new(),
            },
        }
    }

    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn set_state(&mut self, v: usize, to: State) {
        self.counts[self.state[v] as usize] -= 1;
        self.counts[to as usize] += 1;
        self.state[v] = to;
    }

    fn infect(&mut self, v: usize, time: f64, source: Option<usize>) {
        let p = &self.model.params;
        self.set_state(v, State::I);
        self.out.infection_time[v] = Some(time);
        self.out.infections.push(InfectionEvent {
            time,
            source: source.map(NodeId::from),
            target: NodeId::from(v),
        });
        let recover_at = time + p.recovery_days;
        self.push(recover_at, EventKind::Recover(v as u32));
        if p.tau <= 0.0 {
            return;
        }
        let graph = self.model.graph;
        for &w in graph.neighbors(v) {
            let wi = w as usize;
            if self.state[wi] != State::S {
                continue;
            }
            let u: f64 = self.rng.gen();
            let at = time - (1.0 - u).ln() / p.tau;
            if at < recover_at && at < self.pending[wi] {
                self.pending[wi] = at;
                self.push(
                    at,
                    EventKind::Transmit {
                        source: v as u32,
                        target: w,
                    },
                );
            }
        }
    }

    fn campaign(&mut self, idx: usize, time: f64) {
        let iv = self.model.interventions[idx];
        let chosen: Vec<usize> = match &self.model.rankings[idx] {
            Some(order) => order
                .iter()
                .copied()
                .filter(|&v| self.state[v] == State::S)
                .take(iv.k)
                .collect(),
            None => {
                let susceptible: Vec<usize> = (0..self.state.len())
                    .filter(|&v| self.state[v] == State::S)
                    .collect();
                let k = iv.k.min(susceptible.len());
                index::sample(&mut self.rng, susceptible.len(), k)
                    .into_iter()
                    .map(|i| susceptible[i])
                    .collect()
            }
        };
        for &v in &chosen {
            self.set_state(v, State::V);
            self.out.vaccination_time[v] = Some(time);
        }
        let note = (chosen.len() < iv.k).then(|| {
            format!(
                "requested {} but only {} susceptible nodes remained",
                iv.k,
                chosen.len()
            )
        });
        self.out.interventions.push(InterventionOutcome {
            time,
            strategy: iv.strategy.label(),
            requested: iv.k,
            vaccinated: chosen.len(),
            note,
        });
    }

    fn record(&mut self, t: f64) {
        let [s, i, r, v] = self.counts;
        let tr = &mut self.out.trajectory;
        tr.times.push(t);
        tr.s.push(s as f64);
        tr.i.push(i as f64);
        tr.r.push(r as f64);
        tr.v.push(v as f64);
    }

    fn run(mut self) -> SimulationRun {
        let params = self.model.params;
        let n = self.model.graph.node_count();
        for (idx, iv) in self.model.interventions.iter().enumerate() {
            if iv.time < params.t_max {
                self.push(iv.time, EventKind::Campaign(idx));
            } else {
                self.out.interventions.push(InterventionOutcome {
                    time: iv.time,
                    strategy: iv.strategy.label(),
                    requested: iv.k,
                    vaccinated: 0,
                    note: Some(format!("skipped: at or after horizon t_max = {}", params.t_max)),
                });
            }
        }
        let seeds: Vec<usize> = index::sample(&mut self.rng, n, params.initial_infected).into_vec();
        for v in seeds {
            self.infect(v, 0.0, None);
        }
        let grid = params.grid();
        self.out.trajectory = SirTrajectory::with_capacity(grid.len());
        for &t in &grid {
            while let Some(Reverse(ev)) = self.queue.peek().copied() {
                if ev.time > t {
                    break;
                }
                self.queue.pop();
                match ev.kind {
                    EventKind::Recover(v) => {
                        self.set_state(v as usize, State::R);
                        self.out.recovery_time[v as usize] = Some(ev.time);
                    }
                    EventKind::Transmit { source, target } => {
                        if self.state[target as usize] == State::S {
                            self.infect(target as usize, ev.time, Some(source as usize));
                        }
                    }
                    EventKind::Campaign(idx) => self.campaign(idx, ev.time),
                }
            }
            self.record(t);
        }
        self.out
    }
}

pub fn simulate(
    g: &Graph,
    params: SirParams,
    interventions: &[Intervention],
    seed: u64,
) -> Result<SimulationRun> {
    Ok(SirModel::new(g, params, interventions, EigenOptions::default())?.run(seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub mean: SirTrajectory,
    pub runs: Vec<SimulationRun>,
}

impl EnsembleResult {
    /// Long format: `run,time,S,I,R,V`.
    pub fn write_runs_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "run,time,S,I,R,V")?;
        for (r, run) in self.runs.iter().enumerate() {
            let t = &run.trajectory;
            for k in 0..t.len() {
                writeln!(w, "{r},{},{},{},{},{}", t.times[k], t.s[k], t.i[k], t.r[k], t.v[k])?;
            }
        }
        w.flush()
    }
}

/// `runs` independent runs on the same graph, run `r` seeded from
/// `derive(seed, [r])`, averaged pointwise in run order.
pub fn ensemble(
    g: &Graph,
    params: SirParams,
    interventions: &[Intervention],
    runs: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    if runs == 0 {
        return Err(Error::invalid("runs must be at least 1"));
    }
    let model = SirModel::new(g, params, interventions, EigenOptions::default())?;
    let runs: Vec<SimulationRun> = (0..runs)
        .into_par_iter()
        .map(|r| model.run(seed::derive(seed, &[r as u64])))
        .collect();
    let mean = SirTrajectory::average(&runs.iter().map(|r| &r.trajectory).collect::<Vec<_>>())?;
    Ok(EnsembleResult { mean, runs })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SirSummary {
    pub peak_infected: f64,
    pub peak_time: f64,
    /// `R(t_max) / n`.
    pub attack_rate: f64,
    pub final_vaccinated: f64,
}

/// Peak of `I` (earliest time on ties) and the final attack rate.
pub fn peak_and_final(t: &SirTrajectory) -> Result<SirSummary> {
    if t.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let (mut peak, mut at) = (t.i[0], t.times[0]);
    for k in 1..t.len() {
        if t.i[k] > peak {
            peak = t.i[k];
            at = t.times[k];
        }
    }
    let last = t.len() - 1;
    let n = t.population();
    Ok(SirSummary {
        peak_infected: peak,
        peak_time: at,
        attack_rate: if n > 0.0 { t.r[last] / n } else { 0.0 },
        final_vaccinated: t.v[last],
    })
}
