//! Experiment pipelines driven by one declarative TOML document.
//!
//! Every pipeline returns a report holding its aggregated table, the raw
//! long-format rows behind it, and any warnings. Reports are written as
//! CSV (one file per table) or as a single JSON document.
//!
//! Seeds are derived as `master → pipeline → family → replicate`, keyed by
//! names rather than positions, so adding a family to a config leaves the
//! streams of the others untouched.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{EigenOptions, Metric};
use crate::error::{Error, Result};
use crate::generators::{self, Family, GenSpec};
use crate::graph::Graph;
use crate::ingest::{self, ContactFormat, SECONDS_PER_DAY};
use crate::seed;
use crate::sir::{self, Intervention, SirParams, SirTrajectory};
use crate::spectral::{self, PowerOptions};
use crate::stats;
use crate::vaccination::{self, Strategy};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("unknown output format {s:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// How the graphs of a spectral ensemble are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateMode {
    /// A freshly generated graph per replicate.
    #[default]
    Independent,
    /// One generated graph, re-randomized per replicate by double-edge swaps.
    Shuffled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaySplit {
    /// One graph per input file.
    #[default]
    PerFile,
    /// Records of all files pooled and bucketed by timestamp.
    ByTimestamp,
}

fn table_families() -> Vec<GenSpec> {
    vec![
        GenSpec::new(Family::ErdosRenyi { p: 0.4 }, 1000, 0),
        GenSpec::new(Family::GnpFast { p: 0.4 }, 1000, 0),
        GenSpec::new(Family::DuplicationDivergence { p: 0.4 }, 1000, 0),
        GenSpec::new(Family::BarabasiAlbert { m: 50 }, 1000, 0),
    ]
}

fn table_metrics() -> Vec<Metric> {
    vec![Metric::Degree, Metric::Betweenness, Metric::Eigenvector]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Config {
    pub families: Vec<GenSpec>,
    pub metrics: Vec<Metric>,
    pub replicates: usize,
    pub k: usize,
    /// Random removals averaged per replicate.
    pub random_draws: usize,
    pub mode: ReplicateMode,
    /// Swaps per shuffled replicate; defaults to ten per edge.
    pub swaps: Option<usize>,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            families: table_families(),
            metrics: table_metrics(),
            replicates: 100,
            k: 100,
            random_draws: 1,
            mode: ReplicateMode::Independent,
            swaps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HerdConfig {
    pub families: Vec<GenSpec>,
    pub metrics: Vec<Metric>,
    /// Randomly immunized fraction `n_h`.
    pub fraction: f64,
    pub graphs: usize,
    /// Random removals per graph when estimating the target `λ_max`.
    pub random_draws: usize,
}

impl Default for HerdConfig {
    fn default() -> Self {
        HerdConfig {
            families: vec![GenSpec::new(Family::ErdosRenyi { p: 0.4 }, 1000, 0)],
            metrics: table_metrics(),
            fraction: 0.7,
            graphs: 10,
            random_draws: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub families: Vec<GenSpec>,
    pub sir: SirParams,
    pub runs: usize,
    pub intervention_time: f64,
    pub k: usize,
    /// One top-k campaign per metric, next to the unvaccinated baseline.
    pub metrics: Vec<Metric>,
    /// Also run a random-k campaign.
    pub random: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            families: vec![
                GenSpec::new(Family::ErdosRenyi { p: 0.4 }, 1000, 0),
                GenSpec::new(Family::DuplicationDivergence { p: 0.4 }, 1000, 0),
            ],
            sir: SirParams::default(),
            runs: 10,
            intervention_time: 2.0,
            k: 100,
            metrics: vec![Metric::Degree],
            random: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Dataset name used in report rows.
    pub name: String,
    pub files: Vec<PathBuf>,
    pub format: ContactFormat,
    pub split: DaySplit,
    /// Seconds per day bucket for [`DaySplit::ByTimestamp`].
    pub day_length: i64,
    /// Fixed number of removed nodes per day; overrides `k_fraction`.
    pub k: Option<usize>,
    pub k_fraction: f64,
    pub metrics: Vec<Metric>,
    pub random_draws: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            name: "contacts".into(),
            files: Vec::new(),
            format: ContactFormat::ThreeColumn,
            split: DaySplit::PerFile,
            day_length: SECONDS_PER_DAY,
            k: None,
            k_fraction: 0.1,
            metrics: table_metrics(),
            random_draws: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub power: PowerOptions,
    pub eigen: EigenOptions,
    pub table1: Table1Config,
    pub herd: HerdConfig,
    pub simulate: SimulateConfig,
    pub ingest: IngestConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            out: PathBuf::from("results"),
            format: OutputFormat::Csv,
            power: PowerOptions::default(),
            eigen: EigenOptions::default(),
            table1: Table1Config::default(),
            herd: HerdConfig::default(),
            simulate: SimulateConfig::default(),
            ingest: IngestConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every section, whether or not it will be run.
    pub fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: usize| {
            if v == 0 {
                Err(Error::Config(format!("{what} must be at least 1")))
            } else {
                Ok(())
            }
        };
        let t = &self.table1;
        positive("table1.replicates", t.replicates)?;
        positive("table1.random_draws", t.random_draws)?;
        for spec in &t.families {
            spec.validate()?;
            if t.k > spec.n {
                return Err(Error::Config(format!("table1.k = {} exceeds n of {}", t.k, spec.label())));
            }
        }
        let h = &self.herd;
        positive("herd.graphs", h.graphs)?;
        positive("herd.random_draws", h.random_draws)?;
        if !(h.fraction > 0.0 && h.fraction < 1.0) {
            return Err(Error::Config(format!("herd.fraction {} not in (0, 1)", h.fraction)));
        }
        for spec in &h.families {
            spec.validate()?;
        }
        let s = &self.simulate;
        positive("simulate.runs", s.runs)?;
        s.sir.validate()?;
        if !(s.intervention_time >= 0.0) {
            return Err(Error::Config("simulate.intervention_time must be >= 0".into()));
        }
        for spec in &s.families {
            spec.validate()?;
        }
        let i = &self.ingest;
        positive("ingest.random_draws", i.random_draws)?;
        if i.day_length <= 0 {
            return Err(Error::Config("ingest.day_length must be positive".into()));
        }
        if !(0.0..=1.0).contains(&i.k_fraction) {
            return Err(Error::Config(format!("ingest.k_fraction {} not in [0, 1]", i.k_fraction)));
        }
        Ok(())
    }
}

fn stream(master: u64, pipeline: &str, name: &str) -> u64 {
    seed::derive(master, &[seed::tag(pipeline), seed::tag(name)])
}

/// One aggregated row: original, top-k and random `λ_max` for a source
/// graph ensemble (or a set of days) and one metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub source: String,
    pub metric: String,
    pub n: usize,
    pub k: usize,
    pub replicates: usize,
    pub seed: u64,
    pub original_mean: Option<f64>,
    pub original_std: Option<f64>,
    pub topk_mean: Option<f64>,
    pub topk_std: Option<f64>,
    pub random_mean: Option<f64>,
    pub random_std: Option<f64>,
    pub t_stat: Option<f64>,
    /// Two-sided paired p-value of top-k against random.
    pub p_value: Option<f64>,
    /// One-sided p-value for top-k below random.
    pub p_less: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub source: String,
    pub replicate: usize,
    pub day: Option<String>,
    /// Seed the replicate's graph and random removals derive from.
    pub seed: u64,
    pub metric: String,
    pub n: usize,
    pub edges: usize,
    pub k: usize,
    pub lambda_original: f64,
    pub lambda_topk: Option<f64>,
    pub lambda_random: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<SummaryRow>,
    pub raw: Vec<RawRow>,
    pub warnings: Vec<String>,
}

impl TableReport {
    pub fn row(&self, source_prefix: &str, metric: Metric) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.source.starts_with(source_prefix) && r.metric == metric.code())
    }
}

/// `λ_max` of one graph before and after the removals of every strategy.
#[derive(Clone, Debug)]
struct Measurement {
    n: usize,
    edges: usize,
    k: usize,
    original: f64,
    random: f64,
    topk: Vec<std::result::Result<f64, String>>,
}

fn lambda(g: &Graph, power: PowerOptions) -> Result<f64> {
    Ok(spectral::lambda_max(g, power)?.into_result()?.lambda_max)
}

fn measure(
    g: &Graph,
    metrics: &[Metric],
    k: usize,
    random_draws: usize,
    random_seed: u64,
    power: PowerOptions,
    eigen: EigenOptions,
) -> Result<Measurement> {
    let original = lambda(g, power)?;
    let mut random = 0.0;
    for d in 0..random_draws {
        let plan = vaccination::plan_random(g, k, seed::derive(random_seed, &[d as u64]))?;
        random += vaccination::lambda_after_removal(g, &plan.victims, power)?;
    }
    random /= random_draws as f64;
    let topk = metrics
        .iter()
        .map(|&m| {
            vaccination::plan_topk(g, m, k, eigen)
                .and_then(|plan| vaccination::lambda_after_removal(g, &plan.victims, power))
                .map_err(|e| e.to_string())
        })
        .collect();
    Ok(Measurement {
        n: g.node_count(),
        edges: g.edge_count(),
        k,
        original,
        random,
        topk,
    })
}

struct Unit {
    day: Option<String>,
    seed: u64,
    outcome: Result<Measurement>,
}

fn tabulate(
    source: &str,
    metrics: &[Metric],
    stream_seed: u64,
    units: &[Unit],
    report: &mut TableReport,
) {
    for (mi, &metric) in metrics.iter().enumerate() {
        let (mut orig, mut top, mut rand) = (Vec::new(), Vec::new(), Vec::new());
        let mut failures = Vec::new();
        let (mut n, mut k) = (0, 0);
        for (r, unit) in units.iter().enumerate() {
            let mut raw = RawRow {
                source: source.to_string(),
                replicate: r,
                day: unit.day.clone(),
                seed: unit.seed,
                metric: metric.code().to_string(),
                n: 0,
                edges: 0,
                k: 0,
                lambda_original: f64::NAN,
                lambda_topk: None,
                lambda_random: f64::NAN,
                error: None,
            };
            match &unit.outcome {
                Err(e) => {
                    failures.push(format!("replicate {r}: {e}"));
                    raw.error = Some(e.to_string());
                }
                Ok(m) => {
                    n = n.max(m.n);
                    k = k.max(m.k);
                    raw.n = m.n;
                    raw.edges = m.edges;
                    raw.k = m.k;
                    raw.lambda_original = m.original;
                    raw.lambda_random = m.random;
                    match &m.topk[mi] {
                        Ok(l) => {
                            raw.lambda_topk = Some(*l);
                            orig.push(m.original);
                            top.push(*l);
                            rand.push(m.random);
                        }
                        Err(e) => {
                            failures.push(format!("replicate {r}: {e}"));
                            raw.error = Some(e.clone());
                        }
                    }
                }
            }
            report.raw.push(raw);
        }
        let mut row = SummaryRow {
            source: source.to_string(),
            metric: metric.code().to_string(),
            n,
            k,
            replicates: orig.len(),
            seed: stream_seed,
            original_mean: None,
            original_std: None,
            topk_mean: None,
            topk_std: None,
            random_mean: None,
            random_std: None,
            t_stat: None,
            p_value: None,
            p_less: None,
            error: None,
        };
        if !failures.is_empty() {
            row.error = Some(format!("{} failed: {}", failures.len(), failures[0]));
        }
        if let (Ok((om, os)), Ok((tm, ts)), Ok((rm, rs))) =
            (stats::mean_std(&orig), stats::mean_std(&top), stats::mean_std(&rand))
        {
            row.original_mean = Some(om);
            row.original_std = os;
            row.topk_mean = Some(tm);
            row.topk_std = ts;
            row.random_mean = Some(rm);
            row.random_std = rs;
        }
        match stats::paired_t_test(&top, &rand) {
            Ok(t) => {
                row.t_stat = Some(t.t_stat);
                row.p_value = Some(t.p_value);
                row.p_less = Some(t.p_less);
            }
            Err(Error::TooFewSamples { got: 1, .. }) => report.warnings.push(format!(
                "{source} {}: a single sample, no standard deviation or p-value",
                metric.code()
            )),
            Err(_) => {}
        }
        report.rows.push(row);
    }
}

/// Top-k against random removal over generated ensembles.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<TableReport> {
    let t = &cfg.table1;
    if t.replicates == 0 || t.random_draws == 0 {
        return Err(Error::Config("replicates and random_draws must be at least 1".into()));
    }
    let mut report = TableReport::default();
    for spec in &t.families {
        spec.validate()?;
        let source = spec.label();
        let family_seed = stream(cfg.seed, "table1", &source);
        let base = match t.mode {
            ReplicateMode::Independent => None,
            ReplicateMode::Shuffled => Some(
                spec.with_seed(seed::derive(family_seed, &[seed::tag("base")]))
                    .generate()?,
            ),
        };
        let units: Vec<Unit> = (0..t.replicates)
            .into_par_iter()
            .map(|r| {
                let rep_seed = seed::derive(family_seed, &[r as u64]);
                let outcome = (|| {
                    let g = match &base {
                        None => spec.with_seed(rep_seed).generate()?,
                        Some(b) => {
                            let swaps = t.swaps.unwrap_or_else(|| generators::default_swaps(b));
                            generators::degree_preserving_shuffle(b, swaps, rep_seed)?
                        }
                    };
                    if t.k > g.node_count() {
                        return Err(Error::invalid(format!("k = {} exceeds n = {}", t.k, g.node_count())));
                    }
                    let random_seed = seed::derive(rep_seed, &[seed::tag("random")]);
                    measure(&g, &t.metrics, t.k, t.random_draws, random_seed, cfg.power, cfg.eigen)
                })();
                Unit {
                    day: None,
                    seed: rep_seed,
                    outcome,
                }
            })
            .collect();
        tabulate(&source, &t.metrics, family_seed, &units, &mut report);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdRow {
    pub source: String,
    pub metric: String,
    pub n: usize,
    pub graphs: usize,
    pub random_draws: usize,
    pub seed: u64,
    pub n_h: usize,
    pub n_h_fraction: f64,
    pub lambda_target: f64,
    pub n_hs: usize,
    pub n_hs_fraction: f64,
    pub lambda_at_n_hs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdRawRow {
    pub source: String,
    pub metric: String,
    pub graph: usize,
    pub seed: u64,
    pub n_h: usize,
    pub n_hs: usize,
    pub lambda_random_n_h: f64,
    pub lambda_top_n_hs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HerdTable {
    pub rows: Vec<HerdRow>,
    pub raw: Vec<HerdRawRow>,
    pub warnings: Vec<String>,
}

/// Fewest top-ranked removals matching the `λ_max` of random herd immunity.
pub fn run_herd(cfg: &ExperimentConfig) -> Result<HerdTable> {
    let h = &cfg.herd;
    if h.graphs == 0 {
        return Err(Error::Config("herd.graphs must be at least 1".into()));
    }
    let mut table = HerdTable::default();
    for spec in &h.families {
        spec.validate()?;
        let source = spec.label();
        let family_seed = stream(cfg.seed, "herd", &source);
        let seeds: Vec<u64> = (0..h.graphs).map(|r| seed::derive(family_seed, &[r as u64])).collect();
        let graphs: Vec<Graph> = seeds
            .par_iter()
            .map(|&s| spec.with_seed(s).generate())
            .collect::<Result<_>>()?;
        let random_seed = seed::derive(family_seed, &[seed::tag("random")]);
        for &metric in &h.metrics {
            let rep = vaccination::herd_equivalent(
                &graphs,
                metric,
                h.fraction,
                h.random_draws,
                random_seed,
                cfg.power,
                cfg.eigen,
            )?;
            if rep.n_hs > rep.n_h {
                table.warnings.push(format!(
                    "{source} {}: n_hs = {} exceeds n_h = {}",
                    metric.code(),
                    rep.n_hs,
                    rep.n_h
                ));
            }
            for (gi, &s) in seeds.iter().enumerate() {
                table.raw.push(HerdRawRow {
                    source: source.clone(),
                    metric: metric.code().to_string(),
                    graph: gi,
                    seed: s,
                    n_h: rep.n_h,
                    n_hs: rep.n_hs,
                    lambda_random_n_h: rep.random_by_graph[gi],
                    lambda_top_n_hs: rep.top_by_graph[gi],
                });
            }
            table.rows.push(HerdRow {
                source: source.clone(),
                metric: metric.code().to_string(),
                n: rep.n,
                graphs: rep.graphs,
                random_draws: rep.replicates,
                seed: family_seed,
                n_h: rep.n_h,
                n_h_fraction: rep.n_h_fraction,
                lambda_target: rep.lambda_target,
                n_hs: rep.n_hs,
                n_hs_fraction: rep.n_hs_fraction,
                lambda_at_n_hs: rep.lambda_at_n_hs,
            });
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub source: String,
    pub strategy: String,
    pub runs: usize,
    pub seed: u64,
    pub k: usize,
    pub intervention_time: Option<f64>,
    /// Peak of the ensemble-mean infected curve.
    pub peak_infected: f64,
    pub peak_time: f64,
    pub attack_rate: f64,
    pub final_vaccinated: f64,
    /// Mean over runs of each run's own peak.
    pub mean_run_peak: f64,
    /// Mean infected count on the last grid point.
    pub final_infected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub source: String,
    pub strategy: String,
    /// `None` for the ensemble mean.
    pub run: Option<usize>,
    pub seed: u64,
    pub time: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub summary: Vec<StrategySummary>,
    pub mean: Vec<TrajectoryRow>,
    pub runs: Vec<TrajectoryRow>,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    pub fn summary_for(&self, source_prefix: &str, strategy: &str) -> Option<&StrategySummary> {
        self.summary
            .iter()
            .find(|s| s.source.starts_with(source_prefix) && s.strategy == strategy)
    }
}

fn trajectory_rows(
    t: &SirTrajectory,
    source: &str,
    strategy: &str,
    run: Option<usize>,
    seed: u64,
    out: &mut Vec<TrajectoryRow>,
) {
    for j in 0..t.len() {
        out.push(TrajectoryRow {
            source: source.to_string(),
            strategy: strategy.to_string(),
            run,
            seed,
            time: t.times[j],
            s: t.s[j],
            i: t.i[j],
            r: t.r[j],
            v: t.v[j],
        });
    }
}

/// Outbreak ensembles with no campaign, a random campaign and one top-k
/// campaign per metric. All strategies of a family share the graph and
/// the run seeds, so runs differ only from the campaign onwards.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    let s = &cfg.simulate;
    s.sir.validate()?;
    if s.runs == 0 {
        return Err(Error::Config("simulate.runs must be at least 1".into()));
    }
    let mut report = SimulationReport::default();
    if s.intervention_time > s.sir.t_max {
        report.warnings.push(format!(
            "intervention at t = {} lies beyond t_max = {}; campaigns skipped",
            s.intervention_time, s.sir.t_max
        ));
    }
    let mut strategies: Vec<(String, Option<Strategy>)> = vec![("none".into(), None)];
    if s.random {
        strategies.push(("random".into(), Some(Strategy::RandomK { seed: 0 })));
    }
    for &m in &s.metrics {
        let st = Strategy::top(m);
        strategies.push((st.label(), Some(st)));
    }
    for spec in &s.families {
        spec.validate()?;
        let source = spec.label();
        let family_seed = stream(cfg.seed, "simulate", &source);
        let g = spec
            .with_seed(seed::derive(family_seed, &[seed::tag("graph")]))
            .generate()?;
        let run_seed = seed::derive(family_seed, &[seed::tag("runs")]);
        let k = s.k.min(g.node_count());
        if k < s.k {
            report
                .warnings
                .push(format!("{source}: k = {} capped at n = {k}", s.k));
        }
        for (label, strategy) in &strategies {
            let ivs: Vec<Intervention> = strategy
                .iter()
                .map(|&st| Intervention {
                    time: s.intervention_time,
                    strategy: st,
                    k,
                })
                .collect();
            let model = sir::SirModel::new(&g, s.sir, &ivs, cfg.eigen)?;
            let runs: Vec<sir::SimulationRun> = (0..s.runs)
                .into_par_iter()
                .map(|r| model.run(seed::derive(run_seed, &[r as u64])))
                .collect();
            let trajectories: Vec<&SirTrajectory> = runs.iter().map(|r| &r.trajectory).collect();
            let mean = SirTrajectory::average(&trajectories)?;
            let summary = sir::peak_and_final(&mean)?;
            let mut run_peaks = 0.0;
            for (r, run) in runs.iter().enumerate() {
                run_peaks += sir::peak_and_final(&run.trajectory)?.peak_infected;
                trajectory_rows(
                    &run.trajectory,
                    &source,
                    label,
                    Some(r),
                    seed::derive(run_seed, &[r as u64]),
                    &mut report.runs,
                );
            }
            trajectory_rows(&mean, &source, label, None, run_seed, &mut report.mean);
            report.summary.push(StrategySummary {
                source: source.clone(),
                strategy: label.clone(),
                runs: s.runs,
                seed: run_seed,
                k: if strategy.is_some() { k } else { 0 },
                intervention_time: strategy.map(|_| s.intervention_time),
                peak_infected: summary.peak_infected,
                peak_time: summary.peak_time,
                attack_rate: summary.attack_rate,
                final_vaccinated: summary.final_vaccinated,
                mean_run_peak: run_peaks / s.runs as f64,
                final_infected: mean.i.last().copied().unwrap_or(0.0),
            });
        }
    }
    Ok(report)
}

/// Per-day `λ_max` under top-k and random removal for contact logs.
/// `files` overrides the configured list when non-empty.
pub fn run_ingest(cfg: &ExperimentConfig, files: &[PathBuf]) -> Result<TableReport> {
    let c = &cfg.ingest;
    let files = if files.is_empty() { &c.files[..] } else { files };
    if files.is_empty() {
        return Err(Error::Config("no contact files given".into()));
    }
    if c.random_draws == 0 {
        return Err(Error::Config("ingest.random_draws must be at least 1".into()));
    }
    let mut report = TableReport::default();
    let mut parsed = Vec::with_capacity(files.len());
    for path in files {
        let p = ingest::parse_contacts(path, c.format)?;
        if let Some(first) = p.warnings.first() {
            report.warnings.push(format!(
                "{}: {} line(s) skipped, first at line {}: {}",
                path.display(),
                p.warnings.len(),
                first.line,
                first.message
            ));
        }
        parsed.push(p);
    }
    let days = match c.split {
        DaySplit::PerFile => ingest::build_per_file(&parsed)?,
        DaySplit::ByTimestamp => {
            let records: Vec<_> = parsed.iter().flat_map(|p| p.records.iter().copied()).collect();
            ingest::build_daily_graphs(&records, c.day_length)?
        }
    };
    if days.days.len() == 1 {
        report
            .warnings
            .push("a single day of contacts: no standard deviation or p-value".into());
    }
    let stream_seed = stream(cfg.seed, "ingest", &c.name);
    let units: Vec<Unit> = days
        .days
        .par_iter()
        .enumerate()
        .map(|(d, day)| {
            let n = day.graph.node_count();
            let k = c
                .k
                .unwrap_or_else(|| (c.k_fraction * n as f64).round() as usize)
                .min(n);
            let unit_seed = seed::derive(stream_seed, &[d as u64]);
            Unit {
                day: Some(day.day.clone()),
                seed: unit_seed,
                outcome: measure(&day.graph, &c.metrics, k, c.random_draws, unit_seed, cfg.power, cfg.eigen),
            }
        })
        .collect();
    let before = report.warnings.len();
    tabulate(&c.name, &c.metrics, stream_seed, &units, &mut report);
    if days.days.len() == 1 {
        report.warnings.truncate(before);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub spec: GenSpec,
    pub label: String,
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
    pub fingerprint: String,
}

/// Sidecar path for an edge-list file: `<path>.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Generates a graph, writes its edge list to `path` and a JSON metadata
/// sidecar next to it.
pub fn generate_to(spec: &GenSpec, path: &Path) -> Result<GraphMetadata> {
    spec.validate()?;
    let g = spec.generate()?;
    g.save_edge_list(path)?;
    let meta = GraphMetadata {
        spec: spec.clone(),
        label: spec.label(),
        seed: spec.seed,
        nodes: g.node_count(),
        edges: g.edge_count(),
        fingerprint: format!("{:016x}", g.fingerprint()),
    };
    write_json(&metadata_path(path), &meta)?;
    Ok(meta)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e.into()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `<name>.csv` and `<name>_raw.csv`, or `<name>.json`.
pub fn write_table(report: &TableReport, dir: &Path, name: &str, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let (agg, raw) = (dir.join(format!("{name}.csv")), dir.join(format!("{name}_raw.csv")));
            write_csv(&agg, &report.rows)?;
            write_csv(&raw, &report.raw)?;
            Ok(vec![agg, raw])
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{name}.json"));
            write_json(&path, report)?;
            Ok(vec![path])
        }
    }
}

pub fn write_herd(table: &HerdTable, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let (agg, raw) = (dir.join("herd.csv"), dir.join("herd_raw.csv"));
            write_csv(&agg, &table.rows)?;
            write_csv(&raw, &table.raw)?;
            Ok(vec![agg, raw])
        }
        OutputFormat::Json => {
            let path = dir.join("herd.json");
            write_json(&path, table)?;
            Ok(vec![path])
        }
    }
}

/// Trajectories go to `simulate_mean.csv` and `simulate_runs.csv`; the
/// per-strategy summary is always JSON.
pub fn write_simulation(report: &SimulationReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let mean = dir.join("simulate_mean.csv");
            let runs = dir.join("simulate_runs.csv");
            let summary = dir.join("simulate_summary.json");
            write_csv(&mean, &report.mean)?;
            write_csv(&runs, &report.runs)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                summary: &'a [StrategySummary],
                warnings: &'a [String],
            }
            write_json(
                &summary,
                &Summary {
                    summary: &report.summary,
                    warnings: &report.warnings,
                },
            )?;
            Ok(vec![mean, runs, summary])
        }
        OutputFormat::Json => {
            let path = dir.join("simulate.json");
            write_json(&path, report)?;
            Ok(vec![path])
        }
    }
}
