#![allow(clippy::field_reassign_with_default)]

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p epivax --test acceptance`.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use epivax::centrality::{self, EigenOptions, Metric};
use epivax::experiment::{self, ExperimentConfig, OutputFormat, TableReport};
use epivax::generators::{Family, GenSpec};
use epivax::sir::{self, SirParams};
use epivax::spectral::{self, PowerOptions};
use epivax::{stats, Graph, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 2021;
const REPLICATES: usize = 30;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new(id: &'static str, title: &'static str) -> Self {
        Outcome {
            id,
            title,
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("     {detail}"));
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4}"))
}

fn row_line(r: &experiment::SummaryRow) -> String {
    format!(
        "{} {}: original {} ± {}, top-k {} ± {}, random {} ± {}, p {}",
        r.source,
        r.metric,
        fmt_opt(r.original_mean),
        fmt_opt(r.original_std),
        fmt_opt(r.topk_mean),
        fmt_opt(r.topk_std),
        fmt_opt(r.random_mean),
        fmt_opt(r.random_std),
        r.p_value.map_or("-".into(), |p| format!("{p:.3e}")),
    )
}

fn table1_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = MASTER_SEED;
    cfg.table1.replicates = REPLICATES;
    cfg.table1.k = 100;
    cfg.table1.metrics = vec![Metric::Degree, Metric::Betweenness, Metric::Eigenvector, Metric::Closeness];
    cfg
}

fn criterion_1(report: &TableReport) -> Outcome {
    let mut o = Outcome::new("1", "ER(1000, 0.4) degree row");
    let Some(r) = report.row("er(", Metric::Degree) else {
        o.check(false, "row missing".into());
        return o;
    };
    o.note(row_line(r));
    let within = |x: Option<f64>, lo: f64, hi: f64| x.is_some_and(|v| (lo..=hi).contains(&v));
    o.check(r.replicates >= 30, format!("replicates {} >= 30", r.replicates));
    o.check(within(r.original_mean, 395.0, 405.0), "original mean in [395, 405]".into());
    o.check(within(r.topk_mean, 344.0, 360.0), "top-100 mean in [344, 360]".into());
    o.check(within(r.random_mean, 358.0, 374.0), "random-100 mean in [358, 374]".into());
    o.check(r.p_value.is_some_and(|p| p <= 0.05), "paired p <= 0.05".into());
    o
}

fn criterion_2(report: &TableReport) -> Outcome {
    let mut o = Outcome::new("2", "top-k below random in every family/metric cell");
    for r in &report.rows {
        let ok = r.error.is_none()
            && matches!((r.topk_mean, r.random_mean), (Some(t), Some(x)) if t < x)
            && r.p_value.is_some_and(|p| p <= 0.05);
        o.check(ok, row_line(r));
    }
    let mean = |prefix: &str| report.row(prefix, Metric::Degree).and_then(|r| r.original_mean);
    let ba = mean("ba(");
    o.check(
        ba.is_some_and(|v| (v - 129.38).abs() <= 0.15 * 129.38),
        format!("BA original mean {} within ±15% of 129.38", fmt_opt(ba)),
    );
    let dd = mean("dd(");
    o.check(
        dd.is_some_and(|v| (v - 15.2).abs() <= 0.25 * 15.2),
        format!("DD original mean {} within ±25% of 15.2", fmt_opt(dd)),
    );
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new("3", "herd-immunity equivalent on ER(1000, 0.4)");
    let mut cfg = ExperimentConfig::default();
    cfg.seed = MASTER_SEED;
    cfg.herd.graphs = 10;
    cfg.herd.random_draws = 10;
    let table = match experiment::run_herd(&cfg) {
        Ok(t) => t,
        Err(e) => {
            o.check(false, format!("herd pipeline failed: {e}"));
            return o;
        }
    };
    for r in &table.rows {
        o.note(format!(
            "{} {}: n_h {} (λ {:.3}), n_hs {} = {:.1}% (λ {:.3})",
            r.source,
            r.metric,
            r.n_h,
            r.lambda_target,
            r.n_hs,
            100.0 * r.n_hs_fraction,
            r.lambda_at_n_hs
        ));
    }
    let dc = table.rows.iter().find(|r| r.metric == "DC");
    o.check(
        dc.is_some_and(|r| (0.33..=0.50).contains(&r.n_hs_fraction)),
        format!(
            "degree n_hs fraction {} in [33%, 50%]",
            dc.map_or("-".into(), |r| format!("{:.1}%", 100.0 * r.n_hs_fraction))
        ),
    );
    for r in &table.rows {
        o.check(r.n_hs_fraction < 0.70, format!("{} n_hs < 70%", r.metric));
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new("4", "vaccination ordering and collapse of outbreaks");
    let mut cfg = ExperimentConfig::default();
    cfg.seed = MASTER_SEED;
    let report = match experiment::run_simulate(&cfg) {
        Ok(r) => r,
        Err(e) => {
            o.check(false, format!("simulation pipeline failed: {e}"));
            return o;
        }
    };
    for family in ["er(", "dd("] {
        let get = |s: &str| report.summary_for(family, s);
        let (Some(none), Some(random), Some(top)) = (get("none"), get("random"), get("top_DC")) else {
            o.check(false, format!("{family} summaries missing"));
            continue;
        };
        o.note(format!(
            "{}: peak I none {:.1} @ {:.2}, random {:.1} @ {:.2}, degree {:.1} @ {:.2}",
            none.source, none.peak_infected, none.peak_time, random.peak_infected, random.peak_time,
            top.peak_infected, top.peak_time
        ));
        o.check(
            top.peak_infected < random.peak_infected && random.peak_infected < none.peak_infected,
            format!("{} peak degree < random < none", none.source),
        );
    }
    // every run: peak within the first 15 days, at most half of it left at t = 21
    let mut runs = std::collections::BTreeMap::<(String, String, usize), Vec<(f64, f64)>>::new();
    for row in &report.runs {
        runs.entry((row.source.clone(), row.strategy.clone(), row.run.unwrap_or(0)))
            .or_default()
            .push((row.time, row.i));
    }
    let mut failed = Vec::new();
    for (key, curve) in &runs {
        let (peak_t, peak) = curve.iter().fold((0.0, f64::MIN), |acc, &(t, i)| if i > acc.1 { (t, i) } else { acc });
        let late = curve.iter().find(|&&(t, _)| t >= 21.0).map_or(0.0, |&(_, i)| i);
        if !(peak_t <= 15.0 && late <= 0.5 * peak) {
            failed.push(format!("{key:?}: peak {peak} @ {peak_t}, I(21) {late}"));
        }
    }
    o.check(
        failed.is_empty(),
        format!(
            "{} of {} runs peak by t = 15 and fall below half the peak by t = 21 {}",
            runs.len() - failed.len(),
            runs.len(),
            failed.first().cloned().unwrap_or_default()
        ),
    );
    o
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/contacts")
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new("5", "contact-log ingest to table");
    o.note("no real contact dataset is bundled; running the synthetic fixture".into());
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    files.sort();
    let mut cfg = ExperimentConfig::default();
    cfg.seed = MASTER_SEED;
    cfg.ingest.name = "synthetic".into();
    let report = match experiment::run_ingest(&cfg, &files) {
        Ok(r) => r,
        Err(e) => {
            o.check(false, format!("ingest pipeline failed: {e}"));
            return o;
        }
    };
    o.check(files.len() >= 2, format!("{} day files", files.len()));
    for r in &report.rows {
        let ok = matches!((r.topk_mean, r.random_mean), (Some(t), Some(x)) if t < x)
            && r.p_value.is_some_and(|p| p <= 0.01);
        o.check(ok, format!("{} (top-k < random, p <= 0.01)", row_line(r)));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new("6", "property suites");
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let eigen = EigenOptions::default();

    // (a) centrality against geodesic enumeration
    let mut graphs: Vec<Graph> = Vec::new();
    for n in 2..=6usize {
        let pairs = n * (n - 1) / 2;
        graphs.extend((0..1u64 << pairs).map(|m| common::graph_from_mask(n, m)));
    }
    let exhaustive = graphs.len();
    for n in 7..=10 {
        for _ in 0..300 {
            let p = rng.gen_range(0.1..0.9);
            graphs.push(common::random_graph(&mut rng, n, p));
        }
    }
    let (mut worst, mut worst_ec, mut ec_compared) = (0.0f64, 0.0f64, 0usize);
    for g in &graphs {
        worst = worst
            .max(common::max_abs_diff(&centrality::degree_centrality(g).values, &common::degree_oracle(g)))
            .max(common::max_abs_diff(&centrality::closeness_centrality(g).values, &common::closeness_oracle(g)))
            .max(common::max_abs_diff(
                &centrality::betweenness_centrality(g, false).values,
                &common::betweenness_oracle(g),
            ));
        if g.edge_count() > 0 {
            if let Some(x) = common::leading_eigenvector(g, 1e-2) {
                match centrality::eigenvector_centrality(g, eigen) {
                    Ok(s) => worst_ec = worst_ec.max(common::max_abs_diff(&s.values, &x)),
                    Err(_) => worst_ec = f64::INFINITY,
                }
                ec_compared += 1;
            }
        }
    }
    o.check(
        worst <= 1e-8,
        format!(
            "(a) degree/closeness/betweenness on {} graphs ({exhaustive} exhaustive n <= 6): max error {worst:.2e}",
            graphs.len()
        ),
    );
    o.check(
        worst_ec <= 1e-6,
        format!("(a) eigenvector on {ec_compared} graphs with a simple leading eigenvalue: max error {worst_ec:.2e}"),
    );

    // (b) λ_max against Jacobi
    let power = PowerOptions::default();
    let mut worst_l = 0.0f64;
    for _ in 0..300 {
        let n = rng.gen_range(1..=32);
        let p = rng.gen_range(0.0..1.0);
        let g = common::random_graph(&mut rng, n, p);
        let l = spectral::lambda_max(&g, power).map(|r| r.lambda_max).unwrap_or(f64::NAN);
        let diff = (l - common::spectrum(&g)[0]).abs();
        worst_l = if diff.is_nan() { f64::INFINITY } else { worst_l.max(diff) };
    }
    o.check(worst_l <= 1e-6, format!("(b) λ_max vs Jacobi on 300 graphs n <= 32: max error {worst_l:.2e}"));

    // (c) interlacing: λ_{k+1}(A) <= λ_max(A minus k rows/columns) <= λ_1(A)
    let mut violations = 0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=24);
        let p = rng.gen_range(0.05..0.9);
        let g = common::random_graph(&mut rng, n, p);
        let k = rng.gen_range(0..n);
        let victims: Vec<NodeId> = rand::seq::index::sample(&mut rng, n, k).into_iter().map(NodeId::from).collect();
        let h = g.delete_nodes(&victims).unwrap();
        let full = common::spectrum(&g);
        let l = if h.node_count() == 0 { 0.0 } else { spectral::lambda_max(&h, power).unwrap().lambda_max };
        if l > full[0] + 1e-7 || l < full[k] - 1e-7 {
            violations += 1;
        }
    }
    o.check(violations == 0, format!("(c) interlacing on 500 (graph, victim set) pairs: {violations} violations"));

    // (d) deg_avg <= λ_max <= deg_max
    let mut bad = 0;
    for i in 0..100u64 {
        let family = match i % 5 {
            0 => Family::GnpFast { p: 0.1 },
            1 => Family::ErdosRenyi { p: 0.3 },
            2 => Family::DuplicationDivergence { p: 0.4 },
            3 => Family::BarabasiAlbert { m: 3 },
            _ => Family::RandomGeometric { radius: Some(0.2), dim: 2 },
        };
        let g = GenSpec::new(family, 200, i).generate().unwrap();
        if !spectral::spectral_bounds_check(&g, power).unwrap().holds {
            bad += 1;
        }
    }
    o.check(bad == 0, format!("(d) degree bounds on 100 generated graphs: {bad} violations"));

    // (e) conservation
    let g = GenSpec::new(Family::ErdosRenyi { p: 0.05 }, 300, 3).generate().unwrap();
    let params = SirParams {
        tau: 0.2,
        recovery_days: 7.0,
        initial_infected: 3,
        t_max: 40.0,
        dt: 0.25,
    };
    let ivs = [sir::Intervention {
        time: 5.0,
        strategy: epivax::vaccination::Strategy::top(Metric::Degree),
        k: 30,
    }];
    let mut broken = 0;
    for r in 0..100 {
        let run = sir::simulate(&g, params, if r % 2 == 0 { &ivs } else { &[] }, r).unwrap();
        let t = &run.trajectory;
        for j in 0..t.len() {
            if t.s[j] + t.i[j] + t.r[j] + t.v[j] != 300.0 {
                broken += 1;
            }
        }
    }
    o.check(broken == 0, format!("(e) S + I + R + V = n at every sample of 100 runs: {broken} violations"));

    // (f) t distribution
    let mut worst_t = 0.0f64;
    for df in [1.0, 2.0, 3.0, 5.0, 9.0, 29.0, 99.0] {
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            let c = stats::t_cdf(t, df).unwrap();
            let sym = (c + stats::t_cdf(-t, df).unwrap() - 1.0).abs();
            worst_t = worst_t.max(sym).max((c - common::t_cdf_quadrature(t, df)).abs());
        }
    }
    o.check(worst_t <= 1e-8, format!("(f) t_cdf symmetry and quadrature agreement: max error {worst_t:.2e}"));

    // (g) byte-identical outputs across repeated runs and thread counts
    match determinism() {
        Ok(files) => o.check(true, format!("(g) {files} output files byte-identical across 3 runs")),
        Err(e) => o.check(false, format!("(g) {e}")),
    }
    o
}

fn run_all_pipelines(dir: &Path) -> epivax::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 99;
    cfg.table1.families = vec![
        GenSpec::new(Family::ErdosRenyi { p: 0.2 }, 80, 0),
        GenSpec::new(Family::DuplicationDivergence { p: 0.4 }, 80, 0),
        GenSpec::new(Family::BarabasiAlbert { m: 4 }, 80, 0),
    ];
    cfg.table1.replicates = 5;
    cfg.table1.k = 8;
    cfg.herd.families = vec![GenSpec::new(Family::ErdosRenyi { p: 0.2 }, 80, 0)];
    cfg.herd.graphs = 3;
    cfg.simulate.families = vec![GenSpec::new(Family::BarabasiAlbert { m: 3 }, 120, 0)];
    cfg.simulate.k = 10;
    cfg.simulate.runs = 4;
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .map_err(|e| epivax::Error::Io {
            path: fixture_dir(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    files.sort();
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let sub = dir.join(format.to_string());
        experiment::write_table(&experiment::run_table1(&cfg)?, &sub, "table1", format)?;
        experiment::write_herd(&experiment::run_herd(&cfg)?, &sub, format)?;
        experiment::write_simulation(&experiment::run_simulate(&cfg)?, &sub, format)?;
        experiment::write_table(&experiment::run_ingest(&cfg, &files)?, &sub, "ingest", format)?;
    }
    Ok(())
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Result<usize, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (i, threads) in [1usize, 1, 3].into_iter().enumerate() {
        let dir = tmp.path().join(format!("run{i}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| run_all_pipelines(&dir)).map_err(|e| e.to_string())?;
        trees.push(tree(&dir));
    }
    if trees[0].is_empty() {
        return Err("no output files".into());
    }
    for t in &trees[1..] {
        if t != &trees[0] {
            return Err("outputs differ between runs".into());
        }
    }
    Ok(trees[0].len())
}

fn attack_rate(g: &Graph, params: SirParams, runs: usize, seed: u64) -> f64 {
    let e = sir::ensemble(g, params, &[], runs, seed).unwrap();
    e.runs.iter().map(|r| sir::peak_and_final(&r.trajectory).unwrap().attack_rate).sum::<f64>() / runs as f64
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new("7", "epidemic threshold, sub- and supercritical");
    let star = Graph::from_edges(None, (1..=100).map(|l| (0, l)));
    let lambda = spectral::lambda_max(&star, PowerOptions::default()).unwrap().lambda_max;
    let recovery_days = 14.0;
    let ratio = 0.05;
    let params = SirParams {
        tau: ratio / recovery_days,
        recovery_days,
        initial_infected: 5,
        t_max: 200.0,
        dt: 0.25,
    };
    let seeded = 5.0 / 101.0;
    let rate = attack_rate(&star, params, 200, MASTER_SEED);
    o.note(format!("star S_101: λ = {lambda:.6}, β/δ = {ratio} <= 1/λ = {:.3}", 1.0 / lambda));
    o.check(
        rate < 5.0 * seeded,
        format!("subcritical mean attack rate {rate:.4} < 5 × seeded {seeded:.4}"),
    );
    let er = GenSpec::new(Family::ErdosRenyi { p: 0.4 }, 1000, MASTER_SEED).generate().unwrap();
    let params = SirParams {
        tau: 0.4,
        recovery_days,
        ..SirParams::default()
    };
    let rate = attack_rate(&er, params, 10, MASTER_SEED);
    o.check(
        rate > 0.5,
        format!("supercritical (β/δ = 5.6) ER(1000, 0.4) mean attack rate {rate:.4} > 0.5"),
    );
    o
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // `cargo test` passes harness flags such as `--list`; answer and exit.
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let report = experiment::run_table1(&table1_config()).expect("table pipeline");
    let mut outcomes = vec![criterion_1(&report), criterion_2(&report)];
    outcomes.push(criterion_3());
    outcomes.push(criterion_4());
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());

    let mut failed = 0;
    for o in &outcomes {
        println!("{} criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title);
        for d in &o.details {
            println!("    {d}");
        }
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.0?}",
        outcomes.len() - failed,
        outcomes.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
