use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use epivax::centrality::{self, Metric};
use epivax::experiment::{self, DaySplit, ExperimentConfig, OutputFormat, ReplicateMode};
use epivax::ingest::ContactFormat;
use epivax::spectral::{self, SirRates};
use epivax::{Error, Family, GenSpec, Graph, Result};

#[derive(Parser, Debug)]
#[command(name = "epivax", version, about = "Topology-aware vaccination experiments on contact networks")]
struct Cli {
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Gnp,
    Er,
    Dd,
    Ba,
    Rgg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Independent,
    Shuffled,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random graph as an edge list with a JSON sidecar.
    Generate(GenerateArgs),
    /// Score the nodes of an edge-list graph.
    Centrality(CentralityArgs),
    /// Spectral radius, degree bounds and the epidemic threshold.
    Spectral(SpectralArgs),
    /// Top-k versus random removal over generated ensembles.
    Table1(Table1Args),
    /// Top-ranked removals matching random herd immunity.
    Herd(HerdArgs),
    /// Outbreak ensembles with vaccination campaigns.
    Simulate(SimulateArgs),
    /// Top-k versus random removal on daily contact graphs.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Edge (gnp, er) or retention (dd) probability.
    #[arg(long, default_value_t = 0.4)]
    p: f64,
    /// Edges per new node (ba).
    #[arg(long, default_value_t = 50)]
    m: usize,
    /// Connection radius (rgg); defaults to a mean degree near 100.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Edge-list path; defaults to `<out>/<family>.edges`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CentralityArgs {
    /// Edge-list file.
    input: PathBuf,
    #[arg(long, default_value = "dc")]
    metric: String,
    /// Also print the `k` most central nodes.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    input: PathBuf,
    /// Per-contact transmission rate for the threshold check.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 14.0)]
    recovery_days: f64,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct HerdArgs {
    #[arg(long)]
    graphs: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    intervention_time: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Contact files; default to the config's list.
    files: Vec<PathBuf>,
    /// Files hold `id_a id_b` lines without timestamps.
    #[arg(long)]
    two_column: bool,
    /// Pool all records and split days by timestamp instead of by file.
    #[arg(long)]
    by_timestamp: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Serialize)]
struct ErrorReport {
    error: &'static str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                error: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&report).expect("plain struct"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(f) = cli.format {
        cfg.format = f.into();
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }

    match cli.command {
        Command::Generate(a) => generate(&cfg, a),
        Command::Centrality(a) => centrality_cmd(&cfg, a),
        Command::Spectral(a) => spectral_cmd(&cfg, a),
        Command::Table1(a) => {
            if let Some(r) = a.replicates {
                cfg.table1.replicates = r;
            }
            if let Some(k) = a.k {
                cfg.table1.k = k;
            }
            if let Some(m) = a.mode {
                cfg.table1.mode = match m {
                    ModeArg::Independent => ReplicateMode::Independent,
                    ModeArg::Shuffled => ReplicateMode::Shuffled,
                };
            }
            cfg.validate()?;
            let report = experiment::run_table1(&cfg)?;
            warn(&report.warnings);
            done(experiment::write_table(&report, &cfg.out, "table1", cfg.format)?)
        }
        Command::Herd(a) => {
            if let Some(g) = a.graphs {
                cfg.herd.graphs = g;
            }
            if let Some(f) = a.fraction {
                cfg.herd.fraction = f;
            }
            cfg.validate()?;
            let table = experiment::run_herd(&cfg)?;
            warn(&table.warnings);
            done(experiment::write_herd(&table, &cfg.out, cfg.format)?)
        }
        Command::Simulate(a) => {
            let s = &mut cfg.simulate;
            if let Some(r) = a.runs {
                s.runs = r;
            }
            if let Some(t) = a.tau {
                s.sir.tau = t;
            }
            if let Some(t) = a.t_max {
                s.sir.t_max = t;
            }
            if let Some(t) = a.intervention_time {
                s.intervention_time = t;
            }
            if let Some(k) = a.k {
                s.k = k;
            }
            cfg.validate()?;
            let report = experiment::run_simulate(&cfg)?;
            warn(&report.warnings);
            done(experiment::write_simulation(&report, &cfg.out, cfg.format)?)
        }
        Command::Ingest(a) => {
            let c = &mut cfg.ingest;
            if a.two_column {
                c.format = ContactFormat::TwoColumn;
            }
            if a.by_timestamp {
                c.split = DaySplit::ByTimestamp;
            }
            if a.k.is_some() {
                c.k = a.k;
            }
            if let Some(name) = a.name {
                c.name = name;
            }
            cfg.validate()?;
            let report = experiment::run_ingest(&cfg, &a.files)?;
            warn(&report.warnings);
            done(experiment::write_table(&report, &cfg.out, "ingest", cfg.format)?)
        }
    }
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn done(paths: Vec<PathBuf>) -> Result<()> {
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn generate(cfg: &ExperimentConfig, a: GenerateArgs) -> Result<()> {
    let family = match a.family {
        FamilyArg::Gnp => Family::GnpFast { p: a.p },
        FamilyArg::Er => Family::ErdosRenyi { p: a.p },
        FamilyArg::Dd => Family::DuplicationDivergence { p: a.p },
        FamilyArg::Ba => Family::BarabasiAlbert { m: a.m },
        FamilyArg::Rgg => Family::RandomGeometric {
            radius: a.radius,
            dim: a.dim,
        },
    };
    let spec = GenSpec::new(family, a.n, cfg.seed);
    let path = match a.output {
        Some(p) => p,
        None => {
            create_dir(&cfg.out)?;
            cfg.out.join(format!("{}.edges", spec.family.short_name()))
        }
    };
    let meta = experiment::generate_to(&spec, &path)?;
    println!("{}\t{} nodes\t{} edges", path.display(), meta.nodes, meta.edges);
    Ok(())
}

fn centrality_cmd(cfg: &ExperimentConfig, a: CentralityArgs) -> Result<()> {
    let metric: Metric = a.metric.parse()?;
    let g = Graph::load_edge_list(&a.input)?;
    let scores = centrality::compute(&g, metric, cfg.eigen)?;
    create_dir(&cfg.out)?;
    let path = cfg
        .out
        .join(format!("centrality_{}.{}", metric.code().to_lowercase(), cfg.format));
    match cfg.format {
        OutputFormat::Csv => {
            let file = std::fs::File::create(&path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            scores
                .write_csv(&g, std::io::BufWriter::new(file))
                .map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
        }
        OutputFormat::Json => experiment::write_json(&path, &scores)?,
    }
    println!("{}", path.display());
    if let Some(k) = a.top {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        for v in centrality::top_k(&scores, k)? {
            let _ = writeln!(out, "{}\t{}", g.label(v.index()), scores.values[v.index()]);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectralReport {
    input: PathBuf,
    nodes: usize,
    edges: usize,
    lambda_max: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    deg_avg: f64,
    deg_max: usize,
    bounds_hold: bool,
    beta: Option<f64>,
    delta: Option<f64>,
    ratio: Option<f64>,
    inverse_lambda: Option<f64>,
    contained: Option<bool>,
}

fn spectral_cmd(cfg: &ExperimentConfig, a: SpectralArgs) -> Result<()> {
    let g = Graph::load_edge_list(&a.input)?;
    let res = spectral::lambda_max(&g, cfg.power)?;
    let bounds = spectral::spectral_bounds_check(&g, cfg.power)?;
    let threshold = match a.beta {
        Some(beta) => Some(spectral::threshold_check(
            SirRates::from_recovery_days(beta, a.recovery_days),
            res.lambda_max,
        )?),
        None => None,
    };
    let report = SpectralReport {
        input: a.input.clone(),
        nodes: g.node_count(),
        edges: g.edge_count(),
        lambda_max: res.lambda_max,
        iterations: res.iterations,
        residual: res.residual,
        converged: res.converged,
        deg_avg: bounds.deg_avg,
        deg_max: bounds.deg_max,
        bounds_hold: bounds.holds,
        beta: a.beta,
        delta: a.beta.map(|_| 1.0 / a.recovery_days),
        ratio: threshold.map(|t| t.ratio),
        inverse_lambda: threshold.map(|t| t.inverse_lambda),
        contained: threshold.map(|t| t.contained),
    };
    create_dir(&cfg.out)?;
    let path = cfg.out.join(format!("spectral.{}", cfg.format));
    match cfg.format {
        OutputFormat::Csv => experiment::write_csv(&path, &[report])?,
        OutputFormat::Json => experiment::write_json(&path, &report)?,
    }
    println!("{}", path.display());
    Ok(())
}
