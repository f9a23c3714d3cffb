//! Command-line interface.
//!
//! Subcommands: `fit` (exact), `dp-fit` (private), `sample`, `evaluate`,
//! and `pipeline` (fit + sample + evaluate in one run). Every flag can also
//! come from a flat `key = value` config file passed with `--config`;
//! explicit command-line flags win over config-file values.
//!
//! Randomness is derived from one seed: the fitting stage (including the
//! Louvain fallback partition) runs on stream 0 of a ChaCha generator,
//! sample `i` on stream `1 + i`, and the evaluation of sample `i` on stream
//! `100000 + i`, so every artifact is reproducible per seed.
//!
//! Exit codes: 0 on success, 2 for invalid inputs or arguments, 1 for
//! runtime failures such as a stalled sampler.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::eval::{ccdf, evaluate, louvain, FidelityReport};
use crate::graph::{structural_census, AttributedGraph, CommunityPartition};
use crate::io::{
    load_attributed_graph, load_partition, write_attribute_matrix, write_edge_list, write_file,
    write_partition,
};
use crate::params::{
    dp_fit, fit, read_params, write_params, CAGMParams, FitOptions, DEFAULT_DEGREE_CAP,
    DEFAULT_DELTA,
};
use crate::sampler::sample_graph;
use crate::{Error, Result};

const EVAL_STREAM_BASE: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(
    name = "cagm",
    version,
    about = "Fit, sample, and evaluate community-preserving attributed graph models"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit model parameters exactly from a graph (and optional partition)
    Fit(CommonArgs),
    /// Fit model parameters under a differential-privacy budget
    #[command(name = "dp-fit")]
    DpFit(CommonArgs),
    /// Sample synthetic graphs from fitted parameters
    Sample {
        /// Parameter file written by fit or dp-fit
        params: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate synthetic graphs against the original
    Evaluate {
        /// Sample base paths; each BASE reads BASE.edges and BASE.attrs
        #[arg(required = true)]
        bases: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fit, sample, and evaluate in one run
    Pipeline(CommonArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// Flat `key = value` config file; explicit flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge list file (one `u v` pair per line)
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Binary attribute matrix file (one row per vertex)
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Community file (`vertex community` per line); Louvain when absent
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Total differential-privacy budget (dp-fit and private pipeline)
    #[arg(long)]
    eps: Option<f64>,
    /// Similarity bucket width
    #[arg(long)]
    delta: Option<f64>,
    /// Degree cap for private similarity estimation
    #[arg(long)]
    cap: Option<u32>,
    /// Structural weight of the community objective
    #[arg(long)]
    ws: Option<f64>,
    /// Number of synthetic samples
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fully resolved run options: defaults, overlaid by the config file,
/// overlaid by command-line flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub edges: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub eps: Option<f64>,
    pub delta: f64,
    pub cap: u32,
    pub ws: f64,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            edges: None,
            attrs: None,
            partition: None,
            eps: None,
            delta: DEFAULT_DELTA,
            cap: DEFAULT_DEGREE_CAP,
            ws: 0.98,
            samples: 1,
            seed: 0,
            out: PathBuf::from("cagm-out"),
        }
    }
}

impl RunConfig {
    fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        let over = args;
        if let Some(v) = &over.edges {
            cfg.edges = Some(v.clone());
        }
        if let Some(v) = &over.attrs {
            cfg.attrs = Some(v.clone());
        }
        if let Some(v) = &over.partition {
            cfg.partition = Some(v.clone());
        }
        if let Some(v) = over.eps {
            cfg.eps = Some(v);
        }
        if let Some(v) = over.delta {
            cfg.delta = v;
        }
        if let Some(v) = over.cap {
            cfg.cap = v;
        }
        if let Some(v) = over.ws {
            cfg.ws = v;
        }
        if let Some(v) = over.samples {
            cfg.samples = v;
        }
        if let Some(v) = over.seed {
            cfg.seed = v;
        }
        if let Some(v) = &over.out {
            cfg.out = v.clone();
        }
        if cfg.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::parse(path, idx + 1, format!("bad {what} `{value}`"));
            match key {
                "edges" => self.edges = Some(PathBuf::from(value)),
                "attrs" => self.attrs = Some(PathBuf::from(value)),
                "partition" => self.partition = Some(PathBuf::from(value)),
                "eps" => self.eps = Some(value.parse().map_err(|_| bad("number"))?),
                "delta" => self.delta = value.parse().map_err(|_| bad("number"))?,
                "cap" => self.cap = value.parse().map_err(|_| bad("integer"))?,
                "ws" => self.ws = value.parse().map_err(|_| bad("number"))?,
                "samples" => self.samples = value.parse().map_err(|_| bad("integer"))?,
                "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
                "out" => self.out = PathBuf::from(value),
                _ => {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        format!("unknown config key `{key}`"),
                    ))
                }
            }
        }
        Ok(())
    }

    fn stream(&self, id: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    fn require_graph(&self) -> Result<(AttributedGraph, Vec<u64>)> {
        let edges = self
            .edges
            .as_ref()
            .ok_or_else(|| Error::invalid("--edges is required"))?;
        let attrs = self
            .attrs
            .as_ref()
            .ok_or_else(|| Error::invalid("--attrs is required"))?;
        let loaded = load_attributed_graph(edges, attrs)?;
        Ok((loaded.graph, loaded.original_ids))
    }

    /// The partition from `--partition`, or a Louvain partition on
    /// stream 0 when none is given.
    fn obtain_partition(&self, g: &AttributedGraph) -> Result<CommunityPartition> {
        match &self.partition {
            Some(path) => load_partition(path, g.n()),
            None => {
                let mut rng = self.stream(0);
                louvain(g, &mut rng)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

/// Parses arguments from the process environment and runs; returns the
/// process exit code.
pub fn main_entry() -> u8 {
    init_logging();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&RunConfig::resolve(&args)?),
        Command::DpFit(args) => cmd_dp_fit(&RunConfig::resolve(&args)?),
        Command::Sample { params, common } => cmd_sample(&RunConfig::resolve(&common)?, &params),
        Command::Evaluate { bases, common } => {
            cmd_evaluate(&RunConfig::resolve(&common)?, &bases)
        }
        Command::Pipeline(args) => cmd_pipeline(&RunConfig::resolve(&args)?),
    }
}

/// Parses the given arguments (for tests) and runs.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::invalid(e.to_string()))?;
    run(cli)
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn census_summary(g: &AttributedGraph, p: &CommunityPartition) -> Result<String> {
    let census = structural_census(g, p)?;
    let mut out = String::new();
    let _ = writeln!(out, "vertices              {}", g.n());
    let _ = writeln!(out, "attributes            {}", g.k());
    let _ = writeln!(out, "edges                 {}", g.edge_count());
    let _ = writeln!(out, "  intra               {}", census.m_intra.iter().sum::<u64>());
    let _ = writeln!(out, "  inter               {}", census.m_inter);
    let _ = writeln!(out, "communities           {}", p.non_empty().count());
    let _ = writeln!(out, "  discarded vertices  {}", p.community(0).len());
    let _ = writeln!(out, "triangles             {}", census.tri_total);
    let _ = writeln!(out, "  intra               {}", census.tri_intra);
    let _ = writeln!(out, "  inter               {}", census.tri_inter);
    match census.global_clustering() {
        Some(c) => {
            let _ = writeln!(out, "global clustering     {c:.6}");
        }
        None => {
            let _ = writeln!(out, "global clustering     undefined");
        }
    }
    Ok(out)
}

fn write_fit_outputs(cfg: &RunConfig, g: &AttributedGraph, params: &CAGMParams) -> Result<()> {
    write_params(&cfg.out.join("params.txt"), params)?;
    write_partition(&cfg.out.join("partition.txt"), &params.partition)?;
    write_file(
        &cfg.out.join("census.txt"),
        &census_summary(g, &params.partition)?,
    )?;
    Ok(())
}

fn cmd_fit(cfg: &RunConfig) -> Result<()> {
    let (g, _) = cfg.require_graph()?;
    let p = cfg.obtain_partition(&g)?;
    let params = fit(&g, &p, cfg.delta)?;
    write_fit_outputs(cfg, &g, &params)?;
    println!(
        "fitted {} vertices, {} edges, {} communities -> {}",
        g.n(),
        g.edge_count(),
        p.non_empty().count(),
        cfg.out.join("params.txt").display()
    );
    print!("{}", census_summary(&g, &p)?);
    Ok(())
}

fn cmd_dp_fit(cfg: &RunConfig) -> Result<()> {
    let (g, _) = cfg.require_graph()?;
    let eps = cfg
        .eps
        .ok_or_else(|| Error::invalid("--eps is required for dp-fit"))?;
    let opts = FitOptions {
        structural_weight: cfg.ws,
        degree_cap: cfg.cap,
        delta: cfg.delta,
        ..FitOptions::default()
    };
    let mut rng = cfg.stream(0);
    let (params, ledger) = dp_fit(&g, eps, &opts, &mut rng)?;
    write_fit_outputs(cfg, &g, &params)?;
    write_file(&cfg.out.join("budget.txt"), &ledger.render())?;
    println!(
        "privately fitted {} vertices, {} edges, {} communities -> {}",
        g.n(),
        g.edge_count(),
        params.partition.non_empty().count(),
        cfg.out.join("params.txt").display()
    );
    print!("{}", ledger.render());
    Ok(())
}

fn sample_one(
    cfg: &RunConfig,
    params: &CAGMParams,
    index: usize,
) -> Result<(PathBuf, AttributedGraph, String)> {
    let mut rng = cfg.stream(1 + index as u64);
    let (g, diag) = sample_graph(params, &mut rng)?;
    let base = cfg.out.join(format!("sample_{index:03}"));
    write_edge_list(&base.with_extension("edges"), &g)?;
    write_attribute_matrix(&base.with_extension("attrs"), &g)?;
    let triangles = structural_census(&g, &params.partition)?.tri_total;
    let manifest = format!(
        "sample {index}: {} edges (target {}), {} triangles (structural stage {}, target {}), \
         connected: {}, candidate draws {}, accepted {}, duplicates {}",
        g.edge_count(),
        diag.edge_target,
        triangles,
        diag.cpgm.total_triangles,
        diag.cpgm.tri_intra_target + diag.cpgm.tri_inter_target,
        diag.cpgm.connected,
        diag.candidate_draws,
        diag.accepted_draws,
        diag.duplicate_draws,
    );
    Ok((base, g, manifest))
}

fn cmd_sample(cfg: &RunConfig, params_path: &Path) -> Result<()> {
    let params = read_params(params_path)?;
    let mut manifest = String::new();
    for i in 0..cfg.samples {
        let (base, _, line) = sample_one(cfg, &params, i)?;
        println!("wrote {}.edges", base.display());
        let _ = writeln!(manifest, "{line}");
    }
    write_file(&cfg.out.join("samples.txt"), &manifest)?;
    print!("{manifest}");
    Ok(())
}

fn render_report_table(rows: &[(String, FidelityReport)]) -> String {
    fn cell(v: Option<f64>) -> String {
        v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "sample", "rho_edges", "rho_tri", "rho_clust", "H_degree", "H_lcc", "rho_attr", "avg_f1"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<14} {:>11} {:>11} {:>11} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
            name,
            cell(r.rho_edges),
            cell(r.rho_triangles),
            cell(r.rho_clustering),
            r.h_degree,
            r.h_lcc,
            r.rho_attributes,
            r.avg_f1
        );
    }
    if rows.len() > 1 {
        let mean_opt = |f: fn(&FidelityReport) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = rows.iter().filter_map(|(_, r)| f(r)).collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        let mean = |f: fn(&FidelityReport) -> f64| -> f64 {
            rows.iter().map(|(_, r)| f(r)).sum::<f64>() / rows.len() as f64
        };
        let _ = writeln!(
            out,
            "{:<14} {:>11} {:>11} {:>11} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
            "mean",
            cell(mean_opt(|r| r.rho_edges)),
            cell(mean_opt(|r| r.rho_triangles)),
            cell(mean_opt(|r| r.rho_clustering)),
            mean(|r| r.h_degree),
            mean(|r| r.h_lcc),
            mean(|r| r.rho_attributes),
            mean(|r| r.avg_f1)
        );
    }
    out
}

fn degree_ccdf_table(g: &AttributedGraph) -> String {
    let degrees: Vec<u64> = (0..g.n() as u32).map(|v| g.degree(v) as u64).collect();
    let mut out = String::from("# degree fraction_strictly_larger\n");
    for (value, frac) in ccdf(&degrees) {
        let _ = writeln!(out, "{value} {frac}");
    }
    out
}

fn evaluate_samples(
    cfg: &RunConfig,
    original: &AttributedGraph,
    partition: &CommunityPartition,
    samples: &[(String, AttributedGraph)],
) -> Result<()> {
    write_file(
        &cfg.out.join("ccdf_degree_original.txt"),
        &degree_ccdf_table(original),
    )?;
    let mut rows = Vec::new();
    for (i, (name, syn)) in samples.iter().enumerate() {
        let mut rng = cfg.stream(EVAL_STREAM_BASE + i as u64);
        let report = evaluate(original, syn, partition, &mut rng)?;
        write_file(
            &cfg.out.join(format!("ccdf_degree_{name}.txt")),
            &degree_ccdf_table(syn),
        )?;
        rows.push((name.clone(), report));
    }
    let table = render_report_table(&rows);
    write_file(&cfg.out.join("report.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_evaluate(cfg: &RunConfig, bases: &[PathBuf]) -> Result<()> {
    let (g, _) = cfg.require_graph()?;
    let p = cfg.obtain_partition(&g)?;
    let mut samples = Vec::new();
    for base in bases {
        let loaded = load_attributed_graph(
            &base.with_extension("edges"),
            &base.with_extension("attrs"),
        )?;
        let name = base
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| base.display().to_string());
        samples.push((name, loaded.graph));
    }
    evaluate_samples(cfg, &g, &p, &samples)
}

fn cmd_pipeline(cfg: &RunConfig) -> Result<()> {
    let (g, _) = cfg.require_graph()?;
    let params = match cfg.eps {
        Some(eps) => {
            let opts = FitOptions {
                structural_weight: cfg.ws,
                degree_cap: cfg.cap,
                delta: cfg.delta,
                ..FitOptions::default()
            };
            let mut rng = cfg.stream(0);
            let (params, ledger) = dp_fit(&g, eps, &opts, &mut rng)?;
            write_file(&cfg.out.join("budget.txt"), &ledger.render())?;
            print!("{}", ledger.render());
            params
        }
        None => {
            let p = cfg.obtain_partition(&g)?;
            fit(&g, &p, cfg.delta)?
        }
    };
    write_fit_outputs(cfg, &g, &params)?;

    let mut manifest = String::new();
    let mut samples = Vec::new();
    for i in 0..cfg.samples {
        let (base, syn, line) = sample_one(cfg, &params, i)?;
        let name = base.file_name().unwrap().to_string_lossy().into_owned();
        let _ = writeln!(manifest, "{line}");
        samples.push((name, syn));
    }
    write_file(&cfg.out.join("samples.txt"), &manifest)?;
    print!("{manifest}");

    evaluate_samples(cfg, &g, &params.partition, &samples)
}

// ---------------------------------------------------------------------------
// logging
// ---------------------------------------------------------------------------

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Info
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("[{}] {}", record.level(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Routes library log messages (for example the small-graph sensitivity
/// substitution notice) to stderr. Safe to call more than once.
pub fn init_logging() {
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Info);
    }
}
