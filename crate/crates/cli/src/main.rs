use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hncg::constructions::{self, Algo1Policy, ConstructionId};
use hncg::cost::{format_rational, parse_rational};
use hncg::dynamics::{self, DynamicsConfig};
use hncg::experiment::{self, BatchConfig, SummaryRow};
use hncg::graph::{read_graph_file, write_graph_file};
use hncg::init::{Coloring, InitSpec, Topology};
use hncg::metrics;
use hncg::stability::{enumerate_stable_graphs, Witness};
use hncg::{is_approx_stable, CostParams, DistanceMatrix, Mode, Model, Population, Rational};

/// Homophilic network creation games: stability checks, constructions and
/// simulations.
#[derive(Debug, Parser)]
#[command(name = "hncg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a network is (approximately) pairwise stable.
    /// Exit status 0 when stable, 1 when unstable.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        model: Model,
        #[arg(long, value_parser = rational)]
        alpha: Rational,
        #[arg(long, value_parser = rational, default_value = "1")]
        epsilon: Rational,
    },
    /// List all pairwise stable networks of a small population.
    Enumerate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long)]
        model: Model,
        #[arg(long, value_parser = rational)]
        alpha: Rational,
        /// Write the stable networks as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build a catalogued network.
    Construct {
        #[arg(long)]
        id: String,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, value_parser = rational)]
        alpha: Option<Rational>,
        /// Edge selection of DEI_ALGO1.
        #[arg(long, value_enum, default_value_t = PolicyArg::Lex)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print segregation and structural measures of a network.
    Metrics {
        #[arg(long)]
        graph: PathBuf,
        /// Also print the values as a CSV header and row.
        #[arg(long)]
        csv: bool,
    },
    /// Generate an initial network.
    Gen {
        #[arg(long)]
        topology: Topology,
        #[arg(long)]
        coloring: Coloring,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the random-activation dynamics once.
    Simulate {
        #[arg(long)]
        model: Model,
        #[arg(long, value_parser = rational)]
        alpha: Rational,
        #[arg(long, value_parser = rational, default_value = "1")]
        epsilon: Rational,
        #[arg(long, default_value = "best")]
        mode: Mode,
        #[arg(long)]
        topology: Topology,
        #[arg(long)]
        coloring: Coloring,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        stride: Option<u64>,
        /// Skip the exact re-check of a converged network.
        #[arg(long)]
        no_verify: bool,
        /// CSV with columns step,ls,gs.
        #[arg(long)]
        timeline: PathBuf,
        /// JSON run summary.
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        final_graph: Option<PathBuf>,
    },
    /// Run a batch of simulations described by a JSON config.
    /// Exit status 3 when too many runs fail to converge.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `summary_csv` of the config.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Overrides `stats_csv` of the config.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Run on a single thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Box statistics of a run summary CSV.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Lex,
    Random,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn population(counts: &[usize]) -> Result<Population> {
    Ok(Population::from_counts(counts)?)
}

fn witness_json(w: &Witness) -> serde_json::Value {
    json!({
        "agent": w.agent,
        "move": w.mv.to_string(),
        "delta": w.delta.to_string(),
        "partner_delta": w.partner_delta.as_ref().map(|d| d.to_string()),
    })
}

fn check(graph: &Path, model: Model, alpha: Rational, epsilon: Rational) -> Result<ExitCode> {
    let (pop, g) = read_graph_file(graph).with_context(|| format!("reading {}", graph.display()))?;
    let params = CostParams::new(model, alpha)?;
    let report = is_approx_stable(&params, &pop, &g, epsilon)?;
    let out = match report.witness() {
        None => json!({ "stable": true }),
        Some(w) => json!({ "stable": false, "witness": witness_json(w) }),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if report.is_stable() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn enumerate(
    n: Option<usize>,
    counts: &[usize],
    model: Model,
    alpha: Rational,
    report: Option<&Path>,
) -> Result<ExitCode> {
    let pop = population(counts)?;
    if let Some(n) = n {
        if n != pop.n() {
            bail!("--n {n} does not match counts summing to {}", pop.n());
        }
    }
    let params = CostParams::new(model, alpha)?;
    let graphs = enumerate_stable_graphs(&params, &pop, None)?;
    println!("{} pairwise stable networks", graphs.len());
    let mut listed = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let edges: Vec<[usize; 2]> = g.edges().iter().map(|e| [e.lo(), e.hi()]).collect();
        println!("{}", serde_json::to_string(&edges)?);
        listed.push(edges);
    }
    if let Some(path) = report {
        let doc = json!({
            "model": model,
            "alpha": format_rational(&alpha),
            "n": pop.n(),
            "types": pop.types(),
            "count": graphs.len(),
            "graphs": listed,
        });
        fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn construct(
    id: &str,
    counts: &[usize],
    alpha: Option<Rational>,
    policy: PolicyArg,
    seed: u64,
    out: &Path,
) -> Result<ExitCode> {
    let pop = population(counts)?;
    let mut id: ConstructionId = id.parse()?;
    if let ConstructionId::DeiAlgo1(_) = id {
        id = ConstructionId::DeiAlgo1(match policy {
            PolicyArg::Lex => Algo1Policy::Lexicographic,
            PolicyArg::Random => Algo1Policy::SeededRandom(seed),
        });
    }
    let built = constructions::build(id, &pop, alpha)?;
    if let (Some(range), Some(alpha)) = (built.out_of_range, alpha) {
        eprintln!(
            "warning: alpha {} lies outside the proven range {range} of {}",
            format_rational(&alpha),
            id.name()
        );
    }
    write_graph_file(out, &pop, &built.graph).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn print_metrics(graph: &Path, csv: bool) -> Result<ExitCode> {
    let (pop, g) = read_graph_file(graph).with_context(|| format!("reading {}", graph.display()))?;
    let ls = metrics::local_segregation(&g, &pop)?;
    let gs = metrics::global_segregation(&g, &pop)?;
    let curious = metrics::curious_agents(&g, &pop).len();
    let intra = metrics::is_fully_intra_connected(&g, &pop);
    let diameter = match DistanceMatrix::compute(&g).diameter() {
        Some(d) => d.to_string(),
        None => "inf".to_string(),
    };
    let ls_f = metrics::local_segregation_f64(&g, &pop)?;
    let gs_f = metrics::global_segregation_f64(&g, &pop)?;
    println!("n = {}", g.n());
    println!("m = {}", g.m());
    println!("ls = {ls_f:.6} ({ls})");
    println!("gs = {gs_f:.6} ({gs})");
    println!("curious = {curious}");
    println!("intra_connected = {intra}");
    println!("diameter = {diameter}");
    if csv {
        println!("n,m,ls,gs,curious,intra_connected,diameter");
        println!("{},{},{ls_f},{gs_f},{curious},{intra},{diameter}", g.n(), g.m());
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(topology: Topology, coloring: Coloring, counts: Vec<usize>, seed: u64, out: &Path) -> Result<ExitCode> {
    let spec = InitSpec {
        topology,
        coloring,
        counts,
        seed,
    };
    let (g, pop) = spec.generate()?;
    write_graph_file(out, &pop, &g).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    params: CostParams,
    epsilon: Rational,
    mode: Mode,
    init: InitSpec,
    max_steps: Option<u64>,
    stride: Option<u64>,
    verify: bool,
    timeline: &Path,
    summary: &Path,
    final_graph: Option<&Path>,
) -> Result<ExitCode> {
    let seed = init.seed;
    let mut config = DynamicsConfig::new(params, mode, epsilon, init, seed);
    if let Some(k) = max_steps {
        config.max_steps = k;
    }
    config.sample_stride = stride;
    config.verify_exact = verify;
    let record = dynamics::run(&config)?;

    experiment::write_csv(timeline, &record.timeline)?;
    let doc = json!({
        "model": params.model,
        "alpha": format_rational(&params.alpha),
        "epsilon": format_rational(&epsilon),
        "mode": mode.to_string(),
        "seed": record.seed,
        "converged": record.converged,
        "steps_taken": record.steps_taken,
        "applied_moves": record.applied_moves,
        "exact_verified": record.exact_verified,
        "final_graph": record.summary,
    });
    fs::write(summary, serde_json::to_string_pretty(&doc)? + "\n")
        .with_context(|| format!("writing {}", summary.display()))?;
    if let Some(path) = final_graph {
        write_graph_file(path, &record.population, &record.final_graph)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "converged = {}, steps = {}, moves = {}, ls = {:.4}, gs = {:.4}",
        record.converged, record.steps_taken, record.applied_moves, record.summary.ls, record.summary.gs
    );
    Ok(ExitCode::SUCCESS)
}

fn batch(config: &Path, summary: Option<PathBuf>, stats: Option<PathBuf>, sequential: bool) -> Result<ExitCode> {
    let mut config = BatchConfig::from_file(config)?;
    if summary.is_some() {
        config.summary_csv = summary;
    }
    if stats.is_some() {
        config.stats_csv = stats;
    }
    let result = experiment::run_batch(&config, !sequential)?;
    let rows = result.summary_rows();
    match &config.summary_csv {
        Some(path) => experiment::write_csv(path, &rows)?,
        None => print!("{}", experiment::rows_to_csv(&rows)?),
    }
    if let Some(path) = &config.stats_csv {
        experiment::write_csv(path, &result.stats_rows())?;
    }
    let fraction = result.nonconverged_fraction();
    if let Some(limit) = config.max_nonconverged_fraction {
        if fraction > limit {
            eprintln!("error: {fraction:.3} of the runs did not converge (limit {limit})");
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(input: &Path, out: &Path) -> Result<ExitCode> {
    let rows: Vec<SummaryRow> = experiment::read_csv(input)?;
    let stats = experiment::stats_from_summary(&rows)?;
    experiment::write_csv(out, &stats)?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            graph,
            model,
            alpha,
            epsilon,
        } => check(&graph, model, alpha, epsilon),
        Command::Enumerate {
            n,
            counts,
            model,
            alpha,
            report,
        } => enumerate(n, &counts, model, alpha, report.as_deref()),
        Command::Construct {
            id,
            counts,
            alpha,
            policy,
            seed,
            out,
        } => construct(&id, &counts, alpha, policy, seed, &out),
        Command::Metrics { graph, csv } => print_metrics(&graph, csv),
        Command::Gen {
            topology,
            coloring,
            counts,
            seed,
            out,
        } => generate(topology, coloring, counts, seed, &out),
        Command::Simulate {
            model,
            alpha,
            epsilon,
            mode,
            topology,
            coloring,
            counts,
            seed,
            max_steps,
            stride,
            no_verify,
            timeline,
            summary,
            final_graph,
        } => {
            let init = InitSpec {
                topology,
                coloring,
                counts,
                seed,
            };
            simulate(
                CostParams::new(model, alpha)?,
                epsilon,
                mode,
                init,
                max_steps,
                stride,
                !no_verify,
                &timeline,
                &summary,
                final_graph.as_deref(),
            )
        }
        Command::Batch {
            config,
            summary,
            stats: stats_out,
            sequential,
        } => batch(&config, summary, stats_out, sequential),
        Command::Stats { input, out } => stats(&input, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
