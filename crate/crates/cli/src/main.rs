//! `terw`: construct a Q-polynomial distance-regular graph, build its
//! pointed algebras, decompose the standard module, and verify the structure
//! structural statements, emitting a human-readable scoreboard and optional JSON.
//!
//! Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or
//! configuration error, 3 an internal guard tripped (basis cap, retry
//! budget).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use terwilliger::pipeline::{run, CheckSet, DomainPreference, RunConfig, VertexSelection};
use terwilliger::report::render_text;
use terwilliger::ToleranceContext;

/// Default output directory for JSON reports when `--json` gives a relative
/// path or is omitted with `TERW_OUTPUT_DIR` set.
const OUTPUT_DIR_ENV: &str = "TERW_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "terw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and verify every structure statement.
    Verify(RunArgs),
    /// Spectrum, idempotents, Krein parameters, Q-polynomial orderings only.
    Bm(RunArgs),
    /// Module decomposition and the Wedderburn report.
    Tmod(RunArgs),
    /// Subconstituent scheme detection.
    Scheme(SchemeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Graph spec: hamming:D,N | johnson:N,D | grassmann:q,N,D | cycle:n
    spec: String,
    /// Base vertex index, or `all` to sweep every vertex.
    #[arg(long, default_value = "0")]
    vertex: String,
    /// Random seed for the module decomposition.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scalar domain: exact | float | auto.
    #[arg(long, default_value = "auto")]
    domain: String,
    /// Tolerance override, repeatable: rank=..., cluster=..., residual=...
    #[arg(long = "tol")]
    tolerances: Vec<String>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Q-polynomial ordering override, e.g. `0,2,1,3`.
    #[arg(long)]
    ordering: Option<String>,
}

#[derive(Args)]
struct SchemeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Which subconstituent to analyze (both always run; this selects the
    /// one highlighted on stdout).
    #[arg(long, default_value = "first")]
    cell: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(all_pass) => {
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> terwilliger::Result<bool> {
    match cli.command {
        Command::Verify(args) => execute(&args, CheckSet::all(), None),
        Command::Bm(args) => {
            let checks = CheckSet {
                bose_mesner: true,
                dual: false,
                terwilliger: false,
                modules: false,
                schemes: false,
            };
            execute(&args, checks, None)
        }
        Command::Tmod(args) => {
            let checks = CheckSet {
                bose_mesner: true,
                dual: true,
                terwilliger: true,
                modules: true,
                schemes: false,
            };
            execute(&args, checks, None)
        }
        Command::Scheme(args) => {
            let checks = CheckSet {
                bose_mesner: true,
                dual: true,
                terwilliger: true,
                modules: false,
                schemes: true,
            };
            let cell = args.cell.clone();
            execute(&args.run, checks, Some(cell))
        }
    }
}

fn execute(
    args: &RunArgs,
    checks: CheckSet,
    highlight_cell: Option<String>,
) -> terwilliger::Result<bool> {
    let config = build_config(args, checks)?;
    let report = run(&config)?;
    print!("{}", render_text(&report));
    if let Some(cell) = highlight_cell {
        for v in &report.vertices {
            if let Some(s) = &v.schemes {
                let summary = match cell.as_str() {
                    "first" => &s.first,
                    "last" => &s.last,
                    other => {
                        return Err(terwilliger::Error::InvalidParameter(format!(
                            "--cell must be first|last, got `{other}`"
                        )))
                    }
                };
                println!(
                    "cell {cell} at vertex {}: is_scheme {} with {} classes, sizes {:?}",
                    v.base,
                    summary.verdict.is_scheme,
                    summary.verdict.class_count,
                    summary.verdict.relation_sizes
                );
            }
        }
    }
    if let Some(path) = &config.json_path {
        println!("json report written to {}", path.display());
    }
    Ok(report.all_passed())
}

fn build_config(args: &RunArgs, checks: CheckSet) -> terwilliger::Result<RunConfig> {
    let vertex = if args.vertex == "all" {
        VertexSelection::All
    } else {
        let idx = args.vertex.parse::<usize>().map_err(|_| {
            terwilliger::Error::InvalidParameter(format!(
                "--vertex must be an index or `all`, got `{}`",
                args.vertex
            ))
        })?;
        VertexSelection::Index(idx)
    };
    let domain: DomainPreference = args.domain.parse()?;
    let mut tol = ToleranceContext::default();
    for spec in &args.tolerances {
        let (key, value) = spec.split_once('=').ok_or_else(|| {
            terwilliger::Error::InvalidParameter(format!(
                "--tol expects key=value, got `{spec}`"
            ))
        })?;
        let value: f64 = value.parse().map_err(|_| {
            terwilliger::Error::InvalidParameter(format!("bad tolerance value in `{spec}`"))
        })?;
        match key {
            "rank" => tol.rank_threshold = value,
            "cluster" => tol.cluster_width = value,
            "residual" => tol.residual_bound = value,
            other => {
                return Err(terwilliger::Error::InvalidParameter(format!(
                    "unknown tolerance `{other}` (expected rank|cluster|residual)"
                )))
            }
        }
    }
    tol.validate()?;
    let ordering_override = match &args.ordering {
        Some(text) => Some(
            text.split(',')
                .map(|p| {
                    p.trim().parse::<usize>().map_err(|_| {
                        terwilliger::Error::InvalidParameter(format!(
                            "bad ordering entry `{p}`"
                        ))
                    })
                })
                .collect::<terwilliger::Result<Vec<usize>>>()?,
        ),
        None => None,
    };
    let json_path = resolve_json_path(args)?;
    Ok(RunConfig {
        spec: args.spec.clone(),
        vertex,
        ordering_override,
        domain,
        tolerances: tol,
        seed: args.seed,
        json_path,
        checks,
    })
}

fn resolve_json_path(args: &RunArgs) -> terwilliger::Result<Option<PathBuf>> {
    let out_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    Ok(match (&args.json, out_dir) {
        (Some(path), Some(dir)) if path.is_relative() => Some(dir.join(path)),
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => {
            let name = format!(
                "{}-v{}-s{}.json",
                args.spec.replace([':', ','], "_"),
                args.vertex,
                args.seed
            );
            Some(dir.join(name))
        }
        (None, None) => None,
    })
}
