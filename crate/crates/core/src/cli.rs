//! Command-line front end. Exit status: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{ndr_reputation, pagerank, PageRankConfig};
use crate::error::Error;
use crate::evaluation::{perturb_flip_incoming, run_protocol, ProtocolConfig, Ranking};
use crate::io::{load_edge_csv, load_matrix, load_node_manifest, write_atomic, write_edge_csv, write_matrix, write_node_manifest};
use crate::model::{Dataset, NodeId, RatingScale};
use crate::report::render_report;
use crate::reputation::{rank_all, HistoryWindow};
use crate::scenario::{generate_scenario, ScenarioSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "expert-rank", version, about = "Rank organization members by peer-rated expertise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank every node with one method.
    Rank(RankArgs),
    /// Run the full evaluation protocol and write a JSON report.
    Evaluate(EvaluateArgs),
    /// Reflect a node's incoming ratings and compare rankings before and after.
    Perturb(PerturbArgs),
    /// Generate a synthetic dataset from a scenario file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Edge,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Eer,
    Pagerank,
    Ndr,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edge")]
    format: Format,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    scale_min: i64,
    #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
    scale_max: i64,
    /// Rating meaning "I do not know this person".
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    unknown: i64,
    /// Alpha/Beta boundary; defaults to the midpoint of the valid range.
    #[arg(long)]
    threshold: Option<f64>,
    /// Matrix files: read cell (i, j) as node j rating node i.
    #[arg(long)]
    transpose: bool,
    /// Edge files: node manifest, one identifier per line.
    #[arg(long)]
    nodes: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `all` or `latest:<k>`.
    #[arg(long, default_value = "all")]
    window: HistoryWindow,
    #[arg(long, value_enum, default_value = "eer")]
    method: Method,
    /// PageRank with rating weights as transition weights.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "all")]
    window: HistoryWindow,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Node whose incoming ratings are reflected for the categorization test.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    weighted: bool,
    /// Seed recorded in the report metadata.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    target: String,
    #[arg(long, default_value = "all")]
    window: HistoryWindow,
    /// Where to write the perturbed dataset (edge CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "edge")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the node manifest (edge format keeps isolated nodes this way).
    #[arg(long)]
    nodes_out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidScale(_) => Failure::Usage(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn scale(data: &DataArgs) -> CliResult<RatingScale> {
    let scale = RatingScale::new(data.scale_min, data.scale_max, data.unknown)?;
    Ok(match data.threshold {
        Some(t) => scale.with_threshold(t)?,
        None => scale,
    })
}

fn load(data: &DataArgs) -> CliResult<Dataset> {
    let scale = scale(data)?;
    let dataset = match data.format {
        Format::Matrix => {
            if data.nodes.is_some() {
                return Err(Failure::Usage("--nodes applies to edge files only".into()));
            }
            load_matrix(&data.input, scale, data.transpose)?
        }
        Format::Edge => {
            if data.transpose {
                return Err(Failure::Usage("--transpose applies to matrix files only".into()));
            }
            let manifest = data.nodes.as_deref().map(load_node_manifest).transpose()?;
            load_edge_csv(&data.input, scale, manifest)?
        }
    };
    Ok(dataset)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn ranking_csv(ranking: &impl Ranking) -> String {
    let mut text = String::from("rank,node,score\n");
    for (i, (node, score)) in ranking.ranked().into_iter().enumerate() {
        let _ = writeln!(text, "{},{},{:.6}", i + 1, node, score);
    }
    text
}

fn cmd_rank(args: RankArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dataset = load(&args.data)?;
    let text = match args.method {
        Method::Eer => ranking_csv(&rank_all(&dataset, args.window)?),
        Method::Pagerank => {
            let config = PageRankConfig { weighted: args.weighted, ..Default::default() };
            let scores = pagerank(&dataset, &config);
            if !scores.converged {
                log::warn!("PageRank did not converge in {} iterations", scores.iterations);
            }
            ranking_csv(&scores)
        }
        Method::Ndr => ranking_csv(&ndr_reputation(&dataset)),
    };
    emit(args.out.as_deref(), &text, stdout)
}

fn cmd_evaluate(args: EvaluateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dataset = load(&args.data)?;
    let config = ProtocolConfig {
        dataset_id: args
            .data
            .input
            .file_name()
            .map_or_else(|| "dataset".into(), |n| n.to_string_lossy().into_owned()),
        k: args.k as usize,
        window: args.window,
        pagerank: PageRankConfig { weighted: args.weighted, ..Default::default() },
        perturb_target: args.target.map(NodeId::from),
        seed: args.seed,
        ..Default::default()
    };
    let reports = run_protocol(&dataset, &config)?;
    emit(args.out.as_deref(), &render_report(&reports)?, stdout)
}

fn cmd_perturb(args: PerturbArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dataset = load(&args.data)?;
    let target = NodeId::from(args.target);
    let perturbed = perturb_flip_incoming(&dataset, &target)?;
    write_atomic(&args.out, write_edge_csv(&perturbed).as_bytes())?;

    let config = PageRankConfig::default();
    let mut text = String::new();
    type Render<'a> = &'a dyn Fn(&Dataset) -> crate::error::Result<String>;
    let sections: [(&str, Render); 2] = [
        ("eer", &|d| Ok(ranking_csv(&rank_all(d, args.window)?))),
        ("pagerank", &|d| Ok(ranking_csv(&pagerank(d, &config)))),
    ];
    for (name, render) in sections {
        for (when, d) in [("before", &dataset), ("after", &perturbed)] {
            let _ = writeln!(text, "# {name} {when}");
            text.push_str(&render(d)?);
        }
    }
    emit(None, &text, stdout)
}

fn cmd_simulate(args: SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Scenario(format!("{}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let dataset = generate_scenario(&spec)?;
    let body = match args.format {
        Format::Edge => write_edge_csv(&dataset),
        Format::Matrix => write_matrix(&dataset)?,
    };
    if let Some(path) = &args.nodes_out {
        write_atomic(path, write_node_manifest(&dataset).as_bytes())?;
    }
    emit(args.out.as_deref(), &body, stdout)
}

fn use_color(stderr_is_terminal: bool) -> bool {
    stderr_is_terminal && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
}

fn diagnostic(stderr: &mut dyn Write, color: bool, message: &str) {
    let label = if color { "\x1b[31merror\x1b[0m" } else { "error" };
    let _ = writeln!(stderr, "{label}: {message}");
}

/// Runs the CLI against explicit streams and returns the exit status.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write, stderr_is_terminal: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Rank(a) => cmd_rank(a, stdout),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Perturb(a) => cmd_perturb(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    };
    let color = use_color(stderr_is_terminal);
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            diagnostic(stderr, color, &msg);
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            diagnostic(stderr, color, &e.to_string());
            EXIT_DATA
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stderr_tty = std::io::stderr().is_terminal();
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock(), stderr_tty)
}
