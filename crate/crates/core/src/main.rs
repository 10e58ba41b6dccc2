use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use reviewnet::attributes::AffiliationMap;
use reviewnet::identity::{OverrideList, DEFAULT_THRESHOLD};
use reviewnet::ingest::{read_commit_stream, Attribution, Window};
use reviewnet::pipeline::{mine, MineConfig, SubsystemSelection};
use reviewnet::report::{write_bundle, ChartOptions, Dataset, Format, REPORT_FILE};

const SHIPPED_AFFILIATIONS: &str = include_str!("../data/affiliations.tsv");

const EXPORT_HOWTO: &str = r#"Export a repository in the canonical log format (run inside the clone):

  { git log --no-merges --name-only \
      --format='%x1e%H%x1f%an%x1f%ae%x1f%aI%x1f%cI%x1f0%x1f%B%n--'
    git log --merges \
      --format='%x1e%H%x1f%an%x1f%ae%x1f%aI%x1f%cI%x1f1%x1f%B%n--'
  } > commits.log

Maintainers history for a window YEAR (MAINTAINERS as of the window end,
plus every line added to it during the window):

  git show "$(git rev-list -1 --before=$((YEAR+1))-01-01 HEAD)":MAINTAINERS \
      > maintainers/YEAR.snapshot
  git log --since=YEAR-01-01 --until=$((YEAR+1))-01-01 -p --format= -- MAINTAINERS \
      | grep '^+[^+]' | cut -c2- > maintainers/YEAR.added
"#;

#[derive(Parser)]
#[command(name = "reviewnet", version, about = "Peer-review networks from commit trailers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a commit log, build the review networks and write the report bundle.
    Mine(MineArgs),
    /// Regenerate output formats from an existing report.json.
    Report(ReportArgs),
    /// Print the git commands that produce the expected inputs.
    Howto,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowKind {
    Yearly,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttributionArg {
    All,
    First,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Graphml,
    Svg,
    All,
}

#[derive(clap::Args)]
struct MineArgs {
    /// Canonical commit log, or `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    from: i32,
    #[arg(long)]
    to: i32,
    #[arg(long, value_enum, default_value = "yearly")]
    window: WindowKind,
    /// Comma-separated top-level directories, or `all`.
    #[arg(long, default_value = "all")]
    subsystems: String,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// domain<TAB>organization map; defaults to the bundled one.
    #[arg(long)]
    affiliations: Option<PathBuf>,
    #[arg(long)]
    identity_overrides: Option<PathBuf>,
    /// Directory with <window>.snapshot and <window>.added files.
    #[arg(long)]
    maintainers_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    subsystem_attribution: AttributionArg,
    #[arg(long)]
    out: PathBuf,
    /// Organizations to draw box plots for (comma-separated).
    #[arg(long, value_delimiter = ',')]
    orgs: Option<Vec<String>>,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: FormatArg,
    #[arg(long, value_delimiter = ',')]
    orgs: Option<Vec<String>>,
}

fn chart_options(orgs: Option<Vec<String>>) -> ChartOptions {
    ChartOptions {
        organizations: orgs,
        ..ChartOptions::default()
    }
}

fn run_mine(args: MineArgs) -> anyhow::Result<()> {
    let windows = match args.window {
        WindowKind::Yearly => Window::years(args.from, args.to)?,
    };
    let affiliations = match &args.affiliations {
        Some(path) => AffiliationMap::load(path)?,
        None => AffiliationMap::parse(SHIPPED_AFFILIATIONS, Path::new("<bundled affiliations>"))?,
    };
    let overrides = match &args.identity_overrides {
        Some(path) => OverrideList::load(path)?,
        None => OverrideList::new(),
    };
    let config = MineConfig {
        windows,
        subsystems: SubsystemSelection::parse(&args.subsystems)?,
        threshold: args.threshold,
        attribution: match args.subsystem_attribution {
            AttributionArg::All => Attribution::All,
            AttributionArg::First => Attribution::First,
        },
        affiliations,
        overrides,
        maintainers_dir: args.maintainers_dir,
    };

    let parsed = if args.input.as_os_str() == "-" {
        read_commit_stream(io::stdin().lock())?
    } else {
        let file = File::open(&args.input)
            .map_err(|e| reviewnet::Error::Io { path: args.input.clone(), source: e })?;
        read_commit_stream(BufReader::new(file))?
    };
    log::info!(
        "parsed {} records ({} malformed)",
        parsed.records.len(),
        parsed.malformed_count()
    );

    let dataset = mine(&parsed, &config)?;
    let written = write_bundle(&dataset, &args.out, Format::All, &chart_options(args.orgs))?;
    log::info!("wrote {} files to {}", written.len(), args.out.display());
    Ok(())
}

fn run_report(args: ReportArgs) -> anyhow::Result<()> {
    let dataset = Dataset::load(&args.input.join(REPORT_FILE))?;
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
        FormatArg::Graphml => Format::Graphml,
        FormatArg::Svg => Format::Svg,
        FormatArg::All => Format::All,
    };
    write_bundle(&dataset, &args.input, format, &chart_options(args.orgs))
        .with_context(|| format!("writing into {}", args.input.display()))?;
    Ok(())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("REVIEWNET_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| reviewnet::Error::Config(format!("REVIEWNET_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<reviewnet::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn render(err: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !text.contains(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    let result = configure_threads().and_then(|()| match cli.command {
        Command::Mine(args) => run_mine(args),
        Command::Report(args) => run_report(args),
        Command::Howto => {
            print!("{EXPORT_HOWTO}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", render(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
