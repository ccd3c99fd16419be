//! quotlab command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quotlab::scenario::{self, CorpusOptions, RunOptions, Scenario, ScenarioReport};
use quotlab::Error;

#[derive(Debug, Parser)]
#[command(name = "quotlab", version)]
#[command(about = "exact invariants of finite group (scheme) actions on truncated local models")]
struct Cli {
    /// Override the truncation degree of every scenario (0 = none).
    #[arg(long, global = true)]
    truncation: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Leave timings out of the report.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tree,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file
    Run { file: PathBuf },
    /// Run the shipped scenario corpus
    Corpus {
        /// Only scenarios carrying this tag.
        #[arg(long)]
        tag: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Print scenario names without running anything.
        #[arg(long)]
        list: bool,
    },
    /// Print one artifact of a scenario: `key`, `<task>.key`, `<task>` or `report`
    Show {
        /// Corpus scenario name or path to a scenario file.
        scenario: String,
        artifact: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, Error> {
    let timing = !cli.no_timing;
    let opts = RunOptions { truncation: cli.truncation };
    match &cli.command {
        Command::Run { file } => {
            let sc = Scenario::from_path(file)?;
            // element and group syntax errors surface at build time; report them as parse errors
            if let Err(e @ Error::Parse { .. }) = sc.build(cli.truncation) {
                return Err(e);
            }
            let report = scenario::run(&sc, &opts);
            print_report(&report, cli.format, timing);
            Ok(status(report.outcome != scenario::Outcome::Fail))
        }
        Command::Corpus { tag, jobs, list } => {
            if *list {
                for sc in scenario::select(tag.as_deref())? {
                    println!("{}", sc.name);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let report = scenario::run_corpus(&CorpusOptions { tag: tag.clone(), jobs: *jobs, truncation: cli.truncation })?;
            match cli.format {
                Format::Text => print!("{}", scenario::render_corpus_text(&report, timing)),
                Format::Tree => println!("{}", scenario::render_corpus_tree(&report, timing)),
            }
            Ok(status(report.all_pass()))
        }
        Command::Show { scenario: name, artifact } => {
            let sc = if Path::new(name).is_file() {
                Scenario::from_path(Path::new(name))?
            } else {
                scenario::corpus_scenario(name)?
            };
            let report = scenario::run(&sc, &opts);
            if artifact == "report" {
                print_report(&report, cli.format, timing);
                return Ok(status(report.outcome != scenario::Outcome::Fail));
            }
            match find_artifact(&report, artifact) {
                Some(v) => {
                    match (&v, cli.format) {
                        (serde_json::Value::String(s), Format::Text) => println!("{s}"),
                        (_, Format::Text) => println!("{v}"),
                        (_, Format::Tree) => println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default()),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    eprintln!("error: scenario `{}` has no artifact `{artifact}`", report.scenario);
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn print_report(report: &ScenarioReport, format: Format, timing: bool) {
    match format {
        Format::Text => print!("{}", scenario::render_text(report, timing)),
        Format::Tree => println!("{}", scenario::render_tree(report, timing)),
    }
}

fn find_artifact(report: &ScenarioReport, spec: &str) -> Option<serde_json::Value> {
    let (task, key) = match spec.split_once('.') {
        Some((i, k)) => (i.parse::<usize>().ok(), Some(k)),
        None => match spec.parse::<usize>() {
            Ok(i) => (Some(i), None),
            Err(_) => (None, Some(spec)),
        },
    };
    match (task, key) {
        (Some(i), None) => report.tasks.get(i).map(|t| serde_json::Value::Object(t.artifacts.clone())),
        (Some(i), Some(k)) => report.tasks.get(i)?.artifacts.get(k).cloned(),
        (None, Some(k)) => report.tasks.iter().find_map(|t| t.artifacts.get(k).cloned()),
        (None, None) => None,
    }
}
