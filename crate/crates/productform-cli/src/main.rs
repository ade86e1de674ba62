use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use productform::higher_level::DEFAULT_MAX_SUBSET_SIZE;
use productform_cli::commands::{
    cmd_analyze, cmd_export, cmd_generate, cmd_oracle, cmd_oracle_random, cmd_verify, family_spec,
};
use productform_cli::document::load;
use productform_cli::error::{EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK};
use productform_cli::{CliError, FamilyParams, OracleMode, Report, Result};

#[derive(Parser)]
#[command(name = "productform", version, about = "Graph-based product-form analysis of Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cuts,
    Broad,
}

#[derive(Subcommand)]
enum Command {
    /// Cut graph, higher-level hyperedges and relations of a graph document.
    Analyze {
        input: PathBuf,
        /// Highest hypergraph level; all levels when omitted.
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks every discovered relation and cut equation on random rates.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Exchanges the factors of the first relation before checking.
        #[arg(long)]
        fault: bool,
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the graph document of an example family.
    Generate {
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        c1: Option<usize>,
        #[arg(long)]
        c2: Option<usize>,
        #[arg(long)]
        servers: Option<usize>,
        #[arg(long)]
        multiple: Option<usize>,
        #[arg(long)]
        truncate: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also writes the expected fixtures next to `--out` as `<stem>.fixtures.json`.
        #[arg(long, requires = "out")]
        with_fixtures: bool,
    },
    /// Brute-force sourced cuts or the broad-cut subset search.
    Oracle {
        /// A graph document, or `random` for seeded random samples.
        input: String,
        #[arg(long, value_enum, default_value_t = Mode::Cuts)]
        mode: Mode,
        /// Bound on |K1| + |K2| in broad mode.
        #[arg(long, default_value_t = DEFAULT_MAX_SUBSET_SIZE)]
        max_subset: usize,
        /// Node count of random samples.
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graphviz DOT of the graph, optionally annotated with cut levels.
    Export {
        input: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// 1 overlays the cut graph; 2 and above add hyperedge junctions.
        #[arg(long, default_value_t = 0)]
        annotate: u32,
    },
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(report: Report, out: Option<&Path>) -> Result<u8> {
    write_text(out, &json_text(&report.body))?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn fixtures_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.fixtures.json"))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { input, max_level, out } => emit(cmd_analyze(&load(&input)?, max_level)?, out.as_deref()),
        Command::Verify {
            input,
            seeds,
            tol,
            fault,
            max_level,
            out,
        } => emit(cmd_verify(&load(&input)?, seeds, tol, fault, max_level)?, out.as_deref()),
        Command::Generate {
            family,
            n,
            k,
            levels,
            width,
            c1,
            c2,
            servers,
            multiple,
            truncate,
            out,
            with_fixtures,
        } => {
            let params = FamilyParams {
                n,
                k,
                levels,
                width,
                c1,
                c2,
                servers,
                multiple,
                truncate,
            };
            let spec = family_spec(&family, &params)?;
            let (doc, fixtures) = cmd_generate(&spec, with_fixtures)?;
            write_text(out.as_deref(), &doc.to_json_string())?;
            if with_fixtures {
                let out = out.expect("clap requires --out");
                match fixtures {
                    Some(fx) => write_text(Some(&fixtures_path(&out)), &json_text(&fx))?,
                    None => eprintln!("no fixtures are defined for {}", spec.name()),
                }
            }
            Ok(EXIT_OK)
        }
        Command::Oracle {
            input,
            mode,
            max_subset,
            nodes,
            samples,
            seed,
            out,
        } => {
            let mode = match mode {
                Mode::Cuts => OracleMode::Cuts,
                Mode::Broad => OracleMode::Broad,
            };
            let report = if input == "random" {
                cmd_oracle_random(nodes, samples, seed, mode, max_subset)?
            } else {
                cmd_oracle(&load(Path::new(&input))?, mode, max_subset)?
            };
            emit(report, out.as_deref())
        }
        Command::Export { input, dot, annotate } => {
            write_text(dot.as_deref(), &cmd_export(&load(&input)?, annotate)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
