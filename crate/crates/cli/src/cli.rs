//! Argument parsing and the batch commands.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use exemplar_core::dsl::{parse_schema, parse_tree_spec, ParseDiagnostic};
use exemplar_core::{plausibility_report, Accounting, GenConfig, GridDocument, Schema, ValueProvider, Verdict};
use serde_json::json;

use crate::render;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}: input has errors")]
    Diagnostics(PathBuf),
    #[error("{0}")]
    Grid(#[from] exemplar_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "exemplar", version, about = "Check ORM schemas and render example grids")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridFormat {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum AccountingArg {
    #[default]
    Strict,
    Verbatim,
}

impl From<AccountingArg> for Accounting {
    fn from(a: AccountingArg) -> Self {
        match a {
            AccountingArg::Strict => Accounting::Strict,
            AccountingArg::Verbatim => Accounting::Verbatim,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report types whose populations are empty or smaller than expected.
    Check {
        schema: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long, value_enum, default_value = "strict")]
        accounting: AccountingArg,
    },
    /// Print the bound and the computed maximum size of every type.
    Sizes {
        schema: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long, value_enum, default_value = "strict")]
        accounting: AccountingArg,
    },
    /// Render the example grid of a tree spec.
    Grid {
        schema: PathBuf,
        tree: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        max_rows: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: GridFormat,
        #[arg(long, value_enum, default_value = "strict")]
        accounting: AccountingArg,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "EXEMPLAR_PORT", default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory of static UI assets served next to the API.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Write the schema and tree specs here after each change.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code: 0 for a clean
/// result, 1 for warnings, 2 for errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(args.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("exemplar: {e}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn report_diagnostics(path: &Path, diags: &[ParseDiagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", path.display());
    }
}

/// The schema and whether the parser warned about it.
fn load_schema(path: &Path) -> Result<(Schema, bool), CliError> {
    let parsed = parse_schema(&read(path)?);
    report_diagnostics(path, &parsed.diagnostics);
    let warned = !parsed.diagnostics.is_empty();
    let schema = parsed.into_result().map_err(|_| CliError::Diagnostics(path.to_path_buf()))?;
    Ok((schema, warned))
}

fn execute(cmd: Command, out: &mut impl Write) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match cmd {
        Command::Check {
            schema,
            format,
            accounting,
        } => {
            let (s, warned) = load_schema(&schema)?;
            let cfg = GenConfig {
                accounting: accounting.into(),
                ..GenConfig::default()
            };
            let report = plausibility_report(&s, &cfg);
            let verdict = report.worst();
            match format {
                ReportFormat::Text => write!(out, "{}", render::check_text(&report)).map_err(io)?,
                ReportFormat::Json => {
                    let mut v = serde_json::to_value(&report).expect("reports serialize");
                    v["verdict"] = json!(verdict);
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(io)?;
                }
            }
            Ok(match verdict {
                Verdict::Error => 2,
                Verdict::Warning => 1,
                Verdict::Ok if warned => 1,
                Verdict::Ok => 0,
            })
        }
        Command::Sizes {
            schema,
            format,
            accounting,
        } => {
            let (s, _) = load_schema(&schema)?;
            let cfg = GenConfig {
                accounting: accounting.into(),
                ..GenConfig::default()
            };
            let report = plausibility_report(&s, &cfg);
            match format {
                ReportFormat::Text => write!(out, "{}", render::sizes_table(&report)).map_err(io)?,
                ReportFormat::Json => {
                    let rows: Vec<_> = report
                        .types
                        .iter()
                        .map(|f| json!({"type": f.type_name, "initial": f.initial, "final": f.final_size}))
                        .collect();
                    let v = json!({"types": rows, "iterations": report.iterations});
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Grid {
            schema,
            tree,
            max_rows,
            format,
            accounting,
        } => {
            let (s, _) = load_schema(&schema)?;
            let t = parse_tree_spec(&read(&tree)?, &s).map_err(|diags| {
                report_diagnostics(&tree, &diags);
                CliError::Diagnostics(tree.clone())
            })?;
            let cfg = GenConfig {
                accounting: accounting.into(),
                max_user_size_pref: max_rows,
            };
            let doc = GridDocument::build(&s, &t, &cfg, &ValueProvider::from_schema(&s))?;
            let text = match format {
                GridFormat::Json => doc.to_json() + "\n",
                GridFormat::Table => render::grid_table(&doc),
                GridFormat::Csv => render::grid_csv(&doc)?,
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(0)
        }
        Command::Serve {
            port,
            host,
            ui_dir,
            snapshot_dir,
        } => {
            if let Some(dir) = &snapshot_dir {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
            }
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(crate::server::serve(SocketAddr::new(host, port), ui_dir, snapshot_dir))
                .map_err(|source| CliError::Io {
                    path: format!("{host}:{port}").into(),
                    source,
                })?;
            Ok(0)
        }
    }
}
