use std::io::{self, Read, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use examdown::calcengine::Calculator;
use examdown::examdown::{extract_answers, parse_document_with, render_document_html, render_document_latex};
use examdown::mathexpr::SymbolTable;
use examdown_previewd::{serve, ServiceConfig, DEFAULT_PORT};

const EXIT_ERRORS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Render, check and grade-prepare ExamDown documents.
#[derive(Debug, Parser)]
#[command(name = "examdown", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a document to standard output.
    Render {
        #[command(flatten)]
        doc: DocArgs,
        #[command(flatten)]
        calc: CalcArgs,
        #[arg(long, value_enum, default_value_t = Format::Html)]
        format: Format,
    },
    /// List diagnostics as `line:col severity code message`; exits 1 only
    /// if one of them is an error.
    Check {
        #[command(flatten)]
        doc: DocArgs,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Print the answer manifest as JSON.
    Answers {
        #[command(flatten)]
        doc: DocArgs,
    },
    /// Run the preview service on the loopback interface.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        #[command(flatten)]
        calc: CalcArgs,
        #[arg(long, env = "EXAMDOWN_SYMBOLS", value_name = "FILE")]
        symbols: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DocArgs {
    /// Document to read; standard input when absent or `-`.
    input: Option<PathBuf>,
    /// Symbol table replacing the built-in one.
    #[arg(long, env = "EXAMDOWN_SYMBOLS", value_name = "FILE")]
    symbols: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalcArgs {
    /// Leave `{@ … @}` placeholders unevaluated.
    #[arg(long)]
    no_calc: bool,
    /// Seed for randomized equivalence checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl CalcArgs {
    fn calculator(&self) -> Option<Calculator> {
        (!self.no_calc).then(|| Calculator::with_seed(self.seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Html,
    Latex,
    JsonAst,
}

/// A failure that ends the run with a message and exit code.
struct Fail(u8, String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let mut msg = e.render().to_string();
            if !msg.contains("Usage:") {
                msg = format!("{}\n{}", msg.trim_end(), Cli::command().render_usage());
            }
            eprintln!("{}", msg.trim_end());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("examdown: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.command {
        Command::Render { doc, calc, format } => {
            let (source, symbols) = load(&doc)?;
            let parsed = parse_document_with(&source, &symbols);
            let text = match format {
                Format::Html => render_document_html(&parsed, calc.calculator().as_ref()).html,
                Format::Latex => render_document_latex(&parsed, calc.calculator().as_ref()),
                Format::JsonAst => {
                    let mut s = serde_json::to_string_pretty(&parsed)
                        .map_err(|e| Fail(EXIT_ERRORS, format!("cannot encode the tree: {e}")))?;
                    s.push('\n');
                    s
                }
            };
            emit(&text)?;
            Ok(0)
        }
        Command::Check { doc, calc } => {
            let (source, symbols) = load(&doc)?;
            let parsed = parse_document_with(&source, &symbols);
            let diags = match calc.calculator() {
                Some(c) => render_document_html(&parsed, Some(&c)).diagnostics,
                None => parsed.diagnostics,
            };
            let mut out = String::new();
            for d in &diags {
                out.push_str(&d.to_line(&source));
                out.push('\n');
            }
            emit(&out)?;
            Ok(if diags.iter().any(|d| d.is_error()) {
                EXIT_ERRORS
            } else {
                0
            })
        }
        Command::Answers { doc } => {
            let (source, symbols) = load(&doc)?;
            let manifest = extract_answers(&parse_document_with(&source, &symbols));
            emit(&(manifest.to_json() + "\n"))?;
            Ok(0)
        }
        Command::Serve { port, calc, symbols } => {
            let config = ServiceConfig {
                seed: calc.seed,
                calc_allowed: !calc.no_calc,
                symbols: Arc::new(symbol_table(symbols.as_deref())?),
            };
            let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Fail(EXIT_ERRORS, format!("cannot start runtime: {e}")))?;
            eprintln!("examdown: serving on http://{addr}");
            runtime
                .block_on(serve(addr, config))
                .map_err(|e| Fail(EXIT_ERRORS, e.to_string()))?;
            Ok(0)
        }
    }
}

fn load(args: &DocArgs) -> Result<(String, SymbolTable), Fail> {
    let bytes = match args.input.as_deref() {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => std::fs::read(p).map_err(|e| Fail(EXIT_INPUT, format!("cannot read {}: {e}", p.display()))),
    }?;
    // A stray invalid byte should not cost the student the whole document.
    let source = String::from_utf8(bytes).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned());
    Ok((source, symbol_table(args.symbols.as_deref())?))
}

fn read_stdin() -> Result<Vec<u8>, Fail> {
    let mut buf = Vec::new();
    io::stdin()
        .read_to_end(&mut buf)
        .map_err(|e| Fail(EXIT_INPUT, format!("cannot read standard input: {e}")))?;
    Ok(buf)
}

fn symbol_table(path: Option<&Path>) -> Result<SymbolTable, Fail> {
    match path {
        None => Ok(SymbolTable::builtin().clone()),
        Some(p) => SymbolTable::load(p).map_err(|e| Fail(EXIT_INPUT, format!("symbol table {}: {e}", p.display()))),
    }
}

fn emit(text: &str) -> Result<(), Fail> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Fail(EXIT_ERRORS, format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}
