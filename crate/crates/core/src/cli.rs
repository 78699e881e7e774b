//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::alphabet::{build_space, Inventory, SymbolSpace};
use crate::error::{Error, Result};
use crate::fsa::enumerate;
use crate::temiar::{annotate, parse_lexicon, surface, Temiar, GRAMMAR};

#[derive(Debug, Parser)]
#[command(name = "olpm", version, about = "Resource-conscious finite-state prosodic morphology")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Grammar file (defaults to the built-in Temiar grammar)
    #[arg(long, global = true)]
    pub grammar: Option<PathBuf>,
    /// Phoneme inventory table: name, sonority, features
    #[arg(long, global = true)]
    pub inventory: Option<PathBuf>,
    /// Extra lexicon entries: name, root, flags
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Longest string to enumerate
    #[arg(long, global = true, default_value_t = 32)]
    pub max_len: usize,
    /// Print full symbol strings with technical symbols
    #[arg(long, global = true)]
    pub annotate: bool,
    /// Skip bounded local optimization
    #[arg(long, global = true)]
    pub no_optimize: bool,
    /// Exit successfully even if the result is empty
    #[arg(long, global = true)]
    pub allow_empty: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile an expression and print its forms
    Eval { expr: String },
    /// Print the six-cell paradigm of each root as a table
    Paradigm {
        #[arg(required = true)]
        roots: Vec<String>,
    },
    /// Write the automaton of an expression in Graphviz format
    Dot {
        expr: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the automaton of an expression as JSON
    Json {
        expr: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<Temiar> {
    let space = match &common.inventory {
        Some(p) => build_space(Inventory::parse(&std::fs::read_to_string(p)?)?)?,
        None => SymbolSpace::temiar(),
    };
    let source = match &common.grammar {
        Some(p) => std::fs::read_to_string(p)?,
        None => GRAMMAR.to_string(),
    };
    let mut t = Temiar::with_grammar(&space, &source)?;
    if let Some(p) = &common.lexicon {
        t.add_lexicon(&parse_lexicon(&std::fs::read_to_string(p)?)?)?;
    }
    t.set_optimize(!common.no_optimize);
    t.set_max_len(common.max_len);
    Ok(t)
}

fn write_out(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match path {
        Some(p) => std::fs::write(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs a parsed command line, returning the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let t = load(&cli.common)?;
    let c = &cli.common;
    let nonempty = match &cli.command {
        Command::Eval { expr } => {
            let a = t.eval(expr)?;
            if c.annotate {
                for w in enumerate(&a, c.max_len) {
                    writeln!(out, "{}\t{}", surface(t.space(), &w), annotate(t.space(), &w))?;
                }
            } else {
                for s in t.surfaces(&a) {
                    writeln!(out, "{s}")?;
                }
            }
            let empty = a.is_empty();
            if empty {
                writeln!(err, "warning: `{expr}` denotes the empty language")?;
            }
            !empty
        }
        Command::Paradigm { roots } => {
            let names: Vec<&str> = roots.iter().map(String::as_str).collect();
            let table = t.paradigm_table(&names)?;
            out.write_all(table.as_bytes())?;
            table
                .lines()
                .skip(1)
                .all(|l| l.split('\t').skip(2).all(|cell| !cell.is_empty()))
        }
        Command::Dot { expr, output } => {
            let a = t.eval(expr)?;
            write_out(output, &a.to_dot(), out)?;
            !a.is_empty()
        }
        Command::Json { expr, output } => {
            let a = t.eval(expr)?;
            write_out(output, &a.to_json(), out)?;
            !a.is_empty()
        }
    };
    Ok(if nonempty || c.allow_empty { 0 } else { 1 })
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => 3,
                _ => 1,
            }
        }
    }
}
