use std::collections::HashSet;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Args, Parser, Subcommand};
use flx::engine::{Engine, EngineError};
use flx::eval::MachineOptions;
use flx::search::SearchStats;

#[derive(Parser)]
#[command(name = "flx", version, about = "Run functional logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression against a program and print its results.
    Run {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[command(flatten)]
        opts: QueryOpts,
    },
    /// Read expressions from standard input.
    Repl {
        file: Option<PathBuf>,
        #[command(flatten)]
        opts: QueryOpts,
    },
    /// Run a benchmark suite: equations, unify or funpat.
    Bench {
        suite: String,
        /// Problem size multiplier; 0 runs nothing.
        #[arg(long, default_value_t = 1)]
        scale: u32,
    },
}

#[derive(Args, Clone)]
struct QueryOpts {
    #[arg(long, default_value = "dfs")]
    strategy: String,
    /// Stop after N results.
    #[arg(long, conflicts_with = "all")]
    first: Option<usize>,
    /// Print every result (the default).
    #[arg(long)]
    all: bool,
    /// Print each distinct result once.
    #[arg(long)]
    set: bool,
    /// Print search statistics to standard error.
    #[arg(long)]
    stats: bool,
    /// Print evaluation steps to standard error.
    #[arg(long)]
    trace: bool,
    /// Extra free variables, e.g. "x, y :: Bool".
    #[arg(long)]
    free: Option<String>,
    #[arg(long)]
    no_prelude: bool,
    /// Reduction step budget.
    #[arg(long)]
    steps: Option<u64>,
}

impl QueryOpts {
    fn machine(&self) -> MachineOptions {
        let trace: Option<Rc<dyn Fn(&str)>> = if self.trace {
            Some(Rc::new(|line: &str| eprintln!("{line}")))
        } else {
            None
        };
        MachineOptions {
            step_limit: self.steps,
            trace,
            ..MachineOptions::default()
        }
    }
}

/// Prints the results of `expr`; returns how many were printed, the final
/// statistics and the error that stopped the search, if any.
fn query(engine: &Engine, expr: &str, opts: &QueryOpts, out: &mut impl Write) -> (usize, SearchStats, Option<EngineError>) {
    let session = match engine.session(expr, opts.free.as_deref(), opts.machine()) {
        Ok(s) => s,
        Err(e) => return (0, SearchStats::default(), Some(e.into())),
    };
    let mut run = match session.run(&engine.registry, &opts.strategy) {
        Ok(r) => r,
        Err(e) => return (0, SearchStats::default(), Some(e)),
    };
    let limit = opts.first.unwrap_or(usize::MAX);
    let mut seen = HashSet::new();
    let mut count = 0;
    let mut err = None;
    while count < limit {
        match run.next() {
            None => break,
            Some(Err(e)) => {
                err = Some(e.into());
                break;
            }
            Some(Ok(r)) => {
                let line = r.to_string();
                if opts.set && !seen.insert(line.clone()) {
                    continue;
                }
                let _ = writeln!(out, "{line}");
                let _ = out.flush();
                count += 1;
            }
        }
    }
    (count, run.stats(), err)
}

fn load(file: Option<&PathBuf>, no_prelude: bool) -> Result<Engine, String> {
    let src = match file {
        Some(f) => std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?,
        None => String::new(),
    };
    Engine::load(&src, !no_prelude).map_err(|e| match file {
        Some(f) => format!("{}: {e}", f.display()),
        None => e.to_string(),
    })
}

fn cmd_run(file: &PathBuf, expr: &str, opts: &QueryOpts) -> ExitCode {
    let engine = match load(Some(file), opts.no_prelude) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (n, stats, err) = query(&engine, expr, opts, &mut io::stdout().lock());
    if opts.stats {
        eprintln!("{stats}");
    }
    if let Some(e) = err {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(if n > 0 { 0 } else { 1 })
}

fn cmd_repl(file: Option<&PathBuf>, opts: &QueryOpts) -> ExitCode {
    let engine = match load(file, opts.no_prelude) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut opts = opts.clone();
    let interactive = io::stdin().is_terminal();
    let stdout = io::stdout();
    let mut last = SearchStats::default();
    let mut lines = io::stdin().lock().lines();
    loop {
        if interactive {
            print!("> ");
            let _ = stdout.lock().flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        let line = line.trim();
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [] => continue,
            [":quit"] | [":q"] => break,
            [":stats"] => println!("{last}"),
            [":set", "strategy", s] => {
                if engine.registry.get(s).is_some() {
                    opts.strategy = s.to_string();
                } else {
                    let names: Vec<_> = engine.registry.names().collect();
                    eprintln!("error: unknown strategy `{s}` (available: {})", names.join(", "));
                }
            }
            [cmd, ..] if cmd.starts_with(':') => eprintln!("error: unknown command `{line}`"),
            _ => {
                let (n, stats, err) = query(&engine, line, &opts, &mut stdout.lock());
                last = stats;
                if let Some(e) = err {
                    eprintln!("error: {e}");
                } else if n == 0 && interactive {
                    println!("No more values.");
                }
                if opts.stats {
                    eprintln!("{stats}");
                }
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_bench(suite: &str, scale: u32) -> ExitCode {
    match flx::bench::run_suite(suite, scale, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { file, expr, opts } => cmd_run(file, expr, opts),
        Command::Repl { file, opts } => cmd_repl(file.as_ref(), opts),
        Command::Bench { suite, scale } => cmd_bench(suite, *scale),
    }
}
