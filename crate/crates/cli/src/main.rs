use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use widthmin::benchmark::bench;
use widthmin::eval::{evaluate, parse_structure, Structure};
use widthmin::formula::parse_with_negation;
use widthmin::minimize::{minimize_with, rewrite_equiv, MinimizeError, TwStrategy};
use widthmin::normalform::{default_budget, potentials_csv, y_normal_form_with_budget, NormalFormError};
use widthmin::oracles::{semantically_equiv, OracleError};
use widthmin::treewidth::io::{read_gr, write_td};
use widthmin::treewidth::{
    exact_treewidth_with_threshold, heuristic_td, TwError, DEFAULT_EXACT_THRESHOLD, EXACT_HARD_LIMIT,
};
use widthmin::{formula::nnf, organize, Formula, Organized};

#[derive(Parser)]
#[command(
    name = "widthmin",
    version,
    about = "Minimize the width of positive first-order formulas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TwFlags {
    /// Exact treewidth for every region (default).
    #[arg(long, conflicts_with = "heuristic_tw")]
    exact_tw: bool,
    /// Min-fill heuristic instead of exact treewidth.
    #[arg(long)]
    heuristic_tw: bool,
    /// Largest region solved exactly before failing.
    #[arg(long, value_name = "N")]
    exact_threshold: Option<usize>,
}

impl TwFlags {
    fn strategy(self) -> TwStrategy {
        match (self.heuristic_tw, self.exact_threshold) {
            (true, _) => TwStrategy::Heuristic,
            (false, Some(n)) => TwStrategy::ExactUpTo(n),
            (false, None) => TwStrategy::Exact,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite to a formula of minimum width.
    Minimize {
        /// Formula files; `-` reads standard input.
        #[arg(required = true)]
        files: Vec<String>,
        #[command(flatten)]
        tw: TwFlags,
        /// Print the normal-form rewriting steps after the formula.
        #[arg(long)]
        trace: bool,
        /// Write a JSON report to a file, or `-` for standard output after the formula.
        #[arg(long, value_name = "PATH")]
        report: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Normal form under removal, pushdown and splitdown.
    Normalize {
        file: String,
        #[arg(long)]
        trace: bool,
        /// Print the potentials as CSV after the formula.
        #[arg(long)]
        potentials: bool,
        /// Maximum number of steps.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Print the width.
    Width {
        #[arg(required = true)]
        files: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the region tree.
    Regions { file: String },
    /// Tree decomposition of a PACE `.gr` graph, written as `.td`.
    Tw {
        file: String,
        #[command(flatten)]
        tw: TwFlags,
    },
    /// Evaluate a formula on a structure.
    Eval {
        formula: String,
        structure: String,
        /// Print the number of satisfying assignments.
        #[arg(long, conflicts_with = "rows")]
        count: bool,
        /// Print the satisfying assignments.
        #[arg(long)]
        rows: bool,
    },
    /// Decide whether two formulas rewrite into each other.
    Equiv {
        a: String,
        b: String,
        /// Compare on all small structures instead.
        #[arg(long)]
        semantic: bool,
        #[arg(long, default_value_t = 2)]
        max_domain: u32,
    },
    /// Time evaluation before and after minimization; prints JSON.
    Bench {
        formula: String,
        structure: String,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[command(flatten)]
        tw: TwFlags,
    },
}

/// Exit status 2 (bad input) or 3 (a bound was hit).
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn bounds(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn from_minimize(e: MinimizeError) -> Failure {
    match e {
        MinimizeError::Treewidth(TwError::TooLarge { .. })
        | MinimizeError::NormalForm(NormalFormError::BudgetExhausted(_)) => bounds(e),
        e => input(e),
    }
}

fn from_oracle(e: OracleError) -> Failure {
    match e {
        OracleError::BudgetExceeded(_) | OracleError::TooLarge(_) => bounds(e),
        e => input(e),
    }
}

fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")
            .map_err(input)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
            .with_context(|| format!("reading {path}"))
            .map_err(input)
    }
}

fn read_formula(path: &str) -> Result<Formula, Failure> {
    let text = read_source(path)?;
    let neg = parse_with_negation(&text).map_err(|e| input(anyhow!("{path}:{e}")))?;
    Ok(nnf(&neg))
}

fn read_structure(path: &str) -> Result<Structure, Failure> {
    let text = read_source(path)?;
    parse_structure(&text).map_err(|e| input(anyhow!("{path}: {e}")))
}

/// Runs `f` on every file, in parallel when `jobs > 1`; results keep input order.
fn per_file<T: Send>(
    files: &[String],
    jobs: usize,
    f: impl Fn(&str) -> Result<T, Failure> + Sync,
) -> Result<Vec<T>, Failure> {
    if jobs <= 1 || files.len() == 1 {
        return files.iter().map(|p| f(p)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| bounds(anyhow!(e)))?;
    pool.install(|| files.par_iter().map(|p| f(p)).collect())
}

fn labelled(files: &[String], outputs: Vec<String>) -> String {
    if files.len() == 1 {
        return outputs.concat();
    }
    files
        .iter()
        .zip(outputs)
        .map(|(p, o)| format!("==> {p} <==\n{o}"))
        .collect()
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Minimize {
            files,
            tw,
            trace,
            report,
            jobs,
        } => {
            let results = per_file(&files, jobs, |p| {
                let f = read_formula(p)?;
                let (out, rep) = minimize_with(&f, tw.strategy()).map_err(from_minimize)?;
                let mut text = format!("{out}\n");
                if trace {
                    text.push_str(&rep.normal_form_trace.to_string());
                }
                Ok((text, rep))
            })?;
            let mut out = labelled(&files, results.iter().map(|(t, _)| t.clone()).collect());
            if let Some(dest) = report {
                let reports: Vec<_> = results.iter().map(|(_, r)| r).collect();
                let json = if reports.len() == 1 {
                    serde_json::to_string_pretty(reports[0])
                } else {
                    serde_json::to_string_pretty(&reports)
                }
                .map_err(|e| input(anyhow!(e)))?
                    + "\n";
                if dest == "-" {
                    out.push_str(&json);
                } else {
                    fs::write(&dest, json)
                        .with_context(|| format!("writing {dest}"))
                        .map_err(input)?;
                }
            }
            Ok(out)
        }
        Command::Normalize {
            file,
            trace,
            potentials,
            budget,
        } => {
            let f = read_formula(&file)?;
            let nf =
                y_normal_form_with_budget(&f, budget.unwrap_or_else(|| default_budget(&f))).map_err(|e| match e {
                    NormalFormError::BudgetExhausted(_) => bounds(e),
                    e => input(e),
                })?;
            let mut out = format!("{}\n", nf.formula);
            if trace {
                out.push_str(&nf.trace.to_string());
            }
            if potentials {
                out.push_str(&potentials_csv(&nf.potentials));
            }
            Ok(out)
        }
        Command::Width { files, jobs } => {
            let widths = per_file(&files, jobs, |p| Ok(format!("{}\n", read_formula(p)?.width())))?;
            Ok(labelled(&files, widths))
        }
        Command::Regions { file } => {
            let f = read_formula(&file)?;
            let f = if f.is_standardized() { f } else { f.standardize() };
            Ok(match organize(&f) {
                Organized::Atom(a) => format!("atom {a}\n"),
                Organized::Region(t) => t.render(),
            })
        }
        Command::Tw { file, tw } => {
            let gr = read_gr(&read_source(&file)?).map_err(|e| input(anyhow!("{file}: {e}")))?;
            let h = &gr.hypergraph;
            let result = if tw.heuristic_tw {
                heuristic_td(h)
            } else {
                let threshold = tw
                    .exact_threshold
                    .unwrap_or(DEFAULT_EXACT_THRESHOLD)
                    .min(EXACT_HARD_LIMIT);
                exact_treewidth_with_threshold(h, threshold).map_err(bounds)?
            };
            let n = h.vertices().len();
            Ok(format!(
                "c width {} ({})\n{}",
                result.width,
                result.mode,
                write_td(&result.decomposition, n)
            ))
        }
        Command::Eval {
            formula,
            structure,
            count,
            rows,
        } => {
            let f = read_formula(&formula)?;
            let s = read_structure(&structure)?;
            let r = evaluate(&f, &s).map_err(input)?;
            Ok(if count {
                format!("{}\n", r.len())
            } else if rows {
                r.to_string()
            } else if r.schema.is_empty() {
                format!("{}\n", r.is_true())
            } else {
                format!("{}\n", r.len())
            })
        }
        Command::Equiv {
            a,
            b,
            semantic,
            max_domain,
        } => {
            let fa = read_formula(&a)?;
            let fb = read_formula(&b)?;
            let same = if semantic {
                semantically_equiv(&fa, &fb, max_domain).map_err(from_oracle)?
            } else {
                rewrite_equiv(&fa, &fb)
            };
            Ok(if same { "equivalent\n" } else { "not equivalent\n" }.to_string())
        }
        Command::Bench {
            formula,
            structure,
            repeats,
            tw,
        } => {
            let f = read_formula(&formula)?;
            let s = read_structure(&structure)?;
            let r = bench(&f, &s, repeats, tw.strategy()).map_err(|e| match e {
                widthmin::benchmark::BenchError::Minimize(m) => from_minimize(m),
                e => input(e),
            })?;
            Ok(serde_json::to_string_pretty(&r).map_err(|e| input(anyhow!(e)))? + "\n")
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
