//! `cac`: check `.cac` files, type-check and normalize terms.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cac_core::conditions::{full_report, Options, DEFAULT_FUEL};
use cac_core::reduction::{convertible, Normalizer, Strategy, Verdict};
use cac_core::signature::{load, LoadError, System};
use cac_core::syntax::parse_term;
use cac_core::typing::{Env, Typer};

#[derive(Parser, Debug)]
#[command(name = "cac", version, about = "Calculus of Algebraic Constructions checker")]
struct Cli {
    /// Reduction budget (number of contractions) for every normalization.
    #[arg(long, global = true, env = "CAC_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Accept a condition without proof; the report marks it Assumed.
    #[arg(long, global = true, value_enum)]
    assume: Vec<Assumption>,
    /// Fix the partition of defined symbols, e.g. `f1=plus,not,fw=app`.
    #[arg(long, global = true)]
    partition: Option<String>,
    /// Treat Assumed verdicts as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Assumption {
    S5,
    Confluence,
    FoTermination,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check typing, termination and consistency conditions.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Infer the type of a term, or check it against a type.
    Typecheck {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(short = 't', long = "type")]
        ty: Option<String>,
    },
    /// Normalize a term (leftmost-innermost).
    Normalize {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        outermost: bool,
    },
    /// Print the JSON condition report.
    Report {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

const EXIT_ERROR: u8 = 3;

/// Accepts `f1=a,b;fw=c` as well as `f1=a,b,fw=c`: a token containing `=`
/// starts a new group.
fn parse_partition(s: &str) -> Result<(BTreeSet<String>, BTreeSet<String>), String> {
    let mut f1 = BTreeSet::new();
    let mut fw = BTreeSet::new();
    let mut current: Option<&mut BTreeSet<String>> = None;
    for token in s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
        let name = match token.split_once('=') {
            Some((key, first)) => {
                current = Some(match key.trim() {
                    "f1" => &mut f1,
                    "fw" => &mut fw,
                    other => return Err(format!("unknown partition part {other}")),
                });
                first.trim()
            }
            None => token,
        };
        let set = current.as_deref_mut().ok_or_else(|| format!("expected f1=... or fw=..., found {token}"))?;
        if !name.is_empty() {
            set.insert(name.to_string());
        }
    }
    Ok((f1, fw))
}

fn load_file(path: &Path) -> Result<System, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load(&text).map_err(|e| match e {
        LoadError::Parse(p) => format!("{}:{p}", path.display()),
        LoadError::Elab(el) => format!("{}: {el}", path.display()),
    })
}

fn verdict_code(v: &Verdict, strict: bool) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Fails(_) => 1,
        Verdict::Assumed(_) if strict => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    let partition = cli.partition.as_deref().map(parse_partition).transpose()?;
    let opts = Options {
        fuel: cli.fuel,
        assume_s5: cli.assume.contains(&Assumption::S5),
        assume_confluence: cli.assume.contains(&Assumption::Confluence),
        assume_fo_termination: cli.assume.contains(&Assumption::FoTermination),
        partition,
        strict: cli.strict,
    };
    match &cli.command {
        Command::Check { file, json } => {
            let sys = load_file(file)?;
            let report = full_report(&sys, &opts);
            if *json {
                println!("{}", report.to_json_string());
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.exit_code(opts.strict) as u8)
        }
        Command::Report { file, .. } => {
            let sys = load_file(file)?;
            let report = full_report(&sys, &opts);
            println!("{}", report.to_json_string());
            Ok(report.exit_code(opts.strict) as u8)
        }
        Command::Typecheck { file, expr, ty } => {
            let sys = load_file(file)?;
            let names = sys.symbol_names();
            let t = parse_term(expr, &names).map_err(|e| format!("term:{e}"))?;
            let rs = sys.rewrite_system();
            let typer = Typer::new(&sys.sig, &rs, opts.fuel);
            let inferred = typer.infer(&Env::new(), &t).map_err(|e| e.to_string());
            match ty {
                None => match inferred {
                    Ok(found) => {
                        println!("{found}");
                        Ok(0)
                    }
                    Err(e) => {
                        println!("ill-typed: {e}");
                        Ok(1)
                    }
                },
                Some(ty) => {
                    let expected = parse_term(ty, &names).map_err(|e| format!("type:{e}"))?;
                    let verdict = match inferred {
                        Ok(found) => match convertible(&rs, &found, &expected, opts.fuel) {
                            Verdict::Fails(_) => Verdict::Fails(format!("{t} has type {found}, not {expected}")),
                            v => v,
                        },
                        Err(e) => Verdict::Fails(e),
                    };
                    println!("{verdict}");
                    Ok(verdict_code(&verdict, opts.strict))
                }
            }
        }
        Command::Normalize { file, expr, trace, outermost } => {
            let sys = load_file(file)?;
            let t = parse_term(expr, &sys.symbol_names()).map_err(|e| format!("term:{e}"))?;
            let rs = sys.rewrite_system();
            let mut n = Normalizer::new(&rs, opts.fuel);
            if *trace {
                n = n.with_trace();
            }
            let strategy = if *outermost { Strategy::Outermost } else { Strategy::Innermost };
            match n.run(&t, strategy) {
                Ok(res) => {
                    for step in &res.trace {
                        println!("{} at {}: {}", step.tag, step.pos, step.result);
                    }
                    if *trace {
                        println!("steps: {}", res.steps);
                    }
                    println!("{}", res.term);
                    Ok(0)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(2)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
