//! `pct`: queries over `.pct` contract documents.
//!
//! Exit codes: 0 success, 1 a property or threshold failed, 2 usage or
//! diagnostic error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcontracts::oracle::{run_suites, Budget};
use pcontracts::rational::{self, Rational};
use pcontracts::speclang::{self, System};
use pcontracts::{compose_prob, refine_level, sat_level};

#[derive(Parser)]
#[command(name = "pct", version, about = "Probabilistic assume/guarantee contracts over finite traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Satisfaction level of an implementation against a contract.
    Sat {
        file: PathBuf,
        #[arg(long = "impl")]
        implementation: String,
        #[arg(long)]
        contract: String,
        /// Exit with status 1 when the level is below this value.
        #[arg(long, value_parser = parse_rational)]
        at_least: Option<Rational>,
    },
    /// Adds the composition of two contracts to the document.
    Compose {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        contracts: Vec<String>,
        /// Name of the composed contract; defaults to `A_B`.
        #[arg(long)]
        name: Option<String>,
        /// Where to write the document; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refinement level from one contract to another.
    Refine {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Runs the randomized theorem suites against the reference oracle.
    Verify {
        #[arg(long, default_value_t = 500)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        /// `ports=N,h=N,domain=N,runs=N`; omitted keys keep their defaults.
        #[arg(long, default_value_t = Budget::default())]
        budget: Budget,
        /// One JSON record per instance, then a summary record.
        #[arg(long)]
        json_lines: bool,
    },
    /// Recomputes every level of the bundled two-supplier example.
    Example {
        #[arg(long)]
        json: bool,
        /// Prints the bundled document instead.
        #[arg(long, conflicts_with = "json")]
        source: bool,
    },
    /// Prints a document in normal form.
    Fmt {
        file: PathBuf,
        /// Exit with status 1 when the file is not in normal form.
        #[arg(long)]
        check: bool,
        /// Rewrite the file in place.
        #[arg(long, conflicts_with = "check")]
        write: bool,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).ok_or_else(|| format!("`{s}` is not a rational (use n/d or a decimal)"))
}

enum Failure {
    /// A property or threshold did not hold.
    Property(String),
    /// Bad input: unreadable file, diagnostics, failed preconditions.
    Input(String),
}

type Outcome = Result<(), Failure>;

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<System, Failure> {
    speclang::load(&read(path)?).map_err(|d| Failure::Input(format!("{}:{d}", path.display())))
}

fn prob_contract(sys: &System, name: &str) -> Result<pcontracts::ProbContract, Failure> {
    sys.any_prob_contract(name).ok_or_else(|| Failure::Input(format!("undefined contract `{name}`")))
}

fn sat(file: &Path, implementation: &str, contract: &str, at_least: Option<Rational>) -> Outcome {
    let sys = load(file)?;
    let m = sys
        .implementation(implementation)
        .ok_or_else(|| Failure::Input(format!("undefined implementation `{implementation}`")))?;
    let pc = prob_contract(&sys, contract)?;
    let report = sat_level(m, &pc).map_err(input)?;
    println!("{}", rational::display(&report.level));
    match at_least {
        Some(min) if report.level < min => {
            Err(Failure::Property(format!("level {} is below {}", report.level, rational::exact(&min))))
        }
        _ => Ok(()),
    }
}

fn compose(file: &Path, contracts: &[String], name: Option<String>, out: Option<PathBuf>) -> Outcome {
    let [a, b] = contracts else {
        return Err(Failure::Input(format!("--contracts takes exactly two names, got {}", contracts.len())));
    };
    let sys = load(file)?;
    let name = name.unwrap_or_else(|| format!("{a}_{b}"));
    let doc = speclang::compose_decls(&sys, a, b, &name).map_err(|d| Failure::Input(format!("{}:{d}", file.display())))?;
    let text = speclang::print(&doc);

    // The written document must load back to the in-memory composition.
    let reloaded = speclang::load(&text).map_err(|d| Failure::Input(format!("composed document: {d}")))?;
    let direct = compose_prob(&prob_contract(&sys, a)?, &prob_contract(&sys, b)?).map_err(input)?;
    let written = prob_contract(&reloaded, &name)?;
    let (w, d) = (written.base(), direct.base());
    let same_base = w.signature() == d.signature() && w.assumption() == d.assumption() && w.guarantee() == d.guarantee();
    if !same_base || written.distribution() != direct.distribution() {
        return Err(Failure::Property(format!("composed contract `{name}` does not reload to the computed composition")));
    }

    match out {
        Some(path) => fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn refine(file: &Path, from: &str, to: &str) -> Outcome {
    let sys = load(file)?;
    let report = refine_level(&prob_contract(&sys, from)?, &prob_contract(&sys, to)?).map_err(input)?;
    let d = rational::display;
    match &report.level {
        Some(g) => println!("gamma         {}", d(g)),
        None => println!("gamma         undefined"),
    }
    println!("conditioning  {}", d(&report.conditioning));
    println!("joint         {}", d(&report.joint));
    println!("inclusion     {}", d(&report.inclusion));
    println!("degenerate    {}", report.degenerate);
    if report.degenerate {
        return Err(Failure::Property("the conditioning event has probability 0".into()));
    }
    Ok(())
}

fn verify(seeds: u64, first_seed: u64, budget: &Budget, json_lines: bool) -> Outcome {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut write_err = None;
    let summary = run_suites(first_seed, seeds, budget, |record| {
        if json_lines && write_err.is_none() {
            let line = serde_json::to_string(record).expect("records serialize");
            if let Err(e) = writeln!(lock, "{line}") {
                write_err = Some(e);
            }
        }
    });
    if let Some(e) = write_err {
        return Err(input(e));
    }
    if json_lines {
        let value = serde_json::json!({ "summary": summary.to_string(), "ok": summary.ok(), "counts": summary });
        writeln!(lock, "{value}").map_err(input)?;
    } else {
        writeln!(lock, "{summary}").map_err(input)?;
        for (suite, seed) in summary.failures() {
            writeln!(lock, "first counterexample: {suite} at seed {seed}").map_err(input)?;
        }
    }
    if summary.ok() {
        Ok(())
    } else {
        Err(Failure::Property("verification failed".into()))
    }
}

fn example(json: bool, source: bool) -> Outcome {
    if source {
        print!("{}", pcontracts::example::EXAMPLE_SOURCE);
        return Ok(());
    }
    let report = pcontracts::example::run_example().map_err(input)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{report}");
    }
    let prime_ok = report.alpha_beta_gamma.as_ref().is_none_or(|abg| &report.prime_level >= abg);
    if report.composed_level < report.alpha_beta || !prime_ok || report.disjoint_level != report.disjoint_product {
        return Err(Failure::Property("an example bound does not hold".into()));
    }
    Ok(())
}

fn fmt(file: &Path, check: bool, write: bool) -> Outcome {
    let text = read(file)?;
    let doc = speclang::parse(&text).map_err(|d| Failure::Input(format!("{}:{d}", file.display())))?;
    let printed = speclang::print(&doc);
    if check {
        if printed != text {
            return Err(Failure::Property(format!("{} is not in normal form", file.display())));
        }
    } else if write {
        if printed != text {
            fs::write(file, printed).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
        }
    } else {
        print!("{printed}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sat { file, implementation, contract, at_least } => sat(&file, &implementation, &contract, at_least),
        Command::Compose { file, contracts, name, out } => compose(&file, &contracts, name, out),
        Command::Refine { file, from, to } => refine(&file, &from, &to),
        Command::Verify { seeds, first_seed, budget, json_lines } => verify(seeds, first_seed, &budget, json_lines),
        Command::Example { json, source } => example(json, source),
        Command::Fmt { file, check, write } => fmt(&file, check, write),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
