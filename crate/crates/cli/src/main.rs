//! `cesaro`: densities, null modification, chains and quotients from the
//! command line.

mod repro;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use cesaro::chains::{self, Chain, ChainError};
use cesaro::limits::{
    estimate_limits, exact_limits, gap_sublinearity, trace, EstimateOptions, LimitsError, Verdict,
};
use cesaro::nullmod::{self, ChainMap, NullModError};
use cesaro::quotient::{self, mask_of, subset_of, Element, Ideal, QuotientError};
use cesaro::rational::{decimal12, parse_rational};
use cesaro::sets::{count_upto, parse, parse_lines, ParseOptions};
use cesaro::{Rational, SetExpr};

#[derive(Parser)]
#[command(name = "cesaro", version, about = "Natural densities of sets of positive integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct HorizonArg {
    /// Largest N examined.
    #[arg(long, env = "CESARO_DEFAULT_HORIZON", default_value_t = 1_000_000)]
    horizon: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print ν_N exactly: `count/N`, reduced fraction, decimal.
    Eval {
        /// Set expression; omit when using --file.
        expr: Option<String>,
        #[arg(short, long)]
        file: Option<PathBuf>,
        #[arg(short = 'N', long = "N")]
        n: u64,
    },
    /// Upper and lower limits as JSON. Exit code 3 when undecided.
    Limits {
        expr: String,
        #[command(flatten)]
        horizon: HorizonArg,
        #[arg(long, default_value_t = 0.5)]
        window: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Skip the closed form and always stream.
        #[arg(long)]
        stream: bool,
    },
    /// CSV of N,nu_N at N ≈ 2^(i/8).
    Trace {
        expr: String,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Gap functions P_A(N)/N and Q_A(N)/N at powers of two, as JSON.
    Gaps {
        expr: String,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Algorithm 1 on one set, as JSON.
    Nullmod {
        expr: String,
        /// ν⁺ bound; defaults to the exact or estimated upper limit.
        #[arg(long)]
        bound: Option<String>,
        #[command(flatten)]
        horizon: HorizonArg,
        /// Write the decision audit as CSV.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Chain tools; chain files hold one expression per line.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Finite Boolean algebras and null-equivalence.
    #[command(subcommand)]
    Quotient(QuotientCommand),
    /// Re-run the reference examples and report PASS/FAIL.
    Repro,
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Sort a chain by inclusion and show the evidence.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Uniform-convergence certificate.
    Certify {
        file: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Insert midpoint sets until no ν-gap exceeds 2^-k.
    Dense {
        file: PathBuf,
        #[arg(short, long)]
        k: u32,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Smallest ε-sandwiching subchain.
    Skeleton {
        file: PathBuf,
        /// A fraction or decimal.
        #[arg(long)]
        epsilon: String,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Maximal chain in the power set of {1..universe}.
    Maximal {
        file: PathBuf,
        #[arg(long)]
        universe: u64,
    },
    /// One-sided null modification ψ, in file order.
    Psi {
        file: PathBuf,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Two-sided null modification φ, in file order.
    Phi {
        file: PathBuf,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Null-modify pairwise disjoint sets.
    Disjoint {
        file: PathBuf,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// d_ν(A, B) = ν⁺(A △ B).
    Distance {
        a: String,
        b: String,
        #[command(flatten)]
        horizon: HorizonArg,
    },
}

#[derive(Subcommand)]
enum QuotientCommand {
    /// Build P({1..universe}) / ideal from a JSON spec
    /// `{"universe": n, "ideal": [[…], …]}` and check the axioms.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Monotone closure of a seed subalgebra (JSON list of subsets).
    Closure {
        #[arg(long)]
        universe: u32,
        #[arg(long)]
        seed: PathBuf,
        /// Close the seed into a subalgebra first.
        #[arg(long)]
        generate: bool,
    },
    /// Whether A △ B is null.
    Equiv {
        a: String,
        b: String,
        #[command(flatten)]
        horizon: HorizonArg,
    },
    /// Disjoint representatives for classes with null overlaps.
    Reps {
        file: PathBuf,
        #[command(flatten)]
        horizon: HorizonArg,
    },
}

/// A failed command and its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Undecided,
    NullMod(String),
    Chain(String),
    Quotient(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Undecided => 3,
            Failure::NullMod(_) => 4,
            Failure::Chain(_) => 5,
            Failure::Quotient(_) => 6,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<LimitsError> for Failure {
    fn from(e: LimitsError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<NullModError> for Failure {
    fn from(e: NullModError) -> Self {
        Failure::NullMod(e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        Failure::Chain(e.to_string())
    }
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Self {
        Failure::Quotient(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn expr(text: &str) -> Result<SetExpr, Failure> {
    parse(text).map_err(|e| Failure::Parse(format!("{text:?}: {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn expr_file(path: &Path) -> Result<Vec<SetExpr>, Failure> {
    parse_lines(&read(path)?, ParseOptions::default()).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn rational(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::Parse(format!("{text:?}: {e}")))
}

fn emit(value: &impl Serialize) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn exact_json(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "decimal": decimal12(r) })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Eval { expr: text, file, n } => {
            let text = match (text, file) {
                (Some(t), None) => t,
                (None, Some(f)) => read(&f)?.trim().to_string(),
                _ => return Err(Failure::Usage("give exactly one of EXPR or --file".into())),
            };
            if n == 0 {
                return Err(Failure::Usage("N must be at least 1".into()));
            }
            let count = count_upto(&expr(&text)?, n);
            let value = Rational::new(count as i128, n as i128);
            println!("{count}/{n} {value} {}", decimal12(&value));
            Ok(())
        }
        Command::Limits { expr: text, horizon, window, tolerance, stream } => {
            let e = expr(&text)?;
            let options = EstimateOptions { horizon: horizon.horizon, window, tolerance };
            let report = match (stream, exact_limits(&e)) {
                (false, Ok(r)) => r,
                (false, Err(LimitsError::NotExactlySolvable(_))) | (true, _) => estimate_limits(&e, &options)?,
                (false, Err(other)) => return Err(other.into()),
            };
            emit(&report)?;
            if report.verdict == Verdict::Unknown {
                return Err(Failure::Undecided);
            }
            Ok(())
        }
        Command::Trace { expr: text, horizon } => {
            if horizon.horizon < 2 {
                return Err(Failure::Usage("horizon must be at least 2".into()));
            }
            let e = expr(&text)?;
            let mut out = BufWriter::new(io::stdout().lock());
            writeln!(out, "N,nu_N")?;
            for (n, v) in trace(&e, horizon.horizon) {
                writeln!(out, "{n},{}", decimal12(&v))?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Gaps { expr: text, horizon } => emit(&gap_sublinearity(&expr(&text)?, horizon.horizon)?),
        Command::Nullmod { expr: text, bound, horizon, audit } => {
            let e = expr(&text)?;
            let result = match bound {
                Some(b) => nullmod::null_modify(&e, rational(&b)?, horizon.horizon)?,
                None => nullmod::null_modify_auto(&e, horizon.horizon)?,
            };
            if let Some(path) = audit {
                let file = fs::File::create(&path).map_err(|err| Failure::Usage(format!("{}: {err}", path.display())))?;
                let mut w = BufWriter::new(file);
                result.write_audit_csv(&mut w)?;
                w.flush()?;
            }
            emit(&json!({
                "bound": exact_json(&result.bound),
                "approximate": result.approximate,
                "horizon": result.horizon,
                "removed": result.removed_elements,
                "removed_density": result.removed_density(),
                "kept": result.kept.to_string(),
            }))
        }
        Command::Chain(c) => chain_command(c),
        Command::Quotient(q) => quotient_command(q),
        Command::Repro => {
            if repro::run(&mut io::stdout().lock())? {
                Ok(())
            } else {
                Err(Failure::Usage("some reference examples failed".into()))
            }
        }
    }
}

fn chain_json(chain: &Chain) -> Result<Value, Failure> {
    let values = chains::chain_values(chain)?;
    Ok(json!({
        "elements": chain.elements().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "nu": values.iter().map(exact_json).collect::<Vec<_>>(),
        "evidence": chain.evidence(),
    }))
}

fn map_json(m: &ChainMap) -> Value {
    json!({
        "horizon": m.horizon,
        "approximate": m.approximate,
        "images": m.images.iter().map(|i| json!({
            "source": i.source.to_string(),
            "nu": exact_json(&i.charge),
            "removed": i.removed,
            "added": i.added,
        })).collect::<Vec<_>>(),
        "steps": m.steps.iter().map(|s| json!({
            "index": s.index,
            "below": s.below,
            "bound": exact_json(&s.bound),
            "removed": s.removed,
        })).collect::<Vec<_>>(),
    })
}

fn chain_command(c: ChainCommand) -> Outcome {
    match c {
        ChainCommand::Verify { file, horizon } => {
            let chain = chains::verify_chain(&expr_file(&file)?, horizon.horizon)?;
            emit(&json!({
                "elements": chain.elements().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "evidence": chain.evidence(),
            }))
        }
        ChainCommand::Certify { file, epsilon, horizon } => {
            let chain = chains::verify_chain(&expr_file(&file)?, horizon.horizon)?;
            emit(&chains::uniformity_check(&chain, epsilon, horizon.horizon)?)
        }
        ChainCommand::Dense { file, k, horizon } => {
            let chain = chains::verify_chain(&expr_file(&file)?, horizon.horizon)?;
            emit(&chain_json(&chains::dense_extension(&chain, k)?)?)
        }
        ChainCommand::Skeleton { file, epsilon, horizon } => {
            let chain = chains::verify_chain(&expr_file(&file)?, horizon.horizon)?;
            emit(&chain_json(&chains::skeleton(&chain, rational(&epsilon)?)?)?)
        }
        ChainCommand::Maximal { file, universe } => {
            let chain = chains::verify_chain(&expr_file(&file)?, universe)?;
            let m = chains::maximal_extension(&chain, universe)?;
            emit(&json!({
                "elements": m.chain.elements().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "blocks": m.blocks,
            }))
        }
        ChainCommand::Psi { file, horizon } => emit(&map_json(&nullmod::chain_psi(&expr_file(&file)?, horizon.horizon)?)),
        ChainCommand::Phi { file, horizon } => emit(&map_json(&nullmod::chain_phi(&expr_file(&file)?, horizon.horizon)?)),
        ChainCommand::Disjoint { file, horizon } => {
            let parts = nullmod::disjoint_modify(&expr_file(&file)?, horizon.horizon)?;
            emit(&parts.iter().map(|p| json!({ "kept": p.kept.to_string(), "removed": p.removed })).collect::<Vec<_>>())
        }
        ChainCommand::Distance { a, b, horizon } => {
            let options = EstimateOptions { horizon: horizon.horizon, ..Default::default() };
            emit(&chains::pseudo_metric(&expr(&a)?, &expr(&b)?, &options).map_err(|e| Failure::Chain(e.to_string()))?)
        }
    }
}

fn subsets(value: &Value, what: &str) -> Result<Vec<Element>, Failure> {
    let bad = || Failure::Parse(format!("{what} must be a list of lists of positive integers"));
    value
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|s| {
            let items: Option<Vec<u32>> =
                s.as_array()?.iter().map(|x| x.as_u64().filter(|&x| (1..=32).contains(&x)).map(|x| x as u32)).collect();
            items.map(|items| mask_of(&items))
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(bad)
}

fn json_file(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn check_universe(masks: &[Element], universe: u32) -> Result<(), Failure> {
    match masks.iter().find(|&&m| m >> universe != 0) {
        Some(&m) => Err(Failure::Quotient(format!("subset {:?} lies outside 1..={universe}", subset_of(m)))),
        None => Ok(()),
    }
}

fn quotient_command(q: QuotientCommand) -> Outcome {
    match q {
        QuotientCommand::Check { spec } => {
            let v = json_file(&spec)?;
            let universe = v["universe"]
                .as_u64()
                .and_then(|u| u32::try_from(u).ok())
                .ok_or_else(|| Failure::Parse("`universe` must be a nonnegative integer".into()))?;
            let ideal = subsets(&v["ideal"], "`ideal`")?;
            let alg = quotient::build_algebra(universe)?;
            check_universe(&ideal, universe)?;
            let ideal = Ideal::new(&alg, ideal)?;
            let qt = quotient::build_quotient(&alg, &ideal)?;
            emit(&json!({
                "universe": universe,
                "classes": qt.classes.iter().map(|c| c.iter().map(|&m| subset_of(m)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "quotient_size": qt.algebra.size(),
                "axioms": qt.axioms,
            }))
        }
        QuotientCommand::Closure { universe, seed, generate } => {
            let alg = quotient::build_algebra(universe)?;
            let mut seed = subsets(&json_file(&seed)?, "seed")?;
            check_universe(&seed, universe)?;
            if generate {
                seed = quotient::generated_subalgebra(&alg, &seed)?;
            }
            let m = quotient::monotone_closure(&alg, &seed)?;
            if !m.agrees() {
                return Err(Failure::Quotient("monotone closure differs from the generated subalgebra".into()));
            }
            emit(&m.closure.iter().map(|&e| subset_of(e)).collect::<Vec<_>>())
        }
        QuotientCommand::Equiv { a, b, horizon } => {
            let options = EstimateOptions { horizon: horizon.horizon, ..Default::default() };
            let v = quotient::null_equivalent(&expr(&a)?, &expr(&b)?, &options).map_err(|e| Failure::Quotient(e.to_string()))?;
            emit(&v)?;
            if v.value == quotient::Equivalence::Unknown {
                return Err(Failure::Undecided);
            }
            Ok(())
        }
        QuotientCommand::Reps { file, horizon } => {
            let reps = quotient::disjoint_representatives(&expr_file(&file)?, horizon.horizon)?;
            emit(&reps.iter().map(|e| e.to_string()).collect::<Vec<_>>())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Undecided => {}
                Failure::Usage(m) | Failure::Parse(m) | Failure::NullMod(m) | Failure::Chain(m) | Failure::Quotient(m) => {
                    eprintln!("error: {m}")
                }
            }
            ExitCode::from(f.code())
        }
    }
}
