//! `vinocount` command line.
//!
//! Exit status: 0 ok, 2 invalid configuration, 3 budget refusal,
//! 4 verification failure.

mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vinocount::engine::{
    brute_force_j, count_h_restricted, count_h_with_budget, count_j_restricted,
    count_j_with_budget, weighted_phi, Budget,
};
use vinocount::exponents::{fit_exponent, geometric_radii, predicted_exponents, scan, tsets_report, ScanResult};
use vinocount::expsum::{verify_h_via_dft, verify_j_via_dft, GridSpec, WeightSequence};
use vinocount::model::parse_int_list;
use vinocount::shift::verify_lemma;
use vinocount::{Error, IntSet, RhsVector, ShiftPolynomialFamily, SystemShape};

use output::{CountRecord, Emitter, Format, PolyRecord};

#[derive(Parser, Debug)]
#[command(name = "vinocount", version, about = "Exact counts for inhomogeneous Vinogradov systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed for sampled suites and random weights.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Cap on enumerated tuples, table keys and grid points.
    #[arg(long, global = true, env = "VINOCOUNT_BUDGET")]
    budget: Option<u128>,

    /// Include wall time in count records.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Debug, Clone)]
struct BoxArgs {
    #[arg(long)]
    s: u32,
    #[arg(long)]
    k: u32,
    #[arg(long = "X")]
    x: u64,
    /// Right-hand side, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Convolution,
    BruteForce,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Identity {
    J,
    H,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// J_{s,k}(X;a).
    Count {
        #[command(flatten)]
        args: BoxArgs,
        #[arg(long, value_enum, default_value_t = CountMethod::Convolution)]
        method: CountMethod,
    },
    /// H_{s,k}(X;a), the shifted count.
    CountH {
        #[command(flatten)]
        args: BoxArgs,
    },
    /// Counts with variables in a set, e.g. `[-3..3]` or `{0,1,5}`.
    CountSet {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        xset: String,
        /// Shift set; switches to the shifted count.
        #[arg(long, allow_hyphen_values = true)]
        hset: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Also report the set bound and count/bound (needs --hset).
        #[arg(long, requires = "hset")]
        bound: bool,
    },
    /// Weighted moment at n with nonnegative weights on [-X, X].
    Phi {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long = "X")]
        x: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        /// 2X+1 weights for -X..X; seeded uniform [0,1) weights if absent.
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
    },
    /// Shifting polynomial family of a.
    Poly {
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Closed-form exponents for (s, k, ell).
    Exponents {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, conflicts_with = "a")]
        ell: Option<u32>,
        /// Take ell from this right-hand side.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
    /// Checks H >= (2X+1)·J.
    VerifyLemma {
        #[command(flatten)]
        args: BoxArgs,
    },
    /// Recovers J or H by quadrature on a finite torus grid.
    VerifyDft {
        #[arg(long, value_enum)]
        identity: Identity,
        #[command(flatten)]
        args: BoxArgs,
        /// Grid moduli M_1..M_k (default: smallest exact grid).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Exact counts over a list of radii.
    Scan {
        #[command(flatten)]
        args: ScanArgs,
    },
    /// Log-log slope of a scan.
    Fit {
        /// Scan CSV produced by `scan --format csv`.
        #[arg(long, conflicts_with_all = ["s", "k", "a", "xs", "x0"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        args: OptScanArgs,
    },
    /// Exhaustive invariant grid plus seeded samples.
    Selftest {
        /// Largest box radius in the exhaustive grid.
        #[arg(long, default_value_t = 2)]
        max_x: u64,
        /// Random right-hand sides for the degree law.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    #[arg(long)]
    s: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Radii, comma separated.
    #[arg(long, conflicts_with = "x0")]
    xs: Option<String>,
    /// First radius of a doubling sequence.
    #[arg(long, requires = "steps")]
    x0: Option<u64>,
    #[arg(long)]
    steps: Option<u32>,
}

#[derive(Args, Debug, Clone)]
struct OptScanArgs {
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, conflicts_with = "x0")]
    xs: Option<String>,
    #[arg(long, requires = "steps")]
    x0: Option<u64>,
    #[arg(long)]
    steps: Option<u32>,
}

/// Failure with its exit status.
#[derive(Debug)]
enum Failure {
    Config(String),
    Budget(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Budget(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => Failure::Budget(e.to_string()),
            Error::Invariant(_) => Failure::Verification(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn parse_rhs(text: &str, k: u32) -> Result<RhsVector, Failure> {
    parse_vector("--a", text, k)
}

fn parse_vector(flag: &str, text: &str, k: u32) -> Result<RhsVector, Failure> {
    let a: RhsVector = text.parse().map_err(|e: Error| config(format!("{flag}: {e}")))?;
    if a.k() != k {
        return Err(config(format!("{flag} has {} entries, expected k = {k}", a.k())));
    }
    Ok(a)
}

fn parse_set(flag: &str, text: &str) -> Result<IntSet, Failure> {
    let set: IntSet = text.parse().map_err(|e: Error| config(format!("{flag}: {e}")))?;
    if set.is_empty() {
        return Err(config(format!("{flag} is empty")));
    }
    Ok(set)
}

fn parse_radii(xs: Option<&str>, x0: Option<u64>, steps: Option<u32>) -> Result<Vec<u64>, Failure> {
    let radii = match (xs, x0) {
        (Some(list), _) => parse_int_list(list)
            .map_err(|e| config(format!("--xs: {e}")))?
            .into_iter()
            .map(|x| u64::try_from(x).map_err(|_| config("--xs entries must be positive")))
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(x0)) => geometric_radii(x0, steps.unwrap_or(0)),
        (None, None) => return Err(config("give --xs or --x0 with --steps")),
    };
    if radii.is_empty() || radii.contains(&0) {
        return Err(config("radii must be a nonempty list of positive integers"));
    }
    Ok(radii)
}

fn box_shape(args: &BoxArgs) -> Result<(SystemShape, RhsVector), Failure> {
    let shape = SystemShape::new(args.s, args.k, args.x)?;
    let a = parse_rhs(&args.a, args.k)?;
    Ok((shape, a))
}

fn run_scan(s: u32, k: u32, a: &str, radii: &[u64], budget: &Budget) -> Result<ScanResult, Failure> {
    if s == 0 || k == 0 {
        return Err(config("need s, k >= 1"));
    }
    let a = parse_rhs(a, k)?;
    Ok(scan(s, k, &a, radii, budget)?)
}

fn run(cli: Cli, out: &mut Emitter) -> Outcome {
    let budget = match cli.budget {
        Some(n) => Budget {
            enumeration: n,
            grid_points: n,
            table_keys: n,
        },
        None => Budget::default(),
    };
    let timing = cli.timing;
    match cli.command {
        Command::Count { args, method } => {
            let (shape, a) = box_shape(&args)?;
            let result = match method {
                CountMethod::Convolution => count_j_with_budget(shape, &a, &budget)?,
                CountMethod::BruteForce => brute_force_j(shape, &a, &budget)?,
            };
            out.count(&CountRecord::from_result(&result, timing))
        }
        Command::CountH { args } => {
            let (shape, a) = box_shape(&args)?;
            let result = count_h_with_budget(shape, &a, &budget)?;
            out.count(&CountRecord::from_result(&result, timing))
        }
        Command::CountSet { s, k, xset, hset, a, bound } => {
            let x_set = parse_set("--xset", &xset)?;
            let a = parse_rhs(&a, k)?;
            let result = match &hset {
                Some(h) => count_h_restricted(&x_set, &parse_set("--hset", h)?, s, k, &a, &budget)?,
                None => count_j_restricted(&x_set, s, k, &a, &budget)?,
            };
            let mut record = CountRecord::from_result(&result, timing);
            if bound {
                let h_set = parse_set("--hset", hset.as_deref().unwrap_or_default())?;
                record.with_bound(tsets_report(&x_set, &h_set, s, k, &a, &budget)?);
            }
            out.count(&record)
        }
        Command::Phi { s, k, x, n, weights } => {
            let n = parse_vector("--n", &n, k)?;
            let values = match weights {
                Some(list) => {
                    let text = list.trim_matches(|c| c == '[' || c == ']');
                    text.split(',')
                        .map(|w| w.trim().parse::<f64>().map_err(|_| config(format!("bad weight {w:?}"))))
                        .collect::<Result<Vec<_>, _>>()?
                }
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    (0..2 * x + 1).map(|_| rng.gen::<f64>()).collect()
                }
            };
            if values.len() as u64 != 2 * x + 1 {
                return Err(config(format!("need 2X+1 = {} weights, got {}", 2 * x + 1, values.len())));
            }
            let ws = WeightSequence::from_reals(x, values)?;
            let start = std::time::Instant::now();
            let value = weighted_phi(&ws, s, k, &n, &budget)?;
            out.count(&CountRecord::phi(s, k, x, &n, value, timing.then(|| start.elapsed())))
        }
        Command::Poly { k, a } => {
            let a = parse_rhs(&a, k)?;
            let family = ShiftPolynomialFamily::new(&a)?;
            out.poly(&PolyRecord::new(&family))
        }
        Command::Exponents { s, k, ell, a } => {
            let ell = match (ell, a) {
                (Some(l), _) => Some(l),
                (None, Some(a)) => Some(parse_rhs(&a, k)?.ell().ok_or(Error::ZeroRhs)?),
                (None, None) => None,
            };
            out.json_or_text(&predicted_exponents(s, k, ell)?)
        }
        Command::VerifyLemma { args } => {
            let (shape, a) = box_shape(&args)?;
            let report = verify_lemma(shape, &a, &budget)?;
            out.json_or_text(&report)?;
            if !report.holds {
                return Err(Failure::Verification(format!("H < (2X+1)·J for a = {a}")));
            }
            Ok(())
        }
        Command::VerifyDft { identity, args, grid } => {
            let (shape, a) = box_shape(&args)?;
            let grid = grid
                .map(|g| -> Result<GridSpec, Failure> {
                    let m = parse_int_list(&g).map_err(|e| config(format!("--grid: {e}")))?;
                    let m = m
                        .into_iter()
                        .map(|v| u64::try_from(v).map_err(|_| config("--grid moduli must be positive")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(GridSpec::new(m)?)
                })
                .transpose()?;
            let report = match identity {
                Identity::J => verify_j_via_dft(shape, &a, grid, &budget)?,
                Identity::H => verify_h_via_dft(shape, &a, grid, &budget)?,
            };
            out.json_or_text(&report)?;
            if !report.pass {
                return Err(Failure::Verification(format!(
                    "{}: |{} - {}| = {:e} out of tolerance",
                    report.identity, report.quadrature, report.exact, report.abs_error
                )));
            }
            Ok(())
        }
        Command::Scan { args } => {
            let radii = parse_radii(args.xs.as_deref(), args.x0, args.steps)?;
            let result = run_scan(args.s, args.k, &args.a, &radii, &budget)?;
            out.scan(&result)
        }
        Command::Fit { input, args } => {
            let points = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| config(format!("{}: {e}", path.display())))?;
                    ScanResult::points_from_csv(&text)?
                }
                None => {
                    let (Some(s), Some(k), Some(a)) = (args.s, args.k, args.a.as_deref()) else {
                        return Err(config("give --input or --s, --k, --a and radii"));
                    };
                    let radii = parse_radii(args.xs.as_deref(), args.x0, args.steps)?;
                    run_scan(s, k, a, &radii, &budget)?.points
                }
            };
            out.json_or_text(&fit_exponent(&points)?)
        }
        Command::Selftest { max_x, samples } => {
            if max_x == 0 {
                return Err(config("--max-x must be positive"));
            }
            let report = selftest::run(max_x, samples, cli.seed, &budget)?;
            out.json_or_text(&report)?;
            if !report.pass {
                return Err(Failure::Verification("selftest found violations".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Emitter::new(cli.format);
    let path = cli.output.clone();
    let result = run(cli, &mut out).and_then(|()| out.finish(path.as_deref()).map_err(config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            // Reports produced before a verification failure are still written.
            if matches!(f, Failure::Verification(_)) {
                let _ = out.finish(path.as_deref());
            }
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
