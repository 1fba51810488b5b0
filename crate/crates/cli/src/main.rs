// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggconvex::acceptance::{run_all, run_criterion, DEFAULT_SEED};
use ggconvex::extreal::format_ln_token;
use ggconvex::gridfn::{
    check_gg_convex, classify_convexities, make_grid_function, ConvexityCheck, GridFunction, LogGrid,
};
use ggconvex::orders::{
    consistency_test, ga_order_leq, geometric_means_equal, order_leq, sign_change_count, single_crossing_ga_cx,
    GaOrder, Order, OrderVerdict, Sign, TestFunction, Witness,
};
use ggconvex::riskmeasures::{avar, entropy_dual_pnorm, orlicz_premium_detailed, p_norm, ORLICZ_TOL};
use ggconvex::transform::{
    duality_transform, gg_biconjugate_detailed, gg_conjugate, mult_inf_convolution, TransformParams,
};
use serde::Serialize;

mod input;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "ggconvex",
    version,
    about = "GG-convex conjugation, risk measures and GA-convex orders"
)]
struct Cli {
    /// Seed for randomised checks; GG_SEED overrides it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FnInput {
    /// Built-in function: exp, identity, power:A:B, indicator:lo:hi[:B],
    /// poly:c0,c1,..., posy:c@b,..., logquad:A:B:c
    #[arg(
        long = "fn",
        value_name = "DESC",
        conflicts_with = "input",
        required_unless_present = "input"
    )]
    desc: Option<String>,
    /// `x,f` CSV file on a log-uniform grid.
    #[arg(long, value_name = "CSV")]
    input: Option<PathBuf>,
    /// Sampling grid for --fn, as lo:hi:n.
    #[arg(long, default_value = "1e-4:1e4:2048")]
    grid: String,
}

impl FnInput {
    fn load(&self) -> Result<GridFunction, CliError> {
        load_function(self.desc.as_deref(), self.input.as_deref(), &self.grid)
    }
}

fn load_function(desc: Option<&str>, path: Option<&Path>, grid: &str) -> Result<GridFunction, CliError> {
    match (desc, path) {
        (Some(d), None) => Ok(make_grid_function(
            &input::parse_descriptor(d)?,
            input::parse_grid(grid)?,
        )?),
        (None, Some(p)) => input::read_grid_csv(p),
        _ => Err(CliError::input("give exactly one of a descriptor and an input file")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    St,
    Cx,
    Icx,
    GaCx,
    GaIcx,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaModeArg {
    GaCx,
    GaIcx,
}

impl From<GaModeArg> for GaOrder {
    fn from(m: GaModeArg) -> Self {
        match m {
            GaModeArg::GaCx => GaOrder::GaCx,
            GaModeArg::GaIcx => GaOrder::GaIcx,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Property {
    Aa,
    Ag,
    Ga,
    Gg,
    Nondecreasing,
}

#[derive(Subcommand)]
enum Command {
    /// GG-conjugate f⋄(y) = sup_x x^{ln y} / f(x), written as CSV.
    Conjugate {
        #[command(flatten)]
        f: FnInput,
        /// Dual grid lo:hi:n; defaults to the input grid.
        #[arg(long)]
        dual_grid: Option<String>,
    },
    /// GG-biconjugate on the input grid.
    Biconjugate {
        #[command(flatten)]
        f: FnInput,
        /// Dual grid size; defaults to the input size.
        #[arg(long)]
        dual_points: Option<usize>,
    },
    /// Multiplicative inf-convolution of two functions on one grid.
    Convolve {
        #[command(flatten)]
        f: FnInput,
        #[arg(
            long = "fn2",
            value_name = "DESC",
            conflicts_with = "input2",
            required_unless_present = "input2"
        )]
        desc2: Option<String>,
        #[arg(long, value_name = "CSV")]
        input2: Option<PathBuf>,
    },
    /// Convexity flags of a sampled function (JSON).
    Classify {
        #[command(flatten)]
        f: FnInput,
        /// Exit with status 2 unless this property holds.
        #[arg(long)]
        require: Option<Property>,
    },
    /// Involutive transform A x^{ln B} f⋄(B x^C).
    Transform {
        #[command(flatten)]
        f: FnInput,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// Orlicz premium of a distribution.
    Premium {
        #[arg(long, value_name = "JSON")]
        dist: PathBuf,
        /// power:P, log-affine, exponential or table:x=v,...
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = ORLICZ_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Average value at risk at level lambda.
    Avar {
        #[arg(long, value_name = "JSON")]
        dist: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Report exp(AV@R(ln X)) instead of AV@R(X).
        #[arg(long)]
        log: bool,
        #[arg(long)]
        json: bool,
    },
    /// Gap between the p-norm and its entropy dual representation (JSON).
    DualGap {
        #[arg(long, value_name = "JSON")]
        dist: PathBuf,
        #[arg(long)]
        p: f64,
        /// Relative tolerance; a larger gap exits with status 2.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Decide F <= G in a stochastic order (JSON); status 2 if it fails.
    Order {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_name = "JSON")]
        f: PathBuf,
        #[arg(long, value_name = "JSON")]
        g: PathBuf,
    },
    /// Sign changes of G - F and the single-crossing criterion (JSON).
    Crossing {
        #[arg(long, value_name = "JSON")]
        f: PathBuf,
        #[arg(long, value_name = "JSON")]
        g: PathBuf,
    },
    /// Check rho(F) <= rho(G) on a GA-ordered pair (JSON); status 2 if violated.
    Consistency {
        /// Risk measure as inline JSON or a JSON file.
        #[arg(long)]
        spec: String,
        #[arg(long, value_name = "JSON")]
        f: PathBuf,
        #[arg(long, value_name = "JSON")]
        g: PathBuf,
        #[arg(long, value_enum, default_value = "ga-cx")]
        mode: GaModeArg,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u8>,
        /// Deterministic JSON report (no timings).
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<ggconvex::Error> for CliError {
    fn from(e: ggconvex::Error) -> Self {
        CliError(e.to_string())
    }
}

/// Success or a refuted check; the report is written either way.
enum Status {
    Ok,
    Refuted,
}

impl Status {
    fn from_holds(holds: bool) -> Self {
        if holds {
            Status::Ok
        } else {
            Status::Refuted
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::input(format!("stdout: {e}")))
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn grid_label(g: &LogGrid) -> String {
    format!("{}:{}:{}", g.x_min(), g.x_max(), g.len())
}

/// `x,f` table with a comment header recording the tool version and grid.
fn grid_csv(command: &str, f: &GridFunction) -> String {
    let g = f.grid();
    let mut s = format!("# ggconvex {VERSION} {command} grid={}\nx,f\n", grid_label(g));
    for (i, lf) in f.log_values().iter().enumerate() {
        s.push_str(&format!("{},{}\n", g.x(i), format_ln_token(*lf)));
    }
    s
}

fn resolve_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("GG_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("GG_SEED: `{v}` is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

#[derive(Serialize)]
struct ViolationJson {
    test: &'static str,
    /// Threshold of the test function, on the log scale for GA orders.
    t: f64,
    lhs: f64,
    rhs: f64,
}

#[derive(Serialize)]
struct OrderReport {
    mode: &'static str,
    holds: bool,
    /// Points at which the defining inequalities were verified.
    #[serde(skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<ViolationJson>,
}

fn test_name(t: TestFunction) -> &'static str {
    match t {
        TestFunction::Survival => "survival",
        TestFunction::UpperHinge => "upper-hinge",
        TestFunction::LowerHinge => "lower-hinge",
    }
}

fn order_report(mode: &'static str, v: &OrderVerdict) -> OrderReport {
    let (knots, counterexample) = match &v.witness {
        Witness::Knots(k) => (Some(k.clone()), None),
        Witness::Violation(w) => (
            None,
            Some(ViolationJson {
                test: test_name(w.test),
                t: w.t,
                lhs: w.lhs,
                rhs: w.rhs,
            }),
        ),
    };
    OrderReport {
        mode,
        holds: v.holds,
        knots,
        counterexample,
    }
}

#[derive(Serialize)]
struct Triple {
    x: [f64; 3],
    indices: [usize; 3],
}

#[derive(Serialize)]
struct ClassifyReport {
    aa: bool,
    ag: bool,
    ga: bool,
    gg: bool,
    nondecreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    required: Option<Property>,
    /// First grid triple violating GG-convexity.
    #[serde(skip_serializing_if = "Option::is_none")]
    gg_counterexample: Option<Triple>,
}

#[derive(Serialize)]
struct PremiumReport {
    phi: String,
    value: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct DualGapReport {
    p: f64,
    p_norm: f64,
    dual_value: f64,
    gap: f64,
    tol: f64,
    within_tol: bool,
    entropy: f64,
    density: Vec<f64>,
}

#[derive(Serialize)]
struct CrossingReport {
    sign_changes: usize,
    signs: Vec<&'static str>,
    geometric_means_equal: bool,
    applicable: bool,
    implied: bool,
    ga_cx_holds: bool,
}

#[derive(Serialize)]
struct ConsistencyJson {
    mode: &'static str,
    ordered: bool,
    rho_f: f64,
    rho_g: f64,
    consistent: bool,
    states: usize,
}

#[derive(Serialize)]
struct CriterionJson {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct SelftestReport {
    seed: u64,
    passed: usize,
    total: usize,
    criteria: Vec<CriterionJson>,
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Conjugate { f, dual_grid } => {
            let f = f.load()?;
            let dual = match dual_grid {
                Some(s) => input::parse_grid(&s)?,
                None => *f.grid(),
            };
            emit(out, &grid_csv("conjugate", &gg_conjugate(&f, &dual)?))?;
            Ok(Status::Ok)
        }
        Command::Biconjugate { f, dual_points } => {
            let f = f.load()?;
            let b = gg_biconjugate_detailed(&f, dual_points.unwrap_or(f.len()))?;
            emit(out, &grid_csv("biconjugate", &b.function))?;
            Ok(Status::Ok)
        }
        Command::Convolve { f, desc2, input2 } => {
            let h = load_function(desc2.as_deref(), input2.as_deref(), &f.grid)?;
            let f = f.load()?;
            emit(out, &grid_csv("convolve", &mult_inf_convolution(&f, &h)?))?;
            Ok(Status::Ok)
        }
        Command::Classify { f, require } => {
            let f = f.load()?;
            let flags = classify_convexities(&f);
            let gg_counterexample = match check_gg_convex(&f) {
                ConvexityCheck::Holds => None,
                ConvexityCheck::Violated { i, j } => {
                    let g = f.grid();
                    let m = (i + j) / 2;
                    Some(Triple {
                        x: [g.x(i), g.x(m), g.x(j)],
                        indices: [i, m, j],
                    })
                }
            };
            let holds = match require {
                None => true,
                Some(Property::Aa) => flags.aa,
                Some(Property::Ag) => flags.ag,
                Some(Property::Ga) => flags.ga,
                Some(Property::Gg) => flags.gg,
                Some(Property::Nondecreasing) => flags.nondecreasing,
            };
            let report = ClassifyReport {
                aa: flags.aa,
                ag: flags.ag,
                ga: flags.ga,
                gg: flags.gg,
                nondecreasing: flags.nondecreasing,
                required: require,
                gg_counterexample,
            };
            emit(out, &json(&report))?;
            Ok(Status::from_holds(holds))
        }
        Command::Transform { f, a, b, c } => {
            let f = f.load()?;
            let t = duality_transform(&f, &TransformParams::new(a, b, c)?)?;
            emit(out, &grid_csv("transform", &t))?;
            Ok(Status::Ok)
        }
        Command::Premium {
            dist,
            phi,
            tol,
            json: as_json,
        } => {
            let (p, x) = input::read_law(&dist)?.space()?;
            let spec = input::parse_phi(&phi)?;
            let r = orlicz_premium_detailed(&x, &p, &spec, tol)?;
            let text = if as_json {
                json(&PremiumReport {
                    phi,
                    value: r.value,
                    iterations: r.iterations,
                })
            } else {
                format!("{}\n", r.value)
            };
            emit(out, &text)?;
            Ok(Status::Ok)
        }
        Command::Avar {
            dist,
            lambda,
            log,
            json: as_json,
        } => {
            let (p, x) = input::read_law(&dist)?.space()?;
            let value = if log {
                avar(&x.ln_values(), &p, lambda)?.exp()
            } else {
                avar(x.values(), &p, lambda)?
            };
            let text = if as_json {
                json(&serde_json::json!({ "lambda": lambda, "log": log, "value": value }))
            } else {
                format!("{value}\n")
            };
            emit(out, &text)?;
            Ok(Status::Ok)
        }
        Command::DualGap { dist, p: q, tol } => {
            let (p, x) = input::read_law(&dist)?.space()?;
            let norm = p_norm(&x, &p, q)?;
            let dual = entropy_dual_pnorm(&x, &p, q)?;
            let gap = norm - dual.value;
            let within_tol = gap.abs() <= tol * norm.abs().max(1.0);
            let report = DualGapReport {
                p: q,
                p_norm: norm,
                dual_value: dual.value,
                gap,
                tol,
                within_tol,
                entropy: dual.entropy,
                density: dual.density,
            };
            emit(out, &json(&report))?;
            Ok(Status::from_holds(within_tol))
        }
        Command::Order { mode, f, g } => {
            let f = input::read_law(&f)?.distribution()?;
            let g = input::read_law(&g)?.distribution()?;
            let (name, v) = match mode {
                ModeArg::St => ("st", order_leq(&f, &g, Order::St)),
                ModeArg::Cx => ("cx", order_leq(&f, &g, Order::Cx)),
                ModeArg::Icx => ("icx", order_leq(&f, &g, Order::Icx)),
                ModeArg::GaCx => ("ga-cx", ga_order_leq(&f, &g, GaOrder::GaCx)?),
                ModeArg::GaIcx => ("ga-icx", ga_order_leq(&f, &g, GaOrder::GaIcx)?),
            };
            emit(out, &json(&order_report(name, &v)))?;
            Ok(Status::from_holds(v.holds))
        }
        Command::Crossing { f, g } => {
            let f = input::read_law(&f)?.distribution()?;
            let g = input::read_law(&g)?.distribution()?;
            let changes = sign_change_count(&f.log()?, &g.log()?);
            let sc = single_crossing_ga_cx(&f, &g)?;
            let report = CrossingReport {
                sign_changes: changes.count,
                signs: changes
                    .signs
                    .iter()
                    .map(|s| match s {
                        Sign::Plus => "+",
                        Sign::Minus => "-",
                    })
                    .collect(),
                geometric_means_equal: geometric_means_equal(&f, &g)?,
                applicable: sc.applicable,
                implied: sc.implied,
                ga_cx_holds: sc.verdict.holds,
            };
            emit(out, &json(&report))?;
            // Applicable criterion with a failing direct check would refute it.
            Ok(Status::from_holds(!sc.applicable || sc.verdict.holds))
        }
        Command::Consistency { spec, f, g, mode } => {
            let spec = input::parse_spec(&spec)?;
            let f = input::read_law(&f)?.distribution()?;
            let g = input::read_law(&g)?.distribution()?;
            let r = consistency_test(&spec, &f, &g, mode.into())?;
            let report = ConsistencyJson {
                mode: match mode {
                    GaModeArg::GaCx => "ga-cx",
                    GaModeArg::GaIcx => "ga-icx",
                },
                ordered: r.ordered,
                rho_f: r.rho_f.to_f64(),
                rho_g: r.rho_g.to_f64(),
                consistent: r.consistent,
                states: r.states,
            };
            emit(out, &json(&report))?;
            Ok(Status::from_holds(r.consistent))
        }
        Command::Selftest {
            criterion,
            json: as_json,
        } => {
            let seed = resolve_seed(cli.seed)?;
            let results = match criterion {
                Some(id @ 1..=9) => vec![run_criterion(id, seed)],
                Some(id) => return Err(CliError::input(format!("--criterion: {id} is not in 1..=9"))),
                None => run_all(seed),
            };
            let passed = results.iter().filter(|r| r.passed).count();
            let text = if as_json {
                json(&SelftestReport {
                    seed,
                    passed,
                    total: results.len(),
                    criteria: results
                        .iter()
                        .map(|r| CriterionJson {
                            id: r.id,
                            name: r.name,
                            passed: r.passed,
                            detail: r.detail.clone(),
                        })
                        .collect(),
                })
            } else {
                let mut s: String = results.iter().map(|r| r.line() + "\n").collect();
                s.push_str(&format!(
                    "{passed} of {} criteria passed (seed {seed})\n",
                    results.len()
                ));
                s
            };
            emit(out, &text)?;
            Ok(Status::from_holds(passed == results.len()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Refuted) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
