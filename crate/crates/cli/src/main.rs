//! `joinery`: batch front end that loads systems, couplings and observables from JSON files
//! and prints JSON reports.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails (a report is still printed),
//! 2 on input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use joinery_core::averages::{
    average_report, exact_limit_average_capped, limit_equals_projected, multiple_sequence, vdc_exact, vdc_quantities,
};
use joinery_core::coupling::{Coupling, ProductWord};
use joinery_core::error::Error as CoreError;
use joinery_core::io::{
    average_to_json, coupling_to_json, falsifier_to_json, observable_to_json, parse_coupling_unchecked,
    parse_observables, parse_partition, parse_system, partition_to_json, scalar_to_json, system_to_json,
    vdc_exact_to_json, vdc_to_json,
};
use joinery_core::joinings::{
    furstenberg_self_joining_capped, rel_indep_self_joining, satedness_falsifier, FalsifierOptions, PeriodRoute,
    DEFAULT_LP_BOUND, DEFAULT_PERIOD_CAP,
};
use joinery_core::observable::Observable;
use joinery_core::partition::{factor_quotient, is_c_system, isotropy_partition, largest_c_factor, Partition};
use joinery_core::rational::format_fraction;
use joinery_core::system::FiniteSystem;
use joinery_torus::{
    annexb_experiment, decay_constant, torus_multiple_average, weyl_sum, AnnexBConfig, AnnexBReport,
    Error as TorusError, FourierObservable, TorusSystem,
};

#[derive(Parser)]
#[command(name = "joinery", version, about = "Exact joinings and multiple ergodic averages on finite systems")]
struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Largest common period evaluated directly; larger systems fall back to per-point periods.
    #[arg(long, global = true, env = "JOINERY_PERIOD_CAP", default_value_t = DEFAULT_PERIOD_CAP)]
    period_cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a system file: total mass 1, weights preserved, maps commute.
    SystemCheck { path: PathBuf },
    /// Factors of a system.
    Factor {
        path: PathBuf,
        #[command(subcommand)]
        op: FactorOp,
    },
    /// Joinings and couplings.
    Joining {
        #[command(subcommand)]
        op: JoiningOp,
    },
    /// Multiple ergodic averages of a system against an observables file.
    Average(AverageArgs),
    /// Floating-point experiments on torus rotations.
    Torus {
        #[command(subcommand)]
        op: TorusOp,
    },
}

#[derive(Subcommand)]
enum FactorOp {
    /// Invariant partition of the word `T_1^{e_1} … T_d^{e_d}`.
    Isotropy {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        word: Vec<i64>,
    },
    /// Largest C-factor, the join of the isotropy factors of `T_i T_j^{-1}`.
    LargestC,
    /// Quotient by an invariant partition.
    Quotient {
        #[arg(long)]
        labels: PathBuf,
    },
}

#[derive(Subcommand)]
enum JoiningOp {
    /// Furstenberg self-joining, evaluated exactly over one period.
    Furstenberg { path: PathBuf },
    /// Relatively independent self-joining over a factor given by labels or an isotropy word.
    Relindep {
        path: PathBuf,
        #[arg(long, conflicts_with = "word", required_unless_present = "word")]
        labels: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        word: Option<Vec<i64>>,
    },
    /// Marginals and equivariances of a coupling file.
    Check {
        path: PathBuf,
        /// Extra product word, slots separated by `;` and exponents by `,` (e.g. `1,0;0,1`).
        #[arg(long, allow_hyphen_values = true)]
        word: Vec<String>,
    },
    /// Search joinings of `x` with the C-system `y` for a failure of relative independence.
    Falsify {
        x: PathBuf,
        y: PathBuf,
        /// Largest product space for which the LP is built.
        #[arg(long, env = "JOINERY_LP_BOUND", default_value_t = DEFAULT_LP_BOUND)]
        bound: usize,
        /// Examine every basis pair instead of stopping at the first witness.
        #[arg(long)]
        all_pairs: bool,
    },
}

#[derive(Args)]
struct AverageArgs {
    path: PathBuf,
    functions: PathBuf,
    /// Report `A_N` for this `N`.
    #[arg(long, required_unless_present_any = ["exact_limit", "vdc"])]
    n: Option<u64>,
    /// Report the exact limit and cross-check `A_P = Ā`.
    #[arg(long, conflicts_with = "vdc")]
    exact_limit: bool,
    /// Report the Van der Corput quantities for `u_n = Π f_i ∘ T_i^n`; needs `--n` and `--h`.
    #[arg(long, requires_all = ["n", "h"])]
    vdc: bool,
    #[arg(long)]
    h: Option<usize>,
}

#[derive(Subcommand)]
enum TorusOp {
    /// Factor of a C-system that is not a C-system: exact frequency checks and Weyl decay.
    Annexb {
        #[arg(long, default_value_t = joinery_torus::golden_alpha(), allow_hyphen_values = true)]
        alpha: f64,
        /// Largest `N` available to the Weyl checks.
        #[arg(long, default_value_t = 10_000_000)]
        n: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Highest frequency checked on the `2x` factor.
        #[arg(long, default_value_t = 8)]
        k: i64,
    },
    /// Grid evaluation of `A_N` for characters `e^{2πi⟨m_i, z⟩}`, one `--freq` per `--rotation`.
    Average {
        #[arg(long, required = true, allow_hyphen_values = true)]
        rotation: Vec<String>,
        #[arg(long, required = true, allow_hyphen_values = true)]
        freq: Vec<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 64)]
        q: usize,
    },
    /// `|(1/N) Σ_{n=1}^N e^{2πin⟨m, β⟩}|` with its geometric bound.
    Weyl {
        #[arg(long, allow_hyphen_values = true)]
        freq: String,
        #[arg(long, allow_hyphen_values = true)]
        rotation: String,
        #[arg(long)]
        n: u64,
    },
}

/// Why a command did not report success.
enum Failure {
    /// Exit 2 with a message on stderr.
    Input(String),
    /// Exit 1 with a report on stdout.
    Property(Value),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonInvariantPartition { .. }
            | CoreError::NotEquivariant { .. }
            | CoreError::PushforwardMismatch
            | CoreError::MarginalMismatch { .. } => Failure::Property(json!({"holds": false, "error": e.to_string()})),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<TorusError> for Failure {
    fn from(e: TorusError) -> Self {
        match e {
            TorusError::Resonance { .. } | TorusError::BoundViolated { .. } => {
                Failure::Property(json!({"holds": false, "error": e.to_string()}))
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Report plus whether the checked property holds.
struct Outcome {
    report: Value,
    holds: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, holds: true }
    }
}

type CmdResult = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Parses and validates a system file.
fn load_system(path: &Path) -> Result<FiniteSystem, Failure> {
    let sys = parse_system(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = sys.validate();
    if let Some(v) = report.violations.first() {
        return Err(Failure::Input(format!("{}: invalid system: {v:?}", path.display())));
    }
    Ok(sys)
}

fn route_json(route: PeriodRoute) -> Value {
    match route {
        PeriodRoute::Global(p) => json!({"global": p.to_string()}),
        PeriodRoute::PerPoint { max_period } => json!({"per_point": max_period.to_string()}),
    }
}

fn system_check(path: &Path) -> CmdResult {
    let sys = parse_system(&read(path)?).map_err(|e| Failure::Input(e.to_string()))?;
    let report = sys.validate();
    let holds = report.passes();
    Ok(Outcome {
        report: json!({
            "passes": holds,
            "violations": serde_json::to_value(&report.violations).expect("violations serialize"),
            "n": sys.len(),
            "rank": sys.rank(),
            "period": sys.period().map(|p| p.to_string()),
        }),
        holds,
    })
}

fn factor(path: &Path, op: &FactorOp) -> CmdResult {
    let sys = load_system(path)?;
    match op {
        FactorOp::Isotropy { word } => {
            let p = isotropy_partition(&sys, word)?;
            Ok(Outcome::ok(with_blocks(&p)))
        }
        FactorOp::LargestC => {
            let p = largest_c_factor(&sys)?;
            let mut report = with_blocks(&p);
            report["is_c_system"] = json!(is_c_system(&sys)?);
            Ok(Outcome::ok(report))
        }
        FactorOp::Quotient { labels } => {
            let p = parse_partition(&read(labels)?, &sys).map_err(|e| Failure::Input(e.to_string()))?;
            if let Some((block, map)) = p.invariance_violation(&sys) {
                return Ok(Outcome {
                    report: json!({"invariant": false, "witness": {"block": block, "map": map}}),
                    holds: false,
                });
            }
            let (quotient, fmap) = factor_quotient(&sys, &p)?;
            Ok(Outcome::ok(json!({
                "invariant": true,
                "quotient": system_to_json(&quotient),
                "assignment": fmap.assignment(),
            })))
        }
    }
}

fn with_blocks(p: &Partition) -> Value {
    let mut v = partition_to_json(p);
    v["blocks"] = json!(p.num_blocks());
    v
}

/// Splits `"1,0;0,1"` into one exponent vector per slot.
fn parse_word(text: &str) -> Result<ProductWord, Failure> {
    text.split(';')
        .map(|slot| {
            slot.split(',')
                .map(|e| e.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Input(format!("bad word {text:?}: {e}")))
        })
        .collect()
}

fn coupling_checks(c: &Coupling, words: &[ProductWord]) -> Result<(Value, bool), Failure> {
    let marginals = c.marginals_match();
    let mut holds = marginals;
    let mut checks = Vec::new();
    for w in words {
        let check = c.check_equivariance(w)?;
        holds &= check.holds;
        checks.push(json!({
            "word": w,
            "holds": check.holds,
            "witness": check.witness,
            "max_discrepancy": format_fraction(&check.max_discrepancy),
        }));
    }
    Ok((json!({"marginals_match": marginals, "equivariance": checks}), holds))
}

fn joining(op: &JoiningOp, cap: u64) -> CmdResult {
    match op {
        JoiningOp::Furstenberg { path } => {
            let x = load_system(path)?;
            let (lam, route) = furstenberg_self_joining_capped(&x, cap)?;
            let (checks, holds) = coupling_checks(&lam, lam.equivariances())?;
            Ok(Outcome {
                report: json!({"route": route_json(route), "coupling": coupling_to_json(&lam), "checks": checks}),
                holds,
            })
        }
        JoiningOp::Relindep { path, labels, word } => {
            let x = load_system(path)?;
            let p = match (labels, word) {
                (Some(l), _) => parse_partition(&read(l)?, &x).map_err(|e| Failure::Input(e.to_string()))?,
                (None, Some(w)) => isotropy_partition(&x, w)?,
                (None, None) => return Err(Failure::Input("give --labels or --word".into())),
            };
            let lam = rel_indep_self_joining(&x, &p)?;
            let (checks, holds) = coupling_checks(&lam, lam.equivariances())?;
            Ok(Outcome {
                report: json!({"factor": partition_to_json(&p), "coupling": coupling_to_json(&lam), "checks": checks}),
                holds,
            })
        }
        JoiningOp::Check { path, word } => {
            let text = read(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let resolve = |r: &str| {
                let p = base.join(r);
                let text = std::fs::read_to_string(&p).map_err(|e| CoreError::Parse(format!("{}: {e}", p.display())))?;
                parse_system(&text)
            };
            let c = parse_coupling_unchecked(&text, resolve).map_err(|e| Failure::Input(e.to_string()))?;
            let mut words = c.equivariances().to_vec();
            for w in word {
                words.push(parse_word(w)?);
            }
            let (checks, holds) = coupling_checks(&c, &words)?;
            let mut report = checks;
            report["holds"] = json!(holds);
            Ok(Outcome { report, holds })
        }
        JoiningOp::Falsify { x, y, bound, all_pairs } => {
            let xs = load_system(x)?;
            let ys = load_system(y)?;
            let opts = FalsifierOptions {
                bound: *bound,
                stop_at_first: !all_pairs,
            };
            let r = satedness_falsifier(&xs, &ys, &opts)?;
            let sated = r.witness.is_none();
            let mut report = falsifier_to_json(&r);
            report["sated_against_y"] = json!(sated);
            Ok(Outcome { report, holds: sated })
        }
    }
}

fn average(args: &AverageArgs, cap: u64) -> CmdResult {
    let x = load_system(&args.path)?;
    let fs = parse_observables(&read(&args.functions)?).map_err(|e| Failure::Input(e.to_string()))?;
    if args.vdc {
        let (n, h) = (args.n.expect("required by clap") as usize, args.h.expect("required by clap"));
        let us = multiple_sequence(&x, &fs, n + h)?;
        let exact = vdc_exact(&x, &us, n, h)?;
        let weights: Vec<f64> = x.weights().iter().map(joinery_core::rational::to_f64).collect();
        let float: Vec<_> = us.iter().map(Observable::to_float).collect();
        let approx = vdc_quantities(&float, Some(&weights), n, h)?;
        let holds = exact.holds && approx.holds;
        let mut report = vdc_to_json(&approx);
        report["exact"] = vdc_exact_to_json(&exact);
        report["N"] = json!(n);
        report["H"] = json!(h);
        report["holds"] = json!(holds);
        return Ok(Outcome { report, holds });
    }
    if args.exact_limit {
        let (limit, route) = exact_limit_average_capped(&x, &fs, cap)?;
        let mut report = json!({"route": route_json(route), "A_limit": observable_to_json(&limit)});
        let mut holds = true;
        if let PeriodRoute::Global(p) = route {
            let r = average_report(&x, &fs, p, cap)?;
            let equal = r.discrepancy_sq.is_zero();
            holds &= equal;
            report["P"] = json!(p.to_string());
            report["A_P_equals_limit"] = json!(equal);
        }
        if is_c_system(&x)? {
            let check = limit_equals_projected(&x, &fs)?;
            report["projected_limit_equal"] = json!(check.holds);
            report["projection_discrepancy_sq"] = scalar_to_json(&check.discrepancy_sq);
            holds &= check.holds;
        }
        return Ok(Outcome { report, holds });
    }
    let n = args.n.expect("required by clap");
    Ok(Outcome::ok(average_to_json(&average_report(&x, &fs, n, cap)?)))
}

fn parse_vec<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| Failure::Input(format!("bad vector {text:?}: {e}"))))
        .collect()
}

fn annexb_json(r: &AnnexBReport) -> Value {
    let tag = |ok: bool| if ok { "exact" } else { "failed" };
    json!({
        "alpha": r.alpha,
        "n_max": r.n_max,
        "tol": r.tol,
        "checks": {
            "invariance_2x_minus_y": tag(r.invariance_2x_minus_y),
            "y_action_equality": tag(r.y_action_equality),
            "factor_in_c": r.factor_in_c,
            "weyl": serde_json::to_value(&r.weyl).expect("weyl checks serialize"),
        },
        "passed": r.passed,
        "verdict": r.verdict,
    })
}

fn torus(op: &TorusOp) -> CmdResult {
    match op {
        TorusOp::Annexb { alpha, n, tol, k } => {
            let cfg = AnnexBConfig {
                alpha: *alpha,
                n_max: *n,
                tol: *tol,
                max_freq: *k,
            };
            match annexb_experiment(&cfg) {
                Ok(r) => Ok(Outcome {
                    report: annexb_json(&r),
                    holds: r.passed,
                }),
                Err(e @ TorusError::Resonance { .. }) => Err(Failure::Property(json!({
                    "alpha": alpha,
                    "refused": true,
                    "verdict": "refused: resonant frequency, alpha behaves as rational",
                    "diagnostic": e.to_string(),
                }))),
                Err(e) => Err(e.into()),
            }
        }
        TorusOp::Average { rotation, freq, n, q } => {
            let rotations = rotation.iter().map(|r| parse_vec::<f64>(r)).collect::<Result<Vec<_>, _>>()?;
            let sys = TorusSystem::new(rotations)?;
            let fs = freq
                .iter()
                .map(|m| parse_vec::<i64>(m).map(FourierObservable::character))
                .collect::<Result<Vec<_>, _>>()?;
            let r = torus_multiple_average(&sys, &fs, *q, *n)?;
            let c = decay_constant(&sys, &fs)?;
            Ok(Outcome::ok(json!({
                "n": r.n,
                "q": r.q,
                "l2_norm": r.l2_norm,
                "cauchy_increment": r.cauchy_increment,
                "quadrature_exact": r.quadrature_exact,
                "decay_constant": c,
                "rate_bound": c.map(|c| c / *n as f64),
            })))
        }
        TorusOp::Weyl { freq, rotation, n } => {
            let w = weyl_sum(&parse_vec::<i64>(freq)?, &parse_vec::<f64>(rotation)?, *n)?;
            Ok(Outcome::ok(json!({
                "freq": parse_vec::<i64>(freq)?,
                "n": w.n,
                "phase": w.phase,
                "value": w.value,
                "bound": w.bound,
                "closed_form": w.closed_form,
            })))
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::SystemCheck { path } => system_check(path),
        Command::Factor { path, op } => factor(path, op),
        Command::Joining { op } => joining(op, cli.period_cap),
        Command::Average(args) => average(args, cli.period_cap),
        Command::Torus { op } => torus(op),
    }
}

fn emit(report: &Value, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(report)
    } else {
        serde_json::to_string(report)
    };
    // A closed stdout (e.g. piped into `head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{}", text.expect("reports serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            emit(&out.report, cli.pretty);
            if out.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Property(report)) => {
            emit(&report, cli.pretty);
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("joinery: {msg}");
            ExitCode::from(2)
        }
    }
}
