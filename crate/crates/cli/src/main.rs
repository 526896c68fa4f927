use clap::{Args, Parser, Subcommand, ValueEnum};
use modpress::coding::{
    arithmetic_code, endpoints_from_periodic_code, geometric_code, is_positive, GeodesicEndpoints,
    SymbolicCode,
};
use modpress::descriptor::{
    cf_value_to_json, parse_digits, parse_endpoint, parse_potential, parse_rule, rule_to_json,
    MAX_DEPTH,
};
use modpress::error::Error;
use modpress::flow::{
    entropy_for, equilibrium_diagnosis, flow_pressure, pressure_curve, small_oscillation_check,
    EquilibriumVerdict, FlowParams, FlowPotentialSpec,
};
use modpress::measures::{derivative_check, gibbs_ratio_check, rpf_measure, variational_check};
use modpress::minus_cf::{eval_minus_cf, expand_minus_cf, expand_minus_cf_real, TailModel};
use modpress::potential::CylinderPotential;
use modpress::pressure::{
    pressure, pressure_periodic_oracle, pressure_truncated, PressureParams, DEFAULT_ORACLE_CAP,
};
use modpress::shift::{truncate, Symbol, TransitionRule};
use modpress::coding::Endpoint;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

const MAX_TERMS: usize = 100_000;

/// Certified thermodynamic formalism for the positive geodesic flow on the
/// modular surface.
#[derive(Parser)]
#[command(name = "modpress", version)]
struct Cli {
    /// Output format; CSV is a tabular projection of the JSON report.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ShiftArgs {
    /// Rule descriptor JSON (or @file); defaults to the positive-geodesic rule.
    #[arg(long)]
    rule: Option<String>,
    /// Truncation level.
    #[arg(long = "N")]
    n: Option<u64>,
    /// Cylinder depth of the matrix states (1..=4).
    #[arg(long = "k", default_value_t = 2)]
    k: usize,
}

#[derive(Args, Clone)]
struct FlowArgs {
    #[command(flatten)]
    shift: ShiftArgs,
    /// Base potential descriptor JSON (or @file); defaults to zero.
    #[arg(long)]
    potential: Option<String>,
    /// Bisection tolerance on t.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    t_max: f64,
    /// Declared bounds "inf,sup" of the base potential.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Certified pressure enclosure of a potential on the shift.
    Pressure {
        #[command(flatten)]
        shift: ShiftArgs,
        /// Potential descriptor JSON (or @file).
        #[arg(long)]
        potential: String,
        /// Perron iteration tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Flow pressure as the root of t -> P(F - t tau).
    FlowPressure(FlowArgs),
    /// Topological entropy of the flow (flow pressure of the zero potential).
    Entropy {
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Symbolic codes and continued-fraction values.
    Code {
        #[command(subcommand)]
        op: CodeOp,
    },
    /// Whether a code is admissible for a positive geodesic.
    Positivity {
        /// Comma-separated digits, e.g. 6,3.
        #[arg(long)]
        code: String,
        /// Treat the code as a repeating block.
        #[arg(long)]
        periodic: bool,
    },
    /// RPF measure on a truncation and its Gibbs ratio bounds.
    Gibbs {
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long)]
        potential: Option<String>,
        /// Check cylinders of 1..=depths extra steps.
        #[arg(long, default_value_t = 5)]
        depths: usize,
    },
    /// Numerical consistency checks.
    Check {
        #[command(subcommand)]
        op: CheckOp,
    },
}

#[derive(Subcommand)]
enum CodeOp {
    /// Geometric (boundary-crossing) code.
    Geometric(CodeArgs),
    /// Arithmetic (minus continued fraction) code.
    Arithmetic(CodeArgs),
    /// Value of a digit string as a minus continued fraction.
    Value {
        #[arg(long)]
        digits: String,
        #[arg(long, value_enum, default_value_t = Tail::Periodic)]
        tail: Tail,
    },
    /// Minus continued fraction digits of w > 1.
    Expand {
        /// Quadratic JSON or decimal.
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// Repeating arithmetic block, e.g. 6,3.
    #[arg(long, conflicts_with_all = ["u", "w"])]
    periodic_code: Option<String>,
    /// Backward endpoint (quadratic JSON or decimal).
    #[arg(long, requires = "w")]
    u: Option<String>,
    /// Forward endpoint (quadratic JSON or decimal).
    #[arg(long, requires = "u")]
    w: Option<String>,
    #[arg(long, default_value_t = 20)]
    terms: usize,
    /// Backward digits (arithmetic code only).
    #[arg(long, default_value_t = 0)]
    backward: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tail {
    Empty,
    WorstCase,
    Periodic,
}

#[derive(Subcommand)]
enum CheckOp {
    /// Random Markov measures stay below the pressure; the RPF measure attains it.
    Variational {
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long)]
        potential: Option<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Finite-difference slope of t -> P(F - t tau) against -∫tau d(RPF).
    Derivative {
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long)]
        potential: Option<String>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Equilibrium-state diagnosis for the flow potential.
    Equilibrium(FlowArgs),
    /// Small-oscillation criterion for a bounded base potential.
    SmallOscillation(FlowArgs),
    /// Pressure curve samples with monotonicity and convexity verdicts.
    Curve {
        #[command(flatten)]
        flow: FlowArgs,
        /// Comma-separated increasing t values.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Matrix pressure on a truncation against periodic-orbit sums.
    Oracle {
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long)]
        potential: Option<String>,
        /// Period lengths, comma-separated.
        #[arg(long, default_value = "2,4,6,8")]
        periods: String,
    },
    /// Pressure enclosures for a sequence of truncation levels.
    Convergence {
        #[arg(long)]
        rule: Option<String>,
        #[arg(long)]
        potential: String,
        #[arg(long = "k", default_value_t = 2)]
        k: usize,
        /// Truncation levels, comma-separated.
        #[arg(long = "Ns", default_value = "10,20,50,100,200")]
        ns: String,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Descriptor(m) => Failure::Usage(m),
            other => Failure::Lib(other),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// A finished report: JSON value, CSV projection and whether it is conclusive.
struct Report {
    json: Value,
    csv: String,
    inconclusive: bool,
}

impl Report {
    fn new(json: Value, csv: String) -> Self {
        Report { json, csv, inconclusive: false }
    }
}

type Outcome = Result<Report, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = max_states().and_then(|limit| execute(&cli.command, limit));
    match outcome {
        Ok(report) => {
            let text = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report.json)
                        .unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
                    s.push('\n');
                    s
                }
                Format::Csv => report.csv,
            };
            if let Err(e) = emit(&cli.output, &text) {
                eprintln!("modpress: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(if report.inconclusive { EXIT_INCONCLUSIVE } else { 0 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("modpress: {m}\nRun `modpress --help` for usage.");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("modpress: {e}");
            let code = match e {
                Error::Unbracketed { .. } | Error::UndecidableCrossing(_) => EXIT_INCONCLUSIVE,
                _ => EXIT_DOMAIN,
            };
            ExitCode::from(code)
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn max_states() -> Result<usize, Failure> {
    match std::env::var("MODPRESS_MAX_STATES") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("MODPRESS_MAX_STATES must be a positive integer, got '{v}'"))),
        Err(_) => Ok(PressureParams::default().max_states),
    }
}

fn read_arg(text: &str) -> Result<String, Failure> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {path}: {e}"))),
        None => Ok(text.to_string()),
    }
}

fn load_rule(text: &Option<String>) -> Result<TransitionRule, Failure> {
    match text {
        Some(t) => Ok(parse_rule(&read_arg(t)?)?),
        None => Ok(TransitionRule::positive_geodesic()),
    }
}

fn load_potential(text: &Option<String>) -> Result<(CylinderPotential, Option<Symbol>), Failure> {
    match text {
        Some(t) => {
            let d = parse_potential(&read_arg(t)?)?;
            Ok((d.potential, d.cutoff))
        }
        None => Ok((CylinderPotential::zero(), None)),
    }
}

fn check_depth(k: usize) -> Result<(), Failure> {
    if !(1..=MAX_DEPTH).contains(&k) {
        return Err(usage(format!("--k must lie in 1..={MAX_DEPTH}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    Ok(())
}

/// The truncation level: explicit flag, then descriptor cutoff, then default.
/// Infinite rules need `N + 1` past the last constrained symbol.
fn level(rule: &TransitionRule, n: Option<u64>, cutoff: Option<Symbol>, default: u64) -> Result<Symbol, Failure> {
    let n = n.or(cutoff).unwrap_or(default);
    let need = rule.free_from().saturating_sub(1).max(rule.alphabet_min);
    if n < need {
        return Err(usage(format!("--N must be at least {need} for this rule")));
    }
    if n > modpress::shift::DEFAULT_SYMBOL_CAP {
        return Err(usage("--N is too large"));
    }
    Ok(n)
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let mut out = Vec::new();
    for p in text.split(',') {
        let x: f64 = p.trim().parse().map_err(|_| usage(format!("{what}: '{p}' is not a number")))?;
        if !x.is_finite() {
            return Err(usage(format!("{what}: '{p}' is not finite")));
        }
        out.push(x);
    }
    Ok(out)
}

fn parse_levels(text: &str, what: &str) -> Result<Vec<u64>, Failure> {
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| usage(format!("{what}: '{p}' is not a positive integer"))))
        .collect()
}

fn pressure_params(k: usize, limit: usize) -> PressureParams {
    PressureParams { max_states: limit, ..PressureParams::with_depth(k) }
}

fn flow_setup(a: &FlowArgs, limit: usize) -> Result<(FlowPotentialSpec, FlowParams), Failure> {
    check_depth(a.shift.k)?;
    check_tol(a.tol)?;
    if !(a.t_min < a.t_max) {
        return Err(usage("--t-min must be below --t-max"));
    }
    let rule = load_rule(&a.shift.rule)?;
    let (base, cutoff) = load_potential(&a.potential)?;
    let n = level(&rule, a.shift.n, cutoff, 200)?;
    let mut spec = FlowPotentialSpec::new(base).with_rule(rule);
    if let Some(b) = &a.bounds {
        let v = parse_floats(b, "--bounds")?;
        if v.len() != 2 || v[0] > v[1] {
            return Err(usage("--bounds needs 'inf,sup' with inf <= sup"));
        }
        spec = spec.with_bounds(v[0], v[1]);
    }
    let params = FlowParams {
        pressure: pressure_params(a.shift.k, limit),
        tol: a.tol,
        t_range: (a.t_min, a.t_max),
        ..FlowParams::new(n, a.shift.k)
    };
    Ok((spec, params))
}

fn interval_csv(rows: &[(String, f64, f64)], head: &str) -> String {
    let mut s = format!("{head},lower,upper\n");
    for (k, lo, hi) in rows {
        s.push_str(&format!("{k},{lo},{hi}\n"));
    }
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn execute(cmd: &Command, limit: usize) -> Outcome {
    match cmd {
        Command::Pressure { shift, potential, tol } => {
            check_depth(shift.k)?;
            check_tol(*tol)?;
            let rule = load_rule(&shift.rule)?;
            let (pot, cutoff) = load_potential(&Some(potential.clone()))?;
            let n = level(&rule, shift.n, cutoff, 200)?;
            let mut params = pressure_params(shift.k, limit);
            params.perron.tol = *tol;
            let r = pressure(&rule, &pot, n, params)?;
            let mut json = to_value(&r.value);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(n));
                m.insert("k".into(), json!(shift.k));
                m.insert("tol".into(), json!(tol));
                m.insert("rule".into(), rule_to_json(&rule));
                m.insert("diagnostics".into(), to_value(&r.diagnostics));
            }
            let csv = interval_csv(&[(n.to_string(), r.value.lower(), r.value.upper())], "N");
            Ok(Report::new(json, csv))
        }
        Command::FlowPressure(a) => {
            let (spec, params) = flow_setup(a, limit)?;
            let d = flow_pressure(&spec, params)?;
            let rows: Vec<_> = d
                .evaluations
                .iter()
                .map(|e| (e.t.to_string(), e.pressure.lower(), e.pressure.upper()))
                .collect();
            let mut json = to_value(&d);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(params.n_max));
                m.insert("k".into(), json!(a.shift.k));
                m.insert("tol".into(), json!(a.tol));
            }
            Ok(Report::new(json, interval_csv(&rows, "t")))
        }
        Command::Entropy { shift, tol } => {
            check_depth(shift.k)?;
            check_tol(*tol)?;
            let rule = load_rule(&shift.rule)?;
            let n = level(&rule, shift.n, None, 200)?;
            let params = FlowParams { pressure: pressure_params(shift.k, limit), tol: *tol, ..FlowParams::new(n, shift.k) };
            let r = entropy_for(&rule, params)?;
            let json = json!({
                "lower": r.enclosure.lower,
                "upper": r.enclosure.upper,
                "N": n,
                "k": shift.k,
                "tol": tol,
                "truncation_lower": r.truncation_lower,
                "domination_upper": r.domination_upper,
                "kind": to_value(&r.diagnosis.kind),
                "diagnosis": to_value(&r.diagnosis),
            });
            let csv = interval_csv(&[(n.to_string(), r.enclosure.lower, r.enclosure.upper)], "N");
            Ok(Report::new(json, csv))
        }
        Command::Code { op } => code(op),
        Command::Positivity { code, periodic } => {
            let digits = parse_digits(code)?;
            let positive = is_positive(&digits, *periodic);
            Ok(Report::new(json!({ "positive": positive }), format!("positive\n{positive}\n")))
        }
        Command::Gibbs { shift, potential, depths } => {
            check_depth(shift.k)?;
            if *depths == 0 || *depths > 64 {
                return Err(usage("--depths must lie in 1..=64"));
            }
            let rule = load_rule(&shift.rule)?;
            let (pot, cutoff) = load_potential(potential)?;
            let n = level(&rule, shift.n, cutoff, 20)?;
            let fs = truncate(&rule, n)?;
            let depth = shift.k.max(pot.depth);
            let m = rpf_measure(&fs, &pot, depth)?;
            let p = m.log_root.map(|r| r.midpoint()).unwrap_or(f64::NAN);
            let g = gibbs_ratio_check(&m, &pot, p, 1..=*depths)?;
            let json = json!({
                "N": n,
                "k": depth,
                "pressure": m.log_root,
                "stationarity_residual": m.stationarity_residual(),
                "states": m.states.len(),
                "gibbs": to_value(&g),
                "notes": m.notes,
            });
            Ok(Report::new(json, m.to_csv()))
        }
        Command::Check { op } => check(op, limit),
    }
}

fn code_json(c: &SymbolicCode, periodic: bool) -> Report {
    let kind = to_value(&c.kind);
    let json = json!({ "code": c.code, "kind": kind, "periodic": periodic || c.periodic });
    let mut csv = String::from("index,digit\n");
    for (i, d) in c.code.iter().enumerate() {
        csv.push_str(&format!("{i},{d}\n"));
    }
    Report::new(json, csv)
}

fn endpoints(a: &CodeArgs) -> Result<(GeodesicEndpoints, bool), Failure> {
    if a.terms > MAX_TERMS || a.backward > MAX_TERMS {
        return Err(usage(format!("at most {MAX_TERMS} terms")));
    }
    match (&a.periodic_code, &a.u, &a.w) {
        (Some(block), _, _) => Ok((endpoints_from_periodic_code(&parse_digits(block)?)?, true)),
        (None, Some(u), Some(w)) => Ok((
            GeodesicEndpoints { u: parse_endpoint(&read_arg(u)?)?, w: parse_endpoint(&read_arg(w)?)? },
            false,
        )),
        _ => Err(usage("give --periodic-code or both --u and --w")),
    }
}

fn code(op: &CodeOp) -> Outcome {
    match op {
        CodeOp::Geometric(a) => {
            let (g, periodic) = endpoints(a)?;
            Ok(code_json(&geometric_code(&g, a.terms)?, periodic))
        }
        CodeOp::Arithmetic(a) => {
            let (g, periodic) = endpoints(a)?;
            Ok(code_json(&arithmetic_code(&g, a.terms, a.backward)?, periodic))
        }
        CodeOp::Value { digits, tail } => {
            let d = parse_digits(digits)?;
            let d: Vec<Symbol> = d
                .into_iter()
                .map(|x| u64::try_from(x).ok().filter(|&x| x >= 2).ok_or_else(|| usage("digits must be >= 2")))
                .collect::<Result<_, _>>()?;
            let tail = match tail {
                Tail::Empty => TailModel::Empty,
                Tail::WorstCase => TailModel::WorstCase,
                Tail::Periodic => TailModel::PeriodicExtension,
            };
            let v = eval_minus_cf(&d, tail)?;
            let csv = format!("lower,upper\n{},{}\n", v.value.lower, v.value.upper);
            Ok(Report::new(cf_value_to_json(&v), csv))
        }
        CodeOp::Expand { w, terms } => {
            if *terms > MAX_TERMS {
                return Err(usage(format!("at most {MAX_TERMS} terms")));
            }
            let e = match parse_endpoint(&read_arg(w)?)? {
                Endpoint::Exact(q) => expand_minus_cf(&q, *terms)?,
                Endpoint::Real(x) => expand_minus_cf_real(x, *terms)?,
            };
            let mut csv = String::from("index,digit\n");
            for (i, d) in e.digits.iter().enumerate() {
                csv.push_str(&format!("{i},{d}\n"));
            }
            Ok(Report::new(to_value(&e), csv))
        }
    }
}

fn check(op: &CheckOp, limit: usize) -> Outcome {
    match op {
        CheckOp::Variational { shift, potential, samples, seed } => {
            check_depth(shift.k)?;
            if *samples == 0 || *samples > 10_000 {
                return Err(usage("--samples must lie in 1..=10000"));
            }
            let rule = load_rule(&shift.rule)?;
            let (pot, cutoff) = load_potential(potential)?;
            let n = level(&rule, shift.n, cutoff, 20)?;
            let fs = truncate(&rule, n)?;
            let r = variational_check(&fs, &pot, shift.k.max(pot.depth), *samples, *seed)?;
            let mut csv = String::from("sample,entropy,integral_lower,integral_upper,value\n");
            for (i, s) in r.samples.iter().enumerate() {
                csv.push_str(&format!("{i},{},{},{},{}\n", s.entropy, s.integral.lower, s.integral.upper, s.value));
            }
            let mut json = to_value(&r);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(n));
                m.insert("k".into(), json!(shift.k.max(pot.depth)));
            }
            Ok(Report::new(json, csv))
        }
        CheckOp::Derivative { shift, potential, t, step } => {
            check_depth(shift.k)?;
            if !(t.is_finite() && step.is_finite() && *step > 0.0) {
                return Err(usage("--t must be finite and --step positive"));
            }
            let rule = load_rule(&shift.rule)?;
            let (pot, cutoff) = load_potential(potential)?;
            let n = level(&rule, shift.n, cutoff, 20)?;
            let fs = truncate(&rule, n)?;
            let r = derivative_check(&fs, &pot, *t, *step, shift.k.max(pot.depth))?;
            let csv = format!(
                "t,step,finite_difference,minus_roof_integral,error\n{},{},{},{},{}\n",
                r.t, r.step, r.finite_difference, r.minus_roof_integral, r.error
            );
            let mut json = to_value(&r);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(n));
                m.insert("k".into(), json!(shift.k.max(pot.depth)));
            }
            Ok(Report::new(json, csv))
        }
        CheckOp::Equilibrium(a) => {
            let (spec, params) = flow_setup(a, limit)?;
            let r = equilibrium_diagnosis(&spec, params)?;
            let inconclusive = r.verdict == EquilibriumVerdict::Inconclusive;
            let verdict = to_value(&r.verdict);
            let csv = format!("verdict,reason\n{},\"{}\"\n", verdict.as_str().unwrap_or(""), r.reason.replace('"', "'"));
            Ok(Report { json: to_value(&r), csv, inconclusive })
        }
        CheckOp::SmallOscillation(a) => {
            let (spec, params) = flow_setup(a, limit)?;
            let r = small_oscillation_check(&spec, params)?;
            let csv = format!(
                "oscillation,entropy_lower,margin,holds,bracket_verified\n{},{},{},{},{}\n",
                r.oscillation, r.entropy.lower, r.margin, r.holds, r.bracket_verified
            );
            let mut json = to_value(&r);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(params.n_max));
                m.insert("k".into(), json!(a.shift.k));
                m.insert("tol".into(), json!(a.tol));
            }
            Ok(Report::new(json, csv))
        }
        CheckOp::Curve { flow, grid } => {
            let (spec, params) = flow_setup(flow, limit)?;
            let grid = parse_floats(grid, "--grid")?;
            let r = pressure_curve(&spec, &grid, params)?;
            let rows: Vec<_> =
                r.points.iter().map(|e| (e.t.to_string(), e.pressure.lower(), e.pressure.upper())).collect();
            let mut json = to_value(&r);
            if let Value::Object(m) = &mut json {
                m.insert("N".into(), json!(params.n_max));
                m.insert("k".into(), json!(flow.shift.k));
            }
            Ok(Report::new(json, interval_csv(&rows, "t")))
        }
        CheckOp::Oracle { shift, potential, periods } => {
            check_depth(shift.k)?;
            let rule = load_rule(&shift.rule)?;
            let (pot, cutoff) = load_potential(potential)?;
            let n = level(&rule, shift.n, cutoff, 20)?;
            let fs = truncate(&rule, n)?;
            let t = pressure_truncated(&fs, &pot, pressure_params(shift.k, limit))?;
            let mut rows = Vec::new();
            let mut csv = String::from("period,oracle,distance\n");
            for p in parse_levels(periods, "--periods")? {
                let v = pressure_periodic_oracle(&fs, &pot, p as usize, DEFAULT_ORACLE_CAP)?;
                let dist = (t.enclosure.lower - v).max(v - t.enclosure.upper).max(0.0);
                csv.push_str(&format!("{p},{v},{dist}\n"));
                rows.push(json!({ "period": p, "oracle": v, "distance": dist }));
            }
            let json = json!({
                "N": n,
                "k": t.depth,
                "enclosure": t.enclosure,
                "converged": t.converged,
                "oracle": rows,
            });
            Ok(Report::new(json, csv))
        }
        CheckOp::Convergence { rule, potential, k, ns } => {
            check_depth(*k)?;
            let rule = load_rule(rule)?;
            let (pot, _) = load_potential(&Some(potential.clone()))?;
            let mut table = Vec::new();
            let mut rows = Vec::new();
            for n in parse_levels(ns, "--Ns")? {
                let n = level(&rule, Some(n), None, 0)?;
                let r = pressure(&rule, &pot, n, pressure_params(*k, limit))?;
                rows.push((n.to_string(), r.value.lower(), r.value.upper()));
                let mut row = to_value(&r.value);
                if let Value::Object(m) = &mut row {
                    m.insert("N".into(), json!(n));
                    m.insert("truncated".into(), to_value(&r.diagnostics.truncated));
                }
                table.push(row);
            }
            Ok(Report::new(json!({ "k": k, "rows": table }), interval_csv(&rows, "N")))
        }
    }
}
