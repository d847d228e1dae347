//! Command-line front end: argument definitions, report types and their
//! text, CSV and JSON renderings.
//!
//! Output is a pure function of the arguments. JSON and CSV print every
//! float with 17 significant digits so values survive a round trip; text
//! uses 6.

use std::fmt::Write as _;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use thiserror::Error;

use crate::certificate::{certify_composite, certify_single, CompositeCertificate, ErrorCertificate};
use crate::display::{general, round_trip};
use crate::expr::{parse, Expr, ParseError};
use crate::poly::Interval;
use crate::proof_trace::{trace, ProofTrace, TraceConfig};
use crate::quadrature::{
    adaptive_simpson, convergence_sweep, precise_reference, true_error, QuadratureError, ReferenceMethod, SweepRow,
};

#[derive(Debug, Parser)]
#[command(name = "simpcert", version, about = "Simpson's rule, its error term and the point that explains it")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simpson value, reference integral and true error E = reference - Simpson.
    Integrate(IntegrateArgs),
    /// Locate xi in (a, b) with E = -f''''(xi) (b - a)^5 / 2880.
    Certify(CertifyArgs),
    /// Replay the Rolle-cascade argument for xi step by step.
    Trace(TraceArgs),
    /// Composite errors for 1, 2, 4, ..., 2^levels panels and observed orders.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Problem {
    /// Function of x, e.g. "exp(x)*sin(x)". Quote it.
    #[arg(allow_hyphen_values = true)]
    pub expression: String,
    /// Left endpoint; constant expressions such as -pi/2 are accepted.
    #[arg(allow_hyphen_values = true)]
    pub a: String,
    /// Right endpoint.
    #[arg(allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Debug, Args)]
pub struct Format {
    /// Emit JSON.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV with a header row.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Number of Simpson panels.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1 << 24))]
    pub panels: u64,
    /// Use adaptive Simpson instead of a fixed panel count.
    #[arg(long, conflicts_with = "panels")]
    pub adaptive: bool,
    /// Absolute tolerance for --adaptive.
    #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
    pub tol: f64,
    /// Bound on |f''''| over [a, b]; adds the a-priori error bound.
    #[arg(long, allow_hyphen_values = true)]
    pub m4: Option<f64>,
    #[command(flatten)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Number of Simpson panels; more than one certifies the composite rule.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4096))]
    pub panels: u64,
    /// Tolerance on |f''''(xi) - target|, relative to 1 + |target|.
    #[arg(long, default_value_t = crate::certificate::DEFAULT_REL_TOL, allow_hyphen_values = true)]
    pub tol: f64,
    #[command(flatten)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Tolerance on the final identity, relative to 1 + |target|.
    #[arg(long, default_value_t = TraceConfig::default().final_rel_tol, allow_hyphen_values = true)]
    pub tol: f64,
    /// Samples per bracket search.
    #[arg(long, default_value_t = TraceConfig::default().samples, value_parser = parse_samples)]
    pub samples: usize,
    #[command(flatten)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Largest doubling exponent: panels run 1, 2, 4, ..., 2^levels.
    #[arg(long, visible_alias = "panels", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=20))]
    pub levels: u32,
    #[command(flatten)]
    pub format: Format,
}

fn parse_samples(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if (16..=1 << 20).contains(&n) => Ok(n),
        _ => Err(format!("expected an integer in 16..={}", 1 << 20)),
    }
}

/// Failure of a run, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Trace(String),
}

impl CliError {
    /// 2 for parse and usage errors, 3 for numeric failures, 4 for a replay
    /// that could not complete.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Trace(_) => 4,
        }
    }

    fn parse(source: &str, err: ParseError) -> Self {
        CliError::Parse(err.caret_diagnostic(source))
    }
}

impl From<QuadratureError> for CliError {
    fn from(err: QuadratureError) -> Self {
        CliError::Numeric(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputKind {
    Text,
    Json,
    Csv,
}

impl Format {
    fn kind(&self) -> OutputKind {
        match (self.json, self.csv) {
            (true, _) => OutputKind::Json,
            (_, true) => OutputKind::Csv,
            _ => OutputKind::Text,
        }
    }
}

struct Resolved {
    expr: Expr,
    iv: Interval,
}

fn endpoint(text: &str) -> Result<f64, CliError> {
    let e = parse(text).map_err(|err| CliError::parse(text, err))?;
    if e.depends_on_x() {
        return Err(CliError::Usage(format!("endpoint `{text}` must not depend on x")));
    }
    e.eval(0.0).map_err(|err| CliError::Numeric(format!("endpoint `{text}`: {err}")))
}

impl Problem {
    fn resolve(&self) -> Result<Resolved, CliError> {
        let expr = parse(&self.expression).map_err(|err| CliError::parse(&self.expression, err))?;
        let iv =
            Interval::new(endpoint(&self.a)?, endpoint(&self.b)?).map_err(|err| CliError::Usage(err.to_string()))?;
        Ok(Resolved { expr, iv })
    }
}

/// Report of `integrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateReport {
    pub expression: String,
    pub a: f64,
    pub b: f64,
    /// `composite` or `adaptive`.
    pub method: String,
    pub panels: usize,
    pub approx: f64,
    pub reference: f64,
    pub reference_method: ReferenceMethod,
    #[serde(rename = "E")]
    pub error: f64,
    pub a_priori_bound: Option<f64>,
    /// The adaptive rule's own `/15` error estimate.
    pub estimated_error: Option<f64>,
}

/// Report of `certify`: one certificate for a single panel, the composite
/// form otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CertifyReport {
    Single(ErrorCertificate),
    Composite(CompositeCertificate),
}

// serde's untagged buffering cannot carry arbitrary-precision numbers, so the
// variant is chosen from the keys of a parsed `Value` instead.
impl<'de> Deserialize<'de> for CertifyReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        let composite = value.get("per_panel").is_some();
        let report = if composite {
            serde_json::from_value(value).map(CertifyReport::Composite)
        } else {
            serde_json::from_value(value).map(CertifyReport::Single)
        };
        report.map_err(serde::de::Error::custom)
    }
}

/// Report of `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub expression: String,
    pub a: f64,
    pub b: f64,
    pub reference: f64,
    pub reference_method: ReferenceMethod,
    pub rows: Vec<SweepRow>,
}

/// Run one command and return what it prints on success.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Integrate(args) => cmd_integrate(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--tol must be positive and finite, got {tol}")))
    }
}

pub fn cmd_integrate(args: &IntegrateArgs) -> Result<String, CliError> {
    let Resolved { expr, iv } = args.problem.resolve()?;
    check_tol(args.tol)?;
    let reference = precise_reference(&expr, &iv)?;
    let (method, panels, approx, estimated_error) = if args.adaptive {
        let r = adaptive_simpson(&expr, &iv, args.tol)?;
        ("adaptive", r.panels, r.approx, Some(r.error))
    } else {
        let r = true_error(&expr, &iv, args.panels as usize, &reference)?;
        ("composite", r.panels, r.approx, None)
    };
    let a_priori_bound = match args.m4 {
        Some(m4) if m4 >= 0.0 && m4.is_finite() => Some(crate::quadrature::a_priori_bound(m4, &iv, panels)),
        Some(m4) => return Err(CliError::Usage(format!("--m4 must be non-negative and finite, got {m4}"))),
        None => None,
    };
    let report = IntegrateReport {
        expression: expr.to_string(),
        a: iv.a(),
        b: iv.b(),
        method: method.into(),
        panels,
        approx,
        reference: reference.value,
        reference_method: reference.method,
        error: reference.value - approx,
        a_priori_bound,
        estimated_error,
    };
    Ok(match args.format.kind() {
        OutputKind::Json => to_json(&report),
        OutputKind::Csv => integrate_csv(&report),
        OutputKind::Text => integrate_text(&report, args.m4),
    })
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<String, CliError> {
    let Resolved { expr, iv } = args.problem.resolve()?;
    check_tol(args.tol)?;
    let numeric = |err: crate::certificate::CertificateError| CliError::Numeric(err.to_string());
    let report = if args.panels == 1 {
        CertifyReport::Single(certify_single(&expr, &iv, args.tol).map_err(numeric)?)
    } else {
        CertifyReport::Composite(certify_composite(&expr, &iv, args.panels as usize, args.tol).map_err(numeric)?)
    };
    Ok(match args.format.kind() {
        OutputKind::Json => to_json(&report),
        OutputKind::Csv => certify_csv(&report),
        OutputKind::Text => certify_text(&expr, &report),
    })
}

pub fn cmd_trace(args: &TraceArgs) -> Result<String, CliError> {
    let Resolved { expr, iv } = args.problem.resolve()?;
    check_tol(args.tol)?;
    let cfg = TraceConfig { samples: args.samples, final_rel_tol: args.tol, ..TraceConfig::default() };
    let report = trace(&expr, &iv, &cfg).map_err(|err| {
        if err.is_domain_error() {
            CliError::Numeric(err.to_string())
        } else {
            CliError::Trace(err.to_string())
        }
    })?;
    Ok(match args.format.kind() {
        OutputKind::Json => to_json(&report),
        OutputKind::Csv => trace_csv(&report),
        OutputKind::Text => report.render(),
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let Resolved { expr, iv } = args.problem.resolve()?;
    let reference = precise_reference(&expr, &iv)?;
    let rows = convergence_sweep(&expr, &iv, args.levels, &reference)?;
    let report = SweepReport {
        expression: expr.to_string(),
        a: iv.a(),
        b: iv.b(),
        reference: reference.value,
        reference_method: reference.method,
        rows,
    };
    Ok(match args.format.kind() {
        OutputKind::Json => to_json(&report),
        OutputKind::Csv => sweep_csv(&report),
        OutputKind::Text => sweep_text(&report),
    })
}

/// Pretty JSON with every float rewritten to 17 significant digits.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut value = serde_json::to_value(report).expect("reports serialize");
    widen_floats(&mut value);
    serde_json::to_string_pretty(&value).expect("values print") + "\n"
}

fn widen_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked is_f64");
            *n = Number::from_str(&round_trip(x)).expect("formatted float is a JSON number");
        }
        Value::Array(items) => items.iter_mut().for_each(widen_floats),
        Value::Object(map) => map.values_mut().for_each(widen_floats),
        _ => {}
    }
}

fn csv_float(x: f64) -> String {
    round_trip(x)
}

fn csv_option(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

pub const INTEGRATE_CSV_HEADER: &str = "a,b,method,panels,approx,reference,E,a_priori_bound";
pub const CERTIFY_CSV_HEADER: &str = "panel,xi,target,residual,E,a,b,degenerate";
pub const TRACE_CSV_HEADER: &str = "level,index,x,value";
pub const SWEEP_CSV_HEADER: &str = "panels,approx,abs_error,observed_order";

fn integrate_csv(r: &IntegrateReport) -> String {
    format!(
        "{INTEGRATE_CSV_HEADER}\n{},{},{},{},{},{},{},{}\n",
        csv_float(r.a),
        csv_float(r.b),
        r.method,
        r.panels,
        csv_float(r.approx),
        csv_float(r.reference),
        csv_float(r.error),
        csv_option(r.a_priori_bound)
    )
}

fn certificate_row(label: &str, c: &ErrorCertificate) -> String {
    format!(
        "{label},{},{},{},{},{},{},{}\n",
        csv_float(c.xi),
        csv_float(c.target),
        csv_float(c.residual),
        csv_float(c.error),
        csv_float(c.a),
        csv_float(c.b),
        c.degenerate
    )
}

/// One row per certificate; the composite form adds a `global` row whose
/// target is the mean of the panel targets.
fn certify_csv(report: &CertifyReport) -> String {
    let mut out = format!("{CERTIFY_CSV_HEADER}\n");
    match report {
        CertifyReport::Single(c) => out.push_str(&certificate_row("1", c)),
        CertifyReport::Composite(c) => {
            for (i, panel) in c.per_panel.iter().enumerate() {
                out.push_str(&certificate_row(&(i + 1).to_string(), panel));
            }
            let global = ErrorCertificate {
                xi: c.global_xi,
                target: c.mean_target,
                residual: c.global_residual,
                error: c.error,
                a: c.a,
                b: c.b,
                degenerate: c.degenerate,
            };
            out.push_str(&certificate_row("global", &global));
        }
    }
    out
}

/// Level 0 lists the five zeros of phi; level `n` lists the roots of its
/// `n`-th derivative with the derivative's value there.
fn trace_csv(t: &ProofTrace) -> String {
    let mut out = format!("{TRACE_CSV_HEADER}\n");
    for (i, (x, v)) in [t.a, t.u, t.c, t.v, t.b].iter().zip(t.zero_values).enumerate() {
        let _ = writeln!(out, "0,{},{},{}", i + 1, csv_float(*x), csv_float(v));
    }
    for level in &t.rolle_levels {
        for (i, (x, v)) in level.roots.iter().zip(&level.values).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", level.order, i + 1, csv_float(*x), csv_float(*v));
        }
    }
    out
}

fn sweep_csv(r: &SweepReport) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.panels,
            csv_float(row.approx),
            csv_float(row.abs_error),
            csv_option(row.observed_order)
        );
    }
    out
}

fn g(x: f64) -> String {
    general(x, 6)
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        "panel"
    } else {
        "panels"
    }
}

fn integrate_text(r: &IntegrateReport, m4: Option<f64>) -> String {
    let mut out = format!(
        "f(x) = {} on [{}, {}], {} Simpson, {} {}\n",
        r.expression,
        g(r.a),
        g(r.b),
        r.method,
        r.panels,
        plural(r.panels)
    );
    let _ = writeln!(out, "Simpson value   {}", g(r.approx));
    let _ = writeln!(out, "reference       {} ({})", g(r.reference), r.reference_method);
    let _ = writeln!(out, "E               {}", g(r.error));
    if let Some(est) = r.estimated_error {
        let _ = writeln!(out, "estimated E     {}", g(est));
    }
    if let (Some(bound), Some(m4)) = (r.a_priori_bound, m4) {
        let _ = writeln!(out, "a-priori bound  {} (M4 = {})", g(bound), g(m4));
    }
    out
}

fn certificate_text(out: &mut String, c: &ErrorCertificate) {
    let _ = writeln!(out, "  E = {}, target f''''(xi) = {}", g(c.error), g(c.target));
    let _ = writeln!(out, "  xi = {}, residual {}", g(c.xi), g(c.residual));
    if c.degenerate {
        let _ = writeln!(out, "  degenerate: f'''' meets the target at every sample; xi is the midpoint by convention");
    }
}

fn certify_text(expr: &Expr, report: &CertifyReport) -> String {
    let mut out = String::new();
    match report {
        CertifyReport::Single(c) => {
            let _ = writeln!(out, "f(x) = {expr} on [{}, {}]", g(c.a), g(c.b));
            certificate_text(&mut out, c);
        }
        CertifyReport::Composite(c) => {
            let n = c.per_panel.len();
            let _ = writeln!(out, "f(x) = {expr} on [{}, {}], {n} {}", g(c.a), g(c.b), plural(n));
            for (i, panel) in c.per_panel.iter().enumerate() {
                let _ = writeln!(out, "panel {} on [{}, {}]", i + 1, g(panel.a), g(panel.b));
                certificate_text(&mut out, panel);
            }
            let _ = writeln!(out, "composite E = {}, mean target {}", g(c.error), g(c.mean_target));
            let _ = writeln!(out, "global xi = {}, residual {}", g(c.global_xi), g(c.global_residual));
            if c.degenerate {
                let _ = writeln!(out, "degenerate: f'''' meets the mean target at every sample; xi is the midpoint");
            }
        }
    }
    out
}

fn sweep_text(r: &SweepReport) -> String {
    let mut out = format!(
        "f(x) = {} on [{}, {}], reference {} ({})\n",
        r.expression,
        g(r.a),
        g(r.b),
        g(r.reference),
        r.reference_method
    );
    let _ = writeln!(out, "{:>8}  {:>14}  {:>14}  {:>8}", "panels", "approx", "|E|", "order");
    for row in &r.rows {
        let order = row.observed_order.map(g).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{:>8}  {:>14}  {:>14}  {:>8}", row.panels, g(row.approx), g(row.abs_error), order);
    }
    out
}
