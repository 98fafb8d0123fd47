//! Command-line front end: argument parsing, the JSON report envelope and the
//! exit-code contract. `main` only forwards to [`run`].

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sconvex::audit::{self, ClaimId, GridSize, GridSpec, Variant, Verdict};
use sconvex::hhbounds::{self, BoundInput, TheoremId};
use sconvex::means::{self, ChainCheck, MeanValue, PositivePair};
use sconvex::quadrature::{self, QuadratureResult, Rule, StudyRow};
use sconvex::{AuditRecord, AuditSummary, BoundResult, FnSpec, Interval};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Slack used when a command decides holds / violated.
const SLACK: f64 = hhbounds::DOMINANCE_SLACK;

#[derive(Debug, Parser)]
#[command(name = "sconvex", version, about = "Hermite-Hadamard bounds, certified quadrature, special means and audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one bound against its oracle-measured left side.
    Bound(BoundArgs),
    /// Composite rule value with its a-priori certificate.
    Quad(QuadArgs),
    /// The six two-argument means.
    Means(MeansArgs),
    /// Run the audit grid.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Printed,
    Corrected,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => Variant::AsPrinted,
            VariantArg::Corrected => Variant::Corrected,
        }
    }
}

fn parse_fn(s: &str) -> Result<FnSpec, String> {
    let spec: FnSpec = s.parse().map_err(|e: sconvex::Error| e.to_string())?;
    spec.build().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_theorem(s: &str) -> Result<TheoremId, String> {
    s.parse().map_err(|e: sconvex::Error| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a finite positive real"))
    }
}

fn parse_claim(s: &str) -> Result<ClaimSelector, String> {
    if s == "all" {
        return Ok(ClaimSelector::All);
    }
    s.parse()
        .map(ClaimSelector::One)
        .map_err(|e: sconvex::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimSelector {
    All,
    One(ClaimId),
}

impl Serialize for ClaimSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ClaimSelector::All => s.serialize_str("all"),
            ClaimSelector::One(c) => s.serialize_str(c.as_str()),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_parser = parse_theorem)]
    pub theorem: TheoremId,
    #[arg(long = "fn", value_parser = parse_fn)]
    #[serde(rename = "fn")]
    pub function: FnSpec,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Interior point; defaults to the midpoint.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Corrected)]
    pub variant: VariantArg,
    /// Treat an unverified hypothesis as a failure (exit 2).
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuadArgs {
    #[arg(long)]
    pub rule: Rule,
    #[arg(long = "fn", value_parser = parse_fn)]
    #[serde(rename = "fn")]
    pub function: FnSpec,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 1)]
    pub pieces: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Comma-separated piece counts for a uniform-refinement study.
    #[arg(long, value_delimiter = ',')]
    pub study: Option<Vec<usize>>,
    /// Write the study table as CSV.
    #[arg(long, requires = "study")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeansArgs {
    #[arg(long, value_parser = parse_positive)]
    pub a: f64,
    #[arg(long, value_parser = parse_positive)]
    pub b: f64,
    /// Order of the p-logarithmic mean.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long)]
    pub chain: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long, default_value = "all", value_parser = parse_claim)]
    pub claim: ClaimSelector,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "full")]
    pub grid: GridSize,
    /// Also write the report to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// The single machine-readable output format.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope<I: Serialize, R: Serialize> {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub inputs_echo: I,
    pub results: R,
    pub warnings: Vec<String>,
}

impl<I: Serialize, R: Serialize> ReportEnvelope<I, R> {
    fn new(command: &'static str, inputs_echo: I, results: R, warnings: Vec<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            inputs_echo,
            results,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a command produced: JSON for stdout, diagnostics for stderr, and
/// the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn report(json: String, code: i32) -> Self {
        Self {
            stdout: json,
            stderr: String::new(),
            code,
        }
    }

    fn failure(msg: impl std::fmt::Display) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {msg}"),
            code: EXIT_FAILURE,
        }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Self {
            stdout: String::new(),
            stderr: msg.to_string(),
            code: EXIT_USAGE,
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    stdout: e.to_string(),
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                _ => Outcome::usage(e.render()),
            }
        }
    };
    match cli.command {
        Command::Bound(a) => cmd_bound(&a),
        Command::Quad(a) => cmd_quad(&a),
        Command::Means(a) => cmd_means(&a),
        Command::Audit(a) => cmd_audit(&a),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub variant: Variant,
    pub stated: f64,
    pub verdict: Verdict,
    pub result: BoundResult,
}

fn verdict_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Holds => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::HypothesisUnmet => EXIT_HYPOTHESIS,
    }
}

fn decide(dominated: bool, hypothesis: bool, certify: bool) -> Verdict {
    if certify && !hypothesis {
        Verdict::HypothesisUnmet
    } else if dominated {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

pub fn cmd_bound(args: &BoundArgs) -> Outcome {
    let mut echo = args.clone();
    let result = (|| {
        let f = args.function.build()?;
        let interval = Interval::new(args.a, args.b)?;
        let lambda = args.lambda.unwrap_or_else(|| interval.midpoint());
        echo.lambda = Some(lambda);
        let input = BoundInput::new(&f, interval, lambda, args.n, args.s, args.q)?;
        hhbounds::bound(args.theorem, &input)
    })();
    let r = match result {
        Ok(r) => r,
        Err(e) => return Outcome::failure(e),
    };
    let variant = Variant::from(args.variant);
    let stated = r.bound_for(variant);
    let verdict = decide(r.dominated(variant), r.hypothesis.holds, args.certify);
    let mut warnings = Vec::new();
    if !r.hypothesis.holds {
        warnings.push(format!("hypothesis not verified: {}", r.hypothesis.description));
    }
    if variant == Variant::AsPrinted && r.theorem.has_printed_variant() {
        warnings.push("stated bound is the printed form".into());
    }
    let report = BoundReport {
        variant,
        stated,
        verdict,
        result: r,
    };
    Outcome::report(
        ReportEnvelope::new("bound", echo, report, warnings).to_json(),
        verdict_code(verdict),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Study {
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of log(bound) against log(pieces).
    pub bound_slope: f64,
    pub printed_bound_slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadReport {
    pub verdict: Verdict,
    pub result: QuadratureResult,
    pub study: Option<Study>,
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("pieces,value,bound,oracle_error\n");
    for r in rows {
        out.push_str(&format!("{},{:?},{:?},{:?}\n", r.pieces, r.value, r.bound, r.oracle_error));
    }
    out
}

pub fn cmd_quad(args: &QuadArgs) -> Outcome {
    let result = (|| {
        let f = args.function.build()?;
        let interval = Interval::new(args.a, args.b)?;
        let k = quadrature::uniform_partition(&interval, args.pieces)?;
        let r = quadrature::error_bound(&f, args.rule, &k, args.s, args.q)?;
        let study = match &args.study {
            Some(list) => {
                let rows = quadrature::convergence_study(&f, &interval, args.rule, args.s, args.q, list)?;
                let xs: Vec<f64> = rows.iter().map(|r| r.pieces as f64).collect();
                let bounds: Vec<f64> = rows.iter().map(|r| r.bound).collect();
                let printed: Vec<f64> = rows.iter().map(|r| r.printed_bound).collect();
                Some(Study {
                    bound_slope: quadrature::log_log_slope(&xs, &bounds),
                    printed_bound_slope: quadrature::log_log_slope(&xs, &printed),
                    rows,
                })
            }
            None => None,
        };
        Ok::<_, sconvex::Error>((r, study))
    })();
    let (r, study) = match result {
        Ok(v) => v,
        Err(e) => return Outcome::failure(e),
    };
    if let (Some(path), Some(study)) = (&args.csv, &study) {
        if let Err(e) = fs::write(path, study_csv(&study.rows)) {
            return Outcome::failure(format!("writing {}: {e}", path.display()));
        }
    }
    let verdict = decide(r.dominated(SLACK), r.hypothesis.holds, args.certify);
    let mut warnings = Vec::new();
    if !r.hypothesis.holds {
        warnings.push(format!("hypothesis not verified: {}", r.hypothesis.description));
    }
    let report = QuadReport {
        verdict,
        result: r,
        study,
    };
    Outcome::report(
        ReportEnvelope::new("quad", args.clone(), report, warnings).to_json(),
        verdict_code(verdict),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct MeansReport {
    pub means: Vec<MeanValue>,
    pub chain: Option<ChainCheck>,
}

pub fn cmd_means(args: &MeansArgs) -> Outcome {
    let pair = match PositivePair::new(args.a, args.b) {
        Ok(p) => p,
        Err(e) => return Outcome::usage(e),
    };
    let chain = args.chain.then(|| means::means_chain_check(&pair));
    let code = match chain {
        Some(c) if !c.holds => EXIT_VIOLATED,
        _ => EXIT_OK,
    };
    let report = MeansReport {
        means: means::all_means(&pair, args.p),
        chain,
    };
    Outcome::report(
        ReportEnvelope::new("means", args.clone(), report, Vec::new()).to_json(),
        code,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub summary: AuditSummary,
    pub records: Vec<AuditRecord>,
}

#[derive(Debug, Clone, Serialize)]
struct AuditEcho {
    claim: ClaimSelector,
    seed: u64,
    grid: GridSize,
}

pub fn cmd_audit(args: &AuditArgs) -> Outcome {
    let grid = GridSpec::new(args.grid, args.seed);
    let records = match args.claim {
        ClaimSelector::All => audit::audit_all(&grid),
        ClaimSelector::One(c) => audit::audit_claim(c, &grid),
    };
    let records = match records {
        Ok(r) => r,
        Err(e) => return Outcome::failure(e),
    };
    let summary = audit::audit_summary(&records);
    let warnings: Vec<String> = summary
        .claims
        .iter()
        .filter(|c| !c.certified && c.violations > 0)
        .map(|c| {
            format!(
                "{} ({}): {} of {} cases violated",
                c.claim,
                variant_name(c.variant),
                c.violations,
                c.cases
            )
        })
        .collect();
    let code = if summary.certified_violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATED
    };
    let echo = AuditEcho {
        claim: args.claim,
        seed: args.seed,
        grid: args.grid,
    };
    let json = ReportEnvelope::new("audit", echo, AuditReport { summary, records }, warnings).to_json();
    if let Some(path) = &args.json {
        if let Err(e) = fs::write(path, &json) {
            return Outcome::failure(format!("writing {}: {e}", path.display()));
        }
    }
    Outcome::report(json, code)
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::AsPrinted => "as_printed",
        Variant::Corrected => "corrected",
    }
}
