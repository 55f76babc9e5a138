//! Command-line front end: `eval`, `trace`, `verify` and `bench`.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 undefined
//! conditional, 3 oracle or internal error (including a failed `verify`).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{self, BenchConfig, BenchError, Family};
use crate::engine::{EvalConfig, EvalResult, Evaluator};
use crate::error::{EvalError, ModelError, OracleError, QueryError};
use crate::model::{load_kb_file, KnowledgeBase};
use crate::oracle::{EnumerationOracle, StrictSvOracle, SvOracle};
use crate::query::parse;
use crate::verify::{self, KbKind, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNDEFINED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ppq", version, about = "Propositional probability queries via single-variable oracle calls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one query against a knowledge base.
    Eval(EvalArgs),
    /// Print the derivation tree of one query.
    Trace(TraceArgs),
    /// Compare the evaluator with brute-force enumeration on random cases.
    Verify(VerifyArgs),
    /// Count oracle calls over a generated query family and write CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Joint,
    Bn,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Knowledge base file (JSON).
    kb: PathBuf,
    /// Query, e.g. "P(a | b given !c)".
    query: String,
    #[arg(long, value_enum, default_value = "on")]
    cache: Switch,
    /// Fold negations over one variable into literals.
    #[arg(long, value_enum, default_value = "on")]
    absorb: Switch,
    /// Use an oracle that rejects `X != v` literals.
    #[arg(long)]
    strict_oracle: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Include the derivation tree.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    query: QueryArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Variables per random knowledge base (at most 12).
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Defaults to $PPQ_SEED, then 7.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "joint")]
    kind: Kind,
    /// Largest variable domain; 2 keeps every variable binary.
    #[arg(long, default_value_t = 2)]
    max_domain: usize,
    #[arg(long, value_enum, default_value = "on")]
    cache: Switch,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// nested, form1, form2, form3, form4 or negchain.
    #[arg(long)]
    family: String,
    /// Inclusive size range, `A..B`.
    #[arg(long)]
    m: String,
    /// Groups for form3 and form4.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Which run supplies the `value` and `wall_time_us` columns.
    #[arg(long, value_enum, default_value = "on")]
    cache: Switch,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write 0 for wall time so the CSV is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::new(EXIT_INPUT, e)
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        Failure::new(EXIT_INPUT, e)
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::UndefinedConditional { .. }
            | EvalError::Oracle(OracleError::ZeroEvidence { .. }) => EXIT_UNDEFINED,
            EvalError::InvalidArgument(_) => EXIT_INPUT,
            _ => EXIT_INTERNAL,
        };
        Failure::new(code, e)
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Eval(e) => e.into(),
            BenchError::Csv(_) => Failure::new(EXIT_INTERNAL, e),
            _ => Failure::new(EXIT_INPUT, e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_INTERNAL, e)
    }
}

/// Formats with 17 significant digits, enough to read back the same double.
pub fn format_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let (int, frac) = digits.split_at(exp as usize + 1);
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(&a.query, a.trace, out),
        Command::Trace(a) => cmd_trace(&a.query, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn evaluate(a: &QueryArgs, trace: bool) -> Result<(KnowledgeBase, String, EvalResult), Failure> {
    let kb = load_kb_file(&a.kb)?;
    let query = parse(&a.query, &kb)?;
    let config = EvalConfig::default()
        .with_cache(a.cache.on())
        .with_absorption(a.absorb.on())
        .with_trace(trace);
    let oracle: Box<dyn SvOracle> = if a.strict_oracle {
        Box::new(StrictSvOracle::new(EnumerationOracle))
    } else {
        Box::new(EnumerationOracle)
    };
    let result = Evaluator::new(&kb, oracle, config).eval_conditional(&query)?;
    let shown = query.display(&kb).to_string();
    Ok((kb, shown, result))
}

fn cmd_eval(a: &QueryArgs, trace: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let (_, query, r) = evaluate(a, trace)?;
    let s = &r.stats;
    if a.json {
        let doc = json!({
            "query": query,
            "value": r.value,
            "value_text": format_value(r.value),
            "stats": {
                "sv_calls": s.sv_calls,
                "cache_hits": s.cache_hits,
                "cache_misses": s.cache_misses,
                "negation_eliminations": s.negation_eliminations,
                "m": s.m,
                "q": s.q,
                "predicted_bound": s.predicted_bound,
            },
            "trace": r.trace,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        return Ok(());
    }
    writeln!(out, "query: {query}")?;
    writeln!(out, "value: {}", format_value(r.value))?;
    writeln!(out, "sv_calls: {}", s.sv_calls)?;
    writeln!(out, "cache_hits: {}", s.cache_hits)?;
    writeln!(out, "m: {}", s.m)?;
    writeln!(out, "q: {}", s.q)?;
    writeln!(out, "predicted_bound: {}", s.predicted_bound)?;
    if let Some(t) = &r.trace {
        write!(out, "trace:\n{}", t.render())?;
    }
    Ok(())
}

fn cmd_trace(a: &QueryArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (_, _, r) = evaluate(a, true)?;
    let tree = r.trace.expect("trace enabled");
    if a.json {
        writeln!(out, "{}", tree.to_json())?;
    } else {
        write!(out, "{}", tree.render())?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.n == 0 || a.n > 12 {
        return Err(Failure::new(EXIT_INPUT, format!("--n must be between 1 and 12, got {}", a.n)));
    }
    if a.max_domain < 2 {
        return Err(Failure::new(EXIT_INPUT, "--max-domain must be at least 2"));
    }
    let cfg = VerifyConfig {
        n: a.n,
        trials: a.trials,
        seed: a.seed.unwrap_or_else(verify::default_seed),
        kind: match a.kind {
            Kind::Joint => KbKind::Joint,
            Kind::Bn => KbKind::Network,
        },
        max_domain: a.max_domain,
        cache: a.cache.on(),
        inject_fault: a.inject_fault,
    };
    let report = verify::run_verify(&cfg);
    let kind = match cfg.kind {
        KbKind::Joint => "joint",
        KbKind::Network => "bn",
    };
    writeln!(out, "verify: kind={kind} n={} trials={} seed={}", cfg.n, cfg.trials, cfg.seed)?;
    writeln!(out, "comparisons: {}", report.comparisons)?;
    writeln!(out, "max_deviation: {:e}", report.max_deviation)?;
    match &report.first_failure {
        None => {
            writeln!(out, "result: PASS (tolerance {:e})", verify::VERIFY_TOLERANCE)?;
            Ok(())
        }
        Some(f) => {
            writeln!(out, "result: FAIL ({} of {} comparisons)", report.failures, report.comparisons)?;
            let got = match &f.got {
                Ok(v) => format_value(*v),
                Err(e) => e.clone(),
            };
            writeln!(
                out,
                "first failure: trial {} (case seed {}): {} expected {} got {}",
                f.trial,
                f.trial_seed,
                f.query,
                format_value(f.expected),
                got
            )?;
            Err(Failure::new(
                EXIT_INTERNAL,
                format!("verification failed on {} (case seed {})", f.query, f.trial_seed),
            ))
        }
    }
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let family: Family = a.family.parse()?;
    let (m_lo, m_hi) = bench::parse_range(&a.m)?;
    let cfg = BenchConfig {
        family,
        m_lo,
        m_hi,
        r: a.r,
        cache: a.cache.on(),
        timing: !a.no_timing,
    };
    let rows = bench::run_bench(&cfg)?;
    match &a.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot create {}: {e}", path.display())))?;
            bench::write_csv(&rows, BufWriter::new(file))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => bench::write_csv(&rows, &mut *out)?,
    }
    Ok(())
}
