//! Call-count benchmarks over generated query families.
//!
//! Every family is evaluated against a knowledge base of independent fair
//! coins `x1..xn`, so oracle calls are cheap and well defined and the counts
//! reflect only the reduction itself.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EvalConfig, Evaluator};
use crate::error::{EvalError, ModelError};
use crate::model::{load_kb, KnowledgeBase};
use crate::oracle::EnumerationOracle;
use crate::query::{Literal, Proposition};

/// Runs whose predicted bound exceeds this many calls are refused.
pub const MAX_PREDICTED_CALLS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `!(x1 & !(x2 & ... !(x_{m-1} & !x_m)))`
    Nested,
    /// `x1 & ... & xm`
    Form1,
    /// `x1 | ... | xm`
    Form2,
    /// `r` conjunctive groups joined by `|`
    Form3,
    /// `r` disjunctive groups joined by `&`
    Form4,
    /// `!(x1 & x2) & !(x2 & x3) & ... & !(x_{m-1} & x_m)`: a conjunction of
    /// negated groups, where both halves of every split keep the remaining
    /// negations.
    NegChain,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Nested,
        Family::Form1,
        Family::Form2,
        Family::Form3,
        Family::Form4,
        Family::NegChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Nested => "nested",
            Family::Form1 => "form1",
            Family::Form2 => "form2",
            Family::Form3 => "form3",
            Family::Form4 => "form4",
            Family::NegChain => "negchain",
        }
    }

    /// Smallest size parameter the family accepts.
    pub fn min_m(self, r: usize) -> usize {
        match self {
            Family::Nested | Family::NegChain => 2,
            Family::Form1 | Family::Form2 => 1,
            Family::Form3 | Family::Form4 => r.max(1),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| BenchError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    /// Size parameter: the number of distinct variables in the query.
    pub m: usize,
    /// Group count for forms 3 and 4.
    pub r: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown family `{0}` (expected nested, form1, form2, form3, form4 or negchain)")]
    UnknownFamily(String),
    #[error("invalid size range: {0}")]
    BadRange(String),
    #[error("{family} at m = {m} predicts {bound} oracle calls, over the limit of {MAX_PREDICTED_CALLS}")]
    TooExpensive { family: Family, m: usize, bound: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Parses `A..B` (inclusive) or a single number.
pub fn parse_range(text: &str) -> Result<(usize, usize), BenchError> {
    let bad = || BenchError::BadRange(format!("`{text}` is not of the form A..B"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (text.trim(), text.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(BenchError::BadRange(format!("{lo} > {hi}")));
    }
    Ok((lo, hi))
}

/// JSON document for `n` independent fair coins `x1..xn`.
pub fn fair_coin_document(n: usize) -> String {
    let variables: Vec<String> = (1..=n)
        .map(|i| format!(r#"{{"name": "x{i}", "values": ["t", "f"]}}"#))
        .collect();
    let network: Vec<String> = (1..=n)
        .map(|i| format!(r#"{{"var": "x{i}", "parents": [], "cpt": [[0.5, 0.5]]}}"#))
        .collect();
    format!(
        r#"{{"name": "coins{n}", "variables": [{}], "network": [{}]}}"#,
        variables.join(", "),
        network.join(", ")
    )
}

pub fn fair_coin_kb(n: usize) -> KnowledgeBase {
    load_kb(&fair_coin_document(n)).expect("generated document is valid")
}

fn x(kb: &KnowledgeBase, i: usize) -> Proposition {
    let var = kb.variable_by_name(&format!("x{i}")).expect("bench variable");
    Proposition::Lit(Literal::positive(var.id, 0))
}

fn not_x(kb: &KnowledgeBase, i: usize) -> Proposition {
    let var = kb.variable_by_name(&format!("x{i}")).expect("bench variable");
    Proposition::Lit(Literal::positive(var.id, 1))
}

/// `N_m = !(x1 & !(x2 & ... !(x_{m-1} & !x_m)...))`, for `m >= 2`.
pub fn nested_query(kb: &KnowledgeBase, m: usize) -> Proposition {
    assert!(m >= 2, "nested family needs m >= 2");
    let mut inner = Proposition::and([x(kb, m - 1), not_x(kb, m)]);
    for i in (1..m - 1).rev() {
        inner = Proposition::and([x(kb, i), Proposition::not(inner)]);
    }
    Proposition::not(inner)
}

/// Splits `m` literals into `r` groups of near-equal size.
fn groups(m: usize, r: usize) -> Vec<std::ops::RangeInclusive<usize>> {
    let mut out = Vec::with_capacity(r);
    let mut next = 1;
    for g in 0..r {
        let size = m / r + usize::from(g < m % r);
        out.push(next..=next + size - 1);
        next += size;
    }
    out
}

/// The target proposition of one family member.
pub fn generate(kb: &KnowledgeBase, spec: FamilySpec) -> Result<Proposition, BenchError> {
    let FamilySpec { family, m, r } = spec;
    if m < family.min_m(r) || m > kb.len() {
        return Err(BenchError::BadRange(format!(
            "{family} needs {} <= m <= {}, got m = {m}",
            family.min_m(r),
            kb.len()
        )));
    }
    if matches!(family, Family::Form3 | Family::Form4) && r == 0 {
        return Err(BenchError::BadRange("r must be at least 1".into()));
    }
    let vars = |range: std::ops::RangeInclusive<usize>| range.map(|i| x(kb, i)).collect::<Vec<_>>();
    Ok(match family {
        Family::Nested => nested_query(kb, m),
        Family::Form1 => Proposition::and(vars(1..=m)),
        Family::Form2 => Proposition::or(vars(1..=m)),
        Family::Form3 => Proposition::or(groups(m, r).into_iter().map(|g| Proposition::and(vars(g)))),
        Family::Form4 => Proposition::and(groups(m, r).into_iter().map(|g| Proposition::or(vars(g)))),
        Family::NegChain => Proposition::and(
            (1..m).map(|i| Proposition::not(Proposition::and([x(kb, i), x(kb, i + 1)]))),
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: String,
    /// Literal occurrences in the generated query.
    pub m: usize,
    pub q: usize,
    pub predicted_bound: u64,
    pub sv_calls_cache_off: u64,
    pub sv_calls_cache_on: u64,
    pub value: f64,
    pub wall_time_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub family: Family,
    pub m_lo: usize,
    pub m_hi: usize,
    pub r: usize,
    /// Which run supplies `value` and `wall_time_us`.
    pub cache: bool,
    /// When false, `wall_time_us` is written as 0 so output is reproducible.
    pub timing: bool,
}

impl BenchConfig {
    pub fn new(family: Family, m_lo: usize, m_hi: usize) -> Self {
        BenchConfig {
            family,
            m_lo,
            m_hi,
            r: 2,
            cache: true,
            timing: true,
        }
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let kb = fair_coin_kb(cfg.m_hi.max(1));
    let specs: Vec<FamilySpec> = (cfg.m_lo..=cfg.m_hi)
        .map(|m| FamilySpec {
            family: cfg.family,
            m,
            r: cfg.r,
        })
        .collect();

    let mut queries = Vec::with_capacity(specs.len());
    for spec in &specs {
        let target = generate(&kb, *spec)?;
        let probe = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default());
        let (m, q) = probe.marginal_metrics(&target);
        let bound = crate::engine::predicted_call_bound(m as u64, q as u32).unwrap_or(u64::MAX);
        if bound > MAX_PREDICTED_CALLS {
            return Err(BenchError::TooExpensive {
                family: cfg.family,
                m: spec.m,
                bound,
            });
        }
        queries.push(target);
    }

    let mut rows = Vec::with_capacity(queries.len());
    for target in &queries {
        let mut off = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default().with_cache(false));
        let t0 = Instant::now();
        let cold = off.eval_marginal(target)?;
        let t_off = t0.elapsed();

        let mut on = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default().with_cache(true));
        let t0 = Instant::now();
        let warm = on.eval_marginal(target)?;
        let t_on = t0.elapsed();

        let (chosen, elapsed) = if cfg.cache { (&warm, t_on) } else { (&cold, t_off) };
        rows.push(BenchRow {
            family: cfg.family.name().to_string(),
            m: cold.stats.m,
            q: cold.stats.q,
            predicted_bound: cold.stats.predicted_bound,
            sv_calls_cache_off: cold.stats.sv_calls,
            sv_calls_cache_on: warm.stats.sv_calls,
            value: chosen.value,
            wall_time_us: if cfg.timing {
                elapsed.as_micros() as u64
            } else {
                0
            },
        });
    }
    Ok(rows)
}

/// Header: `family,m,q,predicted_bound,sv_calls_cache_off,sv_calls_cache_on,value,wall_time_us`.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "family",
            "m",
            "q",
            "predicted_bound",
            "sv_calls_cache_off",
            "sv_calls_cache_on",
            "value",
            "wall_time_us",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
