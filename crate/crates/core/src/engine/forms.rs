//! Syntactic query-form classification and the `m * 2^q` call bound.

use crate::error::EvalError;
use crate::query::Proposition;

/// Shapes for which the number of oracle calls stays linear in the query
/// size. `k` counts literals, `r` groups and `s` the size of each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    /// `Y1 & ... & Yk`
    Form1 { k: usize },
    /// `Y1 | ... | Yk`
    Form2 { k: usize },
    /// `(Y11 & ... & Y1s1) | ... | (Yr1 & ... & Yrsr)`
    Form3 { r: usize, s: Vec<usize> },
    /// `(Y11 | ... | Y1s1) & ... & (Yr1 | ... | Yrsr)`
    Form4 { r: usize, s: Vec<usize> },
    General,
}

fn all_literals(cs: &[Proposition]) -> bool {
    cs.iter().all(|c| matches!(c, Proposition::Lit(_)))
}

/// Sizes of groups that are literals or `inner`-joined literal lists.
fn group_sizes(cs: &[Proposition], inner_is_and: bool) -> Option<Vec<usize>> {
    cs.iter()
        .map(|c| match c {
            Proposition::Lit(_) => Some(1),
            Proposition::And(g) if inner_is_and && all_literals(g) => Some(g.len()),
            Proposition::Or(g) if !inner_is_and && all_literals(g) => Some(g.len()),
            _ => None,
        })
        .collect()
}

/// Classifies the raw (un-normalized) target proposition.
pub fn classify_query_form(target: &Proposition) -> QueryForm {
    match target {
        Proposition::Lit(_) => QueryForm::Form1 { k: 1 },
        Proposition::And(cs) if all_literals(cs) => QueryForm::Form1 { k: cs.len() },
        Proposition::Or(cs) if all_literals(cs) => QueryForm::Form2 { k: cs.len() },
        Proposition::Or(cs) => match group_sizes(cs, true) {
            Some(s) => QueryForm::Form3 { r: s.len(), s },
            None => QueryForm::General,
        },
        Proposition::And(cs) => match group_sizes(cs, false) {
            Some(s) => QueryForm::Form4 { r: s.len(), s },
            None => QueryForm::General,
        },
        Proposition::Not(_) => QueryForm::General,
    }
}

/// `m * 2^q`: the worst-case number of oracle calls for a marginal with `m`
/// literal occurrences and `q` spanning negations.
pub fn predicted_call_bound(m: u64, q: u32) -> Result<u64, EvalError> {
    if m == 0 {
        return Err(EvalError::InvalidArgument("query size m must be at least 1".into()));
    }
    if q > 62 {
        return Err(EvalError::BoundOverflow { m, q });
    }
    m.checked_mul(1u64 << q)
        .ok_or(EvalError::BoundOverflow { m, q })
}
