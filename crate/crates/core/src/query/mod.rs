//! Query language: literals, propositions, parsing and normalization.

mod normal;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::model::KnowledgeBase;

pub use normal::{
    canonicalize_conjunction, count_spanning_negations, eliminate_redundant_negations,
    strip_double_negations, to_cn_form, CanonicalTerm, Conjunction,
};
pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    /// "variable ≠ value"
    Negative,
}

/// One instantiated variable, possibly negated.
///
/// Ordering is `(variable, value, polarity)`, which is also the canonical
/// order of literals inside a conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub value: usize,
    pub polarity: Polarity,
}

impl Literal {
    pub fn positive(var: usize, value: usize) -> Self {
        Literal {
            var,
            value,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(var: usize, value: usize) -> Self {
        Literal {
            var,
            value,
            polarity: Polarity::Negative,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    pub fn negated(self) -> Self {
        let polarity = match self.polarity {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        };
        Literal { polarity, ..self }
    }

    /// On a two-valued variable `x != v` is rewritten as `x = other`.
    pub fn canonical(self, kb: &KnowledgeBase) -> Self {
        if !self.is_positive() && kb.variable(self.var).domain_size() == 2 {
            Literal::positive(self.var, 1 - self.value)
        } else {
            self
        }
    }

    pub fn holds(&self, assignment: &[usize]) -> bool {
        (assignment[self.var] == self.value) == self.is_positive()
    }

    pub fn display<'a>(&'a self, kb: &'a KnowledgeBase) -> impl fmt::Display + 'a {
        LiteralDisplay { lit: self, kb }
    }
}

struct LiteralDisplay<'a> {
    lit: &'a Literal,
    kb: &'a KnowledgeBase,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // printed in canonical form, which is what the parser produces
        let lit = self.lit.canonical(self.kb);
        let var = self.kb.variable(lit.var);
        let value = &var.values[lit.value];
        match (var.is_boolean(), lit.polarity) {
            (true, Polarity::Positive) if lit.value == 0 => write!(f, "{}", var.name),
            (true, Polarity::Positive) => write!(f, "!{}", var.name),
            (_, Polarity::Positive) => write!(f, "{}={}", var.name, value),
            (_, Polarity::Negative) => write!(f, "{}!={}", var.name, value),
        }
    }
}

/// A propositional formula over literals.
///
/// `And` and `Or` built through [`Proposition::and`] / [`Proposition::or`]
/// are flattened and have at least two children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Proposition {
    Lit(Literal),
    Not(Box<Proposition>),
    And(Vec<Proposition>),
    Or(Vec<Proposition>),
}

impl Proposition {
    pub fn lit(l: Literal) -> Self {
        Proposition::Lit(l)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Proposition) -> Self {
        Proposition::Not(Box::new(p))
    }

    pub fn and(children: impl IntoIterator<Item = Proposition>) -> Self {
        Self::flattened(children, true)
    }

    pub fn or(children: impl IntoIterator<Item = Proposition>) -> Self {
        Self::flattened(children, false)
    }

    fn flattened(children: impl IntoIterator<Item = Proposition>, conj: bool) -> Self {
        let mut out = Vec::new();
        for child in children {
            match child {
                Proposition::And(cs) if conj => out.extend(cs),
                Proposition::Or(cs) if !conj => out.extend(cs),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        if conj {
            Proposition::And(out)
        } else {
            Proposition::Or(out)
        }
    }

    /// Truth value under a full assignment.
    pub fn holds(&self, assignment: &[usize]) -> bool {
        match self {
            Proposition::Lit(l) => l.holds(assignment),
            Proposition::Not(p) => !p.holds(assignment),
            Proposition::And(cs) => cs.iter().all(|c| c.holds(assignment)),
            Proposition::Or(cs) => cs.iter().any(|c| c.holds(assignment)),
        }
    }

    /// Number of literal occurrences.
    pub fn variable_references(&self) -> usize {
        match self {
            Proposition::Lit(_) => 1,
            Proposition::Not(p) => p.variable_references(),
            Proposition::And(cs) | Proposition::Or(cs) => {
                cs.iter().map(Proposition::variable_references).sum()
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<usize>) {
        match self {
            Proposition::Lit(l) => {
                out.insert(l.var);
            }
            Proposition::Not(p) => p.collect_variables(out),
            Proposition::And(cs) | Proposition::Or(cs) => {
                cs.iter().for_each(|c| c.collect_variables(out))
            }
        }
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Proposition::Lit(_) => false,
            Proposition::Not(p) => p.contains_or(),
            Proposition::And(cs) => cs.iter().any(Proposition::contains_or),
            Proposition::Or(_) => true,
        }
    }

    /// Renders in the query grammar so that the output re-parses.
    pub fn display<'a>(&'a self, kb: &'a KnowledgeBase) -> impl fmt::Display + 'a {
        PropDisplay { prop: self, kb }
    }
}

struct PropDisplay<'a> {
    prop: &'a Proposition,
    kb: &'a KnowledgeBase,
}

impl PropDisplay<'_> {
    fn child(&self, p: &Proposition, f: &mut fmt::Formatter<'_>, parent_is_and: bool) -> fmt::Result {
        let wrap = match p {
            Proposition::And(_) => parent_is_and,
            Proposition::Or(_) => true,
            _ => false,
        };
        let inner = PropDisplay { prop: p, kb: self.kb };
        if wrap {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for PropDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prop {
            Proposition::Lit(l) => write!(f, "{}", l.display(self.kb)),
            Proposition::Not(p) => write!(f, "!({})", PropDisplay { prop: p, kb: self.kb }),
            Proposition::And(cs) | Proposition::Or(cs) => {
                let is_and = matches!(self.prop, Proposition::And(_));
                let sep = if is_and { " & " } else { " | " };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.child(c, f, is_and)?;
                }
                Ok(())
            }
        }
    }
}

/// `P(target | evidence)`; no evidence means an unconditional marginal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryExpr {
    pub target: Proposition,
    pub evidence: Option<Proposition>,
}

impl QueryExpr {
    pub fn marginal(target: Proposition) -> Self {
        QueryExpr {
            target,
            evidence: None,
        }
    }

    pub fn conditional(target: Proposition, evidence: Proposition) -> Self {
        QueryExpr {
            target,
            evidence: Some(evidence),
        }
    }

    /// Combined literal occurrences of target and evidence.
    pub fn variable_references(&self) -> usize {
        self.target.variable_references()
            + self.evidence.as_ref().map_or(0, Proposition::variable_references)
    }

    pub fn display<'a>(&'a self, kb: &'a KnowledgeBase) -> impl fmt::Display + 'a {
        QueryDisplay { query: self, kb }
    }
}

struct QueryDisplay<'a> {
    query: &'a QueryExpr,
    kb: &'a KnowledgeBase,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({}", self.query.target.display(self.kb))?;
        if let Some(ev) = &self.query.evidence {
            write!(f, " given {}", ev.display(self.kb))?;
        }
        f.write_str(")")
    }
}
