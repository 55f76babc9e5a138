//! Single-variable (SV) probability oracles.
//!
//! An oracle answers `P(target | evidence)` where `target` is one literal and
//! `evidence` is a conjunction of literals over other variables. Everything
//! else in the crate is built on top of this one primitive.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use crate::error::OracleError;
use crate::model::{Assignments, Body, KnowledgeBase};
use crate::query::Literal;

/// Evidence mass at or below this is treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvQuery {
    pub target: Literal,
    pub evidence: Vec<Literal>,
}

impl SvQuery {
    pub fn new(target: Literal, evidence: Vec<Literal>) -> Self {
        SvQuery { target, evidence }
    }

    pub fn has_negative_literal(&self) -> bool {
        !self.target.is_positive() || self.evidence.iter().any(|l| !l.is_positive())
    }

    /// Checks value ranges, that the target variable is absent from the
    /// evidence and that no evidence variable repeats.
    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), OracleError> {
        for lit in std::iter::once(&self.target).chain(&self.evidence) {
            if lit.var >= kb.len() || lit.value >= kb.variable(lit.var).domain_size() {
                return Err(OracleError::InvalidQuery(format!(
                    "literal {lit:?} is outside the knowledge base"
                )));
            }
        }
        let mut seen = vec![false; kb.len()];
        seen[self.target.var] = true;
        for lit in &self.evidence {
            if std::mem::replace(&mut seen[lit.var], true) {
                return Err(OracleError::InvalidQuery(format!(
                    "variable `{}` appears more than once",
                    kb.variable(lit.var).name
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self, kb: &KnowledgeBase) -> String {
        let mut s = format!("P({}", self.target.display(kb));
        if !self.evidence.is_empty() {
            s.push_str(" given ");
            s.push_str(&evidence_text(kb, &self.evidence));
        }
        s.push(')');
        s
    }
}

pub(crate) fn evidence_text(kb: &KnowledgeBase, lits: &[Literal]) -> String {
    lits.iter()
        .map(|l| l.display(kb).to_string())
        .collect::<Vec<_>>()
        .join(" & ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCapabilities {
    /// Whether literals of the form `X != v` may appear in a query.
    pub supports_negative_literals: bool,
}

pub trait SvOracle {
    fn capabilities(&self) -> OracleCapabilities;

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError>;
}

impl<T: SvOracle + ?Sized> SvOracle for &T {
    fn capabilities(&self) -> OracleCapabilities {
        (**self).capabilities()
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        (**self).sv_prob(kb, query)
    }
}

impl<T: SvOracle + ?Sized> SvOracle for Box<T> {
    fn capabilities(&self) -> OracleCapabilities {
        (**self).capabilities()
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        (**self).sv_prob(kb, query)
    }
}

/// Exact oracle: two sums over the joint distribution.
///
/// For a network only the ancestral closure of the query variables is
/// enumerated; every other variable sums out to one.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerationOracle;

impl EnumerationOracle {
    /// Returns `(mass of target & evidence, mass of evidence)`.
    fn masses(kb: &KnowledgeBase, query: &SvQuery) -> (f64, f64) {
        let mut joint = 0.0;
        let mut evidence = 0.0;
        match kb.body() {
            Body::Joint(_) => {
                for a in kb.assignments() {
                    if query.evidence.iter().all(|l| l.holds(&a)) {
                        let p = kb.joint_unchecked(&a);
                        evidence += p;
                        if query.target.holds(&a) {
                            joint += p;
                        }
                    }
                }
            }
            Body::Network(net) => {
                let touched = std::iter::once(query.target.var).chain(query.evidence.iter().map(|l| l.var));
                let relevant = net.ancestral_closure(touched);
                let relevant_ids: Vec<usize> = (0..kb.len()).filter(|&v| relevant[v]).collect();
                // variables pinned by a positive literal are not enumerated
                let mut pinned: Vec<Option<usize>> = vec![None; kb.len()];
                for l in query.evidence.iter().filter(|l| l.is_positive()) {
                    pinned[l.var] = Some(l.value);
                }
                let sizes: Vec<usize> = relevant_ids
                    .iter()
                    .map(|&v| pinned[v].map_or(kb.variable(v).domain_size(), |_| 1))
                    .collect();
                let mut full = vec![0; kb.len()];
                for partial in Assignments::new(sizes) {
                    for (&v, &x) in relevant_ids.iter().zip(&partial) {
                        full[v] = pinned[v].unwrap_or(x);
                    }
                    if !query.evidence.iter().all(|l| l.holds(&full)) {
                        continue;
                    }
                    let p: f64 = relevant_ids
                        .iter()
                        .map(|&v| net.local_probability(v, &full, kb.variables()))
                        .product();
                    evidence += p;
                    if query.target.holds(&full) {
                        joint += p;
                    }
                }
            }
        }
        (joint, evidence)
    }
}

impl SvOracle for EnumerationOracle {
    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities {
            supports_negative_literals: true,
        }
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        query.validate(kb)?;
        let (joint, evidence) = Self::masses(kb, query);
        if evidence <= ZERO_THRESHOLD {
            return Err(OracleError::ZeroEvidence {
                evidence: evidence_text(kb, &query.evidence),
            });
        }
        Ok((joint / evidence).clamp(0.0, 1.0))
    }
}

/// Call counts recorded by a [`CountingOracle`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SvCallCounter {
    pub calls: u64,
    /// Calls keyed by evidence length.
    pub by_evidence_len: BTreeMap<usize, u64>,
}

/// Delegates to an inner oracle and counts every call, failed ones included.
#[derive(Debug, Default)]
pub struct CountingOracle<O> {
    inner: O,
    calls: Cell<u64>,
    histogram: RefCell<BTreeMap<usize, u64>>,
}

impl<O: SvOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            calls: Cell::new(0),
            histogram: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn counter(&self) -> SvCallCounter {
        SvCallCounter {
            calls: self.calls.get(),
            by_evidence_len: self.histogram.borrow().clone(),
        }
    }

    pub fn reset(&self) {
        self.calls.set(0);
        self.histogram.borrow_mut().clear();
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SvOracle> SvOracle for CountingOracle<O> {
    fn capabilities(&self) -> OracleCapabilities {
        self.inner.capabilities()
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        self.calls.set(self.calls.get() + 1);
        *self
            .histogram
            .borrow_mut()
            .entry(query.evidence.len())
            .or_default() += 1;
        self.inner.sv_prob(kb, query)
    }
}

/// Restricts an oracle to positive instantiations only.
#[derive(Debug, Clone, Copy, Default)]
pub struct StrictSvOracle<O> {
    inner: O,
}

impl<O: SvOracle> StrictSvOracle<O> {
    pub fn new(inner: O) -> Self {
        StrictSvOracle { inner }
    }
}

impl<O: SvOracle> SvOracle for StrictSvOracle<O> {
    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities {
            supports_negative_literals: false,
        }
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        if query.has_negative_literal() {
            return Err(OracleError::Capability(query.describe(kb)));
        }
        self.inner.sv_prob(kb, query)
    }
}
