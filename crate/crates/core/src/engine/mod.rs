//! The query evaluator.
//!
//! Marginals are normalized into a conjunction of literals and negated
//! groups. Literal-only conjunctions go through the chain rule, one oracle
//! call per literal; otherwise the first negated group `A` (in canonical
//! order) is removed with `P(!A & R) = P(R) - P(A & R)` and both sides recurse.
//! Division happens only once, at the top-level conditional.

mod conj;
mod forms;
mod trace;

use std::collections::HashMap;

use crate::error::EvalError;
use crate::model::KnowledgeBase;
use crate::oracle::{CountingOracle, SvCallCounter, SvOracle, SvQuery, ZERO_THRESHOLD};
use crate::query::{
    count_spanning_negations, eliminate_redundant_negations, strip_double_negations, to_cn_form,
    CanonicalTerm, Literal, Proposition, QueryExpr,
};

use conj::{Conj, Simplified, Simplifier};
pub use forms::{classify_query_form, predicted_call_bound, QueryForm};
pub use trace::{DerivationNode, Rule};

/// The result of [`classify_query_form`].
pub type QueryFormClassification = QueryForm;

/// Final values may drift this far outside `[0, 1]` from rounding before
/// they are treated as an oracle fault.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub cache_enabled: bool,
    pub trace_enabled: bool,
    /// Fold negations over a single variable into literal polarity instead of
    /// removing them with a subtraction.
    pub absorb_negative_literals: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            cache_enabled: true,
            trace_enabled: false,
            absorb_negative_literals: true,
        }
    }
}

impl EvalConfig {
    pub fn with_cache(mut self, on: bool) -> Self {
        self.cache_enabled = on;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace_enabled = on;
        self
    }

    pub fn with_absorption(mut self, on: bool) -> Self {
        self.absorb_negative_literals = on;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub sv_calls: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub negation_eliminations: u64,
    pub max_recursion_depth: usize,
    /// Literal occurrences in target and evidence.
    pub m: usize,
    /// Spanning negations after normalization of `target & evidence`.
    pub q: usize,
    /// `m * 2^q` for a marginal; for a conditional, the sum of that bound over
    /// the two marginals evaluated. Saturates at `u64::MAX`.
    pub predicted_bound: u64,
    pub calls_by_evidence_len: std::collections::BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub stats: EvalStats,
    pub trace: Option<DerivationNode>,
}

struct Step {
    value: f64,
    node: Option<DerivationNode>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counters {
    cache_hits: u64,
    cache_misses: u64,
    negation_eliminations: u64,
}

/// Evaluates queries against one knowledge base.
///
/// The cache lives as long as the evaluator and is only valid for its
/// knowledge base, which is why the base is fixed at construction.
pub struct Evaluator<'kb, O: SvOracle> {
    kb: &'kb KnowledgeBase,
    oracle: CountingOracle<O>,
    config: EvalConfig,
    cache: HashMap<String, f64>,
    counters: Counters,
    max_depth: usize,
}

impl<'kb, O: SvOracle> Evaluator<'kb, O> {
    pub fn new(kb: &'kb KnowledgeBase, oracle: O, config: EvalConfig) -> Self {
        Evaluator {
            kb,
            oracle: CountingOracle::new(oracle),
            config,
            cache: HashMap::new(),
            counters: Counters::default(),
            max_depth: 0,
        }
    }

    pub fn kb(&self) -> &'kb KnowledgeBase {
        self.kb
    }

    pub fn config(&self) -> EvalConfig {
        self.config
    }

    pub fn set_config(&mut self, config: EvalConfig) {
        self.config = config;
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// Oracle calls issued since construction.
    pub fn sv_calls(&self) -> u64 {
        self.oracle.calls()
    }

    pub fn call_counter(&self) -> SvCallCounter {
        self.oracle.counter()
    }

    pub fn oracle(&self) -> &O {
        self.oracle.inner()
    }

    fn simplifier(&self) -> Simplifier<'kb> {
        Simplifier {
            kb: self.kb,
            absorb: self.config.absorb_negative_literals,
            negatives_ok: self.oracle.capabilities().supports_negative_literals,
        }
    }

    fn normalize(&self, p: &Proposition) -> Proposition {
        let cn = to_cn_form(p);
        if self.config.absorb_negative_literals {
            eliminate_redundant_negations(&cn)
        } else {
            strip_double_negations(&cn)
        }
    }

    /// `(m, q)` of a marginal.
    pub fn marginal_metrics(&self, p: &Proposition) -> (usize, usize) {
        let normal = eliminate_redundant_negations(&to_cn_form(p));
        (p.variable_references(), count_spanning_negations(&normal))
    }

    /// `P(target | evidence)`, or `P(target)` when there is no evidence.
    pub fn eval_conditional(&mut self, query: &QueryExpr) -> Result<EvalResult, EvalError> {
        let Some(evidence) = &query.evidence else {
            return self.eval_marginal(&query.target);
        };
        let start = self.begin();
        let joint = Proposition::and([query.target.clone(), evidence.clone()]);

        let den = self.marginal(evidence, 0)?;
        if den.value <= ZERO_THRESHOLD {
            return Err(EvalError::UndefinedConditional {
                evidence: evidence.display(self.kb).to_string(),
            });
        }
        let num = self.marginal(&joint, 0)?;
        let value = num.value / den.value;
        let node = self.config.trace_enabled.then(|| DerivationNode {
            rule: Rule::Step1,
            expr: query.display(self.kb).to_string(),
            value,
            children: num.node.into_iter().chain(den.node).collect(),
        });

        let (m, q) = self.marginal_metrics(&joint);
        let (m_ev, q_ev) = self.marginal_metrics(evidence);
        let bound = bound_or_max(m, q).saturating_add(bound_or_max(m_ev, q_ev));
        self.finish(start, value, node, m, q, bound)
    }

    /// `P(p)`.
    pub fn eval_marginal(&mut self, p: &Proposition) -> Result<EvalResult, EvalError> {
        let start = self.begin();
        let step = self.marginal(p, 0)?;
        let (m, q) = self.marginal_metrics(p);
        self.finish(start, step.value, step.node, m, q, bound_or_max(m, q))
    }

    /// Chain-rule product for a conjunction of literals, right to left.
    pub fn chain_rule(&mut self, term: &CanonicalTerm) -> Result<f64, EvalError> {
        let key = Conj {
            lits: term.literals().to_vec(),
            negs: Vec::new(),
        }
        .key(self.kb);
        Ok(self.chain(term.literals(), key)?.value)
    }

    /// One negation-removal step on `p`, recursing fully into both halves.
    pub fn eliminate_negation(&mut self, p: &Proposition) -> Result<f64, EvalError> {
        let lowered = Conj::from_cn(&self.normalize(p));
        match self.simplifier().simplify(lowered) {
            Simplified::Conj(c) if !c.negs.is_empty() => Ok(self.neg_elim(c, 0)?.value),
            _ => Err(EvalError::InvalidArgument(format!(
                "`{}` has no negated group to eliminate",
                p.display(self.kb)
            ))),
        }
    }

    fn begin(&mut self) -> (u64, Counters, SvCallCounter) {
        self.max_depth = 0;
        (self.oracle.calls(), self.counters, self.oracle.counter())
    }

    fn finish(
        &mut self,
        (calls0, counters0, hist0): (u64, Counters, SvCallCounter),
        raw: f64,
        trace: Option<DerivationNode>,
        m: usize,
        q: usize,
        predicted_bound: u64,
    ) -> Result<EvalResult, EvalError> {
        if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&raw) {
            return Err(EvalError::Inconsistent(raw));
        }
        let mut hist = self.oracle.counter().by_evidence_len;
        for (len, n) in hist0.by_evidence_len {
            if let Some(x) = hist.get_mut(&len) {
                *x -= n;
            }
        }
        hist.retain(|_, n| *n > 0);
        let stats = EvalStats {
            sv_calls: self.oracle.calls() - calls0,
            cache_hits: self.counters.cache_hits - counters0.cache_hits,
            cache_misses: self.counters.cache_misses - counters0.cache_misses,
            negation_eliminations: self.counters.negation_eliminations
                - counters0.negation_eliminations,
            max_recursion_depth: self.max_depth,
            m,
            q,
            predicted_bound,
            calls_by_evidence_len: hist,
        };
        Ok(EvalResult {
            value: raw.clamp(0.0, 1.0),
            stats,
            trace,
        })
    }

    fn marginal(&mut self, p: &Proposition, depth: usize) -> Result<Step, EvalError> {
        let lowered = Conj::from_cn(&self.normalize(p));
        let step = self.eval_conj(lowered, depth)?;
        if self.config.trace_enabled && p.contains_or() {
            let node = DerivationNode {
                rule: Rule::DeMorgan,
                expr: p.display(self.kb).to_string(),
                value: step.value,
                children: step.node.into_iter().collect(),
            };
            return Ok(Step {
                value: step.value,
                node: Some(node),
            });
        }
        Ok(step)
    }

    fn eval_conj(&mut self, c: Conj, depth: usize) -> Result<Step, EvalError> {
        self.max_depth = self.max_depth.max(depth);
        let trace = self.config.trace_enabled;
        let shown = trace.then(|| c.key(self.kb));
        let c = match self.simplifier().simplify(c) {
            Simplified::False => {
                return Ok(Step {
                    value: 0.0,
                    node: shown.map(|e| DerivationNode::leaf(Rule::Contradiction, e, 0.0)),
                })
            }
            Simplified::Conj(c) if c.is_empty() => {
                return Ok(Step {
                    value: 1.0,
                    node: trace.then(|| DerivationNode::leaf(Rule::Tautology, "true", 1.0)),
                })
            }
            Simplified::Conj(c) => c,
        };

        let key = c.key(self.kb);
        if self.config.cache_enabled {
            if let Some(&value) = self.cache.get(&key) {
                self.counters.cache_hits += 1;
                return Ok(Step {
                    value,
                    node: trace.then(|| DerivationNode::leaf(Rule::CacheHit, key, value)),
                });
            }
            self.counters.cache_misses += 1;
        }

        let step = if c.negs.is_empty() {
            self.chain(&c.lits, key.clone())?
        } else {
            self.neg_elim(c, depth)?
        };
        if self.config.cache_enabled {
            self.cache.insert(key, step.value);
        }
        Ok(step)
    }

    fn neg_elim(&mut self, c: Conj, depth: usize) -> Result<Step, EvalError> {
        let expr = self.config.trace_enabled.then(|| c.key(self.kb));
        let Conj { lits, mut negs } = c;
        let removed = negs.remove(0);
        let rest = Conj {
            lits: lits.clone(),
            negs: negs.clone(),
        };
        let mut with_removed = Conj {
            lits,
            negs,
        };
        with_removed.lits.extend(removed.lits);
        with_removed.negs.extend(removed.negs);

        self.counters.negation_eliminations += 1;
        let r = self.eval_conj(rest, depth + 1)?;
        let ar = self.eval_conj(with_removed, depth + 1)?;
        let value = r.value - ar.value;
        Ok(Step {
            value,
            node: expr.map(|expr| DerivationNode {
                rule: Rule::NegElim,
                expr,
                value,
                children: r.node.into_iter().chain(ar.node).collect(),
            }),
        })
    }

    fn suffix_key(&self, lits: &[Literal]) -> String {
        Proposition::and(lits.iter().copied().map(Proposition::Lit))
            .display(self.kb)
            .to_string()
    }

    /// `P(l0 | l1..) * P(l1 | l2..) * ... * P(ln)`, evaluated from the right.
    /// Every suffix product is cached; a cached suffix skips its factors.
    fn chain(&mut self, lits: &[Literal], key: String) -> Result<Step, EvalError> {
        let trace = self.config.trace_enabled;
        let n = lits.len();
        let mut children = Vec::new();
        let mut start = n;
        let mut running = 1.0;
        if self.config.cache_enabled {
            for i in 1..n {
                let k = self.suffix_key(&lits[i..]);
                if let Some(&v) = self.cache.get(&k) {
                    self.counters.cache_hits += 1;
                    start = i;
                    running = v;
                    if trace {
                        children.push(DerivationNode::leaf(Rule::CacheHit, k, v));
                    }
                    break;
                }
            }
        }
        for i in (0..start).rev() {
            if running <= ZERO_THRESHOLD {
                running = 0.0;
                break;
            }
            let query = SvQuery::new(lits[i], lits[i + 1..].to_vec());
            let factor = self.oracle.sv_prob(self.kb, &query)?;
            running *= factor;
            if trace {
                children.push(DerivationNode::leaf(
                    Rule::ChainRuleFactor,
                    query.describe(self.kb),
                    factor,
                ));
            }
            if self.config.cache_enabled && i > 0 {
                let k = self.suffix_key(&lits[i..]);
                self.cache.insert(k, running);
            }
        }
        Ok(Step {
            value: running,
            node: trace.then_some(DerivationNode {
                rule: Rule::ChainRuleFactor,
                expr: key,
                value: running,
                children,
            }),
        })
    }
}

fn bound_or_max(m: usize, q: usize) -> u64 {
    u32::try_from(q)
        .ok()
        .and_then(|q| predicted_call_bound(m as u64, q).ok())
        .unwrap_or(u64::MAX)
}
