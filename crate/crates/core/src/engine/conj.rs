//! Working representation of a normalized marginal: a conjunction of literals
//! and negated sub-conjunctions. `P(lits & !negs[0] & !negs[1] & ...)`.

use std::collections::BTreeSet;

use crate::model::KnowledgeBase;
use crate::query::{canonicalize_conjunction, Conjunction, Literal, Proposition};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Conj {
    pub lits: Vec<Literal>,
    pub negs: Vec<Conj>,
}

pub(crate) enum Simplified {
    False,
    Conj(Conj),
}

impl Conj {
    /// Lowers a proposition that contains no `Or` nodes.
    pub fn from_cn(p: &Proposition) -> Conj {
        let mut out = Conj::default();
        out.absorb(p);
        out
    }

    fn absorb(&mut self, p: &Proposition) {
        match p {
            Proposition::Lit(l) => self.lits.push(*l),
            Proposition::Not(inner) => self.negs.push(Conj::from_cn(inner)),
            Proposition::And(cs) => cs.iter().for_each(|c| self.absorb(c)),
            Proposition::Or(_) => unreachable!("Or node survived de Morgan rewriting"),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty() && self.negs.is_empty()
    }

    pub fn to_proposition(&self) -> Option<Proposition> {
        let parts: Vec<Proposition> = self
            .lits
            .iter()
            .map(|l| Proposition::Lit(*l))
            .chain(self.negs.iter().map(|n| match n.to_proposition() {
                Some(p) => Proposition::not(p),
                // !true never survives simplification; keep it printable anyway
                None => Proposition::And(Vec::new()),
            }))
            .collect();
        match parts.len() {
            0 => None,
            _ => Some(Proposition::and(parts)),
        }
    }

    /// Printed form, used as cache key and trace expression.
    pub fn key(&self, kb: &KnowledgeBase) -> String {
        match self.to_proposition() {
            Some(p) => p.display(kb).to_string(),
            None => "true".to_string(),
        }
    }

    fn variables(&self, out: &mut BTreeSet<usize>) {
        out.extend(self.lits.iter().map(|l| l.var));
        self.negs.iter().for_each(|n| n.variables(out));
    }

    fn single_variable(&self) -> Option<usize> {
        let mut vars = BTreeSet::new();
        self.variables(&mut vars);
        match vars.len() {
            1 => vars.pop_first(),
            _ => None,
        }
    }

    /// Truth value when the only mentioned variable takes `value`.
    fn holds_at(&self, value: usize) -> bool {
        self.lits
            .iter()
            .all(|l| (l.value == value) == l.is_positive())
            && self.negs.iter().all(|n| !n.holds_at(value))
    }
}

pub(crate) struct Simplifier<'a> {
    pub kb: &'a KnowledgeBase,
    /// Fold single-variable negations into literals.
    pub absorb: bool,
    /// Whether `X != v` literals may be sent to the oracle.
    pub negatives_ok: bool,
}

impl Simplifier<'_> {
    /// Canonical form: literals canonicalized, negated groups simplified,
    /// sorted by printed form and deduplicated.
    pub fn simplify(&self, c: Conj) -> Simplified {
        let mut lits = c.lits;
        let mut negs = Vec::with_capacity(c.negs.len());
        for n in c.negs {
            let n = match self.simplify(n) {
                Simplified::False => continue,
                Simplified::Conj(n) if n.is_empty() => return Simplified::False,
                Simplified::Conj(n) => n,
            };
            if self.absorb {
                if let Some(var) = n.single_variable() {
                    let d = self.kb.variable(var).domain_size();
                    let allowed: Vec<usize> = (0..d).filter(|&v| !n.holds_at(v)).collect();
                    match allowed.len() {
                        0 => return Simplified::False,
                        1 => lits.push(Literal::positive(var, allowed[0])),
                        k if k == d => {}
                        _ => lits.extend(
                            (0..d)
                                .filter(|v| !allowed.contains(v))
                                .map(|v| Literal::negative(var, v)),
                        ),
                    }
                    continue;
                }
            }
            negs.push(n);
        }

        let term = match canonicalize_conjunction(self.kb, &lits) {
            Conjunction::Contradiction => return Simplified::False,
            Conjunction::Tautology => Vec::new(),
            Conjunction::Term(t) => t.literals().to_vec(),
        };

        // The oracle takes at most one literal per variable, and no negative
        // ones when strict; the rest become negated single literals.
        let mut kept = Vec::with_capacity(term.len());
        for group in term.chunk_by(|a, b| a.var == b.var) {
            for (i, l) in group.iter().enumerate() {
                if l.is_positive() || (i == 0 && self.negatives_ok) {
                    kept.push(*l);
                } else {
                    negs.push(Conj {
                        lits: vec![Literal::positive(l.var, l.value)],
                        negs: Vec::new(),
                    });
                }
            }
        }

        let mut keyed: Vec<(String, Conj)> = negs.into_iter().map(|n| (n.key(self.kb), n)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        Simplified::Conj(Conj {
            lits: kept,
            negs: keyed.into_iter().map(|(_, n)| n).collect(),
        })
    }
}
