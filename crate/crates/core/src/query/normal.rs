//! Rewrites into conjunction/negation form and literal-conjunction
//! canonicalization.

use std::collections::BTreeSet;

use crate::model::KnowledgeBase;

use super::{Literal, Polarity, Proposition};

/// Rewrites every `Or(c1..ck)` as `Not(And(Not(c1)..Not(ck)))`.
///
/// The result contains only `And`, `Not` and `Lit` nodes.
pub fn to_cn_form(p: &Proposition) -> Proposition {
    match p {
        Proposition::Lit(_) => p.clone(),
        Proposition::Not(c) => Proposition::not(to_cn_form(c)),
        Proposition::And(cs) => Proposition::and(cs.iter().map(to_cn_form)),
        Proposition::Or(cs) => Proposition::not(Proposition::and(
            cs.iter().map(|c| Proposition::not(to_cn_form(c))),
        )),
    }
}

/// Removes `Not(Not(..))` pairs and folds `Not(Lit)` into the literal's
/// polarity. Single pass, linear in the number of nodes.
pub fn eliminate_redundant_negations(p: &Proposition) -> Proposition {
    simplify_negations(p, true)
}

/// Like [`eliminate_redundant_negations`] but leaves `Not(Lit)` nodes alone.
pub fn strip_double_negations(p: &Proposition) -> Proposition {
    simplify_negations(p, false)
}

fn simplify_negations(p: &Proposition, absorb: bool) -> Proposition {
    match p {
        Proposition::Lit(_) => p.clone(),
        Proposition::Not(inner) => match simplify_negations(inner, absorb) {
            Proposition::Not(x) => *x,
            Proposition::Lit(l) if absorb => Proposition::Lit(l.negated()),
            other => Proposition::not(other),
        },
        Proposition::And(cs) => Proposition::and(cs.iter().map(|c| simplify_negations(c, absorb))),
        Proposition::Or(cs) => Proposition::or(cs.iter().map(|c| simplify_negations(c, absorb))),
    }
}

/// Number of `Not` nodes whose subtree mentions two or more distinct
/// variables.
pub fn count_spanning_negations(p: &Proposition) -> usize {
    fn walk(p: &Proposition, count: &mut usize) -> BTreeSet<usize> {
        match p {
            Proposition::Lit(l) => BTreeSet::from([l.var]),
            Proposition::Not(c) => {
                let vars = walk(c, count);
                if vars.len() >= 2 {
                    *count += 1;
                }
                vars
            }
            Proposition::And(cs) | Proposition::Or(cs) => {
                let mut vars = BTreeSet::new();
                for c in cs {
                    vars.extend(walk(c, count));
                }
                vars
            }
        }
    }
    let mut count = 0;
    walk(p, &mut count);
    count
}

/// A satisfiable, non-empty conjunction of literals: sorted by
/// `(variable, value, polarity)`, duplicates removed, and at most one
/// positive literal per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalTerm(Vec<Literal>);

impl CanonicalTerm {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_proposition(&self) -> Proposition {
        Proposition::and(self.0.iter().copied().map(Proposition::Lit))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conjunction {
    Term(CanonicalTerm),
    Contradiction,
    Tautology,
}

/// Sorts, deduplicates and simplifies a conjunction of literals.
///
/// Per variable with domain size `d`: two different positive values, or a
/// positive `v` together with `!= v`, is a contradiction; a positive value
/// makes the variable's negative literals redundant; `d - 1` exclusions imply
/// the remaining value and `d` exclusions are a contradiction.
pub fn canonicalize_conjunction(kb: &KnowledgeBase, lits: &[Literal]) -> Conjunction {
    if lits.is_empty() {
        return Conjunction::Tautology;
    }
    let mut sorted = lits.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut out = Vec::with_capacity(sorted.len());
    for group in sorted.chunk_by(|a, b| a.var == b.var) {
        let var = group[0].var;
        let mut positive = group.iter().filter(|l| l.polarity == Polarity::Positive);
        let excluded: Vec<usize> = group
            .iter()
            .filter(|l| l.polarity == Polarity::Negative)
            .map(|l| l.value)
            .collect();
        let kept = match (positive.next(), positive.next()) {
            (Some(_), Some(_)) => return Conjunction::Contradiction,
            (Some(p), None) => {
                if excluded.contains(&p.value) {
                    return Conjunction::Contradiction;
                }
                vec![*p]
            }
            (None, _) => {
                let d = kb.variable(var).domain_size();
                match d - excluded.len() {
                    0 => return Conjunction::Contradiction,
                    1 => {
                        let remaining = (0..d).find(|v| !excluded.contains(v)).unwrap();
                        vec![Literal::positive(var, remaining)]
                    }
                    _ => group.to_vec(),
                }
            }
        };
        out.extend(kept);
    }
    Conjunction::Term(CanonicalTerm(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_kb;

    fn kb() -> KnowledgeBase {
        load_kb(
            r#"{"variables": [
                {"name": "a", "values": ["t","f"]},
                {"name": "b", "values": ["t","f"]},
                {"name": "c", "values": ["t","f"]},
                {"name": "color", "values": ["red","blue","green"]}],
              "network": [
                {"var": "a", "cpt": [[0.5,0.5]]}, {"var": "b", "cpt": [[0.5,0.5]]},
                {"var": "c", "cpt": [[0.5,0.5]]}, {"var": "color", "cpt": [[0.2,0.3,0.5]]}]}"#,
        )
        .unwrap()
    }

    fn l(v: usize) -> Proposition {
        Proposition::Lit(Literal::positive(v, 0))
    }

    fn not(p: Proposition) -> Proposition {
        Proposition::not(p)
    }

    #[test]
    fn de_morgan_rewrites() {
        assert_eq!(
            to_cn_form(&Proposition::or([l(0), l(1)])),
            not(Proposition::And(vec![not(l(0)), not(l(1))]))
        );
        assert_eq!(
            to_cn_form(&Proposition::and([Proposition::or([l(0), l(1)]), l(2)])),
            Proposition::And(vec![not(Proposition::And(vec![not(l(0)), not(l(1))])), l(2)])
        );
        assert_eq!(to_cn_form(&l(0)), l(0));
    }

    #[test]
    fn redundant_negations() {
        let ab = Proposition::and([l(0), l(1)]);
        assert_eq!(eliminate_redundant_negations(&not(not(ab.clone()))), ab);
        assert_eq!(
            eliminate_redundant_negations(&not(l(0))),
            Proposition::Lit(Literal::negative(0, 0))
        );
        let cn = not(Proposition::And(vec![not(l(0)), not(l(1))]));
        assert_eq!(
            eliminate_redundant_negations(&cn),
            not(Proposition::And(vec![
                Proposition::Lit(Literal::negative(0, 0)),
                Proposition::Lit(Literal::negative(1, 0)),
            ]))
        );
        // nested double negation inside a conjunction flattens
        let p = Proposition::and([not(not(ab.clone())), l(2)]);
        assert_eq!(eliminate_redundant_negations(&p), Proposition::and([l(0), l(1), l(2)]));
        // triple negation leaves one
        assert_eq!(strip_double_negations(&not(not(not(ab.clone())))), not(ab.clone()));
        assert_eq!(strip_double_negations(&not(l(0))), not(l(0)));
    }

    #[test]
    fn spanning_negation_counts() {
        let cn = not(Proposition::And(vec![
            Proposition::Lit(Literal::negative(0, 0)),
            Proposition::Lit(Literal::negative(1, 0)),
        ]));
        assert_eq!(count_spanning_negations(&cn), 1);
        assert_eq!(count_spanning_negations(&Proposition::and([l(0), l(1), l(2)])), 0);
        // negation over a single variable does not span
        assert_eq!(count_spanning_negations(&not(Proposition::And(vec![l(0), l(0)]))), 0);
    }

    #[test]
    fn nested_family_has_m_minus_one_spanning_negations() {
        // independent check: build N_m structurally and count by hand-rolled
        // recursion over the nesting depth
        for m in 2..=12usize {
            let kb = load_kb(&crate::bench::fair_coin_document(m)).unwrap();
            let p = crate::bench::nested_query(&kb, m);
            let normal = eliminate_redundant_negations(&to_cn_form(&p));
            assert_eq!(count_spanning_negations(&normal), m - 1, "m = {m}");
        }
    }

    #[test]
    fn canonical_terms() {
        let k = kb();
        let a = Literal::positive(0, 0);
        let b = Literal::positive(1, 0);
        assert_eq!(
            canonicalize_conjunction(&k, &[b, a, a]),
            Conjunction::Term(CanonicalTerm(vec![a, b]))
        );
        assert_eq!(
            canonicalize_conjunction(&k, &[a, Literal::positive(0, 1)]),
            Conjunction::Contradiction
        );
        assert_eq!(canonicalize_conjunction(&k, &[]), Conjunction::Tautology);
        assert_eq!(
            canonicalize_conjunction(&k, &[Literal::negative(3, 0), Literal::negative(3, 1)]),
            Conjunction::Term(CanonicalTerm(vec![Literal::positive(3, 2)]))
        );
        assert_eq!(
            canonicalize_conjunction(&k, &[a, Literal::negative(0, 0)]),
            Conjunction::Contradiction
        );
        // binary negation becomes the other value
        assert_eq!(
            canonicalize_conjunction(&k, &[Literal::negative(0, 0)]),
            Conjunction::Term(CanonicalTerm(vec![Literal::positive(0, 1)]))
        );
        let all_excluded: Vec<_> = (0..3).map(|v| Literal::negative(3, v)).collect();
        assert_eq!(canonicalize_conjunction(&k, &all_excluded), Conjunction::Contradiction);
        // a positive value subsumes exclusions of other values
        assert_eq!(
            canonicalize_conjunction(&k, &[Literal::negative(3, 1), Literal::positive(3, 0)]),
            Conjunction::Term(CanonicalTerm(vec![Literal::positive(3, 0)]))
        );
    }

    #[test]
    fn multi_valued_exclusion_matches_enumeration() {
        // [color != red, color != blue] over {red, blue, green}
        let k = kb();
        let lits = [Literal::negative(3, 0), Literal::negative(3, 1)];
        let satisfying: Vec<usize> = (0..3)
            .filter(|&v| lits.iter().all(|l| (v == l.value) == l.is_positive()))
            .collect();
        assert_eq!(satisfying, vec![2]);
        assert_eq!(
            canonicalize_conjunction(&k, &lits),
            Conjunction::Term(CanonicalTerm(vec![Literal::positive(3, satisfying[0])]))
        );
    }
}
