use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// `P(S1 | S2) = P(S1 & S2) / P(S2)`
    Step1,
    /// Or-elimination; the single child is the rewritten marginal.
    DeMorgan,
    /// A literal conjunction (children are its factors) or one factor.
    ChainRuleFactor,
    /// `P(!A & R) = P(R) - P(A & R)`; children are `R` then `A & R`.
    NegElim,
    CacheHit,
    Contradiction,
    Tautology,
}

/// One step of a derivation.
///
/// `expr` is printed in the query syntax. The one exception is the empty
/// conjunction, printed as `true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationNode {
    pub rule: Rule,
    pub expr: String,
    pub value: f64,
    #[serde(default)]
    pub children: Vec<DerivationNode>,
}

impl DerivationNode {
    pub fn leaf(rule: Rule, expr: impl Into<String>, value: f64) -> Self {
        DerivationNode {
            rule,
            expr: expr.into(),
            value,
            children: Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn iter(&self) -> impl Iterator<Item = &DerivationNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Indented tree, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, "", "");
        out
    }

    fn render_into(&self, out: &mut String, first: &str, rest: &str) {
        let _ = writeln!(out, "{first}{:?} {} = {}", self.rule, self.expr, self.value);
        let n = self.children.len();
        for (i, child) in self.children.iter().enumerate() {
            let last = i + 1 == n;
            let (branch, cont) = if last { ("└─ ", "   ") } else { ("├─ ", "│  ") };
            child.render_into(out, &format!("{rest}{branch}"), &format!("{rest}{cont}"));
        }
    }
}
