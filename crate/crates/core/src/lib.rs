//! Propositional probability queries over a knowledge base.
//!
//! A query `P(S1 | S2)`, where both sides are arbitrary propositional formulas
//! over instantiated variables, is answered purely through calls to a
//! single-variable oracle: something that can compute `P(X = v | E)` for one
//! literal `X = v` and a conjunction of literals `E`. The reduction is:
//!
//! 1. split the conditional into two marginals, `P(S1 & S2) / P(S2)`;
//! 2. rewrite each marginal into conjunction/negation form with de Morgan;
//! 3. evaluate literal conjunctions by the chain rule, one oracle call per
//!    literal;
//! 4. remove spanning negations with `P(!A & R) = P(R) - P(A & R)`.
//!
//! The [`engine::Evaluator`] counts oracle calls, memoizes subresults, and can
//! record a derivation tree. [`bench`] and [`verify`] drive it over generated
//! query families and random knowledge bases.
//!
//! ```
//! use ppq::{load_kb, parse, Evaluator, EnumerationOracle, EvalConfig};
//!
//! let kb = load_kb(r#"{
//!     "variables": [
//!         {"name": "a", "values": ["t", "f"]},
//!         {"name": "b", "values": ["t", "f"]}
//!     ],
//!     "joint": {"order": ["a", "b"], "probs": [0.3, 0.2, 0.4, 0.1]}
//! }"#).unwrap();
//! let query = parse("P(a given b)", &kb).unwrap();
//! let mut ev = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default());
//! let result = ev.eval_conditional(&query).unwrap();
//! assert!((result.value - 3.0 / 7.0).abs() < 1e-12);
//! ```

pub mod bench;
pub mod cli;
pub mod engine;
pub mod error;
pub mod model;
pub mod oracle;
pub mod query;
pub mod verify;

pub use engine::{
    classify_query_form, predicted_call_bound, DerivationNode, EvalConfig, EvalResult, EvalStats,
    Evaluator, QueryForm, QueryFormClassification, Rule,
};
pub use error::{EvalError, ModelError, OracleError, QueryError};
pub use model::{load_kb, KnowledgeBase, Variable};
pub use oracle::{
    CountingOracle, EnumerationOracle, OracleCapabilities, StrictSvOracle, SvCallCounter,
    SvOracle, SvQuery, ZERO_THRESHOLD,
};
pub use query::{
    canonicalize_conjunction, count_spanning_negations, eliminate_redundant_negations, parse,
    to_cn_form, CanonicalTerm, Conjunction, Literal, Polarity, Proposition, QueryExpr,
};
