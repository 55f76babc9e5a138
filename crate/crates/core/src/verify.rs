//! Randomized cross-checking of the evaluator against brute-force
//! enumeration of the joint distribution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{EvalConfig, Evaluator};
use crate::error::OracleError;
use crate::model::{JointDoc, KbDocument, KnowledgeBase, NodeDoc, VariableDoc};
use crate::oracle::{EnumerationOracle, OracleCapabilities, SvOracle, SvQuery};
use crate::query::{Literal, Proposition, QueryExpr};

/// Agreement required between the evaluator and enumeration.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Evidence lighter than this is redrawn: the ratio is either undefined or
/// dominated by rounding residue.
pub const MIN_EVIDENCE_MASS: f64 = 1e-9;

/// Seed used when neither the caller nor `PPQ_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 7;

/// The `PPQ_SEED` environment variable if set and numeric, else [`DEFAULT_SEED`].
pub fn default_seed() -> u64 {
    std::env::var("PPQ_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbKind {
    Joint,
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Variables per knowledge base.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub kind: KbKind,
    /// Largest domain size; 2 gives binary variables only.
    pub max_domain: usize,
    pub cache: bool,
    /// Perturb every oracle answer, to check that the harness notices.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: 6,
            trials: 100,
            seed: DEFAULT_SEED,
            kind: KbKind::Joint,
            max_domain: 2,
            cache: true,
            inject_fault: false,
        }
    }
}

fn domain(rng: &mut ChaCha8Rng, max_domain: usize) -> Vec<String> {
    let d = if max_domain <= 2 { 2 } else { rng.gen_range(2..=max_domain) };
    if d == 2 {
        vec!["t".into(), "f".into()]
    } else {
        (0..d).map(|i| format!("v{i}")).collect()
    }
}

fn distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// A knowledge base with `n` variables `x1..xn` and random parameters.
///
/// Networks give each variable up to three parents among the earlier ones.
pub fn random_kb(rng: &mut ChaCha8Rng, n: usize, kind: KbKind, max_domain: usize) -> KnowledgeBase {
    let variables: Vec<VariableDoc> = (1..=n)
        .map(|i| VariableDoc {
            name: format!("x{i}"),
            values: domain(rng, max_domain),
        })
        .collect();
    let (joint, network) = match kind {
        KbKind::Joint => {
            let mut order: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
            order.shuffle(rng);
            let size = variables.iter().map(|v| v.values.len()).product();
            (
                Some(JointDoc {
                    order,
                    probs: distribution(rng, size),
                }),
                None,
            )
        }
        KbKind::Network => {
            let mut nodes = Vec::with_capacity(n);
            for (i, v) in variables.iter().enumerate() {
                let mut earlier: Vec<usize> = (0..i).collect();
                earlier.shuffle(rng);
                let k = rng.gen_range(0..=earlier.len().min(3));
                let mut parents = earlier[..k].to_vec();
                parents.sort_unstable();
                let rows: usize = parents.iter().map(|&p| variables[p].values.len()).product();
                nodes.push(NodeDoc {
                    var: v.name.clone(),
                    parents: parents.iter().map(|&p| variables[p].name.clone()).collect(),
                    cpt: (0..rows).map(|_| distribution(rng, v.values.len())).collect(),
                });
            }
            (None, Some(nodes))
        }
    };
    KbDocument {
        name: Some("random".into()),
        variables,
        joint,
        network,
    }
    .into_kb()
    .expect("random knowledge base is valid")
}

fn random_literal(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> Literal {
    let var = kb.variable(rng.gen_range(0..kb.len()));
    let value = rng.gen_range(0..var.domain_size());
    if var.domain_size() > 2 && rng.gen_bool(0.3) {
        Literal::negative(var.id, value)
    } else {
        Literal::positive(var.id, value)
    }
}

/// A random formula with nesting depth at most `depth` and at most `budget`
/// literal occurrences (at least one).
pub fn random_proposition(
    rng: &mut ChaCha8Rng,
    kb: &KnowledgeBase,
    depth: usize,
    budget: usize,
) -> Proposition {
    let mut left = budget.max(1);
    gen(rng, kb, depth, &mut left)
}

fn gen(rng: &mut ChaCha8Rng, kb: &KnowledgeBase, depth: usize, left: &mut usize) -> Proposition {
    if depth == 0 || *left <= 1 || rng.gen_bool(0.3) {
        *left -= 1;
        return Proposition::Lit(random_literal(rng, kb));
    }
    match rng.gen_range(0..5) {
        0 => Proposition::not(gen(rng, kb, depth - 1, left)),
        op => {
            let want = rng.gen_range(2..=3).min(*left);
            let mut children = Vec::with_capacity(want);
            for i in 0..want {
                // leave one literal for every sibling still to come
                let reserve = want - i - 1;
                if *left <= reserve {
                    break;
                }
                *left -= reserve;
                children.push(gen(rng, kb, depth - 1, left));
                *left += reserve;
            }
            if op <= 2 {
                Proposition::and(children)
            } else {
                Proposition::or(children)
            }
        }
    }
}

/// `P(p)` by summing the joint distribution over every full assignment.
pub fn brute_force_marginal(kb: &KnowledgeBase, p: &Proposition) -> f64 {
    kb.assignments()
        .filter(|a| p.holds(a))
        .map(|a| kb.joint_unchecked(&a))
        .sum()
}

/// `P(target | evidence)` by enumeration, or `None` if the evidence has
/// probability zero.
pub fn brute_force(kb: &KnowledgeBase, query: &QueryExpr) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for a in kb.assignments() {
        if query.evidence.as_ref().is_some_and(|e| !e.holds(&a)) {
            continue;
        }
        let p = kb.joint_unchecked(&a);
        den += p;
        if query.target.holds(&a) {
            num += p;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// A target of depth at most 4, and evidence in 60% of cases, with at most
/// 10 literal occurrences between them. Evidence of negligible probability
/// is redrawn, then dropped.
pub fn random_query(rng: &mut ChaCha8Rng, kb: &KnowledgeBase) -> QueryExpr {
    let budget = rng.gen_range(1..=6);
    let target = random_proposition(rng, kb, 4, budget);
    let room = 10 - target.variable_references();
    if room == 0 || !rng.gen_bool(0.6) {
        return QueryExpr::marginal(target);
    }
    for _ in 0..16 {
        let budget = rng.gen_range(1..=room);
        let evidence = random_proposition(rng, kb, 3, budget);
        if brute_force_marginal(kb, &evidence) > MIN_EVIDENCE_MASS {
            return QueryExpr::conditional(target, evidence);
        }
    }
    QueryExpr::marginal(target)
}

/// Adds `offset` to every answer of the wrapped oracle.
#[derive(Debug, Clone, Copy)]
pub struct FaultyOracle<O> {
    pub inner: O,
    pub offset: f64,
}

impl<O: SvOracle> SvOracle for FaultyOracle<O> {
    fn capabilities(&self) -> OracleCapabilities {
        self.inner.capabilities()
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        Ok(self.inner.sv_prob(kb, query)? + self.offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyFailure {
    pub trial: usize,
    /// Seed that regenerates this trial's knowledge base and query through
    /// [`random_case`].
    pub trial_seed: u64,
    pub query: String,
    pub expected: f64,
    /// The evaluator's value, or its error message.
    pub got: Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub comparisons: usize,
    pub max_deviation: f64,
    pub failures: usize,
    pub first_failure: Option<VerifyFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// The knowledge base and query of one trial.
pub fn random_case(trial_seed: u64, cfg: &VerifyConfig) -> (KnowledgeBase, QueryExpr) {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let kb = random_kb(&mut rng, cfg.n, cfg.kind, cfg.max_domain);
    let query = random_query(&mut rng, &kb);
    (kb, query)
}

/// Per-trial seeds derived from `cfg.seed`, one per trial.
pub fn trial_seeds(cfg: &VerifyConfig) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.trials).map(|_| master.gen()).collect()
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport {
        config: *cfg,
        comparisons: 0,
        max_deviation: 0.0,
        failures: 0,
        first_failure: None,
    };
    let eval_cfg = EvalConfig::default().with_cache(cfg.cache);
    for (trial, trial_seed) in trial_seeds(cfg).into_iter().enumerate() {
        let (kb, query) = random_case(trial_seed, cfg);
        let Some(expected) = brute_force(&kb, &query) else {
            continue;
        };
        let got = if cfg.inject_fault {
            Evaluator::new(&kb, FaultyOracle { inner: EnumerationOracle, offset: 0.01 }, eval_cfg)
                .eval_conditional(&query)
        } else {
            Evaluator::new(&kb, EnumerationOracle, eval_cfg).eval_conditional(&query)
        };
        report.comparisons += 1;
        let deviation = match &got {
            Ok(r) => (r.value - expected).abs(),
            Err(_) => f64::INFINITY,
        };
        report.max_deviation = report.max_deviation.max(deviation);
        if deviation > VERIFY_TOLERANCE {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some(VerifyFailure {
                    trial,
                    trial_seed,
                    query: query.display(&kb).to_string(),
                    expected,
                    got: got.map(|r| r.value).map_err(|e| e.to_string()),
                });
            }
        }
    }
    report
}
