// Plug in your own single-variable oracle. This one knows the closed form
// for independent variables and logs each request.
//
//     cargo run --example custom_oracle

use std::cell::RefCell;

use ppq::{
    load_kb, parse, EvalConfig, Evaluator, KnowledgeBase, OracleCapabilities, OracleError, SvOracle,
    SvQuery,
};

/// Independent variables: `P(X = v | E) = P(X = v)`.
struct Independent {
    marginals: Vec<Vec<f64>>,
    log: RefCell<Vec<String>>,
}

impl SvOracle for Independent {
    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities { supports_negative_literals: true }
    }

    fn sv_prob(&self, kb: &KnowledgeBase, query: &SvQuery) -> Result<f64, OracleError> {
        self.log.borrow_mut().push(query.describe(kb));
        let row = &self.marginals[query.target.var];
        let p = row[query.target.value];
        Ok(if query.target.is_positive() { p } else { 1.0 - p })
    }
}

pub fn main() {
    let kb = load_kb(
        r#"{"variables": [{"name": "rain", "values": ["t", "f"]},
                          {"name": "train_late", "values": ["t", "f"]},
                          {"name": "alarm_off", "values": ["t", "f"]}],
            "network": [{"var": "rain", "cpt": [[0.3, 0.7]]},
                        {"var": "train_late", "cpt": [[0.2, 0.8]]},
                        {"var": "alarm_off", "cpt": [[0.05, 0.95]]}]}"#,
    )
    .unwrap();
    let oracle = Independent {
        marginals: vec![vec![0.3, 0.7], vec![0.2, 0.8], vec![0.05, 0.95]],
        log: RefCell::new(Vec::new()),
    };
    let query = parse("P(train_late | alarm_off given !rain | train_late)", &kb).unwrap();
    let mut ev = Evaluator::new(&kb, oracle, EvalConfig::default());
    let r = ev.eval_conditional(&query).unwrap();
    println!("{} = {:.6}", query.display(&kb), r.value);
    for line in ev.oracle().log.borrow().iter() {
        println!("  asked {line}");
    }
}
