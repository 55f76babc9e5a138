// Multi-valued variables with an oracle that only accepts `X = v` literals.
// The evaluator rewrites `X != v` as a negated group, at the price of a few
// extra calls.
//
//     cargo run --example strict_oracle

use ppq::model::load_kb_file;
use ppq::{parse, EnumerationOracle, EvalConfig, Evaluator, StrictSvOracle};

pub fn main() {
    let kb = load_kb_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/weather.json")).unwrap();
    let config = EvalConfig::default().with_cache(false);
    for text in [
        "P(umbrella given sky!=clear)",
        "P(rain given wind!=calm & sky!=clear)",
        "P(sky=overcast | wind=gale given !umbrella)",
    ] {
        let query = parse(text, &kb).unwrap();
        let plain = Evaluator::new(&kb, EnumerationOracle, config)
            .eval_conditional(&query)
            .unwrap();
        let strict = Evaluator::new(&kb, StrictSvOracle::new(EnumerationOracle), config)
            .eval_conditional(&query)
            .unwrap();
        println!("{text}");
        println!("  any literal:   {:.10}  {:>3} calls", plain.value, plain.stats.sv_calls);
        println!("  X = v only:    {:.10}  {:>3} calls", strict.value, strict.stats.sv_calls);
    }
}
