// Print the derivation of P(x1 | x2 given x3 | !x4) with and without the
// cache. Without it `!x3 & x4` is worked out twice.
//
//     cargo run --example derivation_trace

use ppq::model::load_kb_file;
use ppq::{parse, EnumerationOracle, EvalConfig, Evaluator};

pub fn main() {
    let kb = load_kb_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/indep4.json")).unwrap();
    let query = parse("P(x1 | x2 given x3 | !x4)", &kb).unwrap();

    for cache in [false, true] {
        let config = EvalConfig::default().with_cache(cache).with_trace(true);
        let result = Evaluator::new(&kb, EnumerationOracle, config)
            .eval_conditional(&query)
            .unwrap();
        println!(
            "cache {}: {} oracle calls, {} cache hits",
            if cache { "on" } else { "off" },
            result.stats.sv_calls,
            result.stats.cache_hits
        );
        print!("{}", result.trace.unwrap().render());
        println!();
    }
}
