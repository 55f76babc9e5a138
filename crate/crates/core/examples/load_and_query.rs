// Load a knowledge base from JSON and answer a few queries.
//
//     cargo run --example load_and_query

use ppq::model::load_kb_file;
use ppq::{parse, EnumerationOracle, EvalConfig, Evaluator};

pub fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/demo2.json");
    let kb = load_kb_file(path).expect("demo2.json loads");
    println!("{} variables from {path}", kb.len());

    let mut ev = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default());
    for text in ["P(a given b)", "a | b", "P(!(a & b) given b)", "P(a given b & !b)"] {
        let query = parse(text, &kb).expect("query parses");
        match ev.eval_conditional(&query) {
            Ok(r) => println!(
                "{:<24} = {:.6}  ({} oracle calls, {} cache hits)",
                query.display(&kb).to_string(),
                r.value,
                r.stats.sv_calls,
                r.stats.cache_hits
            ),
            Err(e) => println!("{:<24}   {e}", query.display(&kb).to_string()),
        }
    }
}
