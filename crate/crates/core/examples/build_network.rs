// Build a network in code, inspect it, and write it back out as JSON.
//
//     cargo run --example build_network

use ppq::{parse, EnumerationOracle, EvalConfig, Evaluator, KnowledgeBase};

fn values(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn main() {
    let kb = KnowledgeBase::from_network(
        vec![
            ("season".into(), values(&["winter", "spring", "summer", "autumn"])),
            ("flu".into(), values(&["t", "f"])),
            ("fever".into(), values(&["t", "f"])),
        ],
        vec![
            ("season", vec![], vec![vec![0.25, 0.25, 0.25, 0.25]]),
            ("flu", vec!["season"], vec![vec![0.20, 0.80], vec![0.08, 0.92], vec![0.02, 0.98], vec![0.10, 0.90]]),
            ("fever", vec!["flu"], vec![vec![0.85, 0.15], vec![0.04, 0.96]]),
        ],
    )
    .expect("network is valid");

    let mut ev = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default());
    for text in ["P(flu given fever)", "P(season=winter given fever)", "P(flu given fever & season!=winter)"] {
        let r = ev.eval_conditional(&parse(text, &kb).unwrap()).unwrap();
        println!("{text:<40} = {:.6}", r.value);
    }

    let joint = kb.to_joint_table();
    println!("as a joint table ({} rows):", kb.assignments().count());
    println!("{}", serde_json::to_string_pretty(&joint.to_document()).unwrap());
}
