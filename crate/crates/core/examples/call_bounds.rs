// Oracle calls against the m * 2^q bound for each generated query family.
//
//     cargo run --example call_bounds

use ppq::bench::{run_bench, BenchConfig, Family};

pub fn main() {
    let ranges = [
        (Family::Form1, 2, 10),
        (Family::Form2, 2, 10),
        (Family::Form3, 4, 10),
        (Family::Form4, 4, 10),
        (Family::Nested, 2, 11),
        (Family::NegChain, 2, 9),
    ];
    println!("{:<9} {:>3} {:>3} {:>8} {:>9} {:>8}", "family", "m", "q", "bound", "no cache", "cache");
    for (family, lo, hi) in ranges {
        let rows = run_bench(&BenchConfig { timing: false, ..BenchConfig::new(family, lo, hi) }).unwrap();
        for row in rows {
            println!(
                "{:<9} {:>3} {:>3} {:>8} {:>9} {:>8}",
                row.family, row.m, row.q, row.predicted_bound, row.sv_calls_cache_off, row.sv_calls_cache_on
            );
        }
    }
}
