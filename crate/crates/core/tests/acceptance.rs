//! Runs acceptance criteria 1-9 and prints one line per criterion.
//! Set `GG_SEED` to rerun with another seed.

use ggconvex::acceptance::{run_all, DEFAULT_SEED};

fn main() {
    let seed = std::env::var("GG_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    println!("acceptance suite, seed {seed}");
    let results = run_all(seed);
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
