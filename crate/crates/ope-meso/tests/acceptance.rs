//! Acceptance criteria, one line per criterion. Run with
//! `cargo test --test acceptance`; `ACCEPTANCE_ONLY=4,5` restricts the set.

use ope_meso::acceptance::Suite;

fn main() {
    let only: Option<Vec<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let suite = Suite::new();
    let mut failed = 0;
    for id in 1..=12u8 {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let outcome = suite.run(id);
        println!("{outcome}");
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
