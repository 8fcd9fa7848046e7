//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any fails.

use weakmeas::acceptance::run_all;

fn main() {
    let results = run_all(&mut |o| println!("{o}"));
    let failed = results.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
