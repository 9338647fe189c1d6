//! Randomized axiom checks plus the stability bound for a pair of games.
//!
//! `cargo run --example axiom_campaign -- 200 42`

use vecshap::axioms::{check_stability, run_axiom_campaign, summarize, Axiom, CampaignConfig, Tolerances};
use vecshap::random::{random_game, trial_rng};

fn main() -> vecshap::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let config = CampaignConfig { n: 5, m: 3, trials, seed, tolerances: Tolerances::default() };
    let reports = run_axiom_campaign(&config)?;
    let summary = summarize(&reports);
    println!("{} trials, {} records, {} failures", summary.trials, summary.records, summary.failures);
    for axiom in Axiom::ALL {
        let worst = reports.iter().filter_map(|r| r.record(axiom)).fold(0.0f64, |acc, r| acc.max(r.residual));
        println!("  {axiom:<11} worst residual {worst:e}");
    }

    let mut rng = trial_rng(seed, 0);
    let (u, v) = (random_game(&mut rng, 6, 2)?, random_game(&mut rng, 6, 2)?);
    let s = check_stability(&u, &v)?;
    println!("stability: {:.4} <= {:.4} <= {:.4}", s.lhs, s.bound_delta, s.bound_sup);
    Ok(())
}
