//! Runs the two-phase linear-network sweep and prints its summary and verdict.
//!
//! cargo run --release --example linear_dynamics [seeds]

use pepita::lindyn::{sweep, SweepConfig, Thresholds};

fn main() -> pepita::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cfg = SweepConfig { seeds: (0..n).collect(), ..Default::default() };
    let (rows, summary) = sweep(&cfg)?;

    for r in rows.iter().take(5) {
        println!(
            "seed {:>3}: growth {:?}, tr(FE) {:+.4} -> {:+.4}, tr(FWA) decreasing {:?}",
            r.seed, r.a_growth, r.initial_tr_fe, r.final_tr_fe, r.fwa_decreasing
        );
    }
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    let verdict = summary.verdict(&Thresholds::default(), cfg.phase2_steps);
    println!("{}", serde_json::to_string(&verdict).expect("serializable"));
    Ok(())
}
