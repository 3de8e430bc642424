//! Runs the hybrid automaton of the buck converter open loop (one cycle,
//! then a fixed number of off steps) and prints the first rows of the trace
//! CSV.
//!
//! cargo run --example hybrid_trace

use beliefsynth::config::RunConfig;
use beliefsynth::hybrid::{simulate, HybridState};
use beliefsynth::Action;
use nalgebra::Vector2;

fn main() -> beliefsynth::Result<()> {
    let plant = RunConfig::default().plant()?;
    let mut decisions = 0usize;
    let policy = |_: &HybridState| {
        decisions += 1;
        if decisions % 150 == 1 {
            Action::Cycle
        } else {
            Action::Hold
        }
    };
    let start = HybridState::initial(Vector2::zeros(), &plant);
    let trace = simulate(start, 2_000, &plant, policy, Vector2::zeros)?;
    let csv = trace.to_csv_string(&[("policy", "cycle every 150 decisions".to_string())]);
    for line in csv.lines().take(8) {
        println!("{line}");
    }
    let last = trace.records.last().unwrap();
    println!("... k = {}: x = ({:.3}, {:.3})", last.k, last.x[0], last.x[1]);
    Ok(())
}
