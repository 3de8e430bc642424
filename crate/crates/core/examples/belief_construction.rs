//! Follows one belief of the buck converter under repeated off steps and
//! prints the reduction-stage counts for a coarse grid.
//!
//! cargo run --release --example belief_construction

use beliefsynth::belief::stages::reduction_stages;
use beliefsynth::belief::{successors_belief, BeliefKey, BeliefState};
use beliefsynth::config::RunConfig;
use beliefsynth::pipeline::build_raw;
use beliefsynth::Action;

fn main() -> beliefsynth::Result<()> {
    let config = RunConfig::default();
    let (raw, _) = build_raw(&config)?;
    let grid = raw.grid();
    // near the steady state: x1 around 49 A, x2 around 24.5 V
    let i = grid.cells_at(0, 49.0).unwrap().0;
    let j = grid.cells_at(1, 24.6).unwrap().0;
    let mut p = BeliefState::In(BeliefKey::singleton((i, j), j));
    println!("start {p:?}");
    for step in 1..=6 {
        let next = successors_belief(&raw, &p, Action::Hold);
        println!("hold {step}: {} successors", next.len());
        for s in &next {
            println!("  {s:?}");
        }
        let Some(widest) = next.iter().filter(|s| s.key().is_some()).max_by_key(|s| s.key().unwrap().j_hi - s.key().unwrap().j_lo) else {
            break;
        };
        p = *widest;
    }
    let next = successors_belief(&raw, &p, Action::Cycle);
    println!("cycle from {p:?}: {} successors", next.len());
    for s in next.iter().take(8) {
        println!("  {s:?}");
    }

    let coarse = config.with_overrides([("grid-n1", "10"), ("grid-n2", "10")])?;
    let (raw, init) = build_raw(&coarse)?;
    for s in reduction_stages(&raw, &init, 200_000) {
        println!("{:>12}: {}{}", s.name, s.states, if s.capped { " (capped)" } else { "" });
    }
    Ok(())
}
