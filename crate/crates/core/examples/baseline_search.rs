//! Periodic open-loop baseline: line search over the off time and the
//! resulting start-up overshoot.
//!
//! cargo run --release --example baseline_search

use beliefsynth::baseline::{line_search_noff, simulate_baseline};
use beliefsynth::config::RunConfig;
use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> beliefsynth::Result<()> {
    let config = RunConfig::default();
    let plant = config.plant()?;
    let search = line_search_noff(config.baseline_n_on, 1..=100, &plant, (24.0, 25.0))?;
    for c in search.candidates.iter().filter(|c| (25..=40).contains(&c.n_off)) {
        println!(
            "n_off {:>3}: rho {:.6}, equilibrium x2 in [{:.3}, {:.3}], in target {}",
            c.n_off,
            c.spectral_radius,
            c.eq_x2_min.unwrap_or(f64::NAN),
            c.eq_x2_max.unwrap_or(f64::NAN),
            c.in_target
        );
    }
    let Some(n_off) = search.chosen else {
        println!("no feasible n_off");
        return Ok(());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trace = simulate_baseline(config.baseline_n_on, n_off, &plant, Vector2::zeros(), 40_000, &mut rng);
    let peak = trace.states().map(|x| x[1]).fold(f64::NEG_INFINITY, f64::max);
    let last = trace.records.last().unwrap().x;
    println!("chosen n_off {n_off}; peak x2 {peak:.3} V, final x2 {:.3} V", last[1]);
    Ok(())
}
