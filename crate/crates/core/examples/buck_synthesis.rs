//! Builds the belief abstraction for the buck converter, solves the game and
//! runs one closed-loop simulation.
//!
//! cargo run --release --example buck_synthesis -- [grid_n1 grid_n2 disturbance_radius]

use std::time::Instant;

use beliefsynth::config::RunConfig;
use beliefsynth::pipeline::{build, run_verdict};
use beliefsynth::sim::ClosedLoop;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> beliefsynth::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::default();
    if let [n1, n2, r] = args.as_slice() {
        config.grid_n1 = n1.parse().expect("grid_n1");
        config.grid_n2 = n2.parse().expect("grid_n2");
        config.disturbance_radius = r.parse().expect("radius");
    }
    let t = Instant::now();
    let built = build(&config)?;
    println!(
        "grid {}x{}, r_D = {}: {} belief states ({:.1?})",
        config.grid_n1,
        config.grid_n2,
        config.disturbance_radius,
        built.belief.len(),
        t.elapsed()
    );
    let syn = built.synthesize();
    println!(
        "stay core {}, winning {}, initial beliefs winning: {}",
        syn.core_size,
        syn.table.num_winning(),
        syn.success()
    );
    for k in &syn.uncovered {
        println!("  uncovered {k:?}");
    }
    if !syn.success() {
        return Ok(());
    }
    let lp = ClosedLoop {
        raw: &built.raw,
        belief: &built.belief,
        table: &syn.table,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let run = lp.run(config.x_init, config.horizon, &mut rng).expect("initial belief is winning");
    println!(
        "closed loop: {} steps, verdict {}, max x2 {:.3}, belief misses {}",
        run.trace.len(),
        run_verdict(&lp, &run, config.settle_window()).as_str(),
        run.max_x2(),
        run.belief_misses
    );
    Ok(())
}
