//! End to end on the toy plant: abstraction, synthesis, one closed-loop run
//! with its trace CSV, and the randomized theorem harness.
//!
//! cargo run --release --example toy_closed_loop

use beliefsynth::config::RunConfig;
use beliefsynth::ltl::harness::theorem_harness;
use beliefsynth::pipeline::{build, run_verdict};
use beliefsynth::sim::ClosedLoop;
use beliefsynth::Action;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> beliefsynth::Result<()> {
    let config = RunConfig::toy();
    let built = build(&config)?;
    let syn = built.synthesize();
    println!(
        "{} beliefs, stay core {}, winning {}, initial winning {}",
        built.belief.len(),
        syn.core_size,
        syn.table.num_winning(),
        syn.success()
    );
    let lp = ClosedLoop {
        raw: &built.raw,
        belief: &built.belief,
        table: &syn.table,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let run = lp.run(config.x_init, config.horizon, &mut rng).expect("winning start");
    let cycles = run.decisions.iter().filter(|d| d.action == Action::Cycle).count();
    println!(
        "run: {} steps, {} decisions ({} cycles), verdict {}, belief misses {}",
        run.trace.len(),
        run.decisions.len(),
        cycles,
        run_verdict(&lp, &run, config.settle_window()).as_str(),
        run.belief_misses
    );
    for line in run.trace.to_csv_string(&[]).lines().take(6) {
        println!("  {line}");
    }
    let report = theorem_harness(&lp, config.x_init, config.horizon, 200, config.seed);
    println!(
        "harness: {}/{} prefix, {}/{} transfer, {} faults",
        report.prefix_pass, report.trials, report.transfer_pass, report.trials, report.faults
    );
    Ok(())
}
