//! Raw abstraction of the toy plant: both successor lists of a few states
//! and the reachable state count.
//!
//! cargo run --example raw_abstraction

use beliefsynth::config::RunConfig;
use beliefsynth::pipeline::build_raw;
use beliefsynth::raw::RawState;
use beliefsynth::Action;

fn main() -> beliefsynth::Result<()> {
    let (raw, init) = build_raw(&RunConfig::toy())?;
    println!("initial {init:?}");
    for q in [init[0], RawState::new((2, 2), 2), RawState::new((4, 3), 1)] {
        for a in Action::ALL {
            println!("{q:?} --{a}--> {:?}", raw.successors(q, a));
        }
    }
    let reach = raw.reachable(&init);
    println!("{} of {} raw states reachable", reach.len(), raw.num_states());
    Ok(())
}
