//! Zonotopic reach sets from one grid cell, with hull-based and exact
//! intersection tests against the target box.
//!
//! cargo run --example reach_sets

use beliefsynth::config::RunConfig;
use beliefsynth::zonogeom::{reach_k, IntersectMode};
use beliefsynth::Switch;

fn main() -> beliefsynth::Result<()> {
    let config = RunConfig {
        disturbance_radius: 0.05,
        ..RunConfig::default()
    };
    let plant = config.plant()?;
    let grid = config.grid()?;
    let target = config.target()?;
    let cell = grid.cell_box((24, 46));
    println!("start cell x1 {:?}, x2 {:?}", cell.interval(0), cell.interval(1));
    for (s, ks) in [(Switch::On, [1, 4, 48]), (Switch::Off, [1, 4, 52])] {
        for k in ks {
            let z = reach_k(&cell, s, k, &plant)?;
            let h = z.interval_hull();
            println!(
                "{:>3} {} steps: {} generators, hull x1 [{:.3}, {:.3}] x2 [{:.4}, {:.4}], meets target (hull {}, exact {}), inside target {}",
                k,
                s.as_str(),
                z.num_generators(),
                h.interval(0).0,
                h.interval(0).1,
                h.interval(1).0,
                h.interval(1).1,
                z.intersects_box(&target, IntersectMode::Hull)?,
                z.intersects_box(&target, IntersectMode::Exact)?,
                z.contained_in_box(&target)?,
            );
        }
    }
    Ok(())
}
