//! Exact zero-order-hold discretization of the buck converter.
//!
//! cargo run --example discretization

use beliefsynth::config::RunConfig;
use beliefsynth::plant::spectral_radius2;
use beliefsynth::Switch;

fn main() -> beliefsynth::Result<()> {
    let config = RunConfig::default();
    let plant = config.plant()?;
    for s in [Switch::On, Switch::Off] {
        let a = plant.a(s);
        let k = plant.k(s);
        println!("switch {}:", s.as_str());
        println!("  A = [[{:.12e}, {:.12e}], [{:.12e}, {:.12e}]]", a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        println!("  K = [{:.12e}, {:.12e}]", k[0], k[1]);
        println!("  spectral radius {:.12}", spectral_radius2(a));
    }
    println!("cycle length N1 = {} steps", plant.cycle());
    Ok(())
}
