mod common;

use beliefsynth::config::RunConfig;
use beliefsynth::pipeline::build_raw;
use common::soundness::raw_misses;

fn check(cfg: RunConfig, seed: u64) {
    let (raw, _) = build_raw(&cfg).unwrap();
    let report = raw_misses(&raw, 10_000, seed);
    assert_eq!(report.misses, 0, "{:?}", report.first_miss);
}

fn buck(r: f64, literal_eq9: bool) -> RunConfig {
    RunConfig {
        disturbance_radius: r,
        literal_eq9,
        ..RunConfig::default()
    }
}

#[test]
fn final_set_successors_are_sound() {
    check(buck(0.0, false), 21);
    check(buck(0.05, false), 22);
}

#[test]
fn literal_successors_are_sound() {
    check(buck(0.0, true), 23);
    check(buck(0.05, true), 24);
}

#[test]
fn exits_are_exercised() {
    let (raw, _) = build_raw(&buck(0.05, false)).unwrap();
    let report = raw_misses(&raw, 10_000, 25);
    assert!(report.exits_seen > 100, "{}", report.exits_seen);
}

#[test]
fn toy_successors_are_sound() {
    for literal_eq9 in [false, true] {
        check(
            RunConfig {
                literal_eq9,
                ..RunConfig::toy()
            },
            26,
        );
    }
}
