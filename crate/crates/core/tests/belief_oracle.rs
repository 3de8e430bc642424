mod common;

use std::collections::BTreeSet;

use beliefsynth::belief::stages::{count_stage, reduction_stages, StageOptions};
use beliefsynth::belief::{construct_belief, BeliefState};
use beliefsynth::config::RunConfig;
use beliefsynth::hybrid::Action;
use beliefsynth::pipeline::build_raw;
use common::oracle_belief;

fn compare(cfg: &RunConfig) -> usize {
    let (raw, init) = build_raw(cfg).unwrap();
    let belief = construct_belief(&raw, &init, None).unwrap();
    let oracle = oracle_belief(&raw, &init);

    let produced: BTreeSet<BeliefState> = belief.states().iter().copied().collect();
    assert_eq!(produced, oracle.states);
    for (id, p) in belief.states().iter().enumerate() {
        for a in Action::ALL {
            let got: BTreeSet<BeliefState> = belief.successors(id as u32, a).iter().map(|&s| *belief.state(s)).collect();
            assert_eq!(&got, &oracle.succ[&(*p, a)], "{p:?} under {a}");
        }
        assert_eq!(belief.label(id as u32).label.target(), oracle.target[p], "{p:?}");
        assert_eq!(belief.label(id as u32).label.safe(), *p != BeliefState::Out);
    }
    belief.len()
}

#[test]
fn toy_matches_subset_construction() {
    let n = compare(&RunConfig::toy());
    assert!(n > 10, "{n}");
}

#[test]
fn toy_variants_match_subset_construction() {
    let toy = RunConfig::toy();
    for (r, literal_eq9, x_init) in [(0.0, false, [0.3, 0.3]), (0.0, true, [2.5, 1.5]), (0.05, true, [1.0, 2.0])] {
        compare(&RunConfig {
            disturbance_radius: r,
            literal_eq9,
            x_init,
            ..toy.clone()
        });
    }
    // a point on a grid corner starts from several cells
    compare(&RunConfig {
        x_init: [1.0, 2.0],
        ..toy
    });
}

#[test]
fn rectangular_stage_counts_the_belief_abstraction() {
    for cfg in [RunConfig::toy(), RunConfig { disturbance_radius: 0.0, ..RunConfig::toy() }] {
        let (raw, init) = build_raw(&cfg).unwrap();
        let belief = construct_belief(&raw, &init, None).unwrap();
        let (n, capped) = count_stage(&raw, &init, StageOptions::RECTANGULAR, 1_000_000);
        assert!(!capped);
        assert_eq!(n, belief.len());
    }
}

#[test]
fn every_reduction_is_below_the_unreduced_count() {
    let (raw, init) = build_raw(&RunConfig::toy()).unwrap();
    let stages = reduction_stages(&raw, &init, 1_000_000);
    assert_eq!(stages.len(), 4);
    assert!(stages.iter().all(|s| !s.capped));
    for s in &stages[1..] {
        assert!(s.states < stages[0].states, "{stages:?}");
    }
}
