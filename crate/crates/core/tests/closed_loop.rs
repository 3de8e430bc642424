use beliefsynth::config::RunConfig;
use beliefsynth::ltl::harness::theorem_harness;
use beliefsynth::ltl::Verdict;
use beliefsynth::pipeline::{build, run_verdict};
use beliefsynth::runtime::{Runtime, RuntimeError};
use beliefsynth::sim::{ClosedLoop, PeriodicLoop};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy(r: f64) -> RunConfig {
    RunConfig {
        disturbance_radius: r,
        ..RunConfig::toy()
    }
}

#[test]
fn toy_harness_passes() {
    for r in [0.0, 0.05] {
        let cfg = toy(r);
        let built = build(&cfg).unwrap();
        let syn = built.synthesize();
        assert!(syn.success(), "r = {r}");
        let lp = ClosedLoop {
            raw: &built.raw,
            belief: &built.belief,
            table: &syn.table,
        };
        let report = theorem_harness(&lp, cfg.x_init, cfg.horizon, 200, cfg.seed);
        assert!(report.all_passed(), "r = {r}: {:?}", &report.failures[..report.failures.len().min(3)]);
        assert_eq!(theorem_harness(&lp, cfg.x_init, cfg.horizon, 0, 1), Default::default());
    }
}

#[test]
fn toy_runs_settle_and_track_the_state() {
    let cfg = toy(0.05);
    let built = build(&cfg).unwrap();
    let syn = built.synthesize();
    let lp = ClosedLoop {
        raw: &built.raw,
        belief: &built.belief,
        table: &syn.table,
    };
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = lp.run(cfg.x_init, cfg.horizon, &mut rng).unwrap();
        assert!(run.fault.is_none());
        assert_eq!(run.belief_misses, 0, "seed {seed}");
        assert_eq!(run.trace.len(), cfg.horizon);
        assert_eq!(run_verdict(&lp, &run, cfg.settle_window()), Verdict::SatisfiedAtDeskScale);
    }
}

#[test]
fn runtime_refuses_bad_starts() {
    let cfg = toy(0.05);
    let built = build(&cfg).unwrap();
    let syn = built.synthesize();
    let grid = built.raw.grid();
    assert!(matches!(
        Runtime::init(&built.belief, &syn.table, grid, [7.0, 1.0]),
        Err(RuntimeError::OutsideDomain(..))
    ));
    // a start that was never explored has no belief state at all
    assert!(matches!(
        Runtime::init(&built.belief, &syn.table, grid, [5.9, 5.9]),
        Err(RuntimeError::NotWinning { .. })
    ));
    let mut rt = Runtime::init(&built.belief, &syn.table, grid, cfg.x_init).unwrap();
    assert_eq!(rt.observe(&[]), Err(RuntimeError::NoPendingAction));
}

#[test]
fn periodic_buck_executions_pass_the_harness() {
    let cfg = RunConfig {
        disturbance_radius: 0.05,
        ..RunConfig::default()
    };
    let built = build(&cfg).unwrap();
    let lp = PeriodicLoop {
        raw: &built.raw,
        belief: &built.belief,
        holds: 30,
    };
    let report = theorem_harness(&lp, cfg.x_init, 10_000, 20, cfg.seed);
    assert!(report.all_passed(), "{:?}", report.failures.first());
}
