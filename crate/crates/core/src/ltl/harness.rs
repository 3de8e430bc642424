//! Randomized closed-loop checks relating the concrete execution, the raw
//! abstraction and the belief abstraction.
//!
//! For every trial the raw execution is rebuilt by looking up the cell of the
//! true state and the row of the measured voltage at each decision instant,
//! switching to `Out` for good once the true state has left the domain.
//! The projected bad prefix of the concrete word must equal the bad prefix of
//! the raw word, and a belief word without violation must carry over to the
//! concrete word.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{decision_positions, first_safety_violation, Label, Word};
use crate::belief::OUT_ID;
use crate::hybrid::Action;
use crate::raw::{RawAbstraction, RawState};
use crate::sim::{observation_map, ClosedLoopRun, Execution};

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct HarnessReport {
    pub trials: usize,
    pub prefix_pass: usize,
    pub transfer_pass: usize,
    pub faults: usize,
    pub failures: Vec<String>,
}

impl HarnessReport {
    pub fn all_passed(&self) -> bool {
        self.prefix_pass == self.trials && self.transfer_pass == self.trials && self.faults == 0
    }
}

/// Raw state whose region contains the decision-instant state, preferring
/// the candidate whose label matches the concrete label.
pub fn raw_state_of(raw: &RawAbstraction, x: [f64; 2], x_hat2: f64, concrete: Label) -> RawState {
    let grid = raw.grid();
    let (Some(cols), Some(rows), Some(meas)) = (grid.cells_at(0, x[0]), grid.cells_at(1, x[1]), grid.cells_at(1, x_hat2))
    else {
        return RawState::Out;
    };
    let mut best = RawState::new((cols.0, rows.0), meas.0);
    for i in cols.0..=cols.1 {
        for j in rows.0..=rows.1 {
            let q = RawState::new((i, j), meas.0);
            if raw.label(q) == concrete {
                best = q;
            }
        }
    }
    best
}

/// Projection of the bad prefix: positions past `k*` are dropped before
/// collapsing the cycles.
fn proj_bpref(actions: &[Action], labels: &[Label], cycle_len: usize) -> Vec<Label> {
    let w = Word::finite(labels.iter().copied());
    let end = first_safety_violation(&w).unwrap_or(labels.len());
    decision_positions(&actions[..end], cycle_len)
        .into_iter()
        .map(|k| labels[k])
        .collect()
}

fn bpref(labels: &[Label]) -> Vec<Label> {
    let w = Word::finite(labels.iter().copied());
    let end = first_safety_violation(&w).unwrap_or(labels.len());
    labels[..end].to_vec()
}

// A violation inside a cycle is projected away on the concrete side but shows
// up at the next decision instant on the raw side; compare up to it.
fn strip_violation(mut w: Vec<Label>) -> Vec<Label> {
    if first_safety_violation(&Word::finite(w.iter().copied())) == Some(w.len()) && !w.is_empty() {
        w.pop();
    }
    w
}

fn check_trial<E: Execution + ?Sized>(lp: &E, run: &ClosedLoopRun) -> (bool, bool, Option<String>) {
    let (raw, belief) = (lp.raw(), lp.belief());
    let map = observation_map(raw);
    let n1 = raw.plant().cycle();
    let concrete = run.labels(&map);
    let actions = run.trace.actions();
    let positions = decision_positions(&actions, n1);

    // The raw execution takes the exit successor once the concrete one has
    // left the domain anywhere inside a macro-step.
    let mut gone = false;
    let raw_word: Vec<Label> = positions
        .iter()
        .enumerate()
        .map(|(n, &k)| {
            let from = if n == 0 { 0 } else { positions[n - 1] + 1 };
            gone |= concrete[from..=k].iter().any(|l| !l.safe());
            if gone {
                return Label::EMPTY;
            }
            let r = &run.trace.records[k];
            raw.label(raw_state_of(raw, [r.x[0], r.x[1]], r.x_hat[1], concrete[k]))
        })
        .collect();
    let lhs = strip_violation(proj_bpref(&actions, &concrete, n1));
    let rhs = strip_violation(bpref(&raw_word));
    let prefix_ok = lhs == rhs;

    // Transfer is claimed only along belief paths that never allow an exit,
    // which every path of a winning controller satisfies.
    let belief_word: Vec<Label> = run.decisions.iter().map(|d| belief.label(d.belief).label).collect();
    let exit_free = run.decisions.iter().all(|d| !belief.successors(d.belief, d.action).contains(&OUT_ID));
    let belief_ok = exit_free && first_safety_violation(&Word::finite(belief_word.iter().copied())).is_none();
    let mut transfer_ok = true;
    if belief_ok {
        transfer_ok &= first_safety_violation(&Word::finite(concrete.iter().copied())).is_none();
        if let Some(d) = run.decisions.iter().find(|d| belief.label(d.belief).label.target()) {
            transfer_ok &= concrete[d.k..].iter().all(|l| l.target());
        }
    }
    let msg = (!prefix_ok || !transfer_ok).then(|| {
        format!(
            "prefix_ok={prefix_ok} transfer_ok={transfer_ok} |proj bpref|={} |raw bpref|={}",
            lhs.len(),
            rhs.len()
        )
    });
    (prefix_ok, transfer_ok, msg)
}

/// Runs `trials` executions from `x_init`, trial `t` drawing its
/// disturbances from stream `t` of a generator seeded with `seed`.
pub fn theorem_harness<E: Execution + ?Sized>(lp: &E, x_init: [f64; 2], horizon: usize, trials: usize, seed: u64) -> HarnessReport {
    let results: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            match lp.execute(x_init, horizon, &mut rng) {
                Err(e) => (false, false, true, Some(format!("trial {t}: {e}"))),
                Ok(run) => {
                    let (p, tr, msg) = check_trial(lp, &run);
                    let fault = run.fault.is_some();
                    let msg = match (&run.fault, msg) {
                        (Some(f), _) => Some(format!("trial {t}: {f}")),
                        (None, Some(m)) => Some(format!("trial {t}: {m}")),
                        (None, None) => None,
                    };
                    (p, tr, fault, msg)
                }
            }
        })
        .collect();
    let mut report = HarnessReport {
        trials,
        ..Default::default()
    };
    for (p, t, f, msg) in results {
        report.prefix_pass += p as usize;
        report.transfer_pass += t as usize;
        report.faults += f as usize;
        report.failures.extend(msg);
    }
    report
}
